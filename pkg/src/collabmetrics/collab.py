"""Collaboration detection from video descriptions.

A collaboration is a registered creator's handle appearing in another
registered creator's video description. Matching is case-insensitive on
normalized handles, tolerates an ``@`` prefix, and requires non-alphanumeric
characters (or string edges) on both sides so a handle never matches inside
a longer word. Scanning is left-to-right and non-overlapping, with the
longest registered handle winning at any position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from collabmetrics.corpus import ChannelRecord, Corpus, VideoRecord
from collabmetrics.errors import ValidationError

__all__ = [
    "MentionHit",
    "CollaborationDyad",
    "CollabShareStats",
    "VideoPartition",
    "HandleIndex",
    "extract_mentions",
    "partition_videos",
    "detect_collaborations",
    "classify_dyad",
]


@dataclass(frozen=True)
class MentionHit:
    """A registry handle found in a description (span in character offsets)."""

    video_id: str
    mentioned_channel_id: str
    matched_handle: str
    span: tuple[int, int]


@dataclass(frozen=True)
class CollaborationDyad:
    """An ordered (host, guest) pair with its collaboration videos.

    The host posts and owns the videos; the dyad_type label carries the
    host's attribute value first.
    """

    host: str
    guest: str
    videos: tuple[str, ...]
    dyad_type: str


@dataclass(frozen=True)
class CollabShareStats:
    """How collaboration videos split across a corpus (exact fractions)."""

    total_videos: int
    two_way_videos: int
    multi_way_videos: int
    share_by_dyad_type: Mapping[str, Fraction]

    @property
    def two_way_share(self) -> Fraction:
        if self.total_videos == 0:
            return Fraction(0)
        return Fraction(self.two_way_videos, self.total_videos)


@dataclass(frozen=True)
class VideoPartition:
    """Videos split by collaboration arity."""

    two_way: Mapping[str, str]  # video_id -> the single mentioned guest
    multi_way: frozenset[str]
    plain: frozenset[str]

    def collaboration_videos(self) -> frozenset[str]:
        return frozenset(self.two_way) | self.multi_way


class HandleIndex:
    """Compiled mention scanner over the registry's normalized handles."""

    def __init__(self, registry: Sequence[ChannelRecord]):
        self._owner_by_handle: dict[str, str] = {}
        for rec in registry:
            for handle in rec.handles:
                self._owner_by_handle[handle] = rec.channel_id
        if self._owner_by_handle:
            # Longest-first alternation so a longer handle wins at a position.
            alternation = "|".join(
                re.escape(h) for h in sorted(self._owner_by_handle, key=len, reverse=True)
            )
            self._pattern = re.compile(
                rf"(?<![0-9A-Za-z])@?({alternation})(?![0-9A-Za-z])", re.IGNORECASE
            )
        else:
            self._pattern = None

    def scan(self, video: VideoRecord) -> list[MentionHit]:
        if self._pattern is None or not video.description:
            return []
        hits: list[MentionHit] = []
        for match in self._pattern.finditer(video.description):
            handle = match.group(1).lower()
            owner = self._owner_by_handle[handle]
            if owner == video.channel_id:
                continue  # self-mentions are not collaborations
            hits.append(
                MentionHit(
                    video_id=video.video_id,
                    mentioned_channel_id=owner,
                    matched_handle=handle,
                    span=match.span(),
                )
            )
        return hits


def extract_mentions(
    video: VideoRecord, registry: Sequence[ChannelRecord] | HandleIndex
) -> list[MentionHit]:
    """All non-owner registry handles found in the description, by span start."""
    index = registry if isinstance(registry, HandleIndex) else HandleIndex(registry)
    return index.scan(video)


def classify_dyad(
    host: str,
    guest: str,
    registry: Sequence[ChannelRecord] | Mapping[str, ChannelRecord],
    attribute_key: str = "gender",
) -> str:
    """Dyad-type label: host's attribute value, hyphen, guest's value."""
    channels = (
        registry
        if isinstance(registry, Mapping)
        else {rec.channel_id: rec for rec in registry}
    )
    parts = []
    for channel_id in (host, guest):
        try:
            rec = channels[channel_id]
        except KeyError:
            raise ValidationError(f"channel {channel_id!r} not in registry") from None
        parts.append(rec.attribute(attribute_key))
    return f"{parts[0]}-{parts[1]}"


def partition_videos(corpus: Corpus, index: HandleIndex | None = None) -> VideoPartition:
    """Split videos into two-way, multi-way, and plain by distinct mentions."""
    index = index or HandleIndex(corpus.registry)
    two_way: dict[str, str] = {}
    multi_way: set[str] = set()
    plain: set[str] = set()
    for video in corpus.videos:
        mentioned = {hit.mentioned_channel_id for hit in index.scan(video)}
        if len(mentioned) == 1:
            two_way[video.video_id] = next(iter(mentioned))
        elif len(mentioned) > 1:
            multi_way.add(video.video_id)
        else:
            plain.add(video.video_id)
    return VideoPartition(two_way, frozenset(multi_way), frozenset(plain))


def detect_collaborations(
    corpus: Corpus,
    attribute_key: str = "gender",
    partition: VideoPartition | None = None,
) -> tuple[list[CollaborationDyad], CollabShareStats]:
    """Detect two-way collaboration dyads and the corpus share statistics.

    A video with exactly one distinct mentioned channel joins the
    (owner, mentioned) dyad; videos with two or more distinct mentions are
    counted as multi-way and excluded from dyads. (owner, mentioned) and
    (mentioned, owner) are distinct dyads; repeat videos between the same
    ordered pair accumulate into one dyad.
    """
    if partition is None:
        partition = partition_videos(corpus)
    channels = corpus.channels_by_id()
    owner_of = {v.video_id: v.channel_id for v in corpus.videos}

    videos_by_pair: dict[tuple[str, str], list[str]] = {}
    for video_id in sorted(partition.two_way):
        guest = partition.two_way[video_id]
        host = owner_of[video_id]
        videos_by_pair.setdefault((host, guest), []).append(video_id)

    dyads = [
        CollaborationDyad(
            host=host,
            guest=guest,
            videos=tuple(video_ids),
            dyad_type=classify_dyad(host, guest, channels, attribute_key),
        )
        for (host, guest), video_ids in sorted(videos_by_pair.items())
    ]

    total = len(corpus.videos)
    type_counts: dict[str, int] = {}
    for dyad in dyads:
        type_counts[dyad.dyad_type] = type_counts.get(dyad.dyad_type, 0) + len(dyad.videos)
    shares = (
        {t: Fraction(n, total) for t, n in sorted(type_counts.items())} if total else {}
    )
    stats = CollabShareStats(
        total_videos=total,
        two_way_videos=len(partition.two_way),
        multi_way_videos=len(partition.multi_way),
        share_by_dyad_type=shares,
    )
    return dyads, stats
