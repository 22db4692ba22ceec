"""Two-way Shapley contributions and normalized synergy per dyad.

For a dyad with host A and guest B over N collaboration videos with views
V_1..V_N, the host contribution is ``mean(V) - median_views(B)`` and the
guest contribution is ``mean(V) - median_views(A)``: each side's
contribution is what the pair achieves beyond the other side's usual
performance. The normalized form divides by the same partner median and
subtracts one. A companion ``lift`` column (``mean(V)/median - 1``) is
emitted as the conventional effect-size reading of the same comparison.

All per-dyad arithmetic is exact over rationals; floats appear only when
reports are rendered.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from collabmetrics.collab import CollaborationDyad, VideoPartition, partition_videos
from collabmetrics.corpus import Corpus, VideoRecord, channel_baseline
from collabmetrics.errors import NoBaselineError, ZeroBaselineError

__all__ = [
    "DyadSynergy",
    "SynergyReport",
    "TypeAggregate",
    "ReciprocityStats",
    "SynergyDiagnostics",
    "dyad_synergy",
    "channel_baselines",
    "compute_synergies",
    "aggregate_by_dyad_type",
    "reciprocity",
    "dyad_type_order",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DyadSynergy:
    """Raw and normalized contributions for one dyad.

    ``shapn_*`` fields are None when the dividing baseline is zero; such
    dyads keep their raw contributions but are excluded from normalized
    aggregates.
    """

    dyad: CollaborationDyad
    n_videos: int
    mean_collab_views: Fraction
    baseline_host: Fraction
    baseline_guest: Fraction
    shap2_host: Fraction
    shap2_guest: Fraction
    shapn_host: Fraction | None
    shapn_guest: Fraction | None

    @property
    def lift_host(self) -> Fraction | None:
        if self.baseline_guest == 0:
            return None
        return self.mean_collab_views / self.baseline_guest - 1

    @property
    def lift_guest(self) -> Fraction | None:
        if self.baseline_host == 0:
            return None
        return self.mean_collab_views / self.baseline_host - 1


@dataclass(frozen=True)
class TypeAggregate:
    dyad_type: str
    dyad_count: int
    video_count: int
    shapn_host: Fraction
    shapn_guest: Fraction


@dataclass(frozen=True)
class SynergyReport:
    """Aggregated normalized contributions per dyad type for one community.

    ``rows`` holds observed dyad types only; an absent type means absent,
    never zero.
    """

    community: str
    statistic: str
    rows: Mapping[str, TypeAggregate]
    excluded_dyads: int = 0


@dataclass(frozen=True)
class ReciprocityStats:
    """Per-video comparison of host vs guest baseline popularity."""

    community: str
    videos_counted: int
    host_greater: Fraction
    guest_greater: Fraction
    tied: Fraction
    skipped_videos: int = 0


@dataclass(frozen=True)
class SynergyDiagnostics:
    """Dyads that could not enter normalized aggregates, with reasons."""

    skipped_no_baseline: tuple[tuple[str, str, str], ...] = ()  # (host, guest, reason)
    zero_baseline: tuple[tuple[str, str], ...] = ()


def _mean_views(
    dyad: CollaborationDyad, videos: Mapping[str, VideoRecord]
) -> Fraction:
    total = sum(videos[vid].view_count for vid in dyad.videos)
    return Fraction(total, len(dyad.videos))


def _as_video_map(
    videos: Mapping[str, VideoRecord] | Sequence[VideoRecord],
) -> Mapping[str, VideoRecord]:
    if isinstance(videos, Mapping):
        return videos
    return {v.video_id: v for v in videos}


def dyad_synergy(
    dyad: CollaborationDyad,
    videos: Mapping[str, VideoRecord] | Sequence[VideoRecord],
    baselines: Mapping[str, Fraction],
) -> DyadSynergy:
    """Exact contributions for one dyad.

    Raises :class:`ZeroBaselineError` when either baseline is zero, since
    the normalized value divides by it; callers wanting the raw
    contributions anyway use :func:`compute_synergies`, which retains them.
    """
    mean = _mean_views(dyad, _as_video_map(videos))
    baseline_host = baselines[dyad.host]
    baseline_guest = baselines[dyad.guest]
    if baseline_host == 0 or baseline_guest == 0:
        raise ZeroBaselineError(
            f"dyad ({dyad.host}, {dyad.guest}): zero baseline makes the "
            "normalized contribution undefined"
        )
    return _build_synergy(dyad, mean, baseline_host, baseline_guest)


def _build_synergy(
    dyad: CollaborationDyad,
    mean: Fraction,
    baseline_host: Fraction,
    baseline_guest: Fraction,
) -> DyadSynergy:
    shap2_host = mean - baseline_guest
    shap2_guest = mean - baseline_host
    return DyadSynergy(
        dyad=dyad,
        n_videos=len(dyad.videos),
        mean_collab_views=mean,
        baseline_host=baseline_host,
        baseline_guest=baseline_guest,
        shap2_host=shap2_host,
        shap2_guest=shap2_guest,
        shapn_host=None if baseline_guest == 0 else shap2_host / baseline_guest - 1,
        shapn_guest=None if baseline_host == 0 else shap2_guest / baseline_host - 1,
    )


def channel_baselines(
    corpus: Corpus,
    partition: VideoPartition | None = None,
    mode: str = "solo",
) -> dict[str, Fraction]:
    """Median viewership baseline per channel.

    ``mode="solo"`` (default) excludes each channel's own collaboration
    videos so the baseline reflects solo performance; ``mode="all"`` keeps
    every video. Channels with nothing left after exclusion are absent
    from the result (their dyads get skipped downstream).
    """
    if mode not in ("solo", "all"):
        raise ValueError(f"unknown baseline mode {mode!r}")
    exclude: frozenset[str] = frozenset()
    if mode == "solo":
        if partition is None:
            partition = partition_videos(corpus)
        exclude = partition.collaboration_videos()
    by_channel = corpus.videos_by_channel()
    baselines: dict[str, Fraction] = {}
    for channel_id, channel_videos in by_channel.items():
        try:
            baselines[channel_id] = channel_baseline(channel_id, channel_videos, exclude)
        except NoBaselineError:
            logger.info("channel %s has no baseline videos; its dyads will be skipped", channel_id)
    return baselines


def compute_synergies(
    dyads: Sequence[CollaborationDyad],
    corpus: Corpus,
    baselines: Mapping[str, Fraction],
) -> tuple[list[DyadSynergy], SynergyDiagnostics]:
    """Per-dyad synergy for every dyad with usable baselines.

    Dyads with a missing baseline are skipped entirely; dyads with a zero
    baseline keep their raw contributions (normalized fields None) and are
    surfaced in the diagnostics.
    """
    videos = corpus.videos_by_id()
    out: list[DyadSynergy] = []
    skipped: list[tuple[str, str, str]] = []
    zeroed: list[tuple[str, str]] = []
    for dyad in dyads:
        missing = [c for c in (dyad.host, dyad.guest) if c not in baselines]
        if missing:
            reason = f"no baseline for {', '.join(missing)}"
            logger.info("skipping dyad (%s, %s): %s", dyad.host, dyad.guest, reason)
            skipped.append((dyad.host, dyad.guest, reason))
            continue
        mean = _mean_views(dyad, videos)
        baseline_host = baselines[dyad.host]
        baseline_guest = baselines[dyad.guest]
        if baseline_host == 0 or baseline_guest == 0:
            zeroed.append((dyad.host, dyad.guest))
        out.append(_build_synergy(dyad, mean, baseline_host, baseline_guest))
    return out, SynergyDiagnostics(tuple(skipped), tuple(zeroed))


def _central(values: list[Fraction], statistic: str) -> Fraction:
    if statistic == "mean":
        return sum(values, Fraction(0)) / len(values)
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2


def aggregate_by_dyad_type(
    synergies: Sequence[DyadSynergy],
    community: str = "",
    statistic: str = "median",
) -> SynergyReport:
    """Aggregate normalized contributions per dyad type.

    The default statistic is the median, which stays stable under the
    heavy-tailed viewership these corpora show; the mean is available for
    comparison. Dyads lacking normalized values are excluded and counted.
    """
    if statistic not in ("median", "mean"):
        raise ValueError(f"unknown statistic {statistic!r}")
    groups: dict[str, list[DyadSynergy]] = {}
    excluded = 0
    for syn in synergies:
        if syn.shapn_host is None or syn.shapn_guest is None:
            excluded += 1
            continue
        groups.setdefault(syn.dyad.dyad_type, []).append(syn)
    rows = {
        dyad_type: TypeAggregate(
            dyad_type=dyad_type,
            dyad_count=len(group),
            video_count=sum(s.n_videos for s in group),
            shapn_host=_central([s.shapn_host for s in group], statistic),
            shapn_guest=_central([s.shapn_guest for s in group], statistic),
        )
        for dyad_type, group in sorted(groups.items())
    }
    return SynergyReport(community=community, statistic=statistic, rows=rows, excluded_dyads=excluded)


def reciprocity(
    dyads: Sequence[CollaborationDyad],
    baselines: Mapping[str, Fraction],
    community: str = "",
) -> ReciprocityStats:
    """Fractions of collaboration videos where the host or guest side is
    the more popular one (by baseline median), with ties separate.

    Videos whose dyad lacks a baseline on either side are excluded and
    counted in ``skipped_videos``.
    """
    host_greater = guest_greater = tied = skipped = 0
    for dyad in dyads:
        n = len(dyad.videos)
        if dyad.host not in baselines or dyad.guest not in baselines:
            skipped += n
            continue
        host_baseline = baselines[dyad.host]
        guest_baseline = baselines[dyad.guest]
        if host_baseline > guest_baseline:
            host_greater += n
        elif guest_baseline > host_baseline:
            guest_greater += n
        else:
            tied += n
    counted = host_greater + guest_greater + tied
    if counted == 0:
        return ReciprocityStats(community, 0, Fraction(0), Fraction(0), Fraction(0), skipped)
    return ReciprocityStats(
        community=community,
        videos_counted=counted,
        host_greater=Fraction(host_greater, counted),
        guest_greater=Fraction(guest_greater, counted),
        tied=Fraction(tied, counted),
        skipped_videos=skipped,
    )


def dyad_type_order(labels: Sequence[str]) -> list[str]:
    """Canonical dyad-type column order as the label cross product.

    Labels sort descending, which for the binary gender case yields the
    conventional W-W, W-M, M-W, M-M column order.
    """
    ordered = sorted(set(labels), reverse=True)
    return [f"{a}-{b}" for a in ordered for b in ordered]
