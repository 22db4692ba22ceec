"""Canonical data model and file ingestion.

Three record kinds make up a corpus: a channel registry, a video corpus,
and a comment corpus. Files are UTF-8 CSV (declared header) or JSON-lines,
one record per row/line, with ISO-8601 timestamps. Loaded collections are
validated, immutable, and safe to share across threads.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Protocol, Sequence

from collabmetrics.errors import NoBaselineError, ValidationError

__all__ = [
    "ChannelRecord",
    "VideoRecord",
    "CommentRecord",
    "Corpus",
    "RowError",
    "CommentLoadReport",
    "FetchAdapter",
    "ReplayFetchAdapter",
    "normalize_handle",
    "load_registry",
    "load_videos",
    "load_comments",
    "load_corpus_dir",
    "write_registry",
    "write_videos",
    "write_comments",
    "write_corpus",
    "channel_baseline",
    "exact_median",
    "cap_videos_per_channel",
]

logger = logging.getLogger(__name__)

# Fixed registry CSV columns; any other column is treated as an attribute.
_REGISTRY_FIXED = ("channel_id", "handles", "display_name", "community")
_HANDLE_SEP = "|"


def normalize_handle(handle: str) -> str:
    """Lowercase, strip a leading ``@`` and surrounding whitespace."""
    h = handle.strip()
    if h.startswith("@"):
        h = h[1:]
    return h.lower()


def _parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat()


@dataclass(frozen=True)
class ChannelRecord:
    """One creator channel in the analysis registry."""

    channel_id: str
    handles: tuple[str, ...]
    display_name: str
    attributes: Mapping[str, str]
    community: str

    def attribute(self, key: str) -> str:
        try:
            return self.attributes[key]
        except KeyError:
            raise ValidationError(
                f"channel {self.channel_id!r} has no attribute {key!r}"
            ) from None


@dataclass(frozen=True)
class VideoRecord:
    """One published video with its engagement metadata."""

    video_id: str
    channel_id: str
    published_at: datetime
    title: str
    description: str
    view_count: int
    like_count: int | None = None
    comment_count: int | None = None


@dataclass(frozen=True)
class CommentRecord:
    """One audience comment below a video."""

    comment_id: str
    video_id: str
    author_id: str
    text: str
    published_at: datetime
    like_count: int | None = None


@dataclass(frozen=True)
class RowError:
    """A rejected input row: 1-based line number plus the reason."""

    line: int
    message: str


@dataclass(frozen=True)
class CommentLoadReport:
    """Side-channel output of comment loading."""

    orphans: tuple[CommentRecord, ...] = ()
    errors: tuple[RowError, ...] = ()


@dataclass(frozen=True)
class Corpus:
    """A validated registry + videos + comments for one community."""

    registry: tuple[ChannelRecord, ...]
    videos: tuple[VideoRecord, ...]
    comments: tuple[CommentRecord, ...]
    community: str

    def channels_by_id(self) -> dict[str, ChannelRecord]:
        return {ch.channel_id: ch for ch in self.registry}

    def videos_by_id(self) -> dict[str, VideoRecord]:
        return {v.video_id: v for v in self.videos}

    def videos_by_channel(self) -> dict[str, list[VideoRecord]]:
        out: dict[str, list[VideoRecord]] = {ch.channel_id: [] for ch in self.registry}
        for v in self.videos:
            out[v.channel_id].append(v)
        return out


def build_corpus(
    registry: Sequence[ChannelRecord],
    videos: Sequence[VideoRecord],
    comments: Sequence[CommentRecord],
    community: str | None = None,
) -> Corpus:
    """Assemble a corpus, enforcing referential integrity and a single community."""
    communities = {ch.community for ch in registry}
    if len(communities) > 1:
        raise ValidationError(f"registry spans multiple communities: {sorted(communities)}")
    if community is None:
        community = next(iter(communities)) if communities else ""
    channel_ids = {ch.channel_id for ch in registry}
    for v in videos:
        if v.channel_id not in channel_ids:
            raise ValidationError(f"video {v.video_id!r} references unknown channel {v.channel_id!r}")
    video_ids = {v.video_id for v in videos}
    for c in comments:
        if c.video_id not in video_ids:
            raise ValidationError(f"comment {c.comment_id!r} references unknown video {c.video_id!r}")
    return Corpus(tuple(registry), tuple(videos), tuple(comments), community)


# ---------------------------------------------------------------------------
# Row codecs


def _is_csv(path: Path) -> bool:
    return path.suffix.lower() == ".csv"


def _iter_rows(path: Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, raw_mapping) from a CSV or JSON-lines file."""
    if _is_csv(path):
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for i, row in enumerate(reader, start=2):  # line 1 is the header
                if None in row:
                    row = {k: v for k, v in row.items() if k is not None}
                    row["__extra__"] = "row has more cells than the header"
                yield i, row
    else:
        with path.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                yield i, json.loads(line)


def _opt_int(raw: object) -> int | None:
    if raw is None or raw == "":
        return None
    return int(raw)


def _registry_from_row(row: Mapping[str, object]) -> ChannelRecord:
    if "handles" in row and isinstance(row["handles"], str):
        handles = tuple(
            normalize_handle(h) for h in str(row["handles"]).split(_HANDLE_SEP) if h.strip()
        )
    else:
        handles = tuple(normalize_handle(h) for h in row.get("handles", ()))  # type: ignore[arg-type]
    if not handles:
        raise ValueError("channel has no handles")
    attributes = row.get("attributes")
    if attributes is None:
        # CSV flattening: every non-fixed column is an attribute.
        attributes = {
            k: str(v) for k, v in row.items() if k not in _REGISTRY_FIXED and k != "__extra__"
        }
    return ChannelRecord(
        channel_id=str(row["channel_id"]),
        handles=handles,
        display_name=str(row.get("display_name", "")),
        attributes=dict(attributes),  # type: ignore[arg-type]
        community=str(row.get("community", "")),
    )


def _video_from_row(row: Mapping[str, object]) -> VideoRecord:
    view_count = int(row["view_count"])  # type: ignore[arg-type]
    if view_count < 0:
        raise ValueError(f"negative view_count {view_count}")
    return VideoRecord(
        video_id=str(row["video_id"]),
        channel_id=str(row["channel_id"]),
        published_at=_parse_timestamp(str(row["published_at"])),
        title=str(row.get("title", "")),
        description=str(row.get("description", "")),
        view_count=view_count,
        like_count=_opt_int(row.get("like_count")),
        comment_count=_opt_int(row.get("comment_count")),
    )


def _comment_from_row(row: Mapping[str, object]) -> CommentRecord:
    return CommentRecord(
        comment_id=str(row["comment_id"]),
        video_id=str(row["video_id"]),
        author_id=str(row["author_id"]),
        text=str(row.get("text", "")),
        published_at=_parse_timestamp(str(row["published_at"])),
        like_count=_opt_int(row.get("like_count")),
    )


# ---------------------------------------------------------------------------
# Loaders


def load_registry(path: str | Path, attribute_key: str = "gender") -> list[ChannelRecord]:
    """Load and validate the channel registry.

    Handle normalization is applied on load. Raises :class:`ValidationError`
    naming the offenders on duplicate channel ids, duplicate normalized
    handles, or a missing dyad-typing attribute; the registry is the analysis
    universe, so it is loaded strictly rather than row-by-row.
    """
    path = Path(path)
    records: list[ChannelRecord] = []
    for line_no, row in _iter_rows(path):
        try:
            records.append(_registry_from_row(row))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"{path.name}:{line_no}: {exc}") from exc

    problems: list[str] = []
    id_owners: dict[str, str] = {}
    for rec in records:
        if rec.channel_id in id_owners:
            problems.append(f"duplicate channel_id {rec.channel_id!r}")
        id_owners[rec.channel_id] = rec.channel_id
    handle_owners: dict[str, list[str]] = {}
    for rec in records:
        for h in rec.handles:
            handle_owners.setdefault(h, []).append(rec.channel_id)
    for h, owners in sorted(handle_owners.items()):
        if len(owners) > 1:
            problems.append(f"handle {h!r} shared by channels {owners}")
    for rec in records:
        if attribute_key not in rec.attributes:
            problems.append(f"channel {rec.channel_id!r} missing attribute {attribute_key!r}")
    if problems:
        raise ValidationError("; ".join(problems))
    return records


def load_videos(
    path: str | Path, registry: Sequence[ChannelRecord]
) -> tuple[list[VideoRecord], list[RowError]]:
    """Load videos, keeping well-formed rows and collecting the rest.

    Rows with an unknown channel, a duplicate video id, a negative view
    count, or a parse failure are diverted into the per-row error report
    instead of aborting the load. Returns records sorted by
    ``(channel_id, published_at)``.
    """
    path = Path(path)
    known = {ch.channel_id for ch in registry}
    records: list[VideoRecord] = []
    errors: list[RowError] = []
    seen: set[str] = set()
    for line_no, row in _iter_rows(path):
        try:
            rec = _video_from_row(row)
        except (KeyError, ValueError, TypeError) as exc:
            errors.append(RowError(line_no, f"malformed row: {exc}"))
            continue
        if rec.channel_id not in known:
            errors.append(RowError(line_no, f"unknown channel_id {rec.channel_id!r}"))
            continue
        if rec.video_id in seen:
            errors.append(RowError(line_no, f"duplicate video_id {rec.video_id!r}"))
            continue
        seen.add(rec.video_id)
        records.append(rec)
    records.sort(key=lambda v: (v.channel_id, v.published_at))
    return records, errors


def load_comments(
    path: str | Path, videos: Sequence[VideoRecord]
) -> tuple[list[CommentRecord], CommentLoadReport]:
    """Load comments line by line (the corpus can be millions of rows).

    Comments pointing at an unknown video are diverted to the orphan
    report; malformed rows and duplicate comment ids go to the error
    report. Well-formed, referentially valid rows are always kept.
    """
    path = Path(path)
    known = {v.video_id for v in videos}
    records: list[CommentRecord] = []
    orphans: list[CommentRecord] = []
    errors: list[RowError] = []
    seen: set[str] = set()
    for line_no, row in _iter_rows(path):
        try:
            rec = _comment_from_row(row)
        except (KeyError, ValueError, TypeError) as exc:
            errors.append(RowError(line_no, f"malformed row: {exc}"))
            continue
        if rec.comment_id in seen:
            errors.append(RowError(line_no, f"duplicate comment_id {rec.comment_id!r}"))
            continue
        seen.add(rec.comment_id)
        if rec.video_id not in known:
            orphans.append(rec)
            continue
        records.append(rec)
    return records, CommentLoadReport(tuple(orphans), tuple(errors))


def load_corpus_dir(directory: str | Path, attribute_key: str = "gender") -> Corpus:
    """Load ``registry``, ``videos`` and ``comments`` files from one directory.

    Accepts either the ``.jsonl`` or ``.csv`` spelling of each file. Row
    errors are tolerated (the accepted subset is analyzed); registry
    problems raise.
    """
    directory = Path(directory)

    def find(stem: str) -> Path:
        for suffix in (".jsonl", ".csv"):
            candidate = directory / f"{stem}{suffix}"
            if candidate.exists():
                return candidate
        raise FileNotFoundError(f"no {stem}.jsonl or {stem}.csv in {directory}")

    registry = load_registry(find("registry"), attribute_key=attribute_key)
    videos, video_errors = load_videos(find("videos"), registry)
    comments, comment_report = load_comments(find("comments"), videos)
    if video_errors:
        logger.warning("%s: dropped %d malformed video row(s)", directory, len(video_errors))
    if comment_report.errors or comment_report.orphans:
        logger.warning(
            "%s: dropped %d malformed and %d orphan comment row(s)",
            directory,
            len(comment_report.errors),
            len(comment_report.orphans),
        )
    return build_corpus(registry, videos, comments)


# ---------------------------------------------------------------------------
# Writers (inverse of the loaders; round-trip preserves records field-for-field)


def _registry_to_row(rec: ChannelRecord) -> dict:
    return {
        "channel_id": rec.channel_id,
        "handles": list(rec.handles),
        "display_name": rec.display_name,
        "attributes": dict(rec.attributes),
        "community": rec.community,
    }


def _video_to_row(rec: VideoRecord) -> dict:
    row = {
        "video_id": rec.video_id,
        "channel_id": rec.channel_id,
        "published_at": _format_timestamp(rec.published_at),
        "title": rec.title,
        "description": rec.description,
        "view_count": rec.view_count,
    }
    if rec.like_count is not None:
        row["like_count"] = rec.like_count
    if rec.comment_count is not None:
        row["comment_count"] = rec.comment_count
    return row


def _comment_to_row(rec: CommentRecord) -> dict:
    row = {
        "comment_id": rec.comment_id,
        "video_id": rec.video_id,
        "author_id": rec.author_id,
        "text": rec.text,
        "published_at": _format_timestamp(rec.published_at),
    }
    if rec.like_count is not None:
        row["like_count"] = rec.like_count
    return row


def _write_jsonl(path: Path, rows: Iterable[dict]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def write_registry(records: Sequence[ChannelRecord], path: str | Path) -> None:
    path = Path(path)
    if _is_csv(path):
        attr_keys = sorted({k for rec in records for k in rec.attributes})
        header = ["channel_id", "handles", "display_name", "community", *attr_keys]
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for rec in records:
                writer.writerow(
                    [
                        rec.channel_id,
                        _HANDLE_SEP.join(rec.handles),
                        rec.display_name,
                        rec.community,
                        *[rec.attributes.get(k, "") for k in attr_keys],
                    ]
                )
    else:
        _write_jsonl(path, (_registry_to_row(r) for r in records))


def _write_tabular(
    path: Path, rows: list[dict], header: Sequence[str]
) -> None:
    if _is_csv(path):
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(header), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    else:
        _write_jsonl(path, rows)


def write_videos(records: Sequence[VideoRecord], path: str | Path) -> None:
    header = [
        "video_id", "channel_id", "published_at", "title", "description",
        "view_count", "like_count", "comment_count",
    ]
    _write_tabular(Path(path), [_video_to_row(r) for r in records], header)


def write_comments(records: Sequence[CommentRecord], path: str | Path) -> None:
    header = ["comment_id", "video_id", "author_id", "text", "published_at", "like_count"]
    _write_tabular(Path(path), [_comment_to_row(r) for r in records], header)


def write_corpus(corpus: Corpus, directory: str | Path, fmt: str = "jsonl") -> dict[str, Path]:
    """Write the three corpus files into ``directory``; returns their paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    suffix = ".csv" if fmt == "csv" else ".jsonl"
    paths = {
        "registry": directory / f"registry{suffix}",
        "videos": directory / f"videos{suffix}",
        "comments": directory / f"comments{suffix}",
    }
    write_registry(corpus.registry, paths["registry"])
    write_videos(corpus.videos, paths["videos"])
    write_comments(corpus.comments, paths["comments"])
    return paths


# ---------------------------------------------------------------------------
# Baselines


def exact_median(values: Sequence[int]) -> Fraction:
    """Median over exact integers; even counts take the rational midpoint."""
    if not values:
        raise ValueError("median of empty sequence")
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return Fraction(ordered[mid])
    return Fraction(ordered[mid - 1] + ordered[mid], 2)


def channel_baseline(
    channel_id: str,
    videos: Sequence[VideoRecord],
    exclude: frozenset[str] | set[str] = frozenset(),
) -> Fraction:
    """Median view count of a channel's videos outside ``exclude``.

    The exclusion set normally holds the channel's own collaboration
    videos so the baseline reflects solo performance. Raises
    :class:`NoBaselineError` when nothing is left; callers skip the dyad
    rather than treating the channel as a zero-view baseline.
    """
    views = [
        v.view_count
        for v in videos
        if v.channel_id == channel_id and v.video_id not in exclude
    ]
    if not views:
        raise NoBaselineError(
            f"channel {channel_id!r} has no videos after excluding {len(exclude)} video(s)"
        )
    return exact_median(views)


def attribute_histogram(registry: Sequence[ChannelRecord], key: str) -> Counter:
    return Counter(rec.attributes.get(key) for rec in registry)


def cap_videos_per_channel(videos: Sequence[VideoRecord], cap: int) -> list[VideoRecord]:
    """Keep at most ``cap`` most recent videos per channel (platform-style cap)."""
    by_channel: dict[str, list[VideoRecord]] = {}
    for v in videos:
        by_channel.setdefault(v.channel_id, []).append(v)
    kept: list[VideoRecord] = []
    for channel_videos in by_channel.values():
        channel_videos.sort(key=lambda v: v.published_at)
        kept.extend(channel_videos[-cap:])
    kept.sort(key=lambda v: (v.channel_id, v.published_at))
    return kept


# ---------------------------------------------------------------------------
# Fetch adapter (paged retrieval surface for pluggable platform clients)


class FetchAdapter(Protocol):
    """Paged retrieval interface a real platform client can implement."""

    def list_videos(
        self, channel_id: str, page_token: str | None = None
    ) -> tuple[list[VideoRecord], str | None]: ...

    def list_comments(
        self, video_id: str, page_token: str | None = None
    ) -> tuple[list[CommentRecord], str | None]: ...


@dataclass
class ReplayFetchAdapter:
    """Replays already-loaded records through the paged fetch interface."""

    videos: Sequence[VideoRecord]
    comments: Sequence[CommentRecord]
    page_size: int = 100
    _videos_by_channel: dict[str, list[VideoRecord]] = field(init=False, repr=False)
    _comments_by_video: dict[str, list[CommentRecord]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        vids: dict[str, list[VideoRecord]] = {}
        for v in sorted(self.videos, key=lambda v: (v.channel_id, v.published_at, v.video_id)):
            vids.setdefault(v.channel_id, []).append(v)
        self._videos_by_channel = vids
        coms: dict[str, list[CommentRecord]] = {}
        for c in sorted(self.comments, key=lambda c: (c.video_id, c.published_at, c.comment_id)):
            coms.setdefault(c.video_id, []).append(c)
        self._comments_by_video = coms

    def _page(self, items: list, page_token: str | None) -> tuple[list, str | None]:
        start = int(page_token) if page_token else 0
        end = start + self.page_size
        next_token = str(end) if end < len(items) else None
        return items[start:end], next_token

    def list_videos(
        self, channel_id: str, page_token: str | None = None
    ) -> tuple[list[VideoRecord], str | None]:
        return self._page(self._videos_by_channel.get(channel_id, []), page_token)

    def list_comments(
        self, video_id: str, page_token: str | None = None
    ) -> tuple[list[CommentRecord], str | None]:
        return self._page(self._comments_by_video.get(video_id, []), page_token)


def fetch_all_videos(adapter: FetchAdapter, channel_id: str) -> list[VideoRecord]:
    """Drain every page of an adapter's video listing."""
    out: list[VideoRecord] = []
    token: str | None = None
    while True:
        page, token = adapter.list_videos(channel_id, token)
        out.extend(page)
        if token is None:
            return out
