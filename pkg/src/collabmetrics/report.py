"""End-to-end report bundles.

A run loads one corpus directory per community, executes every analysis
stage, and renders seven plot-ready artifacts plus a provenance manifest:

    shares.csv        collaboration share per dyad type, rows per community
    synergy_host.csv  aggregated normalized host contributions (dyad-type columns)
    synergy_guest.csv aggregated normalized guest contributions
    reciprocity.csv   which side of a collaboration is more popular
    centrality.csv    closeness distribution summaries per attribute value
    discourse.csv     sentiment/topic aggregation per dyad type + baseline
    entropy_cdf.csv   commenter entropy CDF points
    manifest.json     config, input digests, stage statuses, tool version

Output is deterministic: identical config and inputs produce byte-identical
bundles. Absent dyad-type cells render as an em dash. Human-readable tables
round to three significant decimals; CSV and JSON carry full precision.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from statistics import fmean
from typing import Mapping, Sequence

from collabmetrics import __version__, collab, discourse, netmetrics, synergy
from collabmetrics.corpus import Corpus, cap_videos_per_channel, load_corpus_dir
from collabmetrics.errors import CollabMetricsError

__all__ = ["RunConfig", "ReportBundle", "RunStageError", "run_report"]

logger = logging.getLogger(__name__)

ABSENT = "—"  # em dash for dyad types a community never produced

STAGES = ("ingest", "collabs", "synergy", "network", "entropy", "discourse", "render")


class RunStageError(CollabMetricsError):
    """A pipeline stage failed; the manifest records which one."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunConfig:
    """Everything a report run depends on; serialized into the manifest."""

    community_dirs: tuple[str, ...]
    out_dir: str
    attribute_key: str = "gender"
    baseline_mode: str = "solo"  # "solo" excludes own collaboration videos; "all" keeps them
    statistic: str = "median"
    min_comments: int = 1
    max_videos_per_channel: int | None = None
    formats: tuple[str, ...] = ("csv",)
    seed: int | None = None  # provenance only: the simulate seed behind the inputs

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, raw: Mapping) -> "RunConfig":
        data = dict(raw)
        for key in ("community_dirs", "formats"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass(frozen=True)
class ReportBundle:
    out_dir: Path
    artifacts: Mapping[str, Path]
    manifest_path: Path


@dataclass
class _CommunityResults:
    corpus: Corpus
    stats: collab.CollabShareStats
    synergy_report: synergy.SynergyReport
    reciprocity: synergy.ReciprocityStats
    centrality: netmetrics.CentralitySummary
    cdf: list[tuple[float, float]]
    discourse_report: discourse.DiscourseReport


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _num(value: Fraction | float | None) -> str:
    """Full-precision machine rendering; empty for missing."""
    if value is None:
        return ""
    return repr(float(value))


def format_compact(value: float | Fraction | None) -> str:
    """Three-significant-decimal rendering for human tables."""
    if value is None:
        return ABSENT
    x = float(value)
    if x == 0:
        return "0.000"
    if abs(x) >= 0.1:
        return f"{x:.3f}"
    return f"{x:.3g}"


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _analyze_community(
    corpus: Corpus, config: RunConfig, stage_done: dict[str, str]
) -> _CommunityResults:
    def run(stage: str, fn):
        try:
            value = fn()
        except Exception as exc:
            stage_done[stage] = f"failed: {exc}"
            raise RunStageError(stage, exc) from exc
        stage_done[stage] = "ok"
        return value

    partition = collab.partition_videos(corpus)
    dyads, stats = run(
        "collabs", lambda: collab.detect_collaborations(corpus, config.attribute_key, partition)
    )

    def synergy_stage():
        baselines = synergy.channel_baselines(corpus, partition, mode=config.baseline_mode)
        synergies, _ = synergy.compute_synergies(dyads, corpus, baselines)
        report = synergy.aggregate_by_dyad_type(synergies, corpus.community, config.statistic)
        recip = synergy.reciprocity(dyads, baselines, corpus.community)
        return report, recip

    report, recip = run("synergy", synergy_stage)

    def network_stage():
        graph = netmetrics.build_collab_graph(dyads, corpus.registry)
        attributes = {
            rec.channel_id: rec.attributes.get(config.attribute_key, "") for rec in corpus.registry
        }
        return netmetrics.closeness(graph, attributes)

    centrality = run("network", network_stage)

    def entropy_stage():
        attention = netmetrics.build_attention_graph(
            corpus.videos, corpus.comments, min_comments=config.min_comments
        )
        dist = netmetrics.commenter_entropy(attention)
        return netmetrics.entropy_cdf(dist)

    cdf = run("entropy", entropy_stage)

    def discourse_stage():
        scores = discourse.score_comments(corpus.comments)
        labels = discourse.label_comments(corpus.comments)
        return discourse.aggregate_discourse(
            corpus.comments, labels, scores, dyads, corpus, exclude_videos=partition.multi_way
        )

    discourse_report = run("discourse", discourse_stage)
    return _CommunityResults(corpus, stats, report, recip, centrality, cdf, discourse_report)


def run_report(config: RunConfig) -> ReportBundle:
    """Run the full pipeline and write the report bundle.

    The manifest is always written, even when a stage fails; on failure a
    :class:`RunStageError` propagates after the manifest records the stage.
    """
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stage_status: dict[str, str] = {stage: "not-run" for stage in STAGES}
    notes: list[str] = [
        "reciprocal dyads (A hosts B, B hosts A) are counted as distinct dyads",
        f"synergy aggregation statistic: {config.statistic}",
        f"baseline mode: {config.baseline_mode}",
    ]
    inputs: dict[str, dict[str, str]] = {}
    manifest_path = out_dir / "manifest.json"

    def write_manifest() -> None:
        manifest = {
            "tool": "collabmetrics",
            "version": __version__,
            "config": config.to_dict(),
            "inputs": inputs,
            "stages": stage_status,
            "notes": notes,
        }
        manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    try:
        corpora: list[Corpus] = []
        for directory in config.community_dirs:
            directory = Path(directory)
            try:
                corpus = load_corpus_dir(directory, attribute_key=config.attribute_key)
                if config.max_videos_per_channel is not None:
                    videos = cap_videos_per_channel(corpus.videos, config.max_videos_per_channel)
                    kept = {v.video_id for v in videos}
                    corpus = Corpus(
                        registry=corpus.registry,
                        videos=tuple(videos),
                        comments=tuple(c for c in corpus.comments if c.video_id in kept),
                        community=corpus.community,
                    )
            except Exception as exc:
                stage_status["ingest"] = f"failed: {exc}"
                raise RunStageError("ingest", exc) from exc
            for name in ("registry", "videos", "comments"):
                for suffix in (".jsonl", ".csv"):
                    candidate = directory / f"{name}{suffix}"
                    if candidate.exists():
                        inputs.setdefault(corpus.community, {})[candidate.name] = _digest(candidate)
            corpora.append(corpus)
        stage_status["ingest"] = "ok"

        results = [_analyze_community(corpus, config, stage_status) for corpus in corpora]

        for res in results:
            if res.stats.two_way_videos == 0:
                notes.append(f"no collaborations detected in community {res.corpus.community!r}")

        try:
            artifacts = _render(results, config, out_dir)
        except Exception as exc:
            stage_status["render"] = f"failed: {exc}"
            raise RunStageError("render", exc) from exc
        stage_status["render"] = "ok"
    finally:
        write_manifest()

    return ReportBundle(out_dir=out_dir, artifacts=artifacts, manifest_path=manifest_path)


def _type_columns(results: Sequence[_CommunityResults], attribute_key: str) -> list[str]:
    labels = sorted(
        {
            rec.attributes[attribute_key]
            for res in results
            for rec in res.corpus.registry
            if attribute_key in rec.attributes
        }
    )
    return synergy.dyad_type_order(labels)


def _render(
    results: Sequence[_CommunityResults], config: RunConfig, out_dir: Path
) -> dict[str, Path]:
    type_cols = _type_columns(results, config.attribute_key)
    artifacts: dict[str, Path] = {}

    # shares
    rows = []
    for res in results:
        stats = res.stats
        rows.append(
            [
                res.corpus.community,
                str(stats.total_videos),
                str(stats.two_way_videos),
                str(stats.multi_way_videos),
                _num(stats.two_way_share),
                *[
                    _num(stats.share_by_dyad_type[t]) if t in stats.share_by_dyad_type else ABSENT
                    for t in type_cols
                ],
            ]
        )
    artifacts["shares"] = out_dir / "shares.csv"
    _write_csv(
        artifacts["shares"],
        ["community", "total_videos", "two_way_videos", "multi_way_videos", "two_way_share"]
        + [f"share_{t}" for t in type_cols],
        rows,
    )

    # synergy tables (host and guest sides)
    for side in ("host", "guest"):
        rows = []
        for res in results:
            cells = []
            for t in type_cols:
                agg = res.synergy_report.rows.get(t)
                if agg is None:
                    cells.append(ABSENT)
                else:
                    cells.append(_num(agg.shapn_host if side == "host" else agg.shapn_guest))
            rows.append([res.corpus.community, res.synergy_report.statistic, *cells])
        artifacts[f"synergy_{side}"] = out_dir / f"synergy_{side}.csv"
        _write_csv(
            artifacts[f"synergy_{side}"],
            ["community", "statistic", *type_cols],
            rows,
        )

    # reciprocity
    rows = [
        [
            res.corpus.community,
            str(res.reciprocity.videos_counted),
            _num(res.reciprocity.host_greater),
            _num(res.reciprocity.guest_greater),
            _num(res.reciprocity.tied),
            str(res.reciprocity.skipped_videos),
        ]
        for res in results
    ]
    artifacts["reciprocity"] = out_dir / "reciprocity.csv"
    _write_csv(
        artifacts["reciprocity"],
        ["community", "videos_counted", "host_greater", "guest_greater", "tied", "skipped_videos"],
        rows,
    )

    # centrality distribution summary per attribute value
    rows = []
    for res in results:
        for attr, summary in res.centrality.by_attribute.items():
            rows.append(
                [
                    res.corpus.community,
                    attr,
                    str(len(summary.values)),
                    _num(summary.median),
                    _num(fmean(summary.values)),
                    _num(min(summary.values)),
                    _num(max(summary.values)),
                ]
            )
    artifacts["centrality"] = out_dir / "centrality.csv"
    _write_csv(
        artifacts["centrality"],
        ["community", "attribute_value", "n_channels", "median_closeness", "mean_closeness", "min_closeness", "max_closeness"],
        rows,
    )

    # discourse
    categories = results[0].discourse_report.categories if results else discourse.TOPIC_CATEGORIES
    rows = []
    for res in results:
        report = res.discourse_report
        table_rows = list(report.by_dyad_type.values())
        if report.baseline is not None:
            table_rows.append(report.baseline)
        for row in table_rows:
            rows.append(
                [
                    res.corpus.community,
                    row.group,
                    str(row.comment_count),
                    _num(row.mean_sentiment),
                    _num(row.stdev_sentiment),
                    *[_num(row.topic_proportions.get(cat, 0.0)) for cat in categories],
                ]
            )
    artifacts["discourse"] = out_dir / "discourse.csv"
    _write_csv(
        artifacts["discourse"],
        ["community", "group", "comment_count", "mean_sentiment", "stdev_sentiment"]
        + [f"prop_{cat}" for cat in categories],
        rows,
    )

    # entropy CDF points
    rows = []
    for res in results:
        for threshold, fraction in res.cdf:
            rows.append([res.corpus.community, _num(threshold), _num(fraction)])
    artifacts["entropy_cdf"] = out_dir / "entropy_cdf.csv"
    _write_csv(
        artifacts["entropy_cdf"],
        ["community", "threshold", "cumulative_fraction"],
        rows,
    )

    if "json" in config.formats:
        artifacts["report_json"] = out_dir / "report.json"
        artifacts["report_json"].write_text(
            json.dumps(_json_payload(results, type_cols), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    if "table" in config.formats:
        artifacts["report_table"] = out_dir / "report.txt"
        artifacts["report_table"].write_text(_text_tables(results, type_cols), encoding="utf-8")
    return artifacts


def _json_payload(results: Sequence[_CommunityResults], type_cols: list[str]) -> dict:
    payload: dict = {"communities": {}}
    for res in results:
        report = res.synergy_report
        payload["communities"][res.corpus.community] = {
            "shares": {
                "total_videos": res.stats.total_videos,
                "two_way_videos": res.stats.two_way_videos,
                "multi_way_videos": res.stats.multi_way_videos,
                "by_dyad_type": {t: float(f) for t, f in res.stats.share_by_dyad_type.items()},
            },
            "synergy": {
                "statistic": report.statistic,
                "rows": {
                    t: {
                        "dyad_count": agg.dyad_count,
                        "video_count": agg.video_count,
                        "shapn_host": float(agg.shapn_host),
                        "shapn_guest": float(agg.shapn_guest),
                    }
                    for t, agg in report.rows.items()
                },
            },
            "reciprocity": {
                "videos_counted": res.reciprocity.videos_counted,
                "host_greater": float(res.reciprocity.host_greater),
                "guest_greater": float(res.reciprocity.guest_greater),
                "tied": float(res.reciprocity.tied),
            },
            "centrality": {
                attr: {"median": s.median, "values": list(s.values)}
                for attr, s in res.centrality.by_attribute.items()
            },
            "entropy_cdf": [[t, f] for t, f in res.cdf],
            "discourse": {
                row.group: {
                    "comment_count": row.comment_count,
                    "mean_sentiment": row.mean_sentiment,
                    "stdev_sentiment": row.stdev_sentiment,
                    "topic_proportions": dict(row.topic_proportions),
                }
                for row in [
                    *res.discourse_report.by_dyad_type.values(),
                    *([res.discourse_report.baseline] if res.discourse_report.baseline else []),
                ]
            },
        }
    return payload


def _text_tables(results: Sequence[_CommunityResults], type_cols: list[str]) -> str:
    """Aligned text tables with compact numbers (three significant decimals)."""
    lines: list[str] = []

    def table(title: str, header: list[str], rows: list[list[str]]) -> None:
        lines.append(title)
        widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i]) for i in range(len(header))]
        lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
        for row in rows:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
        lines.append("")

    for side in ("host", "guest"):
        rows = []
        for res in results:
            cells = []
            for t in type_cols:
                agg = res.synergy_report.rows.get(t)
                value = None if agg is None else (agg.shapn_host if side == "host" else agg.shapn_guest)
                cells.append(format_compact(value))
            rows.append([res.corpus.community, *cells])
        table(f"Normalized contribution ({side} side)", ["community", *type_cols], rows)

    rows = [
        [
            res.corpus.community,
            format_compact(res.stats.two_way_share),
            str(res.stats.two_way_videos),
            str(res.stats.multi_way_videos),
        ]
        for res in results
    ]
    table("Collaboration shares", ["community", "two_way_share", "two_way", "multi_way"], rows)

    rows = []
    for res in results:
        for attr, summary in res.centrality.by_attribute.items():
            rows.append([res.corpus.community, attr, format_compact(summary.median)])
    table("Median closeness by attribute", ["community", "attribute", "median"], rows)
    return "\n".join(lines)
