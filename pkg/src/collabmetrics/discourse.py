"""Comment sentiment scoring and topic tagging, aggregated by dyad type.

Both stages sit behind small interfaces so an external pipeline (a heavier
sentiment model, a neural topic classifier, or labels precomputed
out-of-band) can be plugged in without touching the aggregation. The
bundled defaults are deterministic: a valence-lexicon scorer with
negation/booster rules and a keyword-rule topic classifier over the fixed
five-category schema.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from statistics import fmean, pstdev
from typing import Collection, Iterable, Mapping, Protocol, Sequence

from collabmetrics.collab import CollaborationDyad
from collabmetrics.corpus import CommentRecord, Corpus
from collabmetrics.errors import ConfigurationError, ValidationError

__all__ = [
    "TOPIC_CATEGORIES",
    "SentimentScore",
    "TopicLabel",
    "DiscourseReport",
    "DiscourseRow",
    "SentimentScorer",
    "TopicClassifier",
    "LexiconSentimentScorer",
    "KeywordTopicClassifier",
    "score_sentiment",
    "tag_topic",
    "score_comments",
    "label_comments",
    "load_sentiment_lexicon",
    "load_topic_keywords",
    "load_precomputed_labels",
    "aggregate_discourse",
]

TOPIC_CATEGORIES = ("gameplay", "environment", "food", "appearance", "other")

# Scoring constants: negation flips-and-damps, boosters step toward the
# valence sign, and the sum is squashed by s / sqrt(s^2 + alpha).
NEGATION_SCALAR = -0.74
BOOSTER_STEP = 0.293
NORMALIZATION_ALPHA = 15.0
CONTEXT_WINDOW = 3

NEGATORS = frozenset(
    {
        "not", "no", "never", "neither", "nor", "none", "nothing", "nobody",
        "cannot", "cant", "can't", "wont", "won't", "dont", "don't",
        "doesnt", "doesn't", "didnt", "didn't", "isnt", "isn't",
        "aint", "ain't", "arent", "aren't", "wasnt", "wasn't",
        "werent", "weren't", "hardly", "barely", "rarely", "without",
    }
)

BOOSTERS = frozenset(
    {
        "very", "really", "extremely", "absolutely", "incredibly", "so",
        "totally", "super", "completely", "utterly", "insanely", "truly",
        "highly", "seriously", "especially", "remarkably", "unbelievably",
    }
)

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def _tokenize(text: str) -> list[str]:
    return [t for t in (tok.strip("'") for tok in _TOKEN_RE.findall(text.lower())) if t]


@dataclass(frozen=True)
class SentimentScore:
    comment_id: str
    compound: float


@dataclass(frozen=True)
class TopicLabel:
    comment_id: str
    label: str


class SentimentScorer(Protocol):
    def score(self, text: str) -> float: ...


class TopicClassifier(Protocol):
    def classify(self, text: str) -> str: ...


def load_sentiment_lexicon(path: str | Path) -> dict[str, float]:
    """Load a (token, valence) CSV lexicon."""
    lexicon: dict[str, float] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            lexicon[row["token"].strip().lower()] = float(row["valence"])
    return lexicon


def load_topic_keywords(path: str | Path) -> dict[str, frozenset[str]]:
    """Load a (category, token) CSV keyword table."""
    table: dict[str, set[str]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            table.setdefault(row["category"].strip(), set()).add(row["token"].strip().lower())
    return {cat: frozenset(tokens) for cat, tokens in table.items()}


@lru_cache(maxsize=1)
def _bundled_lexicon() -> dict[str, float]:
    with resources.files("collabmetrics.data").joinpath("sentiment_lexicon.csv").open(
        newline="", encoding="utf-8"
    ) as fh:
        return {row["token"].strip().lower(): float(row["valence"]) for row in csv.DictReader(fh)}


@lru_cache(maxsize=1)
def _bundled_keywords() -> dict[str, frozenset[str]]:
    table: dict[str, set[str]] = {}
    with resources.files("collabmetrics.data").joinpath("topic_keywords.csv").open(
        newline="", encoding="utf-8"
    ) as fh:
        for row in csv.DictReader(fh):
            table.setdefault(row["category"].strip(), set()).add(row["token"].strip().lower())
    return {cat: frozenset(tokens) for cat, tokens in table.items()}


class LexiconSentimentScorer:
    """Deterministic valence-lexicon scorer.

    For each lexicon token: boosters within the 3 preceding tokens add
    0.293 toward the token's valence sign (each booster once), then any
    negator within the same window multiplies the result by -0.74. Token
    contributions are summed and squashed to (-1, 1) via
    ``s / sqrt(s^2 + 15)``; text with no lexicon hits scores 0.
    """

    def __init__(self, lexicon: Mapping[str, float] | None = None):
        self.lexicon = dict(lexicon) if lexicon is not None else _bundled_lexicon()

    def score(self, text: str) -> float:
        if not text:
            return 0.0
        tokens = _tokenize(text)
        total = 0.0
        for i, token in enumerate(tokens):
            valence = self.lexicon.get(token)
            if valence is None:
                continue
            window = tokens[max(0, i - CONTEXT_WINDOW):i]
            boosters = sum(1 for w in window if w in BOOSTERS)
            sign = 1.0 if valence > 0 else -1.0
            adjusted = valence + sign * BOOSTER_STEP * boosters
            if any(w in NEGATORS for w in window):
                adjusted *= NEGATION_SCALAR
            total += adjusted
        if total == 0.0:
            return 0.0
        normalized = total / (total * total + NORMALIZATION_ALPHA) ** 0.5
        return max(-1.0, min(1.0, normalized))


class KeywordTopicClassifier:
    """Keyword-count topic classifier over a fixed category schema.

    The highest-scoring category wins; a comment with no keyword hits
    falls to ``other``. Ties break deterministically by schema order
    (gameplay before environment before food before appearance).
    """

    def __init__(
        self,
        keywords: Mapping[str, Collection[str]] | None = None,
        schema: Sequence[str] = TOPIC_CATEGORIES,
    ):
        if "other" not in schema:
            raise ConfigurationError("topic schema must include the 'other' category")
        self.schema = tuple(schema)
        table = keywords if keywords is not None else _bundled_keywords()
        unknown = set(table) - set(self.schema)
        if unknown:
            raise ConfigurationError(f"keyword categories outside schema: {sorted(unknown)}")
        self.keywords = {cat: frozenset(t.lower() for t in table.get(cat, ())) for cat in self.schema}

    def classify(self, text: str) -> str:
        tokens = _tokenize(text)
        best, best_score = "other", 0
        for cat in self.schema:
            if cat == "other":
                continue
            score = sum(1 for t in tokens if t in self.keywords[cat])
            if score > best_score:
                best, best_score = cat, score
        return best


def score_sentiment(text: str, scorer: SentimentScorer | None = None) -> float:
    """Compound sentiment in (-1, 1) for one text (default bundled scorer)."""
    return (scorer or _default_scorer()).score(text)


def tag_topic(text: str, classifier: TopicClassifier | None = None) -> str:
    """Topic label for one text (default bundled keyword classifier)."""
    return (classifier or _default_classifier()).classify(text)


@lru_cache(maxsize=1)
def _default_scorer() -> LexiconSentimentScorer:
    return LexiconSentimentScorer()


@lru_cache(maxsize=1)
def _default_classifier() -> KeywordTopicClassifier:
    return KeywordTopicClassifier()


def score_comments(
    comments: Iterable[CommentRecord], scorer: SentimentScorer | None = None
) -> list[SentimentScore]:
    scorer = scorer or _default_scorer()
    return [SentimentScore(c.comment_id, scorer.score(c.text)) for c in comments]


def label_comments(
    comments: Iterable[CommentRecord], classifier: TopicClassifier | None = None
) -> list[TopicLabel]:
    classifier = classifier or _default_classifier()
    return [TopicLabel(c.comment_id, classifier.classify(c.text)) for c in comments]


def load_precomputed_labels(path: str | Path) -> list[TopicLabel]:
    """Import externally computed topic labels (JSON-lines: comment_id, label)."""
    labels: list[TopicLabel] = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                labels.append(TopicLabel(str(row["comment_id"]), str(row["label"])))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValidationError(f"{Path(path).name}:{line_no}: {exc}") from exc
    return labels


@dataclass(frozen=True)
class DiscourseRow:
    """One dyad-type (or baseline) row of the discourse report."""

    group: str
    comment_count: int
    mean_sentiment: float
    stdev_sentiment: float
    topic_proportions: Mapping[str, float]


@dataclass(frozen=True)
class DiscourseReport:
    community: str
    categories: tuple[str, ...]
    by_dyad_type: Mapping[str, DiscourseRow]
    baseline: DiscourseRow | None


def _make_row(group: str, scores: list[float], labels: list[str], categories: Sequence[str]) -> DiscourseRow:
    counts = {cat: 0 for cat in categories}
    for label in labels:
        counts[label] += 1
    n = len(labels)
    return DiscourseRow(
        group=group,
        comment_count=n,
        mean_sentiment=fmean(scores),
        stdev_sentiment=pstdev(scores) if n > 1 else 0.0,
        topic_proportions={cat: counts[cat] / n for cat in categories},
    )


def aggregate_discourse(
    comments: Sequence[CommentRecord],
    labels: Sequence[TopicLabel],
    scores: Sequence[SentimentScore],
    dyads: Sequence[CollaborationDyad],
    corpus: Corpus,
    exclude_videos: Collection[str] = (),
) -> DiscourseReport:
    """Aggregate per-comment sentiment and topics by dyad type.

    Comments under a dyad's videos feed that dyad type; comments under
    videos in no dyad (and not in ``exclude_videos``, which callers use
    for multi-party collaboration videos) feed the non-collaboration
    baseline. Aggregation weights each comment equally. Dyad types with
    zero comments are omitted rather than zero-filled.
    """
    label_by_id = {lab.comment_id: lab.label for lab in labels}
    score_by_id = {sc.comment_id: sc.compound for sc in scores}
    dyad_type_of_video: dict[str, str] = {}
    for dyad in dyads:
        for video_id in dyad.videos:
            dyad_type_of_video[video_id] = dyad.dyad_type

    observed = set(label_by_id.values())
    categories = (
        TOPIC_CATEGORIES
        if observed <= set(TOPIC_CATEGORIES)
        else tuple(sorted(observed | set(TOPIC_CATEGORIES)))
    )

    excluded = set(exclude_videos)
    grouped_scores: dict[str, list[float]] = {}
    grouped_labels: dict[str, list[str]] = {}
    baseline_scores: list[float] = []
    baseline_labels: list[str] = []
    for comment in comments:
        try:
            score = score_by_id[comment.comment_id]
            label = label_by_id[comment.comment_id]
        except KeyError:
            raise ValidationError(
                f"comment {comment.comment_id!r} lacks a sentiment score or topic label"
            ) from None
        dyad_type = dyad_type_of_video.get(comment.video_id)
        if dyad_type is not None:
            grouped_scores.setdefault(dyad_type, []).append(score)
            grouped_labels.setdefault(dyad_type, []).append(label)
        elif comment.video_id not in excluded:
            baseline_scores.append(score)
            baseline_labels.append(label)

    by_dyad_type = {
        dyad_type: _make_row(dyad_type, grouped_scores[dyad_type], grouped_labels[dyad_type], categories)
        for dyad_type in sorted(grouped_scores)
    }
    baseline = (
        _make_row("baseline", baseline_scores, baseline_labels, categories)
        if baseline_scores
        else None
    )
    return DiscourseReport(
        community=corpus.community,
        categories=categories,
        by_dyad_type=by_dyad_type,
        baseline=baseline,
    )
