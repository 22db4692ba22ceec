"""Sentiment scorer, topic classifier, and dyad-type aggregation."""

from __future__ import annotations

import json
import math

import pytest

from collabmetrics.collab import CollaborationDyad
from collabmetrics.corpus import build_corpus
from collabmetrics.discourse import (
    TOPIC_CATEGORIES,
    KeywordTopicClassifier,
    LexiconSentimentScorer,
    SentimentScore,
    TopicLabel,
    aggregate_discourse,
    label_comments,
    load_precomputed_labels,
    load_sentiment_lexicon,
    load_topic_keywords,
    score_comments,
    score_sentiment,
    tag_topic,
)
from collabmetrics.errors import ConfigurationError

from .conftest import make_channel, make_comment, make_video


class TestScorer:
    def test_empty_text_scores_zero(self):
        assert score_sentiment("") == 0.0

    def test_single_token_normalization(self):
        scorer = LexiconSentimentScorer({"solid": 2.0})
        assert scorer.score("solid") == pytest.approx(2 / math.sqrt(19), abs=1e-12)

    def test_negation_flips_and_damps(self):
        scorer = LexiconSentimentScorer({"good": 1.9})
        expected = (1.9 * -0.74) / math.sqrt((1.9 * 0.74) ** 2 + 15)
        assert scorer.score("not good") == pytest.approx(expected, abs=1e-9)
        assert scorer.score("not good") == pytest.approx(-0.341, abs=5e-4)

    def test_negation_window_is_three_tokens(self):
        scorer = LexiconSentimentScorer({"good": 1.9})
        assert scorer.score("not really that good") < 0  # negator 3 tokens back
        assert scorer.score("not a b c good") > 0  # negator out of window

    def test_booster_steps_toward_sign(self):
        scorer = LexiconSentimentScorer({"good": 1.9, "bad": -1.9})
        plain = scorer.score("good")
        assert scorer.score("very good") > plain
        assert scorer.score("very bad") < scorer.score("bad")

    def test_bounded_open_interval(self):
        scorer = LexiconSentimentScorer({"love": 3.2})
        text = "love " * 60
        assert -1.0 < scorer.score(text) < 1.0

    def test_no_hits_scores_zero(self):
        assert score_sentiment("the quick brown fox") == 0.0

    def test_deterministic(self):
        text = "really not terrible, actually very good"
        assert score_sentiment(text) == score_sentiment(text)

    def test_custom_lexicon_from_file(self, tmp_path):
        path = tmp_path / "lex.csv"
        path.write_text("token,valence\nzork,2.0\n", encoding="utf-8")
        scorer = LexiconSentimentScorer(load_sentiment_lexicon(path))
        assert scorer.score("zork") == pytest.approx(2 / math.sqrt(19))

    def test_bundled_good_value(self):
        # 'good' carries valence 1.9 in the bundled lexicon
        assert score_sentiment("good") == pytest.approx(1.9 / math.sqrt(1.9**2 + 15), abs=1e-12)


class TestClassifier:
    def test_gameplay_keyword(self):
        assert tag_topic("your aim is insane") == "gameplay"

    def test_empty_text_is_other(self):
        assert tag_topic("") == "other"

    def test_no_keywords_is_other(self):
        assert tag_topic("wow amazing stuff friend") == "other"

    def test_tie_breaks_by_schema_order(self):
        classifier = KeywordTopicClassifier(
            {"gameplay": {"alpha"}, "environment": {"beta"}, "food": set(), "appearance": set()}
        )
        assert classifier.classify("alpha beta") == "gameplay"
        classifier = KeywordTopicClassifier(
            {"gameplay": set(), "environment": {"beta"}, "food": {"gamma"}, "appearance": set()}
        )
        assert classifier.classify("gamma beta") == "environment"

    def test_highest_count_wins(self):
        classifier = KeywordTopicClassifier(
            {"gameplay": {"alpha"}, "environment": {"beta"}}
        )
        assert classifier.classify("beta beta alpha") == "environment"

    def test_schema_without_other_rejected(self):
        with pytest.raises(ConfigurationError):
            KeywordTopicClassifier({}, schema=("gameplay", "environment"))

    def test_unknown_keyword_category_rejected(self):
        with pytest.raises(ConfigurationError):
            KeywordTopicClassifier({"memes": {"lol"}})

    def test_custom_keywords_from_file(self, tmp_path):
        path = tmp_path / "kw.csv"
        path.write_text("category,token\nfood,zorp\n", encoding="utf-8")
        classifier = KeywordTopicClassifier(load_topic_keywords(path))
        assert classifier.classify("zorp!") == "food"

    def test_precomputed_labels_round_trip(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        rows = [
            {"comment_id": "c1", "label": "food", "score": 0.9},
            {"comment_id": "c2", "label": "other"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
        labels = load_precomputed_labels(path)
        assert labels == [TopicLabel("c1", "food"), TopicLabel("c2", "other")]


class TestAggregate:
    def _fixture(self):
        registry = [
            make_channel("A", "hosta", gender="M"),
            make_channel("B", "guestb", gender="M"),
        ]
        videos = [
            make_video("collab", "A", description="with @guestb"),
            make_video("plain", "A", offset_hours=1),
            make_video("multi", "A", offset_hours=2),
        ]
        comments = [
            make_comment("c1", "collab", "u1"),
            make_comment("c2", "collab", "u2"),
            make_comment("c3", "plain", "u3"),
            make_comment("c4", "multi", "u4"),
        ]
        corpus = build_corpus(registry, videos, comments)
        dyads = [CollaborationDyad("A", "B", ("collab",), "M-M")]
        return corpus, dyads

    def _run(self, scores_by_id, labels_by_id, exclude=()):
        corpus, dyads = self._fixture()
        scores = [SentimentScore(cid, s) for cid, s in scores_by_id.items()]
        labels = [TopicLabel(cid, lab) for cid, lab in labels_by_id.items()]
        return aggregate_discourse(
            corpus.comments, labels, scores, dyads, corpus, exclude_videos=exclude
        )

    def test_hand_computed_means(self):
        report = self._run(
            {"c1": 0.1, "c2": 0.3, "c3": 0.2, "c4": 0.0},
            {"c1": "gameplay", "c2": "other", "c3": "food", "c4": "other"},
        )
        assert report.by_dyad_type["M-M"].mean_sentiment == pytest.approx(0.2)
        assert report.by_dyad_type["M-M"].comment_count == 2
        assert report.baseline.mean_sentiment == pytest.approx(0.1)  # c3 and c4

    def test_all_zero_scores(self):
        report = self._run(
            {"c1": 0.0, "c2": 0.0, "c3": 0.0, "c4": 0.0},
            {cid: "other" for cid in ("c1", "c2", "c3", "c4")},
        )
        assert report.by_dyad_type["M-M"].mean_sentiment == 0.0
        assert report.baseline.mean_sentiment == 0.0

    def test_exclude_videos_leave_both_pools(self):
        report = self._run(
            {"c1": 0.5, "c2": 0.5, "c3": 0.25, "c4": 0.75},
            {cid: "other" for cid in ("c1", "c2", "c3", "c4")},
            exclude={"multi"},
        )
        assert report.baseline.comment_count == 1
        assert report.baseline.mean_sentiment == pytest.approx(0.25)

    def test_topic_proportions_sum_to_one(self):
        report = self._run(
            {"c1": 0.0, "c2": 0.0, "c3": 0.0, "c4": 0.0},
            {"c1": "gameplay", "c2": "appearance", "c3": "food", "c4": "food"},
        )
        for row in [*report.by_dyad_type.values(), report.baseline]:
            assert abs(sum(row.topic_proportions.values()) - 1.0) <= 1e-12
            assert set(row.topic_proportions) == set(TOPIC_CATEGORIES)

    def test_types_with_no_comments_omitted(self):
        corpus, dyads = self._fixture()
        dyads = dyads + [CollaborationDyad("B", "A", ("plain",), "W-M")]
        # no comments under any W-M video? c3 sits on 'plain' which is now W-M
        scores = [SentimentScore(c.comment_id, 0.0) for c in corpus.comments]
        labels = [TopicLabel(c.comment_id, "other") for c in corpus.comments]
        report = aggregate_discourse(corpus.comments, labels, scores, dyads, corpus)
        assert set(report.by_dyad_type) == {"M-M", "W-M"}
        report2 = aggregate_discourse(
            [c for c in corpus.comments if c.comment_id != "c3"], labels, scores, dyads, corpus
        )
        assert set(report2.by_dyad_type) == {"M-M"}

    def test_report_structure_stable_across_plugins(self):
        corpus, dyads = self._fixture()
        rows = {}
        for scorer, classifier in (
            (LexiconSentimentScorer({"good": 1.9}), KeywordTopicClassifier({"food": {"ramen"}})),
            (LexiconSentimentScorer({"bad": -2.0}), KeywordTopicClassifier()),
        ):
            scores = score_comments(corpus.comments, scorer)
            labels = label_comments(corpus.comments, classifier)
            report = aggregate_discourse(corpus.comments, labels, scores, dyads, corpus)
            rows[id(scorer)] = {
                group: (set(row.topic_proportions), row.comment_count)
                for group, row in report.by_dyad_type.items()
            }
        first, second = rows.values()
        assert first == second  # structure (groups, categories, counts) is plugin-independent
