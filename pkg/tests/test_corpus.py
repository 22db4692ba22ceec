"""Corpus loading, validation, serialization round-trips, and baselines."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collabmetrics.corpus import (
    ReplayFetchAdapter,
    cap_videos_per_channel,
    channel_baseline,
    exact_median,
    fetch_all_videos,
    load_comments,
    load_registry,
    load_videos,
    normalize_handle,
    write_comments,
    write_registry,
    write_videos,
)
from collabmetrics.errors import NoBaselineError, ValidationError

from .conftest import make_channel, make_comment, make_video


def write_jsonl(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")


def registry_row(channel_id, handles, gender="M", community="testgame"):
    return {
        "channel_id": channel_id,
        "handles": handles,
        "display_name": channel_id,
        "attributes": {"gender": gender},
        "community": community,
    }


class TestNormalizeHandle:
    def test_strips_at_and_case(self):
        assert normalize_handle(" @GuestChan ") == "guestchan"

    def test_plain_handle_unchanged(self):
        assert normalize_handle("guestchan") == "guestchan"


class TestLoadRegistry:
    def test_attribute_histogram_from_fixture(self, tmp_path):
        rows = [registry_row(f"ch{i}", [f"h{i}"], "M" if i < 42 else "W") for i in range(50)]
        path = tmp_path / "registry.jsonl"
        write_jsonl(path, rows)
        records = load_registry(path)
        assert len(records) == 50
        histogram = {}
        for rec in records:
            histogram[rec.attributes["gender"]] = histogram.get(rec.attributes["gender"], 0) + 1
        assert histogram == {"M": 42, "W": 8}

    def test_empty_csv_header_only(self, tmp_path):
        path = tmp_path / "registry.csv"
        path.write_text("channel_id,handles,display_name,community,gender\n", encoding="utf-8")
        assert load_registry(path) == []

    def test_handle_collision_after_normalization(self, tmp_path):
        rows = [
            registry_row("ch1", ["@GuestChan"]),
            registry_row("ch2", ["guestchan"]),
        ]
        path = tmp_path / "registry.jsonl"
        write_jsonl(path, rows)
        with pytest.raises(ValidationError) as err:
            load_registry(path)
        assert "ch1" in str(err.value) and "ch2" in str(err.value)

    def test_duplicate_channel_id(self, tmp_path):
        rows = [registry_row("ch1", ["a"]), registry_row("ch1", ["b"])]
        path = tmp_path / "registry.jsonl"
        write_jsonl(path, rows)
        with pytest.raises(ValidationError, match="duplicate channel_id"):
            load_registry(path)

    def test_missing_dyad_attribute(self, tmp_path):
        rows = [registry_row("ch1", ["a"])]
        del rows[0]["attributes"]["gender"]
        rows[0]["attributes"]["team"] = "x"
        path = tmp_path / "registry.jsonl"
        write_jsonl(path, rows)
        with pytest.raises(ValidationError, match="gender"):
            load_registry(path)

    def test_csv_extra_columns_become_attributes(self, tmp_path):
        path = tmp_path / "registry.csv"
        path.write_text(
            "channel_id,handles,display_name,community,gender,region\n"
            "ch1,main|alt,Channel One,testgame,W,eu\n",
            encoding="utf-8",
        )
        (rec,) = load_registry(path)
        assert rec.handles == ("main", "alt")
        assert rec.attributes == {"gender": "W", "region": "eu"}


class TestLoadVideos:
    def test_sorted_output(self, tmp_path):
        registry = [make_channel("A", "a"), make_channel("B", "b")]
        rows = [
            {"video_id": "v3", "channel_id": "B", "published_at": "2024-01-01T00:00:00Z", "view_count": 5},
            {"video_id": "v2", "channel_id": "A", "published_at": "2024-02-01T00:00:00Z", "view_count": 5},
            {"video_id": "v1", "channel_id": "A", "published_at": "2024-01-01T00:00:00Z", "view_count": 5},
        ]
        path = tmp_path / "videos.jsonl"
        write_jsonl(path, rows)
        records, errors = load_videos(path, registry)
        assert errors == []
        assert [v.video_id for v in records] == ["v1", "v2", "v3"]

    def test_negative_view_count_rejected(self, tmp_path):
        registry = [make_channel("A", "a")]
        rows = [{"video_id": "v1", "channel_id": "A", "published_at": "2024-01-01T00:00:00Z", "view_count": -1}]
        path = tmp_path / "videos.jsonl"
        write_jsonl(path, rows)
        records, errors = load_videos(path, registry)
        assert records == []
        assert len(errors) == 1

    def test_unknown_channel_collected_not_fatal(self, tmp_path):
        registry = [make_channel("A", "a")]
        rows = [
            {"video_id": "v1", "channel_id": "A", "published_at": "2024-01-01T00:00:00Z", "view_count": 1},
            {"video_id": "v2", "channel_id": "ZZ", "published_at": "2024-01-01T00:00:00Z", "view_count": 1},
        ]
        path = tmp_path / "videos.jsonl"
        write_jsonl(path, rows)
        records, errors = load_videos(path, registry)
        assert [v.video_id for v in records] == ["v1"]
        assert len(errors) == 1 and "ZZ" in errors[0].message


class TestLoadComments:
    def test_orphans_diverted(self, tmp_path):
        videos = [make_video("v1", "A")]
        rows = [
            {"comment_id": f"c{i}", "video_id": "v1", "author_id": "u1",
             "text": "hi", "published_at": "2024-01-01T00:00:00Z"}
            for i in range(4)
        ]
        rows.append({"comment_id": "c9", "video_id": "nope", "author_id": "u1",
                     "text": "hi", "published_at": "2024-01-01T00:00:00Z"})
        path = tmp_path / "comments.jsonl"
        write_jsonl(path, rows)
        records, report = load_comments(path, videos)
        assert len(records) == 4
        assert len(report.orphans) == 1 and report.orphans[0].comment_id == "c9"

    def test_empty_text_is_valid(self, tmp_path):
        videos = [make_video("v1", "A")]
        rows = [{"comment_id": "c1", "video_id": "v1", "author_id": "u1",
                 "text": "", "published_at": "2024-01-01T00:00:00Z"}]
        path = tmp_path / "comments.jsonl"
        write_jsonl(path, rows)
        records, report = load_comments(path, videos)
        assert len(records) == 1 and records[0].text == ""
        assert report.errors == ()

    def test_duplicate_comment_id_rejected(self, tmp_path):
        videos = [make_video("v1", "A")]
        row = {"comment_id": "c1", "video_id": "v1", "author_id": "u1",
               "text": "x", "published_at": "2024-01-01T00:00:00Z"}
        path = tmp_path / "comments.jsonl"
        write_jsonl(path, [row, row])
        records, report = load_comments(path, videos)
        assert len(records) == 1
        assert len(report.errors) == 1


class TestRoundTrip:
    @pytest.mark.parametrize("suffix", ["jsonl", "csv"])
    def test_registry_round_trip(self, tmp_path, suffix):
        records = [make_channel("A", ("one", "two"), gender="W"), make_channel("B", "b")]
        path = tmp_path / f"registry.{suffix}"
        write_registry(records, path)
        assert load_registry(path) == records

    @pytest.mark.parametrize("suffix", ["jsonl", "csv"])
    def test_videos_round_trip(self, tmp_path, suffix):
        registry = [make_channel("A", "a")]
        records = [
            make_video("v1", "A", views=12, description="multi\nline, with commas"),
            make_video("v2", "A", views=0, offset_hours=3, like_count=4, comment_count=1),
        ]
        path = tmp_path / f"videos.{suffix}"
        write_videos(records, path)
        loaded, errors = load_videos(path, registry)
        assert errors == []
        assert loaded == records

    @pytest.mark.parametrize("suffix", ["jsonl", "csv"])
    def test_comments_round_trip(self, tmp_path, suffix):
        videos = [make_video("v1", "A")]
        records = [
            make_comment("c1", "v1", "u1", 'text with "quotes" and, commas'),
            make_comment("c2", "v1", "u2", "", like_count=3),
        ]
        path = tmp_path / f"comments.{suffix}"
        write_comments(records, path)
        loaded, report = load_comments(path, videos)
        assert report.errors == () and report.orphans == ()
        assert loaded == records


class TestBaseline:
    def test_odd_median(self):
        videos = [make_video(f"v{i}", "A", views=v) for i, v in enumerate([100, 300, 200])]
        assert channel_baseline("A", videos) == 200

    def test_even_median_is_midpoint(self):
        videos = [make_video(f"v{i}", "A", views=v) for i, v in enumerate([100, 200, 300, 400])]
        assert channel_baseline("A", videos) == Fraction(250)

    def test_exclusion_empties_raises(self):
        videos = [make_video("v1", "A", views=100), make_video("v2", "A", views=200)]
        with pytest.raises(NoBaselineError):
            channel_baseline("A", videos, exclude={"v1", "v2"})

    def test_exact_midpoint_is_rational(self):
        assert exact_median([1, 2]) == Fraction(3, 2)

    @settings(max_examples=50)
    @given(st.lists(st.integers(min_value=0, max_value=10**9), min_size=1, max_size=30), st.randoms())
    def test_permutation_invariant(self, views, rnd):
        videos = [make_video(f"v{i}", "A", views=v) for i, v in enumerate(views)]
        shuffled = list(videos)
        rnd.shuffle(shuffled)
        assert channel_baseline("A", videos) == channel_baseline("A", shuffled)

    @settings(max_examples=50)
    @given(
        st.lists(st.integers(min_value=0, max_value=10**6), min_size=1, max_size=20),
        st.integers(min_value=1, max_value=1000),
    )
    def test_scale_equivariant(self, views, c):
        videos = [make_video(f"v{i}", "A", views=v) for i, v in enumerate(views)]
        scaled = [make_video(f"v{i}", "A", views=v * c) for i, v in enumerate(views)]
        assert channel_baseline("A", scaled) == c * channel_baseline("A", videos)


class TestLoaderFuzz:
    """Loaders keep every well-formed row and admit no invariant-violating row."""

    @settings(max_examples=25, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.integers(min_value=0, max_value=4),  # channel index, 5 known channels
                st.integers(min_value=-5, max_value=10**6),  # view count, possibly negative
            ),
            max_size=25,
        )
    )
    def test_video_rows_partition(self, tmp_path_factory, rows):
        tmp_path = tmp_path_factory.mktemp("fuzz")
        registry = [make_channel(f"C{i}", f"h{i}") for i in range(5)]
        raw = [
            {
                "video_id": f"v{i}",
                "channel_id": f"C{idx}",
                "published_at": "2024-01-01T00:00:00Z",
                "view_count": views,
            }
            for i, (idx, views) in enumerate(rows)
        ]
        path = tmp_path / "videos.jsonl"
        write_jsonl(path, raw)
        records, errors = load_videos(path, registry)
        well_formed = sum(1 for _, views in rows if views >= 0)
        assert len(records) == well_formed
        assert len(errors) == len(rows) - well_formed
        assert all(v.view_count >= 0 for v in records)


class TestReplayFetchAdapter:
    def test_paging_covers_everything(self):
        videos = [make_video(f"v{i}", "A", views=i, offset_hours=i) for i in range(7)]
        adapter = ReplayFetchAdapter(videos=videos, comments=[], page_size=3)
        page1, token = adapter.list_videos("A")
        assert len(page1) == 3 and token == "3"
        assert [v.video_id for v in fetch_all_videos(adapter, "A")] == [f"v{i}" for i in range(7)]

    def test_unknown_channel_empty(self):
        adapter = ReplayFetchAdapter(videos=[], comments=[])
        assert adapter.list_videos("ZZ") == ([], None)

    def test_comment_paging(self):
        comments = [make_comment(f"c{i}", "v1", "u1", offset_minutes=i) for i in range(5)]
        adapter = ReplayFetchAdapter(videos=[], comments=comments, page_size=2)
        collected, token = [], None
        while True:
            page, token = adapter.list_comments("v1", token)
            collected.extend(page)
            if token is None:
                break
        assert [c.comment_id for c in collected] == [f"c{i}" for i in range(5)]


def test_streaming_load_at_realistic_scale(tmp_path):
    """13,471 rows (a real community-sized corpus) load cleanly and completely."""
    registry = [make_channel(f"C{i:02d}", f"h{i:02d}") for i in range(50)]
    path = tmp_path / "videos.jsonl"
    with path.open("w", encoding="utf-8") as fh:
        for i in range(13_471):
            fh.write(
                json.dumps(
                    {
                        "video_id": f"v{i}",
                        "channel_id": f"C{i % 50:02d}",
                        "published_at": "2024-01-01T00:00:00+00:00",
                        "view_count": i,
                    }
                )
                + "\n"
            )
    records, errors = load_videos(path, registry)
    assert len(records) == 13_471
    assert errors == []


def test_cap_videos_keeps_most_recent():
    videos = [make_video(f"v{i}", "A", views=i, offset_hours=i) for i in range(6)]
    videos += [make_video("w0", "B", views=1, offset_hours=0)]
    capped = cap_videos_per_channel(videos, cap=2)
    ids = {v.video_id for v in capped}
    assert ids == {"v4", "v5", "w0"}
