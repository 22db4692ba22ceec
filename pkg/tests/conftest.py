"""Shared fixture builders for small hand-made corpora."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from collabmetrics.corpus import ChannelRecord, CommentRecord, VideoRecord, build_corpus

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def make_channel(channel_id, handle=None, gender="M", community="testgame", **attrs):
    handles = (handle,) if isinstance(handle, str) else tuple(handle or (channel_id.lower(),))
    return ChannelRecord(
        channel_id=channel_id,
        handles=handles,
        display_name=channel_id,
        attributes={"gender": gender, **attrs},
        community=community,
    )


def make_video(video_id, channel_id, views=100, description="", offset_hours=0, **kwargs):
    return VideoRecord(
        video_id=video_id,
        channel_id=channel_id,
        published_at=T0 + timedelta(hours=offset_hours),
        title=f"video {video_id}",
        description=description,
        view_count=views,
        **kwargs,
    )


def make_comment(comment_id, video_id, author_id, text="", offset_minutes=0, **kwargs):
    return CommentRecord(
        comment_id=comment_id,
        video_id=video_id,
        author_id=author_id,
        text=text,
        published_at=T0 + timedelta(minutes=offset_minutes),
        **kwargs,
    )


@pytest.fixture
def two_channel_corpus():
    """Host A with one collab video mentioning B, plus solo videos each."""
    registry = [
        make_channel("A", "hosta", gender="W"),
        make_channel("B", "guestb", gender="M"),
    ]
    videos = [
        make_video("a1", "A", views=100, offset_hours=0),
        make_video("a2", "A", views=300, offset_hours=1),
        make_video("a3", "A", views=240, description="duo with @guestb !", offset_hours=2),
        make_video("b1", "B", views=50, offset_hours=0),
        make_video("b2", "B", views=70, offset_hours=1),
    ]
    comments = [
        make_comment("c1", "a3", "u1", "that aim is awesome"),
        make_comment("c2", "a1", "u1", "boring video"),
        make_comment("c3", "b1", "u2", "love the stream setup"),
    ]
    return build_corpus(registry, videos, comments)
