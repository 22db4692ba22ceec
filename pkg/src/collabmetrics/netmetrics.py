"""Supply-side and demand-side network metrics.

The supply side is an undirected collaboration graph over creators; the
demand side is a commenter-to-creator bipartite attention graph. Closeness
centrality uses the component-scaled convention: for a node in a component
of size k within an n-node graph,

    closeness = ((k - 1) / (n - 1)) * ((k - 1) / sum_of_distances)

over unweighted shortest paths within the component, so isolated nodes
score exactly 0 instead of being dropped. Commenter diversity is Shannon
entropy in bits over the commenter's distribution of comments across
channels.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from statistics import median
from typing import Iterable, Mapping, Sequence

from collabmetrics.collab import CollaborationDyad
from collabmetrics.corpus import ChannelRecord, CommentRecord, VideoRecord

__all__ = [
    "CollabGraph",
    "AttentionGraph",
    "CentralitySummary",
    "AttributeCentrality",
    "EntropyDistribution",
    "build_collab_graph",
    "closeness",
    "build_attention_graph",
    "commenter_entropy",
    "entropy_cdf",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CollabGraph:
    """Undirected creator graph; edge weight counts collaboration videos."""

    nodes: frozenset[str]
    edges: Mapping[tuple[str, str], int]  # keys are sorted pairs

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {node: [] for node in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def degree(self, node: str) -> int:
        return sum(1 for pair in self.edges if node in pair)


@dataclass(frozen=True)
class AttentionGraph:
    """Bipartite commenter-to-channel graph weighted by comment count."""

    commenters: frozenset[str]
    channels: frozenset[str]
    weights: Mapping[tuple[str, str], int]  # (author_id, channel_id) -> comments

    def commenter_weights(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {c: {} for c in self.commenters}
        for (author, channel), w in self.weights.items():
            out[author][channel] = w
        return out


@dataclass(frozen=True)
class AttributeCentrality:
    attribute_value: str
    median: float
    values: tuple[float, ...]


@dataclass(frozen=True)
class CentralitySummary:
    closeness: Mapping[str, float]
    by_attribute: Mapping[str, AttributeCentrality]


@dataclass(frozen=True)
class EntropyDistribution:
    entropy: Mapping[str, float]  # author_id -> bits

    def sorted_values(self) -> list[float]:
        return sorted(self.entropy.values())


def build_collab_graph(
    dyads: Sequence[CollaborationDyad],
    registry: Sequence[ChannelRecord] | Iterable[str],
) -> CollabGraph:
    """Merge ordered dyads into an undirected weighted graph.

    (A, B) and (B, A) collapse into one edge whose weight sums their video
    counts. The registry defines the node set, so channels without dyads
    stay as isolated nodes.
    """
    nodes = frozenset(
        rec.channel_id if isinstance(rec, ChannelRecord) else rec for rec in registry
    )
    edges: dict[tuple[str, str], int] = {}
    for dyad in dyads:
        key = (dyad.host, dyad.guest) if dyad.host < dyad.guest else (dyad.guest, dyad.host)
        edges[key] = edges.get(key, 0) + len(dyad.videos)
    return CollabGraph(nodes=nodes, edges=edges)


def _bfs_distances(adj: Mapping[str, list[str]], source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nbr in adj[node]:
            if nbr not in dist:
                dist[nbr] = dist[node] + 1
                queue.append(nbr)
    return dist


def closeness(
    graph: CollabGraph,
    attributes: Mapping[str, str] | None = None,
    convention: str = "component-scaled",
) -> CentralitySummary:
    """Closeness per node, optionally grouped by attribute.

    Shortest paths are unweighted (edge weights are collaboration counts,
    metadata only). Values lie in [0, 1]; isolated nodes score 0.

    ``convention`` selects the disconnected-graph treatment:

    * ``"component-scaled"`` (default): the formula in the module
      docstring, which down-weights small components.
    * ``"largest-component"``: classic closeness ``(k - 1) / sum_d``
      computed only inside the largest component; all other nodes
      score 0.
    """
    if convention not in ("component-scaled", "largest-component"):
        raise ValueError(f"unknown closeness convention {convention!r}")
    adj = graph.adjacency()
    n = len(graph.nodes)
    in_scope: frozenset[str] | None = None
    if convention == "largest-component":
        remaining = set(graph.nodes)
        largest: set[str] = set()
        while remaining:
            component = set(_bfs_distances(adj, next(iter(sorted(remaining)))))
            remaining -= component
            if len(component) > len(largest):
                largest = component
        in_scope = frozenset(largest)
    values: dict[str, float] = {}
    for node in sorted(graph.nodes):
        if in_scope is not None and node not in in_scope:
            values[node] = 0.0
            continue
        dist = _bfs_distances(adj, node)
        k = len(dist)
        total = sum(dist.values())
        if n <= 1 or k <= 1 or total == 0:
            values[node] = 0.0
        elif in_scope is not None:
            values[node] = (k - 1) / total
        else:
            values[node] = ((k - 1) / (n - 1)) * ((k - 1) / total)
    by_attribute: dict[str, AttributeCentrality] = {}
    if attributes:
        grouped: dict[str, list[float]] = {}
        for node, value in values.items():
            attr = attributes.get(node)
            if attr is not None:
                grouped.setdefault(attr, []).append(value)
        by_attribute = {
            attr: AttributeCentrality(attr, float(median(vals)), tuple(sorted(vals)))
            for attr, vals in sorted(grouped.items())
        }
    return CentralitySummary(closeness=values, by_attribute=by_attribute)


def build_attention_graph(
    videos: Sequence[VideoRecord],
    comments: Sequence[CommentRecord],
    min_comments: int = 1,
) -> AttentionGraph:
    """Bipartite graph of direct commenter-to-channel interactions.

    Every comment counts (raw comment frequency, not distinct videos).
    ``min_comments`` optionally drops low-activity commenters; the default
    keeps everyone.
    """
    owner = {v.video_id: v.channel_id for v in videos}
    weights: dict[tuple[str, str], int] = {}
    totals: dict[str, int] = {}
    for comment in comments:
        channel = owner.get(comment.video_id)
        if channel is None:
            continue
        key = (comment.author_id, channel)
        weights[key] = weights.get(key, 0) + 1
        totals[comment.author_id] = totals.get(comment.author_id, 0) + 1
    if min_comments > 1:
        keep = {a for a, t in totals.items() if t >= min_comments}
        weights = {k: w for k, w in weights.items() if k[0] in keep}
    else:
        keep = set(totals)
    return AttentionGraph(
        commenters=frozenset(keep),
        channels=frozenset(ch for _, ch in weights),
        weights=weights,
    )


def commenter_entropy(attention: AttentionGraph) -> EntropyDistribution:
    """Shannon entropy (bits) of each commenter's attention distribution.

    p(x) is the commenter's comment share toward channel x; H = -sum p log2 p
    with the 0 log 0 := 0 convention. A commenter loyal to one channel
    scores exactly 0.
    """
    per_commenter = attention.commenter_weights()
    entropy: dict[str, float] = {}
    for author in sorted(per_commenter):
        channel_weights = per_commenter[author]
        total = sum(channel_weights.values())
        if total == 0:
            continue
        h = 0.0
        for channel in sorted(channel_weights):
            w = channel_weights[channel]
            if w == 0:
                continue
            p = w / total
            h -= p * math.log2(p)
        entropy[author] = max(h, 0.0)
    return EntropyDistribution(entropy=entropy)


def entropy_cdf(
    dist: EntropyDistribution, grid: Sequence[float] | None = None
) -> list[tuple[float, float]]:
    """Cumulative fraction of commenters with entropy <= each threshold.

    With no grid, the sorted unique entropy values are used (the empirical
    CDF). Fractions are nondecreasing in [0, 1] and reach 1 once the grid
    covers the maximum entropy. An empty distribution yields an empty CDF.
    """
    values = dist.sorted_values()
    if not values:
        logger.warning("entropy distribution is empty; emitting empty CDF")
        return []
    thresholds = sorted(set(grid)) if grid is not None else sorted(set(values))
    n = len(values)
    points: list[tuple[float, float]] = []
    idx = 0
    for t in thresholds:
        while idx < n and values[idx] <= t:
            idx += 1
        points.append((t, idx / n))
    return points
