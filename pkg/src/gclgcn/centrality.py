"""Node centrality measures and the per-edge spatial bias for attention.

Conventions (fixed so golden values are well defined):
  * degree is normalized by the maximum degree, the other measures are raw;
  * betweenness sums over unordered endpoint pairs (Brandes accumulation
    halved for undirected graphs);
  * closeness sums distances over reachable nodes only; an isolated node
    scores 0.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = [
    "MEASURES",
    "CentralityMatrix",
    "SpatialBias",
    "degree_centrality",
    "betweenness_centrality",
    "closeness_centrality",
    "composite_centrality",
    "spatial_bias",
]

# Column order of the composite matrix.
MEASURES = ("degree", "betweenness", "closeness")


@dataclass(frozen=True)
class CentralityMatrix:
    """Per-node centrality columns in the fixed (degree, betweenness, closeness) order."""

    values: np.ndarray  # (n, m)
    measures: tuple[str, ...]

    def __post_init__(self):
        if self.values.shape[1] != len(self.measures):
            raise ValueError("column count does not match measure list")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class SpatialBias:
    """Pairwise bias d(i, j) for every edge and self-pair, symmetric, zero diagonal."""

    values: dict[tuple[int, int], float]
    mode: str  # "euclidean" | "shortest-path"


def degree_centrality(g: Graph) -> np.ndarray:
    deg = g.degrees().astype(np.float64)
    top = deg.max() if g.n else 0.0
    if top == 0:
        return np.zeros(g.n)
    return deg / top


def _brandes_source(adj: list[list[int]], s: int, score: np.ndarray) -> None:
    """Accumulate one source's pair dependencies into score (Brandes' algorithm)."""
    n = len(adj)
    dist = [-1] * n
    sigma = [0.0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    dist[s] = 0
    sigma[s] = 1.0
    order: list[int] = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = [0.0] * n
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w])
        if w != s:
            score[w] += delta[w]


def betweenness_centrality(g: Graph) -> np.ndarray:
    """Exact betweenness over unordered pairs on unit-weight shortest paths.

    Sources are processed in ascending order so the floating-point result is
    bit-deterministic.
    """
    adj = g.neighbors()
    score = np.zeros(g.n)
    for s in range(g.n):
        _brandes_source(adj, s, score)
    # Each unordered pair was counted from both endpoints.
    return score / 2.0


def closeness_centrality(g: Graph) -> np.ndarray:
    adj = g.neighbors()
    out = np.zeros(g.n)
    for s in range(g.n):
        dist = [-1] * g.n
        dist[s] = 0
        queue = deque([s])
        total = 0
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    total += dist[w]
                    queue.append(w)
        out[s] = 1.0 / total if total > 0 else 0.0
    return out


_MEASURE_FN = {
    "degree": degree_centrality,
    "betweenness": betweenness_centrality,
    "closeness": closeness_centrality,
}


def composite_centrality(g: Graph, measures=MEASURES) -> CentralityMatrix:
    """Stack the enabled measures as columns, always in MEASURES order."""
    wanted = tuple(m for m in MEASURES if m in set(measures))
    unknown = set(measures) - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown centrality measures: {sorted(unknown)}")
    if not wanted:
        raise ValueError("at least one centrality measure must be enabled")
    cols = [_MEASURE_FN[m](g) for m in wanted]
    return CentralityMatrix(values=np.column_stack(cols), measures=wanted)


def spatial_bias(g: Graph, mode: str = "euclidean") -> SpatialBias:
    """Bias values for each connected pair (both orders) and each self-pair.

    euclidean: feature-space distance between the endpoints.
    shortest-path: hop distance, which is 1 for every stored edge.
    """
    if mode not in ("euclidean", "shortest-path"):
        raise ValueError(f"unknown spatial mode {mode!r}")
    values: dict[tuple[int, int], float] = {}
    for i in range(g.n):
        values[(i, i)] = 0.0
    for u, v in g.edges:
        if mode == "euclidean":
            d = float(np.linalg.norm(g.features[u] - g.features[v]))
        else:
            d = 1.0
        values[(u, v)] = d
        values[(v, u)] = d
    return SpatialBias(values=values, mode=mode)
