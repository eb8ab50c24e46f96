"""Attributed-graph data model, text-file ingestion, and synthetic generators.

Graphs are undirected, unweighted, and desk-scale: adjacency is kept dense.
Edge lists store each pair once as (min, max). All containers are frozen
after construction so graphs can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Graph",
    "NormalizedAdjacency",
    "SbmSpec",
    "adjacency_matrix",
    "normalize_adjacency",
    "shortest_path_hops",
    "generate_sbm",
    "load_graph",
    "save_graph",
]

# Round-trips IEEE doubles exactly through decimal text.
FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class Graph:
    """Immutable attributed graph: features, undirected edges, optional labels."""

    features: np.ndarray
    edges: tuple[tuple[int, int], ...]
    labels: np.ndarray | None = None
    k: int | None = None

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {feats.shape}")
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)

        n = feats.shape[0]
        canon = []
        seen = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop ({u}, {v}) not allowed")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            pair = (u, v) if u < v else (v, u)
            if pair in seen:
                raise ValueError(f"duplicate edge {pair}")
            seen.add(pair)
            canon.append(pair)
        object.__setattr__(self, "edges", tuple(canon))

        if self.labels is not None:
            labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
            if labels.shape != (n,):
                raise ValueError(
                    f"labels length {labels.shape} does not match n={n}"
                )
            k = self.k if self.k is not None else int(labels.max()) + 1 if n else 0
            if labels.size and (labels.min() < 0 or labels.max() >= k):
                raise ValueError(f"labels must lie in [0, {k})")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)
            object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def f(self) -> int:
        return self.features.shape[1]

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists, neighbor ids ascending."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj:
            lst.sort()
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass(frozen=True)
class NormalizedAdjacency:
    """Symmetrically normalized adjacency with self-loops and its degree vector."""

    matrix: np.ndarray  # (n, n), D^{-1/2} (A+I) D^{-1/2}
    degrees: np.ndarray  # (n,), 1 + degree

    def __post_init__(self):
        self.matrix.setflags(write=False)
        self.degrees.setflags(write=False)


@dataclass(frozen=True)
class SbmSpec:
    """Planted-partition generator spec: block sizes, edge probabilities, feature model."""

    block_sizes: tuple[int, ...]
    p_in: float
    p_out: float
    means: np.ndarray  # (k, f) per-block feature means
    noise_std: float = 0.0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        if not sizes or any(s <= 0 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)
        for name, p in (("p_in", self.p_in), ("p_out", self.p_out)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} outside [0, 1]")
        means = np.asarray(self.means, dtype=np.float64)
        if means.ndim != 2 or means.shape[0] != len(sizes):
            raise ValueError(
                f"means must be (k, f) with k={len(sizes)}, got {means.shape}"
            )
        object.__setattr__(self, "means", means)
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")

    @property
    def n(self) -> int:
        return sum(self.block_sizes)


def adjacency_matrix(g: Graph) -> np.ndarray:
    """Dense binary adjacency, no self-loops."""
    a = np.zeros((g.n, g.n), dtype=np.float64)
    for u, v in g.edges:
        a[u, v] = 1.0
        a[v, u] = 1.0
    return a


def normalize_adjacency(g: Graph) -> NormalizedAdjacency:
    """D^{-1/2} (A+I) D^{-1/2} with self-loop degrees d_i = 1 + deg(i).

    Exactly symmetric by construction: the scaling matrix is built from a
    symmetric outer product before the division.
    """
    a = adjacency_matrix(g)
    np.fill_diagonal(a, 1.0)
    dhat = a.sum(axis=1)  # = 1 + degree
    scale = np.sqrt(np.outer(dhat, dhat))
    return NormalizedAdjacency(matrix=a / scale, degrees=dhat)


def shortest_path_hops(g: Graph) -> np.ndarray:
    """All-pairs BFS hop counts; unreachable pairs hold the sentinel n."""
    n = g.n
    adj = g.neighbors()
    dist = np.full((n, n), n, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if dist[s, w] == n and w != s:
                        dist[s, w] = d
                        nxt.append(w)
            frontier = nxt
    return dist


def generate_sbm(spec: SbmSpec, seed: int) -> Graph:
    """Sample a planted-partition graph; identical (spec, seed) gives identical output.

    Edge coin flips are drawn first (upper triangle, row-major), then feature
    noise, so the draw order is part of the determinism contract.
    """
    rng = np.random.default_rng(seed)
    n = spec.n
    labels = np.repeat(np.arange(len(spec.block_sizes)), spec.block_sizes)

    u = rng.random((n, n))
    same = labels[:, None] == labels[None, :]
    prob = np.where(same, spec.p_in, spec.p_out)
    hit = (u < prob) & np.triu(np.ones((n, n), dtype=bool), k=1)
    edges = tuple((int(i), int(j)) for i, j in np.argwhere(hit))

    feats = spec.means[labels]
    if spec.noise_std > 0:
        feats = feats + spec.noise_std * rng.standard_normal((n, spec.means.shape[1]))
    return Graph(features=feats, edges=edges, labels=labels, k=len(spec.block_sizes))


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def load_graph(
    features_path: str | Path,
    edges_path: str | Path,
    labels_path: str | Path | None = None,
) -> Graph:
    """Read features.csv / edges.txt / labels.txt into a validated Graph.

    Duplicate and reversed edge lines collapse to one stored pair; self-loop
    lines are rejected with the offending line number.
    """
    features_path = Path(features_path)
    edges_path = Path(edges_path)

    rows: list[list[float]] = []
    with features_path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError:
                raise ValueError(
                    f"{features_path}:{lineno}: could not parse feature row"
                ) from None
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(
                    f"{features_path}:{lineno}: expected {len(rows[0])} columns,"
                    f" got {len(rows[-1])}"
                )
    if not rows:
        raise ValueError(f"{features_path}: no feature rows")
    features = np.array(rows, dtype=np.float64)
    n = features.shape[0]

    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    with edges_path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = _strip_comment(line)
            if not line:
                continue
            toks = line.split()
            if len(toks) != 2:
                raise ValueError(
                    f"{edges_path}:{lineno}: expected two endpoints, got {len(toks)}"
                )
            try:
                u, v = int(toks[0]), int(toks[1])
            except ValueError:
                raise ValueError(
                    f"{edges_path}:{lineno}: could not parse edge endpoints"
                ) from None
            if u == v:
                raise ValueError(f"self-loop rejected at line {lineno} of {edges_path}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(
                    f"{edges_path}:{lineno}: endpoint out of range (n={n})"
                )
            pair = (u, v) if u < v else (v, u)
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)

    labels = None
    if labels_path is not None:
        labels_path = Path(labels_path)
        vals: list[int] = []
        with labels_path.open() as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    vals.append(int(line))
                except ValueError:
                    raise ValueError(
                        f"{labels_path}:{lineno}: could not parse label"
                    ) from None
        if len(vals) != n:
            raise ValueError(
                f"{labels_path}: {len(vals)} labels for {n} feature rows"
            )
        labels = np.array(vals, dtype=np.int64)

    return Graph(features=features, edges=tuple(pairs), labels=labels)


def save_graph(
    g: Graph,
    features_path: str | Path,
    edges_path: str | Path,
    labels_path: str | Path | None = None,
) -> None:
    """Write the text formats read by load_graph; float text round-trips exactly."""
    with Path(features_path).open("w", newline="\n") as fh:
        for row in g.features:
            fh.write(",".join(FLOAT_FMT % x for x in row) + "\n")
    with Path(edges_path).open("w", newline="\n") as fh:
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")
    if labels_path is not None:
        if g.labels is None:
            raise ValueError("graph has no labels to save")
        with Path(labels_path).open("w", newline="\n") as fh:
            for y in g.labels:
                fh.write(f"{int(y)}\n")
