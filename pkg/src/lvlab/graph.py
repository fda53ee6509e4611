"""Configuration-model random graphs with bounded degrees.

Degrees are drawn i.i.d. from a law supported on ``3..M``, the whole vector is
redrawn until its sum is even, and half-edges are paired uniformly.  Pairings
that produce a self-loop or a repeated edge are thrown away as a whole, so an
accepted graph is a sample of the configuration model conditioned on being
simple.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

SITE = "site"
EDGE = "edge"
KINDS = (SITE, EDGE)


class GraphError(ValueError):
    pass


class RetriesExhausted(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


def check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"kind must be 'site' or 'edge', got {kind!r}")
    return kind


@dataclass(frozen=True)
class DegreeDistribution:
    """Degree law ``{k: p_k}`` with ``p_k = 0`` outside ``3..max_degree``."""

    probs: dict
    max_degree: int = 0

    def __post_init__(self):
        probs = {int(k): float(p) for k, p in self.probs.items() if p != 0}
        if not probs:
            raise ValueError("degree distribution is empty")
        if any(p < 0 for p in probs.values()):
            raise ValueError("negative probability in degree distribution")
        total = sum(probs.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        M = self.max_degree or max(probs)
        bad = [k for k in probs if k <= 2 or k > M]
        if bad:
            raise ValueError(f"degrees {sorted(bad)} outside the allowed range 3..{M}")
        object.__setattr__(self, "probs", dict(sorted(probs.items())))
        object.__setattr__(self, "max_degree", M)

    @classmethod
    def parse(cls, text: str) -> "DegreeDistribution":
        """Parse ``"3:0.5,4:0.5"`` (``degree:prob`` pairs, comma separated)."""
        probs = {}
        for item in text.replace(";", ",").split(","):
            item = item.strip()
            if not item:
                continue
            k, sep, p = item.partition(":")
            if not sep:
                raise ValueError(f"bad degree:prob pair {item!r}")
            probs[int(k)] = probs.get(int(k), 0.0) + float(p)
        return cls(probs)

    @classmethod
    def regular(cls, d: int) -> "DegreeDistribution":
        return cls({d: 1.0})

    def format(self) -> str:
        return ",".join(f"{k}:{p!r}" for k, p in self.probs.items())

    @property
    def degrees(self) -> np.ndarray:
        return np.array(list(self.probs), dtype=np.int64)

    @property
    def weights(self) -> np.ndarray:
        return np.array(list(self.probs.values()), dtype=float)

    @property
    def mean(self) -> float:
        return float(self.degrees @ self.weights)


def size_biased(dist: DegreeDistribution) -> DegreeDistribution:
    """Return the law ``q_k = k p_k / mu`` with ``mu`` the mean degree."""
    mu = dist.mean
    q = {k: k * p / mu for k, p in dist.probs.items()}
    # renormalise away the rounding so the result passes validation
    total = sum(q.values())
    return DegreeDistribution({k: v / total for k, v in q.items()}, dist.max_degree)


def sample_degree_sequence(dist: DegreeDistribution, n: int, rng: np.random.Generator,
                           max_retries: int = 10**6) -> np.ndarray:
    if n < 2:
        raise ValueError("need n >= 2")
    ks, ps = dist.degrees, dist.weights
    if n % 2 == 1 and np.all(ks % 2 == 1):
        raise RetriesExhausted(f"every degree in the support is odd and n={n} is odd; "
                               "an even degree sum is impossible")
    for _ in range(max_retries):
        degs = rng.choice(ks, size=n, p=ps)
        if degs.sum() % 2 == 0:
            return degs
    raise RetriesExhausted(f"no even-sum degree vector after {max_retries} draws")


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph stored as sorted CSR neighbour lists on nodes 0..n-1."""

    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray = field(init=False)

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        indptr.setflags(write=False)
        indices.setflags(write=False)
        degrees = np.diff(indptr)
        degrees.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "degrees", degrees)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise GraphError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise GraphError("self-loop")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        if len(np.unique(lo * n + hi)) != len(lo):
            raise GraphError("parallel edge")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        return cls(np.cumsum(indptr), dst)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    def neighbors(self, x: int) -> np.ndarray:
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def edges(self) -> np.ndarray:
        """Undirected edges as an ``(m, 2)`` array with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.n), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    def adjacency(self) -> csr_matrix:
        data = np.ones(len(self.indices))
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def is_connected(self) -> bool:
        ncomp, _ = connected_components(self.adjacency(), directed=False)
        return ncomp == 1

    def validate(self, min_degree: int = 1, max_degree: int | None = None) -> None:
        """Raise :class:`GraphError` unless the graph is simple and symmetric."""
        for x in range(self.n):
            nb = self.neighbors(x)
            if np.any(nb == x):
                raise GraphError(f"self-loop at {x}")
            if np.any(np.diff(nb) <= 0):
                raise GraphError(f"neighbour list of {x} not strictly increasing")
        A = self.adjacency()
        if (A != A.T).nnz:
            raise GraphError("adjacency not symmetric")
        if self.degrees.sum() != 2 * self.num_edges:
            raise GraphError("handshake identity fails")
        if self.degrees.min() < min_degree:
            raise GraphError("degree below minimum")
        if max_degree is not None and self.degrees.max() > max_degree:
            raise GraphError("degree above maximum")

    def write(self, path) -> None:
        edges = self.edges()
        lines = [f"{self.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
        Path(path).write_text("\n".join(lines) + "\n", newline="\n")

    @classmethod
    def read(cls, path) -> "Graph":
        rows = Path(path).read_text().split("\n")
        n, m = (int(v) for v in rows[0].split())
        edges = [tuple(int(v) for v in row.split()) for row in rows[1:] if row.strip()]
        if len(edges) != m:
            raise GraphError(f"header says {m} edges, file has {len(edges)}")
        return cls.from_edges(n, edges)


def build_configuration_graph(degrees, rng: np.random.Generator,
                              max_retries: int = 10**5) -> Graph:
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.sum() % 2:
        raise GraphError("degree sum is odd")
    n = len(degrees)
    stubs = np.repeat(np.arange(n), degrees)
    for _ in range(max_retries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        u, v = pairs[:, 0], pairs[:, 1]
        if np.any(u == v):
            continue
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        if len(np.unique(lo * n + hi)) != len(lo):
            continue
        return Graph.from_edges(n, pairs)
    raise RetriesExhausted(f"no simple pairing in {max_retries} attempts")


def configuration_graph(dist: DegreeDistribution, n: int, rng: np.random.Generator,
                        max_retries: int = 10**5) -> Graph:
    """Degree sequence plus pairing in one call."""
    return build_configuration_graph(sample_degree_sequence(dist, n, rng), rng, max_retries)


@dataclass(frozen=True)
class LocalStructureReport:
    start: int
    radius: int
    ball_size: int
    collisions: int

    @property
    def is_tree(self) -> bool:
        return self.collisions == 0


def ball(graph: Graph, x: int, r: int) -> LocalStructureReport:
    """BFS ball of radius ``r``; collisions are the edges beyond a spanning tree."""
    dist = {x: 0}
    queue = deque([x])
    while queue:
        v = queue.popleft()
        if dist[v] == r:
            continue
        for w in graph.neighbors(v):
            w = int(w)
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    inside = np.zeros(graph.n, dtype=bool)
    inside[list(dist)] = True
    edges_inside = sum(int(inside[graph.neighbors(v)].sum()) for v in dist) // 2
    return LocalStructureReport(x, r, len(dist), edges_inside - (len(dist) - 1))


def bfs_distances(graph: Graph, x: int) -> np.ndarray:
    dist = np.full(graph.n, -1, dtype=np.int64)
    dist[x] = 0
    queue = deque([x])
    while queue:
        v = queue.popleft()
        for w in graph.neighbors(v):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def stationary_distribution(graph: Graph, kind: str) -> np.ndarray:
    """Uniform for the edge walk, ``d(x)/D`` for the site walk."""
    check_kind(kind)
    if not graph.is_connected():
        raise DisconnectedGraph("stationary distribution needs a connected graph")
    if kind == EDGE:
        return np.full(graph.n, 1.0 / graph.n)
    return graph.degrees / graph.degrees.sum()


def triangle_count(graph: Graph) -> int:
    A = graph.adjacency()
    return int(round((A @ A).multiply(A).sum() / 6))
