"""Coalescing random walks and the graphical-representation dual.

Walk rates follow the model kind: a site-kind walker jumps at rate 1 to a
uniform neighbour, an edge-kind walker at rate ``d(x)``.  Walks are simulated
forward in algorithmic time; on a fixed horizon the arrival processes are
exchangeable under time reversal so this is only bookkeeping.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from numba import njit

from . import gwtree
from .dynamics import Configuration, GraphicalRecord, opinions_of
from .graph import EDGE, DegreeDistribution, Graph, bfs_distances, check_kind
from .rng import as_generator


class TripleOutcome(str, Enum):
    SEPARATE = "x|y|z"
    X_APART = "x|yz"
    Z_APART = "xy|z"
    Y_APART = "xz|y"
    ALL = "xyz"


TRIPLE_ORDER = [TripleOutcome(c) for c in gwtree.TRIPLE_CLASSES]


def classify_triple(labels) -> TripleOutcome:
    a, b, c = labels
    if a != b and a != c and b != c:
        return TripleOutcome.SEPARATE
    if b == c and a != b:
        return TripleOutcome.X_APART
    if a == b and a != c:
        return TripleOutcome.Z_APART
    if a == c and a != b:
        return TripleOutcome.Y_APART
    return TripleOutcome.ALL


@dataclass
class ParticlePartition:
    origins: np.ndarray
    positions: np.ndarray   # current site of each surviving cluster
    labels: np.ndarray      # cluster index of each origin
    duration: float

    @property
    def num_clusters(self) -> int:
        return len(self.positions)

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_clusters)

    def origin_sizes(self) -> np.ndarray:
        """``N_x``: size of the cluster holding each origin."""
        return self.cluster_sizes()[self.labels]

    def same_cluster(self, i: int, j: int) -> bool:
        return self.labels[i] == self.labels[j]


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def _crw(indptr, indices, deg, starts, duration, edge, rng):
    n = deg.shape[0]
    m = starts.shape[0]
    maxrate = float(deg.max()) if edge else 1.0
    occ = np.full(n, -1, dtype=np.int64)
    pos = np.empty(m, dtype=np.int64)
    rep = np.empty(m, dtype=np.int64)
    parent = np.arange(m)
    K = 0
    for i in range(m):
        v = starts[i]
        if occ[v] >= 0:
            parent[_find(parent, i)] = _find(parent, rep[occ[v]])
        else:
            pos[K] = v
            rep[K] = i
            occ[v] = K
            K += 1
    t = 0.0
    while K > 1:
        t += rng.exponential(1.0) / (K * maxrate)
        if t > duration:
            break
        c = rng.integers(0, K)
        v = pos[c]
        if edge and rng.random() * maxrate >= deg[v]:
            continue
        w = indices[indptr[v] + rng.integers(0, deg[v])]
        occ[v] = -1
        c2 = occ[w]
        if c2 >= 0:
            parent[_find(parent, rep[c])] = _find(parent, rep[c2])
            last = K - 1
            if last != c:
                pos[c] = pos[last]
                rep[c] = rep[last]
                occ[pos[c]] = c
            K -= 1
        else:
            pos[c] = w
            occ[w] = c
    labels = np.empty(m, dtype=np.int64)
    root_label = np.full(m, -1, dtype=np.int64)
    for c in range(K):
        root_label[_find(parent, rep[c])] = c
    for i in range(m):
        labels[i] = root_label[_find(parent, i)]
    return pos[:K].copy(), labels


def run_crw(graph: Graph, kind: str, starts, duration: float, seed=0) -> ParticlePartition:
    """Coalescing walks from ``starts`` run for ``duration``; merge on co-location."""
    check_kind(kind)
    starts = np.asarray(starts, dtype=np.int64)
    if starts.size == 0:
        raise ValueError("need at least one start")
    pos, labels = _crw(graph.indptr, graph.indices, graph.degrees, starts, float(duration),
                       kind == EDGE, as_generator(seed))
    return ParticlePartition(starts, pos, labels, float(duration))


@dataclass
class ClusterStats:
    s: float
    sizes: np.ndarray = field(repr=False)   # N_x(s) for every origin x

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def n_max(self) -> int:
        return int(self.sizes.max())

    @property
    def mean_minus1(self) -> float:
        return float(np.mean(self.sizes - 1))

    @property
    def fact2(self) -> float:
        N = self.sizes.astype(float)
        return float(np.mean((N - 1) * (N - 2)))

    def moment(self, m: int) -> float:
        return float(np.mean(self.sizes.astype(float) ** m))

    def factorial_moment(self, k: int) -> float:
        N = self.sizes.astype(float)
        prod = np.ones_like(N)
        for j in range(1, k + 1):
            prod *= N - j
        return float(prod.mean())


def crw_all_sites(graph: Graph, kind: str, s: float, seed=0) -> ClusterStats:
    """One walker per node, run for time ``s``; report the cluster sizes ``N_x(s)``."""
    if s < 0:
        raise ValueError("s must be non-negative")
    part = run_crw(graph, kind, np.arange(graph.n), s, seed)
    return ClusterStats(float(s), part.origin_sizes())


def write_cluster_csv(rows, path) -> None:
    """``rows`` is an iterable of :class:`ClusterStats`."""
    lines = ["s,mean_size_minus1,fact2,Nmax,n"]
    lines += [f"{c.s:.9g},{c.mean_minus1:.9g},{c.fact2:.9g},{c.n_max},{c.n}" for c in rows]
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


# ---------------------------------------------------------------- pair escape

OUTCOMES = ("hit", "exited", "timed_out")


@dataclass(frozen=True)
class TreeSpace:
    """A lazily generated Galton-Watson tree: root degree plus the size-biased law."""

    root_degree: int
    dist: DegreeDistribution

    @classmethod
    def regular(cls, d: int = 3) -> "TreeSpace":
        return cls(d, DegreeDistribution.regular(d))


@dataclass
class EscapeTally:
    outcomes: np.ndarray   # indices into OUTCOMES
    elapsed: np.ndarray
    d_cut: int

    @property
    def replicates(self) -> int:
        return len(self.outcomes)

    def count(self, outcome: str) -> int:
        return int(np.count_nonzero(self.outcomes == OUTCOMES.index(outcome)))

    def frequency(self, outcome: str) -> tuple[float, float]:
        """Frequency among runs that did not time out, with its standard error."""
        done = self.replicates - self.count("timed_out")
        p = self.count(outcome) / done
        return p, math.sqrt(p * (1 - p) / done)

    def write_csv(self, path) -> None:
        lines = ["replicate,outcome,elapsed"]
        lines += [f"{i},{OUTCOMES[o]},{e:.9g}"
                  for i, (o, e) in enumerate(zip(self.outcomes, self.elapsed))]
        Path(path).write_text("\n".join(lines) + "\n", newline="\n")


@njit(cache=True)
def _graph_pair(indptr, indices, deg, a0, b0, da, db, half, radius, edge, time_cap,
                replicates, rng):
    maxrate = float(deg.max()) if edge else 1.0
    outcome = np.zeros(replicates, dtype=np.int64)
    elapsed = np.zeros(replicates)
    for r in range(replicates):
        pos0, pos1 = a0, b0
        t = 0.0
        if max(da[a0], db[a0]) - half > radius:
            outcome[r] = 1
            continue
        while True:
            t += rng.exponential(1.0) / (2.0 * maxrate)
            if t > time_cap:
                outcome[r] = 2
                break
            w = rng.integers(0, 2)
            v = pos0 if w == 0 else pos1
            if edge and rng.random() * maxrate >= deg[v]:
                continue
            nxt = indices[indptr[v] + rng.integers(0, deg[v])]
            if w == 0:
                pos0 = nxt
            else:
                pos1 = nxt
            if pos0 == pos1:
                outcome[r] = 0
                break
            if max(da[nxt], db[nxt]) - half > radius:
                outcome[r] = 1
                break
        elapsed[r] = t
    return outcome, elapsed


def pair_escape_batch(space, kind: str, d0: int, r: float, time_cap: float, seed=0,
                      replicates: int = 1, d_cut: int = 40, start: int = 0,
                      capacity: int = 1 << 15) -> EscapeTally:
    """Two coalescing walks at distance ``d0``: do they meet before leaving the ball?

    The ball has radius ``r`` around the midpoint of the two starting vertices,
    measured as ``max(dist(v, a0), dist(v, b0)) - d0/2``.  ``space`` is either a
    :class:`Graph` (walks start at ``start`` and the first vertex found at
    distance ``d0``) or a :class:`TreeSpace`; on a tree a pair that drifts
    ``d_cut`` apart is also counted as exited, since it returns with
    probability at most ``2**-d_cut``.
    """
    check_kind(kind)
    if d0 < 1:
        raise ValueError("d0 must be at least 1")
    rng = as_generator(seed)
    edge = kind == EDGE
    if isinstance(space, TreeSpace):
        degs, cdf = gwtree.offspring_law(space.dist)
        out, el = gwtree.pair_runs(space.root_degree, degs, cdf, edge, d0, float(r), d_cut,
                                   float(time_cap), capacity, replicates, rng)
    else:
        da = bfs_distances(space, start)
        cand = np.flatnonzero(da == d0)
        if cand.size == 0:
            raise ValueError(f"no vertex at distance {d0} from {start}")
        b0 = int(cand[0])
        db = bfs_distances(space, b0)
        out, el = _graph_pair(space.indptr, space.indices, space.degrees, start, b0, da, db,
                              d0 / 2.0, float(r), edge, float(time_cap), replicates, rng)
    return EscapeTally(out, el, d_cut)


def pair_escape_experiment(space, kind: str, d0: int, r: float, time_cap: float, seed=0,
                           **kw) -> str:
    """Single run of :func:`pair_escape_batch`; returns ``hit``, ``exited`` or ``timed_out``."""
    tally = pair_escape_batch(space, kind, d0, r, time_cap, seed, replicates=1, **kw)
    return OUTCOMES[int(tally.outcomes[0])]


# ---------------------------------------------------------- graphical dual


@dataclass
class DualNode:
    """Space-time point whose opinion the dual needs."""

    site: int
    time: float
    base: int | None = None                  # node giving the site's value before the window
    sources: list = field(default_factory=list)
    leaf: bool = False                       # value read from the initial configuration


@dataclass
class DualResult:
    x: int
    influence: set
    nodes: list = field(repr=False)
    branchings: int
    root: int = 0

    def evaluate(self, init: Configuration) -> int:
        """Replay the genealogy upward from time-0 values; returns an opinion."""
        ops = opinions_of(init.states)
        vals = [0] * len(self.nodes)
        # every dependency sits strictly earlier in time than the node using it
        for i in sorted(range(len(self.nodes)), key=lambda i: self.nodes[i].time):
            nd = self.nodes[i]
            if nd.leaf:
                vals[i] = int(ops[nd.site])
                continue
            base = vals[nd.base] if nd.base is not None else int(ops[nd.site])
            if any(vals[j] != base for j in nd.sources):
                base = 3 - base
            vals[i] = base
        return vals[self.root]


class _RecordIndex:
    def __init__(self, record: GraphicalRecord, n: int):
        order = np.lexsort((record.arrow_time, record.arrow_dst))
        self.dst = record.arrow_dst[order]
        self.t = record.arrow_time[order]
        self.src = record.arrow_src[order]
        self.a_ptr = np.searchsorted(self.dst, np.arange(n + 1))
        worder = np.lexsort((record.wake_time, record.wake_node))
        self.w_node = record.wake_node[worder]
        self.w_t = record.wake_time[worder]
        self.w_ptr = np.searchsorted(self.w_node, np.arange(n + 1))
        self.t_list = self.t.tolist()
        self.w_list = self.w_t.tolist()

    def last_arrow_before(self, v, t):
        lo, hi = self.a_ptr[v], self.a_ptr[v + 1]
        k = bisect_left(self.t_list, t, lo, hi) - 1
        return k if k >= lo else -1

    def last_wake_before(self, v, t):
        lo, hi = self.w_ptr[v], self.w_ptr[v + 1]
        k = bisect_left(self.w_list, t, lo, hi) - 1
        return self.w_list[k] if k >= lo else 0.0


def run_branching_dual(record: GraphicalRecord, graph: Graph, x: int,
                       init_latent=None) -> DualResult:
    """Trace the state of ``x`` at the horizon back to time 0.

    Going backwards from a space-time point ``(v, t)``, find the last arrow into
    ``v`` before ``t`` and the wake-up window ``(a, .)`` at ``v`` containing it.
    ``v`` was active at ``a`` and flips at the first arrow in the window whose
    source disagrees with it, so the value at ``t`` is the value at ``a``,
    switched if any arrow source in ``(a, t)`` (read at its own arrow time)
    disagrees.  One arrow in the window is a plain jump; several arrows are a
    branching.  Space-time points are shared, which is where particles coalesce.
    Without wake-up dots (``lam = inf``) every arrow is its own window and the
    trace is the single voter dual walk.

    ``init_latent`` marks nodes latent at time 0: they ignore arrows until their
    first wake-up dot.
    """
    idx = _RecordIndex(record, graph.n)
    voter = math.isinf(record.lam)
    nodes: list[DualNode] = []
    memo: dict = {}
    influence: set = set()
    branchings = 0

    def node_for(v, t):
        key = (v, t)
        if key in memo:
            return memo[key], False
        memo[key] = len(nodes)
        nodes.append(DualNode(v, t))
        return memo[key], True

    root, _ = node_for(x, record.horizon)
    stack = [root]
    while stack:
        i = stack.pop()
        nd = nodes[i]
        v, t = nd.site, nd.time
        k = idx.last_arrow_before(v, t)
        if k < 0:
            nd.leaf = True
            influence.add(v)
            continue
        s = idx.t_list[k]
        if voter:
            j, new = node_for(int(idx.src[k]), s)
            # a pure jump: the value at (v, t) is the value at the source
            nd.base = j
            nd.sources = []
            if new:
                stack.append(j)
            continue
        a = idx.last_wake_before(v, s)
        if a == 0.0 and init_latent is not None and init_latent[v]:
            nd.leaf = True
            influence.add(v)
            continue
        lo = idx.a_ptr[v]
        first = bisect_left(idx.t_list, a, lo, k + 1) if a > 0 else lo
        window = range(first, k + 1)
        if len(window) == 1:
            # one arrow in the window: whatever x held, it now holds the source's value
            j, new = node_for(int(idx.src[k]), s)
            nd.base = j
            if new:
                stack.append(j)
            continue
        if len({int(idx.src[m]) for m in window}) >= 2:
            branchings += 1
        if a > 0:
            j, new = node_for(v, a)
            nd.base = j
            if new:
                stack.append(j)
        else:
            nd.base = None
            influence.add(v)
        for m in window:
            j, new = node_for(int(idx.src[m]), idx.t_list[m])
            nd.sources.append(j)
            if new:
                stack.append(j)
    return DualResult(x, influence, nodes, branchings, root)


def compute_state_via_dual(record: GraphicalRecord, graph: Graph, init: Configuration,
                           x: int) -> int:
    """Opinion of ``x`` at the record's horizon, computed from the dual alone."""
    result = run_branching_dual(record, graph, x, init_latent=init.states >= 2)
    return result.evaluate(init)


def chernoff_exp_bound(k: int, a: float) -> float:
    """Upper bound ``(a e / (1 + a))**k`` on ``P(S_k <= a k)`` for ``S_k`` a Gamma(k) sum."""
    if k < 1 or not a > 0:
        raise ValueError("need k >= 1 and a > 0")
    return (a * math.e / (1 + a)) ** k
