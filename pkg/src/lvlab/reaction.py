"""Reaction constant, exact triple-walk probabilities and the limiting ODE.

The cubic reaction term is ``c * u (1 - u) (1 - 2u)``.  Its constant is a
mixture over root degrees ``k`` of the probability that coalescing walks from
the root and two of its neighbours on a Galton-Watson tree never meet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.stats import poisson

from . import gwtree
from .dual import TRIPLE_ORDER, TripleOutcome
from .graph import EDGE, SITE, DegreeDistribution, Graph, check_kind, size_biased
from .rng import CP_STREAM, substream


class StateSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GWTreeModel:
    """Tree seen from a vertex of degree ``root_degree`` in a configuration-model graph."""

    root_degree: int
    dist: DegreeDistribution
    kind: str = SITE

    def __post_init__(self):
        check_kind(self.kind)
        if self.root_degree < 2:
            raise ValueError("the root needs two distinct neighbours")

    @property
    def offspring(self) -> dict:
        """Children count ``j`` with probability ``q_{j+1}``."""
        return {k - 1: p for k, p in size_biased(self.dist).probs.items()}


@dataclass
class TripleEstimate:
    model: GWTreeModel
    counts: np.ndarray      # tallies in TRIPLE_ORDER
    timed_out: int
    d_cut: int

    @property
    def replicates(self) -> int:
        return int(self.counts.sum()) + self.timed_out

    @property
    def classified(self) -> int:
        return int(self.counts.sum())

    def probability(self, outcome) -> float:
        return float(self.counts[TRIPLE_ORDER.index(TripleOutcome(outcome))] / self.classified)

    def se(self, outcome) -> float:
        p = self.probability(outcome)
        return math.sqrt(p * (1 - p) / self.classified)

    @property
    def survival(self) -> float:
        return self.probability(TripleOutcome.SEPARATE)

    @property
    def survival_se(self) -> float:
        return self.se(TripleOutcome.SEPARATE)

    def frequencies(self) -> dict:
        return {c.value: self.probability(c) for c in TRIPLE_ORDER}


def estimate_survival_triple(model: GWTreeModel, d_cut: int = 40, time_cap: float = 1e5,
                             replicates: int = 10**5, seed=0,
                             capacity: int = 1 << 16) -> TripleEstimate:
    """Monte Carlo partition classes of the walks from the root and two root neighbours.

    Walks run until every surviving pair is ``d_cut`` apart (the partition is
    then recorded as final) or until ``time_cap``.  Timed-out runs are left out
    of the frequencies; more than 1% of them is an error.
    """
    if replicates < 1:
        raise ValueError("replicates must be positive")
    degs, cdf = gwtree.offspring_law(model.dist)
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    out, _ = gwtree.triple_runs(model.root_degree, degs, cdf, model.kind == EDGE, d_cut,
                                float(time_cap), capacity, replicates, rng)
    tally = np.bincount(out, minlength=6)
    if tally[gwtree.TRIPLE_TIMED_OUT] > 0.01 * replicates:
        raise RuntimeError(f"{tally[5]} of {replicates} runs timed out; raise time_cap")
    return TripleEstimate(model, tally[:5], int(tally[5]), d_cut)


@dataclass
class CpEstimate:
    kind: str
    rows: list = field(default_factory=list)   # (k, weight, TripleEstimate)

    @property
    def c_p(self) -> float:
        return float(sum(w * est.survival for _, w, est in self.rows))

    @property
    def se(self) -> float:
        return math.sqrt(sum((w * est.survival_se) ** 2 for _, w, est in self.rows))

    def _normaliser(self, k):
        return (k - 1) / k if self.kind == SITE else k * (k - 1)

    @property
    def drift_constant(self) -> float:
        """Constant including the per-degree pair-count prefactor of the rates.

        Site kind: ``sum q_k (k-1)/k P_k``; edge kind: ``sum p_k k(k-1) P_k``.
        This is the coefficient of the cubic drift of the simulated density.
        """
        return float(sum(w * self._normaliser(k) * est.survival for k, w, est in self.rows))

    @property
    def drift_constant_se(self) -> float:
        return math.sqrt(sum((w * self._normaliser(k) * est.survival_se) ** 2
                             for k, w, est in self.rows))

    def format(self) -> str:
        lines = ["k,weight,P_hat,SE,replicates,timed_out"]
        for k, w, est in self.rows:
            lines.append(f"{k},{w:.9g},{est.survival:.9g},{est.survival_se:.9g},"
                         f"{est.replicates},{est.timed_out}")
        lines.append("c_p,SE")
        lines.append(f"{self.c_p:.9g},{self.se:.9g}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.format(), newline="\n")


def estimate_cp(dist: DegreeDistribution, kind: str, replicates: int = 10**5,
                d_cut: int = 40, time_cap: float = 1e5, seed=0) -> CpEstimate:
    """Weights ``q_k`` for the site kind and ``p_k`` for the edge kind."""
    check_kind(kind)
    weights = size_biased(dist).probs if kind == SITE else dist.probs
    out = CpEstimate(kind)
    for k, w in weights.items():
        est = estimate_survival_triple(GWTreeModel(k, dist, kind), d_cut, time_cap,
                                       replicates, substream(seed, CP_STREAM, k))
        out.rows.append((k, w, est))
    return out


# ------------------------------------------------------- exact triple solver

_PAIR_CLASSES = (TripleOutcome.X_APART, TripleOutcome.Z_APART, TripleOutcome.Y_APART)


def _moves(graph: Graph, kind: str):
    """Directed moves (from, to, rate) of a single walk."""
    frm = np.repeat(np.arange(graph.n), graph.degrees)
    to = graph.indices
    rate = np.ones(len(frm)) if kind == EDGE else 1.0 / graph.degrees[frm]
    return frm, to, rate


def _expand(pos, frm_ptr, to, rate):
    """For states whose moving walker sits at ``pos``: (state id, destination, rate)."""
    starts = frm_ptr[pos]
    counts = frm_ptr[pos + 1] - starts
    sid = np.repeat(np.arange(len(pos)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    e = starts[sid] + offs
    return sid, to[e], rate[e]


def _triple_generator(graph: Graph, kind: str):
    n = graph.n
    frm, to, rate = _moves(graph, kind)
    ptr = np.concatenate([[0], np.cumsum(graph.degrees)])
    NT, NP = n**3, n * n
    off = {c: NT + i * NP for i, c in enumerate(_PAIR_CLASSES)}
    ALL = NT + 3 * NP
    size = ALL + 1
    rows, cols, vals = [], [], []

    a, b, c = np.unravel_index(np.arange(NT), (n, n, n))
    ok = (a != b) & (a != c) & (b != c)
    a, b, c = a[ok], b[ok], c[ok]
    tid = (a * n + b) * n + c
    # (moving walker position, the two others, how a landing is classified)
    for who in range(3):
        mover = (a, b, c)[who]
        sid, dest, r = _expand(mover, ptr, to, rate)
        A, B, C = a[sid], b[sid], c[sid]
        if who == 0:
            hit1, hit2 = dest == B, dest == C
            nxt = np.where(hit1, off[TripleOutcome.Z_APART] + dest * n + C,
                           np.where(hit2, off[TripleOutcome.Y_APART] + dest * n + B,
                                    (dest * n + B) * n + C))
        elif who == 1:
            hit1, hit2 = dest == A, dest == C
            nxt = np.where(hit1, off[TripleOutcome.Z_APART] + A * n + C,
                           np.where(hit2, off[TripleOutcome.X_APART] + A * n + C,
                                    (A * n + dest) * n + C))
        else:
            hit1, hit2 = dest == A, dest == B
            nxt = np.where(hit1, off[TripleOutcome.Y_APART] + A * n + B,
                           np.where(hit2, off[TripleOutcome.X_APART] + A * n + B,
                                    (A * n + B) * n + dest))
        rows.append(tid[sid])
        cols.append(nxt)
        vals.append(r)

    p, q = np.unravel_index(np.arange(NP), (n, n))
    ok = p != q
    p, q = p[ok], q[ok]
    for cls in _PAIR_CLASSES:
        pid = off[cls] + p * n + q
        for who in range(2):
            mover, other = (p, q) if who == 0 else (q, p)
            sid, dest, r = _expand(mover, ptr, to, rate)
            o = other[sid]
            if who == 0:
                nxt = np.where(dest == o, ALL, off[cls] + dest * n + o)
            else:
                nxt = np.where(dest == o, ALL, off[cls] + o * n + dest)
            rows.append(pid[sid])
            cols.append(nxt)
            vals.append(r)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    Q = sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))
    exit_rate = np.asarray(Q.sum(axis=1)).ravel()
    return Q, exit_rate, off, ALL


def uniformized(P_T, exit_lam, p0, t, tol=1e-13):
    """``p0 exp(tQ)`` given ``P_T = (I + Q/exit_lam)^T``; Poisson tail below ``tol``."""
    if t == 0:
        return p0.copy()
    mu = exit_lam * t
    kmax = int(poisson.isf(tol, mu)) + 2
    w = poisson.pmf(np.arange(kmax + 1), mu)
    out = w[0] * p0
    v = p0
    for k in range(1, kmax + 1):
        v = P_T @ v
        out = out + w[k] * v
    return out


def _initial_state(n, x, y, z, off, ALL):
    if x == y == z:
        return ALL
    if y == z:
        return off[TripleOutcome.X_APART] + x * n + y
    if x == y:
        return off[TripleOutcome.Z_APART] + x * n + z
    if x == z:
        return off[TripleOutcome.Y_APART] + x * n + y
    return (x * n + y) * n + z


def triple_meeting_exact(graph: Graph, kind: str, x: int, y: int, z: int, t,
                         max_states: int = 10**5) -> dict:
    """Exact partition-class probabilities of three coalescing walks at time ``t``.

    ``t`` may be a scalar (returns a dict) or a sequence (returns a list of dicts).
    Coinciding starts are allowed and begin already merged.
    """
    check_kind(kind)
    n = graph.n
    if n**3 + 3 * n * n + 1 > max_states:
        raise StateSpaceTooLarge(f"n={n} gives more than {max_states} states")
    Q, exit_rate, off, ALL = _triple_generator(graph, kind)
    lam = float(exit_rate.max()) if exit_rate.max() > 0 else 1.0
    size = Q.shape[0]
    P = sparse.identity(size, format="csr") + (Q - sparse.diags(exit_rate)) / lam
    P_T = P.T.tocsr()
    p0 = np.zeros(size)
    p0[_initial_state(n, x, y, z, off, ALL)] = 1.0
    NT, NP = n**3, n * n
    times = np.atleast_1d(np.asarray(t, dtype=float))
    res = []
    for s in times:
        p = uniformized(P_T, lam, p0, float(s))
        d = {TripleOutcome.SEPARATE.value: float(p[:NT].sum())}
        for cls in _PAIR_CLASSES:
            d[cls.value] = float(p[off[cls]:off[cls] + NP].sum())
        d[TripleOutcome.ALL.value] = float(p[ALL])
        res.append(d)
    return res[0] if np.ndim(t) == 0 else res


def event_probability(classes: dict, u: float) -> float:
    """``P(x=1, y=2 or z=2)`` from partition-class probabilities, inputs i.i.d. Bernoulli(u)."""
    pairs = classes["x|yz"] + classes["xy|z"] + classes["xz|y"]
    return classes["x|y|z"] * u * (1 - u * u) + pairs * u * (1 - u)


def voter_event_probability(graph: Graph, kind: str, x: int, y: int, z: int, u: float,
                            t: float) -> float:
    """``P(xi_t(x)=1 and (xi_t(y)=2 or xi_t(z)=2))`` for the voter model from product(u)."""
    return event_probability(triple_meeting_exact(graph, kind, x, y, z, t), u)


def phi(u, p_survive):
    return p_survive * u * (1 - u) * (1 - 2 * u)


# ------------------------------------------------------------------- ODE

@dataclass
class OdeSolution:
    times: np.ndarray
    values: np.ndarray
    c: float
    u0: float


def _rhs(c, u):
    return c * u * (1 - u) * (1 - 2 * u)


def solve_ode(c: float, u0: float, grid, max_step: float = 1e-3) -> OdeSolution:
    """Classical RK4 for ``u' = c u (1-u)(1-2u)`` with steps of at most ``max_step``."""
    if c < 0 or not 0 <= u0 <= 1:
        raise ValueError("need c >= 0 and u0 in [0, 1]")
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0) or (grid.size and grid[0] < 0):
        raise ValueError("grid must be sorted and non-negative")
    out = np.empty(len(grid))
    t, u = 0.0, float(u0)
    for i, target in enumerate(grid):
        span = target - t
        steps = int(math.ceil(span / max_step - 1e-9)) if span > 0 else 0
        if steps:
            h = span / steps
            for _ in range(steps):
                k1 = _rhs(c, u)
                k2 = _rhs(c, u + 0.5 * h * k1)
                k3 = _rhs(c, u + 0.5 * h * k2)
                k4 = _rhs(c, u + h * k3)
                u += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        t = target
        out[i] = u
    return OdeSolution(grid, out, float(c), float(u0))


def ode_closed_form(c: float, u0: float, t):
    """Solution via ``z = (u - 1/2)^-2``, which satisfies ``z' = c (z - 4)``."""
    t = np.asarray(t, dtype=float)
    w0 = u0 - 0.5
    if w0 == 0:
        return np.full_like(t, 0.5)
    v0 = w0 * w0
    return 0.5 + math.copysign(1.0, w0) * np.sqrt(1.0 / (4 + (1 / v0 - 4) * np.exp(c * t)))


def band_entry_time(c: float, u0: float, eps: float) -> float:
    """First time the ODE solution is within ``eps`` of 1/2 (0 if it starts there)."""
    w0 = abs(u0 - 0.5)
    if w0 <= eps:
        return 0.0
    if w0 >= 0.5 or c == 0:
        return math.inf
    z0, z1 = 1 / w0**2, 1 / eps**2
    return math.log((z1 - 4) / (z0 - 4)) / c
