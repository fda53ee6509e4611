"""Random-walk mixing diagnostics: spectral gap, transient distance to stationarity, conductance.

Everything uses the continuous-time walk of the given kind: the site walk
jumps at rate 1 to a uniform neighbour, the edge walk at rate 1 along every
edge.  The gap is that of the rate matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit
from scipy.stats import poisson

from .graph import EDGE, SITE, DisconnectedGraph, Graph, check_kind, stationary_distribution

DENSE_LIMIT = 500
CUT_LIMIT = 20


class SizeLimitExceeded(ValueError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, iterations):
        super().__init__(f"power iteration did not converge after {iterations} iterations")
        self.iterations = iterations


def rate_matrix(graph: Graph, kind: str) -> np.ndarray:
    check_kind(kind)
    A = graph.adjacency().toarray().astype(float)
    if kind == SITE:
        A /= graph.degrees[:, None]
    np.fill_diagonal(A, -A.sum(axis=1))
    return A


def _symmetric_generator(graph: Graph, kind: str):
    """``S = diag(sqrt(pi)) Q diag(1/sqrt(pi))`` as a sparse matrix (symmetric since the walk is reversible)."""
    A = graph.adjacency().astype(float)
    d = graph.degrees.astype(float)
    if kind == SITE:
        s = 1 / np.sqrt(d)
        S = A.multiply(s[:, None]).multiply(s[None, :]).tocsr()
        diag = np.ones(graph.n)
    else:
        S = A.tocsr()
        diag = d
    return S, diag


def spectral_gap(graph: Graph, kind: str, tol: float = 1e-9, max_iter: int = 10**6,
                 seed: int = 0) -> float:
    """Smallest non-zero eigenvalue of ``-Q``.

    Dense symmetric eigensolver for ``n <= 500``; otherwise power iteration on
    ``c I + S`` with the stationary direction projected out.
    """
    check_kind(kind)
    if not graph.is_connected():
        raise DisconnectedGraph("spectral gap needs a connected graph")
    S, diag = _symmetric_generator(graph, kind)
    if graph.n <= DENSE_LIMIT:
        M = S.toarray()
        M[np.diag_indices_from(M)] -= diag
        ev = np.linalg.eigvalsh(M)
        return float(-ev[-2])
    top = np.sqrt(stationary_distribution(graph, kind))
    shift = float(diag.max())
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(graph.n)
    v -= top * (top @ v)
    v /= np.linalg.norm(v)
    mu_old = np.inf
    for it in range(1, max_iter + 1):
        w = S @ v + (shift - diag) * v
        w -= top * (top @ w)
        mu = float(v @ w)
        w /= np.linalg.norm(w)
        v = w
        if abs(mu - mu_old) < tol * max(1.0, abs(mu)):
            return shift - mu
        mu_old = mu
    raise NonConvergence(max_iter)


def _propagate(P, Q, lam, dt, tol=1e-13):
    """``P exp(dt Q)`` by uniformization."""
    if dt == 0:
        return P
    mu = lam * dt
    K = np.eye(Q.shape[0]) + Q / lam
    kmax = int(poisson.isf(tol, mu)) + 2
    w = poisson.pmf(np.arange(kmax + 1), mu)
    out = w[0] * P
    V = P
    for k in range(1, kmax + 1):
        V = V @ K
        out += w[k] * V
    return out


def transition_matrices(graph: Graph, kind: str, times) -> list:
    """``p_t(x, y)`` for every requested time (unordered input allowed)."""
    if graph.n > DENSE_LIMIT:
        raise SizeLimitExceeded(f"n={graph.n} exceeds {DENSE_LIMIT} for dense transients")
    Q = rate_matrix(graph, kind)
    lam = float(-Q.diagonal().min())
    times = np.asarray(times, dtype=float)
    order = np.argsort(times, kind="stable")
    out = [None] * len(times)
    P = np.eye(graph.n)
    t = 0.0
    for i in order:
        P = _propagate(P, Q, lam, times[i] - t)
        t = times[i]
        out[i] = P
    return out


def tv_distance_curve(graph: Graph, kind: str, times) -> np.ndarray:
    """``Delta(t) = max_{x,y} |p_t(x,y)/pi(y) - 1|``."""
    pi = stationary_distribution(graph, kind)
    return np.array([float(np.abs(P / pi[None, :] - 1).max())
                     for P in transition_matrices(graph, kind, times)])


@njit(cache=True)
def _min_cut_ratio(indptr, indices, weight, edge_q):
    """Gray-code sweep over all vertex subsets; ``weight`` is pi, ``edge_q`` is Q(x,y)."""
    n = weight.shape[0]
    inside = np.zeros(n, dtype=np.bool_)
    nb_in = np.zeros(n, dtype=np.int64)
    cut = 0
    mass = 0.0
    best = np.inf
    for i in range(1, 1 << n):
        # bit that flips between gray(i-1) and gray(i)
        v = 0
        j = i
        while (j & 1) == 0:
            j >>= 1
            v += 1
        deg = indptr[v + 1] - indptr[v]
        if inside[v]:
            inside[v] = False
            mass -= weight[v]
            cut -= deg - 2 * nb_in[v]
            for k in range(indptr[v], indptr[v + 1]):
                nb_in[indices[k]] -= 1
        else:
            inside[v] = True
            mass += weight[v]
            cut += deg - 2 * nb_in[v]
            for k in range(indptr[v], indptr[v + 1]):
                nb_in[indices[k]] += 1
        if mass > 0 and mass <= 0.5 + 1e-12:
            r = cut * edge_q / mass
            if r < best:
                best = r
    return best


def conductance_exact(graph: Graph, kind: str) -> float:
    """``h = min_{pi(S) <= 1/2} Q(S, S^c) / pi(S)`` with ``Q(x,y) = pi(x) q(x,y)``."""
    check_kind(kind)
    if graph.n > CUT_LIMIT:
        raise SizeLimitExceeded(f"n={graph.n} exceeds {CUT_LIMIT} for subset enumeration")
    pi = stationary_distribution(graph, kind)
    edge_q = 1.0 / graph.n if kind == EDGE else 1.0 / graph.degrees.sum()
    return float(_min_cut_ratio(graph.indptr, graph.indices, pi, edge_q))


def cut_ratio(graph: Graph, kind: str, subset) -> float:
    """``Q(S, S^c) / pi(S)`` for one subset."""
    pi = stationary_distribution(graph, kind)
    inside = np.zeros(graph.n, dtype=bool)
    inside[list(subset)] = True
    e = graph.edges()
    crossing = int(np.sum(inside[e[:, 0]] != inside[e[:, 1]]))
    edge_q = 1.0 / graph.n if kind == EDGE else 1.0 / graph.degrees.sum()
    return crossing * edge_q / float(pi[inside].sum())


@dataclass
class MixingReport:
    kind: str
    n: int
    gap: float
    pi_min: float
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    delta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    h: float | None = None

    @property
    def sandwich_holds(self) -> bool | None:
        if self.h is None:
            return None
        return self.h**2 / 2 <= self.gap * (1 + 1e-12) and self.gap <= 2 * self.h * (1 + 1e-12)

    @property
    def delta_monotone(self) -> bool:
        order = np.argsort(self.times)
        return bool(np.all(np.diff(self.delta[order]) <= 1e-12))

    @property
    def delta_bounded(self) -> bool:
        bound = np.exp(-self.gap * self.times) / self.pi_min
        return bool(np.all(self.delta <= bound * (1 + 1e-9) + 1e-12))

    def mixing_time(self, level: float | None = None) -> float | None:
        """First sampled time with ``Delta <= level`` (default ``1/n``)."""
        level = 1.0 / self.n if level is None else level
        order = np.argsort(self.times)
        for t, d in zip(self.times[order], self.delta[order]):
            if d <= level:
                return float(t)
        return None

    def decay_rate(self, floor: float = 1e-10) -> float | None:
        """Least-squares slope of ``-log Delta`` over the second half of the samples."""
        order = np.argsort(self.times)
        t, d = self.times[order], self.delta[order]
        keep = d > floor
        t, d = t[keep], d[keep]
        if len(t) < 4:
            return None
        half = len(t) // 2
        slope = np.polyfit(t[half:], np.log(d[half:]), 1)[0]
        return float(-slope)

    def write_csv(self, path) -> None:
        rows = ["t,delta"] + [f"{t:.9g},{d:.9g}" for t, d in zip(self.times, self.delta)]
        Path(path).write_text("\n".join(rows) + "\n", newline="\n")

    def summary_line(self) -> str:
        h = "" if self.h is None else f"{self.h:.9g}"
        return f"gap,h,pi_min,n,kind\n{self.gap:.9g},{h},{self.pi_min:.9g},{self.n},{self.kind}\n"


def mixing_report(graph: Graph, kind: str, times=(), with_conductance: bool | None = None
                  ) -> MixingReport:
    pi = stationary_distribution(graph, kind)
    times = np.asarray(times, dtype=float)
    rep = MixingReport(kind, graph.n, spectral_gap(graph, kind), float(pi.min()), times)
    if len(times):
        rep.delta = tv_distance_curve(graph, kind, times)
    if with_conductance is None:
        with_conductance = graph.n <= CUT_LIMIT
    if with_conductance:
        rep.h = conductance_exact(graph, kind)
    return rep
