"""Event-driven simulation of the latent voter model on a fixed graph.

Node states are coded ``0 = 1`` (active, opinion 1), ``1 = 2`` (active,
opinion 2), ``2 = 1*`` and ``3 = 2*`` (latent).  An active node holding opinion
``i`` flips into the latent state of the other opinion at rate ``n_j(x)/d(x)``
(site kind) or ``n_j(x)`` (edge kind), where ``n_j(x)`` counts neighbours
holding the other opinion whether they are active or latent.  Latent nodes
wake up at rate ``lam``.

The simulator keeps the clock in unrescaled time ``s`` and records the
density of opinion 1 (latent nodes included) on a grid of rescaled times
``t = s / lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np
from numba import njit

from . import sumtree
from .graph import EDGE, SITE, Graph, check_kind
from .rng import substream


class NodeState(IntEnum):
    ACTIVE1 = 0
    ACTIVE2 = 1
    LATENT1 = 2
    LATENT2 = 3

    @property
    def opinion(self) -> int:
        return 1 + (self.value & 1)

    @property
    def latent(self) -> bool:
        return self.value >= 2


def opinions_of(states: np.ndarray) -> np.ndarray:
    return (1 + (np.asarray(states) & 1)).astype(np.int8)


def _ones_count(graph: Graph, states: np.ndarray) -> np.ndarray:
    is_one = (np.asarray(states) & 1) == 0
    return np.add.reduceat(is_one[graph.indices].astype(np.int64), graph.indptr[:-1]) \
        if graph.n else np.zeros(0, dtype=np.int64)


def _flip_rates(graph: Graph, states: np.ndarray, ones: np.ndarray, kind: str) -> np.ndarray:
    deg = graph.degrees
    opp = np.where((states & 1) == 0, deg - ones, ones).astype(np.float64)
    if kind == SITE:
        opp = opp / deg
    opp[states >= 2] = 0.0
    return opp


@dataclass
class Configuration:
    """Node states plus the caches the simulator maintains alongside them."""

    states: np.ndarray
    ones: np.ndarray
    rates: np.ndarray
    kind: str

    @classmethod
    def from_states(cls, graph: Graph, states, kind: str = SITE) -> "Configuration":
        check_kind(kind)
        states = np.array(states, dtype=np.int8)
        if states.shape != (graph.n,) or states.min() < 0 or states.max() > 3:
            raise ValueError("states must be one code in 0..3 per node")
        ones = _ones_count(graph, states)
        return cls(states, ones, _flip_rates(graph, states, ones, kind), kind)

    @classmethod
    def from_opinions(cls, graph: Graph, opinions, kind: str = SITE, latent=None) -> "Configuration":
        opinions = np.asarray(opinions)
        if not np.isin(opinions, (1, 2)).all():
            raise ValueError("opinions must be 1 or 2")
        states = (opinions - 1).astype(np.int8)
        if latent is not None:
            states = states + 2 * np.asarray(latent, dtype=np.int8)
        return cls.from_states(graph, states, kind)

    @classmethod
    def constant(cls, graph: Graph, opinion: int, kind: str = SITE) -> "Configuration":
        return cls.from_opinions(graph, np.full(graph.n, opinion), kind)

    @classmethod
    def bernoulli(cls, graph: Graph, u: float, rng: np.random.Generator,
                  kind: str = SITE) -> "Configuration":
        """Independent opinions, each equal to 1 with probability ``u``; all active."""
        return cls.from_opinions(graph, np.where(rng.random(graph.n) < u, 1, 2), kind)

    @classmethod
    def with_density(cls, graph: Graph, u: float, rng: np.random.Generator,
                     kind: str = SITE) -> "Configuration":
        """Exactly ``round(u n)`` opinion-1 nodes placed uniformly at random."""
        ops = np.full(graph.n, 2)
        ops[rng.permutation(graph.n)[:int(round(u * graph.n))]] = 1
        return cls.from_opinions(graph, ops, kind)

    @property
    def opinions(self) -> np.ndarray:
        return opinions_of(self.states)

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def opinion1_count(self) -> int:
        return int(np.count_nonzero((self.states & 1) == 0))

    @property
    def latent_count(self) -> int:
        return int(np.count_nonzero(self.states >= 2))

    @property
    def density(self) -> float:
        return self.opinion1_count / self.n

    @property
    def total_rate(self) -> float:
        return float(self.rates.sum())

    def total_event_rate(self, lam: float) -> float:
        return self.total_rate + lam * self.latent_count

    def swapped(self, graph: Graph) -> "Configuration":
        """Relabel opinions 1 <-> 2, keeping latency."""
        return Configuration.from_states(graph, self.states ^ 1, self.kind)

    def check(self, graph: Graph) -> None:
        """Recount every cache from the states; raise AssertionError on mismatch."""
        ones = _ones_count(graph, self.states)
        if not np.array_equal(ones, self.ones):
            raise AssertionError("cached opinion-1 neighbour counts are stale")
        rates = _flip_rates(graph, self.states, ones, self.kind)
        if not np.array_equal(rates, self.rates):
            raise AssertionError("cached flip rates are stale")


def flip_rate(config: Configuration, graph: Graph, x: int, kind: str) -> float:
    """Rate at which ``x`` flips, computed from scratch (latent nodes give 0)."""
    check_kind(kind)
    s = int(config.states[x])
    if s >= 2:
        return 0.0
    nb_ops = opinions_of(config.states[graph.neighbors(x)])
    opp = int(np.count_nonzero(nb_ops != 1 + s))
    return float(opp) if kind == EDGE else opp / int(graph.degrees[x])


@dataclass(frozen=True)
class SimParams:
    lam: float
    kind: str = SITE
    horizon: float = 1.0
    grid: tuple = ()
    seed: int = 0
    max_events: int = 10**9
    band: tuple | None = None
    record_drift: bool = False

    def __post_init__(self):
        check_kind(self.kind)
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.horizon >= 0:
            raise ValueError("horizon must be non-negative")
        grid = tuple(float(t) for t in self.grid) if len(self.grid) else \
            tuple(float(t) for t in np.arange(0, math.floor(self.horizon) + 1))
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be sorted")
        if grid and (grid[0] < 0 or grid[-1] > self.horizon):
            raise ValueError("grid must lie within [0, horizon]")
        object.__setattr__(self, "grid", grid)


@dataclass
class Trajectory:
    times: np.ndarray
    density: np.ndarray
    latent_frac: np.ndarray
    flips: int
    recoveries: int
    final: Configuration
    first_exit: float | None = None
    truncated: bool = False
    drift: np.ndarray | None = field(default=None, repr=False)

    @property
    def events(self) -> int:
        return self.flips + self.recoveries

    def write_csv(self, path) -> None:
        rows = ["t,density,latent_frac"]
        rows += [f"{t:.9g},{d:.9g},{l:.9g}"
                 for t, d, l in zip(self.times, self.density, self.latent_frac)]
        Path(path).write_text("\n".join(rows) + "\n", newline="\n")


@njit(cache=True)
def _rate(s, ones, d, edge, lam):
    if s >= 2:
        return lam
    opp = d - ones if s == 0 else ones
    if edge:
        return float(opp)
    return opp / d


@njit(cache=True)
def _run(indptr, indices, deg, state, ones, edge, lam, voter, grid, max_events,
         band_lo, band_hi, record_drift, rng, out_ones, out_latent, out_drift):
    n = deg.shape[0]
    tree = np.zeros(2 * sumtree.tree_size(n))
    size = tree.shape[0] // 2
    count1 = 0
    latent = 0
    for x in range(n):
        tree[size + x] = _rate(state[x], ones[x], deg[x], edge, lam)
        if (state[x] & 1) == 0:
            count1 += 1
        if state[x] >= 2:
            latent += 1
    sumtree._rebuild(tree, size)

    first_exit = -1.0
    if count1 < band_lo or count1 > band_hi:
        first_exit = 0.0
    s = 0.0
    g = 0
    ng = grid.shape[0]
    flips = 0
    wakes = 0
    truncated = False
    while g < ng:
        tot = tree[1]
        if tot > 0.0:
            s_next = s + rng.exponential(1.0) / tot
        else:
            s_next = np.inf
        while g < ng and (grid[g] < s_next or tot <= 0.0):
            out_ones[g] = count1
            out_latent[g] = latent
            if record_drift:
                acc = 0.0
                for x in range(n):
                    if state[x] == 1:
                        acc += tree[size + x]
                    elif state[x] == 0:
                        acc -= tree[size + x]
                out_drift[g] = acc
            g += 1
        if g == ng:
            break
        if flips + wakes >= max_events:
            truncated = True
            break
        s = s_next
        x = sumtree.select(tree, rng.random() * tot)
        st = state[x]
        if st >= 2:
            state[x] = st - 2
            latent -= 1
            wakes += 1
            sumtree.update(tree, x, _rate(st - 2, ones[x], deg[x], edge, lam))
            continue
        flips += 1
        if voter:
            state[x] = 1 - st
        else:
            state[x] = 3 - st
            latent += 1
        if st == 0:
            delta = -1
        else:
            delta = 1
        count1 += delta
        for k in range(indptr[x], indptr[x + 1]):
            y = indices[k]
            ones[y] += delta
            if state[y] < 2:
                sumtree.update(tree, y, _rate(state[y], ones[y], deg[y], edge, lam))
        sumtree.update(tree, x, _rate(state[x], ones[x], deg[x], edge, lam))
        if first_exit < 0.0 and (count1 < band_lo or count1 > band_hi):
            first_exit = s
    return flips, wakes, first_exit, truncated


def _execute(graph: Graph, init: Configuration, kind: str, lam: float, voter: bool,
             grid_unrescaled: np.ndarray, rng: np.random.Generator, max_events: int,
             band=None, record_drift=False):
    state = init.states.copy()
    ones = _ones_count(graph, state)
    ng = len(grid_unrescaled)
    out_ones = np.full(ng, -1, dtype=np.int64)
    out_latent = np.zeros(ng, dtype=np.int64)
    out_drift = np.zeros(ng)
    n = graph.n
    if band is None:
        lo, hi = -1.0, n + 1.0
    else:
        lo, hi = band[0] * n, band[1] * n
    flips, wakes, first_exit, truncated = _run(
        graph.indptr, graph.indices, graph.degrees, state, ones, kind == EDGE,
        float(lam), voter, np.asarray(grid_unrescaled, dtype=np.float64), int(max_events),
        lo, hi, record_drift, rng, out_ones, out_latent, out_drift)
    density = np.where(out_ones >= 0, out_ones / n, np.nan)
    final = Configuration(state, ones, _flip_rates(graph, state, ones, kind), kind)
    return density, out_latent / n, int(flips), int(wakes), final, first_exit, \
        bool(truncated), out_drift


def simulate(graph: Graph, params: SimParams, init: Configuration,
             rng: np.random.Generator | None = None) -> Trajectory:
    """Exact continuous-time simulation of the latent model up to ``params.horizon``.

    ``params.grid`` and ``params.horizon`` are in rescaled time.  When
    ``params.band = (lo, hi)`` is given, the first rescaled time at which the
    density leaves ``[lo, hi]`` is reported as ``first_exit``.
    """
    if rng is None:
        rng = substream(params.seed)
    grid = np.asarray(params.grid, dtype=float)
    # the last grid point is the horizon itself so the run stops there
    stops = np.append(grid, params.horizon) * params.lam
    density, latent, flips, wakes, final, first_exit, truncated, drift = _execute(
        graph, init, params.kind, params.lam, False, stops, rng,
        params.max_events, params.band, params.record_drift)
    if first_exit > params.horizon * params.lam:
        first_exit = -1.0
    return Trajectory(grid, density[:-1], latent[:-1], flips, wakes, final,
                      None if first_exit < 0 else first_exit / params.lam, truncated,
                      params.lam * drift[:-1] / graph.n if params.record_drift else None)


def simulate_voter(graph: Graph, kind: str, horizon: float, init: Configuration,
                   seed=0, grid=None, rng: np.random.Generator | None = None,
                   max_events: int = 10**9) -> Trajectory:
    """Plain voter model (no latency); ``horizon`` and ``grid`` in unrescaled time.

    ``horizon=inf`` runs until one opinion has taken over.
    """
    check_kind(kind)
    if rng is None:
        rng = substream(seed)
    grid = np.asarray([0.0, horizon] if grid is None else grid, dtype=float)
    stops = np.append(grid, horizon)
    if init.latent_count:
        raise ValueError("voter initial condition must have no latent nodes")
    density, latent, flips, wakes, final, _, truncated, _ = _execute(
        graph, init, kind, 0.0, True, stops, rng, max_events)
    return Trajectory(grid, density[:-1], latent[:-1], flips, wakes, final,
                      truncated=truncated)


def generator_drift(config: Configuration, graph: Graph, params: SimParams) -> float:
    """Expected rate of change of the density, in rescaled time units."""
    states = config.states
    rates = _flip_rates(graph, states, _ones_count(graph, states), params.kind)
    return params.lam * (rates[states == 1].sum() - rates[states == 0].sum()) / graph.n


def drift_perturbation(config: Configuration, graph: Graph, variant: str = "literal") -> float:
    """Triple-sum drift over ordered neighbour pairs ``(y, z)`` of each ``x``.

    ``literal`` sums the raw indicators
    ``1{x=2, y=1 or z=1} - 1{x=1, y=2 or z=2}``; ``site`` weights node ``x`` by
    ``1/d(x)^2`` (the ``2/d^2`` prefactor over unordered pairs) and ``edge`` by 1.
    Latency is ignored: only opinions enter.
    """
    if variant not in ("literal", "site", "edge"):
        raise ValueError(f"unknown variant {variant!r}")
    is_one = (config.states & 1) == 0
    deg = graph.degrees.astype(np.int64)
    ones = _ones_count(graph, config.states)
    twos = deg - ones
    # ordered pairs y != z of neighbours with at least one holding opinion j:
    # all d(d-1) pairs minus the pairs where both hold the other opinion
    pairs_with_two = deg * (deg - 1) - ones * (ones - 1)
    pairs_with_one = deg * (deg - 1) - twos * (twos - 1)
    per_node = np.where(is_one, -pairs_with_two, pairs_with_one).astype(np.float64)
    if variant == "site":
        per_node = per_node / deg**2
    return float(per_node.sum() / graph.n)


def write_batch_summary(path, **items) -> None:
    Path(path).write_text("".join(f"{k} = {v}\n" for k, v in items.items()), newline="\n")


class CapExceeded(RuntimeError):
    pass


@dataclass
class GraphicalRecord:
    """Poisson arrows ``src -> dst`` and wake-up dots on ``[0, horizon]`` (unrescaled).

    Arrows into ``x`` arrive at rate 1 per neighbour (edge kind) or ``1/d(x)``
    per neighbour (site kind); wake-up dots at rate ``lam`` per node.  With
    ``lam = inf`` there are no dots and the record drives the plain voter model.
    All event arrays are sorted by time.
    """

    kind: str
    lam: float
    horizon: float
    arrow_time: np.ndarray
    arrow_src: np.ndarray
    arrow_dst: np.ndarray
    wake_time: np.ndarray
    wake_node: np.ndarray

    def arrows(self, y: int, x: int) -> np.ndarray:
        return self.arrow_time[(self.arrow_src == y) & (self.arrow_dst == x)]

    def wake_dots(self, x: int) -> np.ndarray:
        return self.wake_time[self.wake_node == x]

    @property
    def num_events(self) -> int:
        return len(self.arrow_time) + len(self.wake_time)


def sample_graphical(graph: Graph, kind: str, lam: float, horizon: float, seed=0,
                     cap: float = 1e7) -> GraphicalRecord:
    check_kind(kind)
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    dst = np.repeat(np.arange(graph.n), graph.degrees)
    src = graph.indices
    rate = np.ones(len(dst)) if kind == EDGE else 1.0 / graph.degrees[dst]
    voter = math.isinf(lam)
    expected = rate.sum() * horizon + (0.0 if voter else graph.n * lam * horizon)
    if expected > cap:
        raise CapExceeded(f"expected {expected:.3g} events exceeds the cap {cap:.3g}")
    counts = rng.poisson(rate * horizon)
    times = rng.uniform(0.0, horizon, counts.sum())
    a_src, a_dst = np.repeat(src, counts), np.repeat(dst, counts)
    order = np.argsort(times, kind="stable")
    if voter:
        w_t, w_n = np.zeros(0), np.zeros(0, dtype=np.int64)
    else:
        wc = rng.poisson(np.full(graph.n, lam * horizon))
        w_t = rng.uniform(0.0, horizon, wc.sum())
        w_n = np.repeat(np.arange(graph.n), wc)
        wo = np.argsort(w_t, kind="stable")
        w_t, w_n = w_t[wo], w_n[wo]
    return GraphicalRecord(kind, float(lam), float(horizon), times[order], a_src[order],
                           a_dst[order], w_t, w_n)


def evolve_forward(record: GraphicalRecord, graph: Graph, init: Configuration) -> Configuration:
    """Sweep the record in time order and return the final configuration."""
    states = init.states.copy()
    voter = math.isinf(record.lam)
    if voter and init.latent_count:
        raise ValueError("a voter record needs an all-active initial configuration")
    na, nw = len(record.arrow_time), len(record.wake_time)
    at, asrc, adst = record.arrow_time.tolist(), record.arrow_src.tolist(), record.arrow_dst.tolist()
    wt, wn = record.wake_time.tolist(), record.wake_node.tolist()
    i = j = 0
    while i < na or j < nw:
        if j >= nw or (i < na and at[i] < wt[j]):
            x, y = adst[i], asrc[i]
            i += 1
            sx = states[x]
            if sx < 2 and (states[y] & 1) != sx:
                states[x] = (states[y] & 1) if voter else 2 + (states[y] & 1)
        else:
            x = wn[j]
            j += 1
            if states[x] >= 2:
                states[x] -= 2
    return Configuration.from_states(graph, states, init.kind)


@njit(cache=True)
def _voter_batch(indptr, indices, deg, init, u, edge, grid, replicates, max_events, rng,
                 finals, dens):
    n = deg.shape[0]
    state = np.zeros(n, dtype=np.int64)
    ones = np.zeros(n, dtype=np.int64)
    out_ones = np.zeros(grid.shape[0], dtype=np.int64)
    out_latent = np.zeros(grid.shape[0], dtype=np.int64)
    out_drift = np.zeros(grid.shape[0])
    for r in range(replicates):
        for x in range(n):
            if u < 0.0:
                state[x] = init[x]
            else:
                state[x] = 0 if rng.random() < u else 1
        for x in range(n):
            c = 0
            for k in range(indptr[x], indptr[x + 1]):
                if state[indices[k]] == 0:
                    c += 1
            ones[x] = c
        _run(indptr, indices, deg, state, ones, edge, 0.0, True, grid, max_events,
             -1.0, n + 1.0, False, rng, out_ones, out_latent, out_drift)
        for x in range(n):
            finals[r, x] = 1 + state[x]
        for g in range(grid.shape[0] - 1):
            dens[r, g] = out_ones[g] / n


def voter_batch(graph: Graph, kind: str, horizon: float, replicates: int,
                rng: np.random.Generator, u: float | None = None,
                init: Configuration | None = None, grid=None, max_events: int = 10**9):
    """Many independent voter runs on one graph.

    Each replicate starts from ``init`` or, when ``u`` is given, from i.i.d.
    opinions equal to 1 with probability ``u``.  Returns ``(finals, density)``:
    opinions at ``horizon`` (shape replicates x n) and the density at each
    ``grid`` time (shape replicates x len(grid)).  Times are unrescaled;
    ``horizon=inf`` runs each replicate to consensus.
    """
    check_kind(kind)
    if (u is None) == (init is None):
        raise ValueError("give exactly one of u and init")
    grid = np.asarray([] if grid is None else grid, dtype=float)
    stops = np.append(grid, horizon)
    states0 = np.zeros(graph.n, dtype=np.int64) if init is None else init.states.astype(np.int64)
    if init is not None and init.latent_count:
        raise ValueError("voter initial condition must have no latent nodes")
    finals = np.zeros((replicates, graph.n), dtype=np.int64)
    dens = np.zeros((replicates, len(grid)))
    _voter_batch(graph.indptr, graph.indices, graph.degrees, states0,
                 -1.0 if u is None else float(u), kind == EDGE, stops, int(replicates),
                 int(max_events), rng, finals, dens)
    return finals, dens
