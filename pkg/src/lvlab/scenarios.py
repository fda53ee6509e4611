"""Experiment configs and the scenario runner behind the ``lvlab`` command.

A config file is plain ``key = value`` lines; ``#`` starts a comment.  Every
scenario writes its CSVs plus ``summary.json`` (metrics and pass/fail flags)
and ``manifest.json`` (resolved config, replicate seeds, output files, timing).
Data files depend only on the config and seed, never on the worker count.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from . import __version__
from .dual import compute_state_via_dual, crw_all_sites, run_branching_dual
from .dynamics import (Configuration, SimParams, evolve_forward, sample_graphical, simulate,
                       write_batch_summary)
from .graph import (KINDS, DegreeDistribution, Graph, ball, configuration_graph, size_biased,
                    triangle_count)
from .mixing import CUT_LIMIT, DENSE_LIMIT, mixing_report
from .parallel import map_replicates
from .reaction import (CpEstimate, GWTreeModel, band_entry_time, estimate_survival_triple,
                       solve_ode)
from .rng import CP_STREAM, GRAPH_STREAM, substream

SCENARIOS = ("generate", "simulate", "ode-limit", "persistence", "crw-stats", "estimate-cp",
             "duality-check", "mixing-report", "drift-gap")


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


# name -> (parser, default, check, help)
_FIELDS = {
    "scenario": (str, "simulate", lambda v: v in SCENARIOS, "one of " + ", ".join(SCENARIOS)),
    "degree_law": (str, "3:1.0", None, "degree:prob pairs, e.g. 3:0.5,4:0.5"),
    "n": (int, 1000, lambda v: v >= 4, "number of nodes"),
    "lambda": (float, 100.0, lambda v: v > 0, "wake-up rate (inf = plain voter)"),
    "kind": (str, "site", lambda v: v in KINDS, "site or edge"),
    "u0": (float, 0.5, lambda v: 0 <= v <= 1, "initial density of opinion 1"),
    "horizon": (float, 5.0, lambda v: v >= 0, "rescaled time horizon"),
    "grid_step": (float, 0.1, lambda v: v > 0, "spacing of the output time grid"),
    "replicates": (int, 10, lambda v: v >= 1, "replicates (records for duality-check)"),
    "seed": (int, 0, lambda v: v >= 0, "master seed"),
    "epsilon": (float, 0.03, lambda v: 0 < v <= 0.1, "persistence band half-width is 5*epsilon"),
    "d_cut": (int, 40, lambda v: v >= 2, "never-hit declaration distance on trees"),
    "time_cap": (float, 1e5, lambda v: v > 0, "time cap for tree walks"),
    "s_values": (_floats, (1.0, 2.0, 4.0), lambda v: len(v) > 0 and min(v) >= 0,
                 "comma-separated coalescing-walk durations"),
    "times": (_floats, (0.0, 0.5, 1.0, 2.0, 4.0, 8.0), lambda v: len(v) > 0 and min(v) >= 0,
              "comma-separated times for the mixing curve"),
    "cp": (float, -1.0, lambda v: v == -1.0 or v >= 0, "reaction constant; -1 = estimate it"),
    "cp_replicates": (int, 20000, lambda v: v >= 1, "triple runs per degree when estimating"),
    "ode_constant": (str, "c_p", lambda v: v in ("c_p", "drift_constant"),
                     "which estimated constant drives the ODE"),
    "gap_tolerance": (float, 0.1, lambda v: v > 0, "ode-limit pass threshold on sup gap"),
    "pass_fraction": (float, 0.9, lambda v: 0 <= v <= 1, "persistence pass fraction"),
    "max_events": (int, 10**9, lambda v: v >= 1, "event budget per run"),
    "graph_file": (str, "", None, "read the graph from this file instead of sampling"),
    "locality_radius": (int, 2, lambda v: v >= 0, "ball radius for the generate report"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "simulate"
    degree_law: str = "3:1.0"
    n: int = 1000
    lam: float = 100.0
    kind: str = "site"
    u0: float = 0.5
    horizon: float = 5.0
    grid_step: float = 0.1
    replicates: int = 10
    seed: int = 0
    epsilon: float = 0.03
    d_cut: int = 40
    time_cap: float = 1e5
    s_values: tuple = (1.0, 2.0, 4.0)
    times: tuple = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)
    cp: float = -1.0
    cp_replicates: int = 20000
    ode_constant: str = "c_p"
    gap_tolerance: float = 0.1
    pass_fraction: float = 0.9
    max_events: int = 10**9
    graph_file: str = ""
    locality_radius: int = 2

    @property
    def dist(self) -> DegreeDistribution:
        return DegreeDistribution.parse(self.degree_law)

    @property
    def grid(self) -> np.ndarray:
        k = int(math.floor(self.horizon / self.grid_step + 1e-9))
        return np.round(np.arange(k + 1) * self.grid_step, 12)

    def values(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return {k: d[k] for k in _FIELDS}

    def format(self) -> str:
        out = []
        for k, v in self.values().items():
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"{k} = {v}")
        return "\n".join(out) + "\n"


def _attr(key):
    return "lam" if key == "lambda" else key


def config_from_dict(values: dict) -> ExperimentConfig:
    parsed = {}
    for key, raw in values.items():
        if key not in _FIELDS:
            raise ConfigError(key, "unknown key")
        parse, _, check, _ = _FIELDS[key]
        try:
            v = parse(raw) if isinstance(raw, str) else raw
        except ValueError as e:
            raise ConfigError(key, f"cannot parse {raw!r}") from e
        if isinstance(v, float) and math.isnan(v):
            raise ConfigError(key, "NaN is not allowed")
        if check is not None and not check(v):
            raise ConfigError(key, f"value {raw!r} out of range ({_FIELDS[key][3]})")
        parsed[_attr(key)] = v
    cfg = ExperimentConfig(**parsed)
    try:
        dist = cfg.dist
    except ValueError as e:
        raise ConfigError("degree_law", str(e)) from e
    if not cfg.graph_file and cfg.n * dist.degrees.min() % 2 and np.all(dist.degrees % 2):
        raise ConfigError("n", "odd n with only odd degrees admits no graph")
    return cfg


def parse_config_text(text: str) -> ExperimentConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        if key in values:
            raise ConfigError(key, "given twice")
        values[key] = val
    return config_from_dict(values)


def parse_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


def defaults_help() -> str:
    rows = []
    for k, (_, default, _, text) in _FIELDS.items():
        if isinstance(default, tuple):
            default = ",".join(repr(x) for x in default)
        rows.append(f"  {k:<16} {default!s:<26} {text}")
    return "config keys (default, meaning):\n" + "\n".join(rows)


# ---------------------------------------------------------------- helpers

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return f"{float(v):.9g}"


def _write_csv(path, header, rows):
    lines = [header] + [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def build_graph(cfg: ExperimentConfig) -> Graph:
    if cfg.graph_file:
        return Graph.read(cfg.graph_file)
    return configuration_graph(cfg.dist, cfg.n, substream(cfg.seed, GRAPH_STREAM))


def _max_degree(cfg, graph):
    return graph.max_degree if cfg.graph_file else cfg.dist.max_degree


def _triple_task(k, dist, kind, d_cut, time_cap, reps, seed):
    return estimate_survival_triple(GWTreeModel(k, dist, kind), d_cut, time_cap, reps,
                                    substream(seed, CP_STREAM, k))


def _estimate_cp(cfg, replicates, workers) -> CpEstimate:
    dist = cfg.dist
    weights = size_biased(dist).probs if cfg.kind == "site" else dist.probs
    tasks = [(k, dist, cfg.kind, cfg.d_cut, cfg.time_cap, replicates, cfg.seed) for k in weights]
    ests = map_replicates(_triple_task, tasks, workers)
    return CpEstimate(cfg.kind, [(k, w, e) for (k, w), e in zip(weights.items(), ests)])


def _reaction_constant(cfg, workers, summary):
    if cfg.cp >= 0:
        summary["c_source"] = "config"
        return cfg.cp
    est = _estimate_cp(cfg, cfg.cp_replicates, workers)
    summary["c_p"] = est.c_p
    summary["c_p_se"] = est.se
    summary["drift_constant"] = est.drift_constant
    summary["drift_constant_se"] = est.drift_constant_se
    summary["c_source"] = cfg.ode_constant
    return est.c_p if cfg.ode_constant == "c_p" else est.drift_constant


# --------------------------------------------------------------- scenarios

def _sim_task(graph, cfg, r, grid, band=None, record_drift=False, warmup=0.0):
    rng = substream(cfg.seed, r)
    init = Configuration.with_density(graph, cfg.u0, rng, kind=cfg.kind)
    events = 0
    if warmup > 0:
        pre = simulate(graph, SimParams(lam=cfg.lam, kind=cfg.kind, horizon=warmup, grid=(0.0,),
                                        max_events=cfg.max_events), init, rng=rng)
        init, events = pre.final, pre.events
    tr = simulate(graph, SimParams(lam=cfg.lam, kind=cfg.kind, horizon=cfg.horizon - warmup,
                                   grid=tuple(grid - warmup), max_events=cfg.max_events,
                                   band=band, record_drift=record_drift), init, rng=rng)
    try:
        tr.final.check(graph)
        coherent = True
    except AssertionError:
        coherent = False
    return {"density": tr.density, "latent": tr.latent_frac, "flips": tr.flips,
            "wakes": tr.recoveries, "events": tr.events + events, "first_exit": tr.first_exit,
            "truncated": tr.truncated, "coherent": coherent, "drift": tr.drift}


def _scenario_generate(cfg, graph, out, workers, summary):
    graph.write(out / "graph.txt")
    _write_csv(out / "degrees.csv", "node,degree", enumerate(graph.degrees))
    M = _max_degree(cfg, graph)
    rng = substream(cfg.seed, 0)
    starts = rng.permutation(graph.n)[:min(graph.n, 200)]
    r = cfg.locality_radius
    reports = [ball(graph, int(x), r) for x in starts]
    _write_csv(out / "locality.csv", "start,radius,ball_size,collisions,is_tree",
               [(b.start, b.radius, b.ball_size, b.collisions, b.is_tree) for b in reports])
    cap = 1 + M * (M - 1) ** (r - 1) * r if r > 0 else 1
    try:
        graph.validate(min_degree=3, max_degree=M)
        valid = True
    except Exception:
        valid = False
    summary.update(n=graph.n, edges=graph.num_edges, max_degree=graph.max_degree,
                   connected=graph.is_connected(), triangles=triangle_count(graph),
                   tree_fraction=float(np.mean([b.is_tree for b in reports])))
    return {"simple_and_bounded": valid,
            "handshake": int(graph.degrees.sum()) == 2 * graph.num_edges,
            "ball_size_bound": all(b.ball_size <= cap for b in reports)}


def _scenario_simulate(cfg, graph, out, workers, summary):
    grid = cfg.grid
    res = map_replicates(_sim_task, [(graph, cfg, r, grid) for r in range(cfg.replicates)],
                         workers)
    for r, x in enumerate(res):
        _write_csv(out / f"trajectory_{r:03d}.csv", "t,density,latent_frac",
                   zip(grid, x["density"], x["latent"]))
    dens = np.array([x["density"] for x in res])
    lat = np.array([x["latent"] for x in res])
    _write_csv(out / "mean_trajectory.csv", "t,mean_density,mean_latent_frac",
               zip(grid, dens.mean(0), lat.mean(0)))
    write_batch_summary(out / "batch_summary.txt", replicates=cfg.replicates, seed=cfg.seed,
                        flips=sum(x["flips"] for x in res), wakes=sum(x["wakes"] for x in res),
                        events=sum(x["events"] for x in res))
    summary.update(final_mean_density=float(dens[:, -1].mean()),
                   events=sum(x["events"] for x in res))
    return {"cache_coherent": all(x["coherent"] for x in res),
            "density_in_unit_interval": bool(np.all((dens >= 0) & (dens <= 1))),
            "not_truncated": not any(x["truncated"] for x in res)}


def _scenario_ode_limit(cfg, graph, out, workers, summary):
    grid = cfg.grid
    c = _reaction_constant(cfg, workers, summary)
    ode = solve_ode(c, cfg.u0, grid).values
    res = map_replicates(_sim_task, [(graph, cfg, r, grid) for r in range(cfg.replicates)],
                         workers)
    dens = np.array([x["density"] for x in res])
    mean = dens.mean(0)
    _write_csv(out / "ode_limit.csv", "t,mean_density,ode_u,abs_gap",
               zip(grid, mean, ode, np.abs(mean - ode)))
    sups = np.abs(dens - ode).max(axis=1)
    _write_csv(out / "sup_gaps.csv", "replicate,sup_gap", enumerate(sups))
    summary.update(c=c, median_sup_gap=float(np.median(sups)),
                   max_abs_gap_of_mean=float(np.abs(mean - ode).max()))
    return {"median_sup_gap_within_tolerance": float(np.median(sups)) <= cfg.gap_tolerance,
            "not_truncated": not any(x["truncated"] for x in res)}


def _scenario_persistence(cfg, graph, out, workers, summary):
    grid = cfg.grid
    eps = cfg.epsilon
    band = (0.5 - 5 * eps, 0.5 + 5 * eps)
    if abs(cfg.u0 - 0.5) <= eps:
        t0 = 0.0
    else:
        t0 = band_entry_time(_reaction_constant(cfg, workers, summary), cfg.u0, eps)
        if not t0 < cfg.horizon:
            raise ConfigError("horizon", f"ODE enters the band only at t={t0:.4g}")
    sub = grid[grid >= t0]
    res = map_replicates(_sim_task, [(graph, cfg, r, sub, band, False, t0)
                                     for r in range(cfg.replicates)], workers)
    rows = []
    for r, x in enumerate(res):
        fe = None if x["first_exit"] is None else x["first_exit"] + t0
        rows.append((r, fe, fe is None and not x["truncated"], x["events"], x["truncated"]))
    _write_csv(out / "persistence.csv", "replicate,first_exit,inside,events,truncated", rows)
    dens = np.array([x["density"] for x in res])
    _write_csv(out / "band_curve.csv", "t,mean_density,min_density,max_density",
               zip(sub, dens.mean(0), dens.min(0), dens.max(0)))
    inside = sum(1 for row in rows if row[2])
    exits = [row[1] for row in rows if row[1] is not None]
    summary.update(t0=t0, band=list(band), inside=inside, replicates=cfg.replicates,
                   exits=len(exits), median_first_exit=float(np.median(exits)) if exits else None)
    return {"inside_fraction": inside >= cfg.pass_fraction * cfg.replicates,
            "not_truncated": not any(x["truncated"] for x in res)}


def _crw_task(graph, kind, s_values, seed, r):
    rng = substream(seed, r)
    return [crw_all_sites(graph, kind, s, rng) for s in s_values]


def _scenario_crw_stats(cfg, graph, out, workers, summary):
    res = map_replicates(_crw_task, [(graph, cfg.kind, cfg.s_values, cfg.seed, r)
                                     for r in range(cfg.replicates)], workers)
    M = _max_degree(cfg, graph)
    n = graph.n
    rows, rep_rows, flags, checks = [], [], {}, []
    for i, s in enumerate(cfg.s_values):
        st = [rep[i] for rep in res]
        m1 = np.array([x.mean_minus1 for x in st])
        f2 = np.array([x.fact2 for x in st])
        nmax = max(x.n_max for x in st)
        rows.append((s, m1.mean(), f2.mean(), nmax, n))
        for r, x in enumerate(st):
            rep_rows.append((r, s, x.mean_minus1, x.fact2, x.n_max))
        se1 = m1.std(ddof=1) / math.sqrt(len(m1)) if len(m1) > 1 else 0.0
        se2 = f2.std(ddof=1) / math.sqrt(len(f2)) if len(f2) > 1 else 0.0
        b1 = 4 * M * math.e * s
        checks.append({"s": s, "mean_minus1": m1.mean(), "mean_se": se1, "bound_mean": b1,
                       "fact2": f2.mean(), "fact2_se": se2, "bound_fact2": 3 * b1**2,
                       "n_max": nmax})
        if cfg.kind == "edge" and s >= 1 / (2 * M):
            flags[f"mean_bound_s{s:g}"] = m1.mean() - 3 * se1 <= b1
            flags[f"fact2_bound_s{s:g}"] = f2.mean() - 3 * se2 <= 3 * b1**2
            if s <= math.log(n) ** 2:
                flags[f"nmax_below_sqrt_n_s{s:g}"] = nmax <= math.sqrt(n)
    _write_csv(out / "cluster_stats.csv", "s,mean_size_minus1,fact2,Nmax,n", rows)
    _write_csv(out / "cluster_replicates.csv", "replicate,s,mean_size_minus1,fact2,Nmax",
               rep_rows)
    summary.update(max_degree=M, checks=checks, bounds_registered=cfg.kind == "edge")
    return flags


def _scenario_estimate_cp(cfg, graph, out, workers, summary):
    est = _estimate_cp(cfg, cfg.replicates, workers)
    est.write(out / "cp.txt")
    _write_csv(out / "classes.csv", "k,x|y|z,x|yz,xy|z,xz|y,xyz,timed_out",
               [(k, *e.counts, e.timed_out) for k, _, e in est.rows])
    summary.update(c_p=est.c_p, c_p_se=est.se, drift_constant=est.drift_constant,
                   drift_constant_se=est.drift_constant_se, d_cut=cfg.d_cut,
                   never_hit_bias_bound=3 * 2.0 ** (-cfg.d_cut))
    return {"timed_out_below_1pct": all(e.timed_out <= 0.01 * e.replicates
                                        for _, _, e in est.rows),
            "c_p_in_unit_interval": 0 < est.c_p < 1}


def _duality_task(graph, cfg, r):
    rng = substream(cfg.seed, r)
    record = sample_graphical(graph, cfg.kind, cfg.lam, cfg.horizon, rng)
    ops = np.where(rng.random(graph.n) < cfg.u0, 1, 2)
    voter = math.isinf(cfg.lam)
    latent = None if voter else rng.random(graph.n) < 0.25
    init = Configuration.from_opinions(graph, ops, cfg.kind, latent)
    fwd = evolve_forward(record, graph, init).opinions
    mismatches = 0
    ancestors = []
    for x in range(graph.n):
        if voter:
            d = run_branching_dual(record, graph, x)
            ancestors.append(next(iter(d.influence)))
            val = d.evaluate(init)
        else:
            val = compute_state_via_dual(record, graph, init, x)
        mismatches += int(val != fwd[x])
    identity = True
    if voter:
        # density as sum over clusters of (cluster size) * (opinion of its ancestor)
        anc, sizes = np.unique(ancestors, return_counts=True)
        by_clusters = float(np.sum(sizes * (ops[anc] == 1))) / graph.n
        identity = by_clusters == float(np.mean(fwd == 1))
    return (r, graph.n, mismatches, record.num_events, identity)


def _scenario_duality_check(cfg, graph, out, workers, summary):
    rows = map_replicates(_duality_task, [(graph, cfg, r) for r in range(cfg.replicates)],
                          workers)
    _write_csv(out / "duality.csv", "record,nodes,mismatches,events,cluster_identity", rows)
    summary.update(records=len(rows), total_mismatches=sum(r[2] for r in rows),
                   voter=math.isinf(cfg.lam))
    flags = {"all_match": all(r[2] == 0 for r in rows)}
    if math.isinf(cfg.lam):
        flags["cluster_sum_identity"] = all(r[4] for r in rows)
    return flags


def _scenario_mixing_report(cfg, graph, out, workers, summary):
    times = cfg.times if graph.n <= DENSE_LIMIT else ()
    rep = mixing_report(graph, cfg.kind, times)
    rep.write_csv(out / "mixing.csv")
    (out / "mixing_summary.csv").write_text(rep.summary_line(), newline="\n")
    summary.update(gap=rep.gap, h=rep.h, pi_min=rep.pi_min, n=rep.n,
                   mixing_time=rep.mixing_time() if len(times) else None,
                   decay_rate=rep.decay_rate() if len(times) else None)
    flags = {"gap_positive": rep.gap > 0}
    if len(times):
        flags["delta_non_increasing"] = rep.delta_monotone
        flags["delta_below_spectral_bound"] = rep.delta_bounded
    if graph.n <= CUT_LIMIT:
        flags["cheeger_sandwich"] = rep.sandwich_holds
    return flags


def _scenario_drift_gap(cfg, graph, out, workers, summary):
    grid = cfg.grid
    c = _reaction_constant(cfg, workers, summary)
    res = map_replicates(_sim_task, [(graph, cfg, r, grid, None, True)
                                     for r in range(cfg.replicates)], workers)
    rows, integrals, fractions = [], [], []
    for r, x in enumerate(res):
        u = x["density"]
        b = c * u * (1 - u) * (1 - 2 * u)
        diff = np.abs(x["drift"] - b)
        rows += [(r, t, ui, bi, bb, di) for t, ui, bi, bb, di in zip(grid, u, x["drift"], b, diff)]
        integrals.append(float(trapezoid(diff, grid)) if len(grid) > 1 else 0.0)
        fractions.append(float(np.mean(diff >= cfg.epsilon)))
    _write_csv(out / "drift_gap.csv", "replicate,t,density,beta,b,abs_diff", rows)
    summary.update(c=c, mean_integrated_gap=float(np.mean(integrals)),
                   mean_fraction_above_epsilon=float(np.mean(fractions)))
    return {"values_finite": all(np.all(np.isfinite(x["drift"])) for x in res)}


_RUNNERS = {
    "generate": _scenario_generate,
    "simulate": _scenario_simulate,
    "ode-limit": _scenario_ode_limit,
    "persistence": _scenario_persistence,
    "crw-stats": _scenario_crw_stats,
    "estimate-cp": _scenario_estimate_cp,
    "duality-check": _scenario_duality_check,
    "mixing-report": _scenario_mixing_report,
    "drift-gap": _scenario_drift_gap,
}

_NEEDS_GRAPH = set(SCENARIOS) - {"estimate-cp"}


@dataclass
class RunManifest:
    config: dict
    replicate_seeds: list
    outputs: list
    wall_clock: float
    version: str
    flags: dict
    all_pass: bool


def run_scenario(cfg: ExperimentConfig, out_dir, workers: int = 1) -> RunManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    graph = build_graph(cfg) if cfg.scenario in _NEEDS_GRAPH else None
    summary = {"scenario": cfg.scenario}
    flags = {k: bool(v) for k, v in _RUNNERS[cfg.scenario](cfg, graph, out, workers,
                                                          summary).items()}
    all_pass = all(flags.values())
    summary["flags"] = flags
    summary["all_pass"] = all_pass
    (out / "summary.json").write_text(
        json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n", newline="\n")
    (out / "config.resolved").write_text(cfg.format(), newline="\n")
    outputs = sorted(p.name for p in out.iterdir() if p.name != "manifest.json")
    manifest = RunManifest(cfg.values(), [[cfg.seed, r] for r in range(cfg.replicates)],
                           outputs + ["manifest.json"], time.perf_counter() - start,
                           __version__, flags, all_pass)
    (out / "manifest.json").write_text(
        json.dumps(_jsonable(asdict(manifest)), indent=2, sort_keys=True) + "\n", newline="\n")
    return manifest
