import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from lvlab.dynamics import (Configuration, NodeState, SimParams, drift_perturbation,
                            evolve_forward, flip_rate, generator_drift, sample_graphical,
                            simulate, simulate_voter, voter_batch)
from lvlab.rng import substream

from conftest import connected_graph, random_graph


def test_rate_table(k4):
    c = Configuration.from_opinions(k4, [1, 2, 2, 1])
    # node 0 (opinion 1) sees two opinion-2 neighbours
    assert flip_rate(c, k4, 0, "site") == pytest.approx(2 / 3)
    assert flip_rate(c, k4, 0, "edge") == 2
    lat = Configuration.from_opinions(k4, [1, 2, 2, 1], latent=[1, 0, 0, 0])
    assert flip_rate(lat, k4, 0, "site") == 0
    assert lat.latent_count == 1 and lat.opinion1_count == 2


def test_state_codes():
    assert NodeState.LATENT1.opinion == 1 and NodeState.LATENT1.latent
    assert NodeState.ACTIVE2.opinion == 2 and not NodeState.ACTIVE2.latent


def test_simparams_validation():
    with pytest.raises(ValueError):
        SimParams(lam=-1)
    with pytest.raises(ValueError):
        SimParams(lam=1, kind="vertex")
    with pytest.raises(ValueError):
        SimParams(lam=1, horizon=1, grid=(0, 2))
    assert SimParams(lam=1, horizon=2.5).grid == (0.0, 1.0, 2.0)


@pytest.mark.parametrize("kind", ["site", "edge"])
def test_consensus_is_absorbing(kind):
    g = random_graph(40, 1)
    for op in (1, 2):
        init = Configuration.constant(g, op, kind)
        tr = simulate(g, SimParams(lam=5, kind=kind, horizon=3), init, rng=substream(0))
        assert tr.events == 0 and np.all(tr.density == (1.0 if op == 1 else 0.0))
        rec = sample_graphical(g, kind, 5.0, 3.0, seed=1)
        assert np.array_equal(evolve_forward(rec, g, init).states, init.states)


@given(st.integers(0, 10**6), st.sampled_from(["site", "edge"]), st.floats(0.5, 50))
def test_simulation_deterministic_and_cache_coherent(seed, kind, lam):
    g = random_graph(30, seed % 97)
    init = Configuration.with_density(g, 0.4, substream(seed, 1), kind)
    p = SimParams(lam=lam, kind=kind, horizon=2.0, grid=(0, 0.5, 1, 2), seed=seed)
    a = simulate(g, p, init)
    b = simulate(g, p, init)
    assert np.array_equal(a.density, b.density) and np.array_equal(a.final.states, b.final.states)
    a.final.check(g)
    assert np.all((a.density >= 0) & (a.density <= 1))


def test_single_voter_step_changes_one_node(k4):
    init = Configuration.from_opinions(k4, [1, 1, 1, 2], kind="edge")
    tr = simulate_voter(k4, "edge", 1e-12, init, seed=3)
    assert tr.final.latent_count == 0


def test_opinion_swap_symmetry():
    # coupled runs: the simulator draws the same uniforms, so swapping opinions mirrors U
    g = random_graph(50, 2)
    init = Configuration.with_density(g, 0.3, substream(1))
    p = SimParams(lam=3, horizon=2, grid=(0, 0.5, 1, 1.5, 2))
    a = simulate(g, p, init, rng=substream(7))
    b = simulate(g, p, init.swapped(g), rng=substream(7))
    assert np.allclose(a.density, 1 - b.density)


def test_edge_voter_conserves_density():
    g = connected_graph(20, 4)
    init = Configuration.from_opinions(g, [1] + [2] * 19, kind="edge")
    _, dens = voter_batch(g, "edge", 2.0, 10**4, substream(5), init=init, grid=[0.5, 1, 2])
    R = dens.shape[0]
    for j in range(3):
        assert abs(dens[:, j].mean() - 0.05) < 3 * dens[:, j].std() / math.sqrt(R) + 1e-12


def test_generator_drift_examples(k4):
    p = SimParams(lam=10, kind="edge")
    one = Configuration.from_opinions(k4, [2, 1, 1, 1], kind="edge")
    assert generator_drift(one, k4, p) == 0
    assert generator_drift(Configuration.constant(k4, 1, "edge"), k4, p) == 0


@given(st.integers(0, 10**6))
def test_edge_voter_drift_vanishes(seed):
    g = random_graph(24, seed % 50)
    c = Configuration.bernoulli(g, 0.5, substream(seed), "edge")
    assert generator_drift(c, g, SimParams(lam=7, kind="edge")) == 0


def test_drift_perturbation_examples(k4):
    c = Configuration.from_opinions(k4, [1, 2, 2, 2])
    assert drift_perturbation(c, k4) == pytest.approx(1.5)
    assert drift_perturbation(Configuration.constant(k4, 1), k4) == 0


def test_drift_perturbation_brute_force(k4):
    c = Configuration.from_opinions(k4, [1, 2, 2, 2])
    op = c.opinions
    total = 0
    for x in range(4):
        for y in k4.neighbors(x):
            for z in k4.neighbors(x):
                if y == z:
                    continue
                total += (op[x] == 2 and (op[y] == 1 or op[z] == 1))
                total -= (op[x] == 1 and (op[y] == 2 or op[z] == 2))
    assert drift_perturbation(c, k4) == pytest.approx(total / 4)


@given(st.integers(0, 10**6), st.sampled_from(["literal", "site", "edge"]))
def test_drift_perturbation_antisymmetric(seed, variant):
    g = random_graph(30, seed % 40, "3:0.5,4:0.5")
    c = Configuration.bernoulli(g, 0.4, substream(seed))
    assert drift_perturbation(c.swapped(g), g, variant) == pytest.approx(
        -drift_perturbation(c, g, variant), abs=1e-12)


def test_graphical_record_examples(k4):
    init = Configuration.from_opinions(k4, [1, 2, 1, 2])
    empty = sample_graphical(k4, "site", 4.0, 0.0, seed=0)
    assert empty.num_events == 0
    assert np.array_equal(evolve_forward(empty, k4, init).states, init.states)
    single = type(empty)("site", 4.0, 1.0, np.array([0.5]), np.array([1]), np.array([0]),
                         np.zeros(0), np.zeros(0, dtype=np.int64))
    out = evolve_forward(single, k4, Configuration.from_opinions(k4, [1, 2, 2, 2]))
    assert out.states[0] == NodeState.LATENT2


@pytest.mark.parametrize("kind", ["site", "edge"])
def test_forward_record_matches_simulator_in_law(kind):
    g = random_graph(12, 8)
    init = Configuration.from_opinions(g, [1] * 6 + [2] * 6, kind)
    lam, T = 2.0, 1.0
    a = [evolve_forward(sample_graphical(g, kind, lam, T, seed=substream(1, r)), g, init).density
         for r in range(2000)]
    b = [simulate(g, SimParams(lam=lam, kind=kind, horizon=T / lam, grid=(0,)), init,
                  rng=substream(2, r)).final.density for r in range(2000)]
    assert stats.ks_2samp(a, b).pvalue > 0.01
