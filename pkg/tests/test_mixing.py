import math

import numpy as np
import pytest
from scipy.linalg import expm

from lvlab.graph import DisconnectedGraph, Graph, stationary_distribution
from lvlab.mixing import (SizeLimitExceeded, conductance_exact, cut_ratio,
                          mixing_report, rate_matrix, spectral_gap, tv_distance_curve)

from conftest import connected_graph, random_graph


def test_k4_exact_values(k4):
    assert spectral_gap(k4, "edge") == pytest.approx(4, abs=1e-12)
    assert conductance_exact(k4, "edge") == pytest.approx(2, abs=1e-12)
    assert cut_ratio(k4, "edge", [0]) == pytest.approx(3)
    d = tv_distance_curve(k4, "edge", [0.0, 0.5, 1.0])
    assert d[0] == pytest.approx(3)
    assert d[2] == pytest.approx(3 * math.exp(-4), abs=1e-12)
    assert d[2] == pytest.approx(0.054947, abs=1e-6)


def test_disconnected_rejected():
    two = Graph.from_edges(8, [(a, b) for a in range(4) for b in range(a + 1, 4)]
                           + [(a, b) for a in range(4, 8) for b in range(a + 1, 8)])
    with pytest.raises(DisconnectedGraph):
        spectral_gap(two, "site")


def test_size_limits():
    big = random_graph(22, 1)
    with pytest.raises(SizeLimitExceeded):
        conductance_exact(big, "site")
    with pytest.raises(SizeLimitExceeded):
        tv_distance_curve(random_graph(502, 1), "site", [1.0])


@pytest.mark.parametrize("kind", ["site", "edge"])
def test_transients_match_matrix_exponential(kind):
    g = connected_graph(40, 3, "3:0.5,4:0.5")
    Q = rate_matrix(g, kind)
    pi = stationary_distribution(g, kind)
    times = [0.0, 0.3, 2.0, 7.0]
    ours = tv_distance_curve(g, kind, times)
    ref = [np.abs(expm(Q * t) / pi[None, :] - 1).max() for t in times]
    assert np.allclose(ours, ref, rtol=1e-9, atol=1e-11)


@pytest.mark.parametrize("kind", ["site", "edge"])
def test_gap_matches_dense_and_power_iteration(kind):
    g = connected_graph(60, 4)
    ev = np.sort(np.linalg.eigvals(rate_matrix(g, kind)).real)
    assert spectral_gap(g, kind) == pytest.approx(-ev[-2], rel=1e-9)
    big = connected_graph(600, 5)
    from lvlab import mixing
    dense = mixing.DENSE_LIMIT
    try:
        mixing.DENSE_LIMIT = 10**4
        exact = spectral_gap(big, kind)
    finally:
        mixing.DENSE_LIMIT = dense
    assert spectral_gap(big, kind) == pytest.approx(exact, rel=1e-5)


@pytest.mark.parametrize("kind", ["site", "edge"])
def test_curve_properties(kind):
    g = connected_graph(50, 6, "3:0.5,4:0.5")
    rep = mixing_report(g, kind, np.linspace(0, 80, 41))
    assert rep.delta_monotone and rep.delta_bounded
    assert rep.delta[0] == pytest.approx(1 / rep.pi_min - 1)
    assert rep.mixing_time() is not None


def test_cubic_n200_gap():
    g = connected_graph(200, 7)
    assert spectral_gap(g, "edge") > 0.1
    # the site walk is the edge walk slowed down by the degree
    assert spectral_gap(g, "site") == pytest.approx(spectral_gap(g, "edge") / 3)


def test_decay_rate_matches_gap():
    g = connected_graph(200, 8)
    rep = mixing_report(g, "edge", np.linspace(20, 80, 13))
    assert rep.decay_rate() == pytest.approx(rep.gap, rel=0.05)


def test_report_output(tmp_path, k4):
    rep = mixing_report(k4, "edge", [0.0, 1.0])
    assert rep.h == pytest.approx(2) and rep.sandwich_holds
    rep.write_csv(tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "t,delta"
    assert rep.summary_line().splitlines() == ["gap,h,pi_min,n,kind", "4,2,0.25,4,edge"]
