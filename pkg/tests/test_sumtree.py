import numpy as np
from hypothesis import given, strategies as st

from lvlab import sumtree


@given(st.lists(st.floats(0, 10), min_size=1, max_size=70),
       st.lists(st.tuples(st.integers(0, 69), st.floats(0, 10)), max_size=50))
def test_total_matches_sum_after_updates(rates, updates):
    tree = sumtree.build(rates)
    rates = list(rates)
    for i, r in updates:
        i %= len(rates)
        sumtree.update(tree, i, r)
        rates[i] = r
    assert abs(sumtree.total(tree) - sum(rates)) <= 1e-9 * max(1.0, sum(rates))


@given(st.lists(st.floats(0, 5), min_size=1, max_size=40), st.floats(0, 1, exclude_max=True))
def test_select_hits_positive_leaf(rates, frac):
    if sum(rates) == 0:
        return
    tree = sumtree.build(rates)
    i = sumtree.select(tree, frac * sumtree.total(tree))
    assert 0 <= i < len(rates) and rates[i] > 0
    prefix = np.cumsum([0.0] + list(rates))
    target = frac * sumtree.total(tree)
    assert prefix[i] <= target + 1e-9


def test_selection_frequencies():
    rates = np.array([1.0, 0.0, 3.0, 6.0])
    tree = sumtree.build(rates)
    rng = np.random.default_rng(0)
    hits = np.bincount([sumtree.select(tree, rng.random() * 10) for _ in range(20000)],
                       minlength=4) / 20000
    assert hits[1] == 0
    assert np.allclose(hits, rates / 10, atol=0.015)
