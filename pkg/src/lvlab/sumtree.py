"""Indexed partial-sum tree for O(log n) rate-proportional event selection.

The tree lives in a flat float64 array of length ``2 * size`` (``size`` a power
of two): leaves at ``size + i``, node ``j`` holds ``tree[2j] + tree[2j+1]`` and
the root ``tree[1]`` is the total rate.  Parents are recomputed from their
children on every update rather than adjusted by a difference, so the stored
sums never accumulate drift.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def tree_size(n):
    size = 1
    while size < n:
        size *= 2
    return size


def build(rates):
    rates = np.asarray(rates, dtype=np.float64)
    size = tree_size(max(len(rates), 1))
    tree = np.zeros(2 * size)
    tree[size:size + len(rates)] = rates
    _rebuild(tree, size)
    return tree


@njit(cache=True)
def _rebuild(tree, size):
    for j in range(size - 1, 0, -1):
        tree[j] = tree[2 * j] + tree[2 * j + 1]


@njit(cache=True)
def update(tree, i, rate):
    size = tree.shape[0] // 2
    j = size + i
    tree[j] = rate
    j //= 2
    while j >= 1:
        tree[j] = tree[2 * j] + tree[2 * j + 1]
        j //= 2


@njit(cache=True)
def select(tree, target):
    """Leaf index ``i`` with ``prefix(i) <= target < prefix(i + 1)``."""
    size = tree.shape[0] // 2
    j = 1
    while j < size:
        left = tree[2 * j]
        if target < left:
            j = 2 * j
        else:
            target -= left
            j = 2 * j + 1
    # guard against landing on a zero-rate leaf through rounding at the right edge
    while tree[j] == 0.0 and j > size:
        j -= 1
    return j - size


@njit(cache=True)
def total(tree):
    return tree[1]
