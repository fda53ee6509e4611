"""Coalescing walks on a lazily grown Galton-Watson tree.

The root has ``root_degree`` children.  Every other vertex gets its degree
from ``vertex_law`` when it is first created, so it has ``degree - 1``
children.  Vertices are only materialised when a walker steps onto them.

Each walker keeps its ancestor stack (``path[w, d]`` is its ancestor at depth
``d``), which answers "is target ``p`` below vertex ``v``" in O(1).  Pairwise
distances are therefore maintained incrementally: a step towards another
walker shortens the distance by one, any other step lengthens it by one.

Outcome codes returned by the kernels:

* pair runs:   0 hit, 1 escaped (distance ``d_cut`` or left the ball), 2 timed out
* triple runs: 0 ``x|y|z``, 1 ``x|yz``, 2 ``xy|z``, 3 ``xz|y``, 4 ``xyz``, 5 timed out
"""

import numpy as np
from numba import njit

PAIR_HIT, PAIR_EXITED, PAIR_TIMED_OUT = 0, 1, 2
TRIPLE_CLASSES = ("x|y|z", "x|yz", "xy|z", "xz|y", "xyz")
TRIPLE_TIMED_OUT = 5


@njit(cache=True)
def _new_node(parent, depth, deg, child, cnt, par, law_deg, law_cdf, rng):
    v = cnt
    parent[v] = par
    depth[v] = depth[par] + 1
    if law_deg.shape[0] == 1:
        deg[v] = law_deg[0]
    else:
        u = rng.random()
        j = 0
        while j < law_deg.shape[0] - 1 and u >= law_cdf[j]:
            j += 1
        deg[v] = law_deg[j]
    for i in range(child.shape[1]):
        child[v, i] = -1
    return v


@njit(cache=True)
def _child(v, slot, parent, depth, deg, child, cnt, law_deg, law_cdf, rng):
    """Return (child node, new count); creates the child on first use."""
    w = child[v, slot]
    if w < 0:
        w = _new_node(parent, depth, deg, child, cnt, v, law_deg, law_cdf, rng)
        child[v, slot] = w
        cnt += 1
    return w, cnt


@njit(cache=True)
def _below(p_path, p_depth, v, v_depth):
    """True when the vertex with ancestor stack ``p_path`` lies in the subtree of ``v``."""
    return p_depth >= v_depth and p_path[v_depth] == v


@njit(cache=True)
def _step(w, pos, path, parent, depth, deg, child, cnt, law_deg, law_cdf, rng):
    """Move walker ``w`` to a uniform neighbour. Returns (old, new, to_parent, cnt)."""
    v = pos[w]
    i = rng.integers(0, deg[v])
    if depth[v] == 0:
        nxt, cnt = _child(v, i, parent, depth, deg, child, cnt, law_deg, law_cdf, rng)
        up = False
    elif i == 0:
        nxt = parent[v]
        up = True
    else:
        nxt, cnt = _child(v, i - 1, parent, depth, deg, child, cnt, law_deg, law_cdf, rng)
        up = False
    pos[w] = nxt
    if not up:
        path[w, depth[nxt]] = nxt
    return v, nxt, up, cnt


@njit(cache=True)
def _toward(v, nxt, up, p_path, p_depth, depth):
    if up:
        return not _below(p_path, p_depth, v, depth[v])
    return _below(p_path, p_depth, nxt, depth[nxt])


@njit(cache=True)
def pair_runs(root_degree, law_deg, law_cdf, edge, d0, radius, d_cut, time_cap,
              capacity, replicates, rng):
    """Two coalescing walkers started at the root and at depth ``d0`` below it."""
    M = max(root_degree, law_deg.max())
    maxrate = float(M) if edge else 1.0
    parent = np.zeros(capacity, dtype=np.int64)
    depth = np.zeros(capacity, dtype=np.int64)
    deg = np.zeros(capacity, dtype=np.int64)
    child = np.full((capacity, M), -1, dtype=np.int64)
    path = np.zeros((4, capacity), dtype=np.int64)   # walkers 0,1 then fixed starts 2,3
    pos = np.zeros(4, dtype=np.int64)
    outcome = np.zeros(replicates, dtype=np.int64)
    elapsed = np.zeros(replicates)
    half = d0 / 2.0
    for r in range(replicates):
        cnt = 1
        parent[0] = -1
        depth[0] = 0
        deg[0] = root_degree
        for i in range(M):
            child[0, i] = -1
        path[0, 0] = 0
        pos[0] = 0
        v = 0
        path[1, 0] = 0
        for k in range(d0):
            v, cnt = _child(v, 0, parent, depth, deg, child, cnt, law_deg, law_cdf, rng)
            path[1, k + 1] = v
        pos[1] = v
        path[2, 0] = 0
        for k in range(d0 + 1):
            path[3, k] = path[1, k]
        pos[2] = 0
        pos[3] = v
        dist = d0
        # distances of each walker to the two starting vertices
        da0, db0 = 0, d0
        da1, db1 = d0, 0
        t = 0.0
        if half > radius:
            outcome[r] = PAIR_EXITED
            elapsed[r] = 0.0
            continue
        res = -1
        while True:
            t += rng.exponential(1.0) / (2.0 * maxrate)
            if t > time_cap or cnt + 2 > capacity:
                res = PAIR_TIMED_OUT
                break
            w = rng.integers(0, 2)
            if edge and rng.random() * maxrate >= deg[pos[w]]:
                continue
            o = 1 - w
            old, nxt, up, cnt = _step(w, pos, path, parent, depth, deg, child, cnt,
                                      law_deg, law_cdf, rng)
            if _toward(old, nxt, up, path[o], depth[pos[o]], depth):
                dist -= 1
            else:
                dist += 1
            step_a = -1 if _toward(old, nxt, up, path[2], depth[pos[2]], depth) else 1
            step_b = -1 if _toward(old, nxt, up, path[3], depth[pos[3]], depth) else 1
            if w == 0:
                da0 += step_a
                db0 += step_b
                far = max(da0, db0) - half
            else:
                da1 += step_a
                db1 += step_b
                far = max(da1, db1) - half
            if dist == 0:
                res = PAIR_HIT
                break
            if far > radius or dist >= d_cut:
                res = PAIR_EXITED
                break
        outcome[r] = res
        elapsed[r] = t
    return outcome, elapsed


@njit(cache=True)
def triple_runs(root_degree, law_deg, law_cdf, edge, d_cut, time_cap, capacity,
                replicates, rng):
    """Walkers at the root and two distinct uniformly chosen children of the root."""
    M = max(root_degree, law_deg.max())
    maxrate = float(M) if edge else 1.0
    parent = np.zeros(capacity, dtype=np.int64)
    depth = np.zeros(capacity, dtype=np.int64)
    deg = np.zeros(capacity, dtype=np.int64)
    child = np.full((capacity, M), -1, dtype=np.int64)
    path = np.zeros((3, capacity), dtype=np.int64)
    pos = np.zeros(3, dtype=np.int64)
    dist = np.zeros((3, 3), dtype=np.int64)
    label = np.zeros(3, dtype=np.int64)
    alive = np.zeros(3, dtype=np.bool_)
    outcome = np.zeros(replicates, dtype=np.int64)
    elapsed = np.zeros(replicates)
    for r in range(replicates):
        cnt = 1
        parent[0] = -1
        depth[0] = 0
        deg[0] = root_degree
        for i in range(M):
            child[0, i] = -1
        c1 = rng.integers(0, root_degree)
        c2 = rng.integers(0, root_degree - 1)
        if c2 >= c1:
            c2 += 1
        v1, cnt = _child(0, c1, parent, depth, deg, child, cnt, law_deg, law_cdf, rng)
        v2, cnt = _child(0, c2, parent, depth, deg, child, cnt, law_deg, law_cdf, rng)
        pos[0], pos[1], pos[2] = 0, v1, v2
        for w in range(3):
            path[w, 0] = 0
            label[w] = w
            alive[w] = True
        path[1, 1] = v1
        path[2, 1] = v2
        dist[0, 1] = dist[1, 0] = 1
        dist[0, 2] = dist[2, 0] = 1
        dist[1, 2] = dist[2, 1] = 2
        nalive = 3
        t = 0.0
        res = -1
        while True:
            if nalive == 1:
                res = 4
                break
            done = True
            for i in range(3):
                for j in range(i + 1, 3):
                    if alive[i] and alive[j] and dist[i, j] < d_cut:
                        done = False
            if done:
                break
            t += rng.exponential(1.0) / (nalive * maxrate)
            if t > time_cap or cnt + 2 > capacity:
                res = TRIPLE_TIMED_OUT
                break
            k = rng.integers(0, nalive)
            w = 0
            seen = -1
            for i in range(3):
                if alive[i]:
                    seen += 1
                    if seen == k:
                        w = i
                        break
            if edge and rng.random() * maxrate >= deg[pos[w]]:
                continue
            old, nxt, up, cnt = _step(w, pos, path, parent, depth, deg, child, cnt,
                                      law_deg, law_cdf, rng)
            for o in range(3):
                if o == w or not alive[o]:
                    continue
                if _toward(old, nxt, up, path[o], depth[pos[o]], depth):
                    dist[w, o] -= 1
                else:
                    dist[w, o] += 1
                dist[o, w] = dist[w, o]
            for o in range(3):
                if o != w and alive[o] and dist[w, o] == 0:
                    alive[o] = False
                    nalive -= 1
                    lo = label[o]
                    for i in range(3):
                        if label[i] == lo:
                            label[i] = label[w]
        if res < 0:
            if label[0] != label[1] and label[0] != label[2] and label[1] != label[2]:
                res = 0
            elif label[1] == label[2] and label[0] != label[1]:
                res = 1
            elif label[0] == label[1] and label[0] != label[2]:
                res = 2
            elif label[0] == label[2] and label[0] != label[1]:
                res = 3
            else:
                res = 4
        outcome[r] = res
        elapsed[r] = t
    return outcome, elapsed


def offspring_law(dist):
    """Arrays (degrees, cdf) of the size-biased vertex-degree law of a GW tree."""
    from .graph import size_biased

    q = size_biased(dist)
    degs = q.degrees
    cdf = np.cumsum(q.weights)
    cdf[-1] = 1.0
    return degs.astype(np.int64), cdf
