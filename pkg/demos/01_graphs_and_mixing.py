"""Random cubic graphs: local tree structure and how fast a single walk mixes.

Run: python3 demos/01_graphs_and_mixing.py
"""


import numpy as np

from lvlab.graph import DegreeDistribution, ball, configuration_graph
from lvlab.mixing import conductance_exact, mixing_report, spectral_gap
from lvlab.rng import substream

dist = DegreeDistribution.parse("3:0.5,4:0.5")

# Big graph: almost every small ball is a tree.
g = configuration_graph(dist, 20000, substream(1))
starts = substream(2).permutation(g.n)[:200]
for r in (1, 2, 3, 4):
    trees = np.mean([ball(g, int(x), r).is_tree for x in starts])
    print(f"radius {r}: {trees:.1%} of balls are trees")

# Medium graph: spectral gap and the decay of the distance to stationarity.
g = configuration_graph(dist, 300, substream(3))
for kind in ("site", "edge"):
    rep = mixing_report(g, kind, np.linspace(0, 120, 61))
    print(f"{kind}: gap {rep.gap:.4f}, fitted decay {rep.decay_rate():.4f}, "
          f"Delta <= 1/n from t = {rep.mixing_time()}")

# Small graphs: the conductance sandwich h^2/2 <= gap <= 2h.
for i in range(5):
    g = configuration_graph(dist, 16, substream(10, i))
    if not g.is_connected():
        continue
    h, b = conductance_exact(g, "site"), spectral_gap(g, "site")
    print(f"n=16 sample {i}: h^2/2={h * h / 2:.4f} <= gap={b:.4f} <= 2h={2 * h:.4f}")
