"""The cubic reaction constant from triple walks on Galton-Watson trees.

Three coalescing walks start at the root and two of its neighbours; the
constant mixes, over the root degree, the chance that none of them ever meet.
Weights are size-biased for the site kind and plain for the edge kind.  The
density drift also carries a per-degree pair-count factor, reported as
``drift_constant``.

Run: python3 demos/03_reaction_constant.py
"""

from lvlab.graph import DegreeDistribution, configuration_graph
from lvlab.reaction import estimate_cp, triple_meeting_exact
from lvlab.rng import substream

for law in ("3:1.0", "3:0.5,4:0.5"):
    dist = DegreeDistribution.parse(law)
    for kind in ("site", "edge"):
        est = estimate_cp(dist, kind, replicates=20000, seed=1)
        print(f"{law} {kind}: c_p = {est.c_p:.4f} +- {est.se:.4f}, "
              f"drift constant = {est.drift_constant:.4f}")
        print(est.format())

# On a finite graph the same classes have exact time-t probabilities.
g = configuration_graph(DegreeDistribution.regular(3), 12, substream(5))
y, z = g.neighbors(0)[:2]
for t in (0.5, 2.0, 8.0):
    probs = triple_meeting_exact(g, "site", 0, int(y), int(z), t)
    print(t, {k: round(v, 4) for k, v in probs.items()})
