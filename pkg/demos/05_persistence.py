"""How long the density stays near 1/2, as a function of lambda/n.

Near 1/2 the density behaves like an Ornstein-Uhlenbeck process: the cubic
drift pulls it back at rate c/2 while voter noise of size lambda/n pushes it
around.  Small lambda/n keeps it inside the band for long stretches.

Run: python3 demos/05_persistence.py   (a few minutes)
"""

from lvlab.dynamics import Configuration, SimParams, simulate
from lvlab.graph import DegreeDistribution, configuration_graph
from lvlab.rng import substream

eps = 0.03
band = (0.5 - 5 * eps, 0.5 + 5 * eps)
for n, lam in ((2000, 100.0), (5000, 20.0), (20000, 10.0)):
    g = configuration_graph(DegreeDistribution.regular(3), n, substream(n))
    exits = []
    for r in range(5):
        rng = substream(7, r)
        init = Configuration.with_density(g, 0.5, rng, kind="edge")
        tr = simulate(g, SimParams(lam=lam, kind="edge", horizon=20.0, grid=(0.0,), band=band),
                      init, rng=rng)
        exits.append(tr.first_exit)
    inside = sum(e is None for e in exits)
    print(f"n={n}, lambda={lam} (lambda/n={lam / n:.4f}): {inside}/5 inside up to t=20, "
          f"exits at {[round(e, 2) for e in exits if e is not None]}")
