"""Density of the latent voter model against the cubic ODE.

The voter part of the dynamics moves the density by O(sqrt(lambda/n)) per
unit of rescaled time, so the ODE shows only when lambda/n is small.  The run
below keeps lambda/n = 0.002 and compares the mean curve with the ODE driven
by the literal constant c_p and by the drift constant.

Run: python3 demos/04_density_vs_ode.py   (a few minutes)
"""

import numpy as np

from lvlab.dynamics import Configuration, SimParams, simulate
from lvlab.graph import DegreeDistribution, configuration_graph
from lvlab.reaction import estimate_cp, solve_ode
from lvlab.rng import substream

dist = DegreeDistribution.regular(3)
n, lam, u0 = 50000, 100.0, 0.2
g = configuration_graph(dist, n, substream(1))
grid = np.linspace(0, 5, 11)

for kind in ("edge", "site"):
    est = estimate_cp(dist, kind, replicates=20000, seed=2)
    curves = []
    for r in range(3):
        rng = substream(3, r)
        init = Configuration.with_density(g, u0, rng, kind=kind)
        curves.append(simulate(g, SimParams(lam=lam, kind=kind, horizon=5.0, grid=grid), init,
                               rng=rng).density)
    mean = np.mean(curves, axis=0)
    lit = solve_ode(est.c_p, u0, grid).values
    drift = solve_ode(est.drift_constant, u0, grid).values
    print(f"{kind}: c_p={est.c_p:.3f}, drift constant={est.drift_constant:.3f}")
    print("   t   mean   ode(c_p)  ode(drift)")
    for t, m, a, b in zip(grid, mean, lit, drift):
        print(f"{t:4.1f} {m:.4f}   {a:.4f}    {b:.4f}")
