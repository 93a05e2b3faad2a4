"""Exact coverage, grid survivors and Monte Carlo measure."""
from __future__ import annotations

import math
from fractions import Fraction as F

from badapprox import (
    Ball,
    BNMParams,
    classical_system,
    coverage_fraction_1d_exact,
    local_density_experiment,
    mc_union_measure,
    survivor_sweep,
)

s = classical_system(1, [(0, 1)])
for q in (10, 100):
    c = coverage_fraction_1d_exact(s, F(1, 10), 1, s.last_index(q), (0, 1))
    print(f"kappa=1/10, q<={q}: covered fraction {float(c):.4f}")

reps = survivor_sweep(s, BNMParams(1, 3), [s.last_index(q) for q in (10, 30, 100)], 10**4, [(0, 1)])
print("survivor fractions:", [float(r.surviving_fraction) for r in reps])

first, last = s.index_range(20, 200)
rep = local_density_experiment(s, BNMParams(1, 3), F(7, 10), F(1, 8), first, last)
print(f"local density: c={float(rep.coverage):.4f}, c_M={float(rep.coverage_scaled):.4f}")

est = mc_union_measure([Ball((0, 0), 1)], [(-1, 1), (-1, 1)], 10**6, seed=0)
print(f"unit disc: {est.value:.4f} +/- {est.ci_half_width:.4f} (pi = {math.pi:.4f})")
