"""Tail survival and hit counts for the classical and Z^2 ball systems."""
from __future__ import annotations

from fractions import Fraction as F

from badapprox import (
    Ball,
    BadWitness,
    bad_witness_search,
    classical_bad_bridge,
    hit_count,
    shrinking_locally_report,
    surd,
    tail_survives,
    z2_example_system,
)

z = z2_example_system()
half = (F(1, 2), F(1, 2))
print("(1/2,1/2) survives kappa=1/10:", tail_survives(z, half, BadWitness(F(1, 10), 1, 10**4)))
print("hits at kappa=1 up to index 10^4:", hit_count(z, half, 10**4, 1))
print("shrinking-locally probe:", shrinking_locally_report(z, Ball((0, 0), 1), 1, 10**4).verdict)

alpha = [surd(-1, 1, 5, 2)]
print("witness for the golden conjugate:", bad_witness_search(alpha, 10**4))
r = classical_bad_bridge(alpha, F(1, 5), 10**4)
print("cube survives:", r.cube_survives, "ball survives:", r.ball_survives)
