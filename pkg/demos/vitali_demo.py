"""Greedy disjoint selection on a small interval family, and the ratio bound."""
from __future__ import annotations

from fractions import Fraction as F

from badapprox import Ball, greedy_disjoint_subfamily, lemma1_ratio_1d, verify_enlarged_cover

family = [Ball(0, 2), Ball(3, 1), Ball(5, 1), Ball(F(11, 2), F(1, 2))]
res = greedy_disjoint_subfamily(family)
print("picked:", res.picked_indices)
print("3x enlargement covers the family:", verify_enlarged_cover(family, res, 3))
print("1x enlargement covers the family:", verify_enlarged_cover(family, res, 1))

for delta in (F(1, 10), F(1, 2), F(9, 10)):
    b = lemma1_ratio_1d(family, delta)
    print(f"delta={delta}: |union of shrunk| / |union| = {b.exact_ratio} >= {delta}")
