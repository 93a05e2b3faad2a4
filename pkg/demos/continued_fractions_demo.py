"""Continued fractions, Dirichlet witnesses and bounded-partial evidence."""
from __future__ import annotations

from fractions import Fraction as F

from badapprox import bad_report, cf_expand, convergents, dirichlet_search, surd

sqrt2 = surd(0, 1, 2)
golden = surd(1, 1, 5, 2)

cf = cf_expand(sqrt2, 6)
print("sqrt 2:", cf.terms, cf.status, "period", cf.period)
print("convergents:", [str(c.value) for c in convergents(cf)])
print("355/113:", cf_expand(F(355, 113), 10).terms)

for Q in (3, 10, 50):
    p, q = dirichlet_search([sqrt2], Q)
    print(f"Q={Q}: q={q}, p={p}")

rep = bad_report(golden, 1000)
print("golden ratio, 1000 partials:", rep.verdict, "max partial", rep.max_partial)
