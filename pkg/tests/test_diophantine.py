import random
from decimal import Decimal, localcontext
from fractions import Fraction as F
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from badapprox.diophantine import (
    Approximation,
    QuadraticSurd,
    bad_report,
    bad_witness_search,
    cf_expand,
    classical_bad_bridge,
    convergents,
    dirichlet_search,
    enclosure,
    format_real,
    parse_real,
    surd,
)
from badapprox.errors import PrecisionError
from badapprox.exact import sign_quad

PREC = 120


@pytest.fixture(autouse=True, scope="module")
def decimal_precision():
    # keep the oracle precision local to this module
    with localcontext() as ctx:
        ctx.prec = PREC
        yield

SQRT2 = surd(0, 1, 2)
GOLDEN = surd(1, 1, 5, 2)
GOLDEN_CONJ = surd(-1, 1, 5, 2)


def dec(x):
    """High-precision decimal value of a rational or surd (test oracle)."""
    if isinstance(x, F):
        return Decimal(x.numerator) / Decimal(x.denominator)
    return (Decimal(x.a) + Decimal(x.b) * Decimal(x.n).sqrt()) / Decimal(x.c)


def e_approx(digits=60):
    e = Decimal(1).exp()
    scale = 10 ** digits
    value = F(int(e * scale), scale)
    return Approximation(value, F(1, scale))


# ---------------------------------------------------------------- inputs


def test_surd_canonical():
    assert surd(0, 1, 8) == QuadraticSurd(0, 2, 2, 1)
    assert surd(2, 4, 3, -2) == QuadraticSurd(-1, -2, 3, 1)
    assert surd(3, 1, 4) == F(5)
    assert surd(1, 0, 7, 3) == F(1, 3)
    with pytest.raises(ZeroDivisionError):
        surd(1, 1, 2, 0)


def test_parse_and_format():
    assert parse_real("3/4") == F(3, 4)
    assert parse_real("surd(1,1,5,2)") == GOLDEN
    a = parse_real("approx(3.14159,1/100000)")
    assert a == Approximation(F(314159, 100000), F(1, 100000))
    for x in [F(-7, 3), GOLDEN, a]:
        assert parse_real(format_real(x)) == x
    with pytest.raises(ValueError):
        parse_real("pi")
    with pytest.raises(ValueError):
        parse_real("approx(1,0)")


@given(st.integers(-50, 50), st.integers(-50, 50).filter(bool), st.integers(2, 60), st.integers(1, 30), st.integers(8, 200))
def test_enclosure_contains_value(a, b, n, c, bits):
    x = surd(a, b, n, c)
    lo, hi = enclosure(x, bits)
    v = dec(x)
    assert dec(lo) <= v <= dec(hi)
    if isinstance(x, QuadraticSurd):
        assert hi - lo <= F(abs(x.b), x.c) / 2 ** bits


# ---------------------------------------------------------------- continued fractions


def test_cf_examples():
    cf = cf_expand(SQRT2, 5)
    assert cf.terms == (1, 2, 2, 2, 2, 2) and cf.status == "periodic" and cf.period == (2,)
    cf = cf_expand(F(355, 113), 10)
    assert cf.terms == (3, 7, 16) and cf.status == "terminated"
    cf = cf_expand(GOLDEN, 50)
    assert cf.a0 == 1 and set(cf.partials) == {1} and len(cf.partials) == 50
    with pytest.raises(ValueError):
        cf_expand(SQRT2, 0)


def test_convergent_examples():
    assert [c.value for c in convergents(cf_expand(SQRT2, 3))] == [1, F(3, 2), F(7, 5), F(17, 12)]
    assert [c.value for c in convergents(cf_expand(F(355, 113), 10))] == [3, F(22, 7), F(355, 113)]
    assert [c.value for c in convergents(cf_expand(F(5), 3))] == [5]


def test_cf_surd_against_decimal_oracle():
    rng = random.Random(11)
    for _ in range(60):
        x = surd(rng.randint(-30, 30), rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(2, 40), rng.randint(1, 12))
        if not isinstance(x, QuadraticSurd):
            continue
        terms = cf_expand(x, 25).terms
        v = dec(x)
        expected = []
        for _ in range(26):
            a = int(v.to_integral_value(rounding="ROUND_FLOOR"))
            expected.append(a)
            v = 1 / (v - a)
        assert terms == tuple(expected)


def test_cf_periodic_status_reached():
    for n in range(2, 200):
        x = surd(0, 1, n)
        if isinstance(x, QuadraticSurd):
            cf = cf_expand(x, 1)
            assert cf.status == "periodic" and cf.period[-1] == 2 * cf.a0


def test_rational_round_trip_1000():
    rng = random.Random(1)
    for _ in range(1000):
        x = F(rng.randint(-10**9, 10**9), rng.randint(1, 10**9))
        cf = cf_expand(x, 200)
        assert cf.status == "terminated"
        last = convergents(cf)[-1]
        assert last.value == x and gcd(last.p, last.q) == 1


@settings(max_examples=80)
@given(st.integers(-40, 40), st.integers(1, 9), st.integers(2, 60), st.integers(1, 20))
def test_convergent_quality_exact(a, b, n, c):
    x = surd(a, b, n, c)
    if not isinstance(x, QuadraticSurd):
        return
    conv = convergents(cf_expand(x, 30))
    A, B, m = x.quad
    for k in range(len(conv) - 1):
        p, q, q1 = conv[k].p, conv[k].q, conv[k + 1].q
        # |x - p/q| < 1/(q q1), exact via squared comparison in Q(sqrt(m))
        diff = (A - F(p, q), B)
        bound = F(1, q * q1)
        assert sign_quad(diff[0] - bound, diff[1], m) < 0
        assert sign_quad(diff[0] + bound, diff[1], m) > 0


def test_convergents_recurrence_and_gcd():
    cf = cf_expand(surd(3, 2, 7, 5), 40)
    conv = convergents(cf)
    for k in range(2, len(conv)):
        a = cf.terms[k]
        assert conv[k].p == a * conv[k - 1].p + conv[k - 2].p
        assert conv[k].q == a * conv[k - 1].q + conv[k - 2].q
        assert gcd(conv[k].p, conv[k].q) == 1


def test_cf_approx_e_prefix():
    cf = cf_expand(e_approx(), 12)
    assert cf.terms == (2, 1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8, 1)
    assert cf.status == "truncated"


def test_cf_approx_precision_error_carries_prefix():
    coarse = Approximation(F(314159, 100000), F(1, 100000))
    with pytest.raises(PrecisionError) as info:
        cf_expand(coarse, 30)
    prefix = info.value.prefix
    assert prefix.terms == (3, 7)
    # the certified prefix agrees with the true expansion of every point in the interval
    for v in (coarse.value - coarse.error, coarse.value + coarse.error):
        assert cf_expand(v, len(prefix.partials)).terms[: len(prefix.terms)] == prefix.terms


# ---------------------------------------------------------------- Dirichlet


def test_dirichlet_examples():
    assert dirichlet_search([SQRT2], 3) == ((3,), 2)
    assert dirichlet_search([F(1, 3)], 10) == ((1,), 3)
    assert dirichlet_search([SQRT2, surd(0, 1, 3)], 2) == ((1, 2), 1)
    with pytest.raises(ValueError):
        dirichlet_search([SQRT2], 1)


def reverify(alpha, p, q, Q):
    return all(abs(q * dec(a) - pi) <= Decimal(1) / Q for a, pi in zip(alpha, p))


def test_dirichlet_witness_reverifies_and_is_first():
    rng = random.Random(4)
    for _ in range(40):
        alpha = [surd(rng.randint(0, 5), 1, rng.choice([2, 3, 5, 6, 7]), rng.randint(2, 9)) for _ in range(2)]
        Q = rng.randint(2, 12)
        p, q = dirichlet_search(alpha, Q)
        assert q < Q ** 2 and reverify(alpha, p, q, Q)
        # no smaller q works (first-witness determinism)
        for r in range(1, q):
            best = [int((r * dec(a)).to_integral_value()) for a in alpha]
            assert not reverify(alpha, best, r, Q)


def test_dirichlet_approximation_input():
    p, q = dirichlet_search([e_approx()], 40)
    assert q < 40 and reverify([F(27182818284590452353602874713527, 10**31)], p, q, 40)
    with pytest.raises(PrecisionError):
        dirichlet_search([Approximation(F(1, 3), F(1, 10))], 3)


# ---------------------------------------------------------------- Bad evidence


def test_bad_report_examples():
    r = bad_report(GOLDEN, 100)
    assert (r.verdict, r.max_partial) == ("bounded-evidence", 1)
    r = bad_report(SQRT2, 100)
    assert (r.verdict, r.max_partial) == ("bounded-evidence", 2)
    r = bad_report(e_approx(), 12)
    assert r.verdict == "inconclusive-truncated" and r.max_partial == 8
    assert r.cf.terms[:12] == (2, 1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8)
    assert bad_report(F(355, 113), 10).verdict == "rational"
    assert bad_report(GOLDEN, 1000).max_partial == 1


def test_bad_report_periodic_max_counts_preperiod():
    # sqrt(7) = [2; 1,1,1,4]: the period contains the maximum
    assert bad_report(surd(0, 1, 7), 3).max_partial == 4
    # pre-period term larger than the period: 1/(10 + sqrt2) style
    x = surd(-10, 1, 2, 1)  # sqrt2 - 10 = [-9; 1, 1, 2, 2, ...]
    r = bad_report(x, 50)
    assert r.max_partial == max(cf_expand(x, 50).partials)


def test_bad_report_monotone_in_depth():
    e = e_approx()
    maxima = [bad_report(e, k).max_partial for k in range(1, 25)]
    assert maxima == sorted(maxima)


# ---------------------------------------------------------------- bridge


def test_bridge_examples():
    r = classical_bad_bridge([GOLDEN_CONJ], F(1, 5), 10**4)
    assert r.cube_survives and r.ball_survives and r.implication_holds
    r = classical_bad_bridge([F(1, 2)], F(1, 1000), 10)
    assert r.rational and not r.ball_survives and not r.cube_survives
    assert r.to_json()["in_bad_d"] == "no (rational)"
    with pytest.raises(ValueError):
        classical_bad_bridge([F(1, 2)], 0, 10)


def test_bridge_matches_direct_scan():
    """Oracle: q * |q alpha - p| > kappa for every q up to the bound."""
    kappa = F(1, 5)
    alpha = dec(GOLDEN_CONJ)
    ok = all(q * abs(q * alpha - round(q * alpha)) > Decimal(1) / 5 for q in range(1, 142))
    assert ok
    r = classical_bad_bridge([GOLDEN_CONJ], kappa, 10**4)
    assert r.cube_survives == ok


def test_bridge_implication_100_random():
    rng = random.Random(8)
    for k in range(100):
        if k % 2:
            alpha = [F(rng.randint(0, 97), 97), F(rng.randint(0, 89), 89)]
        else:
            alpha = [surd(rng.randint(0, 4), 1, rng.choice([2, 3, 5, 7]), rng.randint(3, 9)) for _ in range(2)]
            alpha = [a - int(a) if isinstance(a, F) else a for a in alpha]
        kappa = F(rng.randint(1, 10), 10)
        r = classical_bad_bridge(alpha, kappa, 150, window=[(-1, 2), (-1, 2)])
        assert r.implication_holds
        if r.ball_survives:
            assert r.cube_survives


def test_bridge_1d_cube_equals_ball():
    for alpha in [surd(-1, 1, 2), F(3, 7), GOLDEN_CONJ]:
        r = classical_bad_bridge([alpha], F(1, 3), 500)
        assert r.first_cube_hit == r.first_ball_hit


def test_bad_witness_search():
    w = bad_witness_search([GOLDEN_CONJ], 10**4)
    assert w.kappa == F(1, 4) and w.start_index == 1 and w.verified_up_to == 10**4
    assert bad_witness_search([F(1, 2)], 100) is None
    w = bad_witness_search([GOLDEN_CONJ], 10**3, kappas=[F(1, 5), F(2, 5)])
    assert w.kappa == F(1, 5)
