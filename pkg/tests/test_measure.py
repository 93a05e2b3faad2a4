import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from badapprox.geometry import Ball, ball_contains_point, interval_union_from_balls, scale_ball
from badapprox.measure import (
    CHUNK,
    _covered,
    hoeffding_half_width,
    coverage_fraction_1d_exact,
    lemma1_constant,
    local_density_experiment,
    mc_fraction_in_ball,
    mc_union_measure,
    survivor_fraction,
    survivor_sweep,
)
from badapprox.systems import BNMParams, classical_system, explicit_system, z2_example_system

UNIT = [(0, 1)]
Y = F(7071067811865475, 10**16)


def grid_oracle_1d(M, qmax, res):
    """Survivors of the classical d=1 system on the grid k/res, integers only:
    k/res is in B(p/q, 1/(M q^2)) iff M q |k q - p res| <= res."""
    k = np.arange(res, dtype=np.int64)
    covered = np.zeros(res, dtype=bool)
    for q in range(1, qmax + 1):
        p = (2 * k * q + res) // (2 * res)  # nearest numerator
        for pp in (p - 1, p, p + 1):
            covered |= M * q * np.abs(k * q - pp * res) <= res
    return int((~covered).sum())


# ---------------------------------------------------------------- constants


def test_half_width_and_constant():
    assert hoeffding_half_width(10**6) == pytest.approx(math.sqrt(math.log(200) / 2e6))
    assert lemma1_constant(F(1, 2), 1) == F(1, 2)
    assert lemma1_constant(F(1, 2), 2) == F(1, 36)


# ---------------------------------------------------------------- Monte Carlo


def test_mc_circle():
    est = mc_union_measure([Ball((0, 0), 1)], [(-1, 1), (-1, 1)], 10**6, seed=1)
    assert abs(est.value - math.pi) <= est.ci_half_width
    assert est.ci_half_width == pytest.approx(4 * hoeffding_half_width(10**6))
    assert est.reference_volume == 4 and est.samples == 10**6


def test_mc_1d_examples():
    balls = [Ball(0, 1), Ball(4, 1)]
    est = mc_union_measure(balls, [(-1, 5)], 10**5, seed=2)
    assert abs(est.value - 4) <= est.ci_half_width
    r = F(3, 7)
    est = mc_union_measure([Ball(F(1, 3), r)], [(F(1, 3) - r, F(1, 3) + r)], 5000, seed=3)
    assert est.value == pytest.approx(float(2 * r))
    assert est.hits == 5000


def test_mc_errors():
    with pytest.raises(ValueError):
        mc_union_measure([Ball(0, 2)], [(-1, 1)], 10**4, seed=0)
    with pytest.raises(ValueError):
        mc_union_measure([Ball(0, 1)], [(-1, 1)], 10, seed=0)
    with pytest.raises(ValueError):
        mc_union_measure([Ball((0, 0), 1)], [(-1, 1)], 10**4, seed=0)


def test_mc_reproducible_and_thread_independent():
    balls = [Ball((F(1, 3), F(1, 2)), F(1, 4)), Ball((F(2, 3), F(1, 2)), F(1, 5))]
    box = [(0, 1), (0, 1)]
    n = 3 * CHUNK + 17
    a = mc_union_measure(balls, box, n, seed=42)
    b = mc_union_measure(balls, box, n, seed=42)
    c = mc_union_measure(balls, box, n, seed=42, threads=4)
    assert a == b == c
    assert mc_union_measure(balls, box, n, seed=43) != a


def test_mc_exact_membership_at_boundary():
    # a ball whose boundary passes through sample-grid points: exact fallback decides them
    box = [(F(0), F(1))]
    u = np.array([[0], [1 << 63], [(1 << 62)], [(1 << 62) - 1]], dtype=np.uint64)
    inside = _covered(u, box, [Ball(F(1, 2), F(1, 4))])
    assert inside.tolist() == [False, True, True, False]
    inside = _covered(u, box, [Ball((F(1, 2)), F(1, 4)), Ball(F(1, 10**6), F(1, 10**7))])
    assert inside.tolist() == [False, True, True, False]


def test_mc_matches_exact_oracle_1d():
    rng = random.Random(12)
    good = 0
    for t in range(40):
        balls = [Ball(F(rng.randint(10, 90), 100), F(rng.randint(1, 10), 100)) for _ in range(rng.randint(1, 6))]
        exact = interval_union_from_balls(balls).measure
        est = mc_union_measure(balls, [(0, 1)], 20000, seed=t)
        good += abs(est.value - float(exact)) <= est.ci_half_width
    assert good >= 39


def test_mc_fraction_in_ball():
    fam = [Ball(F(1, 2), F(1, 4))]
    c, = mc_fraction_in_ball([fam], F(1, 2), F(1, 2), 20000, seed=5)
    assert abs(c.value - 0.5) <= c.ci_half_width
    full, empty = mc_fraction_in_ball([[Ball(F(1, 2), 1)], []], F(1, 2), F(1, 2), 5000, seed=5)
    assert full.value == 1 and empty.value == 0


# ---------------------------------------------------------------- exact coverage


def test_coverage_examples():
    s = classical_system(1, UNIT)
    assert coverage_fraction_1d_exact(s, 1, 1, s.last_index(1), UNIT[0]) == 1
    c10 = coverage_fraction_1d_exact(s, F(1, 10), 1, s.last_index(10), UNIT[0])
    c100 = coverage_fraction_1d_exact(s, F(1, 10), 1, s.last_index(100), UNIT[0])
    assert 0 < c10 < c100 < 1
    far = explicit_system([Ball(10, 1)])
    assert coverage_fraction_1d_exact(far, 1, 1, 1, (0, 1)) == 0
    with pytest.raises(ValueError):
        coverage_fraction_1d_exact(s, 1, 1, 5, (1, 1))
    with pytest.raises(ValueError):
        coverage_fraction_1d_exact(z2_example_system(), 1, 1, 5, (0, 1))


def test_coverage_small_case_by_hand():
    # kappa 1/2: the q = 1 balls B(0, 1/2) and B(1, 1/2) already cover [0, 1]
    s = classical_system(1, UNIT)
    assert coverage_fraction_1d_exact(s, F(1, 2), 1, s.last_index(2), (0, 1)) == 1
    # kappa 1/4: [0,1/4] U [7/16,9/16] U [3/4,1]
    assert coverage_fraction_1d_exact(s, F(1, 4), 1, s.last_index(2), (0, 1)) == F(5, 8)


def test_coverage_monotone():
    s = classical_system(1, UNIT)
    bounds = [s.last_index(q) for q in (3, 8, 20)]
    for kappa in (F(1, 20), F(1, 5), F(1, 2)):
        vals = [coverage_fraction_1d_exact(s, kappa, 1, b, (0, 1)) for b in bounds]
        assert vals == sorted(vals)
    vals = [coverage_fraction_1d_exact(s, k, 1, bounds[1], (0, 1)) for k in (F(1, 20), F(1, 5), F(1, 2))]
    assert vals == sorted(vals)


# ---------------------------------------------------------------- survivors


def test_survivor_examples():
    s = classical_system(1, UNIT)
    rep = survivor_fraction(s, BNMParams(1, 1), s.last_index(1), 1000, UNIT)
    assert rep.surviving_fraction == 0
    r10 = survivor_fraction(s, BNMParams(1, 3), s.last_index(10), 1000, UNIT)
    r100 = survivor_fraction(s, BNMParams(1, 3), s.last_index(100), 1000, UNIT)
    assert r100.surviving_fraction < r10.surviving_fraction
    z = survivor_fraction(z2_example_system(), BNMParams(1, 10), 10**4, 50, [(F(1, 4), F(3, 4))] * 2)
    assert z.surviving_fraction == 1
    with pytest.raises(ValueError):
        survivor_fraction(s, BNMParams(1, 3), 10, 1000, [(1, 0)])


@pytest.mark.parametrize("M,qmax,res", [(3, 10, 1000), (3, 30, 997), (2, 25, 4096), (5, 40, 1000)])
def test_survivors_match_integer_oracle(M, qmax, res):
    s = classical_system(1, UNIT)
    rep = survivor_fraction(s, BNMParams(1, M), s.last_index(qmax), res, UNIT)
    assert rep.survivors == grid_oracle_1d(M, qmax, res)


def test_survivor_2d_against_brute_force():
    s = classical_system(2, [(0, 1), (0, 1)])
    params = BNMParams(1, 2)
    bound = s.last_index(6)
    rep = survivor_fraction(s, params, bound, 40, [(0, 1), (0, 1)])
    balls = [b for _, b in s.balls(1, bound)]
    shrunk = [scale_ball(b, params.kappa) for b in balls]
    survivors = 0
    for i in range(40):
        for j in range(40):
            p = (F(i, 40), F(j, 40))
            survivors += not any(ball_contains_point(b, p) for b in shrunk)
    assert rep.survivors == survivors


def test_survivor_monotonicity():
    s = classical_system(1, UNIT)
    bounds = [s.last_index(q) for q in (5, 10, 20, 40)]
    for M in (2, 3, 6):
        reps = survivor_sweep(s, BNMParams(1, M), bounds, 2000, UNIT)
        vals = [r.surviving_fraction for r in reps]
        assert vals == sorted(vals, reverse=True)
    by_M = [survivor_fraction(s, BNMParams(1, M), bounds[2], 2000, UNIT).surviving_fraction for M in (1, 2, 4, 8)]
    assert by_M == sorted(by_M)
    # later start index N means fewer balls and more survivors
    n1 = survivor_fraction(s, BNMParams(1, 3), bounds[2], 2000, UNIT).surviving_fraction
    n5 = survivor_fraction(s, BNMParams(5, 3), bounds[2], 2000, UNIT).surviving_fraction
    assert n5 >= n1


def test_survivor_sweep_matches_independent_runs():
    s = classical_system(1, UNIT)
    bounds = [s.last_index(q) for q in (4, 9)]
    sweep = survivor_sweep(s, BNMParams(2, 3), bounds, 500, UNIT)
    single = [survivor_fraction(s, BNMParams(2, 3), b, 500, UNIT) for b in bounds]
    assert sweep == single


# ---------------------------------------------------------------- density


def test_density_exact_inequality():
    s = classical_system(1, UNIT)
    first, last = s.index_range(20, 200)
    for M in (1, 2, 3, 5):
        rep = local_density_experiment(s, BNMParams(1, M), Y, F(1, 8), first, last)
        assert rep.contained > 0
        assert rep.exact_holds
        assert rep.coverage_scaled >= F(1, M) * rep.coverage
        assert rep.density_bound == 1 - rep.coverage_scaled
        if M == 1:
            assert rep.coverage_scaled == rep.coverage


def test_density_mc_small():
    s = classical_system(1, UNIT)
    first, last = s.index_range(20, 60)
    rep = local_density_experiment(s, BNMParams(1, 2), Y, F(1, 8), first, last, samples=20000, seed=7)
    c, cm = rep.mc
    assert abs(c.fraction - float(rep.coverage)) <= 3 * c.ci_half_width
    assert abs(cm.fraction - float(rep.coverage_scaled)) <= 3 * cm.ci_half_width
    assert rep.mc_holds()
    assert rep.to_json()["mc_holds"] is True


def test_density_errors():
    s = classical_system(1, UNIT)
    with pytest.raises(ValueError):
        local_density_experiment(s, BNMParams(3, 2), Y, F(1, 8), 1, 100)
    with pytest.raises(ValueError):
        local_density_experiment(s, BNMParams(1, 2), Y, 0, 1, 100)
    with pytest.raises(ValueError):
        local_density_experiment(s, BNMParams(1, 2), (Y, Y), F(1, 8), 1, 100)
