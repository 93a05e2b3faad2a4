"""Vitali greedy selection and the two Lemma 1 lower bounds.

For a finite family of balls and ``0 < delta <= 1`` the measure of the union
of the ``delta``-scaled balls is at least ``K(delta, d)`` times the measure of
the original union.  In one dimension ``K = delta`` and the ratio is computed
exactly from interval unions; in any dimension the greedy disjoint subfamily
certifies ``K = (delta/3)**d``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvariantViolation
from .exact import Radical, as_fraction, compare_radii, format_rational
from .geometry import (
    Ball,
    ball_in_enlargement,
    balls_intersect,
    interval_union_from_balls,
    scale_ball,
)

__all__ = [
    "VitaliResult",
    "Lemma1Bound",
    "greedy_disjoint_subfamily",
    "verify_enlarged_cover",
    "lemma1_ratio_1d",
    "lemma1_certificate",
]


@dataclass(frozen=True)
class VitaliResult:
    picked_indices: tuple
    disjoint_verified: bool
    cover_verified: bool


@dataclass(frozen=True)
class Lemma1Bound:
    delta: Fraction
    dimension: int
    certified_lower_bound: Fraction
    exact_ratio: Fraction | None = None
    # certificate path only: sum of (delta r_j)^d and (3 r_j)^d over picked balls
    scaled_sum: Fraction | None = None
    enlarged_sum: Fraction | None = None
    picked_indices: tuple = ()

    @property
    def holds(self) -> bool:
        if self.exact_ratio is not None:
            return self.exact_ratio >= self.certified_lower_bound
        return self.certified_lower_bound >= (self.delta / 3) ** self.dimension

    def to_json(self) -> dict:
        return {
            "delta": format_rational(self.delta),
            "dim": self.dimension,
            "exact_ratio": None if self.exact_ratio is None else format_rational(self.exact_ratio),
            "certified_lower_bound": format_rational(self.certified_lower_bound),
        }


def _check_family(balls: Sequence[Ball]) -> int:
    if not balls:
        raise ValueError("ball family must be nonempty")
    d = balls[0].dim
    if any(b.dim != d for b in balls):
        raise ValueError("ball family has mixed dimensions")
    return d


def _check_delta(delta) -> Fraction:
    delta = as_fraction(delta)
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    return delta


def _greedy_order(balls: Sequence[Ball]) -> list[int]:
    radii = [b.radius for b in balls]
    if any(isinstance(r, Radical) for r in radii):
        def cmp(i, j):
            c = compare_radii(radii[j], radii[i])
            return c if c else (i > j) - (i < j)

        return sorted(range(len(balls)), key=functools.cmp_to_key(cmp))
    return sorted(range(len(balls)), key=lambda i: (-radii[i], i))


def _integerize(balls: Sequence[Ball]):
    """Scale a rational family by the common denominator: ``(centers, radii)``
    as Python ints, or None if some radius is irrational."""
    if any(isinstance(b.radius, Radical) for b in balls):
        return None
    den = 1
    for b in balls:
        for v in b.center + (b.radius,):
            den = den * v.denominator // math.gcd(den, v.denominator)
    centers = [tuple(int(v * den) for v in b.center) for b in balls]
    radii = [int(b.radius * den) for b in balls]
    return centers, radii


def _d2(a, b) -> int:
    return sum((x - y) * (x - y) for x, y in zip(a, b))


def greedy_disjoint_subfamily(balls: Sequence[Ball]) -> VitaliResult:
    """Pick balls by decreasing radius (ties: lower index first), skipping any
    ball that meets an already picked one."""
    balls = list(balls)
    _check_family(balls)
    ints = _integerize(balls)
    picked: list[int] = []
    if ints is None:
        for i in _greedy_order(balls):
            if not any(balls_intersect(balls[i], balls[j]) for j in picked):
                picked.append(i)
        meets = lambda i, j: balls_intersect(balls[i], balls[j])  # noqa: E731
    else:
        cs, rs = ints

        def meets(i, j):
            s = rs[i] + rs[j]
            return _d2(cs[i], cs[j]) <= s * s

        for i in sorted(range(len(balls)), key=lambda i: (-rs[i], i)):
            if not any(meets(i, j) for j in picked):
                picked.append(i)
    disjoint = all(
        not meets(picked[a], picked[b]) for a in range(len(picked)) for b in range(a + 1, len(picked))
    )
    result = VitaliResult(tuple(picked), disjoint, False)
    return VitaliResult(tuple(picked), disjoint, verify_enlarged_cover(balls, result, 3))


def verify_enlarged_cover(balls: Sequence[Ball], result: VitaliResult, factor) -> bool:
    """Every ball must sit inside ``factor``-times some picked ball at least as large."""
    balls = list(balls)
    factor = as_fraction(factor)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    for j in result.picked_indices:
        if not 0 <= j < len(balls):
            raise ValueError(f"picked index {j} out of range")
    ints = _integerize(balls)
    if ints is None:
        picked = [balls[j] for j in result.picked_indices]
        return all(
            any(
                compare_radii(p.radius, b.radius) >= 0
                and ball_in_enlargement(b, p.center, scale_ball(p, factor).radius)
                for p in picked
            )
            for b in balls
        )
    cs, rs = ints
    fa, fb = factor.numerator, factor.denominator

    def inside(i, j):
        # |c_i - c_j| + r_i <= factor * r_j, cleared of the denominator fb
        gap = fa * rs[j] - fb * rs[i]
        return gap >= 0 and fb * fb * _d2(cs[i], cs[j]) <= gap * gap

    return all(
        any(rs[j] >= rs[i] and inside(i, j) for j in result.picked_indices) for i in range(len(balls))
    )


def lemma1_ratio_1d(balls: Sequence[Ball], delta) -> Lemma1Bound:
    balls = list(balls)
    if _check_family(balls) != 1:
        raise ValueError("the exact ratio is only available in dimension 1")
    delta = _check_delta(delta)
    full = interval_union_from_balls(balls).measure
    scaled = interval_union_from_balls(scale_ball(b, delta) for b in balls).measure
    return Lemma1Bound(delta, 1, delta, exact_ratio=scaled / full)


def lemma1_certificate(balls: Sequence[Ball], delta) -> Lemma1Bound:
    balls = list(balls)
    d = _check_family(balls)
    delta = _check_delta(delta)
    if any(isinstance(b.radius, Radical) for b in balls):
        raise ValueError("the certificate needs rational radii")
    result = greedy_disjoint_subfamily(balls)
    if not (result.disjoint_verified and result.cover_verified):
        raise InvariantViolation("greedy subfamily failed its own verification")
    # unit-ball volume cancels in the ratio
    scaled_sum = sum(((delta * balls[j].radius) ** d for j in result.picked_indices), Fraction(0))
    enlarged_sum = sum(((3 * balls[j].radius) ** d for j in result.picked_indices), Fraction(0))
    return Lemma1Bound(
        delta,
        d,
        scaled_sum / enlarged_sum,
        scaled_sum=scaled_sum,
        enlarged_sum=enlarged_sum,
        picked_indices=result.picked_indices,
    )
