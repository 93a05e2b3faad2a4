"""Closed Euclidean balls, cubes and exact 1-D interval unions.

Conventions used everywhere in the package:

* balls are closed, so tangent balls intersect and touching intervals merge;
* every predicate works on squared distances in exact rationals.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import (
    Radical,
    Radius,
    as_fraction,
    compare_quad_to_radius,
    compare_radii,
    compare_square_to_radius,
    format_rational,
    radical_ratio,
    radius_enclosure,
    scale_radius,
)
from .errors import PrecisionError

# cap on dyadic refinement for incommensurable radii
_MAX_BITS = 4096

__all__ = [
    "Point",
    "Ball",
    "Cube",
    "IntervalUnion",
    "InclusionReport",
    "as_point",
    "squared_distance",
    "scale_ball",
    "ball_contains_point",
    "balls_intersect",
    "ball_in_enlargement",
    "cube_contains_point",
    "cube_ball_inclusion_check",
    "interval_union_from_balls",
    "interval_union_measure",
    "balls_to_json",
    "balls_from_json",
    "dump_balls",
    "load_balls",
]

Point = tuple  # tuple[Fraction, ...]


def as_point(p) -> Point:
    """Coerce a scalar (1-D) or a sequence of scalars into a Point."""
    if isinstance(p, (str, int, Fraction)):
        return (as_fraction(p),)
    coords = tuple(as_fraction(c) for c in p)
    if not coords:
        raise ValueError("a point needs at least one coordinate")
    return coords


def _check_dims(a: Point, b: Point) -> None:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")


def squared_distance(a: Point, b: Point) -> Fraction:
    _check_dims(a, b)
    return sum(((x - y) ** 2 for x, y in zip(a, b)), Fraction(0))


def _coerce_radius(r) -> Radius:
    if isinstance(r, Radical):
        return r
    r = as_fraction(r)
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    return r


@dataclass(frozen=True)
class Ball:
    """Closed ball ``B(center, radius)``.

    ``Ball(0, 1)`` and ``Ball((0, 0), "1/2")`` are both accepted; the center is
    stored as a tuple of Fractions.
    """

    center: Point
    radius: Radius

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", _coerce_radius(self.radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    def __repr__(self):
        c = ", ".join(str(x) for x in self.center)
        if self.dim > 1:
            c = f"({c})"
        return f"B({c}, {self.radius})"


@dataclass(frozen=True)
class Cube:
    """Closed axis-aligned cube of side ``2 * half_side``."""

    center: Point
    half_side: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        h = as_fraction(self.half_side)
        if h <= 0:
            raise ValueError("half_side must be positive")
        object.__setattr__(self, "half_side", h)


def scale_ball(b: Ball, kappa) -> Ball:
    kappa = as_fraction(kappa)
    if kappa <= 0:
        raise ValueError(f"scale factor must be positive, got {kappa}")
    return Ball(b.center, scale_radius(b.radius, kappa))


def ball_contains_point(b: Ball, p) -> bool:
    p = as_point(p)
    return compare_square_to_radius(squared_distance(b.center, p), b.radius) <= 0


def _sqrt_vs_difference(d2: Fraction, big: Radius, small: Radius, sign: int) -> int:
    """Sign of ``sqrt(d2) - (big + sign*small)`` for two radii, at least one irrational.

    Commensurable radii collapse to a single radius and are decided exactly;
    otherwise dyadic enclosures are refined until the sign is certain.
    """
    t = radical_ratio(big, small)
    if t is not None:
        coeff = 1 + sign * t
        if coeff <= 0:
            return 1 if coeff < 0 or d2 > 0 else 0
        return compare_square_to_radius(d2, scale_radius(big, coeff))
    bits = 64
    while bits <= _MAX_BITS:
        blo, bhi = radius_enclosure(big, bits)
        slo, shi = radius_enclosure(small, bits)
        dlo, dhi = radius_enclosure(Radical.make(d2, 2), bits) if d2 else (Fraction(0), Fraction(0))
        lo = blo + sign * (slo if sign > 0 else shi)
        hi = bhi + sign * (shi if sign > 0 else slo)
        if dlo > hi:
            return 1
        if dhi < lo:
            return -1
        bits *= 2
    raise PrecisionError("comparison of incommensurable radii is undecided at the precision cap")


def balls_intersect(a: Ball, b: Ball) -> bool:
    """Closed balls meet iff ``|x_a - x_b| <= r_a + r_b`` (tangency counts)."""
    d2 = squared_distance(a.center, b.center)
    ra, rb = a.radius, b.radius
    if isinstance(ra, Radical) and isinstance(rb, Radical):
        return _sqrt_vs_difference(d2, ra, rb, 1) <= 0
    if isinstance(ra, Radical):
        ra, rb = rb, ra
    if isinstance(rb, Radical):
        # sqrt(d2) - ra <= rb
        return compare_quad_to_radius(-ra, 1, d2, rb) <= 0
    s = ra + rb
    return d2 <= s * s


def ball_in_enlargement(inner: Ball, outer_center, outer_radius) -> bool:
    """True iff ``inner`` is contained in ``B(outer_center, outer_radius)``."""
    oc = as_point(outer_center)
    R = outer_radius if isinstance(outer_radius, Radical) else as_fraction(outer_radius)
    d2 = squared_distance(inner.center, oc)
    r = inner.radius
    if isinstance(r, Radical) and isinstance(R, Radical):
        return _sqrt_vs_difference(d2, R, r, -1) <= 0
    if isinstance(r, Radical):
        # r <= R - sqrt(d2)
        return compare_quad_to_radius(R, -1, d2, r) >= 0
    if isinstance(R, Radical):
        # sqrt(d2) + r <= R
        return compare_quad_to_radius(r, 1, d2, R) <= 0
    gap = R - r
    return gap >= 0 and d2 <= gap * gap


def cube_contains_point(c: Cube, p) -> bool:
    p = as_point(p)
    _check_dims(c.center, p)
    return all(abs(x - y) <= c.half_side for x, y in zip(p, c.center))


@dataclass
class InclusionReport:
    center: Point
    half_side: Fraction
    # one (in_ball, in_cube, in_sqrt_d_ball) triple per sample
    flags: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def cube_ball_inclusion_check(x, r, sample_points: Iterable) -> InclusionReport:
    """Check ``B(x,r) ⊂ C(x,r) ⊂ B(x, sqrt(d) r)`` on the given samples.

    The outer ball test uses the root-free form ``|p - x|^2 <= d r^2``.
    """
    x = as_point(x)
    r = as_fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    d = len(x)
    ball = Ball(x, r)
    cube = Cube(x, r)
    report = InclusionReport(x, r)
    for p in sample_points:
        p = as_point(p)
        _check_dims(x, p)
        in_ball = ball_contains_point(ball, p)
        in_cube = cube_contains_point(cube, p)
        in_big = squared_distance(x, p) <= d * r * r
        report.flags.append((in_ball, in_cube, in_big))
        if (in_ball and not in_cube) or (in_cube and not in_big):
            report.violations.append(p)
    return report


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise separated closed intervals with exact endpoints."""

    components: tuple = ()

    @classmethod
    def from_intervals(cls, intervals: Iterable[tuple]) -> "IntervalUnion":
        # float keys are monotone in the exact order, Fractions break ties
        items = sorted(
            ((float(a), a, b) for a, b in intervals),
            key=lambda t: (t[0], t[1]),
        )
        merged: list[list[Fraction]] = []
        for _, a, b in items:
            if a > b:
                raise ValueError(f"empty interval [{a}, {b}]")
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1][1] = b
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    @property
    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.components), Fraction(0))

    def clip(self, lo, hi) -> "IntervalUnion":
        lo, hi = as_fraction(lo), as_fraction(hi)
        out = []
        for a, b in self.components:
            a2, b2 = max(a, lo), min(b, hi)
            if a2 <= b2:
                out.append((a2, b2))
        return IntervalUnion(tuple(out))

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion.from_intervals(self.components + other.components)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def interval_union_from_balls(balls: Iterable[Ball]) -> IntervalUnion:
    intervals = []
    for b in balls:
        if b.dim != 1:
            raise ValueError(f"interval unions need 1-D balls, got dimension {b.dim}")
        if isinstance(b.radius, Radical):
            raise ValueError("1-D balls must have rational radii")
        c = b.center[0]
        intervals.append((c - b.radius, c + b.radius))
    return IntervalUnion.from_intervals(intervals)


def interval_union_measure(u: IntervalUnion) -> Fraction:
    return u.measure


# --- JSON ball lists --------------------------------------------------------


def balls_to_json(balls: Sequence[Ball]) -> dict:
    balls = list(balls)
    dim = balls[0].dim if balls else 1
    out = []
    for b in balls:
        if isinstance(b.radius, Radical):
            raise ValueError("irrational radii have no p/q serialization")
        if b.dim != dim:
            raise ValueError("mixed dimensions in ball list")
        out.append(
            {
                "center": [format_rational(c) for c in b.center],
                "radius": format_rational(b.radius),
            }
        )
    return {"dim": dim, "balls": out}


def balls_from_json(obj: dict) -> list[Ball]:
    dim = int(obj["dim"])
    balls = []
    for entry in obj["balls"]:
        b = Ball(tuple(as_fraction(c) for c in entry["center"]), as_fraction(entry["radius"]))
        if b.dim != dim:
            raise ValueError(f"ball {entry} does not have dimension {dim}")
        balls.append(b)
    return balls


def dump_balls(balls: Sequence[Ball]) -> str:
    return json.dumps(balls_to_json(balls))


def load_balls(path) -> list[Ball]:
    with open(path) as fh:
        return balls_from_json(json.load(fh))
