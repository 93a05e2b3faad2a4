"""Indexed ball systems and tail semi-decisions.

Indices are 1-based, matching ``{B(x_i, r_i)}_{i>=1}``.  Every question about
an infinite tail is answered only up to an explicit index bound and the
answer carries that bound.
"""
from __future__ import annotations

import functools
import json
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import isqrt
from typing import Iterator, Sequence

from .errors import PrecisionError
from .exact import (
    Radical,
    Radius,
    as_fraction,
    compare_quad_to_radius,
    compare_radii,
    compare_square_to_radius,
    format_rational,
    integer_root,
)
from .geometry import (
    Ball,
    as_point,
    balls_from_json,
    balls_intersect,
    balls_to_json,
    scale_ball,
    squared_distance,
)

__all__ = [
    "BallSystem",
    "ClassicalSystem",
    "Z2ExampleSystem",
    "ExplicitSystem",
    "BNMParams",
    "BadWitness",
    "ShrinkingReport",
    "classical_system",
    "z2_example_system",
    "explicit_system",
    "shrinking_locally_report",
    "hit_count",
    "tail_survives",
    "system_from_json",
    "system_to_json",
    "load_system",
]


@dataclass(frozen=True)
class BNMParams:
    """Parameters of ``B(N, M)``: points avoiding ``B(x_i, r_i/M)`` for all ``i >= N``."""

    N: int = 1
    M: int = 1

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError(f"need N >= 1 and M >= 1, got N={self.N}, M={self.M}")

    @property
    def kappa(self) -> Fraction:
        return Fraction(1, self.M)


@dataclass(frozen=True)
class BadWitness:
    """Claimed ``kappa(alpha)`` and ``N(alpha)``, checked up to ``verified_up_to``."""

    kappa: Fraction
    start_index: int
    verified_up_to: int

    def __post_init__(self):
        object.__setattr__(self, "kappa", as_fraction(self.kappa))
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.start_index < 1 or self.verified_up_to < self.start_index:
            raise ValueError("need 1 <= start_index <= verified_up_to")


class BallSystem:
    """A deterministic, possibly infinite sequence of balls of one dimension."""

    kind = "abstract"
    dim: int
    size: int | None = None

    def ball_at(self, i: int) -> Ball:
        raise NotImplementedError

    def radius_cutoff(self, eps) -> int | None:
        """Index ``I`` such that every ball after ``I`` has radius ``<= eps``,
        or None when the system cannot certify one."""
        return None

    def balls(self, start: int = 1, stop: int | None = None) -> Iterator[tuple[int, Ball]]:
        """Yield ``(i, ball_at(i))`` for ``start <= i <= stop`` (inclusive)."""
        if stop is None:
            if self.size is None:
                raise ValueError("an index bound is required for an infinite system")
            stop = self.size
        if self.size is not None:
            stop = min(stop, self.size)
        for i in range(max(start, 1), stop + 1):
            yield i, self.ball_at(i)

    def _check_index(self, i: int) -> None:
        if i < 1 or (self.size is not None and i > self.size):
            raise IndexError(f"index {i} outside the system")


class ExplicitSystem(BallSystem):
    kind = "explicit"

    def __init__(self, balls: Sequence[Ball]):
        balls = list(balls)
        if not balls:
            raise ValueError("an explicit system needs at least one ball")
        self.dim = balls[0].dim
        if any(b.dim != self.dim for b in balls):
            raise ValueError("mixed dimensions")
        self._balls = balls
        self.size = len(balls)

    def ball_at(self, i: int) -> Ball:
        self._check_index(i)
        return self._balls[i - 1]

    def radius_cutoff(self, eps) -> int:
        eps = as_fraction(eps)
        last = 0
        for i, b in enumerate(self._balls, 1):
            if compare_radii(b.radius, eps) > 0:
                last = i
        return last


class ClassicalSystem(BallSystem):
    """``B(p/q, sqrt(d) / q**(1 + 1/d))`` over all ``(p, q)`` in ``Z^d x N``.

    Pairs are not reduced: ``(0, 1)`` and ``(0, 2)`` are distinct members.
    Enumeration is by ascending ``q`` then lexicographic ``p``, restricted to
    balls whose interior meets the window.
    """

    kind = "classical"

    def __init__(self, d: int, window):
        if d < 1:
            raise ValueError("dimension must be positive")
        window = tuple((as_fraction(a), as_fraction(b)) for a, b in window)
        if len(window) != d:
            raise ValueError(f"window has {len(window)} axes, expected {d}")
        if any(a >= b for a, b in window):
            raise ValueError("window must have positive volume")
        self.dim = d
        self.window = window
        self._offsets = [0]  # _offsets[q] = number of balls with denominator <= q

    def radius_for(self, q: int) -> Radius:
        d = self.dim
        # r^(2d) = d^d / q^(2d+2)
        return Radical.make(Fraction(d ** d, q ** (2 * d + 2)), 2 * d)

    @functools.lru_cache(maxsize=4096)
    def numerators(self, q: int) -> tuple:
        """All ``p`` for denominator ``q`` whose ball interior meets the window."""
        r = self.radius_for(q)
        if self.dim == 1:
            # r = 1/q^2 is rational: p/q in (a - r, b + r) solved exactly
            (a, b), = self.window
            lo, hi = q * (a - r), q * (b + r)
            first = lo.numerator // lo.denominator + 1
            last = -((-hi.numerator) // hi.denominator) - 1
            return tuple((p,) for p in range(first, last + 1))
        rf = float(r)
        ranges = []
        for a, b in self.window:
            lo = int((float(a) - rf) * q) - 2
            hi = int((float(b) + rf) * q) + 2
            ranges.append(range(lo, hi + 1))
        out = []
        for p in product(*ranges):
            d2 = Fraction(0)
            for pi, (a, b) in zip(p, self.window):
                x = Fraction(pi, q)
                if x < a:
                    d2 += (a - x) ** 2
                elif x > b:
                    d2 += (x - b) ** 2
            if compare_square_to_radius(d2, r) < 0:
                out.append(p)
        return tuple(out)

    def _extend_to_index(self, i: int) -> None:
        while self._offsets[-1] < i:
            q = len(self._offsets)
            self._offsets.append(self._offsets[-1] + len(self.numerators(q)))

    def q_of(self, i: int) -> int:
        self._check_index(i)
        self._extend_to_index(i)
        return bisect_left(self._offsets, i)

    def first_index(self, q: int) -> int:
        return self.last_index(q - 1) + 1

    def last_index(self, q: int) -> int:
        """Index of the last ball with denominator ``<= q`` (0 for ``q = 0``)."""
        while len(self._offsets) <= q:
            nq = len(self._offsets)
            self._offsets.append(self._offsets[-1] + len(self.numerators(nq)))
        return self._offsets[q]

    def pair_at(self, i: int) -> tuple[tuple, int]:
        q = self.q_of(i)
        return self.numerators(q)[i - self._offsets[q - 1] - 1], q

    def ball_at(self, i: int) -> Ball:
        p, q = self.pair_at(i)
        return Ball(tuple(Fraction(pi, q) for pi in p), self.radius_for(q))

    def pairs(self, start: int = 1, stop: int | None = None) -> Iterator[tuple[int, tuple, int]]:
        """Yield ``(i, p, q)`` for ``start <= i <= stop``."""
        if stop is None:
            raise ValueError("an index bound is required for an infinite system")
        if start > stop:
            return
        q = self.q_of(max(start, 1))
        i = self._offsets[q - 1]
        while i < stop:
            for p in self.numerators(q):
                i += 1
                if i > stop:
                    return
                if i >= start:
                    yield i, p, q
            q += 1
            self.last_index(q)

    def balls(self, start: int = 1, stop: int | None = None) -> Iterator[tuple[int, Ball]]:
        radius = None
        last_q = None
        for i, p, q in self.pairs(start, stop):
            if q != last_q:
                radius, last_q = self.radius_for(q), q
            yield i, Ball(tuple(Fraction(pi, q) for pi in p), radius)

    def q_cutoff(self, eps) -> int:
        """Largest ``q`` whose radius exceeds ``eps`` (0 if none)."""
        eps = as_fraction(eps)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        d = self.dim
        # r_q > eps  <=>  q^(2d+2) < d^d / eps^(2d)
        bound = Fraction(d ** d) / eps ** (2 * d)
        k = 2 * d + 2
        q = integer_root(bound.numerator // bound.denominator, k)
        while q ** k >= bound:
            q -= 1
        while (q + 1) ** k < bound:
            q += 1
        return max(q, 0)

    def radius_cutoff(self, eps) -> int:
        return self.last_index(self.q_cutoff(eps))

    def index_range(self, qmin: int, qmax: int) -> tuple[int, int]:
        """Index interval covering denominators ``qmin..qmax``."""
        return self.first_index(qmin), self.last_index(qmax)


class Z2ExampleSystem(BallSystem):
    """Radius-2 balls centred on an enumeration of ``Z^2`` that revisits every
    lattice point infinitely often.

    Pass ``k`` lists the L-infinity shells ``0, 1, ..., k`` in order; each
    shell is listed lexicographically.  Pass ``k`` has ``(2k+1)**2`` entries.
    """

    kind = "z2"
    dim = 2
    RADIUS = Fraction(2)

    @staticmethod
    @functools.lru_cache(maxsize=None)
    def shell(s: int) -> tuple:
        if s == 0:
            return ((0, 0),)
        return tuple(
            (x, y)
            for x in range(-s, s + 1)
            for y in range(-s, s + 1)
            if max(abs(x), abs(y)) == s
        )

    @staticmethod
    def pass_start(k: int) -> int:
        """Number of entries before pass ``k``."""
        return k * (2 * k - 1) * (2 * k + 1) // 3

    def center_at(self, i: int) -> tuple[int, int]:
        self._check_index(i)
        j = i - 1
        k = 0
        while self.pass_start(k + 1) <= j:
            k += 1
        pos = j - self.pass_start(k)
        s = 0 if pos == 0 else (isqrt(pos) + 1) // 2
        offset = pos - (2 * s - 1) ** 2 if s else 0
        return self.shell(s)[offset]

    def ball_at(self, i: int) -> Ball:
        return Ball(self.center_at(i), self.RADIUS)

    def radius_cutoff(self, eps) -> int | None:
        return 0 if as_fraction(eps) >= self.RADIUS else None


def classical_system(d: int, window) -> ClassicalSystem:
    return ClassicalSystem(d, window)


def z2_example_system() -> Z2ExampleSystem:
    return Z2ExampleSystem()


def explicit_system(balls: Sequence[Ball]) -> ExplicitSystem:
    return ExplicitSystem(balls)


@dataclass
class ShrinkingReport:
    epsilon: Fraction
    index_bound: int
    count: int
    verdict: str  # certified-finite | finite-up-to-bound | violation-growing
    certified_bound: int | None = None
    checkpoints: list = field(default_factory=list)  # (index, running count)

    def to_json(self) -> dict:
        return {
            "epsilon": format_rational(self.epsilon),
            "index_bound": self.index_bound,
            "count": self.count,
            "verdict": self.verdict,
            "certified_bound": self.certified_bound,
            "checkpoints": [list(c) for c in self.checkpoints],
        }


def shrinking_locally_report(s: BallSystem, probe: Ball, epsilon, index_bound: int) -> ShrinkingReport:
    """Count members meeting ``probe`` with radius ``> epsilon``.

    With a radius cutoff certificate the count is exact and final.  Otherwise
    the scan stops at ``index_bound`` and the verdict says whether the count
    was still rising over the second half of the scan.
    """
    epsilon = as_fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if probe.dim != s.dim:
        raise ValueError(f"probe dimension {probe.dim} != system dimension {s.dim}")
    cutoff = s.radius_cutoff(epsilon)
    stop = cutoff if cutoff is not None else index_bound
    marks = sorted({max(1, stop * k // 4) for k in range(1, 5)}) if stop else []
    count = 0
    checkpoints = []
    for i, b in s.balls(1, stop):
        if compare_radii(b.radius, epsilon) > 0 and balls_intersect(b, probe):
            count += 1
        if marks and i == marks[0]:
            checkpoints.append((i, count))
            marks.pop(0)
    if cutoff is not None:
        verdict = "certified-finite"
    else:
        half = next((c for idx, c in checkpoints if idx >= index_bound // 2), count)
        verdict = "violation-growing" if count > half else "finite-up-to-bound"
    return ShrinkingReport(epsilon, index_bound, count, verdict, cutoff, checkpoints)


def _robust_member(ball: Ball, alpha, error: Fraction) -> bool:
    d2 = squared_distance(ball.center, alpha)
    if not error:
        return compare_square_to_radius(d2, ball.radius) <= 0
    n = len(alpha)
    root = isqrt(n)
    # rational upper bound on the Euclidean error sqrt(n) * error
    e = error * (root if root * root == n else root + 1)
    if compare_quad_to_radius(e, 1, d2, ball.radius) <= 0:
        return True
    if compare_quad_to_radius(-e, 1, d2, ball.radius) > 0:
        return False
    raise PrecisionError(f"membership in {ball} is undecidable at error {error}")


def hit_count(s: BallSystem, alpha, index_bound: int, kappa, start: int = 1, error=0) -> int:
    """Number of ``i`` in ``[start, index_bound]`` with ``alpha`` in ``B(x_i, kappa r_i)``.

    ``error`` bounds the per-coordinate error of ``alpha`` when it is a
    rational approximation; undecidable memberships raise PrecisionError.
    """
    alpha = as_point(alpha)
    kappa = as_fraction(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if len(alpha) != s.dim:
        raise ValueError(f"point dimension {len(alpha)} != system dimension {s.dim}")
    error = as_fraction(error)
    return sum(
        1 for _, b in s.balls(start, index_bound) if _robust_member(scale_ball(b, kappa), alpha, error)
    )


def tail_survives(s: BallSystem, alpha, w: BadWitness, error=0) -> bool:
    """True iff ``alpha`` avoids every ``B(x_i, kappa r_i)`` for ``i`` in the
    witness window.  Evidence for membership in Bad, not a proof."""
    alpha = as_point(alpha)
    if len(alpha) != s.dim:
        raise ValueError(f"point dimension {len(alpha)} != system dimension {s.dim}")
    error = as_fraction(error)
    for _, b in s.balls(w.start_index, w.verified_up_to):
        if _robust_member(scale_ball(b, w.kappa), alpha, error):
            return False
    return True


# --- system specification files --------------------------------------------


def system_from_json(obj: dict) -> BallSystem:
    kind = obj.get("kind")
    if kind == "classical":
        d = int(obj["dim"])
        window = obj.get("window") or [["0", "1"]] * d
        return ClassicalSystem(d, [(a, b) for a, b in window])
    if kind == "z2":
        return Z2ExampleSystem()
    if kind == "explicit":
        return ExplicitSystem(balls_from_json({"dim": obj["dim"], "balls": obj["balls"]}))
    raise ValueError(f"unknown system kind {kind!r}")


def system_to_json(s: BallSystem) -> dict:
    if isinstance(s, ClassicalSystem):
        return {
            "kind": "classical",
            "dim": s.dim,
            "window": [[format_rational(a), format_rational(b)] for a, b in s.window],
        }
    if isinstance(s, Z2ExampleSystem):
        return {"kind": "z2", "dim": 2}
    if isinstance(s, ExplicitSystem):
        return {"kind": "explicit", **balls_to_json(s._balls)}
    raise TypeError(f"cannot serialize {type(s).__name__}")


def load_system(path) -> BallSystem:
    with open(path) as fh:
        return system_from_json(json.load(fh))
