"""Continued fractions, Dirichlet's pigeonhole search and Bad_d evidence.

Real inputs come in three exact-or-honest flavours:

* ``Fraction``                 -- an exact rational;
* :class:`QuadraticSurd`       -- ``(a + b*sqrt(n)) / c``, handled exactly;
* :class:`Approximation`       -- a rational value with an explicit error bound.

Nothing here ever claims more than the input can certify.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence, Union

from .errors import InvariantViolation, PrecisionError
from .exact import (
    Radical,
    as_fraction,
    compare_quad_to_radius,
    compare_square_to_radius,
    format_rational,
    quad_floor,
    radius_power,
    sign_quad,
)
from .geometry import squared_distance
from .systems import BadWitness, ClassicalSystem

__all__ = [
    "QuadraticSurd",
    "Approximation",
    "RealInput",
    "ContinuedFraction",
    "Convergent",
    "BadReport",
    "BridgeReport",
    "surd",
    "parse_real",
    "format_real",
    "enclosure",
    "cf_expand",
    "convergents",
    "dirichlet_search",
    "bad_report",
    "classical_bad_bridge",
    "bad_witness_search",
]


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(k, m)`` with ``n == k*k*m`` and ``m`` square-free."""
    k, m = 1, n
    f = 2
    while f * f <= m:
        while m % (f * f) == 0:
            m //= f * f
            k *= f
        f += 1
    return k, m


@dataclass(frozen=True)
class QuadraticSurd:
    """``(a + b*sqrt(n)) / c`` with ``n`` square-free, ``b != 0``, ``c > 0``."""

    a: int
    b: int
    n: int
    c: int

    @property
    def quad(self) -> tuple[Fraction, Fraction, int]:
        """``(A, B, n)`` with value ``A + B*sqrt(n)``."""
        return Fraction(self.a, self.c), Fraction(self.b, self.c), self.n

    def __float__(self) -> float:
        return (self.a + self.b * self.n ** 0.5) / self.c

    def __str__(self) -> str:
        return f"surd({self.a},{self.b},{self.n},{self.c})"


def surd(a: int, b: int, n: int, c: int = 1) -> Union[Fraction, QuadraticSurd]:
    """Canonical ``(a + b*sqrt(n)) / c``; collapses to a Fraction when rational."""
    if c == 0:
        raise ZeroDivisionError("surd denominator is zero")
    if n < 0:
        raise ValueError("negative radicand")
    k, m = _squarefree_split(n) if n else (0, 0)
    b *= k
    if b == 0 or m <= 1:
        return Fraction(a + b * m, c) if m == 1 else Fraction(a, c)
    if c < 0:
        a, b, c = -a, -b, -c
    g = gcd(gcd(a, b), c)
    return QuadraticSurd(a // g, b // g, m, c // g)


@dataclass(frozen=True)
class Approximation:
    """A real known only to lie in ``[value - error, value + error]``."""

    value: Fraction
    error: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))
        object.__setattr__(self, "error", as_fraction(self.error))
        if self.error <= 0:
            raise ValueError("approximation error must be positive")

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return f"approx({self.value},{self.error})"


RealInput = Union[Fraction, QuadraticSurd, Approximation]

_SURD_RE = re.compile(r"^surd\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(\d+)\s*,\s*(-?\d+)\s*\)$")
_APPROX_RE = re.compile(r"^approx\(\s*([^,]+?)\s*,\s*([^,]+?)\s*\)$")


def parse_real(text) -> RealInput:
    """Parse ``"p/q"``, ``"surd(a,b,n,c)"`` or ``"approx(decimal,err)"``."""
    if isinstance(text, (Fraction, QuadraticSurd, Approximation)):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    m = _SURD_RE.match(s)
    if m:
        return surd(*(int(g) for g in m.groups()))
    m = _APPROX_RE.match(s)
    if m:
        return Approximation(Fraction(m.group(1)), Fraction(m.group(2)))
    try:
        return Fraction(s)
    except ValueError:
        raise ValueError(f"not a real literal: {text!r}") from None


def format_real(x: RealInput) -> str:
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, Approximation):
        return f"approx({format_rational(x.value)},{format_rational(x.error)})"
    return str(x)


def enclosure(x: RealInput, bits: int = 128) -> tuple[Fraction, Fraction]:
    """Rational ``(lo, hi)`` containing ``x``; width ``<= 2**-bits`` for surds."""
    if isinstance(x, Fraction):
        return x, x
    if isinstance(x, Approximation):
        return x.value - x.error, x.value + x.error
    scale = 1 << bits
    s = isqrt(x.n * scale * scale)
    lo_root, hi_root = Fraction(s, scale), Fraction(s + 1, scale)
    if x.b < 0:
        lo_root, hi_root = hi_root, lo_root
    return Fraction(x.a + x.b * lo_root, x.c), Fraction(x.a + x.b * hi_root, x.c)


# --- continued fractions ----------------------------------------------------


@dataclass(frozen=True)
class ContinuedFraction:
    a0: int
    partials: tuple
    status: str  # terminated | periodic | truncated
    # for periodic expansions: repeating block and the term index where it starts
    # (index 0 is a0)
    period: tuple | None = None
    period_start: int | None = None

    @property
    def terms(self) -> tuple:
        return (self.a0,) + self.partials

    def __str__(self) -> str:
        return f"[{self.a0}; {', '.join(map(str, self.partials))}]"


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


def _cf_rational(x: Fraction, depth: int) -> ContinuedFraction:
    terms = []
    num, den = x.numerator, x.denominator
    while den and len(terms) <= depth:
        a, r = divmod(num, den)
        terms.append(a)
        num, den = den, r
    status = "terminated" if den == 0 else "truncated"
    return ContinuedFraction(terms[0], tuple(terms[1:]), status)


def _cf_surd(x: QuadraticSurd, depth: int) -> ContinuedFraction:
    A, B, n = x.quad
    seen: dict[tuple, int] = {}
    terms: list[int] = []
    # iterate the complete quotients until a state repeats; always terminates
    # because a quadratic irrational has an eventually periodic expansion
    while (A, B) not in seen:
        seen[(A, B)] = len(terms)
        a = quad_floor(A, B, n)
        terms.append(a)
        A -= a
        norm = A * A - B * B * n
        A, B = A / norm, -B / norm
    start = seen[(A, B)]
    period = tuple(terms[start:])
    while len(terms) <= depth:
        terms.append(period[(len(terms) - start) % len(period)])
    return ContinuedFraction(terms[0], tuple(terms[1 : depth + 1]), "periodic", period, start)


def _cf_approx(x: Approximation, depth: int) -> ContinuedFraction:
    lo, hi = x.value - x.error, x.value + x.error
    terms: list[int] = []

    def prefix():
        return ContinuedFraction(terms[0], tuple(terms[1:]), "truncated") if terms else None

    while True:
        a = lo.numerator // lo.denominator
        if hi.numerator // hi.denominator != a:
            raise PrecisionError(
                f"approximation certifies only {max(len(terms) - 1, 0)} partial quotients",
                prefix=prefix(),
            )
        terms.append(a)
        if len(terms) > depth:
            return prefix()
        if lo == a:
            # x may equal a exactly, so the next complete quotient is unbounded
            raise PrecisionError("approximation interval touches a rational breakpoint", prefix=prefix())
        lo, hi = 1 / (hi - a), 1 / (lo - a)


def cf_expand(x: RealInput, depth: int) -> ContinuedFraction:
    """Partial quotients ``a0; a1..a_depth`` (fewer when a rational terminates)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    x = parse_real(x)
    if isinstance(x, Fraction):
        return _cf_rational(x, depth)
    if isinstance(x, QuadraticSurd):
        return _cf_surd(x, depth)
    return _cf_approx(x, depth)


def convergents(cf: ContinuedFraction) -> list[Convergent]:
    out = []
    p2, q2, p1, q1 = 0, 1, 1, 0
    for a in cf.terms:
        p2, q2, p1, q1 = p1, q1, a * p1 + p2, a * q1 + q2
        out.append(Convergent(p1, q1))
    return out


# --- Dirichlet --------------------------------------------------------------


def _within(x: RealInput, q: int, p: int, tol: Fraction) -> bool:
    """Decide ``|q x - p| <= tol`` exactly, or raise PrecisionError."""
    if isinstance(x, Fraction):
        return abs(q * x - p) <= tol
    if isinstance(x, QuadraticSurd):
        A, B, n = x.quad
        A, B = q * A - p, q * B
        return sign_quad(A - tol, B, n) <= 0 and sign_quad(A + tol, B, n) >= 0
    dev, err = abs(q * x.value - p), q * x.error
    if dev + err <= tol:
        return True
    if dev - err > tol:
        return False
    raise PrecisionError(f"|{q}x - {p}| <= {tol} is not decidable at error {x.error}")


def _nearest_int(x: RealInput, q: int) -> int:
    if isinstance(x, QuadraticSurd):
        A, B, n = x.quad
        return quad_floor(q * A + Fraction(1, 2), q * B, n)
    v = q * (x if isinstance(x, Fraction) else x.value) + Fraction(1, 2)
    return v.numerator // v.denominator


def dirichlet_search(alpha: Sequence[RealInput], Q: int) -> tuple[tuple, int]:
    """First ``q`` in ``1..Q**d - 1`` with ``max_i |q alpha_i - p_i| <= 1/Q``.

    Returns ``(p, q)`` with ``p`` a tuple of nearest integers.
    """
    if Q < 2:
        raise ValueError("Q must be >= 2")
    if isinstance(alpha, (str, int, Fraction, QuadraticSurd, Approximation)):
        alpha = [alpha]
    alpha = [parse_real(a) for a in alpha]
    d = len(alpha)
    tol = Fraction(1, Q)
    for q in range(1, Q ** d):
        p = tuple(_nearest_int(a, q) for a in alpha)
        if all(_within(a, q, pi, tol) for a, pi in zip(alpha, p)):
            return p, q
    raise InvariantViolation(f"pigeonhole guarantee failed for Q={Q}: no q < Q^d found")


# --- badly approximable evidence -------------------------------------------


@dataclass(frozen=True)
class BadReport:
    verdict: str  # bounded-evidence | rational | inconclusive-truncated
    max_partial: int | None
    prefix_length: int
    cf: ContinuedFraction

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "max_partial": self.max_partial,
            "prefix_length": self.prefix_length,
            "a0": self.cf.a0,
            "partials": list(self.cf.partials),
            "period": None if self.cf.period is None else list(self.cf.period),
        }


def bad_report(x: RealInput, depth: int) -> BadReport:
    """Evidence about membership of ``x`` in Bad_1 from its partial quotients.

    Periodic (quadratic) expansions are bounded, which places ``x`` in Bad_1;
    anything else is reported with its running maximum and never declared
    unbounded.
    """
    x = parse_real(x)
    cf = cf_expand(x, depth)
    partials = cf.partials
    if cf.status == "periodic":
        # every entry of the period recurs as a partial quotient
        top = max(cf.terms[1 : cf.period_start] + cf.period)
        return BadReport("bounded-evidence", top, len(partials), cf)
    if isinstance(x, Fraction):
        return BadReport("rational", max(partials) if partials else None, len(partials), cf)
    return BadReport("inconclusive-truncated", max(partials) if partials else None, len(partials), cf)


# --- Bad_d versus Bad(classical system) -------------------------------------


@dataclass
class BridgeReport:
    kappa: Fraction
    index_bound: int
    rational: bool
    cube_survives: bool
    ball_survives: bool
    first_cube_hit: int | None
    first_ball_hit: int | None
    implication_violations: list = field(default_factory=list)
    semi_decision: bool = True

    @property
    def implication_holds(self) -> bool:
        return not self.implication_violations

    def to_json(self) -> dict:
        return {
            "kappa": format_rational(self.kappa),
            "index_bound": self.index_bound,
            "rational": self.rational,
            "in_bad_d": "no (rational)" if self.rational else (
                "survives-up-to-bound" if self.cube_survives else "hit-within-bound"
            ),
            "cube_survives": self.cube_survives,
            "ball_survives": self.ball_survives,
            "first_cube_hit": self.first_cube_hit,
            "first_ball_hit": self.first_ball_hit,
            "implication_violations": self.implication_violations,
            "semi_decision": self.semi_decision,
        }


_MAX_BITS = 4096


def _decide(exact_fn, interval_fn, alpha, label):
    """Run ``exact_fn`` when possible, else refine enclosures until decided."""
    if exact_fn is not None:
        return exact_fn()
    bits = 64
    fixed = any(isinstance(a, Approximation) for a in alpha)
    while True:
        boxes = [enclosure(a, bits) for a in alpha]
        verdict = interval_fn(boxes)
        if verdict is not None:
            return verdict
        if fixed or bits >= _MAX_BITS:
            raise PrecisionError(f"{label} is not decidable at the available precision")
        bits *= 2


def _interval_abs(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    if lo >= 0:
        return lo, hi
    if hi <= 0:
        return -hi, -lo
    return Fraction(0), max(-lo, hi)


def _cube_hit(alpha, p, q, half_side) -> bool:
    """``alpha`` in the closed cube ``C(p/q, half_side)``."""
    if all(isinstance(a, (Fraction, QuadraticSurd)) for a in alpha):
        # one coordinate at a time, each exact in its own quadratic field
        def exact():
            for a, pi in zip(alpha, p):
                c = Fraction(pi, q)
                if isinstance(a, QuadraticSurd):
                    A, B, n = a.quad
                    ok = compare_quad_to_radius(A - c, B, n, half_side) <= 0 and \
                        compare_quad_to_radius(c - A, -B, n, half_side) <= 0
                else:
                    ok = compare_quad_to_radius(abs(a - c), 0, 0, half_side) <= 0
                if not ok:
                    return False
            return True

        return _decide(exact, None, alpha, "cube membership")

    def interval(boxes):
        inside = True
        for (lo, hi), pi in zip(boxes, p):
            dlo, dhi = _interval_abs(lo - Fraction(pi, q), hi - Fraction(pi, q))
            if compare_quad_to_radius(dlo, 0, 0, half_side) > 0:
                return False
            if compare_quad_to_radius(dhi, 0, 0, half_side) > 0:
                inside = None
        return inside

    return _decide(None, interval, alpha, "cube membership")


def _ball_hit(alpha, p, q, radius) -> bool:
    """``alpha`` in the closed ball ``B(p/q, radius)``."""
    center = tuple(Fraction(pi, q) for pi in p)
    fields = {a.n for a in alpha if isinstance(a, QuadraticSurd)}
    if all(isinstance(a, (Fraction, QuadraticSurd)) for a in alpha) and len(fields) <= 1:
        # the squared distance lies in Q(sqrt(n)): compare it with radius^2
        n = fields.pop() if fields else 0
        A = B = Fraction(0)
        for a, c in zip(alpha, center):
            x, y = (a.quad[0], a.quad[1]) if isinstance(a, QuadraticSurd) else (a, Fraction(0))
            x -= c
            A += x * x + y * y * n
            B += 2 * x * y
        v, m = radius_power(radius)
        return compare_quad_to_radius(A, B, n, Radical.make(v * v, m)) <= 0

    def interval(boxes):
        dlo = dhi = Fraction(0)
        for (lo, hi), c in zip(boxes, center):
            a, b = _interval_abs(lo - c, hi - c)
            dlo += a * a
            dhi += b * b
        if compare_square_to_radius(dhi, radius) <= 0:
            return True
        if compare_square_to_radius(dlo, radius) > 0:
            return False
        return None

    return _decide(None, interval, alpha, "ball membership")


def classical_bad_bridge(alpha: Sequence[RealInput], kappa, index_bound: int, window=None) -> BridgeReport:
    """Scan the classical system up to ``index_bound`` under both readings of
    badly approximable: the cube form ``max_i |alpha_i - p_i/q| > kappa/q^(1+1/d)``
    and the ball form ``alpha not in B(p/q, kappa sqrt(d)/q^(1+1/d))``.

    Ball-survival must imply cube-survival index by index, since the cube of
    half-side ``r`` sits inside the ball of radius ``sqrt(d) r``.
    """
    if isinstance(alpha, (str, int, Fraction, QuadraticSurd, Approximation)):
        alpha = [alpha]
    alpha = tuple(parse_real(a) for a in alpha)
    kappa = as_fraction(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    d = len(alpha)
    if window is None:
        window = [(0, 1)] * d
    system = ClassicalSystem(d, window)
    rational = all(isinstance(a, Fraction) for a in alpha)
    first_cube = first_ball = None
    violations = []
    for i, p, q in system.pairs(1, index_bound):
        half_side = Radical.make(kappa ** d / Fraction(q ** (d + 1)), d)
        radius = Radical.make(kappa ** (2 * d) * Fraction(d ** d, q ** (2 * d + 2)), 2 * d)
        in_cube = _cube_hit(alpha, p, q, half_side)
        in_ball = _ball_hit(alpha, p, q, radius)
        if in_cube and first_cube is None:
            first_cube = i
        if in_ball and first_ball is None:
            first_ball = i
        if in_cube and not in_ball:
            violations.append(i)
    return BridgeReport(
        kappa,
        index_bound,
        rational,
        first_cube is None,
        first_ball is None,
        first_cube,
        first_ball,
        violations,
    )


def bad_witness_search(alpha: Sequence[RealInput], index_bound: int, kappas=None, window=None) -> BadWitness | None:
    """Largest ``kappa`` from a candidate ladder with no cube hit up to ``index_bound``.

    The default ladder is ``1, 1/2, 1/4, ..., 2**-30``.  Hits are monotone in
    ``kappa``, so each pair of the classical system only ever removes the
    current top of the ladder.  Returns ``None`` when every candidate is hit.
    """
    if isinstance(alpha, (str, int, Fraction, QuadraticSurd, Approximation)):
        alpha = [alpha]
    alpha = tuple(parse_real(a) for a in alpha)
    if kappas is None:
        kappas = [Fraction(1, 2 ** k) for k in range(31)]
    alive = sorted({as_fraction(k) for k in kappas}, reverse=True)
    if not alive or alive[-1] <= 0:
        raise ValueError("candidate kappas must be positive")
    d = len(alpha)
    system = ClassicalSystem(d, window if window is not None else [(0, 1)] * d)
    for _, p, q in system.pairs(1, index_bound):
        while alive and _cube_hit(alpha, p, q, Radical.make(alive[0] ** d / Fraction(q ** (d + 1)), d)):
            alive.pop(0)
        if not alive:
            return None
    return BadWitness(alive[0], 1, index_bound)
