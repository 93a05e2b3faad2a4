"""Exact arithmetic helpers shared by every module.

Scalars are :class:`fractions.Fraction`.  Irrational radii of the form
``base ** (1/index)`` (the classical Diophantine radii in dimension >= 2) are
held as :class:`Radical` and compared without ever leaving the rationals: a
comparison between ``a + b*sqrt(D)`` and ``v ** (1/m)`` is decided by raising
both sides to the ``m``-th power inside ``Q(sqrt(D))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from numbers import Rational
from typing import Union

__all__ = [
    "Radical",
    "Radius",
    "as_fraction",
    "format_rational",
    "integer_root",
    "sign_quad",
    "quad_floor",
    "compare_radii",
    "compare_quad_to_radius",
    "compare_square_to_radius",
    "radius_power",
    "scale_radius",
    "radical_ratio",
    "radius_enclosure",
]


def as_fraction(x) -> Fraction:
    """Coerce ``x`` to a Fraction.

    Accepts ints, Fractions and ``"p/q"`` / integer strings.  Floats are
    rejected: they would silently inject rounding into exact code paths.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not s:
            raise ValueError("empty rational literal")
        return Fraction(s)
    raise TypeError(f"cannot use {type(x).__name__} as an exact scalar: {x!r}")


def format_rational(x: Fraction) -> str:
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def integer_root(n: int, k: int) -> int:
    """Largest integer ``r >= 0`` with ``r**k <= n``."""
    if n < 0:
        raise ValueError("negative radicand")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return isqrt(n)
    r = int(round(n ** (1.0 / k))) if n.bit_length() < 1000 else 1 << (n.bit_length() // k)
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def _exact_root(x: Fraction, k: int) -> Fraction | None:
    num = integer_root(x.numerator, k)
    den = integer_root(x.denominator, k)
    if num ** k == x.numerator and den ** k == x.denominator:
        return Fraction(num, den)
    return None


@dataclass(frozen=True)
class Radical:
    """The positive real ``base ** (1/index)``; never a perfect power.

    Build through :meth:`make`, which collapses perfect powers to Fractions.
    """

    base: Fraction
    index: int

    def __post_init__(self):
        if self.base <= 0:
            raise ValueError("radical base must be positive")
        if self.index < 2:
            raise ValueError("radical index must be >= 2")

    @classmethod
    def make(cls, base, index: int) -> "Radius":
        base = as_fraction(base)
        if base <= 0:
            raise ValueError("radical base must be positive")
        if index == 1:
            return base
        # reduce the index where the base is a perfect power of a divisor
        for k in range(index, 1, -1):
            if index % k == 0:
                root = _exact_root(base, k)
                if root is not None:
                    return cls.make(root, index // k)
        return cls(base, index)

    def __float__(self) -> float:
        return float(self.base) ** (1.0 / self.index)

    def __str__(self) -> str:
        return f"({self.base})^(1/{self.index})"


Radius = Union[Fraction, Radical]


def radius_power(r: Radius) -> tuple[Fraction, int]:
    """Return ``(v, m)`` with ``r == v ** (1/m)``."""
    if isinstance(r, Radical):
        return r.base, r.index
    return as_fraction(r), 1


def scale_radius(r: Radius, k: Fraction) -> Radius:
    if isinstance(r, Radical):
        return Radical.make(k ** r.index * r.base, r.index)
    return r * k


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def sign_quad(a, b, n) -> int:
    """Exact sign of ``a + b*sqrt(n)`` for rational ``a, b`` and ``n >= 0``."""
    sa, sb = _sign(a), _sign(b)
    if sb == 0 or n == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    c = a * a - b * b * n
    if c == 0:
        return 0
    return sa if c > 0 else sb


def quad_floor(a, b, n) -> int:
    """Exact ``floor(a + b*sqrt(n))``."""
    a, b = as_fraction(a), as_fraction(b)
    if b == 0 or n == 0:
        return a.numerator // a.denominator
    # integer estimate from an integer square root, then exact correction
    scale = 1 << 64
    approx = a + b * Fraction(isqrt(int(n * scale * scale)), scale)
    k = approx.numerator // approx.denominator
    while sign_quad(a - k, b, n) < 0:
        k -= 1
    while sign_quad(a - (k + 1), b, n) >= 0:
        k += 1
    return k


def _quad_pow(a: Fraction, b: Fraction, n, m: int) -> tuple[Fraction, Fraction]:
    ra, rb = Fraction(1), Fraction(0)
    while m:
        if m & 1:
            ra, rb = ra * a + rb * b * n, ra * b + rb * a
        a, b = a * a + b * b * n, 2 * a * b
        m >>= 1
    return ra, rb


def compare_quad_to_radius(a, b, n, r: Radius) -> int:
    """Exact sign of ``(a + b*sqrt(n)) - r`` where ``r > 0``."""
    s = sign_quad(a, b, n)
    if s <= 0:
        return -1
    v, m = radius_power(r)
    if m == 1:
        return sign_quad(a - v, b, n)
    pa, pb = _quad_pow(as_fraction(a), as_fraction(b), n, m)
    return sign_quad(pa - v, pb, n)


def compare_square_to_radius(d2, r: Radius) -> int:
    """Exact sign of ``d2 - r**2`` for ``d2 >= 0``."""
    v, m = radius_power(r)
    if m == 1:
        return _sign(d2 - v * v)
    return _sign(d2 ** m - v * v)


def compare_radii(r1: Radius, r2: Radius) -> int:
    """Exact sign of ``r1 - r2``."""
    v1, m1 = radius_power(r1)
    v2, m2 = radius_power(r2)
    if m1 == m2 == 1:
        return _sign(v1 - v2)
    return _sign(v1 ** m2 - v2 ** m1)


def radical_ratio(r1: Radius, r2: Radius) -> Fraction | None:
    """Rational ``t`` with ``r2 == t * r1``, or None if the radii are incommensurable."""
    v1, m1 = radius_power(r1)
    v2, m2 = radius_power(r2)
    L = m1 * m2 // _gcd(m1, m2)
    return _exact_root(v2 ** (L // m2) / v1 ** (L // m1), L)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def radius_enclosure(r: Radius, bits: int) -> tuple[Fraction, Fraction]:
    """Dyadic ``lo <= r <= hi`` with ``hi - lo <= 2**-bits``."""
    v, m = radius_power(r)
    scale = 1 << bits
    n = v.numerator * scale ** m // v.denominator
    k = integer_root(n, m)
    lo = Fraction(k, scale)
    return lo, lo if k ** m * v.denominator == v.numerator * scale ** m else lo + Fraction(1, scale)
