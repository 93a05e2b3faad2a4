"""Lebesgue measure of ball unions: Monte Carlo in any dimension, exact in 1-D.

Monte Carlo sample points are rationals ``lo + (hi - lo) * u / 2**64`` with
``u`` drawn from a seeded PCG64 stream, so membership is decided by the same
exact predicates as the rest of the package.  A float pre-test settles every
point whose distance to a ball boundary is far above rounding error; the rest
fall back to Fraction arithmetic, so counts equal the exact counts.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact import Radical, as_fraction, compare_radii, format_rational
from .geometry import (
    Ball,
    IntervalUnion,
    as_point,
    ball_contains_point,
    ball_in_enlargement,
    interval_union_from_balls,
    scale_ball,
)
from .systems import BallSystem, BNMParams

__all__ = [
    "CONFIDENCE",
    "CHUNK",
    "MeasureEstimate",
    "GridSurvivorReport",
    "DensityReport",
    "hoeffding_half_width",
    "mc_union_measure",
    "mc_fraction_in_ball",
    "coverage_fraction_1d_exact",
    "survivor_fraction",
    "survivor_sweep",
    "local_density_experiment",
    "lemma1_constant",
]

CONFIDENCE = 0.99
# samples per independently seeded chunk; fixed so results do not depend on threads
CHUNK = 1 << 16
_DENOM = 1 << 64
_TWO64 = float(_DENOM)


def hoeffding_half_width(samples: int, confidence: float = CONFIDENCE) -> float:
    """Two-sided Hoeffding half-width for a mean of ``samples`` [0,1] variables."""
    return math.sqrt(math.log(2 / (1 - confidence)) / (2 * samples))


def lemma1_constant(delta, d: int) -> Fraction:
    """``K(delta, d)``: ``delta`` in one dimension, ``(delta/3)**d`` otherwise."""
    delta = as_fraction(delta)
    return delta if d == 1 else (delta / 3) ** d


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    ci_half_width: float
    samples: int
    seed: int
    hits: int = 0
    reference_volume: Fraction = Fraction(1)

    @property
    def fraction(self) -> float:
        return self.hits / self.samples

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "ci_half_width": self.ci_half_width,
            "samples": self.samples,
            "seed": self.seed,
            "hits": self.hits,
            "reference_volume": format_rational(self.reference_volume),
        }


def _box(box) -> tuple:
    box = tuple((as_fraction(a), as_fraction(b)) for a, b in box)
    if any(a >= b for a, b in box):
        raise ValueError("box must have positive volume")
    return box


def _ball_in_box(b: Ball, box) -> bool:
    for c, (lo, hi) in zip(b.center, box):
        for gap in (c - lo, hi - c):
            if gap <= 0 or compare_radii(b.radius, gap) > 0:
                return False
    return True


def _float_tolerance(d2, r: float, scale: float, d: int):
    """Bound on the float error of ``d2 - r**2``; generous by ~3 orders."""
    return 1e-12 * d * (scale * (np.sqrt(d2) + r) + r * r)


def _chunk_points(seed: int, chunk: int, n: int, d: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))
    return rng.integers(0, _DENOM, size=(n, d), dtype=np.uint64)


def _exact_point(u_row, box) -> tuple:
    return tuple(lo + (hi - lo) * Fraction(int(u), _DENOM) for u, (lo, hi) in zip(u_row, box))


def _covered(u: np.ndarray, box, balls: Sequence[Ball]) -> np.ndarray:
    """Exact membership of the sample rows of ``u`` in the union of ``balls``."""
    n, d = u.shape
    lo = np.array([float(a) for a, _ in box])
    width = np.array([float(b - a) for a, b in box])
    x = lo + width * (u.astype(np.float64) / _TWO64)
    scale = float(max(max(abs(a), abs(b)) for a, b in box)) + 1.0
    inside = np.zeros(n, dtype=bool)
    if d == 1 and balls and not any(isinstance(b.radius, Radical) for b in balls):
        return _covered_1d(u, x[:, 0], box, interval_union_from_balls(balls), scale)
    for b in balls:
        todo = np.flatnonzero(~inside)
        if not len(todo):
            break
        c = np.array([float(v) for v in b.center])
        r = float(b.radius)
        d2 = ((x[todo] - c) ** 2).sum(axis=1)
        tol = _float_tolerance(d2, r, scale, d)
        inside[todo[d2 <= r * r - tol]] = True
        for k in todo[np.abs(d2 - r * r) <= tol]:
            if ball_contains_point(b, _exact_point(u[k], box)):
                inside[k] = True
    return inside


def _covered_1d(u, x, box, union: IntervalUnion, scale: float) -> np.ndarray:
    if not len(union):
        return np.zeros(len(x), dtype=bool)
    left = np.array([float(a) for a, _ in union])
    right = np.array([float(b) for _, b in union])
    j = np.searchsorted(left, x, side="right") - 1
    jc = np.clip(j, 0, None)
    inside = (j >= 0) & (x <= right[jc])
    # anything within rounding distance of an endpoint is decided exactly
    tol = 1e-12 * scale
    near = (np.abs(x - left[jc]) <= tol) | (np.abs(x - right[jc]) <= tol)
    nxt = np.clip(j + 1, 0, len(left) - 1)
    near |= np.abs(x - left[nxt]) <= tol
    for k in np.flatnonzero(near):
        p = _exact_point(u[k], box)[0]
        inside[k] = any(a <= p <= b for a, b in union.components)
    return inside


def _count_hits(seed, samples, box, balls, threads) -> int:
    d = len(box)
    chunks = [(k, min(CHUNK, samples - k * CHUNK)) for k in range(-(-samples // CHUNK))]

    def work(item):
        k, n = item
        return int(_covered(_chunk_points(seed, k, n, d), box, balls).sum())

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return sum(pool.map(work, chunks))
    return sum(map(work, chunks))


def mc_union_measure(balls: Sequence[Ball], box, samples: int, seed: int, threads: int = 1) -> MeasureEstimate:
    """Monte Carlo estimate of the Lebesgue measure of ``∪ balls``.

    ``ci_half_width`` is the 99% Hoeffding half-width scaled by the box volume.
    """
    box = _box(box)
    balls = list(balls)
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    for b in balls:
        if b.dim != len(box):
            raise ValueError("ball and box dimensions differ")
        if not _ball_in_box(b, box):
            raise ValueError(f"{b} is not contained in the box")
    vol = math.prod(b - a for a, b in box)
    hits = _count_hits(seed, samples, box, balls, threads)
    return MeasureEstimate(
        float(hits / samples * vol),
        hoeffding_half_width(samples) * float(vol),
        samples,
        seed,
        hits,
        vol,
    )


def mc_fraction_in_ball(families: Sequence[Sequence[Ball]], y, r, samples: int, seed: int) -> list[MeasureEstimate]:
    """Fraction of ``B(y, r)`` covered by each family, on one shared sample.

    Points are drawn uniformly in the bounding cube and those outside
    ``B(y, r)`` are rejected; ``samples`` counts accepted points.
    """
    y = as_point(y)
    r = as_fraction(r)
    d = len(y)
    box = tuple((c - r, c + r) for c in y)
    probe = Ball(y, r)
    hits = [0] * len(families)
    accepted = 0
    chunk = 0
    while accepted < samples:
        u = _chunk_points(seed, chunk, CHUNK, d)
        chunk += 1
        keep = np.flatnonzero(_covered(u, box, [probe]))[: samples - accepted]
        u = u[keep]
        accepted += len(keep)
        for j, fam in enumerate(families):
            hits[j] += int(_covered(u, box, fam).sum()) if fam else 0
    h = hoeffding_half_width(samples)
    return [MeasureEstimate(k / samples, h, samples, seed, k, Fraction(1)) for k in hits]


def _tail(s: BallSystem, start: int, stop: int, kappa=1) -> list[Ball]:
    kappa = as_fraction(kappa)
    return [b if kappa == 1 else scale_ball(b, kappa) for _, b in s.balls(start, stop)]


def coverage_fraction_1d_exact(s: BallSystem, kappa, start: int, index_bound: int, region) -> Fraction:
    """Exact ``|region ∩ ∪_{start<=i<=bound} B(x_i, kappa r_i)| / |region|``."""
    if s.dim != 1:
        raise ValueError("exact coverage is one-dimensional")
    kappa = as_fraction(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    lo, hi = (as_fraction(v) for v in region)
    if lo >= hi:
        raise ValueError("region must be a nonempty interval")
    u = interval_union_from_balls(_tail(s, start, index_bound, kappa)).clip(lo, hi)
    return u.measure / (hi - lo)


# --- grid survivors ---------------------------------------------------------


@dataclass(frozen=True)
class GridSurvivorReport:
    resolution: int
    survivors: int
    total: int
    params: BNMParams
    index_bound: int

    @property
    def surviving_fraction(self) -> Fraction:
        return Fraction(self.survivors, self.total)

    def to_json(self) -> dict:
        return {
            "resolution": self.resolution,
            "survivors": self.survivors,
            "total": self.total,
            "surviving_fraction": format_rational(self.surviving_fraction),
            "N": self.params.N,
            "M": self.params.M,
            "index_bound": self.index_bound,
        }


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


class _Grid:
    """Grid points ``lo + (hi - lo) * k / resolution`` for ``k = 0..resolution-1``."""

    def __init__(self, region, resolution: int):
        if resolution < 2:
            raise ValueError("resolution must be >= 2")
        self.region = _box(region)
        self.res = resolution
        self.covered = np.zeros((resolution,) * len(self.region), dtype=bool)

    def index_range(self, axis: int, a: Fraction, b: Fraction) -> tuple[int, int]:
        lo, hi = self.region[axis]
        step = (hi - lo) / self.res
        return max(_ceil((a - lo) / step), 0), min(_floor((b - lo) / step), self.res - 1)

    def coordinate(self, axis: int, k: int) -> Fraction:
        lo, hi = self.region[axis]
        return lo + (hi - lo) * Fraction(k, self.res)

    def mark(self, ball: Ball) -> None:
        d = len(self.region)
        if d == 1 and not isinstance(ball.radius, Radical):
            c, r = ball.center[0], ball.radius
            k0, k1 = self.index_range(0, c - r, c + r)
            if k0 <= k1:
                self.covered[k0 : k1 + 1] = True
            return
        # candidates from a slightly widened bounding box, then exact tests
        rf = Fraction(float(ball.radius)) * Fraction(1000001, 1000000) + Fraction(1, 10 ** 15)
        ranges = []
        for axis, c in enumerate(ball.center):
            k0, k1 = self.index_range(axis, c - rf, c + rf)
            if k0 > k1:
                return
            ranges.append(np.arange(k0, k1 + 1))
        mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d)
        mesh = mesh[~self.covered[tuple(mesh.T)]]
        if not len(mesh):
            return
        lo = np.array([float(a) for a, _ in self.region])
        step = np.array([float(b - a) / self.res for a, b in self.region])
        x = lo + mesh * step
        cf = np.array([float(v) for v in ball.center])
        d2 = ((x - cf) ** 2).sum(axis=1)
        r = float(ball.radius)
        scale = float(max(max(abs(a), abs(b)) for a, b in self.region)) + 1.0
        tol = _float_tolerance(d2, r, scale, d)
        hit = mesh[d2 <= r * r - tol]
        self.covered[tuple(hit.T)] = True
        for row in mesh[np.abs(d2 - r * r) <= tol]:
            p = tuple(self.coordinate(axis, int(k)) for axis, k in enumerate(row))
            if ball_contains_point(ball, p):
                self.covered[tuple(row)] = True

    @property
    def survivors(self) -> int:
        return int(self.covered.size - self.covered.sum())


def survivor_sweep(
    s: BallSystem,
    params: BNMParams,
    index_bounds: Sequence[int],
    resolution: int,
    region,
) -> list[GridSurvivorReport]:
    """Survivor reports at each of the increasing ``index_bounds``, sharing one scan."""
    grid = _Grid(region, resolution)
    kappa = params.kappa
    reports = []
    done = params.N - 1
    for bound in index_bounds:
        if bound < done:
            raise ValueError("index bounds must be non-decreasing")
        for _, b in s.balls(done + 1, bound):
            grid.mark(scale_ball(b, kappa))
        done = max(done, bound)
        reports.append(GridSurvivorReport(resolution, grid.survivors, grid.covered.size, params, bound))
    return reports


def survivor_fraction(s: BallSystem, params: BNMParams, index_bound: int, resolution: int, region) -> GridSurvivorReport:
    """Grid points avoiding ``B(x_i, r_i / M)`` for every ``i`` in ``[N, index_bound]``.

    A truncated, discretised view of ``B(N, M) ∩ region``; increasing the
    bound can only remove survivors.
    """
    return survivor_sweep(s, params, [index_bound], resolution, region)[0]


# --- local density ----------------------------------------------------------


@dataclass
class DensityReport:
    M: int
    dim: int
    K: Fraction
    tail: tuple  # (first index, last index)
    contained: int  # tail balls lying inside B(y, r)
    coverage: Fraction | None = None  # exact, d = 1
    coverage_scaled: Fraction | None = None
    clipped_coverage: Fraction | None = None
    clipped_coverage_scaled: Fraction | None = None
    mc: list = field(default_factory=list)  # [unscaled, scaled] estimates

    @property
    def exact_holds(self) -> bool | None:
        if self.coverage is None:
            return None
        return self.coverage_scaled >= self.K * self.coverage

    @property
    def density_bound(self) -> Fraction | None:
        """Complement fraction ``1 - c_M``: an upper value for the density of B(N,M)."""
        return None if self.coverage_scaled is None else 1 - self.coverage_scaled

    def mc_holds(self, slack: float = 3.0) -> bool:
        c, cm = self.mc
        return cm.fraction >= float(self.K) * c.fraction - slack * cm.ci_half_width

    def to_json(self) -> dict:
        def fr(x):
            return None if x is None else format_rational(x)

        return {
            "M": self.M,
            "dim": self.dim,
            "K": fr(self.K),
            "tail": list(self.tail),
            "contained": self.contained,
            "coverage": fr(self.coverage),
            "coverage_scaled": fr(self.coverage_scaled),
            "clipped_coverage": fr(self.clipped_coverage),
            "clipped_coverage_scaled": fr(self.clipped_coverage_scaled),
            "exact_holds": self.exact_holds,
            "density_bound": fr(self.density_bound),
            "mc": [e.to_json() for e in self.mc],
            "mc_holds": self.mc_holds() if self.mc else None,
        }


def local_density_experiment(
    s: BallSystem,
    params: BNMParams,
    y,
    r,
    tail_start: int,
    index_bound: int,
    samples: int = 0,
    seed: int = 0,
) -> DensityReport:
    """Per-scale form of the density estimate at ``y``.

    The tail ``[tail_start, index_bound]`` is restricted to the balls lying
    inside ``B(y, r)``; Lemma 1 then forces the ``1/M``-scaled sub-family to
    cover at least ``K(1/M, d)`` times what the unscaled one covers.  One
    dimension is exact; ``samples > 0`` adds a Monte Carlo estimate.
    """
    if tail_start < params.N:
        raise ValueError("tail_start must be >= N")
    y = as_point(y)
    r = as_fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if len(y) != s.dim:
        raise ValueError("dimension mismatch")
    kappa = params.kappa
    tail = [b for _, b in s.balls(tail_start, index_bound)]
    inside = [b for b in tail if ball_in_enlargement(b, y, r)]
    scaled = [scale_ball(b, kappa) for b in inside]
    report = DensityReport(params.M, s.dim, lemma1_constant(kappa, s.dim), (tail_start, index_bound), len(inside))
    if s.dim == 1:
        lo, hi = y[0] - r, y[0] + r
        size = 2 * r
        report.coverage = interval_union_from_balls(inside).measure / size
        report.coverage_scaled = interval_union_from_balls(scaled).measure / size
        report.clipped_coverage = interval_union_from_balls(tail).clip(lo, hi).measure / size
        report.clipped_coverage_scaled = (
            interval_union_from_balls(scale_ball(b, kappa) for b in tail).clip(lo, hi).measure / size
        )
    if samples:
        report.mc = mc_fraction_in_ball([inside, scaled], y, r, samples, seed)
    return report
