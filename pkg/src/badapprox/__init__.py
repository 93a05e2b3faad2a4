"""Exact and Monte Carlo experiments on badly approximable points of ball systems."""

from .errors import InvariantViolation, PrecisionError
from .exact import Radical, as_fraction, format_rational
from .geometry import (
    Ball,
    Cube,
    IntervalUnion,
    ball_contains_point,
    ball_in_enlargement,
    balls_intersect,
    cube_ball_inclusion_check,
    interval_union_from_balls,
    interval_union_measure,
    scale_ball,
)
from .vitali import (
    Lemma1Bound,
    VitaliResult,
    greedy_disjoint_subfamily,
    lemma1_certificate,
    lemma1_ratio_1d,
    verify_enlarged_cover,
)
from .systems import (
    BadWitness,
    BallSystem,
    BNMParams,
    classical_system,
    explicit_system,
    hit_count,
    shrinking_locally_report,
    tail_survives,
    z2_example_system,
)
from .diophantine import (
    Approximation,
    QuadraticSurd,
    bad_report,
    bad_witness_search,
    cf_expand,
    classical_bad_bridge,
    convergents,
    dirichlet_search,
    parse_real,
    surd,
)
from .measure import (
    MeasureEstimate,
    coverage_fraction_1d_exact,
    local_density_experiment,
    mc_union_measure,
    survivor_fraction,
    survivor_sweep,
)

__version__ = "0.1.0"
