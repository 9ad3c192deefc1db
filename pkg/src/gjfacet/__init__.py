"""Exact construction and verification of the psi_i two-slope facets of the
one-row infinite group problem, and certified evaluation of their limit."""

from .construct import (
    EpsilonSchedule,
    build,
    gamma_i,
    gmi,
    lambda_mu,
    ladder,
    reduced_parameters,
    standard_schedule,
    step,
    structure_report,
    verify_recursive_decomposition,
)
from .limit import (
    LimitEvaluation,
    LimitParams,
    convergence_constant,
    density_gap,
    eval_limit,
    facet_evidence,
    gamma_limit,
    locate,
    negative_segments,
    non_pwl_evidence,
)
from .pwl import (
    PwlFunction,
    SegmentTag,
    Sign,
    add,
    distinct_slopes,
    evaluate,
    normalize,
    scale,
    slopes,
    sup_diff_at_breakpoints,
)
from .verify import (
    Property,
    VerificationReport,
    Witness,
    WitnessKind,
    additivity_vertices,
    check_minimal,
    check_subadditive,
    check_symmetric,
    check_two_slope_facet,
    check_valid,
    delta,
)

__version__ = "0.1.0"
