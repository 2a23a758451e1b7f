"""Radial weights, their monomial envelopes, and criteria for the
differentiation and integration operators on growth spaces of analytic
functions on the disk and the plane."""

from .criteria import (
    Criterion,
    Status,
    TailConfig,
    Verdict,
    check_D_disk_weighted_target,
    check_D_self_plane,
    check_differentiation_necessary,
    check_differentiation_sufficient_disk,
    check_differentiation_sufficient_plane,
    check_integration_bounded,
    check_integration_compact,
    doubling_constant,
)
from .envelope import (
    MonomialEnvelope,
    WeightTable,
    associated_weight,
    legendre_conjugate,
    log_envelope,
    log_envelope_integral,
    monomial_coefficients,
    sandwich_constants,
)
from .expr import WeightSyntaxError, parse_weight_expr
from .series import (
    CircleQuadrature,
    Operator,
    PowerSeries,
    apply_D,
    apply_J,
    empirical_operator_norm,
    envelope_series,
    hardy_convexity_check,
    mp_mean,
    tail_series,
)
from .weights import Domain, EvaluationGrid, WeightSpec, build_grid, default_grid, log_transform, validate_weight

__version__ = "0.1.0"
