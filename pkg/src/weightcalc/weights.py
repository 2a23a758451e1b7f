"""Radial weights, evaluation grids and the logarithmic transform."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .expr import Expr, eval_signed_log, parse_weight_expr

__all__ = [
    "Domain",
    "WeightSpec",
    "EvaluationGrid",
    "LogTransform",
    "ValidationConfig",
    "CheckResult",
    "ValidationReport",
    "WeightValidationError",
    "build_grid",
    "default_grid",
    "validate_weight",
    "log_transform",
    "second_differences",
]


class Domain(enum.Enum):
    DISK = "disk"
    PLANE = "plane"

    @property
    def rmax(self) -> float:
        return 1.0 if self is Domain.DISK else math.inf

    @classmethod
    def parse(cls, text: str) -> "Domain":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown domain {text!r}; expected 'disk' or 'plane'") from None


class WeightValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        super().__init__(f"weight {report.label!r} failed validation: {failed}")


@dataclass(frozen=True)
class WeightSpec:
    """A radial weight given by an expression in ``r`` on a domain."""

    domain: Domain
    expr: Expr
    label: str

    @classmethod
    def parse(cls, text: str, domain: Domain | str) -> "WeightSpec":
        if isinstance(domain, str):
            domain = Domain.parse(domain)
        return cls(domain, parse_weight_expr(text), text)

    def log_eval(self, r) -> np.ndarray:
        """``log w(r)``; NaN where the expression is non-positive or undefined."""
        s, l = eval_signed_log(self.expr, r)
        return np.where(s > 0, l, np.nan)

    def __call__(self, r) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_eval(r))


@dataclass(frozen=True, eq=False)
class EvaluationGrid:
    """Radii uniform in the transform coordinate.

    ``xs`` is ``log r`` on the plane and ``log 1/(1-r)`` on the disk. The origin
    is not part of ``xs``/``rs``; it is sampled separately when
    ``includes_origin`` is set.
    """

    domain: Domain
    xs: np.ndarray
    rs: np.ndarray
    extent: float
    includes_origin: bool = True

    def __post_init__(self):
        xs, rs = np.asarray(self.xs, float), np.asarray(self.rs, float)
        if len(xs) < 16 or len(xs) != len(rs):
            raise ValueError("grid needs at least 16 matching samples")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(rs) <= 0):
            raise ValueError("grid coordinates must be strictly increasing")
        if rs[0] <= 0 or rs[-1] >= self.domain.rmax:
            raise ValueError("grid radii must lie inside (0, rmax)")
        xs.setflags(write=False)
        rs.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "rs", rs)

    @property
    def n_points(self) -> int:
        return len(self.xs)

    @property
    def log_r(self) -> np.ndarray:
        return np.log(self.rs)

    def radius_of(self, x):
        x = np.asarray(x, float)
        return np.exp(x) if self.domain is Domain.PLANE else -np.expm1(-x)

    def same_as(self, other: "EvaluationGrid") -> bool:
        return (
            self.domain is other.domain
            and self.n_points == other.n_points
            and np.array_equal(self.rs, other.rs)
        )


def build_grid(domain: Domain, n_points: int, extent: float) -> EvaluationGrid:
    """Grid uniform in the transform coordinate.

    On the plane ``extent`` is the largest radius and ``xs`` is uniform on
    ``[-log extent, log extent]``. On the disk ``extent`` is the largest value
    of ``log 1/(1-r)`` and ``xs`` is uniform on ``(0, extent]``.
    """
    if n_points < 16:
        raise ValueError(f"too few points: {n_points} < 16")
    if not (extent > 0 and math.isfinite(extent)):
        raise ValueError(f"invalid extent {extent!r}")
    if domain is Domain.PLANE:
        if extent <= 1:
            raise ValueError("plane extent is the largest radius and must exceed 1")
        half = math.log(extent)
        xs = np.linspace(-half, half, n_points)
        rs = np.exp(xs)
    else:
        xs = np.linspace(0.0, extent, n_points + 1)[1:]
        rs = -np.expm1(-xs)
        if rs[-1] >= 1.0 or np.any(np.diff(rs) <= 0):
            raise ValueError(f"disk extent {extent} is beyond double resolution near r = 1")
    return EvaluationGrid(domain, xs, rs, float(extent))


DEFAULT_PLANE_EXTENT = math.exp(8.0)
DEFAULT_DISK_EXTENT = 18.42
DEFAULT_POINTS = 512


def default_grid(domain: Domain, n_points: int = DEFAULT_POINTS) -> EvaluationGrid:
    extent = DEFAULT_PLANE_EXTENT if domain is Domain.PLANE else DEFAULT_DISK_EXTENT
    return build_grid(domain, n_points, extent)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class ValidationConfig:
    monotone_rtol: float = 1e-12
    unbounded_factor: float = 10.0
    tail_fraction: float = 0.25
    # log-log slope of log w against log r that certifies super-polynomial growth
    superpoly_slope: float = 1.05


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    witness_r: Optional[float] = None


@dataclass(frozen=True)
class ValidationReport:
    label: str
    domain: Domain
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def raise_for_status(self):
        if not self.ok:
            raise WeightValidationError(self)


def _tail_slice(n: int, fraction: float) -> slice:
    k = max(4, int(round(n * fraction)))
    return slice(max(0, n - k), n)


def validate_weight(
    spec: WeightSpec, grid: EvaluationGrid, config: ValidationConfig = ValidationConfig()
) -> ValidationReport:
    """Check the weight axioms on ``grid`` (plus the origin).

    Every check is reported; a failing check carries the first offending radius.
    """
    if grid.domain is not spec.domain:
        raise ValueError("grid domain does not match the weight domain")
    rs = np.concatenate([[0.0], grid.rs])
    s, logw = eval_signed_log(spec.expr, rs)
    checks = []

    bad = ~np.isfinite(logw) & ~((s == 0) & np.isneginf(logw))
    if bad.any():
        i = int(np.argmax(bad))
        checks.append(CheckResult("finite", False, f"evaluation failed at r={rs[i]:.6g}", float(rs[i])))
    else:
        checks.append(CheckResult("finite", True))

    nonpos = ~(s > 0) & ~bad
    if nonpos.any():
        i = int(np.argmax(nonpos))
        checks.append(CheckResult("positive", False, f"w({rs[i]:.6g}) <= 0", float(rs[i])))
    else:
        checks.append(CheckResult("positive", True))

    usable = (s > 0) & np.isfinite(logw)
    lw = np.where(usable, logw, np.nan)
    drops = np.diff(lw) < math.log1p(-config.monotone_rtol)
    if drops.any():
        i = int(np.argmax(drops)) + 1
        checks.append(CheckResult("non_decreasing", False, f"w decreases at r={rs[i]:.6g}", float(rs[i])))
    elif not usable.all():
        checks.append(CheckResult("non_decreasing", False, "not evaluable on the whole grid"))
    else:
        checks.append(CheckResult("non_decreasing", True))

    growth = lw[-1] - lw[0]
    if not (growth >= math.log(config.unbounded_factor)):
        checks.append(
            CheckResult(
                "unbounded",
                False,
                f"w(r_last)/w(0) = exp({growth:.4g}) below factor {config.unbounded_factor}",
                float(rs[-1]),
            )
        )
    else:
        checks.append(CheckResult("unbounded", True))

    if spec.domain is Domain.PLANE:
        checks.append(_superpolynomial_check(grid, lw[1:], config))
    return ValidationReport(spec.label, spec.domain, tuple(checks))


def _superpolynomial_check(grid: EvaluationGrid, lw: np.ndarray, config: ValidationConfig) -> CheckResult:
    # log r = o(log w): the log-log slope of log w against log r must exceed 1
    tail = _tail_slice(grid.n_points, config.tail_fraction)
    x = grid.xs[tail]
    y = lw[tail]
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    if keep.sum() < 4:
        return CheckResult("super_polynomial", False, "tail has too few samples with r > 1 and w > 1", float(grid.rs[-1]))
    slope = float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])
    if slope > config.superpoly_slope:
        return CheckResult("super_polynomial", True, f"tail slope {slope:.4g}")
    return CheckResult(
        "super_polynomial",
        False,
        f"tail slope of log log w against log log r is {slope:.4g} <= {config.superpoly_slope}",
        float(grid.rs[-1]),
    )


# -- logarithmic transform -----------------------------------------------------


def second_differences(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second differences normalised to the local spacing.

    On a uniform grid this is the ordinary ``y[i+1] - 2 y[i] + y[i-1]``.
    """
    slopes = np.diff(y) / np.diff(s)
    return np.diff(slopes) * (s[2:] - s[:-2]) / 2.0


@dataclass(frozen=True, eq=False)
class LogTransform:
    """Samples of ``Phi(s) = log w(e^s)`` on a grid.

    ``xs`` keeps the grid coordinate of each retained sample and ``log_r`` the
    matching ``s = log r``; on the disk these differ. ``phi0`` is ``log w(0)``.
    """

    spec: WeightSpec
    grid: EvaluationGrid
    xs: np.ndarray
    log_r: np.ndarray
    phi: np.ndarray
    phi0: float
    convex: bool
    min_second_difference: float
    dropped: tuple[tuple[float, str], ...] = field(default=())

    def phi_at_x(self, x) -> tuple[np.ndarray, np.ndarray]:
        """``(s, Phi)`` at grid coordinates ``x`` (used for off-grid refinement)."""
        r = self.grid.radius_of(x)
        return np.log(r), self.spec.log_eval(r)


def log_transform(spec: WeightSpec, grid: EvaluationGrid, convexity_tol: float = 1e-9) -> LogTransform:
    if grid.domain is not spec.domain:
        raise ValueError("grid domain does not match the weight domain")
    phi = spec.log_eval(grid.rs)
    phi0 = float(spec.log_eval(0.0)[0])
    ok = np.isfinite(phi)
    dropped = tuple((float(r), "overflow or domain error") for r in grid.rs[~ok])
    xs = grid.xs[ok]
    rs = grid.rs[ok]
    s = np.log(rs)
    phi = phi[ok]
    if len(phi) >= 3:
        d2 = second_differences(s, phi)
        scale = max(1.0, float(np.max(np.abs(phi))))
        m = float(d2.min())
        convex = bool(m >= -convexity_tol * scale)
    else:
        m, convex = 0.0, False
    for a in (xs, s, phi):
        a.setflags(write=False)
    return LogTransform(spec, grid, xs, s, phi, phi0, convex, m, dropped)
