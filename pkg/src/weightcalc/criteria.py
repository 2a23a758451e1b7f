"""Boundedness and compactness tests for integration and differentiation.

Every test reduces to a ratio ``numerator(r) / denominator(r)`` sampled on a
grid. A finite grid cannot settle a limit statement, so each verdict is read
from the supremum of the ratio together with the regression slope of its
logarithm over the last quarter of the grid (against the grid coordinate).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .envelope import WeightTable, log_envelope_integral
from .reports import csv_text, decode_float, encode_float, format_float, format_log_value
from .weights import Domain, EvaluationGrid, WeightSpec, default_grid, log_transform

__all__ = [
    "Criterion",
    "Status",
    "GridInfo",
    "Evidence",
    "Verdict",
    "TailConfig",
    "classify_tail",
    "check_integration_bounded",
    "check_integration_compact",
    "doubling_constant",
    "check_differentiation_necessary",
    "check_differentiation_sufficient_disk",
    "check_differentiation_sufficient_plane",
    "check_D_self_plane",
    "check_D_disk_weighted_target",
]


class Criterion(str, enum.Enum):
    J_BOUNDED = "J_BOUNDED"
    J_COMPACT = "J_COMPACT"
    D_NECESSARY = "D_NECESSARY"
    D_SUFF_DISK = "D_SUFF_DISK"
    D_SUFF_PLANE = "D_SUFF_PLANE"
    D_SELF_PLANE = "D_SELF_PLANE"
    D_DISK_TARGET = "D_DISK_TARGET"
    DOUBLING = "DOUBLING"


class Status(str, enum.Enum):
    SATISFIED = "SATISFIED"
    VIOLATED = "VIOLATED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class TailConfig:
    slope_threshold: float = 0.05
    tail_fraction: float = 0.25
    min_tail_points: int = 4
    # compactness: ratio tail must fall below this ...
    compact_final: float = 1e-6
    # ... and a flat tail above this counts as bounded away from zero
    compact_floor: float = 1e-3
    doubling_window: int = 8


DEFAULT_TAIL = TailConfig()

UNKNOWN_FACTOR_NOTE = (
    "operator-norm bound carries an unquantified p-dependent factor from the "
    "Cauchy-type estimate of M_p(f', r); only the weight inequality constant is reported"
)


@dataclass(frozen=True)
class GridInfo:
    domain: str
    n_points: int
    extent: float

    @classmethod
    def of(cls, grid: EvaluationGrid) -> "GridInfo":
        return cls(grid.domain.value, grid.n_points, float(grid.extent))


@dataclass(frozen=True, eq=False)
class Evidence:
    """Per-point criterion ratio, stored as logarithms."""

    r: np.ndarray
    log_numerator: np.ndarray
    log_denominator: np.ndarray

    @property
    def log_ratio(self) -> np.ndarray:
        return self.log_numerator - self.log_denominator

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_ratio)

    def csv(self) -> str:
        rows = (
            (format_float(r), format_log_value(n), format_log_value(d), format_log_value(n - d))
            for r, n, d in zip(self.r, self.log_numerator, self.log_denominator)
        )
        return csv_text(["r", "numerator", "denominator", "ratio"], rows)


def _encode(value):
    if isinstance(value, float):
        return encode_float(value)
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    return value


def _decode(value):
    if isinstance(value, str) and value in ("inf", "-inf", "nan"):
        return float(value)
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


@dataclass(frozen=True)
class Verdict:
    criterion: Criterion
    status: Status
    constant: float
    tail_slope: Optional[float]
    p: Optional[float]
    grid: Optional[GridInfo]
    details: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    evidence_csv: Optional[str] = None
    evidence: Optional[Evidence] = field(default=None, compare=False, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "criterion": self.criterion.value,
            "status": self.status.value,
            "constant": encode_float(self.constant),
            "tail_slope": encode_float(self.tail_slope),
            "p": encode_float(self.p),
            "grid": None
            if self.grid is None
            else {"domain": self.grid.domain, "n_points": self.grid.n_points, "extent": self.grid.extent},
            "evidence_csv": self.evidence_csv,
            "details": {k: _encode(v) for k, v in self.details.items()},
            "notes": list(self.notes),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Verdict":
        g = d.get("grid")
        return cls(
            criterion=Criterion(d["criterion"]),
            status=Status(d["status"]),
            constant=decode_float(d["constant"]),
            tail_slope=decode_float(d["tail_slope"]),
            p=decode_float(d["p"]),
            grid=None if g is None else GridInfo(g["domain"], int(g["n_points"]), float(g["extent"])),
            details={k: _decode(v) for k, v in d.get("details", {}).items()},
            notes=tuple(d.get("notes", ())),
            evidence_csv=d.get("evidence_csv"),
        )


def _tail(n: int, cfg: TailConfig) -> slice:
    k = max(cfg.min_tail_points, int(round(n * cfg.tail_fraction)))
    return slice(max(0, n - k), n)


def tail_regression(x: np.ndarray, y: np.ndarray, cfg: TailConfig = DEFAULT_TAIL) -> float:
    sl = _tail(len(x), cfg)
    xt, yt = x[sl], y[sl]
    if not np.all(np.isfinite(yt)) or len(xt) < 2:
        return math.nan
    return float(np.polyfit(xt, yt, 1)[0])


def classify_tail(x: np.ndarray, log_ratio: np.ndarray, cfg: TailConfig = DEFAULT_TAIL):
    """``(status, constant, tail_slope, log_constant)`` for a sampled ratio.

    VIOLATED when the log-ratio still climbs at ``slope_threshold`` or more per
    unit of grid coordinate; SATISFIED when it does not and the supremum is
    finite; INCONCLUSIVE when the samples are not finite.
    """
    slope = tail_regression(x, log_ratio, cfg)
    log_c = float(np.max(log_ratio)) if len(log_ratio) else math.nan
    constant = math.exp(log_c) if log_c < 709.0 else math.inf
    if math.isnan(slope) or not np.all(np.isfinite(log_ratio)):
        return Status.INCONCLUSIVE, constant, slope, log_c
    if slope >= cfg.slope_threshold:
        return Status.VIOLATED, constant, slope, log_c
    if math.isfinite(constant):
        return Status.SATISFIED, constant, slope, log_c
    return Status.INCONCLUSIVE, constant, slope, log_c


def _grid_for(table: WeightTable, grid: Optional[EvaluationGrid]) -> EvaluationGrid:
    if grid is None:
        return table.grid
    if not grid.same_as(table.grid):
        raise ValueError("grid mismatch: table was built on a different grid")
    return grid


def _slope_or_none(x: float) -> Optional[float]:
    return None if x is None or math.isnan(x) else float(x)


# -- integration operator ---------------------------------------------------------


def check_integration_bounded(
    w_table: WeightTable,
    v: WeightSpec,
    grid: Optional[EvaluationGrid] = None,
    cfg: TailConfig = DEFAULT_TAIL,
) -> Verdict:
    """Integral of the associated-weight envelope against ``v``.

    The integral is exact for the piecewise-monomial envelope.
    """
    grid = _grid_for(w_table, grid)
    if v.domain is not grid.domain:
        raise ValueError("grid mismatch: target weight lives on another domain")
    env = w_table.envelope
    num = log_envelope_integral(env, grid.rs)
    den = v.log_eval(grid.rs)
    ev = Evidence(grid.rs, num, den)
    status, c, slope, log_c = classify_tail(grid.xs, ev.log_ratio, cfg)
    notes = []
    if env.sparse:
        notes.append("envelope keeps only grid-active lines; integral is a lower estimate between samples")
    return Verdict(
        Criterion.J_BOUNDED,
        status,
        c,
        _slope_or_none(slope),
        math.inf,
        GridInfo.of(grid),
        {"log_constant": log_c, "final_ratio": float(ev.ratio[-1]), "envelope_sparse": env.sparse},
        tuple(notes),
        evidence=ev,
    )


def check_integration_compact(
    w_table: WeightTable,
    v: WeightSpec,
    grid: Optional[EvaluationGrid] = None,
    cfg: TailConfig = DEFAULT_TAIL,
) -> Verdict:
    """Does the integral ratio tend to zero? Plane only."""
    grid = _grid_for(w_table, grid)
    if grid.domain is not Domain.PLANE:
        raise ValueError("compactness test is defined on the plane")
    bounded = check_integration_bounded(w_table, v, grid, cfg)
    ev = bounded.evidence
    lr = ev.log_ratio
    tail = lr[_tail(len(lr), cfg)]
    decreasing = bool(np.all(np.diff(tail) <= 1e-12 * np.maximum(1.0, np.abs(tail[1:]))))
    final = float(ev.ratio[-1])
    slope = bounded.tail_slope
    notes = []
    if bounded.status is Status.VIOLATED:
        status = Status.VIOLATED
        notes.append("integration operator is not bounded, hence not compact")
    elif decreasing and (final < cfg.compact_final or (slope is not None and slope <= -cfg.slope_threshold)):
        status = Status.SATISFIED
    elif (
        bounded.status is Status.SATISFIED
        and final > cfg.compact_floor
        and slope is not None
        and abs(slope) < cfg.slope_threshold
    ):
        status = Status.VIOLATED
        notes.append("ratio tail is flat and bounded away from zero")
    else:
        status = Status.INCONCLUSIVE
    return Verdict(
        Criterion.J_COMPACT,
        status,
        bounded.constant,
        slope,
        math.inf,
        GridInfo.of(grid),
        {
            "final_ratio": final,
            "tail_decreasing": decreasing,
            "bounded_status": bounded.status.value,
            "envelope_sparse": bounded.details["envelope_sparse"],
        },
        tuple(notes) + bounded.notes,
        evidence=ev,
    )


# -- doubling ---------------------------------------------------------------------


def doubling_constant(w: WeightSpec, n_max: int = 40, cfg: TailConfig = DEFAULT_TAIL) -> Verdict:
    """Dyadic ratios ``w(1 - 2^{-n-1}) / w(1 - 2^{-n})`` for ``n = 0..n_max``."""
    if w.domain is not Domain.DISK:
        raise ValueError("doubling is defined for weights on the disk")
    if n_max < 8:
        raise ValueError("n_max must be at least 8")
    notes = []
    k = np.arange(n_max + 2)
    r = 1.0 - np.ldexp(1.0, -k)
    lw = w.log_eval(r)
    with np.errstate(invalid="ignore"):
        log_rho = lw[1:] - lw[:-1]
    ok = np.isfinite(log_rho) & (r[1:] < 1.0)
    if not ok.all():
        last = int(np.argmin(ok)) - 1
        if last < cfg.doubling_window:
            raise ValueError(f"weight cannot be evaluated on enough dyadic radii (n <= {last})")
        notes.append(f"evaluation failed beyond n = {last}; n_max truncated")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
        n_max = last
        log_rho = log_rho[: n_max + 1]
    idx = np.arange(n_max + 1)
    window = log_rho[-cfg.doubling_window :]
    steps = np.diff(window)
    tol = 1e-9 * np.maximum(1.0, np.abs(window[1:]))
    if np.all(steps > tol):
        status = Status.VIOLATED
    elif np.all(steps <= tol):
        status = Status.SATISFIED
    else:
        status = Status.INCONCLUSIVE
    log_d = float(np.max(log_rho))
    slope = float(np.polyfit(idx[-cfg.doubling_window :], window, 1)[0])
    ev = Evidence(r[: n_max + 1], lw[1 : n_max + 2], lw[: n_max + 1])
    return Verdict(
        Criterion.DOUBLING,
        status,
        math.exp(log_d) if log_d < 709.0 else math.inf,
        slope,
        None,
        None,
        {"log_constant": log_d, "n_max": int(n_max), "log_ratios": [float(x) for x in log_rho]},
        tuple(notes),
        evidence=ev,
    )


# -- differentiation operator -------------------------------------------------------


def check_differentiation_necessary(
    w_table: WeightTable,
    v_table: WeightTable,
    p: float,
    cfg: TailConfig = DEFAULT_TAIL,
) -> Verdict:
    """Right derivative of the source envelope against the target envelope."""
    grid = w_table.grid
    if not grid.same_as(v_table.grid):
        raise ValueError("grid mismatch: tables were built on different grids")
    num = w_table.log_right_derivative[1:]
    den = v_table.log_values[1:]
    ev = Evidence(grid.rs, num, den)
    keep = np.isfinite(num)
    if p < 1:
        return Verdict(
            Criterion.D_NECESSARY,
            Status.INCONCLUSIVE,
            math.nan,
            None,
            float(p),
            GridInfo.of(grid),
            {"reason": "no necessary condition available for p < 1"},
            ("no necessary condition available for p < 1",),
            evidence=ev,
        )
    status, c, slope, log_c = classify_tail(grid.xs[keep], ev.log_ratio[keep], cfg)
    notes = []
    convex = w_table.envelope.log_convex and v_table.envelope.log_convex
    if status is Status.VIOLATED and not convex:
        status = Status.INCONCLUSIVE
        notes.append("weights are not log-convex; envelope is only a one-sided proxy for the associated weight")
    return Verdict(
        Criterion.D_NECESSARY,
        status,
        c,
        _slope_or_none(slope),
        float(p),
        GridInfo.of(grid),
        {"log_constant": log_c, "log_convex": convex},
        tuple(notes),
        evidence=ev,
    )


def check_differentiation_sufficient_disk(
    w: WeightSpec,
    v: WeightSpec,
    grid: Optional[EvaluationGrid] = None,
    cfg: TailConfig = DEFAULT_TAIL,
) -> Verdict:
    """``w((1 + r) / 2) <= C (1 - r) v(r)`` on the disk; sufficient for every p > 0."""
    if w.domain is not Domain.DISK or v.domain is not Domain.DISK:
        raise ValueError("disk test needs disk weights")
    grid = grid or default_grid(Domain.DISK)
    rs = grid.rs
    num = w.log_eval(0.5 * (1.0 + rs))
    den = np.log1p(-rs) + v.log_eval(rs)
    ev = Evidence(rs, num, den)
    ok = np.isfinite(ev.log_ratio)
    notes = [UNKNOWN_FACTOR_NOTE]
    if not ok.all():
        notes.append(f"evaluation failed at {int((~ok).sum())} radii near r = 1; tail truncated")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
        ev = Evidence(rs[ok], num[ok], den[ok])
    status, c, slope, log_c = classify_tail(grid.xs[ok], ev.log_ratio, cfg)
    return Verdict(
        Criterion.D_SUFF_DISK,
        status,
        c,
        _slope_or_none(slope),
        None,
        GridInfo.of(grid),
        {"log_constant": log_c, "all_p": True},
        tuple(notes),
        evidence=ev,
    )


def check_differentiation_sufficient_plane(
    w: WeightSpec,
    v: WeightSpec,
    grid: Optional[EvaluationGrid] = None,
    cfg: TailConfig = DEFAULT_TAIL,
) -> Verdict:
    """``w(1 + r) <= C v(r)`` on the plane; sufficient for every p > 0."""
    if w.domain is not Domain.PLANE or v.domain is not Domain.PLANE:
        raise ValueError("plane test needs plane weights")
    grid = grid or default_grid(Domain.PLANE)
    rs = grid.rs
    ev = Evidence(rs, w.log_eval(1.0 + rs), v.log_eval(rs))
    status, c, slope, log_c = classify_tail(grid.xs, ev.log_ratio, cfg)
    return Verdict(
        Criterion.D_SUFF_PLANE,
        status,
        c,
        _slope_or_none(slope),
        None,
        GridInfo.of(grid),
        {"log_constant": log_c, "all_p": True},
        (UNKNOWN_FACTOR_NOTE,),
        evidence=ev,
    )


def check_D_self_plane(w_table: WeightTable, w: WeightSpec, p: float, cfg: TailConfig = DEFAULT_TAIL) -> Verdict:
    """Differentiation on ``H_w^p`` of the plane.

    (i) ``log w_hat(r) <= C r`` and (ii) ``w_hat'(r) <= C w(r)`` for ``r >= 1``.
    For ``p >= 1`` both hold exactly when the operator is bounded; for
    ``p < 1`` only the positive direction is available. The implication
    (i) => (ii) is checked on every run.
    """
    grid = w_table.grid
    if grid.domain is not Domain.PLANE or w.domain is not Domain.PLANE:
        raise ValueError("self-map test is defined on the plane")
    sel = grid.rs >= 1.0
    rs, xs = grid.rs[sel], grid.xs[sel]
    lv = w_table.log_values[1:][sel]
    ratio_i = lv / rs
    with np.errstate(divide="ignore"):
        log_i = np.log(np.maximum(ratio_i, np.finfo(float).tiny))
    st_i, _, slope_i, _ = classify_tail(xs, log_i, cfg)
    c_i = float(np.max(ratio_i))
    if st_i is Status.SATISFIED and not math.isfinite(c_i):
        st_i = Status.INCONCLUSIVE

    ev_ii = Evidence(rs, w_table.log_right_derivative[1:][sel], w.log_eval(rs))
    st_ii, c_ii, slope_ii, log_c_ii = classify_tail(xs, ev_ii.log_ratio, cfg)

    implication = not (st_i is Status.SATISFIED and st_ii is not Status.SATISFIED)
    notes = []
    if st_i is Status.SATISFIED and st_ii is Status.SATISFIED:
        status = Status.SATISFIED
    elif st_i is Status.VIOLATED and st_ii is Status.VIOLATED:
        status = Status.VIOLATED
    else:
        status = Status.INCONCLUSIVE
    if not implication:
        status = Status.INCONCLUSIVE
        notes.append("implication (i) => (ii) failed numerically")
    if p < 1 and status is Status.VIOLATED:
        status = Status.INCONCLUSIVE
        notes.append("necessity is not available for p < 1")
    if not w_table.envelope.log_convex:
        notes.append("weight is not log-convex; the envelope stands in for the associated weight")
    ev_i = Evidence(rs, np.log(np.abs(lv)), np.log(rs))
    return Verdict(
        Criterion.D_SELF_PLANE,
        status,
        c_i,
        _slope_or_none(slope_i),
        float(p),
        GridInfo.of(grid),
        {
            "constant_i": c_i,
            "status_i": st_i.value,
            "tail_slope_i": _slope_or_none(slope_i),
            "constant_ii": c_ii,
            "log_constant_ii": log_c_ii,
            "status_ii": st_ii.value,
            "tail_slope_ii": _slope_or_none(slope_ii),
            "implication_i_implies_ii": implication,
        },
        tuple(notes),
        evidence=ev_i,
    )


def check_D_disk_weighted_target(
    w: WeightSpec,
    p: float,
    n_max: int = 40,
    grid: Optional[EvaluationGrid] = None,
    cfg: TailConfig = DEFAULT_TAIL,
) -> Verdict:
    """Differentiation ``H_w^p -> H_v^p`` on the disk with ``v = w / (1 - r)``.

    Doubling is sufficient for every ``p > 0``; for log-convex ``w`` and
    ``p >= 1`` it is also necessary.
    """
    if w.domain is not Domain.DISK:
        raise ValueError("weighted-target test is defined on the disk")
    dbl = doubling_constant(w, n_max, cfg)
    lt = log_transform(w, grid or default_grid(Domain.DISK))
    notes = list(dbl.notes)
    if dbl.status is Status.SATISFIED:
        status = Status.SATISFIED
        notes.append("doubling weight: bounded for every 0 < p < inf")
    elif dbl.status is Status.VIOLATED and lt.convex and p >= 1:
        status = Status.VIOLATED
    else:
        status = Status.INCONCLUSIVE
        if dbl.status is Status.VIOLATED:
            notes.append("not doubling, but necessity needs a log-convex weight and p >= 1")
    details = dict(dbl.details)
    details.update({"doubling_status": dbl.status.value, "log_convex": lt.convex, "target": f"({w.label})/(1-r)"})
    return Verdict(
        Criterion.D_DISK_TARGET,
        status,
        dbl.constant,
        dbl.tail_slope,
        float(p),
        GridInfo.of(lt.grid),
        details,
        tuple(notes),
        evidence=dbl.evidence,
    )
