"""Monomial envelopes of radial weights.

For ``Phi(s) = log w(e^s)`` the supporting line of integer slope ``n`` has
intercept ``a_n = -Phi*(n)`` with ``Phi*(n) = sup_s (n s - Phi(s))``. The
envelope ``G(s) = max_n (a_n + n s)`` is the logarithm of
``max_n e^{a_n} r^n``, the largest monomial minorant of ``w``; it is the
computable stand-in for the associated weight and does not depend on ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .reports import csv_text, format_float, format_log_value
from .weights import Domain, EvaluationGrid, LogTransform, WeightSpec

__all__ = [
    "MonomialEnvelope",
    "WeightTable",
    "EnvelopeConsistencyError",
    "SandwichConstant",
    "lower_hull",
    "upper_envelope",
    "legendre_conjugate",
    "conjugates",
    "monomial_coefficients",
    "associated_weight",
    "envelope_right_derivative",
    "sandwich_constants",
    "log_envelope",
    "log_envelope_integral",
    "envelope_csv",
    "table_csv",
]

REFINE_XTOL = 1e-10
SLOPE_MARGIN = 8
MAX_DENSE_LINES = 200_000


class EnvelopeConsistencyError(RuntimeError):
    pass


def lower_hull(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of points sorted by ``s``."""
    hull: list[int] = []
    for i in range(len(s)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b when it is not strictly below the chord a -> i
            if (y[b] - y[a]) * (s[i] - s[a]) >= (y[i] - y[a]) * (s[b] - s[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=np.int64)


def upper_envelope(slopes: np.ndarray, intercepts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lines ``intercepts[k] + slopes[k] * s`` that appear on their pointwise max.

    ``slopes`` must be strictly increasing. Returns the kept indices and the
    breakpoints: line ``keep[j]`` is active on ``[bp[j], bp[j+1])`` with
    ``bp[0] = -inf``.
    """
    keep: list[int] = []
    starts: list[float] = []
    for k in range(len(slopes)):
        a_k, m_k = intercepts[k], slopes[k]
        while keep:
            j = keep[-1]
            x = (intercepts[j] - a_k) / (m_k - slopes[j])
            if x <= starts[-1]:
                keep.pop()
                starts.pop()
            else:
                break
        if keep:
            j = keep[-1]
            starts.append((intercepts[j] - a_k) / (m_k - slopes[j]))
        else:
            starts.append(-math.inf)
        keep.append(k)
    return np.asarray(keep, dtype=np.int64), np.asarray(starts, dtype=float)


def _refine(lt: LogTransform, slopes: np.ndarray, idx: np.ndarray):
    """Ternary search of ``n s - Phi`` between the grid neighbours of ``idx``."""
    last = len(lt.xs) - 1
    lo = lt.xs[np.maximum(idx - 1, 0)].astype(float)
    hi = lt.xs[np.minimum(idx + 1, last)].astype(float)

    def h(x):
        s, p = lt.phi_at_x(x)
        return slopes * s - p

    for _ in range(200):
        if np.all(hi - lo < REFINE_XTOL):
            break
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        go_right = h(m1) < h(m2)
        lo = np.where(go_right, m1, lo)
        hi = np.where(go_right, hi, m2)
    best_x = 0.5 * (lo + hi)
    best = h(best_x)
    for x in (lo, hi):
        v = h(x)
        better = v > best
        best = np.where(better, v, best)
        best_x = np.where(better, x, best_x)
    s, p = lt.phi_at_x(best_x)
    return slopes * s - p, s


def conjugates(lt: LogTransform, slopes, refine: bool = True):
    """``Phi*(n)`` and touch coordinates ``s`` for non-negative integer slopes.

    The grid supremum is read off the lower hull of the samples; it is then
    refined by ternary search between the two grid neighbours of the argmax.
    Slope 0 also sees the origin sample ``log w(0)``; its touch is NaN when
    the origin attains the minimum.
    """
    n = np.asarray(slopes, dtype=float)
    s, phi = lt.log_r, lt.phi
    if len(s) < 2:
        raise ValueError("need at least two samples")
    hull = lower_hull(s, phi)
    hs, hp = s[hull], phi[hull]
    edge = np.diff(hp) / np.diff(hs)
    pos = np.searchsorted(edge, n, side="left")
    idx = hull[pos]
    value = n * s[idx] - phi[idx]
    touch = s[idx].copy()
    if refine:
        rv, rs = _refine(lt, n, idx)
        better = np.isfinite(rv) & (rv > value)
        value = np.where(better, rv, value)
        touch = np.where(better, rs, touch)
    zero = n == 0
    if zero.any():
        m = float(np.min(phi))
        if lt.phi0 <= m:
            value[zero], touch[zero] = -lt.phi0, np.nan
        else:
            value[zero], touch[zero] = -m, s[int(np.argmin(phi))]
    return value, touch


def legendre_conjugate(lt: LogTransform, n: int, refine: bool = True) -> tuple[float, Optional[float]]:
    """``(Phi*(n), t_n)``; ``t_n`` is ``None`` when the touch is at the origin."""
    if n < 0:
        raise ValueError("slope must be non-negative")
    v, t = conjugates(lt, [n], refine)
    t = float(t[0])
    return float(v[0]), (None if math.isnan(t) else t)


@dataclass(frozen=True, eq=False)
class MonomialEnvelope:
    """Supporting lines ``a_n + n s`` of ``Phi`` that form its integer-slope envelope.

    ``touch`` holds ``t_n`` in the ``s = log r`` coordinate (NaN: origin).
    ``breakpoints[j]`` is where line ``j`` becomes active. ``sparse`` marks
    envelopes that keep only lines active at grid points (slope range too wide
    to store every line). ``log_convex`` is the measured convexity of the
    samples the envelope was built from.
    """

    slopes: np.ndarray
    log_coeffs: np.ndarray
    touch: np.ndarray
    breakpoints: np.ndarray
    domain: Domain
    source: str
    n_max: int
    truncated: bool
    sparse: bool
    s_max: float
    log_convex: bool = True

    def __len__(self) -> int:
        return len(self.slopes)

    def lines(self):
        for n, a, t in zip(self.slopes, self.log_coeffs, self.touch):
            yield int(n), float(a), (None if math.isnan(t) else float(t))

    def log_coeff(self, n: int) -> float:
        """``a_n`` for a retained slope, ``-inf`` otherwise."""
        k = int(np.searchsorted(self.slopes, n))
        if k < len(self.slopes) and self.slopes[k] == n:
            return float(self.log_coeffs[k])
        return -math.inf


def monomial_coefficients(
    spec: WeightSpec,
    lt: LogTransform,
    n_max: Optional[int] = None,
    max_lines: int = MAX_DENSE_LINES,
) -> MonomialEnvelope:
    """Integer-slope supporting lines of ``Phi`` for slopes ``0..n_max``.

    When ``n_max + 1 <= max_lines`` every slope is conjugated and the lines on
    the upper envelope over ``(-inf, s_max]`` are kept. Otherwise only the lines
    active at some grid sample are kept, which reproduces the envelope exactly
    on the grid but not between samples (``sparse`` is set).
    """
    if lt.spec is not spec and lt.spec.label != spec.label:
        raise ValueError("log transform was built from a different weight")
    s, phi = lt.log_r, lt.phi
    hull = lower_hull(s, phi)
    edge = np.diff(phi[hull]) / np.diff(s[hull])
    top = float(edge[-1]) if len(edge) else 0.0
    if not math.isfinite(top):
        raise ValueError("non-finite slope in the log transform")
    needed = max(1, _right_end_slope(lt, top))
    if n_max is None:
        n_max = needed + SLOPE_MARGIN
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    truncated = n_max < needed

    sparse = min(n_max, needed) + 1 > max_lines
    # slopes beyond the right-end slope only touch at the last sample
    top_slope = min(n_max, needed)
    if sparse:
        best = _best_slopes(lt, hull, edge, top_slope)
        slopes = np.unique(np.concatenate([[0], best])).astype(np.int64)
    else:
        slopes = np.arange(top_slope + 1, dtype=np.int64)

    values, touch = conjugates(lt, slopes)
    a = -values
    keep, starts = upper_envelope(slopes.astype(float), a)
    active = starts <= s[-1]
    keep, starts = keep[active], starts[active]
    return MonomialEnvelope(
        slopes=slopes[keep],
        log_coeffs=a[keep],
        touch=touch[keep],
        breakpoints=starts,
        domain=spec.domain,
        source=spec.label,
        n_max=int(n_max),
        truncated=bool(truncated),
        sparse=bool(sparse),
        s_max=float(s[-1]),
        log_convex=bool(lt.convex),
    )


def _slope_at(lt: LogTransform, j: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Integer slope of the envelope line active at samples ``j``.

    Touch points ``t_n`` are non-decreasing in ``n``; bisect for the first
    slope touching at or right of ``s_j``, then keep it or its predecessor,
    whichever is higher at ``s_j``. Bisecting on ``t_n`` rather than on
    ``n s_j - Phi*(n)`` avoids cancellation when ``Phi*`` is huge.
    """
    s = lt.log_r[j]
    lo = lo.astype(np.int64)
    hi = np.maximum(hi.astype(np.int64), lo)
    while True:
        short = conjugates(lt, hi)[1] < s
        if not short.any():
            break
        lo = np.where(short, hi, lo)
        hi = np.where(short, 2 * hi + 1, hi)
    while np.any(lo < hi):
        mid = (lo + hi) // 2
        left = conjugates(lt, mid)[1] < s
        lo = np.where((lo < hi) & left, mid + 1, lo)
        hi = np.where((lo < hi) & ~left, mid, hi)
    prev = np.maximum(lo - 1, 0)
    f1 = lo * s - conjugates(lt, lo)[0]
    f0 = prev * s - conjugates(lt, prev)[0]
    return np.where(f0 > f1, prev, lo)


def _right_end_slope(lt: LogTransform, chord: float) -> int:
    """Slope of the line active at the last sample."""
    j = np.array([len(lt.log_r) - 1])
    lo = np.array([max(0, int(math.floor(chord)) - 1)])
    return int(_slope_at(lt, j, lo, lo + 16)[0])


def _best_slopes(lt: LogTransform, hull: np.ndarray, edge: np.ndarray, n_max: int) -> np.ndarray:
    """Slope of the line active at every sample, bracketed by adjacent hull slopes."""
    n = len(lt.log_r)
    pos = np.searchsorted(hull, np.arange(n), side="left")
    on_hull = (pos < len(hull)) & (hull[np.minimum(pos, len(hull) - 1)] == np.arange(n))
    padded = np.concatenate([[0.0], edge, [float(n_max)]])
    left = padded[pos]
    right = np.where(on_hull, padded[np.minimum(pos + 1, len(padded) - 1)], padded[pos])
    lo = np.clip(np.floor(left) - 1, 0, n_max)
    hi = np.clip(np.ceil(right) + 1, 0, n_max)
    return np.minimum(_slope_at(lt, np.arange(n), lo, hi), n_max)


def _active(env: MonomialEnvelope, s: np.ndarray) -> np.ndarray:
    # side="right": at a breakpoint the larger slope wins
    return np.searchsorted(env.breakpoints[1:], s, side="right")


def log_envelope(env: MonomialEnvelope, r) -> np.ndarray:
    """``G(log r)``, i.e. ``log max_n e^{a_n} r^n``; ``a_0`` at ``r = 0``."""
    r = np.atleast_1d(np.asarray(r, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.log(r)
        k = _active(env, s)
        out = env.log_coeffs[k] + env.slopes[k] * s
    return np.where(r == 0, env.log_coeffs[0], out)


def log_envelope_integral(env: MonomialEnvelope, r) -> np.ndarray:
    """``log of the integral of max_n e^{a_n} t^n over [0, r]``, exactly per segment."""
    r = np.atleast_1d(np.asarray(r, float))
    n = env.slopes.astype(float)
    a = env.log_coeffs
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        lb = env.breakpoints  # segment k covers [e^{lb[k]}, e^{lb[k+1]})
        lo, hi = lb[:-1], lb[1:]

        def seg(a_k, n_k, l0, l1):
            # log(e^a (t1^{n+1} - t0^{n+1}) / (n+1)) with t = e^l
            ratio = (n_k + 1) * (l0 - l1)
            body = np.where(np.isneginf(ratio), 0.0, np.log(-np.expm1(ratio)))
            return np.where(l1 <= l0, -np.inf, a_k + (n_k + 1) * l1 + body - np.log(n_k + 1))

        full = seg(a[:-1], n[:-1], lo, hi)
        cum = np.concatenate([[-np.inf], np.logaddexp.accumulate(full)]) if len(full) else np.array([-np.inf])
        s = np.log(r)
        k = _active(env, s)
        part = seg(a[k], n[k], lb[k], s)
        out = np.logaddexp(cum[k], part)
    return np.where(r == 0, -np.inf, out)


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Envelope values on a grid; index 0 is the origin."""

    grid: EvaluationGrid
    envelope: MonomialEnvelope
    r: np.ndarray
    log_values: np.ndarray
    active_slope: np.ndarray
    log_right_derivative: np.ndarray

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    @property
    def right_derivative(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_right_derivative)


def associated_weight(env: MonomialEnvelope, grid: EvaluationGrid) -> WeightTable:
    if len(env) == 0:
        raise ValueError("empty envelope")
    s = grid.log_r
    k = _active(env, s)
    n = env.slopes[k]
    lv = env.log_coeffs[k] + n * s
    with np.errstate(divide="ignore"):
        ld = np.where(n > 0, np.log(n.astype(float)) - s + lv, -np.inf)
    r = np.concatenate([[0.0], grid.rs])
    return WeightTable(
        grid=grid,
        envelope=env,
        r=r,
        log_values=np.concatenate([[env.log_coeffs[0]], lv]),
        active_slope=np.concatenate([[env.slopes[0]], n]).astype(np.int64),
        log_right_derivative=np.concatenate([[np.nan], ld]),
    )


def envelope_right_derivative(table: WeightTable, i: int) -> float:
    """``(n(r_i) / r_i) * w_hat(r_i)`` for ``r_i > 0``."""
    if table.r[i] == 0:
        a1 = table.envelope.log_coeff(1)
        raise ValueError(
            "right derivative at r = 0 is not given by the slope formula; "
            f"slope-1 coefficient limit is {format_log_value(a1)}"
        )
    return float(np.exp(table.log_right_derivative[i]))


class SandwichConstant(NamedTuple):
    constant: float
    worst_r: float
    log_constant: float


def sandwich_constants(spec: WeightSpec, table: WeightTable, rtol: float = 1e-9) -> SandwichConstant:
    """Disk: ``sup w / w_hat``. Plane: ``sup w / ((r + 1) w_hat)``.

    Raises :class:`EnvelopeConsistencyError` if the envelope exceeds ``w``.
    """
    logw = spec.log_eval(table.r)
    gap = logw - table.log_values
    tol = rtol * np.maximum(1.0, np.abs(logw))
    if np.any(gap < -tol):
        i = int(np.argmin(gap + tol))
        raise EnvelopeConsistencyError(f"envelope exceeds the weight at r={table.r[i]:.6g}")
    if spec.domain is Domain.PLANE:
        gap = gap - np.log1p(table.r)
    i = int(np.nanargmax(gap))
    return SandwichConstant(float(np.exp(gap[i])), float(table.r[i]), float(gap[i]))


def envelope_csv(env: MonomialEnvelope) -> str:
    rows = ((n, format_float(a), "" if t is None else format_float(t)) for n, a, t in env.lines())
    return csv_text(["n", "a_n", "t_n"], rows)


def table_csv(table: WeightTable, spec: WeightSpec) -> str:
    logw = spec.log_eval(table.r)
    rows = (
        (
            format_float(r),
            format_log_value(lw),
            format_log_value(lv),
            int(n),
            format_log_value(ld) if np.isfinite(ld) or ld == -np.inf else "",
        )
        for r, lw, lv, n, ld in zip(table.r, logw, table.log_values, table.active_slope, table.log_right_derivative)
    )
    return csv_text(["r", "w", "w_hat", "active_slope", "w_hat_prime"], rows)
