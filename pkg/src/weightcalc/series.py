"""Finite power series: integral means, D and J, test functions and norm oracles.

Means are computed on circles by uniform angular sampling through the FFT.
Each radius is rescaled by its largest term magnitude before the transform,
so series whose values overflow a double (e.g. envelope series at large r)
still produce accurate ``log M_p``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .envelope import MonomialEnvelope
from .reports import atomic_write_text, csv_text, encode_float, format_float
from .weights import Domain, EvaluationGrid, WeightSpec

__all__ = [
    "PowerSeries",
    "CircleQuadrature",
    "TruncationWarning",
    "parse_exponent",
    "log_mp_means",
    "log_mp_mean",
    "mp_mean",
    "circle_quadrature_mean",
    "parseval_mean",
    "apply_D",
    "apply_J",
    "envelope_series",
    "tail_series",
    "log_abs_on_axis",
    "log_series_integral",
    "cumulative_weight_integral",
    "SeriesBounds",
    "envelope_series_bounds",
    "DominanceResult",
    "dominance_radius",
    "HardyConvexityReport",
    "hardy_convexity_check",
    "monomials",
    "random_polynomials",
    "oracle_samples",
    "Operator",
    "OracleReport",
    "empirical_operator_norm",
    "series_csv",
    "write_series_csv",
    "read_series_csv",
]


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Coefficients ``c_0..c_N`` of a polynomial, trailing zeros removed."""

    coeffs: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise OverflowError("series coefficients must be finite")
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if len(nz) else c[:1] * 0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    @property
    def is_monomial(self) -> bool:
        return np.count_nonzero(self.coeffs) == 1

    @property
    def nonnegative(self) -> bool:
        c = self.coeffs
        return bool(np.all(c.imag == 0) and np.all(c.real >= 0))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.polyval(self.coeffs[::-1], z)

    def __eq__(self, other) -> bool:
        return isinstance(other, PowerSeries) and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def relabel(self, label: str) -> "PowerSeries":
        return PowerSeries(self.coeffs, label)


def parse_exponent(p) -> float:
    """Exponent in (0, inf]; accepts numbers and the text ``inf``."""
    if isinstance(p, str):
        text = p.strip().lower()
        p = math.inf if text in ("inf", "infinity", "oo") else float(text)
    p = float(p)
    if not (p > 0):
        raise ValueError(f"exponent must lie in (0, inf], got {p}")
    return p


@dataclass(frozen=True)
class CircleQuadrature:
    """Uniform angular sampling with ``m`` points.

    For ``p`` other than 2 and ``inf`` the sampling is doubled per radius
    until the mean changes by less than ``rtol`` or ``max_m`` is reached;
    near a zero of the series on the circle the integrand loses smoothness and
    the base rule alone converges slowly.
    """

    m: int = 1024
    adaptive: bool = True
    max_m: int = 1 << 16
    rtol: float = 1e-14
    inf_xtol: float = 1e-9

    def __post_init__(self):
        for k in (self.m, self.max_m):
            if k < 4 or k & (k - 1):
                raise ValueError(f"quadrature size must be a power of two >= 4, got {k}")

    def check(self, f: PowerSeries):
        if self.m < 4 * (f.degree + 1):
            raise ValueError(f"quadrature size {self.m} below 4*(N+1) = {4 * (f.degree + 1)}")

    @classmethod
    def for_series(cls, f: PowerSeries, m: int = 1024, **kw) -> "CircleQuadrature":
        need = 1 << max(2, math.ceil(math.log2(4 * (f.degree + 1))))
        size = max(m, need)
        return cls(size, max_m=max(kw.pop("max_m", 1 << 16), size), **kw)


def _check_radii(r, domain: Optional[Domain]) -> np.ndarray:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    rmax = math.inf if domain is None else domain.rmax
    if np.any(~np.isfinite(r)) or np.any(r < 0) or np.any(r >= rmax):
        raise ValueError(f"radius outside [0, {rmax})")
    return r


def _scaled_terms(f: PowerSeries, r: np.ndarray):
    """Per-radius scale ``log max_k |c_k| r^k`` and the rescaled terms."""
    c = f.coeffs
    k = np.arange(len(c))
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.log(np.abs(c))
        logr = np.log(r)
        kl = np.where(k[None, :] == 0, 0.0, k[None, :] * logr[:, None])
    L = logc[None, :] + kl
    scale = L.max(axis=1)
    with np.errstate(invalid="ignore"):
        phase = np.where(c != 0, c / np.where(c != 0, np.abs(c), 1), 0)
        B = phase[None, :] * np.exp(L - scale[:, None])
    return scale, B


def _circle_samples(B: np.ndarray, m: int) -> np.ndarray:
    return np.abs(np.fft.ifft(B, n=m, axis=1) * m)


def _horner(B: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.zeros(z.shape, dtype=complex)
    for j in range(B.shape[1] - 1, -1, -1):
        acc = acc * z + B[:, j]
    return acc


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _refine_max(B: np.ndarray, vals: np.ndarray, m: int, xtol: float) -> np.ndarray:
    """Sample maximum refined by golden-section search and a parabolic step."""
    best = vals.max(axis=1)
    h = 2 * math.pi / m
    # candidate peaks: the two largest samples that are local maxima
    local = (vals >= np.roll(vals, 1, axis=1)) & (vals >= np.roll(vals, -1, axis=1))
    ranked = np.argsort(np.where(local, vals, -1.0), axis=1)[:, ::-1][:, :2]
    for c in range(ranked.shape[1]):
        th = ranked[:, c] * h
        a, b = th - h, th + h
        x1 = b - _GOLD * (b - a)
        x2 = a + _GOLD * (b - a)
        f1 = np.abs(_horner(B, np.exp(1j * x1)))
        f2 = np.abs(_horner(B, np.exp(1j * x2)))
        while np.max(b - a) > xtol:
            left = f1 > f2
            b = np.where(left, x2, b)
            a = np.where(left, a, x1)
            x2n = np.where(left, x1, a + _GOLD * (b - a))
            x1n = np.where(left, b - _GOLD * (b - a), x2)
            f2n = np.where(left, f1, np.nan)
            f1n = np.where(left, np.nan, f2)
            x1, x2 = x1n, x2n
            need1, need2 = np.isnan(f1n), np.isnan(f2n)
            new1 = np.abs(_horner(B, np.exp(1j * x1)))
            new2 = np.abs(_horner(B, np.exp(1j * x2)))
            f1 = np.where(need1, new1, f1n)
            f2 = np.where(need2, new2, f2n)
        mid = 0.5 * (a + b)
        # one parabolic step through (a, mid, b)
        fa = np.abs(_horner(B, np.exp(1j * a)))
        fm = np.abs(_horner(B, np.exp(1j * mid)))
        fb = np.abs(_horner(B, np.exp(1j * b)))
        den = fa - 2 * fm + fb
        with np.errstate(divide="ignore", invalid="ignore"):
            off = np.where(den < 0, 0.5 * (fa - fb) / den * (b - a) / 2, 0.0)
        off = np.clip(np.nan_to_num(off), -(b - a) / 2, (b - a) / 2)
        fp = np.abs(_horner(B, np.exp(1j * (mid + off))))
        best = np.maximum.reduce([best, f1, f2, fa, fm, fb, fp])
    return best


def _log_power_mean(vals: np.ndarray, p: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        lv = np.log(vals)
    return (logsumexp(p * lv, axis=1) - math.log(vals.shape[1])) / p


def log_mp_means(
    f: PowerSeries,
    p,
    r,
    q: Optional[CircleQuadrature] = None,
    domain: Optional[Domain] = None,
) -> np.ndarray:
    """``log M_p(f, r)`` for an array of radii by circle sampling.

    ``r = 0`` gives ``log |c_0|``. The zero series gives ``-inf``.
    """
    p = parse_exponent(p)
    r = _check_radii(r, domain)
    q = q or CircleQuadrature.for_series(f)
    q.check(f)
    out = np.empty(len(r))
    if f.is_zero:
        out.fill(-np.inf)
        return out
    if f.is_monomial:
        n = int(np.flatnonzero(f.coeffs)[0])
        with np.errstate(divide="ignore"):
            lr = np.log(r)
        return math.log(abs(f.coeffs[n])) + (n * lr if n else np.zeros(len(r)))
    # chunk so the sample matrix stays a few million entries
    step = max(1, (1 << 22) // q.max_m if q.adaptive and p not in (2.0, math.inf) else (1 << 22) // q.m)
    for lo in range(0, len(r), step):
        sl = slice(lo, lo + step)
        out[sl] = _log_means_chunk(f, p, r[sl], q)
    return out


def _log_means_chunk(f: PowerSeries, p: float, r: np.ndarray, q: CircleQuadrature) -> np.ndarray:
    scale, B = _scaled_terms(f, r)
    m = q.m
    vals = _circle_samples(B, m)
    if p == math.inf:
        return scale + np.log(_refine_max(B, vals, m, q.inf_xtol))
    res = _log_power_mean(vals, p)
    if p == 2.0 or not q.adaptive:
        return scale + res
    todo = np.ones(len(r), bool)
    while m < q.max_m and todo.any():
        m *= 2
        finer = _log_power_mean(_circle_samples(B[todo], m), p)
        done = np.abs(finer - res[todo]) <= q.rtol
        res[todo] = finer
        idx = np.flatnonzero(todo)
        todo[idx[done]] = False
    return scale + res


def log_mp_mean(f: PowerSeries, p, r: float, q: Optional[CircleQuadrature] = None, domain: Optional[Domain] = None) -> float:
    return float(log_mp_means(f, p, [r], q, domain)[0])


def circle_quadrature_mean(f: PowerSeries, p, r: float, q: Optional[CircleQuadrature] = None, domain=None) -> float:
    """``M_p(f, r)`` from circle samples only (no coefficient shortcut)."""
    return math.exp(log_mp_mean(f, p, r, q, domain))


def parseval_mean(f: PowerSeries, r) -> np.ndarray:
    """``M_2(f, r) = (sum |c_k|^2 r^(2k))^(1/2)``, evaluated in logs."""
    r = np.atleast_1d(np.asarray(r, float))
    k = np.arange(f.degree + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.log(np.abs(f.coeffs))
        lr = np.log(r)
        L = 2 * logc[None, :] + np.where(k[None, :] == 0, 0.0, 2 * k[None, :] * lr[:, None])
    return np.exp(0.5 * logsumexp(L, axis=1))


def mp_mean(
    f: PowerSeries,
    p,
    r: float,
    q: Optional[CircleQuadrature] = None,
    domain: Optional[Domain] = None,
    crosscheck_rtol: float = 1e-10,
) -> float:
    """Integral mean ``M_p(f, r)``.

    For ``p = 2`` the coefficient formula is returned after cross-checking it
    against the circle samples.

    >>> mp_mean(PowerSeries([0, 0, 3]), 2, 0.5)
    0.75
    """
    p = parse_exponent(p)
    value = circle_quadrature_mean(f, p, r, q, domain)
    if p == 2.0:
        exact = float(parseval_mean(f, r)[0])
        if abs(value - exact) > crosscheck_rtol * max(exact, 1e-300):
            raise ArithmeticError(f"quadrature M_2 = {value!r} disagrees with coefficient formula {exact!r}")
        return exact
    return value


# -- operators ---------------------------------------------------------------------


def apply_D(f: PowerSeries) -> PowerSeries:
    c = f.coeffs
    if len(c) == 1:
        return PowerSeries([0.0], f"D({f.label})")
    return PowerSeries(c[1:] * np.arange(1, len(c)), f"D({f.label})")


def apply_J(f: PowerSeries) -> PowerSeries:
    c = f.coeffs
    return PowerSeries(np.concatenate([[0.0], c / np.arange(1, len(c) + 1)]), f"J({f.label})")


# -- test functions built from the envelope ----------------------------------------------


def envelope_series(env: MonomialEnvelope, n_max: int) -> PowerSeries:
    """``g`` with ``g_k = 2 exp(a_k)`` for slopes on the envelope, truncated at ``n_max``.

    Slopes pruned from the envelope contribute zero. Warns with
    :class:`TruncationWarning` when the envelope itself needs larger slopes.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if env.truncated or (len(env.slopes) and int(env.slopes[-1]) > n_max):
        warnings.warn(
            f"envelope uses slopes up to {int(env.slopes[-1])}; series truncated at {n_max}",
            TruncationWarning,
            stacklevel=2,
        )
    keep = env.slopes <= n_max
    logc = np.full(n_max + 1, -np.inf)
    logc[env.slopes[keep]] = env.log_coeffs[keep]
    if np.any(logc > 709.0):
        raise OverflowError("envelope coefficient beyond double range")
    return PowerSeries(2.0 * np.exp(logc), f"g[{env.source}]")


def tail_series(g: PowerSeries, n: int) -> PowerSeries:
    if not (0 <= n <= g.degree + 1):
        raise ValueError(f"cutoff {n} outside [0, {g.degree + 1}]")
    c = np.array(g.coeffs)
    c[:n] = 0
    if n > g.degree:
        c = np.zeros(1, complex)
    return PowerSeries(c, f"tail({g.label}, {n})")


def log_abs_on_axis(f: PowerSeries, r) -> np.ndarray:
    """``log |f(r)|`` at non-negative real ``r`` by a rescaled sum."""
    r = np.atleast_1d(np.asarray(r, float))
    out = np.empty(len(r))
    step = max(1, (1 << 22) // (f.degree + 1))
    for lo in range(0, len(r), step):
        scale, B = _scaled_terms(f, r[lo : lo + step])
        with np.errstate(divide="ignore"):
            out[lo : lo + step] = scale + np.log(np.abs(B.sum(axis=1)))
    return out


def log_series_integral(f: PowerSeries, r) -> np.ndarray:
    """``log int_0^r f(t) dt`` for a series with non-negative coefficients, exactly term by term."""
    if not f.nonnegative:
        raise ValueError("exact log integral needs non-negative coefficients")
    return log_abs_on_axis(apply_J(f), r)


def cumulative_weight_integral(w: WeightSpec, r) -> np.ndarray:
    """``log int_0^r w(t) dt`` at increasing radii ``r``.

    Each segment is integrated adaptively after dividing by ``w`` at its right
    end, then segments are accumulated in log space.
    """
    r = np.atleast_1d(np.asarray(r, float))
    if np.any(np.diff(r) <= 0) or r[0] < 0:
        raise ValueError("radii must be non-negative and strictly increasing")
    knots = np.concatenate([[0.0], r]) if r[0] > 0 else r
    lw_end = w.log_eval(knots[1:])
    segs = np.empty(len(knots) - 1)
    for i in range(len(segs)):
        a, b, ref = knots[i], knots[i + 1], lw_end[i]
        val, _ = integrate.quad(lambda t: math.exp(float(w.log_eval(t)[0]) - ref), a, b, epsabs=0.0, epsrel=1e-12, limit=200)
        segs[i] = math.log(val) + ref if val > 0 else -np.inf
    cum = np.logaddexp.accumulate(segs)
    return cum if r[0] > 0 else np.concatenate([[-np.inf], cum])


@dataclass(frozen=True)
class SeriesBounds:
    """How an envelope series compares with its weight on a set of radii."""

    r: np.ndarray
    log_g: np.ndarray
    log_w: np.ndarray
    log_w_hat: np.ndarray
    constant: float  # sup g / w
    worst_r: float
    min_log_gap: float  # min log(g / w_hat); >= 0 means g >= w_hat everywhere
    truncation_error: float  # first dropped term / retained sum at the largest radius

    @property
    def dominates_envelope(self) -> bool:
        return self.min_log_gap >= -1e-12


def envelope_series_bounds(g: PowerSeries, env: MonomialEnvelope, w: WeightSpec, r) -> SeriesBounds:
    from .envelope import log_envelope

    r = np.atleast_1d(np.asarray(r, float))
    lg = log_abs_on_axis(g, r)
    lw = w.log_eval(r)
    lwh = log_envelope(env, r)
    ratio = lg - lw
    i = int(np.nanargmax(ratio))
    beyond = env.slopes[env.slopes > g.degree]
    rl = float(r[-1])
    if len(beyond) and rl > 0:
        k = int(beyond[0])
        log_drop = math.log(2.0) + float(env.log_coeffs[env.slopes == k][0]) + k * math.log(rl)
        trunc = math.exp(min(log_drop - float(lg[-1]), 709.0))
    else:
        trunc = 0.0
    return SeriesBounds(r, lg, lw, lwh, float(math.exp(min(ratio[i], 709.0))), float(r[i]), float(np.min(lg - lwh)), trunc)


@dataclass(frozen=True)
class DominanceResult:
    """``int_0^r g_n >= int_0^r w`` from ``r0`` on (``r0`` is None if it fails at the end)."""

    r: np.ndarray
    log_series_integral: np.ndarray
    log_weight_integral: np.ndarray
    r0: Optional[float]

    @property
    def holds(self) -> np.ndarray:
        return self.log_series_integral >= self.log_weight_integral


def dominance_radius(gn: PowerSeries, w: WeightSpec, r) -> DominanceResult:
    r = np.atleast_1d(np.asarray(r, float))
    lhs = log_series_integral(gn, r)
    rhs = cumulative_weight_integral(w, r)
    ok = lhs >= rhs
    if not ok[-1]:
        r0 = None
    else:
        bad = np.flatnonzero(~ok)
        r0 = float(r[bad[-1] + 1]) if len(bad) else float(r[0])
    return DominanceResult(r, lhs, rhs, r0)


# -- Hardy convexity -----------------------------------------------------------------


@dataclass(frozen=True)
class HardyConvexityReport:
    p: float
    radii: np.ndarray
    log_means: np.ndarray
    max_violation: float  # most negative second difference of log M_p against log r (0 if none)
    max_decrease: float  # largest drop of log M_p between consecutive radii (0 if none)

    def monotone(self, tol: float = 1e-10) -> bool:
        return self.max_decrease <= tol


def hardy_convexity_check(f: PowerSeries, p, grid, q: Optional[CircleQuadrature] = None) -> HardyConvexityReport:
    """Convexity of ``log M_p(f, e^x)`` and monotonicity of ``M_p`` over positive radii.

    ``grid`` is an :class:`EvaluationGrid` or an increasing array of radii.
    """
    from .weights import second_differences

    if f.is_zero:
        raise ValueError("convexity check needs a nonzero series")
    p = parse_exponent(p)
    radii = grid.rs if isinstance(grid, EvaluationGrid) else np.asarray(grid, float)
    if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be positive and increasing")
    lm = log_mp_means(f, p, radii, q)
    d2 = second_differences(np.log(radii), lm)
    viol = float(min(0.0, d2.min())) if len(d2) else 0.0
    dec = float(max(0.0, -np.diff(lm).min())) if len(lm) > 1 else 0.0
    return HardyConvexityReport(p, radii, lm, viol, dec)


# -- sample families -----------------------------------------------------------------------


def monomials(n: int) -> list[PowerSeries]:
    """``z^0 .. z^n``."""
    out = []
    for k in range(n + 1):
        c = np.zeros(k + 1)
        c[k] = 1.0
        out.append(PowerSeries(c, f"z^{k}"))
    return out


def random_polynomials(count: int, degree: int, seed: int) -> list[PowerSeries]:
    """Seeded polynomials with standard complex normal coefficients and degree in ``[1, degree]``."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        d = int(rng.integers(1, degree + 1))
        c = (rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)) / math.sqrt(2)
        out.append(PowerSeries(c, f"random[{seed}:{i}]"))
    return out


def oracle_samples(
    env: Optional[MonomialEnvelope] = None,
    n_monomials: int = 20,
    n_series: int = 60,
    tails: Sequence[int] = (1, 2, 5, 10),
    n_random: int = 20,
    random_degree: int = 16,
    seed: int = 0,
) -> list[PowerSeries]:
    """Monomials, the envelope series and its tails, and random polynomials."""
    out = monomials(n_monomials)
    if env is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            g = envelope_series(env, n_series)
        out.append(g)
        out.extend(tail_series(g, k) for k in tails if k <= g.degree)
    out.extend(random_polynomials(n_random, random_degree, seed))
    return out


# -- operator-norm oracle --------------------------------------------------------------------


class Operator(str, enum.Enum):
    D = "D"
    J = "J"

    def __call__(self, f: PowerSeries) -> PowerSeries:
        return apply_D(f) if self is Operator.D else apply_J(f)


@dataclass(frozen=True)
class OracleReport:
    op: Operator
    p: float
    lower_bound: float
    argmax_sample: str
    argmax_radius: float

    def to_json_dict(self) -> dict:
        return {
            "op": self.op.value,
            "p": encode_float(self.p),
            "lower_bound": encode_float(self.lower_bound),
            "argmax_sample": self.argmax_sample,
            "argmax_radius": encode_float(self.argmax_radius),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "OracleReport":
        return cls(Operator(d["op"]), float(d["p"]), float(d["lower_bound"]), d["argmax_sample"], float(d["argmax_radius"]))


def _log_norm(f: PowerSeries, lw: np.ndarray, radii: np.ndarray, p: float, q) -> tuple[float, int]:
    lm = log_mp_means(f, p, radii, q)
    ratio = lm - lw
    i = int(np.argmax(ratio))
    return float(ratio[i]), i


def empirical_operator_norm(
    op: Operator | str,
    w: WeightSpec,
    v: WeightSpec,
    samples: Iterable[PowerSeries],
    grid: EvaluationGrid,
    p=math.inf,
    q: Optional[CircleQuadrature] = None,
) -> OracleReport:
    """Largest ``||T f||_{v} / ||f||_{w}`` over ``samples``.

    Norms are grid suprema of ``M_p(f, r) / w(r)`` over the grid radii and the
    origin, so the result bounds the operator norm from below only up to grid
    resolution.
    """
    op = Operator(op)
    p = parse_exponent(p)
    radii = np.concatenate([[0.0], grid.rs]) if grid.includes_origin else np.asarray(grid.rs)
    lw = w.log_eval(radii)
    lv = v.log_eval(radii)
    best = (-np.inf, "", math.nan)
    any_nonzero = False
    for f in samples:
        if f.is_zero:
            continue
        Tf = op(f)
        qf = q or CircleQuadrature.for_series(f)
        lnf, _ = _log_norm(f, lw, radii, p, qf)
        if lnf == -np.inf:
            continue
        any_nonzero = True
        if Tf.is_zero:
            val, i = -np.inf, 0
        else:
            ltf, i = _log_norm(Tf, lv, radii, p, q or CircleQuadrature.for_series(Tf))
            val = ltf - lnf
        if val > best[0] or not best[1]:
            best = (val, f.label, float(radii[i]))
    if not any_nonzero:
        raise ValueError("all sample norms are zero")
    lb = math.exp(min(best[0], 709.0)) if best[0] > -np.inf else 0.0
    return OracleReport(op, p, lb, best[1], best[2])


# -- series I/O ----------------------------------------------------------------------------


def series_csv(f: PowerSeries) -> str:
    rows = ((k, format_float(c.real), format_float(c.imag)) for k, c in enumerate(f.coeffs))
    return csv_text(("index", "re", "im"), rows)


def write_series_csv(f: PowerSeries, path) -> Path:
    return atomic_write_text(path, series_csv(f))


def read_series_csv(path, label: Optional[str] = None) -> PowerSeries:
    import csv

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["index", "re", "im"]:
            raise ValueError(f"expected columns index,re,im; got {reader.fieldnames}")
        entries = [(int(row["index"]), complex(float(row["re"]), float(row["im"]))) for row in reader]
    if not entries:
        raise ValueError("series file has no coefficients")
    n = max(k for k, _ in entries)
    c = np.zeros(n + 1, complex)
    for k, v in entries:
        c[k] = v
    return PowerSeries(c, label if label is not None else Path(path).stem)
