import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from conftest import make_table
from weightcalc.envelope import (
    EnvelopeConsistencyError,
    associated_weight,
    envelope_csv,
    envelope_right_derivative,
    legendre_conjugate,
    log_envelope,
    log_envelope_integral,
    lower_hull,
    monomial_coefficients,
    sandwich_constants,
    table_csv,
    upper_envelope,
)
from weightcalc.weights import Domain, WeightSpec, build_grid, default_grid, log_transform

# -- closed-form coefficients ------------------------------------------------------------


def test_exp_coefficients_closed_form(exp_table):
    _, table = exp_table
    env = table.envelope
    n = env.slopes[1:].astype(float)
    # sup_s (n s - e^s) = n log n - n
    assert np.allclose(env.log_coeffs[1:], n * (1 - np.log(n)), rtol=0, atol=1e-9 * np.maximum(1, n * np.log(n)))
    assert env.log_coeffs[0] == 0.0
    inside = np.log(n) < table.grid.log_r[-1]
    # the conjugate is flat near its maximiser, so the touch point is only accurate to ~sqrt(eps)
    assert np.allclose(env.touch[1:][inside], np.log(n[inside]), atol=1e-7)
    assert not env.sparse and not env.truncated


def test_exp_square_coefficients_closed_form(plane_grid):
    _, table = make_table("exp(r^2)", "plane", plane_grid)
    env = table.envelope
    n = env.slopes[1:200].astype(float)
    expected = 0.5 * n * (1 - np.log(n / 2))
    assert np.allclose(env.log_coeffs[1:200], expected, rtol=1e-12, atol=1e-9)


def test_pole_coefficients_closed_form(disk_grid):
    _, table = make_table("1/(1-r)", "disk", disk_grid)
    env = table.envelope
    n = env.slopes[1:].astype(float)
    # e^{a_n} = (n+1)^{n+1} / n^n, touching at r = n/(n+1)
    expected = np.log1p(n) + n * np.log1p(1 / n)
    assert np.allclose(env.log_coeffs[1:], expected, rtol=1e-9, atol=1e-9)
    small = n < 1e5
    assert np.allclose(np.exp(env.touch[1:][small]), n[small] / (n[small] + 1), rtol=1e-7)


@pytest.mark.parametrize("text", ["exp(r)*(r+1)", "exp(r^1.5)", "exp(2*r)+r^3"])
def test_coefficients_match_brute_force_minimisation(text, plane_grid):
    spec, table = make_table(text, "plane", plane_grid)
    for n in (1, 2, 3, 7, 20, 55):
        res = optimize.minimize_scalar(
            lambda s: float(spec.log_eval(math.exp(s))[0]) - n * s,
            bounds=(-8.0, 8.0),
            method="bounded",
            options={"xatol": 1e-12},
        )
        a = table.envelope.log_coeff(n)
        if a == -math.inf:
            # slope pruned: the line lies below the envelope everywhere
            s = np.linspace(-8, 8, 2001)
            assert np.all(res.fun + n * s <= log_envelope(table.envelope, np.exp(s)) + 1e-9)
        else:
            assert a == pytest.approx(res.fun, abs=1e-8 * max(1.0, abs(res.fun)))


def test_legendre_conjugate_single_slope(plane_grid):
    spec = WeightSpec.parse("exp(r)", "plane")
    lt = log_transform(spec, plane_grid)
    v, t = legendre_conjugate(lt, 5)
    assert v == pytest.approx(5 * math.log(5) - 5, rel=1e-13)
    assert t == pytest.approx(math.log(5), abs=1e-8)
    v0, t0 = legendre_conjugate(lt, 0)
    assert v0 == 0.0 and t0 is None
    with pytest.raises(ValueError):
        legendre_conjugate(lt, -1)


def test_envelope_value_brute_force(plane_grid):
    _, table = make_table("exp(r)", "plane", plane_grid)
    r = np.array([0.0, 0.3, 1.0, 2.5, 7.0, 19.2, 150.0])
    n = np.arange(0, 400)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(n == 0, 0.0, n * (1 - np.log(np.maximum(n, 1))))
        brute = np.max(a[None, :] + np.where(n[None, :] == 0, 0.0, n[None, :] * np.log(r)[:, None]), axis=1)
    brute[0] = 0.0
    assert np.allclose(log_envelope(table.envelope, r), brute, rtol=1e-12, atol=1e-9)


def test_half_plane_point_is_e_over_two(exp_table):
    _, table = exp_table
    # at r = 1/2 the constant and linear terms give max(1, e/2)
    assert float(np.exp(log_envelope(table.envelope, 0.5)[0])) == pytest.approx(math.e / 2, rel=1e-12)


# -- structural properties ---------------------------------------------------------------

WEIGHTS = [
    ("exp(r)", "plane"),
    ("exp(r^2)", "plane"),
    ("exp(r)*(r+1)", "plane"),
    ("1/(1-r)", "disk"),
    ("1/(1-r)^2", "disk"),
    ("exp(1/(1-r))", "disk"),
]


@pytest.fixture(scope="module", params=WEIGHTS, ids=[w for w, _ in WEIGHTS])
def weight_table(request):
    return make_table(*request.param)


def test_envelope_below_weight(weight_table):
    spec, table = weight_table
    lw = spec.log_eval(table.r)
    assert np.all(table.log_values <= lw + 1e-9 * np.maximum(1, np.abs(lw)))


def test_envelope_log_convex_and_increasing(weight_table):
    _, table = weight_table
    s = table.grid.log_r
    lv = table.log_values[1:]
    assert np.all(np.diff(lv) >= -1e-9 * np.maximum(1, np.abs(lv[1:])))
    slopes = table.active_slope[1:]
    assert np.all(np.diff(slopes) >= 0)


def test_envelope_touches_weight(weight_table):
    spec, table = weight_table
    env = table.envelope
    t = env.touch[np.isfinite(env.touch)]
    r = np.exp(t[:50])
    gap = spec.log_eval(r) - log_envelope(env, r)
    assert np.all(np.abs(gap) <= 1e-7 * np.maximum(1, np.abs(spec.log_eval(r))))


def test_breakpoints_increase(weight_table):
    _, table = weight_table
    bp = table.envelope.breakpoints
    assert bp[0] == -np.inf
    assert np.all(np.diff(bp[1:]) > 0)
    assert np.all(np.diff(table.envelope.slopes) > 0)


def test_sandwich_is_finite(weight_table):
    spec, table = weight_table
    sw = sandwich_constants(spec, table)
    assert 1.0 - 1e-9 <= sw.constant < 10.0 if spec.domain is Domain.DISK else sw.constant <= math.e


def test_right_derivative_matches_finite_difference(weight_table):
    _, table = weight_table
    env = table.envelope
    i = np.arange(1, len(table.r), 37)
    r = table.r[i]
    h = 1e-6 * np.minimum(r, 1 - r) if env.domain is Domain.DISK else 1e-6 * r
    h = (r + h) - r  # the step actually taken after rounding
    fd = (log_envelope(env, r + h) - log_envelope(env, r)) / h
    analytic = table.log_right_derivative[i] - table.log_values[i]
    assert np.allclose(fd, np.exp(analytic), rtol=1e-4)


def test_right_derivative_at_origin_raises(exp_table):
    _, table = exp_table
    with pytest.raises(ValueError, match="r = 0"):
        envelope_right_derivative(table, 0)
    assert envelope_right_derivative(table, 10) == pytest.approx(float(table.right_derivative[10]))


def test_consistency_error_when_weight_below_envelope(exp_table):
    _, table = exp_table
    smaller = WeightSpec.parse("exp(r)/2", "plane")
    with pytest.raises(EnvelopeConsistencyError):
        sandwich_constants(smaller, table)


def test_plane_sandwich_for_exponential(exp_table):
    spec, table = exp_table
    sw = sandwich_constants(spec, table)
    assert sw.constant == pytest.approx(1.0543, abs=1e-3)
    assert sw.worst_r == pytest.approx(0.36, abs=0.01)


# -- integrals ---------------------------------------------------------------------------


def test_exact_integral_against_quadrature():
    spec, table = make_table("exp(r)", "plane", build_grid(Domain.PLANE, 128, 40.0))
    env = table.envelope
    for r in (0.2, 1.0, 3.7, 12.0, 39.0):
        knots = np.exp(env.breakpoints[1:])
        pts = [k for k in knots if k < r]
        val, _ = integrate.quad(lambda t: math.exp(log_envelope(env, t)[0]), 0.0, r, points=pts or None, limit=500, epsrel=1e-12)
        assert float(log_envelope_integral(env, r)[0]) == pytest.approx(math.log(val), abs=1e-9)
    assert log_envelope_integral(env, 0.0)[0] == -np.inf


def test_integral_of_exponential_envelope_at_large_radius(exp_table):
    _, table = exp_table
    r = 2900.0
    ratio = math.exp(float(log_envelope_integral(table.envelope, r)[0]) - r)
    assert 0.999 < ratio <= 1.0


# -- dense and sparse modes agree on the grid ------------------------------------------------


@pytest.mark.parametrize("text, domain", [("exp(r)", "plane"), ("exp(r^2)", "plane"), ("1/(1-r)", "disk")])
def test_sparse_mode_reproduces_dense_on_grid(text, domain):
    spec = WeightSpec.parse(text, domain)
    grid = build_grid(spec.domain, 128, 200.0 if domain == "plane" else 9.0)
    lt = log_transform(spec, grid)
    dense = monomial_coefficients(spec, lt)
    sparse = monomial_coefficients(spec, lt, max_lines=10)
    assert sparse.sparse and not dense.sparse
    a = associated_weight(dense, grid)
    b = associated_weight(sparse, grid)
    assert np.allclose(a.log_values, b.log_values, rtol=1e-12, atol=1e-9)
    assert np.array_equal(a.active_slope, b.active_slope)


def test_truncation_flag():
    spec = WeightSpec.parse("exp(r)", "plane")
    grid = build_grid(Domain.PLANE, 64, 50.0)
    env = monomial_coefficients(spec, log_transform(spec, grid), n_max=10)
    assert env.truncated and env.slopes[-1] <= 10


# -- hull helpers (hypothesis) ---------------------------------------------------------------


@given(
    st.lists(st.floats(-50, 50), min_size=1, max_size=40),
    st.lists(st.floats(-10, 10), min_size=5, max_size=20),
)
def test_upper_envelope_equals_pointwise_max(intercepts, xs):
    a = np.array(intercepts)
    m = np.arange(len(a), dtype=float)
    keep, starts = upper_envelope(m, a)
    x = np.array(xs)
    brute = np.max(a[None, :] + m[None, :] * x[:, None], axis=1)
    k = keep[np.searchsorted(starts[1:], x, side="right")]
    assert np.allclose(a[k] + m[k] * x, brute, rtol=1e-12, atol=1e-9)
    assert np.all(np.diff(starts[1:]) > 0)


@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=60, unique_by=lambda p: p[0]))
def test_lower_hull_lies_below_points(points):
    pts = sorted(points)
    s = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    hull = lower_hull(s, y)
    assert hull[0] == 0 and hull[-1] == len(s) - 1
    line = np.interp(s, s[hull], y[hull])
    assert np.all(y >= line - 1e-9)
    slopes = np.diff(y[hull]) / np.diff(s[hull])
    assert np.all(np.diff(slopes) > -1e-9)


@given(st.floats(0.3, 3.0), st.floats(0.2, 4.0))
def test_power_exponential_envelope_below_and_touching(b, c):
    spec = WeightSpec.parse(f"exp({c!r}*r^{b!r})", "plane")
    grid = build_grid(Domain.PLANE, 96, 60.0)
    lt = log_transform(spec, grid)
    env = monomial_coefficients(spec, lt)
    table = associated_weight(env, grid)
    lw = spec.log_eval(grid.rs)
    assert np.all(table.log_values[1:] <= lw + 1e-9 * np.maximum(1, np.abs(lw)))
    # closed form: Phi*(n) = (n/b) log(n/(b c)) - n/b
    n = env.slopes[1:].astype(float)
    inner = (n / b) * (np.log(n / (b * c)) - 1)
    t = np.log(n / (b * c)) / b
    ok = (t > grid.log_r[1]) & (t < grid.log_r[-2])
    assert np.allclose(-env.log_coeffs[1:][ok], inner[ok], rtol=1e-9, atol=1e-8)


def test_csv_outputs(exp_table):
    spec, table = exp_table
    text = envelope_csv(table.envelope)
    assert text.splitlines()[0] == "n,a_n,t_n"
    assert text.splitlines()[1] == "0,0,"
    tt = table_csv(table, spec)
    assert tt.splitlines()[0] == "r,w,w_hat,active_slope,w_hat_prime"
    assert len(tt.splitlines()) == len(table.r) + 1
