import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weightcalc.weights import (
    Domain,
    EvaluationGrid,
    ValidationConfig,
    WeightSpec,
    WeightValidationError,
    build_grid,
    default_grid,
    log_transform,
    second_differences,
    validate_weight,
)


def test_default_grids():
    plane = default_grid(Domain.PLANE)
    disk = default_grid(Domain.DISK)
    assert plane.n_points == disk.n_points == 512
    assert plane.rs[-1] == pytest.approx(math.exp(8.0))
    assert 1 - disk.rs[-1] == pytest.approx(math.exp(-18.42), rel=1e-9)
    assert np.allclose(np.diff(plane.xs), plane.xs[1] - plane.xs[0])
    assert np.allclose(np.diff(disk.xs), disk.xs[1] - disk.xs[0])


def test_grid_radius_map_is_inverse_of_coordinate():
    g = build_grid(Domain.DISK, 64, 12.0)
    assert np.allclose(-np.log1p(-g.rs), g.xs, rtol=1e-12)
    assert np.allclose(g.radius_of(g.xs), g.rs, rtol=0, atol=0)


@pytest.mark.parametrize(
    "domain, n, extent",
    [(Domain.PLANE, 8, 10.0), (Domain.PLANE, 64, 0.5), (Domain.DISK, 64, 60.0), (Domain.DISK, 64, -1.0)],
)
def test_bad_grids(domain, n, extent):
    with pytest.raises(ValueError):
        build_grid(domain, n, extent)


def test_grid_invariants():
    with pytest.raises(ValueError):
        EvaluationGrid(Domain.DISK, np.linspace(0.1, 2, 20), np.linspace(0.1, 1.0, 20), 2.0)
    g = default_grid(Domain.PLANE)
    with pytest.raises(ValueError):
        g.rs[0] = 3.0


@pytest.mark.parametrize(
    "text, domain",
    [("exp(r)", "plane"), ("exp(r^2)", "plane"), ("exp(r)*(r+1)", "plane"), ("1/(1-r)", "disk"), ("exp(1/(1-r))", "disk"), ("log(2/(1-r))", "disk")],
)
def test_valid_weights(text, domain):
    spec = WeightSpec.parse(text, domain)
    report = validate_weight(spec, default_grid(spec.domain))
    assert report.ok, report.failed()


@pytest.mark.parametrize(
    "text, domain, check",
    [
        ("1+r", "plane", "super_polynomial"),
        ("r^10+1", "plane", "super_polynomial"),
        ("1/(1+r)", "plane", "non_decreasing"),
        ("2-r", "disk", "non_decreasing"),
        ("r", "disk", "positive"),
        ("1+r", "disk", "unbounded"),
        ("log(r-0.5)+10", "disk", "finite"),
    ],
)
def test_invalid_weights(text, domain, check):
    spec = WeightSpec.parse(text, domain)
    report = validate_weight(spec, default_grid(spec.domain))
    assert not report.ok
    assert check in {c.name for c in report.failed()}
    with pytest.raises(WeightValidationError):
        report.raise_for_status()


def test_failed_check_has_witness():
    spec = WeightSpec.parse("1/(1+r)", "plane")
    bad = validate_weight(spec, default_grid(spec.domain)).failed()[0]
    assert bad.witness_r is not None and bad.witness_r >= 0


def test_superpolynomial_threshold_is_configurable():
    spec = WeightSpec.parse("exp(r^0.2)", "plane")
    grid = default_grid(spec.domain)
    assert validate_weight(spec, grid).ok
    strict = ValidationConfig(superpoly_slope=10.0)
    assert not validate_weight(spec, grid, strict).ok


def test_log_transform_convexity_flag():
    grid = default_grid(Domain.PLANE)
    assert log_transform(WeightSpec.parse("exp(r)", "plane"), grid).convex
    # the dominant exponential switches from exp(2r) back to exp(r): the growth rate dips
    bumpy = WeightSpec.parse("exp(r) + exp(2*r)/(1+exp(4*(r-5)))", "plane")
    assert not log_transform(bumpy, grid).convex


def test_log_transform_disk_coordinates():
    grid = default_grid(Domain.DISK)
    lt = log_transform(WeightSpec.parse("1/(1-r)", "disk"), grid)
    assert np.allclose(lt.phi, lt.xs, rtol=1e-12)
    assert lt.phi0 == 0.0
    s, phi = lt.phi_at_x(np.array([1.0]))
    assert phi[0] == pytest.approx(1.0)
    assert s[0] == pytest.approx(math.log(1 - math.exp(-1)))


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=30, unique=True))
def test_second_differences_vanish_on_lines(xs):
    s = np.sort(np.array(xs))
    if np.min(np.diff(s)) < 1e-3:
        return
    d2 = second_differences(s, 3.0 * s - 1.0)
    assert np.all(np.abs(d2) < 1e-9)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=30, unique=True))
def test_second_differences_nonnegative_on_convex(xs):
    s = np.sort(np.array(xs))
    if np.min(np.diff(s)) < 1e-3:
        return
    assert np.all(second_differences(s, np.exp(s)) >= -1e-9)
