import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphereflow.errors import CutLocusError
from sphereflow.geom import (
    divergence_sample,
    exp_map,
    geodesic_distance,
    geodesic_divergence_ratio,
    log_map,
    parallel_transport,
    project_to_sphere,
    random_points,
    random_unit_tangents,
    tangent_project,
)

from oracles import rotation_matrix

e1, e2, e3 = np.eye(3)


def test_distance_examples():
    assert geodesic_distance(e1, e2) == pytest.approx(np.pi / 2)
    assert geodesic_distance(e1, e1) == 0.0
    y = np.array([np.cos(0.3), np.sin(0.3), 0.0])
    assert geodesic_distance(e1, y) == pytest.approx(0.3, abs=1e-15)
    assert geodesic_distance(e1, -e1) == pytest.approx(np.pi)


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        geodesic_distance(e1, np.array([1.0, 0.0]))


def test_distance_tiny_angles_keep_precision():
    for a in (1e-9, 1e-12):
        y = np.array([np.cos(a), np.sin(a), 0.0])
        assert geodesic_distance(e1, y) == pytest.approx(a, rel=1e-6)
        assert geodesic_distance(-e1, y) == pytest.approx(np.pi - a, rel=1e-15)


def test_exp_examples():
    np.testing.assert_allclose(exp_map(e1, np.pi / 2 * e2), e2, atol=1e-15)
    np.testing.assert_allclose(exp_map(e1, np.pi * e2), -e1, atol=1e-15)
    np.testing.assert_array_equal(exp_map(e1, 0 * e2), e1)


def test_log_examples():
    np.testing.assert_allclose(log_map(e1, e2), np.pi / 2 * e2, atol=1e-15)
    np.testing.assert_array_equal(log_map(e1, e1), np.zeros(3))
    with pytest.raises(CutLocusError):
        log_map(e1, -e1)


def test_tangent_project_examples():
    np.testing.assert_array_equal(tangent_project(e1, e1), np.zeros(3))
    np.testing.assert_array_equal(tangent_project(e1, e2), e2)
    np.testing.assert_array_equal(tangent_project(e1, e1 + 2 * e2), 2 * e2)


def test_transport_examples():
    th = 0.7
    y = np.array([np.cos(th), np.sin(th), 0.0])
    np.testing.assert_allclose(parallel_transport(e1, y, e2), [-np.sin(th), np.cos(th), 0.0], atol=1e-15)
    np.testing.assert_array_equal(parallel_transport(e1, e1, e2), e2)
    np.testing.assert_allclose(parallel_transport(e1, y, e3), e3, atol=1e-15)
    with pytest.raises(CutLocusError):
        parallel_transport(e1, -e1, e2)


def test_transport_matches_rotation_matrix():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x, y = random_points(rng, 3, 2)
        v = tangent_project(x, rng.standard_normal(3))
        axis = np.cross(x, y)
        R = rotation_matrix(axis, geodesic_distance(x, y))
        np.testing.assert_allclose(R @ x, y, atol=1e-12)
        np.testing.assert_allclose(parallel_transport(x, y, v), R @ v, atol=1e-12)


def test_divergence_examples():
    rng = np.random.default_rng(0)
    x, y = random_points(rng, 3, 2)
    v = random_unit_tangents(rng, x[None])[0]
    assert geodesic_divergence_ratio(x, y, v, 0.0) == pytest.approx(1.0, abs=1e-12)
    lv = log_map(x, y)
    lv /= np.linalg.norm(lv)
    for t in (0.1, 1.0, 2.5):
        assert geodesic_divergence_ratio(x, y, lv, t) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ZeroDivisionError):
        geodesic_divergence_ratio(x, x, v, 1.0)


def test_project_drift_assertion():
    with pytest.raises(AssertionError):
        project_to_sphere(np.array([2.0, 0.0]), check_drift=True)


def test_divergence_sample_bounded():
    ratios, par = divergence_sample(np.random.default_rng(1), 3, 2000)
    assert ratios.max() <= 3.0
    assert np.max(np.abs(par - 1)) < 1e-9


unit = st.lists(st.floats(-1, 1, allow_nan=False), min_size=5, max_size=5).filter(
    lambda v: np.linalg.norm(v) > 0.1)


@settings(max_examples=200, deadline=None)
@given(unit, unit)
def test_exp_log_round_trip(a, b):
    x, y = project_to_sphere(np.array(a)), project_to_sphere(np.array(b))
    if 1 + x @ y < 1e-6:
        return
    v = log_map(x, y)
    assert abs(v @ x) < 1e-12
    assert np.linalg.norm(v) == pytest.approx(geodesic_distance(x, y), abs=1e-12)
    np.testing.assert_allclose(exp_map(x, v), y, atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(unit, unit, unit, unit)
def test_transport_isometry_and_reverse(a, b, c, d):
    x, y = project_to_sphere(np.array(a)), project_to_sphere(np.array(b))
    if 1 + x @ y < 1e-3:
        return
    u = tangent_project(x, np.array(c))
    v = tangent_project(x, np.array(d))
    pu, pv = parallel_transport(x, y, u), parallel_transport(x, y, v)
    assert abs(pv @ y) < 1e-12
    assert np.linalg.norm(pv) == pytest.approx(np.linalg.norm(v), abs=1e-12)
    assert pu @ pv == pytest.approx(u @ v, abs=1e-12)
    np.testing.assert_allclose(parallel_transport(y, x, pv), v, atol=1e-10)


def test_squared_distance_gradient():
    # d/dy dist^2(x, y) along tangent w at y equals <-2 log_y x, w>
    rng = np.random.default_rng(7)
    for _ in range(30):
        x, y = random_points(rng, 4, 2)
        w = random_unit_tangents(rng, y[None])[0]
        h = 1e-5
        fd = (geodesic_distance(x, exp_map(y, h * w)) ** 2 - geodesic_distance(x, exp_map(y, -h * w)) ** 2) / (2 * h)
        assert fd == pytest.approx(-2 * log_map(y, x) @ w, abs=1e-6)
