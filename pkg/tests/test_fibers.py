import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_lab.geometry.fibers import (
    FiberPoint,
    SphereFiber,
    TorusFiber,
    make_fiber,
    wrap_difference,
)
from lorentz_lab.utils.errors import ChartDomainError

angles = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False, allow_infinity=False)


@pytest.fixture(scope="module")
def s2():
    return SphereFiber(dim=2)


def test_default_chart_systems():
    assert SphereFiber(dim=1).chart_system == "angle"
    assert SphereFiber(dim=2).chart_system == "stereographic"
    assert SphereFiber(dim=2).n_charts == 2
    assert SphereFiber(dim=2, chart_system="polar").n_charts == 1
    assert TorusFiber(dim=2).n_charts == 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"dim": 4},
        {"dim": 2, "chart_system": "angle"},
        {"dim": 3, "chart_system": "polar"},
        {"dim": 1, "chart_system": "stereographic"},
    ],
)
def test_unsupported_sphere_charts(kwargs):
    with pytest.raises(ValueError):
        SphereFiber(**kwargs)


def test_make_fiber():
    assert isinstance(make_fiber("sphere", 2), SphereFiber)
    assert isinstance(make_fiber("torus", 3), TorusFiber)
    assert make_fiber("sphere", 2, "polar").chart_system == "polar"


def test_fiber_point_is_read_only():
    point = FiberPoint(0, [1.0, 2.0])
    assert point.dim == 2
    with pytest.raises(ValueError):
        point.coords[0] = 3.0
    assert point.to_dict() == {"chart": 0, "coords": [1.0, 2.0]}


def test_validate_rejects_bad_points(s2):
    s2.validate(FiberPoint(0, [0.3, -0.2]))
    with pytest.raises(ChartDomainError):
        s2.validate(FiberPoint(0, [0.3]))
    with pytest.raises(ChartDomainError):
        s2.validate(FiberPoint(2, [0.3, 0.1]))
    with pytest.raises(ChartDomainError):
        s2.validate(FiberPoint(0, [5.0, 0.0]))
    with pytest.raises(ChartDomainError):
        s2.validate(FiberPoint(0, [np.nan, 0.0]))


def test_chart_domain_error_is_value_error():
    assert issubclass(ChartDomainError, ValueError)


def test_stereographic_embedding_is_unit(s2):
    for point in s2.sample_points(50, seed=3):
        omega = s2.embed(point.chart_id, point.coords)
        assert np.linalg.norm(omega) == pytest.approx(1.0, abs=1e-12)
        back = s2.from_embedding(omega)
        np.testing.assert_allclose(s2.embed(back.chart_id, back.coords), omega, atol=1e-12)


def test_transition_matches_embedding(s2):
    y = np.array([0.9, -1.1])
    v = np.array([0.3, 0.2])
    chart, z, w = s2.transition(0, y, v)
    assert chart == 1
    np.testing.assert_allclose(s2.embed(1, z), s2.embed(0, y), atol=1e-12)
    np.testing.assert_allclose(
        s2.embed_jacobian(1, z) @ w, s2.embed_jacobian(0, y) @ v, atol=1e-12
    )


def test_embed_jacobian_matches_finite_difference(s2):
    y = np.array([0.4, 0.7])
    step = 1e-6
    numeric = np.column_stack(
        [(s2.embed(0, y + step * e) - s2.embed(0, y - step * e)) / (2 * step) for e in np.eye(2)]
    )
    np.testing.assert_allclose(s2.embed_jacobian(0, y), numeric, atol=1e-8)


def test_base_metric_is_pullback(s2):
    y = np.array([-0.5, 1.2])
    jacobian = s2.embed_jacobian(0, y)
    np.testing.assert_allclose(s2.base_metric(0, y), jacobian.T @ jacobian, atol=1e-12)


def test_polar_christoffels():
    fiber = SphereFiber(dim=2, chart_system="polar")
    theta = 0.7
    gamma = fiber.base_christoffels(0, np.array([theta, 1.0]))
    assert gamma[0, 1, 1] == pytest.approx(-np.sin(theta) * np.cos(theta))
    assert gamma[1, 0, 1] == pytest.approx(1.0 / np.tan(theta))


def test_stereographic_christoffels_match_metric_derivative(s2):
    y = np.array([0.3, -0.8])
    g = s2.base_metric(0, y)
    dg = s2.base_metric_derivative(0, y)
    lowered = 0.5 * (
        np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("lij->lij", dg)
    )
    expected = np.einsum("kl,lij->kij", np.linalg.inv(g), lowered)
    np.testing.assert_allclose(s2.base_christoffels(0, y), expected, atol=1e-12)


def test_sample_points_are_deterministic(s2):
    first = s2.sample_points(20, seed=5)
    second = s2.sample_points(20, seed=5)
    assert all(
        a.chart_id == b.chart_id and np.array_equal(a.coords, b.coords) for a, b in zip(first, second)
    )
    for point in first:
        s2.validate(point)


def test_grid_spacing():
    circle = SphereFiber(dim=1).grid(0.1)
    assert len(circle) == 63
    torus = TorusFiber(dim=2).grid(0.5)
    assert len(torus) == 13**2
    sphere = SphereFiber(dim=2).grid(0.2)
    assert len(sphere) == int(np.ceil(4 * np.pi / 0.04))


def test_polar_samples_stay_off_the_poles():
    fiber = SphereFiber(dim=2, chart_system="polar")
    for point in fiber.sample_points(100, seed=1):
        assert 0.05 <= point.coords[0] <= np.pi - 0.05


def test_base_distance_of_antipodes(s2):
    north = s2.from_embedding(np.array([0.0, 0.0, 1.0]))
    south = s2.from_embedding(np.array([0.0, 0.0, -1.0]))
    assert s2.base_distance(north, south) == pytest.approx(np.pi)


def test_torus_distance_wraps():
    torus = TorusFiber(dim=2)
    p = FiberPoint(0, [0.1, 0.0])
    q = FiberPoint(0, [2 * np.pi - 0.1, 0.0])
    assert torus.base_distance(p, q) == pytest.approx(0.2)


def test_express_in_chart_round_trip(s2):
    point = FiberPoint(0, [0.6, 0.2])
    other = s2.express_in_chart(point, 1)
    np.testing.assert_allclose(s2.embed(1, other), s2.embed(0, point.coords), atol=1e-12)


def test_neighbor_pairs_on_circle():
    circle = SphereFiber(dim=1)
    points = circle.grid(0.1)
    pairs = circle.neighbor_pairs(points, radius=0.15)
    assert len(pairs) == len(points)


@given(angles)
def test_wrap_difference_range(value):
    wrapped = float(wrap_difference(value))
    assert -np.pi < wrapped <= np.pi + 1e-12
    assert np.cos(wrapped) == pytest.approx(np.cos(value), abs=1e-9)


@settings(max_examples=50)
@given(angles, angles)
def test_circle_distance_is_symmetric(a, b):
    circle = SphereFiber(dim=1)
    p, q = circle.normalize(0, [a]), circle.normalize(0, [b])
    assert circle.base_distance(p, q) == pytest.approx(circle.base_distance(q, p), abs=1e-12)
    assert 0.0 <= circle.base_distance(p, q) <= np.pi + 1e-12
