import math

import numpy as np
import pytest

from lorentz_lab.geometry.de_sitter import (
    boost,
    causal_class_ambient,
    closed_form_geodesic,
    from_hyperboloid,
    is_lorentz,
    is_orientation_preserving,
    lorentz_generator,
    minkowski_inner,
    oracle_deviation,
    pull_tangent,
    push_tangent,
    require_de_sitter,
    rotation,
    sample_lorentz_elements,
    spacelike_distance,
    to_hyperboloid,
)
from lorentz_lab.geometry.fibers import FiberPoint, SphereFiber
from lorentz_lab.geometry.geodesic_engine import (
    CausalClass,
    SpacetimePoint,
    TangentVector,
    integrate_geodesic,
)
from lorentz_lab.geometry.metric_family import WarpFunction, WarpedProduct
from lorentz_lab.utils.errors import ConfigurationError, PreconditionError


@pytest.fixture(scope="module")
def ds2():
    return WarpedProduct(fiber=SphereFiber(dim=2))


@pytest.fixture(scope="module")
def point():
    return SpacetimePoint(0.7, FiberPoint(0, [0.3, -0.4]))


def test_require_de_sitter(ds2):
    assert require_de_sitter(ds2) is ds2.fiber
    with pytest.raises(ConfigurationError):
        require_de_sitter(WarpedProduct(SphereFiber(dim=2), WarpFunction("exp")))


def test_hyperboloid_round_trip(ds2, point):
    X = to_hyperboloid(ds2.fiber, point)
    assert minkowski_inner(X, X) == pytest.approx(1.0)
    back = from_hyperboloid(ds2.fiber, X)
    assert back.t == pytest.approx(point.t)
    np.testing.assert_allclose(
        ds2.fiber.embed(back.x.chart_id, back.x.coords), ds2.fiber.embed(0, point.x.coords), atol=1e-12
    )


def test_push_and_pull_tangent(ds2, point):
    v = TangentVector(0.4, [0.2, -0.5])
    X = to_hyperboloid(ds2.fiber, point)
    V = push_tangent(ds2.fiber, point, v)
    assert minkowski_inner(X, V) == pytest.approx(0.0, abs=1e-12)
    g = ds2.metric(point.t, 0, point.x.coords)
    assert minkowski_inner(V, V) == pytest.approx(-v.dt**2 + v.dx @ g @ v.dx)
    p, w = pull_tangent(ds2.fiber, X, V, chart_id=0)
    assert p.x.chart_id == 0
    np.testing.assert_allclose(p.x.coords, point.x.coords, atol=1e-12)
    assert w.dt == pytest.approx(v.dt)
    np.testing.assert_allclose(w.dx, v.dx, atol=1e-10)


@pytest.mark.parametrize("V", [[0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 1.0, 0.0]])
def test_closed_form_stays_on_hyperboloid(V):
    X = np.array([0.0, 1.0, 0.0, 0.0])
    s = np.linspace(0.0, 3.0, 31)
    positions, velocities = closed_form_geodesic(X, np.array(V), s)
    np.testing.assert_allclose(minkowski_inner(positions, positions), 1.0, atol=1e-12)
    np.testing.assert_allclose(minkowski_inner(positions, velocities), 0.0, atol=1e-12)
    np.testing.assert_allclose(minkowski_inner(velocities, velocities), minkowski_inner(V, V), atol=1e-12)


def test_causal_class_ambient():
    assert causal_class_ambient(np.array([0.0, 0.0, 1.0])) == CausalClass.SPACELIKE
    assert causal_class_ambient(np.array([1.0, 0.0, 0.0])) == CausalClass.TIMELIKE
    assert causal_class_ambient(np.array([1.0, 1.0, 0.0])) == CausalClass.NULL


def test_oracle_agrees_with_integrator(ds2, point):
    for velocity in (TangentVector(0.0, [0.3, 0.1]), TangentVector(1.0, [0.1, 0.0])):
        traj = integrate_geodesic(ds2, point, velocity, 2.0)
        assert oracle_deviation(ds2, traj) < 1e-5


def test_spacelike_distance():
    X = np.array([0.0, 1.0, 0.0])
    Y = np.array([0.0, math.cos(1.2), math.sin(1.2)])
    assert spacelike_distance(X, Y) == pytest.approx(1.2)
    assert spacelike_distance(X, X) == 0.0
    with pytest.raises(PreconditionError):
        spacelike_distance(X, -X)


def test_boost_and_rotation_are_lorentz():
    B = boost(4, 2, 1.5)
    R = rotation(4, 1, 3, 0.8)
    assert is_lorentz(B) and is_lorentz(R) and is_lorentz(B @ R)
    assert is_orientation_preserving(B @ R)
    assert not is_lorentz(np.diag([1.0, 2.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        boost(4, 0, 1.0)
    with pytest.raises(ValueError):
        rotation(4, 2, 2, 1.0)


def test_lorentz_generator():
    algebra = lorentz_generator(4, np.arange(1.0, 7.0))
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    np.testing.assert_allclose(algebra.T @ eta + eta @ algebra, 0.0)
    with pytest.raises(ValueError):
        lorentz_generator(4, np.zeros(5))


def test_sampled_elements_are_deterministic_isometries():
    first = sample_lorentz_elements(4, 5, seed=11)
    second = sample_lorentz_elements(4, 5, seed=11)
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a, b)
        assert is_lorentz(a)
        assert is_orientation_preserving(a)
