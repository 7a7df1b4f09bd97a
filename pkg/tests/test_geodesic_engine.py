import math

import numpy as np
import pandas as pd
import pytest

from lorentz_lab.geometry.fibers import FiberPoint, SphereFiber
from lorentz_lab.geometry.geodesic_engine import (
    CausalClass,
    IntegrationSettings,
    LevelCrossing,
    SpacetimePoint,
    TangentVector,
    Trajectory,
    causal_classify,
    geodesic_rhs,
    integrate_geodesic,
    maximal_slab_extension,
    project_and_measure,
)
from lorentz_lab.geometry.metric_family import HypothesisCertificate, WarpedProduct
from lorentz_lab.utils.errors import ChartDomainError, PreconditionError


@pytest.fixture(scope="module")
def ds1():
    return WarpedProduct(fiber=SphereFiber(dim=1))


@pytest.fixture(scope="module")
def ds2():
    return WarpedProduct(fiber=SphereFiber(dim=2))


@pytest.fixture(scope="module")
def slice_geodesic(ds1):
    start = SpacetimePoint(0.0, FiberPoint(0, [0.0]))
    return integrate_geodesic(ds1, start, TangentVector(0.0, [1.0]), 1.0)


def test_causal_classify(ds1):
    p = SpacetimePoint(0.0, FiberPoint(0, [0.0]))
    assert causal_classify(ds1, p, TangentVector(0.0, [1.0])) == CausalClass.SPACELIKE
    assert causal_classify(ds1, p, TangentVector(1.0, [0.0])) == CausalClass.TIMELIKE
    assert causal_classify(ds1, p, TangentVector(1.0, [1.0])) == CausalClass.NULL
    with pytest.raises(PreconditionError):
        causal_classify(ds1, p, TangentVector(0.0, [0.0]))


def test_geodesic_rhs_on_time_symmetric_slice(ds1):
    p = SpacetimePoint(0.0, FiberPoint(0, [0.3]))
    velocity, acceleration = geodesic_rhs(ds1, (p, TangentVector(0.0, [2.0])))
    assert velocity.dt == 0.0
    np.testing.assert_allclose(velocity.dx, [2.0])
    assert acceleration.dt == pytest.approx(0.0)
    np.testing.assert_allclose(acceleration.dx, [0.0], atol=1e-15)


def test_slice_geodesic_stays_on_the_slice(slice_geodesic):
    assert slice_geodesic.causal == CausalClass.SPACELIKE
    np.testing.assert_allclose(slice_geodesic.t, 0.0, atol=1e-12)
    np.testing.assert_allclose(slice_geodesic.x[:, 0], slice_geodesic.u, atol=1e-8)
    assert slice_geodesic.affine_length == pytest.approx(1.0)
    assert slice_geodesic.length == pytest.approx(1.0)
    assert slice_geodesic.valid


def test_samples_are_dense(slice_geodesic):
    assert np.max(np.diff(slice_geodesic.u)) <= 0.05 + 1e-12
    assert np.all(np.diff(slice_geodesic.u) > 0)


def test_vertical_geodesic(ds1):
    start = SpacetimePoint(-0.5, FiberPoint(0, [1.0]))
    traj = integrate_geodesic(ds1, start, TangentVector(1.0, [0.0]), 2.0)
    assert traj.causal == CausalClass.TIMELIKE
    assert traj.t[-1] == pytest.approx(1.5)
    np.testing.assert_allclose(traj.x[:, 0], 1.0)
    assert traj.initial_norm == pytest.approx(-1.0)


def test_boosted_timelike_geodesic_is_time_monotone(ds1):
    start = SpacetimePoint(0.0, FiberPoint(0, [0.0]))
    traj = integrate_geodesic(ds1, start, TangentVector(math.cosh(1.0), [math.sinh(1.0)]), 2.0)
    assert traj.causal == CausalClass.TIMELIKE
    assert traj.time_monotone
    assert traj.valid
    assert np.all(traj.dt > 0)
    assert np.all(np.diff(traj.t) > 0)


def test_time_sign_change_invalidates_timelike_samples(ds1):
    traj = Trajectory.from_arrays(
        ds1, [0.0, 1.0, 2.0], [0.0, 0.1, 0.0], [0, 0, 0], [[0.0], [0.0], [0.0]], [1.0, -1.0, 1.0], [[0.0], [0.0], [0.0]]
    )
    assert traj.causal == CausalClass.TIMELIKE
    assert traj.norm_drift == 0.0
    assert not traj.time_monotone
    assert not traj.valid
    assert not Trajectory.concatenate([traj, traj.reversed()]).time_monotone


def test_time_reversal_mirrors_trajectories(ds1):
    forward = integrate_geodesic(ds1, SpacetimePoint(0.4, FiberPoint(0, [0.3])), TangentVector(0.2, [0.9]), 1.5)
    mirrored = integrate_geodesic(ds1, SpacetimePoint(-0.4, FiberPoint(0, [0.3])), TangentVector(-0.2, [0.9]), 1.5)
    assert len(forward) == len(mirrored)
    np.testing.assert_allclose(forward.u, mirrored.u, atol=1e-8)
    np.testing.assert_allclose(forward.t, -mirrored.t, atol=1e-8)
    np.testing.assert_allclose(forward.x, mirrored.x, atol=1e-8)
    np.testing.assert_allclose(forward.dt, -mirrored.dt, atol=1e-8)


def test_null_geodesic_keeps_its_norm(ds1):
    start = SpacetimePoint(0.2, FiberPoint(0, [0.0]))
    traj = integrate_geodesic(ds1, start, TangentVector(1.0, [1.0 / math.cosh(0.2)]), 3.0)
    assert traj.causal == CausalClass.NULL
    assert np.max(np.abs(traj.h_norm)) < 1e-7


def test_level_crossing_stops_integration(ds1):
    start = SpacetimePoint(1.5, FiberPoint(0, [0.0]))
    crossing = LevelCrossing(levels=(1.0,), direction=-1, terminal=True)
    traj = integrate_geodesic(ds1, start, TangentVector(-1.0, [0.0]), 5.0, crossing)
    assert len(traj.crossings) == 1
    assert traj.crossings[0].u == pytest.approx(0.5, abs=1e-9)
    assert traj.u[-1] == pytest.approx(0.5, abs=1e-9)
    assert traj.t[-1] == pytest.approx(1.0, abs=1e-9)


def test_great_circle_with_chart_switches(ds2):
    start = SpacetimePoint(0.0, FiberPoint(0, [0.0, 0.0]))
    traj = integrate_geodesic(ds2, start, TangentVector(0.0, [0.5, 0.0]), 4.0)
    assert set(np.unique(traj.chart)) == {0, 1}
    omega = ds2.fiber.embed(traj.chart[-1], traj.x[-1])
    np.testing.assert_allclose(omega, [math.sin(4.0), 0.0, -math.cos(4.0)], atol=1e-7)
    assert traj.norm_drift < 1e-7


def test_invalid_inputs(ds2):
    start = SpacetimePoint(0.0, FiberPoint(0, [0.0, 0.0]))
    with pytest.raises(PreconditionError):
        integrate_geodesic(ds2, start, TangentVector(0.0, [0.0, 0.0]), 1.0)
    with pytest.raises(PreconditionError):
        integrate_geodesic(ds2, start, TangentVector(1.0, [0.0, 0.0]), 0.0)
    with pytest.raises(ChartDomainError):
        integrate_geodesic(ds2, SpacetimePoint(0.0, FiberPoint(0, [5.0, 0.0])), TangentVector(1.0, [0.0, 0.0]), 1.0)
    with pytest.raises(ValueError):
        TangentVector(float("nan"), [0.0])


def test_drift_flags_trajectory(ds2):
    start = SpacetimePoint(0.5, FiberPoint(0, [0.2, -0.1]))
    strict = IntegrationSettings(drift_per_length=0.0)
    with pytest.warns(UserWarning, match="norm drift"):
        traj = integrate_geodesic(ds2, start, TangentVector(0.3, [0.2, 0.4]), 2.0, settings=strict)
    assert not traj.valid


def test_reversed_and_concatenated(slice_geodesic):
    backwards = slice_geodesic.reversed()
    assert backwards.u[0] == 0.0
    np.testing.assert_allclose(backwards.x[0], slice_geodesic.x[-1])
    np.testing.assert_allclose(backwards.dx[:, 0], -1.0, atol=1e-9)
    joined = Trajectory.concatenate([slice_geodesic, backwards])
    assert len(joined) == 2 * len(slice_geodesic) - 1
    assert joined.affine_length == pytest.approx(2.0)


def test_to_dataframe(slice_geodesic):
    frame = slice_geodesic.to_dataframe()
    assert isinstance(frame, pd.DataFrame)
    assert list(frame.columns) == ["u", "t", "chart_id", "x1", "dt", "dx1", "h_norm"]
    assert len(frame) == len(slice_geodesic)


def test_from_arrays_requires_increasing_parameter(ds1):
    with pytest.raises(ValueError):
        Trajectory.from_arrays(ds1, [0.0, 0.0], [0.0, 0.0], [0, 0], [[0.0], [0.0]], [0.0, 0.0], [[1.0], [1.0]])


def test_project_and_measure(ds1, slice_geodesic):
    projected = project_and_measure(ds1, slice_geodesic, 1.0)
    assert projected.length == pytest.approx(math.cosh(1.0), rel=1e-8)
    assert projected.error_estimate < 1e-8
    assert list(projected.points.columns) == ["u", "chart_id", "x1", "speed"]


def test_project_and_measure_warns_on_gaps(ds1, slice_geodesic):
    with pytest.warns(UserWarning, match="gaps"):
        project_and_measure(ds1, slice_geodesic, 1.0, max_gap=1e-6)


def test_maximal_slab_extension(ds1):
    certificate = HypothesisCertificate(t0=0.5, c=0.75)
    apex = SpacetimePoint(2.0, FiberPoint(0, [1.0]))
    seed = integrate_geodesic(ds1, apex, TangentVector(0.0, [1.0 / math.cosh(2.0)]), 0.1)
    extended = maximal_slab_extension(ds1, seed, 1.0, certificate)
    assert extended.u[0] == 0.0
    assert extended.t[0] == pytest.approx(1.0, abs=1e-8)
    assert extended.t[-1] == pytest.approx(1.0, abs=1e-8)
    # sinh t = cos(s)·sinh(2) along a unit geodesic from the apex
    half = math.acos(math.sinh(1.0) / math.sinh(2.0))
    assert extended.length == pytest.approx(half + (half - 0.1) + 0.1, rel=1e-6)
    assert extended.length < certificate.length_bound


def test_maximal_slab_extension_preconditions(ds1):
    certificate = HypothesisCertificate(t0=1.0, c=0.75)
    timelike = integrate_geodesic(ds1, SpacetimePoint(2.0, FiberPoint(0, [0.0])), TangentVector(1.0, [0.0]), 0.1)
    with pytest.raises(PreconditionError):
        maximal_slab_extension(ds1, timelike, 1.0, certificate)
    seed = integrate_geodesic(ds1, SpacetimePoint(2.0, FiberPoint(0, [0.0])), TangentVector(0.0, [0.1]), 0.1)
    with pytest.raises(PreconditionError):
        maximal_slab_extension(ds1, seed, 0.5, certificate)
    with pytest.raises(PreconditionError, match="must exceed"):
        maximal_slab_extension(ds1, seed, 1.0, certificate)
