import math

import numpy as np
import pytest

from lorentz_lab.geometry.de_sitter import boost, minkowski_inner, rotation, to_hyperboloid
from lorentz_lab.geometry.fibers import FiberPoint, SphereFiber, TorusFiber
from lorentz_lab.geometry.geodesic_engine import SpacetimePoint, TangentVector
from lorentz_lab.geometry.metric_family import (
    HypothesisCertificate,
    TorusMatrix,
    WarpFunction,
    WarpedProduct,
)
from lorentz_lab.utils.errors import ConfigurationError, PreconditionError
from lorentz_lab.verification.isometry_harness import (
    IsometryAction,
    SlabSpec,
    apply_isometry,
    divergence_proposition_check,
    hessian_trace,
    isometry_defect,
    main_theorem_experiment,
    orbit_return_experiment,
    slab_intersection_test,
    time_reflection_matrix,
)


@pytest.fixture(scope="module")
def ds1():
    return WarpedProduct(fiber=SphereFiber(dim=1))


@pytest.fixture(scope="module")
def ds2():
    return WarpedProduct(fiber=SphereFiber(dim=2))


@pytest.fixture(scope="module")
def boost1():
    return IsometryAction.lorentz(boost(3, 1, 1.0), label="boost")


def test_action_validation():
    with pytest.raises(ValueError):
        IsometryAction.lorentz(np.diag([1.0, 2.0, 1.0]))
    with pytest.raises(ValueError):
        IsometryAction("fiber")
    with pytest.raises(ValueError):
        IsometryAction("fiber", matrix=np.eye(3), shift=np.zeros(1))


def test_orientation(boost1):
    assert boost1.preserves_orientation
    assert not IsometryAction.time_reflection().preserves_orientation
    assert not IsometryAction.lorentz(time_reflection_matrix(3)).preserves_orientation
    assert IsometryAction.fiber_translation([0.3]).preserves_orientation
    assert boost1.to_dict()["orientation"] == "preserving"


def test_composition_and_powers():
    first = IsometryAction.lorentz(boost(3, 1, 0.4), label="a")
    second = IsometryAction.lorentz(boost(3, 1, 0.6), label="b")
    np.testing.assert_allclose(first.then(second).matrix, boost(3, 1, 1.0), atol=1e-12)
    np.testing.assert_allclose(first.power(3).matrix, boost(3, 1, 1.2), atol=1e-12)
    with pytest.raises(ValueError):
        first.power(0)
    shift = IsometryAction.fiber_translation([0.5])
    np.testing.assert_allclose(shift.then(shift).shift, [1.0])
    assert IsometryAction.time_reflection().power(2).preserves_orientation
    with pytest.raises(ValueError):
        shift.then(IsometryAction.time_reflection())


def test_lorentz_action_on_points(ds1, boost1):
    p = SpacetimePoint(0.3, FiberPoint(0, [1.2]))
    image = apply_isometry(boost1, ds1, p)
    expected = boost1.matrix @ to_hyperboloid(ds1.fiber, p)
    np.testing.assert_allclose(to_hyperboloid(ds1.fiber, image), expected, atol=1e-12)
    assert minkowski_inner(expected, expected) == pytest.approx(1.0)


def test_actions_check_the_family(boost1):
    exp_family = WarpedProduct(SphereFiber(dim=2), WarpFunction("exp"))
    p = SpacetimePoint(0.0, FiberPoint(0, [0.0, 0.0]))
    with pytest.raises(ConfigurationError):
        apply_isometry(IsometryAction.time_reflection(), exp_family, p)
    with pytest.raises(ConfigurationError):
        apply_isometry(IsometryAction.lorentz(boost(4, 1, 0.5)), exp_family, p)
    with pytest.raises(ConfigurationError):
        apply_isometry(IsometryAction.fiber_translation([0.1, 0.2]), exp_family, p)
    torus = TorusMatrix.constant(TorusFiber(2), np.eye(2))
    with pytest.raises(ConfigurationError):
        apply_isometry(IsometryAction.fiber_rotation(np.eye(2)), torus, p)


@pytest.mark.parametrize(
    "action",
    [
        IsometryAction.lorentz(boost(4, 2, 0.8) @ rotation(4, 1, 3, 0.5)),
        IsometryAction.fiber_rotation(rotation(4, 1, 2, 0.7)[1:, 1:]),
        IsometryAction.time_reflection(),
    ],
    ids=["lorentz", "rotation", "reflection"],
)
def test_isometry_defect_is_small(ds2, action):
    assert isometry_defect(action, ds2, samples=20) < 1e-8


def test_translation_of_a_torus_family():
    family = TorusMatrix.diagonal(TorusFiber(2), [WarpFunction("cosh"), WarpFunction("exp")])
    action = IsometryAction.fiber_translation([1.0, -2.0])
    assert isometry_defect(action, family, samples=10) < 1e-12
    image = apply_isometry(action, family, SpacetimePoint(0.5, FiberPoint(0, [6.0, 1.0])))
    np.testing.assert_allclose(image.x.coords, [7.0 - 2 * math.pi, 2 * math.pi - 1.0])


def test_slab_spec():
    slab = SlabSpec(1.0)
    assert slab.contains(SpacetimePoint(-1.0, FiberPoint(0, [0.0])))
    assert not slab.contains(SpacetimePoint(1.1, FiberPoint(0, [0.0])))
    with pytest.raises(ValueError):
        SlabSpec(0.0)


def test_boost_meets_the_slab(ds1, boost1):
    slab = SlabSpec(1.0)
    result = slab_intersection_test(boost1, slab, ds1)
    assert result.intersects
    assert slab.contains(result.witness)
    assert slab.contains(result.image)
    assert result.min_abs_t <= 1.0
    assert result.to_dict()["witness"]["t"] == result.witness.t


def test_slab_test_rejects_orientation_reversal(ds1):
    with pytest.raises(PreconditionError):
        slab_intersection_test(IsometryAction.time_reflection(), SlabSpec(1.0), ds1)


def test_hessian_trace(ds1):
    q = SpacetimePoint(1.0, FiberPoint(0, [0.0]))
    unit = TangentVector(0.0, [1.0 / math.cosh(1.0)])
    assert hessian_trace(ds1, q, [unit]) == pytest.approx(-math.tanh(1.0))
    with pytest.raises(PreconditionError):
        hessian_trace(ds1, q, [TangentVector(0.0, [1.0])])


def test_divergence_check_on_the_circle(ds1):
    action = IsometryAction.lorentz(boost(3, 1, 2.0))
    report = divergence_proposition_check(ds1, action, 1.0, resolution=2000)
    assert report.passed
    assert report.max_t == pytest.approx(2.0, abs=1e-4)
    assert 0 < report.beyond_count < report.sample_count
    assert not report.confined_beyond_T
    assert report.max_trace_beyond < 0
    assert abs(report.integral) <= 1e-4
    assert report.to_dict()["sample_count"] == report.sample_count


def test_divergence_check_preconditions(ds1):
    action = IsometryAction.lorentz(boost(3, 1, 2.0))
    with pytest.raises(PreconditionError):
        divergence_proposition_check(ds1, action, 5.0, resolution=500)
    torus = TorusMatrix.diagonal(TorusFiber(1), [WarpFunction("exp")])
    with pytest.raises(PreconditionError):
        divergence_proposition_check(torus, IsometryAction.fiber_translation([0.5]), 0.5)


def test_orbit_returns(ds1, boost1):
    frame = orbit_return_experiment(boost1, SlabSpec(1.0), ds1, powers=3)
    assert list(frame.columns) == ["k", "intersects", "witness_t", "image_t", "min_abs_t"]
    assert frame["k"].tolist() == [1, 2, 3]
    assert frame["intersects"].all()


def test_slab_intersection_experiment(ds1, boost1):
    certificate = HypothesisCertificate(t0=1.0, c=0.75)
    isometries = [boost1, IsometryAction.time_reflection(), IsometryAction.fiber_translation([2.0])]
    report = main_theorem_experiment(
        ds1, certificate, 2.0, 0.5, isometries, net_epsilon=0.1, T_step=1.0, pair_budget=4
    )
    assert report.passed
    assert report.filtered == [1]
    assert [entry["id"] for entry in report.isometries] == [0, 2]
    assert report.threshold == pytest.approx(2 * report.n_cover * certificate.projection_bound)
    assert report.dia_T2 > report.threshold
    assert report.diameters[-1]["T"] == report.T2
    assert report.to_dict()["passed"]


def test_experiment_preconditions(ds1, boost1):
    certificate = HypothesisCertificate(t0=1.0, c=0.75)
    with pytest.raises(PreconditionError):
        main_theorem_experiment(ds1, certificate, 1.2, 0.5, [boost1])
    with pytest.raises(ConfigurationError):
        main_theorem_experiment(ds1, certificate, 2.0, 0.5, [boost1], net_epsilon=0.1, T_step=1.0, T_budget=0.5)
