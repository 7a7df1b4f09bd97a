import math

import numpy as np
import pytest

from lorentz_lab.geometry.fibers import FiberPoint, SphereFiber
from lorentz_lab.geometry.geodesic_engine import SpacetimePoint, TangentVector, integrate_geodesic
from lorentz_lab.geometry.metric_family import HypothesisCertificate, WarpedProduct
from lorentz_lab.utils.errors import PreconditionError
from lorentz_lab.verification.comparison_bounds import (
    BoundReport,
    check_endpoint_distance,
    check_length_bound,
    check_projection_bound,
    envelope_offset,
    generate_confined_batch,
    is_confined,
    projection_decomposition,
    riccati_envelope,
)


@pytest.fixture(scope="module")
def ds1():
    return WarpedProduct(fiber=SphereFiber(dim=1))


@pytest.fixture(scope="module")
def certificate():
    return HypothesisCertificate(t0=1.0, c=0.75)


@pytest.fixture(scope="module")
def batch(ds1, certificate):
    return generate_confined_batch(ds1, certificate, 4, seed=7, apex_offsets=(0.1, 1.5), both_sides=True)


def test_riccati_envelope_solves_its_equation():
    c, u0, step = 0.6, 0.4, 1e-6
    for u in (0.0, 1.0, 3.0):
        G = riccati_envelope(c, u0, u)
        numeric = (riccati_envelope(c, u0, u + step) - riccati_envelope(c, u0, u - step)) / (2 * step)
        assert numeric == pytest.approx(-c * (1 + G**2), rel=1e-6)


def test_riccati_envelope_preconditions():
    with pytest.raises(PreconditionError):
        riccati_envelope(0.0, 1.0, 0.0)
    with pytest.raises(PreconditionError):
        riccati_envelope(1.0, 0.5, math.pi)


@pytest.mark.parametrize("rate", [-3.0, 0.0, 2.5])
def test_envelope_offset_matches_initial_rate(rate):
    c = 0.8
    u0 = envelope_offset(c, rate)
    assert 0.0 < u0 < math.pi / c
    assert riccati_envelope(c, u0, 0.0) == pytest.approx(rate)


def test_batch_layout(batch):
    assert [traj.trajectory_id for traj in batch.full] == [0, 1, 2, 3]
    assert sorted(traj.trajectory_id for traj in batch.halves) == list(range(8))
    assert list(batch.apexes.columns) == ["id", "t", "chart_id", "x1"]
    assert batch.level == 1.0
    for traj in batch.full:
        assert is_confined(traj, 1.0)
        assert abs(traj.t[0]) == pytest.approx(1.0, abs=1e-8)
        assert abs(traj.t[-1]) == pytest.approx(1.0, abs=1e-8)


def test_length_bound_holds_in_de_sitter(ds1, certificate, batch):
    report = check_length_bound(ds1, certificate, batch.full)
    assert report.bound_name == "affine-length"
    assert report.bound_value == pytest.approx(math.pi / 0.75)
    assert report.passed
    assert report.sample_count == 4
    assert report.rejected == []
    assert report.worst_case_id in range(4)
    assert report.extras["envelope_violations"] == 0
    assert report.extras["concavity_min_margin"] >= -1e-8


def test_length_bound_rejects_inputs_outside_preconditions(ds1, certificate):
    timelike = integrate_geodesic(
        ds1, SpacetimePoint(2.0, FiberPoint(0, [0.0])), TangentVector(1.0, [0.0]), 0.5, trajectory_id=5
    )
    on_slice = integrate_geodesic(
        ds1, SpacetimePoint(0.0, FiberPoint(0, [0.0])), TangentVector(0.0, [1.0]), 0.5, trajectory_id=6
    )
    with pytest.warns(UserWarning, match="rejected 2"):
        report = check_length_bound(ds1, certificate, [on_slice, timelike])
    assert report.sample_count == 0
    assert report.observed_max == 0.0
    assert [row["id"] for row in report.rejected] == [5, 6]


def test_projection_bound_holds_in_de_sitter(ds1, certificate, batch):
    report = check_projection_bound(ds1, certificate, batch.halves)
    assert report.passed
    assert report.sample_count == 8
    assert report.bound_value == pytest.approx(math.pi / 0.75 + 1 / 0.75)
    assert report.extras["first_term_violations"] == 0
    assert report.extras["second_term_violations"] == 0
    assert report.extras["decomposition_violations"] == 0


def test_projection_bound_rejects_non_apex_start(ds1, certificate, batch):
    with pytest.warns(UserWarning, match="projected-length"):
        report = check_projection_bound(ds1, certificate, batch.full)
    assert all(row["reason"] == "does not start at its apex" for row in report.rejected)


def test_projection_decomposition_terms(certificate, batch):
    for traj in batch.halves:
        first, second = projection_decomposition(traj, certificate.c)
        assert 0.0 < first <= traj.length + 1e-8
        assert 0.0 <= second <= 1.0 / certificate.c + 1e-8


def test_endpoint_distance(ds1, certificate):
    T = 1.5
    batch = generate_confined_batch(ds1, certificate, 3, seed=1, level=T)

    def distance(p, q):
        return math.cosh(T) * ds1.fiber.base_distance(p, q)

    report = check_endpoint_distance(ds1, certificate, T, batch.full, distance, net_error=0.01)
    assert report.passed
    assert report.sample_count == 3
    assert report.bound_value == pytest.approx(2 * certificate.projection_bound + 0.01)
    assert report.extras["T"] == T
    with pytest.raises(PreconditionError):
        check_endpoint_distance(ds1, certificate, 1.0, batch.full, distance)


def test_bound_report_to_dict():
    report = BoundReport("affine-length", 4.0, 3.0, 2, worst_case_id=1)
    row = report.to_dict()
    assert row["margin"] == 1.0
    assert row["passed"]
    assert not BoundReport("affine-length", 4.0, 4.0, 1).passed


def test_batch_is_reproducible(ds1, certificate, batch):
    again = generate_confined_batch(ds1, certificate, 4, seed=7, apex_offsets=(0.1, 1.5), both_sides=True)
    for a, b in zip(batch.full, again.full):
        np.testing.assert_array_equal(a.t, b.t)
