import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import sparse

from lorentz_lab.geometry.fibers import FiberPoint, SphereFiber
from lorentz_lab.geometry.metric_family import HypothesisCertificate, WarpedProduct
from lorentz_lab.utils.errors import InvalidInstanceError, PreconditionError
from lorentz_lab.verification.metric_space import (
    CoverInstance,
    NetDistance,
    add_growth_columns,
    build_net,
    check_cover_subadditivity,
    check_net_refinement,
    diameter_growth_curve,
    edge_length,
    estimate_diameter,
    graph_distance,
    interval_cover_instance,
    metric_scale,
    random_cover_instance,
    ring_cover_instance,
)


@pytest.fixture(scope="module")
def ds1():
    return WarpedProduct(fiber=SphereFiber(dim=1))


@pytest.fixture(scope="module")
def circle_net(ds1):
    return build_net(ds1, 0.0, 0.1)


def test_metric_scale(ds1):
    low, high = metric_scale(ds1, 1.0, ds1.fiber.sample_points(8))
    assert low == pytest.approx(math.cosh(1.0))
    assert high == pytest.approx(math.cosh(1.0))


def test_edge_length(ds1):
    p, q = FiberPoint(0, [0.1]), FiberPoint(0, [0.3])
    assert edge_length(ds1, 0.0, p, q) == pytest.approx(0.2)
    assert edge_length(ds1, 1.0, p, q) == pytest.approx(0.2 * math.cosh(1.0))


def test_circle_net(circle_net):
    assert len(circle_net) > 2 * math.pi / 0.2
    assert circle_net.edge_count > 0
    assert list(circle_net.node_frame().columns) == ["id", "chart_id", "x1"]
    edges = circle_net.edge_frame()
    assert list(edges.columns) == ["i", "j", "weight"]
    assert (edges["weight"] <= 3 * 0.1 + 1e-12).all()
    assert (edges["i"] < edges["j"]).all()


def test_circle_diameter(circle_net):
    estimate = estimate_diameter(circle_net)
    assert estimate.exact
    assert estimate.lower == estimate.upper
    assert estimate.upper == pytest.approx(math.pi, abs=0.1)
    assert estimate.upper <= math.pi + 1e-9


def test_two_sweep_bounds_bracket_the_diameter(circle_net):
    exact = estimate_diameter(circle_net).upper
    approximate = estimate_diameter(circle_net, exact_limit=1)
    assert not approximate.exact
    assert approximate.lower <= exact + 1e-12
    assert approximate.upper >= exact - 1e-12


def test_graph_distance(circle_net):
    assert graph_distance(circle_net, 0, 0) == 0.0
    assert graph_distance(circle_net, 0, 1) > 0.0


def test_diameter_scales_with_the_warp(ds1):
    estimate = estimate_diameter(build_net(ds1, 1.0, 0.2))
    assert estimate.upper == pytest.approx(math.pi * math.cosh(1.0), abs=0.2)


def test_build_net_preconditions(ds1):
    with pytest.raises(PreconditionError):
        build_net(ds1, 0.0, 0.0)
    with pytest.raises(InvalidInstanceError):
        build_net(ds1, 0.0, 10.0)


def test_net_distance(ds1, circle_net):
    distance = NetDistance(circle_net, ds1)
    p, q = FiberPoint(0, [0.0]), FiberPoint(0, [math.pi])
    assert distance(p, q) == pytest.approx(math.pi, abs=distance.tolerance)
    assert distance(p, p) == 0.0
    assert distance(p, q) == distance(q, p)


@pytest.mark.parametrize("instance", [interval_cover_instance(), ring_cover_instance()], ids=["interval", "ring"])
def test_structured_covers(instance):
    report = check_cover_subadditivity(instance)
    assert report.passed
    assert report.diameter <= report.part_sum
    assert report.to_dict()["margin"] == pytest.approx(report.part_sum - report.diameter)


def test_interval_cover_values():
    report = check_cover_subadditivity(interval_cover_instance())
    assert report.diameter == pytest.approx(1.0)
    assert report.part_diameters == pytest.approx([0.6, 0.6])


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_covers(seed):
    instance = random_cover_instance(np.random.default_rng(seed), max_nodes=60)
    instance.validate()
    report = check_cover_subadditivity(instance)
    assert report.passed
    assert report.diameter <= report.part_sum + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=62), min_size=3, max_size=3))
def test_graph_distance_triangle_inequality(circle_net, nodes):
    i, j, k = (n % len(circle_net) for n in nodes)
    d_ik = graph_distance(circle_net, i, k)
    assert d_ik <= graph_distance(circle_net, i, j) + graph_distance(circle_net, j, k) + 1e-12
    assert graph_distance(circle_net, k, i) == pytest.approx(d_ik)


def _path_graph(n: int) -> sparse.csr_matrix:
    graph = sparse.diags([np.ones(n - 1)], [1], shape=(n, n)).tocsr()
    return graph.maximum(graph.T)


@pytest.mark.parametrize(
    "parts, message",
    [
        ([[0, 1, 2], [2, 3]], "miss"),
        ([[0, 1, 2], [], [2, 3, 4]], "empty"),
        ([[0, 2], [0, 1, 2, 3, 4]], "not connected"),
        ([[0, 1], [2, 3, 4]], "chain"),
    ],
)
def test_invalid_covers(parts, message):
    instance = CoverInstance.from_graph(_path_graph(5), parts, name="path")
    with pytest.raises(InvalidInstanceError, match=message):
        check_cover_subadditivity(instance)


def test_disconnected_space():
    graph = sparse.csr_matrix((4, 4))
    instance = CoverInstance.from_graph(graph, [[0, 1, 2, 3]])
    with pytest.raises(InvalidInstanceError, match="disconnected"):
        instance.validate()


def test_add_growth_columns():
    frame = pd.DataFrame({"T": [2.0, 1.0], "lower": [6.0, 3.0], "upper": [6.0, 3.0], "nodes": [20, 10]})
    grown = add_growth_columns(frame, HypothesisCertificate(t0=1.0, c=0.5))
    assert grown["T"].tolist() == [1.0, 2.0]
    assert math.isnan(grown["ratio"][0])
    assert grown["ratio"][1] == pytest.approx(2.0)
    assert grown["ratio_bound"][1] == pytest.approx(math.exp(0.5) - 1e-3)
    assert grown["growth_ok"].tolist() == [True, True]
    plain = add_growth_columns(frame, None)
    assert plain["growth_ok"].isna().all()


def test_diameter_growth_curve(ds1):
    certificate = HypothesisCertificate(t0=1.0, c=0.75)
    curve = diameter_growth_curve(ds1, certificate, [1.5, 1.0], 0.1)
    assert list(curve.columns) == ["T", "lower", "upper", "nodes", "ratio", "ratio_bound", "growth_ok"]
    assert curve["T"].tolist() == [1.0, 1.5]
    assert bool(curve["growth_ok"].all())
    with pytest.raises(PreconditionError):
        diameter_growth_curve(ds1, certificate, [0.5, 1.0], 0.1)


def test_diameter_growth_curve_records_slow_growth(ds1):
    curve = diameter_growth_curve(ds1, HypothesisCertificate(t0=1.0, c=3.0), [1.0, 1.5], 0.1)
    assert curve["growth_ok"].tolist() == [True, False]
    assert curve["ratio"][1] == pytest.approx(math.cosh(1.5) / math.cosh(1.0), rel=0.05)


def test_net_refinement(ds1):
    result = check_net_refinement(ds1, 0.0, 0.2, tol=0.1)
    assert result["passed"]
    assert result["fine"] == pytest.approx(math.pi, abs=0.1)
