"""
Metric Space Module

Finite approximations of the Riemannian slices (F, g_T): ε-nets with graph
distances, diameter estimates, finite covers and the cover-diameter
inequality dia(X) ≤ Σ dia(A_i), and the growth curve T ↦ dia(F_T).

Classes:
    NetGraph: ε-net of a slice with g_T edge weights.
    DiameterEstimate: Lower and upper bounds on a net diameter.
    NetDistance: Intrinsic distance on F_T through a net.
    CoverInstance: Finite metric space with a cover by parts.
    CoverReport: Outcome of the cover-diameter inequality.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from cachetools import LRUCache
from scipy import linalg, sparse
from scipy.sparse.csgraph import connected_components, dijkstra, shortest_path
from scipy.spatial import cKDTree

from lorentz_lab.geometry.fibers import FiberPoint
from lorentz_lab.geometry.metric_family import HypothesisCertificate, MetricFamily
from lorentz_lab.utils.errors import InvalidInstanceError, PreconditionError

logger = logging.getLogger(__name__)

EXACT_DIAMETER_LIMIT = 5000


@dataclass(eq=False)
class NetGraph:
    """
    ε-net of the slice (F, g_T).

    Attributes:
        nodes (list): Net points.
        weights (sparse.csr_matrix): Symmetric edge weights (g_T edge lengths).
        epsilon (float): Net fineness.
        T (float): Slice level.
    """

    nodes: list[FiberPoint]
    weights: sparse.csr_matrix
    epsilon: float
    T: float

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return int(sparse.triu(self.weights).nnz)

    def node_frame(self) -> pd.DataFrame:
        rows = []
        for i, node in enumerate(self.nodes):
            row = {"id": i, "chart_id": node.chart_id}
            row.update({f"x{k + 1}": c for k, c in enumerate(node.coords)})
            rows.append(row)
        return pd.DataFrame(rows)

    def edge_frame(self) -> pd.DataFrame:
        upper = sparse.triu(self.weights).tocoo()
        frame = pd.DataFrame({"i": upper.row, "j": upper.col, "weight": upper.data})
        return frame.sort_values(["i", "j"], ignore_index=True)


def metric_scale(family: MetricFamily, T: float, points: list[FiberPoint]) -> tuple[float, float]:
    """Smallest and largest sqrt of the eigenvalues of g_T relative to g₀ over ``points``."""
    low, high = math.inf, 0.0
    for p in points:
        values = linalg.eigh(
            family.metric(T, p.chart_id, p.coords),
            family.fiber.base_metric(p.chart_id, p.coords),
            eigvals_only=True,
        )
        low, high = min(low, float(values[0])), max(high, float(values[-1]))
    return math.sqrt(low), math.sqrt(high)


def edge_length(family: MetricFamily, T: float, p: FiberPoint, q: FiberPoint) -> float:
    """g_T length of the chart segment p → q with the metric taken at its midpoint."""
    fiber = family.fiber
    target = fiber.express_in_chart(q, p.chart_id)
    delta = fiber.chart_difference(p.chart_id, p.coords, target)
    midpoint = p.coords + 0.5 * delta
    return math.sqrt(float(delta @ family.metric(T, p.chart_id, midpoint) @ delta))


def _weighted_graph(
    family: MetricFamily, T: float, points: list[FiberPoint], radius: float, cutoff: float = math.inf
) -> sparse.csr_matrix:
    pairs = family.fiber.neighbor_pairs(points, radius)
    rows, cols, data = [], [], []
    for i, j in pairs:
        weight = edge_length(family, T, points[i], points[j])
        if 0.0 < weight <= cutoff:
            rows += [i, j]
            cols += [j, i]
            data += [weight, weight]
    n = len(points)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))


def _farthest_point_sample(graph: sparse.csr_matrix, start: int, epsilon: float) -> list[int]:
    distance = dijkstra(graph, indices=start)
    if not np.all(np.isfinite(distance)):
        raise InvalidInstanceError("Background grid is disconnected; refine the grid.")
    centers = [start]
    while True:
        candidate = int(np.argmax(distance))
        radius = float(distance[candidate])
        if radius <= epsilon:
            return centers
        centers.append(candidate)
        update = dijkstra(graph, indices=candidate, limit=radius)
        np.minimum(distance, update, out=distance)


def build_net(
    family: MetricFamily,
    T: float,
    epsilon: float,
    grid_fraction: float = 0.5,
) -> NetGraph:
    """
    Build an ε-net of (F, g_T) by farthest-point sampling on a background grid.

    Args:
        family (MetricFamily): The metric family.
        T (float): Slice level.
        epsilon (float): Net fineness in g_T distance.
        grid_fraction (float): Background grid spacing as a fraction of ε.

    Returns:
        NetGraph: Net nodes joined when their g_T edge length is at most 3ε.

    Raises:
        PreconditionError: If epsilon is not positive.
        InvalidInstanceError: If the net is a single node or disconnected.
    """
    if epsilon <= 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}.")
    fiber = family.fiber
    low, high = metric_scale(family, T, fiber.sample_points(64, seed=0))
    spacing = grid_fraction * epsilon / high
    background = fiber.grid(spacing)
    graph = _weighted_graph(family, T, background, 2.0 * spacing)
    origin = fiber.embed(0, fiber.origin().coords)
    embedded = np.array([fiber.embed(p.chart_id, p.coords) for p in background])
    start = int(np.argmin(np.linalg.norm(embedded - origin, axis=1)))
    centers = _farthest_point_sample(graph, start, epsilon)
    nodes = [background[i] for i in centers]
    weights = _weighted_graph(family, T, nodes, 3.0 * epsilon / low, cutoff=3.0 * epsilon)
    if weights.nnz == 0:
        raise InvalidInstanceError(
            f"epsilon={epsilon} is too large: the net at T={T} has {len(nodes)} node(s) and no edges."
        )
    components, _ = connected_components(weights, directed=False)
    if components > 1:
        raise InvalidInstanceError(f"Net at T={T}, epsilon={epsilon} has {components} components.")
    logger.info("Net at T=%s eps=%s: %d nodes from %d grid points", T, epsilon, len(nodes), len(background))
    return NetGraph(nodes=nodes, weights=weights, epsilon=epsilon, T=T)


def graph_distance(net: NetGraph, a: int, b: int) -> float:
    """Shortest path distance between net nodes a and b."""
    if a == b:
        return 0.0
    distance = float(dijkstra(net.weights, indices=a)[b])
    if not math.isfinite(distance):
        raise InvalidInstanceError(f"Nodes {a} and {b} are disconnected.")
    return distance


@dataclass(frozen=True)
class DiameterEstimate:
    """
    Diameter bounds of a net.

    Attributes:
        lower (float): Certified lower bound (a realized distance).
        upper (float): Upper bound.
        exact (bool): Whether all pairs were computed.
    """

    lower: float
    upper: float
    exact: bool

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "exact": self.exact}


def _eccentricity(net: NetGraph, source: int) -> tuple[float, int]:
    distance = dijkstra(net.weights, indices=source)
    far = int(np.argmax(distance))
    return float(distance[far]), far


def estimate_diameter(
    net: NetGraph, exact_limit: int = EXACT_DIAMETER_LIMIT, chunk: int = 256
) -> DiameterEstimate:
    """
    Diameter of the net graph: exact all pairs up to ``exact_limit`` nodes,
    two-sweep bounds (lower = realized distance, upper = 2·eccentricity) above.
    """
    n = len(net)
    if n == 1:
        return DiameterEstimate(0.0, 0.0, True)
    if n <= exact_limit:
        diameter = 0.0
        for begin in range(0, n, chunk):
            rows = dijkstra(net.weights, indices=np.arange(begin, min(begin + chunk, n)))
            diameter = max(diameter, float(rows.max()))
        return DiameterEstimate(diameter, diameter, True)
    eccentricity, far = _eccentricity(net, 0)
    lower, _ = _eccentricity(net, far)
    return DiameterEstimate(lower, min(2.0 * eccentricity, 2.0 * lower), False)


@dataclass(eq=False)
class NetDistance:
    """
    Intrinsic distance on F_T through a net: points snap to their nearest node.

    Distance rows are computed per source node and kept in an LRU cache.

    Attributes:
        net (NetGraph): The net.
        family (MetricFamily): Family the net was built from.
        cache_size (int): Number of cached distance rows.
    """

    net: NetGraph
    family: MetricFamily
    cache_size: int = 512
    _tree: cKDTree = field(init=False, repr=False)
    _rows: LRUCache = field(init=False, repr=False)

    def __post_init__(self):
        fiber = self.family.fiber
        self._tree = cKDTree([fiber.embed(p.chart_id, p.coords) for p in self.net.nodes])
        self._rows = LRUCache(maxsize=self.cache_size)

    @property
    def tolerance(self) -> float:
        return 3.0 * self.net.epsilon

    def nearest_node(self, point: FiberPoint) -> int:
        embedded = self.family.fiber.embed(point.chart_id, point.coords)
        return int(self._tree.query(embedded)[1])

    def _row(self, node: int) -> np.ndarray:
        if node not in self._rows:
            self._rows[node] = dijkstra(self.net.weights, indices=node)
        return self._rows[node]

    def __call__(self, p: FiberPoint, q: FiberPoint) -> float:
        a, b = self.nearest_node(p), self.nearest_node(q)
        if a == b:
            return 0.0
        distance = float(self._row(a)[b])
        if not math.isfinite(distance):
            raise InvalidInstanceError(f"Nodes {a} and {b} are disconnected.")
        return distance


@dataclass(eq=False)
class CoverInstance:
    """
    Finite metric space with a cover by parts.

    Attributes:
        distances (np.ndarray): Symmetric distance matrix of the space.
        adjacency (sparse.csr_matrix): Edges defining connectivity of parts.
        parts (list): Node index arrays.
        name (str): Label used in reports.
    """

    distances: np.ndarray
    adjacency: sparse.csr_matrix
    parts: list[np.ndarray]
    name: str = "instance"

    @classmethod
    def from_graph(cls, weights: sparse.csr_matrix, parts: list, name: str = "instance") -> "CoverInstance":
        weights = sparse.csr_matrix(weights)
        distances = shortest_path(weights, directed=False)
        return cls(
            distances=distances,
            adjacency=weights,
            parts=[np.unique(np.asarray(p, dtype=int)) for p in parts],
            name=name,
        )

    def validate(self) -> None:
        n = self.distances.shape[0]
        if not np.all(np.isfinite(self.distances)):
            raise InvalidInstanceError(f"{self.name}: the space is disconnected.")
        covered = np.zeros(n, dtype=bool)
        for k, part in enumerate(self.parts):
            if part.size == 0:
                raise InvalidInstanceError(f"{self.name}: part {k} is empty.")
            covered[part] = True
            induced = self.adjacency[part][:, part]
            if connected_components(induced, directed=False)[0] != 1:
                raise InvalidInstanceError(f"{self.name}: part {k} is not connected.")
        if not covered.all():
            raise InvalidInstanceError(f"{self.name}: parts miss {int((~covered).sum())} nodes.")
        k = len(self.parts)
        overlap = np.zeros((k, k), dtype=bool)
        for i in range(k):
            for j in range(i + 1, k):
                overlap[i, j] = overlap[j, i] = np.intersect1d(self.parts[i], self.parts[j]).size > 0
        if connected_components(sparse.csr_matrix(overlap), directed=False)[0] != 1:
            raise InvalidInstanceError(f"{self.name}: parts do not chain through overlaps.")


@dataclass(frozen=True)
class CoverReport:
    """
    Cover-diameter inequality on one instance.

    Attributes:
        name (str): Instance label.
        passed (bool): dia(X) ≤ Σ dia(A_i).
        diameter (float): dia(X).
        part_sum (float): Σ dia(A_i).
        part_diameters (list): dia(A_i) per part.
    """

    name: str
    passed: bool
    diameter: float
    part_sum: float
    part_diameters: list[float]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "diameter": self.diameter,
            "part_sum": self.part_sum,
            "margin": self.part_sum - self.diameter,
            "part_diameters": list(self.part_diameters),
        }


def check_cover_subadditivity(instance: CoverInstance, tol: float = 1e-12) -> CoverReport:
    """
    Check dia(X) ≤ Σ dia(A_i) with part diameters in the metric of X.

    Raises:
        InvalidInstanceError: If a part is empty or disconnected, the parts do not
            cover the space, or they do not chain through overlaps.
    """
    instance.validate()
    diameter = float(instance.distances.max())
    part_diameters = [float(instance.distances[np.ix_(p, p)].max()) for p in instance.parts]
    total = float(sum(part_diameters))
    return CoverReport(
        name=instance.name,
        passed=diameter <= total + tol,
        diameter=diameter,
        part_sum=total,
        part_diameters=part_diameters,
    )


def random_cover_instance(
    rng: np.random.Generator, max_nodes: int = 200, max_parts: int = 6, name: str = "random"
) -> CoverInstance:
    """
    Random connected weighted graph with a cover by overlapping connected parts.

    A random spanning tree is cut at k - 1 edges into k components; each cut edge
    (a, b) then adds b to the part of a, so parts overlap along the cuts.
    """
    n = int(rng.integers(10, max_nodes + 1))
    parents = np.array([int(rng.integers(0, i)) for i in range(1, n)])
    tree_edges = np.column_stack([parents, np.arange(1, n)])
    extra = rng.integers(0, n, size=(int(rng.integers(0, n)), 2))
    extra = extra[extra[:, 0] != extra[:, 1]]
    edges = np.vstack([tree_edges, extra])
    weights = rng.uniform(0.1, 1.0, size=len(edges))
    graph = sparse.coo_matrix((weights, (edges[:, 0], edges[:, 1])), shape=(n, n)).tocsr()
    graph = graph.maximum(graph.T)

    k = int(rng.integers(2, min(max_parts, n - 1) + 1))
    cut = rng.choice(n - 1, size=k - 1, replace=False)
    keep = np.setdiff1d(np.arange(n - 1), cut)
    forest = sparse.coo_matrix(
        (np.ones(len(keep)), (tree_edges[keep, 0], tree_edges[keep, 1])), shape=(n, n)
    )
    _, labels = connected_components(forest, directed=False)
    parts = [list(np.flatnonzero(labels == label)) for label in range(k)]
    for a, b in tree_edges[cut]:
        parts[labels[a]].append(int(b))
    return CoverInstance.from_graph(graph, parts, name=name)


def interval_cover_instance(nodes: int = 101, left_end: float = 0.6, right_start: float = 0.4) -> CoverInstance:
    """Path graph on [0, 1] covered by [0, left_end] and [right_start, 1]."""
    positions = np.linspace(0.0, 1.0, nodes)
    step = positions[1] - positions[0]
    graph = sparse.diags([np.full(nodes - 1, step)], [1], shape=(nodes, nodes)).tocsr()
    graph = graph.maximum(graph.T)
    left = np.flatnonzero(positions <= left_end + 1e-12)
    right = np.flatnonzero(positions >= right_start - 1e-12)
    return CoverInstance.from_graph(graph, [left, right], name="interval")


def ring_cover_instance(nodes: int = 100, overlap: int = 5) -> CoverInstance:
    """Ring of circumference 2π covered by two arcs overlapping at both ends."""
    step = 2.0 * np.pi / nodes
    idx = np.arange(nodes)
    graph = sparse.coo_matrix(
        (np.full(nodes, step), (idx, (idx + 1) % nodes)), shape=(nodes, nodes)
    ).tocsr()
    graph = graph.maximum(graph.T)
    half = nodes // 2
    first = np.arange(0, half + overlap)
    second = np.concatenate([np.arange(half, nodes), np.arange(0, overlap)])
    return CoverInstance.from_graph(graph, [first, second], name="ring")


def diameter_growth_curve(
    family: MetricFamily,
    certificate: HypothesisCertificate | None,
    T_values: list[float],
    epsilon: float,
    tol: float = 1e-3,
) -> pd.DataFrame:
    """
    Diameter estimates of F_T for each T, with the growth assertion
    dia(F_{T₂})/dia(F_{T₁}) ≥ e^{c(T₂ - T₁)} - tol on consecutive values.

    The assertion does not raise: its outcome is the ``growth_ok`` column, and
    callers must check it. The growth suite fails on any False row.

    Returns:
        pd.DataFrame: Columns T, lower, upper, nodes, ratio, ratio_bound, growth_ok.
        Without a certificate the ratio bound and growth_ok are missing.
    """
    T_values = sorted(float(T) for T in T_values)
    if certificate is not None and T_values and T_values[0] < certificate.t0:
        raise PreconditionError(f"T values must be at least t0={certificate.t0}.")
    rows = []
    for T in T_values:
        net = build_net(family, T, epsilon)
        estimate = estimate_diameter(net)
        rows.append({"T": T, "lower": estimate.lower, "upper": estimate.upper, "nodes": len(net)})
    return add_growth_columns(pd.DataFrame(rows, columns=["T", "lower", "upper", "nodes"]), certificate, tol)


def add_growth_columns(
    frame: pd.DataFrame, certificate: HypothesisCertificate | None, tol: float = 1e-3
) -> pd.DataFrame:
    """Ratio columns of a diameter curve sorted by T."""
    frame = frame.sort_values("T", ignore_index=True)
    previous_upper = frame["upper"].shift(1)
    frame["ratio"] = frame["lower"] / previous_upper
    if certificate is not None:
        frame["ratio_bound"] = np.exp(certificate.c * frame["T"].diff()) - tol
        frame["growth_ok"] = ((frame["ratio"] >= frame["ratio_bound"]) | frame["ratio"].isna()).astype("boolean")
    else:
        frame["ratio_bound"] = np.nan
        frame["growth_ok"] = pd.array([pd.NA] * len(frame), dtype="boolean")
    return frame


def check_net_refinement(
    family: MetricFamily, T: float, epsilon: float, tol: float = 0.05
) -> dict:
    """Relative change of the diameter estimate when ε is halved."""
    coarse = estimate_diameter(build_net(family, T, epsilon)).upper
    fine = estimate_diameter(build_net(family, T, epsilon / 2.0)).upper
    change = abs(fine - coarse) / max(fine, 1e-300)
    return {
        "T": T,
        "epsilon": epsilon,
        "coarse": coarse,
        "fine": fine,
        "relative_change": change,
        "passed": change <= tol,
    }
