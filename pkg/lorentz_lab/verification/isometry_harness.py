"""
Isometry Harness Module

Time-orientation preserving isometries of the model families and the
experiments built on them:

- ``slab_intersection_test``: search for p in K = {|t| ≤ T₂} with φ(p) ∈ K.
- ``main_theorem_experiment``: cover count at T₁, march T₂ until
  dia(F_{T₂}) > 2·n(T₁, ε)·C′, then test every sampled isometry on K.
- ``divergence_proposition_check``: Hessian trace of t along φ(F₀) and its
  integral over the closed submanifold.
- ``orbit_return_experiment``: every power of one isometry meets K.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
import pandas as pd
from scipy.spatial import ConvexHull

from lorentz_lab.geometry.de_sitter import (
    from_hyperboloid,
    is_lorentz,
    pull_tangent,
    push_tangent,
    require_de_sitter,
    to_hyperboloid,
)
from lorentz_lab.geometry.fibers import FiberPoint, SphereFiber
from lorentz_lab.geometry.geodesic_engine import SpacetimePoint, TangentVector
from lorentz_lab.geometry.metric_family import (
    HypothesisCertificate,
    MetricFamily,
    TorusMatrix,
    WarpedProduct,
)
from lorentz_lab.utils.errors import ConfigurationError, PreconditionError
from lorentz_lab.verification.covering import build_slab_cover
from lorentz_lab.verification.metric_space import build_net, estimate_diameter, metric_scale

logger = logging.getLogger(__name__)

ActionKind = Literal["lorentz", "fiber", "time-reflection"]
MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class IsometryAction:
    """
    An isometry of -dt² + g_t.

    Attributes:
        kind (str): "lorentz" (hyperboloid matrix Λ), "fiber" (a map of F
            preserving every g_t: a rotation of the sphere embedding or a
            translation of periodic coordinates) or "time-reflection".
        matrix (np.ndarray | None): Λ for Lorentz actions, the rotation of ω for
            sphere fiber actions.
        shift (np.ndarray | None): Coordinate translation for periodic fibers.
        label (str): Human readable description.
        generators (list): Generator descriptions used in reports.
    """

    kind: ActionKind
    matrix: np.ndarray | None = None
    shift: np.ndarray | None = None
    label: str = ""
    generators: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind == "lorentz":
            if self.matrix is None or not is_lorentz(self.matrix, 1e-10):
                raise ValueError("Lorentz actions need a matrix with ΛᵀηΛ = η.")
        elif self.kind == "fiber" and (self.matrix is None) == (self.shift is None):
            raise ValueError("Fiber actions need exactly one of a rotation matrix or a shift.")

    @classmethod
    def lorentz(cls, matrix: np.ndarray, label: str = "", generators: list[str] | None = None):
        return cls("lorentz", matrix=np.asarray(matrix, dtype=float), label=label, generators=generators or [])

    @classmethod
    def fiber_rotation(cls, matrix: np.ndarray, label: str = ""):
        return cls("fiber", matrix=np.asarray(matrix, dtype=float), label=label or "fiber rotation")

    @classmethod
    def fiber_translation(cls, shift: np.ndarray, label: str = ""):
        return cls("fiber", shift=np.atleast_1d(np.asarray(shift, dtype=float)), label=label or "fiber translation")

    @classmethod
    def time_reflection(cls):
        return cls("time-reflection", label="time reflection")

    @property
    def preserves_orientation(self) -> bool:
        if self.kind == "lorentz":
            return bool(self.matrix[0, 0] > 0)
        return self.kind == "fiber"

    def then(self, other: "IsometryAction") -> "IsometryAction":
        """The composition other ∘ self."""
        if self.kind == "lorentz" or other.kind == "lorentz":
            size = (self if self.kind == "lorentz" else other).matrix.shape[0]
            return IsometryAction.lorentz(
                _as_matrix(other, size) @ _as_matrix(self, size),
                label=f"{other.label} ∘ {self.label}",
                generators=self.generators + other.generators,
            )
        if self.kind == other.kind == "fiber" and self.shift is not None and other.shift is not None:
            return IsometryAction.fiber_translation(self.shift + other.shift, f"{other.label} ∘ {self.label}")
        if self.kind == other.kind == "fiber" and self.matrix is not None and other.matrix is not None:
            return IsometryAction.fiber_rotation(other.matrix @ self.matrix, f"{other.label} ∘ {self.label}")
        raise ValueError(f"Cannot compose {self.kind} with {other.kind}.")

    def power(self, k: int) -> "IsometryAction":
        if k < 1:
            raise ValueError("Powers start at 1.")
        if self.kind == "lorentz":
            return replace(self, matrix=np.linalg.matrix_power(self.matrix, k), label=f"({self.label})^{k}")
        if self.kind == "fiber" and self.shift is not None:
            return replace(self, shift=k * self.shift, label=f"({self.label})^{k}")
        if self.kind == "fiber":
            return replace(self, matrix=np.linalg.matrix_power(self.matrix, k), label=f"({self.label})^{k}")
        return self if k % 2 else replace(self, kind="fiber", shift=np.zeros(1), label="identity")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "generators": list(self.generators),
            "orientation": "preserving" if self.preserves_orientation else "reversing",
        }


def _as_matrix(action: IsometryAction, size: int) -> np.ndarray:
    if action.kind == "lorentz":
        return action.matrix
    if action.kind == "time-reflection":
        return time_reflection_matrix(size)
    if action.matrix is None:
        raise ValueError("Fiber translations have no Lorentz matrix.")
    block = np.eye(size)
    block[1:, 1:] = action.matrix
    return block


def time_reflection_matrix(ambient_dim: int) -> np.ndarray:
    return np.diag([-1.0] + [1.0] * (ambient_dim - 1))


def _check_family(action: IsometryAction, family: MetricFamily):
    fiber = family.fiber
    if action.kind == "lorentz":
        require_de_sitter(family)
    elif action.kind == "time-reflection":
        if not family.is_time_symmetric:
            raise ConfigurationError(f"t ↦ -t is not an isometry of {family.describe()}.")
    elif action.matrix is not None:
        if not (isinstance(family, WarpedProduct) and isinstance(fiber, SphereFiber)):
            raise ConfigurationError("Sphere rotations act on warped products over spheres.")
    elif not (
        isinstance(family, TorusMatrix)
        or (isinstance(family, WarpedProduct) and fiber.periodic)
    ):
        raise ConfigurationError(
            f"Translations are isometries only of spatially homogeneous periodic families, not {family.describe()}."
        )


def apply_isometry(action: IsometryAction, family: MetricFamily, p: SpacetimePoint) -> SpacetimePoint:
    """
    Image of p under the action.

    Raises:
        ConfigurationError: If the action is not an isometry of the family.
    """
    _check_family(action, family)
    fiber = family.fiber
    fiber.validate(p.x)
    if action.kind == "lorentz":
        return from_hyperboloid(fiber, action.matrix @ to_hyperboloid(fiber, p))
    if action.kind == "time-reflection":
        return SpacetimePoint(-p.t, p.x)
    if action.shift is not None:
        return SpacetimePoint(p.t, fiber.normalize(p.x.chart_id, p.x.coords + action.shift))
    omega = fiber.embed(p.x.chart_id, p.x.coords)
    return SpacetimePoint(p.t, fiber.from_embedding(action.matrix @ omega))


def push_forward(
    action: IsometryAction, family: MetricFamily, p: SpacetimePoint, v: TangentVector
) -> tuple[SpacetimePoint, TangentVector]:
    """Image point and differential dφ(v)."""
    _check_family(action, family)
    fiber = family.fiber
    if action.kind == "lorentz":
        X = action.matrix @ to_hyperboloid(fiber, p)
        V = action.matrix @ push_tangent(fiber, p, v)
        return pull_tangent(fiber, X, V)
    if action.kind == "time-reflection":
        return SpacetimePoint(-p.t, p.x), TangentVector(-v.dt, v.dx)
    if action.shift is not None:
        return apply_isometry(action, family, p), v
    image = apply_isometry(action, family, p)
    d_omega = action.matrix @ (fiber.embed_jacobian(p.x.chart_id, p.x.coords) @ v.dx)
    return image, TangentVector(v.dt, fiber.chart_velocity(image.x.chart_id, image.x.coords, d_omega))


def _h(family: MetricFamily, p: SpacetimePoint, a: TangentVector, b: TangentVector) -> float:
    g = family.metric(p.t, p.x.chart_id, p.x.coords)
    return float(-a.dt * b.dt + a.dx @ g @ b.dx)


def isometry_defect(
    action: IsometryAction, family: MetricFamily, samples: int = 100, seed: int = 0, t_range: float = 2.0
) -> float:
    """Largest relative change of h(v, w) under dφ over random samples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x in family.fiber.sample_points(samples, seed=seed):
        p = SpacetimePoint(float(rng.uniform(-t_range, t_range)), x)
        v = TangentVector(rng.normal(), rng.normal(size=family.dim))
        w = TangentVector(rng.normal(), rng.normal(size=family.dim))
        before = _h(family, p, v, w)
        q, dv = push_forward(action, family, p, v)
        _, dw = push_forward(action, family, p, w)
        after = _h(family, q, dv, dw)
        scale = max(1.0, abs(_h(family, p, v, v)), abs(_h(family, p, w, w)))
        worst = max(worst, abs(after - before) / scale)
    return worst


@dataclass(frozen=True)
class SlabSpec:
    """K = {(t, x) : |t| ≤ T2}."""

    T2: float

    def __post_init__(self):
        if not self.T2 > 0:
            raise ValueError(f"Slab half width must be positive, got {self.T2}.")

    def contains(self, p: SpacetimePoint, tol: float = MEMBERSHIP_TOL) -> bool:
        return abs(p.t) <= self.T2 + tol


@dataclass(frozen=True)
class IntersectionResult:
    """
    Outcome of the witness search for φ(K) ∩ K.

    Attributes:
        intersects (bool): A verified witness was found.
        witness (SpacetimePoint | None): p ∈ K with φ(p) ∈ K.
        image (SpacetimePoint | None): φ(witness).
        min_abs_t (float): Smallest |t(φ(p))| seen over the searched points of K.
        evaluations (int): Number of evaluated points.
    """

    intersects: bool
    witness: SpacetimePoint | None
    image: SpacetimePoint | None
    min_abs_t: float
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "intersects": self.intersects,
            "witness": self.witness.to_dict() if self.witness else None,
            "image": self.image.to_dict() if self.image else None,
            "min_abs_t": self.min_abs_t,
            "evaluations": self.evaluations,
        }


def _image_times(
    action: IsometryAction, family: MetricFamily, times: np.ndarray, points: list[FiberPoint]
) -> np.ndarray:
    """|t(φ(t, x))| on the grid times × points."""
    if action.kind == "lorentz":
        fiber = family.fiber
        omegas = np.array([fiber.embed(p.chart_id, p.coords) for p in points])
        row = action.matrix[0]
        image_x0 = (
            row[0] * np.sinh(times)[:, None]
            + np.cosh(times)[:, None] * (omegas @ row[1:])[None, :]
        )
        return np.abs(np.arcsinh(image_x0))
    return np.array(
        [[abs(apply_isometry(action, family, SpacetimePoint(t, p)).t) for p in points] for t in times]
    )


def slab_intersection_test(
    action: IsometryAction,
    slab: SlabSpec,
    family: MetricFamily,
    grid: int = 64,
    refinements: int = 3,
    seed: int = 0,
) -> IntersectionResult:
    """
    Search for p ∈ K with φ(p) ∈ K on a (t, x) grid with local refinement.

    Args:
        action (IsometryAction): Orientation preserving isometry.
        slab (SlabSpec): The slab K.
        family (MetricFamily): The metric family.
        grid (int): Points per dimension.
        refinements (int): Local refinement levels around the best point.
        seed (int): Seed of the fiber sample for n ≥ 2.

    Raises:
        PreconditionError: If the action reverses time orientation.
    """
    if not action.preserves_orientation:
        raise PreconditionError(f"{action.label or action.kind} reverses time orientation.")
    _check_family(action, family)
    fiber = family.fiber
    times = np.linspace(-slab.T2, slab.T2, grid)
    points = fiber.grid(2.0 * math.pi / grid) if fiber.dim == 1 else fiber.sample_points(grid**fiber.dim, seed=seed)
    values = _image_times(action, family, times, points)
    evaluations = values.size
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    best_t, best_point, best_value = float(times[i]), points[j], float(values[i, j])
    t_step, y_step = 2.0 * slab.T2 / (grid - 1), 2.0 * math.pi / grid
    for _ in range(refinements):
        if best_value <= slab.T2:
            break
        local_times = np.clip(best_t + np.linspace(-t_step, t_step, 17), -slab.T2, slab.T2)
        offsets = np.linspace(-y_step, y_step, 17)
        mesh = np.meshgrid(*([offsets] * fiber.dim), indexing="ij")
        local_points = []
        for delta in np.column_stack([m.ravel() for m in mesh]):
            y = best_point.coords + delta
            if fiber.in_domain(best_point.chart_id, y):
                local_points.append(fiber.normalize(best_point.chart_id, y))
        local = _image_times(action, family, local_times, local_points)
        evaluations += local.size
        i, j = np.unravel_index(int(np.argmin(local)), local.shape)
        if local[i, j] < best_value:
            best_t, best_point, best_value = float(local_times[i]), local_points[j], float(local[i, j])
        t_step, y_step = t_step / 8.0, y_step / 8.0
    witness = SpacetimePoint(best_t, best_point)
    image = apply_isometry(action, family, witness)
    intersects = slab.contains(witness) and slab.contains(image)
    return IntersectionResult(
        intersects=intersects,
        witness=witness if intersects else None,
        image=image if intersects else None,
        min_abs_t=best_value,
        evaluations=evaluations,
    )


@dataclass
class ExperimentReport:
    """
    Slab-intersection experiment at T₁.

    Attributes:
        family (dict): Family description.
        t0 (float): Certificate threshold.
        c (float): Certificate rate.
        C_prime (float): π/c + 1/c.
        T1 (float): Cover level.
        epsilon (float): Slab half width.
        n_cover (int): n(T₁, ε).
        T2 (float): First marched T with dia(F_T) > 2·n·C′.
        dia_T2 (float): Diameter lower estimate at T2.
        threshold (float): 2·n·C′.
        isometries (list): Per isometry {id, kind, label, generators, intersects, witness, image, min_abs_t}.
        filtered (list): Ids of orientation reversing actions left out.
    """

    family: dict
    t0: float
    c: float
    C_prime: float
    T1: float
    epsilon: float
    n_cover: int
    T2: float
    dia_T2: float
    threshold: float
    isometries: list[dict] = field(default_factory=list)
    filtered: list[int] = field(default_factory=list)
    diameters: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(entry["intersects"] for entry in self.isometries)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "t0": self.t0,
            "c": self.c,
            "C_prime": self.C_prime,
            "T1": self.T1,
            "epsilon": self.epsilon,
            "n_cover": self.n_cover,
            "T2": self.T2,
            "dia_T2": self.dia_T2,
            "threshold": self.threshold,
            "passed": self.passed,
            "diameters": list(self.diameters),
            "filtered": list(self.filtered),
            "isometries": list(self.isometries),
        }


def main_theorem_experiment(
    family: MetricFamily,
    certificate: HypothesisCertificate,
    T1: float,
    epsilon: float,
    isometries: list[IsometryAction],
    net_epsilon: float = 0.05,
    relative_net_epsilon: float = 0.02,
    T_step: float = 0.5,
    T_budget: float = 30.0,
    pair_budget: int = 8,
    min_radius: float = 1e-3,
    grid: int = 64,
    refinements: int = 3,
    seed: int = 0,
) -> ExperimentReport:
    """
    Cover F_{T₁}, march T₂ until dia(F_{T₂}) > 2·n(T₁, ε)·C′ and test every
    orientation preserving isometry on K = {|t| ≤ T₂}.

    Nets for the marching use fineness ``relative_net_epsilon`` times the
    largest metric scale of the slice.

    Raises:
        PreconditionError: If T₁ - ε ≤ t0.
        ConfigurationError: If the diameter does not exceed the threshold within
            ``T_budget`` above T₁.
    """
    if not T1 - epsilon > certificate.t0:
        raise PreconditionError(f"Need T1 - epsilon > t0, got T1={T1}, epsilon={epsilon}.")
    net = build_net(family, T1, net_epsilon)
    cover = build_slab_cover(family, net, T1, epsilon, certificate, pair_budget, min_radius, seed=seed)
    threshold = 2.0 * cover.count * certificate.projection_bound
    diameters = []
    T = T1
    while True:
        _, high = metric_scale(family, T, family.fiber.sample_points(64, seed=0))
        estimate = estimate_diameter(build_net(family, T, relative_net_epsilon * high))
        diameters.append({"T": T, **estimate.to_dict()})
        logger.info("T=%.3f: diameter >= %.6g (threshold %.6g)", T, estimate.lower, threshold)
        if estimate.lower > threshold:
            break
        T += T_step
        if T > T1 + T_budget:
            raise ConfigurationError(
                f"Diameter stayed below {threshold:.6g} up to T={T - T_step}; growth too slow for the certificate."
            )
    slab = SlabSpec(T)
    report = ExperimentReport(
        family=family.describe(),
        t0=certificate.t0,
        c=certificate.c,
        C_prime=certificate.projection_bound,
        T1=T1,
        epsilon=epsilon,
        n_cover=cover.count,
        T2=T,
        dia_T2=estimate.lower,
        threshold=threshold,
        diameters=diameters,
    )
    for k, action in enumerate(isometries):
        if not action.preserves_orientation:
            report.filtered.append(k)
            continue
        result = slab_intersection_test(action, slab, family, grid, refinements, seed)
        report.isometries.append({"id": k, **action.to_dict(), **result.to_dict()})
    return report


def validate_frame(
    family: MetricFamily, q: SpacetimePoint, frame: list[TangentVector], tol: float = 1e-6
) -> None:
    """
    Raises:
        PreconditionError: Unless ``frame`` is h-orthonormal and spacelike at q.
    """
    for i, a in enumerate(frame):
        for j, b in enumerate(frame[i:], start=i):
            expected = 1.0 if i == j else 0.0
            value = _h(family, q, a, b)
            if abs(value - expected) > tol:
                raise PreconditionError(
                    f"Frame is not spacelike orthonormal at t={q.t:.6g}: h(e{i}, e{j}) = {value:.6g}."
                )


def hessian_trace(family: MetricFamily, q: SpacetimePoint, frame: list[TangentVector]) -> float:
    """Σ Hess t(e_i, e_i) = -½ Σ ∂_t g(e_i, e_i) over a spacelike orthonormal frame."""
    validate_frame(family, q, frame)
    dg = family.metric_dt(q.t, q.x.chart_id, q.x.coords)
    return float(sum(-0.5 * e.dx @ dg @ e.dx for e in frame))


@dataclass(frozen=True)
class DivergenceReport:
    """
    Hessian trace of t along φ(F₀) and its integral.

    Attributes:
        passed (bool): Negative trace beyond T and vanishing integral.
        sample_count (int): Number of sampled points of φ(F₀).
        beyond_count (int): Samples with t > T.
        max_trace_beyond (float): Largest trace over samples beyond T.
        confined_beyond_T (bool): Whether all of φ(F₀) lies in t > T.
        integral (float): ∫ Δ(t|φ(F₀)) over φ(F₀).
        integral_abs (float): ∫ |Δ(t|φ(F₀))|.
        max_t (float): Largest t on φ(F₀).
    """

    passed: bool
    sample_count: int
    beyond_count: int
    max_trace_beyond: float
    confined_beyond_T: bool
    integral: float
    integral_abs: float
    max_t: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "sample_count": self.sample_count,
            "beyond_count": self.beyond_count,
            "max_trace_beyond": self.max_trace_beyond,
            "confined_beyond_T": self.confined_beyond_T,
            "integral": self.integral,
            "integral_abs": self.integral_abs,
            "max_t": self.max_t,
        }


def _slice_frame(family: MetricFamily, p: FiberPoint) -> list[TangentVector]:
    """g₀-orthonormal frame of F₀ at p (chart components)."""
    g = family.metric(0.0, p.chart_id, p.coords)
    factor = np.linalg.cholesky(g)
    basis = np.linalg.inv(factor).T
    return [TangentVector(0.0, basis[:, i]) for i in range(family.dim)]


def _sphere_triangle_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    numerator = abs(float(a @ np.cross(b, c)))
    denominator = 1.0 + a @ b + b @ c + c @ a
    return 2.0 * math.atan2(numerator, denominator)


def divergence_proposition_check(
    family: MetricFamily,
    action: IsometryAction,
    T: float,
    resolution: int = 10_000,
    integral_atol: float = 1e-4,
    integral_rtol: float | None = None,
) -> DivergenceReport:
    """
    Sample φ(F₀), evaluate the intrinsic Laplacian of t there as the ambient
    Hessian trace over a pushed-forward orthonormal frame, and integrate it.

    n = 1 uses the periodic trapezoid rule on θ ∈ [0, 2π); n = 2 pushes forward
    a convex-hull triangulation of F₀ and integrates vertex averages against
    spherical triangle areas. Since φ is an isometry the area element of φ(F₀)
    is the one of F₀.

    Raises:
        PreconditionError: If ∂_t g|₀ ≠ 0, or φ(F₀) does not reach t > T.
    """
    fiber = family.fiber
    if fiber.dim > 2:
        raise PreconditionError("Divergence check supports fibers of dimension 1 and 2.")
    probe = fiber.sample_points(16, seed=0)
    if max(float(np.max(np.abs(family.metric_dt(0.0, p.chart_id, p.coords)))) for p in probe) > 1e-8:
        raise PreconditionError("F0 is not totally geodesic: dg/dt does not vanish at t = 0.")
    if integral_rtol is None:
        integral_rtol = 0.0 if fiber.dim == 1 else 1e-2

    if fiber.dim == 1:
        points = fiber.grid(2.0 * math.pi / resolution)
        weights = np.full(len(points), 2.0 * math.pi / len(points))
        triangles = None
    else:
        points = fiber.grid(math.sqrt(4.0 * math.pi / resolution))
        embedded = np.array([fiber.embed(p.chart_id, p.coords) for p in points])
        triangles = ConvexHull(embedded).simplices
        weights = np.zeros(len(points))
        for tri in triangles:
            area = _sphere_triangle_area(*embedded[tri])
            weights[tri] += area / 3.0

    images, traces = [], []
    for p in points:
        base = SpacetimePoint(0.0, p)
        frame, q = [], None
        for e in _slice_frame(family, p):
            q, pushed = push_forward(action, family, base, e)
            frame.append(pushed)
        images.append(q.t)
        traces.append(hessian_trace(family, q, frame))
    images, traces = np.array(images), np.array(traces)
    if not np.any(images > T):
        raise PreconditionError(f"φ(F0) does not reach t > {T} (max t = {images.max():.6g}).")
    beyond = images > T
    integral = float(traces @ weights)
    integral_abs = float(np.abs(traces) @ weights)
    max_trace = float(traces[beyond].max())
    passed = max_trace < 0 and abs(integral) <= integral_atol + integral_rtol * integral_abs
    logger.info("Divergence check: max trace beyond T %.3e, integral %.3e", max_trace, integral)
    return DivergenceReport(
        passed=passed,
        sample_count=len(points),
        beyond_count=int(beyond.sum()),
        max_trace_beyond=max_trace,
        confined_beyond_T=bool(beyond.all()),
        integral=integral,
        integral_abs=integral_abs,
        max_t=float(images.max()),
    )


def orbit_return_experiment(
    action: IsometryAction,
    slab: SlabSpec,
    family: MetricFamily,
    powers: int = 8,
    grid: int = 64,
    refinements: int = 3,
) -> pd.DataFrame:
    """
    slab_intersection_test on φ, φ², ..., φ^powers.

    Returns:
        pd.DataFrame: Columns k, intersects, witness_t, image_t, min_abs_t.
    """
    rows = []
    for k in range(1, powers + 1):
        result = slab_intersection_test(action.power(k), slab, family, grid, refinements)
        rows.append(
            {
                "k": k,
                "intersects": result.intersects,
                "witness_t": result.witness.t if result.witness else np.nan,
                "image_t": result.image.t if result.image else np.nan,
                "min_abs_t": result.min_abs_t,
            }
        )
    return pd.DataFrame(rows, columns=["k", "intersects", "witness_t", "image_t", "min_abs_t"])
