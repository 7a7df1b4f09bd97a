"""
Curvature Jacobi Module

Curvature of h = -dt² + g_t and Jacobi fields along the vertical timelike
geodesics u ↦ (u, x).

Conventions: index 0 is time, 1..n are fiber chart coordinates,
R(∂_c, ∂_d)∂_b = Rᵃ_bcd ∂_a with

    Rᵃ_bcd = ∂_c Γᵃ_db - ∂_d Γᵃ_cb + Γᵃ_ce Γᵉ_db - Γᵃ_de Γᵉ_cb,

and the sectional curvature of span{v, w} is

    K = h(R(v,w)w, v) / (h(v,v)h(w,w) - h(v,w)²).

Generic families are differentiated numerically (central differences with one
Richardson step); warped products use the closed form, which also serves as the
oracle for the numerical path.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from lorentz_lab.geometry.fibers import FiberPoint
from lorentz_lab.geometry.geodesic_engine import (
    DEFAULT_SETTINGS,
    IntegrationSettings,
    SpacetimePoint,
    TangentVector,
    integrate_geodesic,
)
from lorentz_lab.geometry.metric_family import MetricFamily, WarpedProduct
from lorentz_lab.utils.errors import DegeneratePlaneError, IntegrationFailure, PreconditionError

logger = logging.getLogger(__name__)

FD_STEP = 1e-4
DEGENERACY_TOL = 1e-10


def spacetime_metric(family: MetricFamily, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
    n = family.dim
    h = np.zeros((n + 1, n + 1))
    h[0, 0] = -1.0
    h[1:, 1:] = family.metric(t, chart_id, y)
    return h


def spacetime_christoffels(
    family: MetricFamily, t: float, chart_id: int, y: np.ndarray
) -> np.ndarray:
    """Christoffel symbols Γᵃ_bc of h indexed [a, b, c]."""
    n = family.dim
    g = family.metric(t, chart_id, y)
    dg = family.metric_dt(t, chart_id, y)
    shape = 0.5 * np.linalg.solve(g, dg)
    gamma = np.zeros((n + 1, n + 1, n + 1))
    gamma[0, 1:, 1:] = 0.5 * dg
    gamma[1:, 0, 1:] = shape
    gamma[1:, 1:, 0] = shape
    gamma[1:, 1:, 1:] = family.christoffels(t, chart_id, y)
    return gamma


def _christoffel_derivative(
    family: MetricFamily, t: float, chart_id: int, y: np.ndarray, axis: int, step: float
) -> np.ndarray:
    def central(h):
        shift = np.zeros(family.dim + 1)
        shift[axis] = h
        plus = spacetime_christoffels(family, t + shift[0], chart_id, y + shift[1:])
        minus = spacetime_christoffels(family, t - shift[0], chart_id, y - shift[1:])
        return (plus - minus) / (2.0 * h)

    return (4.0 * central(step / 2.0) - central(step)) / 3.0


def riemann_tensor(
    family: MetricFamily, point: SpacetimePoint, step: float = FD_STEP
) -> np.ndarray:
    """Rᵃ_bcd at ``point`` indexed [a, b, c, d], by differentiating Christoffel symbols."""
    family.fiber.validate(point.x)
    chart_id, y = point.x.chart_id, point.x.coords
    gamma = spacetime_christoffels(family, point.t, chart_id, y)
    # d_gamma[c, a, d, b] = ∂_c Γᵃ_db
    d_gamma = np.stack(
        [
            _christoffel_derivative(family, point.t, chart_id, y, axis, step)
            for axis in range(family.dim + 1)
        ]
    )
    return (
        np.einsum("cadb->abcd", d_gamma)
        - np.einsum("dacb->abcd", d_gamma)
        + np.einsum("ace,edb->abcd", gamma, gamma)
        - np.einsum("ade,ecb->abcd", gamma, gamma)
    )


def _gram(h: np.ndarray, v: np.ndarray, w: np.ndarray) -> tuple[float, float, float, float]:
    hvv, hww, hvw = v @ h @ v, w @ h @ w, v @ h @ w
    return hvv, hww, hvw, hvv * hww - hvw**2


def _warped_curvature_form(
    family: WarpedProduct, point: SpacetimePoint, v: np.ndarray, w: np.ndarray
) -> float:
    """h(R(v,w)w, v) for a warped product."""
    warp = family.warp_function
    t = point.t
    f, df, ddf = warp.value(t), warp.derivative(t), warp.second_derivative(t)
    g = family.metric(t, point.x.chart_id, point.x.coords)
    pvv, pww, pvw = v[1:] @ g @ v[1:], w[1:] @ g @ w[1:], v[1:] @ g @ w[1:]
    tvv, tww, tvw = v[0] * v[0], w[0] * w[0], v[0] * w[0]
    spatial = (df**2 + family.fiber.curvature) / f**2 * (pvv * pww - pvw**2)
    mixed = ddf / f * (pvv * tww + pww * tvv - 2.0 * pvw * tvw)
    return spatial - mixed


def curvature_form(
    family: MetricFamily,
    point: SpacetimePoint,
    v: TangentVector,
    w: TangentVector,
    method: str = "auto",
    step: float = FD_STEP,
) -> float:
    """h(R(v,w)w, v); ``method`` is "auto", "closed" or "fd"."""
    a, b = v.as_array(), w.as_array()
    if method == "closed" or (method == "auto" and isinstance(family, WarpedProduct)):
        if not isinstance(family, WarpedProduct):
            raise PreconditionError("The closed curvature form needs a warped product.")
        family.fiber.validate(point.x)
        return float(_warped_curvature_form(family, point, a, b))
    R = riemann_tensor(family, point, step)
    h = spacetime_metric(family, point.t, point.x.chart_id, point.x.coords)
    rvw_w = np.einsum("abcd,b,c,d->a", R, b, a, b)
    return float(a @ h @ rvw_w)


def sectional_curvature(
    family: MetricFamily,
    point: SpacetimePoint,
    v: TangentVector,
    w: TangentVector,
    method: str = "auto",
    step: float = FD_STEP,
) -> float:
    """
    Sectional curvature of the plane span{v, w} at ``point``.

    Args:
        family (MetricFamily): The metric family.
        point (SpacetimePoint): Base point.
        v (TangentVector): First spanning vector.
        w (TangentVector): Second spanning vector.
        method (str): "auto" uses the closed form for warped products and
            finite differences otherwise; "closed" and "fd" force one path.
        step (float): Finite difference step.

    Returns:
        float: K(v, w).

    Raises:
        DegeneratePlaneError: If the Gram determinant vanishes (relative 1e-10).
    """
    h = spacetime_metric(family, point.t, point.x.chart_id, point.x.coords)
    hvv, hww, hvw, det = _gram(h, v.as_array(), w.as_array())
    if abs(det) <= DEGENERACY_TOL * (abs(hvv * hww) + hvw**2) or det == 0.0:
        raise DegeneratePlaneError(f"Plane spanned by {v.as_array()} and {w.as_array()} is degenerate.")
    return curvature_form(family, point, v, w, method, step) / det


@dataclass(frozen=True)
class CurvatureSample:
    """
    Sectional curvature of one indefinite plane.

    Attributes:
        point (SpacetimePoint): Base point.
        v (TangentVector): First spanning vector (timelike).
        w (TangentVector): Second spanning vector.
        K (float): Sectional curvature.
    """

    point: SpacetimePoint
    v: TangentVector
    w: TangentVector
    K: float

    def to_dict(self) -> dict:
        row = {"t": self.point.t, "chart_id": self.point.x.chart_id}
        row.update({f"x{i + 1}": c for i, c in enumerate(self.point.x.coords)})
        row["K"] = self.K
        return row


def random_indefinite_plane(
    family: MetricFamily, point: SpacetimePoint, rng: np.random.Generator
) -> tuple[TangentVector, TangentVector]:
    """A random plane containing a timelike vector, hence indefinite."""
    n = family.dim
    g = family.metric(point.t, point.x.chart_id, point.x.coords)
    a = rng.normal(size=n)
    a *= rng.uniform(0.0, 0.9) / math.sqrt(a @ g @ a)
    v = TangentVector(1.0, a)
    while True:
        b = rng.normal(size=n)
        w = TangentVector(rng.normal(), b / math.sqrt(b @ g @ b))
        _, _, _, det = _gram(spacetime_metric(family, point.t, point.x.chart_id, point.x.coords), v.as_array(), w.as_array())
        if det < -1e-3:
            return v, w


def curvature_scan(
    family: MetricFamily,
    count: int,
    t_range: tuple[float, float] = (-3.0, 3.0),
    seed: int = 0,
    method: str = "auto",
    step: float = FD_STEP,
) -> list[CurvatureSample]:
    """Sectional curvatures of ``count`` random indefinite planes."""
    rng = np.random.default_rng(seed)
    points = family.fiber.sample_points(count, seed=seed)
    samples = []
    for point in points:
        p = SpacetimePoint(float(rng.uniform(*t_range)), point)
        v, w = random_indefinite_plane(family, p, rng)
        samples.append(CurvatureSample(p, v, w, sectional_curvature(family, p, v, w, method, step)))
    return samples


def curvature_samples_frame(samples: list[CurvatureSample]) -> pd.DataFrame:
    return pd.DataFrame([s.to_dict() for s in samples])


def estimate_alpha(samples: list[CurvatureSample], safety: float = 0.01) -> float:
    """α with α² the smallest sampled curvature less a relative safety margin, 0 if none is positive."""
    if not samples:
        return 0.0
    smallest = min(s.K for s in samples)
    return math.sqrt(smallest * (1.0 - safety)) if smallest > 0 else 0.0


def _shape_operator(family: MetricFamily, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
    g = family.metric(t, chart_id, y)
    return 0.5 * np.linalg.solve(g, family.metric_dt(t, chart_id, y))


def tidal_operator(
    family: MetricFamily, t: float, chart_id: int, y: np.ndarray, step: float = FD_STEP
) -> np.ndarray:
    """
    Spatial block of Rᵃ_0c0 along the vertical geodesic, so that
    R(Y, ∂_t)∂_t = tidal @ Y_x.

    Since Γᵃ_00 = 0 for metrics -dt² + g_t, Rⁱ_0j0 = -∂_t Sⁱ_j - Sⁱ_k Sᵏ_j with
    S = ½ g⁻¹ ∂_t g.
    """
    if isinstance(family, WarpedProduct):
        warp = family.warp_function
        return -warp.second_derivative(t) / warp.value(t) * np.eye(family.dim)

    def central(h):
        return (
            _shape_operator(family, t + h, chart_id, y) - _shape_operator(family, t - h, chart_id, y)
        ) / (2.0 * h)

    d_shape = (4.0 * central(step / 2.0) - central(step)) / 3.0
    shape = _shape_operator(family, t, chart_id, y)
    return -d_shape - shape @ shape


@dataclass(eq=False)
class JacobiField:
    """
    Jacobi field along the vertical geodesic u ↦ (u, x).

    Attributes:
        x (FiberPoint): Foot point of the vertical geodesic.
        w (np.ndarray): Initial fiber vector, Y(0) = (0, w).
        u (np.ndarray): Sample parameters, increasing.
        Y (np.ndarray): Field components (time first), shape (N, n + 1).
        DY (np.ndarray): Covariant derivative ∇Y, shape (N, n + 1).
    """

    x: FiberPoint
    w: np.ndarray
    u: np.ndarray
    Y: np.ndarray
    DY: np.ndarray
    dense: list = field(default_factory=list, repr=False)

    def to_dataframe(self) -> pd.DataFrame:
        n = self.Y.shape[1] - 1
        data = {"u": self.u, "Y0": self.Y[:, 0]}
        data.update({f"Y{i + 1}": self.Y[:, i + 1] for i in range(n)})
        data["DY0"] = self.DY[:, 0]
        data.update({f"DY{i + 1}": self.DY[:, i + 1] for i in range(n)})
        return pd.DataFrame(data)


def _jacobi_rhs(family: MetricFamily, x: FiberPoint, u: float, state: np.ndarray) -> np.ndarray:
    n = family.dim
    Y, Z = state[: n + 1], state[n + 1 :]
    shape = _shape_operator(family, u, x.chart_id, x.coords)
    # Γᵃ_0b: only the spatial block S is nonzero
    gamma_y = np.concatenate([[0.0], shape @ Y[1:]])
    gamma_z = np.concatenate([[0.0], shape @ Z[1:]])
    tidal = np.concatenate([[0.0], tidal_operator(family, u, x.chart_id, x.coords) @ Y[1:]])
    return np.concatenate([Z - gamma_y, -gamma_z - tidal])


def integrate_jacobi(
    family: MetricFamily,
    x: FiberPoint,
    w: np.ndarray,
    u_range: tuple[float, float] = (0.0, 5.0),
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    initial_dt: float = 0.0,
) -> JacobiField:
    """
    Integrate ∇∇Y = -R(Y, γ̇)γ̇ along γ(u) = (u, x) with Y(0) = (initial_dt, w), ∇Y(0) = 0.

    Args:
        family (MetricFamily): The metric family.
        x (FiberPoint): Foot point on F₀.
        w (np.ndarray): Nonzero fiber vector.
        u_range (tuple): Parameter interval containing 0.
        settings (IntegrationSettings): Integrator tolerances.
        initial_dt (float): Time component of Y(0).

    Returns:
        JacobiField: The sampled field.
    """
    family.fiber.validate(x)
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != family.dim or not np.any(w):
        raise PreconditionError("Jacobi fields need a nonzero fiber vector w.")
    lower, upper = u_range
    if not lower <= 0.0 <= upper or lower == upper:
        raise PreconditionError(f"u_range {u_range} must contain 0 and be nondegenerate.")
    state0 = np.concatenate([[initial_dt], w, np.zeros(family.dim + 1)])
    pieces, dense = [], []
    for end in (lower, upper):
        if end == 0.0:
            continue
        sol = solve_ivp(
            lambda u, s: _jacobi_rhs(family, x, u, s),
            (0.0, end),
            state0,
            method="RK45",
            rtol=settings.rtol,
            atol=settings.atol,
            max_step=settings.max_step,
            dense_output=True,
        )
        if sol.status == -1:
            raise IntegrationFailure(f"Jacobi integration failed: {sol.message}")
        pieces.append((sol.t, sol.y.T))
        dense.append((min(0.0, end), max(0.0, end), sol.sol))
    us = np.concatenate([p[0] for p in pieces])
    states = np.vstack([p[1] for p in pieces])
    order = np.argsort(us, kind="stable")
    us, states = us[order], states[order]
    keep = np.concatenate([[True], np.diff(us) > 0])
    us, states = us[keep], states[keep]
    n = family.dim
    return JacobiField(x=x, w=w, u=us, Y=states[:, : n + 1], DY=states[:, n + 1 :], dense=dense)


def jacobi_residual(family: MetricFamily, jacobi: JacobiField, delta: float = 1e-3) -> float:
    """
    Largest relative residual of the first order Jacobi system, with the
    derivative of the dense output taken by central differences.
    """
    worst = 0.0
    for start, end, solution in jacobi.dense:
        for u in jacobi.u[(jacobi.u >= start + delta) & (jacobi.u <= end - delta)]:
            derivative = (solution(u + delta) - solution(u - delta)) / (2.0 * delta)
            state = solution(u)
            residual = derivative - _jacobi_rhs(family, jacobi.x, u, state)
            worst = max(worst, float(np.max(np.abs(residual)) / max(1.0, np.max(np.abs(state)))))
    return worst


@dataclass(frozen=True)
class JacobiCheck:
    """
    Outcome of the Jacobi metric identity and the tanh growth inequality.

    Attributes:
        passed (bool): Both checks passed.
        max_relative_residual (float): max |h(Y,Y) - g_u(w,w)| / g_u(w,w).
        min_tanh_margin (float): min of ∂_{|u|}g_u(w,w)/g_u(w,w) - |α tanh(αu)|.
        initial_orthogonality (float): |h(Y(0), ∇Y(0))|.
        sample_count (int): Number of samples checked.
        worst_u (float): Sample of the largest identity residual.
    """

    passed: bool
    max_relative_residual: float
    min_tanh_margin: float
    initial_orthogonality: float
    sample_count: int
    worst_u: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_relative_residual": self.max_relative_residual,
            "min_tanh_margin": self.min_tanh_margin,
            "initial_orthogonality": self.initial_orthogonality,
            "sample_count": self.sample_count,
            "worst_u": self.worst_u,
        }


def check_jacobi_metric_identity(
    family: MetricFamily,
    jacobi: JacobiField,
    alpha: float | None = None,
    rtol: float = 1e-6,
    tanh_tol: float = 1e-9,
) -> JacobiCheck:
    """
    Check h(Y(u), Y(u)) = g_u(w, w) and, given α, ∂_{|u|}g_u(w,w)/g_u(w,w) ≥ |α tanh(αu)|.
    """
    x, w = jacobi.x, jacobi.w
    worst_residual, worst_u, min_margin = 0.0, float(jacobi.u[0]), math.inf
    for u, Y in zip(jacobi.u, jacobi.Y):
        g = family.metric(u, x.chart_id, x.coords)
        gww = w @ g @ w
        hyy = -Y[0] ** 2 + Y[1:] @ g @ Y[1:]
        residual = abs(hyy - gww) / gww
        if residual > worst_residual:
            worst_residual, worst_u = residual, float(u)
        if alpha is not None:
            sign = 1.0 if u >= 0 else -1.0
            growth = sign * (w @ family.metric_dt(u, x.chart_id, x.coords) @ w) / gww
            min_margin = min(min_margin, growth - abs(alpha * math.tanh(alpha * u)))
    i0 = int(np.argmin(np.abs(jacobi.u)))
    h0 = spacetime_metric(family, jacobi.u[i0], x.chart_id, x.coords)
    orthogonality = abs(float(jacobi.Y[i0] @ h0 @ jacobi.DY[i0]))
    passed = worst_residual <= rtol and (alpha is None or min_margin >= -tanh_tol)
    return JacobiCheck(
        passed=passed,
        max_relative_residual=worst_residual,
        min_tanh_margin=min_margin if alpha is not None else float("nan"),
        initial_orthogonality=orthogonality,
        sample_count=len(jacobi.u),
        worst_u=worst_u,
    )


@dataclass(frozen=True)
class ConcavityReport:
    """
    Sign check of ẗ = -½(∂_t g)(γ̇_F, γ̇_F) along spacelike trajectories.

    Attributes:
        passed (bool): Every accepted sample had the predicted sign.
        checked (int): Number of accepted trajectories.
        rejected (list): Ids of vertical trajectories or ones touching t = 0.
        worst_value (float): Largest sign(t)·ẗ seen (negative when passing).
        worst_id (int | None): Trajectory of the worst value.
    """

    passed: bool
    checked: int
    rejected: list[int]
    worst_value: float
    worst_id: int | None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "rejected": list(self.rejected),
            "worst_value": self.worst_value,
            "worst_id": self.worst_id,
        }


def hessian_concavity_check(family: MetricFamily, trajectories: list) -> ConcavityReport:
    """ẗ < 0 on samples with t > 0 and ẗ > 0 on samples with t < 0."""
    worst, worst_id, rejected, checked = -math.inf, None, [], 0
    for traj in sorted(trajectories, key=lambda tr: tr.trajectory_id):
        side = np.sign(traj.t)
        vertical = not np.any(traj.dx)
        if vertical or np.any(side == 0) or np.any(side != side[0]):
            rejected.append(traj.trajectory_id)
            continue
        checked += 1
        for i in range(len(traj)):
            dg = family.metric_dt(traj.t[i], traj.chart[i], traj.x[i])
            ddt = -0.5 * traj.dx[i] @ dg @ traj.dx[i]
            value = side[0] * ddt
            if value > worst:
                worst, worst_id = float(value), traj.trajectory_id
    if rejected:
        logger.info("Concavity check rejected %d trajectories", len(rejected))
    return ConcavityReport(
        passed=checked > 0 and worst < 0,
        checked=checked,
        rejected=rejected,
        worst_value=worst if checked else float("nan"),
        worst_id=worst_id,
    )


@dataclass(frozen=True)
class GaussCheckReport:
    """
    Normal chart check along geodesics leaving F₀ orthogonally.

    Attributes:
        passed (bool): Precondition held and both checks passed.
        precondition_ok (bool): Whether ∂_t g|₀ = 0 held numerically.
        slice_derivative (float): Largest relative |∂_t g|₀| seen.
        max_position_error (float): Largest deviation of a normal geodesic from (u, p).
        max_cross_term (float): Largest |h(∂_t, Y_i)| of transported coordinate fields.
        geodesic_count (int): Number of normal geodesics checked.
    """

    passed: bool
    precondition_ok: bool
    slice_derivative: float
    max_position_error: float
    max_cross_term: float
    geodesic_count: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "precondition_ok": self.precondition_ok,
            "slice_derivative": self.slice_derivative,
            "max_position_error": self.max_position_error,
            "max_cross_term": self.max_cross_term,
            "geodesic_count": self.geodesic_count,
        }


def normal_chart_gauss_check(
    family: MetricFamily,
    points: list[FiberPoint],
    u_max: float = 2.0,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    slice_tol: float = 1e-8,
    position_tol: float = 1e-8,
    cross_tol: float = 1e-6,
) -> GaussCheckReport:
    """
    Check that the product chart is the normal chart of the slice F₀.

    Normal geodesics u ↦ (u, p) are integrated for |u| ≤ u_max and compared with
    the straight line; coordinate fields of F₀ are transported as Jacobi fields
    and their time components, which equal -h(∂_t, Y), must stay zero.
    """
    derivative = 0.0
    for p in points:
        g = family.metric(0.0, p.chart_id, p.coords)
        dg = family.metric_dt(0.0, p.chart_id, p.coords)
        derivative = max(derivative, float(np.max(np.abs(dg)) / np.max(np.abs(g))))
    if derivative > slice_tol:
        logger.info("Slice F0 is not totally geodesic: |dg/dt| = %.3e", derivative)
        return GaussCheckReport(False, False, derivative, math.nan, math.nan, 0)

    position_error, cross_term = 0.0, 0.0
    for p in points:
        for sign in (1.0, -1.0):
            traj = integrate_geodesic(
                family, SpacetimePoint(0.0, p), TangentVector(sign, np.zeros(family.dim)), u_max, settings=settings
            )
            dx = np.array(
                [family.fiber.chart_difference(p.chart_id, p.coords, x) for x in traj.x]
            )
            position_error = max(
                position_error,
                float(np.max(np.abs(traj.t - sign * traj.u))),
                float(np.max(np.abs(dx))),
            )
        for i in range(family.dim):
            jacobi = integrate_jacobi(family, p, np.eye(family.dim)[i], (-u_max, u_max), settings)
            cross_term = max(cross_term, float(np.max(np.abs(jacobi.Y[:, 0]))))
    passed = position_error <= position_tol and cross_term <= cross_tol
    return GaussCheckReport(passed, True, derivative, position_error, cross_term, len(points))
