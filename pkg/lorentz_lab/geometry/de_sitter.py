"""
De Sitter Module

The hyperboloid model of de Sitter space,

    dSⁿ⁺¹ = {X ∈ ℝ^{1,n+1} : -X₀² + X₁² + ... + X_{n+1}² = 1},

with global coordinates X = (sinh t, cosh t·ω), ω ∈ Sⁿ. In these coordinates
the induced metric is -dt² + cosh²(t)·g_round, which is ``WarpedProduct`` with
a cosh warp of rate 1 on a sphere fiber. Geodesics are intersections with
planes through the origin and have closed forms, which makes the model the
oracle for the numerical engine; the Lorentz group O(1, n+1) acts by isometries.
"""

import math

import numpy as np
from scipy.linalg import expm

from lorentz_lab.geometry.fibers import SphereFiber
from lorentz_lab.geometry.geodesic_engine import (
    CausalClass,
    SpacetimePoint,
    TangentVector,
    Trajectory,
)
from lorentz_lab.geometry.metric_family import MetricFamily
from lorentz_lab.utils.errors import ConfigurationError, PreconditionError


def require_de_sitter(family: MetricFamily) -> SphereFiber:
    if not family.is_de_sitter:
        raise ConfigurationError(
            f"Hyperboloid model needs a cosh warp of rate 1 on a sphere, got {family.describe()}."
        )
    return family.fiber


def minkowski_inner(a: np.ndarray, b: np.ndarray) -> float:
    """⟨a, b⟩ = -a₀b₀ + Σ aᵢbᵢ; broadcasts over leading axes."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return -a[..., 0] * b[..., 0] + np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def to_hyperboloid(fiber: SphereFiber, p: SpacetimePoint) -> np.ndarray:
    fiber.validate(p.x)
    omega = fiber.embed(p.x.chart_id, p.x.coords)
    return np.concatenate([[math.sinh(p.t)], math.cosh(p.t) * omega])


def from_hyperboloid(fiber: SphereFiber, X: np.ndarray) -> SpacetimePoint:
    X = np.asarray(X, dtype=float)
    t = math.asinh(X[0])
    return SpacetimePoint(t, fiber.from_embedding(X[1:] / math.cosh(t)))


def push_tangent(fiber: SphereFiber, p: SpacetimePoint, v: TangentVector) -> np.ndarray:
    """Ambient components of the tangent vector v at p."""
    omega = fiber.embed(p.x.chart_id, p.x.coords)
    d_omega = fiber.embed_jacobian(p.x.chart_id, p.x.coords) @ v.dx
    return np.concatenate(
        [
            [math.cosh(p.t) * v.dt],
            math.sinh(p.t) * v.dt * omega + math.cosh(p.t) * d_omega,
        ]
    )


def pull_tangent(
    fiber: SphereFiber, X: np.ndarray, V: np.ndarray, chart_id: int | None = None
) -> tuple[SpacetimePoint, TangentVector]:
    """Chart point and velocity of an ambient (X, V), optionally in a given chart."""
    X, V = np.asarray(X, dtype=float), np.asarray(V, dtype=float)
    p = from_hyperboloid(fiber, X)
    if chart_id is not None and chart_id != p.x.chart_id:
        p = SpacetimePoint(
            p.t, fiber.normalize(chart_id, fiber.express_in_chart(p.x, chart_id))
        )
    ch, sh = math.cosh(p.t), math.sinh(p.t)
    omega = X[1:] / ch
    dt = V[0] / ch
    d_omega = (V[1:] - sh * dt * omega) / ch
    dx = fiber.chart_velocity(p.x.chart_id, p.x.coords, d_omega)
    return p, TangentVector(dt, dx)


def closed_form_geodesic(
    X: np.ndarray, V: np.ndarray, s: np.ndarray, null_tol: float = 1e-9
) -> tuple[np.ndarray, np.ndarray]:
    """
    Geodesic of the hyperboloid through X with velocity V.

    Args:
        X (np.ndarray): Base point, ⟨X, X⟩ = 1.
        V (np.ndarray): Velocity, ⟨X, V⟩ = 0.
        s (np.ndarray): Affine parameters.
        null_tol (float): |⟨V, V⟩| below which V is treated as null.

    Returns:
        tuple: Positions and velocities, each of shape (len(s), n + 2).
    """
    X, V = np.asarray(X, dtype=float), np.asarray(V, dtype=float)
    s = np.atleast_1d(np.asarray(s, dtype=float))[:, None]
    h = minkowski_inner(V, V)
    if abs(h) <= null_tol:
        return X + s * V, np.broadcast_to(V, (s.shape[0], V.size)).copy()
    k = math.sqrt(abs(h))
    if h > 0:
        position = np.cos(k * s) * X + np.sin(k * s) / k * V
        velocity = -k * np.sin(k * s) * X + np.cos(k * s) * V
    else:
        position = np.cosh(k * s) * X + np.sinh(k * s) / k * V
        velocity = k * np.sinh(k * s) * X + np.cosh(k * s) * V
    return position, velocity


def oracle_deviation(family: MetricFamily, traj: Trajectory) -> float:
    """
    Largest coordinate deviation of a trajectory from the closed-form geodesic
    with the same initial data, measured in the chart of each sample.
    """
    fiber = require_de_sitter(family)
    X0 = to_hyperboloid(fiber, traj.point(0))
    V0 = push_tangent(fiber, traj.point(0), traj.velocity(0))
    positions, _ = closed_form_geodesic(X0, V0, traj.u - traj.u[0])
    worst = 0.0
    for i, X in enumerate(positions):
        expected = from_hyperboloid(fiber, X)
        coords = fiber.express_in_chart(expected.x, int(traj.chart[i]))
        dx = fiber.chart_difference(int(traj.chart[i]), traj.x[i], coords)
        worst = max(worst, abs(traj.t[i] - expected.t), float(np.max(np.abs(dx))))
    return worst


def spacelike_distance(X: np.ndarray, Y: np.ndarray) -> float:
    """
    Length of the spacelike geodesic segment joining X and Y.

    Two points joined by a spacelike geodesic of length L < π satisfy
    ⟨X, Y⟩ = cos L.

    Raises:
        PreconditionError: If ⟨X, Y⟩ ∉ (-1, 1].
    """
    inner = float(minkowski_inner(X, Y))
    if inner > 1.0 + 1e-12 or inner <= -1.0:
        raise PreconditionError(
            f"Points with ⟨X, Y⟩ = {inner:.6g} are not joined by a short spacelike geodesic."
        )
    return math.acos(min(inner, 1.0))


def causal_class_ambient(V: np.ndarray, tol: float = 1e-9) -> CausalClass:
    h = minkowski_inner(V, V)
    if abs(h) <= tol:
        return CausalClass.NULL
    return CausalClass.SPACELIKE if h > 0 else CausalClass.TIMELIKE


def boost(ambient_dim: int, axis: int, rapidity: float) -> np.ndarray:
    """Boost mixing X₀ with X_axis (1 ≤ axis < ambient_dim)."""
    if not 1 <= axis < ambient_dim:
        raise ValueError(f"Boost axis {axis} outside 1..{ambient_dim - 1}.")
    matrix = np.eye(ambient_dim)
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    matrix[0, 0] = matrix[axis, axis] = ch
    matrix[0, axis] = matrix[axis, 0] = sh
    return matrix


def rotation(ambient_dim: int, i: int, j: int, angle: float) -> np.ndarray:
    """Rotation in the spatial (X_i, X_j) plane."""
    if not (1 <= i < ambient_dim and 1 <= j < ambient_dim and i != j):
        raise ValueError(f"Rotation plane ({i}, {j}) is not spatial.")
    matrix = np.eye(ambient_dim)
    c, s = math.cos(angle), math.sin(angle)
    matrix[i, i] = matrix[j, j] = c
    matrix[i, j], matrix[j, i] = -s, s
    return matrix


def lorentz_generator(ambient_dim: int, coefficients: np.ndarray) -> np.ndarray:
    """
    Element of the Lie algebra so(1, n+1) from boost and rotation coefficients.

    The first ``ambient_dim - 1`` coefficients are boost components, the rest
    fill the upper triangle of the spatial rotation block.
    """
    n = ambient_dim - 1
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.size != n + n * (n - 1) // 2:
        raise ValueError(f"Expected {n + n * (n - 1) // 2} coefficients, got {coefficients.size}.")
    algebra = np.zeros((ambient_dim, ambient_dim))
    algebra[0, 1:] = algebra[1:, 0] = coefficients[:n]
    rows, cols = np.triu_indices(n, k=1)
    algebra[rows + 1, cols + 1] = coefficients[n:]
    algebra[cols + 1, rows + 1] = -coefficients[n:]
    return algebra


def is_lorentz(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    eta = np.diag([-1.0] + [1.0] * (matrix.shape[0] - 1))
    return bool(np.allclose(matrix.T @ eta @ matrix, eta, atol=tol * max(1.0, np.abs(matrix).max() ** 2)))


def is_orientation_preserving(matrix: np.ndarray) -> bool:
    """Time orientation is preserved iff Λ₀₀ > 0."""
    return bool(matrix[0, 0] > 0)


def sample_lorentz_elements(
    ambient_dim: int,
    count: int,
    seed: int = 0,
    max_generators: int = 3,
    max_rapidity: float = 5.0,
) -> list[np.ndarray]:
    """
    Deterministic sample of time-orientation preserving Lorentz transformations.

    Each element is a product of at most ``max_generators`` exponentials of
    random Lie algebra elements with boost part of size at most ``max_rapidity``.
    """
    rng = np.random.default_rng(seed)
    n = ambient_dim - 1
    size = n + n * (n - 1) // 2
    elements = []
    for _ in range(count):
        matrix = np.eye(ambient_dim)
        for _ in range(int(rng.integers(1, max_generators + 1))):
            coefficients = rng.normal(size=size)
            boost_norm = np.linalg.norm(coefficients[:n])
            coefficients[:n] *= rng.uniform(0.0, max_rapidity) / max(boost_norm, 1e-12)
            coefficients[n:] = rng.uniform(-math.pi, math.pi, size=size - n)
            matrix = expm(lorentz_generator(ambient_dim, coefficients)) @ matrix
        elements.append(matrix)
    return elements
