"""
Fibers Module

Compact fibers F on which the time-dependent metrics live, together with their
chart machinery. Two families are supported:

- ``SphereFiber``: the round sphere Sⁿ (n ≤ 3). S¹ uses a single periodic angle
  chart; Sⁿ for n ≥ 2 uses two stereographic charts (projection from the north
  pole, chart 0, and from the south pole, chart 1) with transition y ↦ y/|y|².
  S² can alternatively use a polar chart (θ, φ) for textbook comparisons.
- ``TorusFiber``: the flat torus Tⁿ with one periodic chart, coordinates reduced
  mod 2π.

Classes:
    FiberPoint: A point of F in chart coordinates.
    Fiber: Abstract chart interface shared by every fiber.
    SphereFiber: Round spheres.
    TorusFiber: Flat tori.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from lorentz_lab.utils.errors import ChartDomainError

TWO_PI = 2.0 * np.pi


def wrap_angle(values: np.ndarray | float) -> np.ndarray:
    """Reduce angles to [0, 2π)."""
    return np.mod(values, TWO_PI)


def wrap_difference(values: np.ndarray | float) -> np.ndarray:
    """Reduce angle differences to (-π, π]."""
    return np.pi - np.mod(np.pi - np.asarray(values, dtype=float), TWO_PI)


@dataclass(frozen=True, eq=False)
class FiberPoint:
    """
    A point of the fiber F in chart coordinates.

    Attributes:
        chart_id (int): Index of the chart the coordinates refer to.
        coords (np.ndarray): Chart coordinates, length n.
    """

    chart_id: int
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "chart_id", int(self.chart_id))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def to_dict(self) -> dict:
        return {"chart": self.chart_id, "coords": self.coords.tolist()}


class Fiber(ABC):
    """
    Chart interface of a compact fiber.

    Attributes:
        dim (int): Dimension n of the fiber.
        curvature (float): Constant sectional curvature of the base metric.
        n_charts (int): Number of charts in the atlas.
        periodic (bool): Whether coordinates are angles reduced mod 2π.
    """

    dim: int
    curvature: float
    n_charts: int
    periodic: bool
    name: str

    @abstractmethod
    def base_metric(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        """Coordinate matrix of the base metric g₀ at y."""

    @abstractmethod
    def base_metric_derivative(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        """Array ∂ₖ(g₀)ᵢⱼ indexed [k, i, j]."""

    @abstractmethod
    def base_christoffels(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        """Christoffel symbols Γᵏᵢⱼ of g₀ indexed [k, i, j]."""

    @abstractmethod
    def in_domain(self, chart_id: int, y: np.ndarray) -> bool:
        """Whether y lies inside the declared domain of the chart."""

    @abstractmethod
    def embed(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        """Euclidean embedding of the point."""

    @abstractmethod
    def embed_jacobian(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        """Jacobian of ``embed`` with respect to the chart coordinates."""

    @abstractmethod
    def from_embedding(self, omega: np.ndarray) -> FiberPoint:
        """Chart point of an embedded point, using the best-conditioned chart."""

    @abstractmethod
    def grid(self, spacing: float) -> list[FiberPoint]:
        """Deterministic background grid with roughly ``spacing`` in g₀."""

    @abstractmethod
    def sample_points(self, count: int, seed: int = 0) -> list[FiberPoint]:
        """Deterministic low-discrepancy sample of points."""

    @abstractmethod
    def base_distance(self, p: FiberPoint, q: FiberPoint) -> float:
        """Intrinsic distance of the base metric g₀."""

    def origin(self) -> FiberPoint:
        return FiberPoint(0, np.zeros(self.dim))

    def validate(self, point: FiberPoint) -> None:
        if point.dim != self.dim:
            raise ChartDomainError(
                f"Point has {point.dim} coordinates, fiber {self.name} has dimension {self.dim}."
            )
        if not 0 <= point.chart_id < self.n_charts:
            raise ChartDomainError(
                f"Chart {point.chart_id} does not exist on {self.name}."
            )
        if not np.all(np.isfinite(point.coords)) or not self.in_domain(
            point.chart_id, point.coords
        ):
            raise ChartDomainError(
                f"Coordinates {point.coords} outside the domain of chart {point.chart_id} on {self.name}."
            )

    def normalize(self, chart_id: int, y: np.ndarray) -> FiberPoint:
        return FiberPoint(chart_id, y)

    def switch_margin(self, chart_id: int, y: np.ndarray) -> float | None:
        """Positive while y is comfortably inside its chart; ``None`` without switching."""
        return None

    def transition(
        self, chart_id: int, y: np.ndarray, v: np.ndarray
    ) -> tuple[int, np.ndarray, np.ndarray]:
        return chart_id, y, v

    def express_in_chart(self, point: FiberPoint, chart_id: int) -> np.ndarray:
        if point.chart_id == chart_id:
            return point.coords.copy()
        return self.from_embedding(self.embed(point.chart_id, point.coords)).coords

    def chart_difference(
        self, chart_id: int, y_from: np.ndarray, y_to: np.ndarray
    ) -> np.ndarray:
        return np.asarray(y_to, dtype=float) - np.asarray(y_from, dtype=float)

    def chart_velocity(
        self, chart_id: int, y: np.ndarray, d_omega: np.ndarray
    ) -> np.ndarray:
        """Chart components of an embedded tangent vector."""
        jacobian = self.embed_jacobian(chart_id, y)
        return np.linalg.lstsq(jacobian, d_omega, rcond=None)[0]

    def neighbor_pairs(self, points: list[FiberPoint], radius: float) -> np.ndarray:
        """Index pairs of points whose embeddings are closer than ``radius``."""
        embedded = np.array([self.embed(p.chart_id, p.coords) for p in points])
        return cKDTree(embedded).query_pairs(r=radius, output_type="ndarray")


@dataclass
class SphereFiber(Fiber):
    """
    Round sphere Sⁿ of curvature 1.

    Attributes:
        dim (int): Dimension n (1 to 3).
        chart_system (str): ``"angle"`` (n = 1 only), ``"stereographic"`` or
            ``"polar"`` (n = 2 only). Defaults to angle for S¹ and
            stereographic otherwise.
        chart_radius (float): Stereographic chart domain radius.
        switch_fraction (float): Fraction of the radius where integrators switch chart.
    """

    dim: int = 1
    chart_system: Literal["angle", "stereographic", "polar"] | None = None
    chart_radius: float = 2.0
    switch_fraction: float = 0.8
    curvature: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not 1 <= self.dim <= 3:
            raise ValueError(f"Sphere fibers are supported for n <= 3, got {self.dim}.")
        if self.chart_system is None:
            self.chart_system = "angle" if self.dim == 1 else "stereographic"
        if self.chart_system == "angle" and self.dim != 1:
            raise ValueError("The angle chart exists on S¹ only.")
        if self.chart_system == "polar" and self.dim != 2:
            raise ValueError("The polar chart exists on S² only.")
        if self.chart_system == "stereographic" and self.dim == 1:
            raise ValueError("S¹ uses the periodic angle chart.")

    @property
    def name(self) -> str:
        return f"S{self.dim}"

    @property
    def n_charts(self) -> int:
        return 2 if self.chart_system == "stereographic" else 1

    @property
    def periodic(self) -> bool:
        return self.chart_system == "angle"

    def base_metric(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.chart_system == "angle":
            return np.ones((1, 1))
        if self.chart_system == "polar":
            return np.diag([1.0, np.sin(y[0]) ** 2])
        s = 1.0 + y @ y
        return (4.0 / s**2) * np.eye(self.dim)

    def base_metric_derivative(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        n = self.dim
        out = np.zeros((n, n, n))
        if self.chart_system == "angle":
            return out
        if self.chart_system == "polar":
            out[0, 1, 1] = 2.0 * np.sin(y[0]) * np.cos(y[0])
            return out
        s = 1.0 + y @ y
        for k in range(n):
            out[k] = (-16.0 * y[k] / s**3) * np.eye(n)
        return out

    def base_christoffels(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        n = self.dim
        gamma = np.zeros((n, n, n))
        if self.chart_system == "angle":
            return gamma
        if self.chart_system == "polar":
            theta = y[0]
            gamma[0, 1, 1] = -np.sin(theta) * np.cos(theta)
            gamma[1, 0, 1] = gamma[1, 1, 0] = np.cos(theta) / np.sin(theta)
            return gamma
        # conformal factor e^{2φ} with φ = log(2 / (1 + |y|²))
        d_phi = -2.0 * y / (1.0 + y @ y)
        eye = np.eye(n)
        for k in range(n):
            gamma[k] = (
                np.outer(eye[k], d_phi) + np.outer(d_phi, eye[k]) - eye * d_phi[k]
            )
        return gamma

    def in_domain(self, chart_id: int, y: np.ndarray) -> bool:
        y = np.asarray(y, dtype=float)
        if self.chart_system == "angle":
            return True
        if self.chart_system == "polar":
            return bool(0.0 < y[0] < np.pi)
        return bool(np.sqrt(y @ y) <= self.chart_radius + 1e-12)

    def normalize(self, chart_id: int, y: np.ndarray) -> FiberPoint:
        y = np.array(y, dtype=float)
        if self.chart_system == "angle":
            y = wrap_angle(y)
        elif self.chart_system == "polar":
            y[1] = wrap_angle(y[1])
        return FiberPoint(chart_id, y)

    def switch_margin(self, chart_id: int, y: np.ndarray) -> float | None:
        if self.chart_system != "stereographic":
            return None
        y = np.asarray(y, dtype=float)
        return (self.switch_fraction * self.chart_radius) ** 2 - y @ y

    def transition(
        self, chart_id: int, y: np.ndarray, v: np.ndarray
    ) -> tuple[int, np.ndarray, np.ndarray]:
        if self.chart_system != "stereographic":
            return chart_id, y, v
        y = np.asarray(y, dtype=float)
        v = np.asarray(v, dtype=float)
        r2 = y @ y
        jacobian = np.eye(self.dim) / r2 - 2.0 * np.outer(y, y) / r2**2
        return 1 - chart_id, y / r2, jacobian @ v

    def embed(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.chart_system == "angle":
            return np.array([np.cos(y[0]), np.sin(y[0])])
        if self.chart_system == "polar":
            theta, phi = y
            return np.array(
                [
                    np.sin(theta) * np.cos(phi),
                    np.sin(theta) * np.sin(phi),
                    np.cos(theta),
                ]
            )
        s = 1.0 + y @ y
        last = (s - 2.0) / s if chart_id == 0 else (2.0 - s) / s
        return np.append(2.0 * y / s, last)

    def embed_jacobian(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.chart_system == "angle":
            return np.array([[-np.sin(y[0])], [np.cos(y[0])]])
        if self.chart_system == "polar":
            theta, phi = y
            return np.array(
                [
                    [np.cos(theta) * np.cos(phi), -np.sin(theta) * np.sin(phi)],
                    [np.cos(theta) * np.sin(phi), np.sin(theta) * np.cos(phi)],
                    [-np.sin(theta), 0.0],
                ]
            )
        s = 1.0 + y @ y
        top = 2.0 * np.eye(self.dim) / s - 4.0 * np.outer(y, y) / s**2
        sign = 1.0 if chart_id == 0 else -1.0
        bottom = sign * 4.0 * y / s**2
        return np.vstack([top, bottom])

    def from_embedding(self, omega: np.ndarray) -> FiberPoint:
        omega = np.asarray(omega, dtype=float)
        omega = omega / np.linalg.norm(omega)
        if self.chart_system == "angle":
            return FiberPoint(0, wrap_angle([np.arctan2(omega[1], omega[0])]))
        if self.chart_system == "polar":
            theta = np.arccos(np.clip(omega[2], -1.0, 1.0))
            phi = wrap_angle(np.arctan2(omega[1], omega[0]))
            return FiberPoint(0, [theta, phi])
        if omega[-1] <= 0.0:
            return FiberPoint(0, omega[:-1] / (1.0 - omega[-1]))
        return FiberPoint(1, omega[:-1] / (1.0 + omega[-1]))

    def express_in_chart(self, point: FiberPoint, chart_id: int) -> np.ndarray:
        if point.chart_id == chart_id or self.chart_system != "stereographic":
            return point.coords.copy()
        y = point.coords
        return y / (y @ y)

    def chart_difference(
        self, chart_id: int, y_from: np.ndarray, y_to: np.ndarray
    ) -> np.ndarray:
        delta = np.asarray(y_to, dtype=float) - np.asarray(y_from, dtype=float)
        if self.chart_system == "angle":
            return wrap_difference(delta)
        if self.chart_system == "polar":
            delta[1] = wrap_difference(delta[1])
        return delta

    def grid(self, spacing: float) -> list[FiberPoint]:
        if self.chart_system == "angle":
            count = int(np.ceil(TWO_PI / spacing))
            return [FiberPoint(0, [TWO_PI * k / count]) for k in range(count)]
        area = {2: 4.0 * np.pi, 3: 2.0 * np.pi**2}[self.dim]
        count = max(int(np.ceil(area / spacing**self.dim)), 8)
        if self.dim == 2:
            # Fibonacci lattice
            k = np.arange(count) + 0.5
            z = 1.0 - 2.0 * k / count
            phi = np.pi * (1.0 + np.sqrt(5.0)) * k
            r = np.sqrt(1.0 - z**2)
            omegas = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        else:
            omegas = self._halton_sphere(count, seed=0)
        return [self.from_embedding(omega) for omega in omegas]

    def _halton_sphere(self, count: int, seed: int) -> np.ndarray:
        sampler = qmc.Halton(d=self.dim + 1, scramble=True, seed=seed)
        gaussian = norm.ppf(np.clip(sampler.random(count), 1e-12, 1 - 1e-12))
        return gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)

    def sample_points(self, count: int, seed: int = 0) -> list[FiberPoint]:
        if self.chart_system == "angle":
            sampler = qmc.Halton(d=1, scramble=True, seed=seed)
            return [FiberPoint(0, TWO_PI * u) for u in sampler.random(count)]
        points = [self.from_embedding(omega) for omega in self._halton_sphere(count, seed)]
        if self.chart_system == "polar":
            # stay away from the coordinate poles
            points = [
                FiberPoint(0, [np.clip(p.coords[0], 0.05, np.pi - 0.05), p.coords[1]])
                for p in points
            ]
        return points

    def base_distance(self, p: FiberPoint, q: FiberPoint) -> float:
        a = self.embed(p.chart_id, p.coords)
        b = self.embed(q.chart_id, q.coords)
        return float(np.arccos(np.clip(a @ b, -1.0, 1.0)))


@dataclass
class TorusFiber(Fiber):
    """
    Flat torus Tⁿ = ℝⁿ / 2πℤⁿ with a single periodic chart.

    Attributes:
        dim (int): Dimension n (1 to 3).
    """

    dim: int = 2
    curvature: float = field(default=0.0, init=False)

    def __post_init__(self):
        if not 1 <= self.dim <= 3:
            raise ValueError(f"Torus fibers are supported for n <= 3, got {self.dim}.")

    @property
    def name(self) -> str:
        return f"T{self.dim}"

    n_charts = 1
    periodic = True

    def base_metric(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        return np.eye(self.dim)

    def base_metric_derivative(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        return np.zeros((self.dim, self.dim, self.dim))

    def base_christoffels(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        return np.zeros((self.dim, self.dim, self.dim))

    def in_domain(self, chart_id: int, y: np.ndarray) -> bool:
        return True

    def normalize(self, chart_id: int, y: np.ndarray) -> FiberPoint:
        return FiberPoint(0, wrap_angle(np.asarray(y, dtype=float)))

    def embed(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.concatenate([np.cos(y), np.sin(y)])

    def embed_jacobian(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.vstack([np.diag(-np.sin(y)), np.diag(np.cos(y))])

    def from_embedding(self, omega: np.ndarray) -> FiberPoint:
        omega = np.asarray(omega, dtype=float)
        return FiberPoint(
            0, wrap_angle(np.arctan2(omega[self.dim :], omega[: self.dim]))
        )

    def chart_difference(
        self, chart_id: int, y_from: np.ndarray, y_to: np.ndarray
    ) -> np.ndarray:
        return wrap_difference(np.asarray(y_to, dtype=float) - np.asarray(y_from))

    def grid(self, spacing: float) -> list[FiberPoint]:
        count = int(np.ceil(TWO_PI / spacing))
        axis = TWO_PI * np.arange(count) / count
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        coords = np.column_stack([m.ravel() for m in mesh])
        return [FiberPoint(0, c) for c in coords]

    def sample_points(self, count: int, seed: int = 0) -> list[FiberPoint]:
        sampler = qmc.Halton(d=self.dim, scramble=True, seed=seed)
        return [FiberPoint(0, TWO_PI * u) for u in sampler.random(count)]

    def base_distance(self, p: FiberPoint, q: FiberPoint) -> float:
        delta = wrap_difference(q.coords - p.coords)
        return float(np.sqrt(delta @ delta))


def make_fiber(
    kind: Literal["sphere", "torus"], dim: int, chart_system: str | None = None
) -> Fiber:
    """Fiber factory used by the configuration layer."""
    if kind == "sphere":
        return SphereFiber(dim=dim, chart_system=chart_system)
    if kind == "torus":
        return TorusFiber(dim=dim)
    raise ValueError(f"Unknown fiber kind {kind!r}; expected 'sphere' or 'torus'.")
