"""
Metric Family Module

Time-dependent Riemannian metrics g_t on a compact fiber F, their time and space
derivatives, spatial Christoffel symbols, and the structural checks used by
every other module: the growth hypothesis

    sign(t)·∂_t g_t(X, X) ≥ 2c·g_t(X, X)   for |t| ≥ t0

and its integrated form g_{t2}(X, X) ≥ e^{2c(t2 - t1)} g_{t1}(X, X).

Three kinds of families are provided:

- ``WarpedProduct``: g_t = f(t)²·g₀ with f from a small catalog.
- ``TorusMatrix``: g_t = G(t), a matrix-valued function on a flat torus.
- ``BumpPerturbedWarp``: g_t = f(t)²·(1 + ε·bump(x)·envelope(t))·g₀, an
  inhomogeneous deformation of a warped product.
"""

import logging
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import linalg

from lorentz_lab.geometry.fibers import Fiber, FiberPoint, SphereFiber, TorusFiber
from lorentz_lab.utils.errors import PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_DT_STEP = 1e-5
DEFAULT_HORIZON = 10.0

WarpName = Literal["cosh", "exp", "sinh-shifted", "constant"]
EnvelopeName = Literal["sech", "gaussian", "constant"]


@dataclass(frozen=True)
class WarpFunction:
    """
    Scalar warp function f(t) from a fixed catalog.

    Attributes:
        name (str): One of:
            - "cosh": f = cosh(λt).
            - "exp": f = e^{λt}.
            - "sinh-shifted": f = sqrt(sinh²(λt) + a²).
            - "constant": f = 1.
        rate (float): The rate λ.
        shift (float): The offset a of "sinh-shifted".
    """

    name: WarpName = "cosh"
    rate: float = 1.0
    shift: float = 1.0

    def __post_init__(self):
        if self.name not in ("cosh", "exp", "sinh-shifted", "constant"):
            raise ValueError(f"Unknown warp function {self.name!r}.")
        if self.name == "sinh-shifted" and self.shift <= 0:
            raise ValueError("sinh-shifted warp needs a positive shift.")

    def value(self, t: float) -> float:
        lt = self.rate * t
        if self.name == "cosh":
            return math.cosh(lt)
        if self.name == "exp":
            return math.exp(lt)
        if self.name == "sinh-shifted":
            return math.sqrt(math.sinh(lt) ** 2 + self.shift**2)
        return 1.0

    def derivative(self, t: float) -> float:
        lt, rate = self.rate * t, self.rate
        if self.name == "cosh":
            return rate * math.sinh(lt)
        if self.name == "exp":
            return rate * math.exp(lt)
        if self.name == "sinh-shifted":
            return rate * math.sinh(lt) * math.cosh(lt) / self.value(t)
        return 0.0

    def second_derivative(self, t: float) -> float:
        lt, rate = self.rate * t, self.rate
        if self.name == "cosh":
            return rate**2 * math.cosh(lt)
        if self.name == "exp":
            return rate**2 * math.exp(lt)
        if self.name == "sinh-shifted":
            f = self.value(t)
            s, c = math.sinh(lt), math.cosh(lt)
            return rate**2 * ((c * c + s * s) / f - (s * c) ** 2 / f**3)
        return 0.0

    def log_derivative(self, t: float) -> float:
        """f′(t)/f(t)."""
        if self.name == "cosh":
            return self.rate * math.tanh(self.rate * t)
        if self.name == "exp":
            return self.rate
        return self.derivative(t) / self.value(t)

    @property
    def is_even(self) -> bool:
        return self.name in ("cosh", "sinh-shifted", "constant")


@dataclass(frozen=True)
class Envelope:
    """
    Time envelope of a bump perturbation.

    Attributes:
        name (str): "sech" (sech((t - center)/width)), "gaussian"
            (exp(-((t - center)/width)²)) or "constant" (1).
        center (float): The envelope center t_b.
        width (float): The envelope width.
    """

    name: EnvelopeName = "sech"
    center: float = 0.0
    width: float = 1.0

    def value(self, t: float) -> float:
        s = (t - self.center) / self.width
        if self.name == "sech":
            return 1.0 / math.cosh(s)
        if self.name == "gaussian":
            return math.exp(-s * s)
        return 1.0

    def derivative(self, t: float) -> float:
        s = (t - self.center) / self.width
        if self.name == "sech":
            return -math.tanh(s) / math.cosh(s) / self.width
        if self.name == "gaussian":
            return -2.0 * s * math.exp(-s * s) / self.width
        return 0.0

    @property
    def is_even(self) -> bool:
        return self.center == 0.0 or self.name == "constant"


@dataclass
class FiberBump:
    """
    Smooth positive bump on F with maximum 1 at ``center``.

    Sphere fibers use exp(-|ω - ω_c|²/(2σ²)) in the embedding; tori use the
    von Mises form exp((Σ cos(x - c) - n)/σ²).

    Attributes:
        fiber (Fiber): The fiber carrying the bump.
        center (FiberPoint): The bump center.
        width (float): The width σ.
    """

    fiber: Fiber
    center: FiberPoint
    width: float = 0.5

    def __post_init__(self):
        self._center_embedded = self.fiber.embed(self.center.chart_id, self.center.coords)

    def value(self, chart_id: int, y: np.ndarray) -> float:
        if isinstance(self.fiber, TorusFiber):
            delta = np.cos(np.asarray(y) - self.center.coords) - 1.0
            return float(np.exp(delta.sum() / self.width**2))
        diff = self.fiber.embed(chart_id, y) - self._center_embedded
        return float(np.exp(-(diff @ diff) / (2.0 * self.width**2)))

    def gradient(self, chart_id: int, y: np.ndarray) -> np.ndarray:
        value = self.value(chart_id, y)
        if isinstance(self.fiber, TorusFiber):
            return value * (-np.sin(np.asarray(y) - self.center.coords) / self.width**2)
        diff = self.fiber.embed(chart_id, y) - self._center_embedded
        jacobian = self.fiber.embed_jacobian(chart_id, y)
        return value * (-(diff @ jacobian) / self.width**2)


class MetricFamily(ABC):
    """
    A smooth family {g_t} of Riemannian metrics on a compact fiber.

    Subclasses implement the unchecked evaluators ``metric``, ``metric_dt`` and
    ``metric_dx``; the module level operations validate their inputs first.

    Attributes:
        fiber (Fiber): The fiber F.
        kind (str): Family kind name.
    """

    fiber: Fiber
    kind: str

    @property
    def dim(self) -> int:
        return self.fiber.dim

    @abstractmethod
    def metric(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        """Coordinate matrix of g_t at y."""

    def metric_dt(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        """∂_t g_t at y; central difference unless a subclass knows the derivative."""
        step = getattr(self, "dt_step", DEFAULT_DT_STEP)
        return (
            self.metric(t + step, chart_id, y) - self.metric(t - step, chart_id, y)
        ) / (2.0 * step)

    @abstractmethod
    def metric_dx(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        """Spatial derivatives ∂ₖ(g_t)ᵢⱼ indexed [k, i, j]."""

    def christoffels(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        """Spatial Christoffel symbols of g_t indexed [k, i, j]."""
        inverse = np.linalg.inv(self.metric(t, chart_id, y))
        d = self.metric_dx(t, chart_id, y)
        # lowered Γ_{l i j} = ½(∂ᵢ g_lj + ∂ⱼ g_li - ∂_l g_ij)
        lowered = 0.5 * (
            np.einsum("ilj->lij", d) + np.einsum("jli->lij", d) - d
        )
        return np.einsum("kl,lij->kij", inverse, lowered)

    @property
    def warp(self) -> WarpFunction | None:
        return None

    @property
    def is_time_symmetric(self) -> bool:
        """Whether g_{-t} = g_t, so that t ↦ -t is an isometry."""
        return False

    @property
    def is_de_sitter(self) -> bool:
        """Whether the family is the hyperboloid model -dt² + cosh²(t)·g_round."""
        warp = self.warp
        return (
            isinstance(self, WarpedProduct)
            and isinstance(self.fiber, SphereFiber)
            and warp is not None
            and warp.name == "cosh"
            and warp.rate == 1.0
        )

    def describe(self) -> dict:
        return {"kind": self.kind, "fiber": self.fiber.name}


@dataclass
class WarpedProduct(MetricFamily):
    """
    Warped product g_t = f(t)²·g₀.

    Attributes:
        fiber (Fiber): The fiber with its base metric g₀.
        warp_function (WarpFunction): The warp f.
    """

    fiber: Fiber = field(default_factory=SphereFiber)
    warp_function: WarpFunction = field(default_factory=WarpFunction)
    kind: str = field(default="warped-product", init=False)

    @property
    def warp(self) -> WarpFunction:
        return self.warp_function

    @property
    def is_time_symmetric(self) -> bool:
        return self.warp_function.is_even

    def metric(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        return self.warp_function.value(t) ** 2 * self.fiber.base_metric(chart_id, y)

    def metric_dt(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        f, df = self.warp_function.value(t), self.warp_function.derivative(t)
        return 2.0 * f * df * self.fiber.base_metric(chart_id, y)

    def metric_dx(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        return self.warp_function.value(t) ** 2 * self.fiber.base_metric_derivative(
            chart_id, y
        )

    def christoffels(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        # the warp factor is constant on each slice and cancels
        return self.fiber.base_christoffels(chart_id, y)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "fiber": self.fiber.name,
            "warp": self.warp_function.name,
            "rate": self.warp_function.rate,
        }


@dataclass
class TorusMatrix(MetricFamily):
    """
    Spatially constant family g_t = G(t) on a flat torus.

    Attributes:
        fiber (TorusFiber): The torus.
        matrix_fn (Callable): t ↦ G(t), symmetric positive definite.
        derivative_fn (Callable | None): t ↦ G′(t); central differences with
            ``dt_step`` when missing.
        label (str): Human readable description used in reports.
        dt_step (float): Finite difference step for ∂_t g.
    """

    fiber: TorusFiber = field(default_factory=TorusFiber)
    matrix_fn: Callable[[float], np.ndarray] = None
    derivative_fn: Callable[[float], np.ndarray] | None = None
    label: str = "custom"
    dt_step: float = DEFAULT_DT_STEP
    kind: str = field(default="torus-matrix", init=False)
    symmetric_in_time: bool = False

    def __post_init__(self):
        if not isinstance(self.fiber, TorusFiber):
            raise ValueError("TorusMatrix families live on torus fibers.")
        if self.matrix_fn is None:
            n = self.fiber.dim
            self.matrix_fn = lambda t: np.eye(n)
            self.derivative_fn = lambda t: np.zeros((n, n))
            self.label = "constant-identity"

    @classmethod
    def diagonal(
        cls, fiber: TorusFiber, warps: list[WarpFunction], dt_step: float = DEFAULT_DT_STEP
    ) -> "TorusMatrix":
        """G(t) = diag(f₁(t)², ..., fₙ(t)²)."""
        if len(warps) != fiber.dim:
            raise ValueError(f"Need {fiber.dim} warps, got {len(warps)}.")
        return cls(
            fiber=fiber,
            matrix_fn=lambda t: np.diag([w.value(t) ** 2 for w in warps]),
            derivative_fn=lambda t: np.diag(
                [2.0 * w.value(t) * w.derivative(t) for w in warps]
            ),
            label="diagonal(" + ",".join(f"{w.name}:{w.rate}" for w in warps) + ")",
            dt_step=dt_step,
            symmetric_in_time=all(w.is_even for w in warps),
        )

    @classmethod
    def constant(cls, fiber: TorusFiber, matrix: np.ndarray) -> "TorusMatrix":
        matrix = np.array(matrix, dtype=float)
        return cls(
            fiber=fiber,
            matrix_fn=lambda t: matrix.copy(),
            derivative_fn=lambda t: np.zeros_like(matrix),
            label="constant",
            symmetric_in_time=True,
        )

    @property
    def is_time_symmetric(self) -> bool:
        return self.symmetric_in_time

    def metric(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix_fn(t), dtype=float)

    def metric_dt(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        if self.derivative_fn is None:
            return super().metric_dt(t, chart_id, y)
        return np.asarray(self.derivative_fn(t), dtype=float)

    def metric_dx(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        n = self.dim
        return np.zeros((n, n, n))

    def christoffels(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        n = self.dim
        return np.zeros((n, n, n))

    def describe(self) -> dict:
        return {"kind": self.kind, "fiber": self.fiber.name, "matrix": self.label}


@dataclass
class BumpPerturbedWarp(MetricFamily):
    """
    Inhomogeneous family g_t = f(t)²·(1 + ε·bump(x)·envelope(t))·g₀.

    Positive definiteness is checked at construction on a (t, x) sample grid.

    Attributes:
        fiber (Fiber): The fiber.
        warp_function (WarpFunction): The warp f.
        bump (FiberBump): Spatial bump.
        envelope (Envelope): Time envelope.
        epsilon (float): Perturbation amplitude ε.
    """

    fiber: Fiber = field(default_factory=SphereFiber)
    warp_function: WarpFunction = field(default_factory=WarpFunction)
    bump: FiberBump | None = None
    envelope: Envelope = field(default_factory=Envelope)
    epsilon: float = 0.1
    kind: str = field(default="bump-perturbed-warp", init=False)

    def __post_init__(self):
        if self.bump is None:
            self.bump = FiberBump(fiber=self.fiber, center=self.fiber.origin())
        for t in np.linspace(-DEFAULT_HORIZON, DEFAULT_HORIZON, 41):
            for point in self.fiber.sample_points(16):
                try:
                    np.linalg.cholesky(self.metric(t, point.chart_id, point.coords))
                except np.linalg.LinAlgError:
                    raise ValueError(
                        f"Perturbation epsilon={self.epsilon} breaks positive definiteness at t={t:.3f}."
                    )

    @property
    def warp(self) -> WarpFunction:
        return self.warp_function

    @property
    def is_time_symmetric(self) -> bool:
        return self.warp_function.is_even and self.envelope.is_even

    def _factor(self, t: float, chart_id: int, y: np.ndarray) -> float:
        return 1.0 + self.epsilon * self.bump.value(chart_id, y) * self.envelope.value(t)

    def metric(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        return (
            self.warp_function.value(t) ** 2
            * self._factor(t, chart_id, y)
            * self.fiber.base_metric(chart_id, y)
        )

    def metric_dt(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        f, df = self.warp_function.value(t), self.warp_function.derivative(t)
        bump = self.bump.value(chart_id, y)
        d_factor = self.epsilon * bump * self.envelope.derivative(t)
        scale = 2.0 * f * df * self._factor(t, chart_id, y) + f * f * d_factor
        return scale * self.fiber.base_metric(chart_id, y)

    def metric_dx(self, t: float, chart_id: int, y: np.ndarray) -> np.ndarray:
        f2 = self.warp_function.value(t) ** 2
        g0 = self.fiber.base_metric(chart_id, y)
        d_g0 = self.fiber.base_metric_derivative(chart_id, y)
        grad = self.epsilon * self.envelope.value(t) * self.bump.gradient(chart_id, y)
        factor = self._factor(t, chart_id, y)
        return f2 * (grad[:, None, None] * g0[None, :, :] + factor * d_g0)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "fiber": self.fiber.name,
            "warp": self.warp_function.name,
            "epsilon": self.epsilon,
            "envelope": self.envelope.name,
            "envelope_center": self.envelope.center,
        }


@dataclass(frozen=True)
class HypothesisCertificate:
    """
    Witness (t0, c) of the growth hypothesis and its derived bounds.

    Attributes:
        t0 (float): Slab threshold.
        c (float): Growth rate.
        horizon (float): Length of the |t| range the grid check covered.
        worst_margin (float): Smallest relative margin seen on the grid.
        sample_count (int): Number of grid evaluations.
    """

    t0: float
    c: float
    horizon: float = DEFAULT_HORIZON
    worst_margin: float = float("nan")
    sample_count: int = 0

    def __post_init__(self):
        if not (self.t0 > 0 and self.c > 0):
            raise ValueError(f"Certificate needs t0 > 0 and c > 0, got {self.t0}, {self.c}.")

    @property
    def length_bound(self) -> float:
        """π/c: bound on the length of spacelike geodesics beyond t0."""
        return math.pi / self.c

    @property
    def projection_bound(self) -> float:
        """C′ = π/c + 1/c: bound on projected lengths of apex-started geodesics."""
        return self.length_bound + 1.0 / self.c

    def to_dict(self) -> dict:
        return {
            "t0": self.t0,
            "c": self.c,
            "length_bound": self.length_bound,
            "projection_bound": self.projection_bound,
            "horizon": self.horizon,
            "worst_margin": self.worst_margin,
            "sample_count": self.sample_count,
        }


@dataclass(frozen=True)
class HypothesisCounterexample:
    """
    A sample violating the growth hypothesis.

    Attributes:
        t (float): Time of the violation.
        x (FiberPoint): Fiber point of the violation.
        X (np.ndarray): Worst tangent direction (g_t-unit).
        margin (float): sign(t)·∂_t g(X,X)/g(X,X) - 2c, negative.
        source (str): "grid" or "scalar" (warped families' f′/f check).
    """

    t: float
    x: FiberPoint
    X: np.ndarray
    margin: float
    source: str = "grid"

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "x": self.x.to_dict(),
            "X": np.asarray(self.X).tolist(),
            "margin": self.margin,
            "source": self.source,
        }


@dataclass(frozen=True)
class GrowthReport:
    """
    Outcome of the integrated growth check g_{t2} ≥ e^{2c(t2-t1)} g_{t1}.

    Attributes:
        passed (bool): Whether every sampled ratio cleared the bound.
        worst_margin (float): Smallest ratio / e^{2c(t2-t1)} - 1 seen.
        worst_case (dict): (t1, t2, x) of the worst margin.
        sample_count (int): Number of (t1, t2, x) samples.
    """

    passed: bool
    worst_margin: float
    worst_case: dict
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "worst_case": self.worst_case,
            "sample_count": self.sample_count,
        }


def metric_at(family: MetricFamily, t: float, x: FiberPoint) -> np.ndarray:
    """
    Evaluate g_t at x.

    Args:
        family (MetricFamily): The metric family.
        t (float): Time.
        x (FiberPoint): Fiber point.

    Returns:
        np.ndarray: Symmetric positive definite n×n matrix.

    Raises:
        ChartDomainError: If x is outside its chart.
    """
    family.fiber.validate(x)
    g = family.metric(float(t), x.chart_id, x.coords)
    return 0.5 * (g + g.T)


def metric_t_derivative(family: MetricFamily, t: float, x: FiberPoint) -> np.ndarray:
    """∂_t g_t at x, analytic when the family provides it."""
    family.fiber.validate(x)
    d = family.metric_dt(float(t), x.chart_id, x.coords)
    return 0.5 * (d + d.T)


def spatial_christoffels(family: MetricFamily, t: float, x: FiberPoint) -> np.ndarray:
    """Christoffel symbols Γᵏᵢⱼ of g_t at x, indexed [k, i, j]."""
    family.fiber.validate(x)
    return family.christoffels(float(t), x.chart_id, x.coords)


def _t_grid(t0: float, horizon: float, count: int) -> np.ndarray:
    magnitudes = np.linspace(t0, t0 + horizon, count)
    return np.concatenate([magnitudes, -magnitudes])


def _grid_sizes(family: MetricFamily, sample_budget: int) -> tuple[int, int]:
    n_t = max(8, int(round(math.sqrt(sample_budget / 2))))
    n_x = max(1, sample_budget // (2 * n_t))
    if isinstance(family, TorusMatrix):
        n_x = 1
    return n_t, n_x


def _worst_direction(sign: float, g: np.ndarray, dg: np.ndarray) -> tuple[float, np.ndarray]:
    """min over X of sign·dg(X,X)/g(X,X) and its minimizer."""
    values, vectors = linalg.eigh(sign * dg, g)
    return float(values[0]), vectors[:, 0]


def _scan_growth(
    family: MetricFamily, t0: float, sample_budget: int, horizon: float, seed: int
):
    n_t, n_x = _grid_sizes(family, sample_budget)
    points = family.fiber.sample_points(n_x, seed=seed)
    for t in _t_grid(t0, horizon, n_t):
        sign = 1.0 if t > 0 else -1.0
        for point in points:
            g = family.metric(t, point.chart_id, point.coords)
            dg = family.metric_dt(t, point.chart_id, point.coords)
            rate, direction = _worst_direction(sign, g, dg)
            yield t, point, rate, direction


def estimate_growth_rate(
    family: MetricFamily,
    t0: float,
    sample_budget: int = 4096,
    horizon: float = DEFAULT_HORIZON,
    seed: int = 0,
) -> float:
    """
    Largest c for which the grid check of the growth hypothesis passes at t0.

    Returns:
        float: min over the grid of sign(t)·∂_t g(X,X) / (2 g(X,X)); may be ≤ 0.
    """
    if t0 <= 0:
        raise PreconditionError(f"t0 must be positive, got {t0}.")
    return min(rate for _, _, rate, _ in _scan_growth(family, t0, sample_budget, horizon, seed)) / 2.0


def check_hypothesis_H(
    family: MetricFamily,
    t0: float,
    c: float,
    sample_budget: int = 4096,
    horizon: float = DEFAULT_HORIZON,
    tol: float = 1e-12,
    seed: int = 0,
) -> HypothesisCertificate | HypothesisCounterexample:
    """
    Grid check of sign(t)·∂_t g_t(X,X) ≥ 2c·g_t(X,X) over |t| ∈ [t0, t0 + horizon].

    For every sampled (t, x) the minimum over directions X is computed exactly
    as the smallest generalized eigenvalue of (sign(t)·∂_t g, g). Warped
    products additionally check sign(t)·f′/f ≥ c on the same t grid.

    Args:
        family (MetricFamily): The family to certify.
        t0 (float): Slab threshold, positive.
        c (float): Growth rate, positive.
        sample_budget (int): Approximate number of (t, x) evaluations.
        horizon (float): Length of the checked |t| range.
        tol (float): Allowed relative violation.
        seed (int): Seed of the fiber sample.

    Returns:
        HypothesisCertificate | HypothesisCounterexample: The certificate, or the
        worst violating sample.
    """
    if not (t0 > 0 and c > 0):
        raise PreconditionError(f"Need t0 > 0 and c > 0, got t0={t0}, c={c}.")
    worst = None
    count = 0
    for t, point, rate, direction in _scan_growth(family, t0, sample_budget, horizon, seed):
        count += 1
        margin = rate - 2.0 * c
        if worst is None or margin < worst[0]:
            worst = (margin, t, point, direction)
    grid_passed = worst[0] >= -tol

    scalar_failure = None
    warp = family.warp
    if isinstance(family, WarpedProduct):
        n_t, _ = _grid_sizes(family, sample_budget)
        for t in _t_grid(t0, horizon, n_t):
            margin = math.copysign(1.0, t) * warp.log_derivative(t) - c
            if margin < -tol and (scalar_failure is None or margin < scalar_failure[0]):
                scalar_failure = (margin, t)
        if (scalar_failure is None) != grid_passed:
            warnings.warn(
                f"Grid and scalar verdicts of the growth hypothesis disagree for {family.describe()}."
            )

    if grid_passed and scalar_failure is None:
        logger.info("Growth hypothesis certified: t0=%s c=%s over %d samples", t0, c, count)
        return HypothesisCertificate(
            t0=t0, c=c, horizon=horizon, worst_margin=worst[0], sample_count=count
        )
    if not grid_passed:
        margin, t, point, direction = worst
        g = family.metric(t, point.chart_id, point.coords)
        direction = direction / math.sqrt(direction @ g @ direction)
        return HypothesisCounterexample(t=t, x=point, X=direction, margin=margin)
    margin, t = scalar_failure
    origin = family.fiber.origin()
    return HypothesisCounterexample(
        t=t, x=origin, X=np.ones(family.dim) / math.sqrt(family.dim), margin=2 * margin, source="scalar"
    )


def check_exponential_growth(
    family: MetricFamily,
    certificate: HypothesisCertificate,
    sample_budget: int = 4096,
    tol: float = 1e-9,
    seed: int = 0,
) -> GrowthReport:
    """
    Check g_{t2}(X,X) ≥ e^{2c(t2 - t1)}·g_{t1}(X,X) for sampled t0 ≤ |t1| ≤ |t2|.

    The minimum over X of the ratio is the smallest generalized eigenvalue of
    (g_{t2}, g_{t1}).

    Returns:
        GrowthReport: Pass/fail with the worst relative margin.
    """
    n_t = max(4, int(round((sample_budget / 2) ** (1 / 3))))
    n_x = max(1, sample_budget // (n_t * n_t))
    if isinstance(family, TorusMatrix):
        n_x = 1
    points = family.fiber.sample_points(n_x, seed=seed)
    magnitudes = np.linspace(certificate.t0, certificate.t0 + certificate.horizon, n_t)
    worst_margin, worst_case, count = math.inf, {}, 0
    for sign in (1.0, -1.0):
        for i, a in enumerate(magnitudes):
            for b in magnitudes[i:]:
                t1, t2 = sign * a, sign * b
                bound = math.exp(2.0 * certificate.c * (b - a))
                for point in points:
                    g1 = family.metric(t1, point.chart_id, point.coords)
                    g2 = family.metric(t2, point.chart_id, point.coords)
                    ratio = float(linalg.eigh(g2, g1, eigvals_only=True)[0])
                    margin = ratio / bound - 1.0
                    count += 1
                    if margin < worst_margin:
                        worst_margin = margin
                        worst_case = {"t1": t1, "t2": t2, "x": point.to_dict()}
    return GrowthReport(
        passed=worst_margin >= -tol,
        worst_margin=worst_margin,
        worst_case=worst_case,
        sample_count=count,
    )
