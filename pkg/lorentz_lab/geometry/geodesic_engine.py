"""
Geodesic Engine Module

Geodesics of h = -dt² + g_t on ℝ × F. In chart coordinates (t, x) the geodesic
equation reads

    ẗ  = -½ (∂_t g)(ẋ, ẋ)
    ẍᵏ = -Γᵏᵢⱼ ẋⁱ ẋʲ - gᵏˡ (∂_t g)_{lj} ṫ ẋʲ

and is integrated with scipy's adaptive RK45 pair. Level crossings t = ±T are
located with solve_ivp's event machinery; sphere fibers switch stereographic
chart when a trajectory leaves the inner part of its chart.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import StrEnum

import numpy as np
import pandas as pd
from scipy.integrate import simpson, solve_ivp, trapezoid

from lorentz_lab.geometry.fibers import FiberPoint
from lorentz_lab.geometry.metric_family import HypothesisCertificate, MetricFamily
from lorentz_lab.utils.errors import (
    IntegrationFailure,
    NumericalAnomaly,
    PreconditionError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpacetimePoint:
    """
    A point (t, x) of ℝ × F.

    Attributes:
        t (float): Time coordinate.
        x (FiberPoint): Fiber point.
    """

    t: float
    x: FiberPoint

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError(f"Non-finite time coordinate {self.t}.")

    def to_dict(self) -> dict:
        return {"t": self.t, **self.x.to_dict()}


@dataclass(frozen=True, eq=False)
class TangentVector:
    """
    Tangent vector with time component ``dt`` and fiber chart components ``dx``.

    Attributes:
        dt (float): Time component.
        dx (np.ndarray): Fiber components in the chart of the base point.
    """

    dt: float
    dx: np.ndarray

    def __post_init__(self):
        dx = np.array(self.dx, dtype=float).reshape(-1)
        if not (math.isfinite(self.dt) and np.all(np.isfinite(dx))):
            raise ValueError("Tangent vector components must be finite.")
        dx.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dt", float(self.dt))

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.dt], self.dx])

    def scaled(self, factor: float) -> "TangentVector":
        return TangentVector(self.dt * factor, self.dx * factor)

    @property
    def is_zero(self) -> bool:
        return self.dt == 0.0 and not np.any(self.dx)


class CausalClass(StrEnum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"


@dataclass(frozen=True)
class IntegrationSettings:
    """
    Numerical settings shared by every integration.

    Attributes:
        rtol (float): Relative tolerance of the RK45 pair.
        atol (float): Absolute tolerance of the RK45 pair.
        max_step (float): Largest affine step, which is also the largest gap
            between stored samples.
        null_tol (float): |h(v,v)| below which a vector counts as null.
        drift_per_length (float): Allowed norm drift per unit affine length.
        max_chart_switches (int): Guard against chart ping-pong.
    """

    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = 0.05
    null_tol: float = 1e-9
    drift_per_length: float = 1e-8
    max_chart_switches: int = 1000


DEFAULT_SETTINGS = IntegrationSettings()


@dataclass(frozen=True)
class LevelCrossing:
    """
    Level crossing specification for t = level events.

    Attributes:
        levels (tuple): Time levels to watch.
        direction (int): 0 for any crossing, -1 for decreasing t, +1 for increasing t.
        terminal (bool): Whether integration stops at the first crossing.
    """

    levels: tuple[float, ...] = ()
    direction: int = 0
    terminal: bool = True


@dataclass(frozen=True)
class Crossing:
    u: float
    level: float


def h_norm(
    family: MetricFamily, t: float, chart_id: int, y: np.ndarray, dt: float, dx: np.ndarray
) -> float:
    """h(v, v) = -dt² + g_t(dx, dx)."""
    return float(-dt * dt + dx @ family.metric(t, chart_id, y) @ dx)


def _classify(value: float, tol: float) -> CausalClass:
    if abs(value) <= tol:
        return CausalClass.NULL
    return CausalClass.SPACELIKE if value > 0 else CausalClass.TIMELIKE


@dataclass(eq=False)
class Trajectory:
    """
    A sampled geodesic (or curve) in ℝ × F.

    Attributes:
        u (np.ndarray): Strictly increasing affine parameter, shape (N,).
        t (np.ndarray): Time coordinate, shape (N,).
        chart (np.ndarray): Chart id per sample, shape (N,).
        x (np.ndarray): Fiber chart coordinates, shape (N, n).
        dt (np.ndarray): ṫ, shape (N,).
        dx (np.ndarray): ẋ in the chart of each sample, shape (N, n).
        h_norm (np.ndarray): h(γ̇, γ̇) per sample, shape (N,).
        causal (CausalClass): Causal class of the initial velocity.
        norm_drift (float): max |h(γ̇, γ̇) - h₀| along the samples.
        valid (bool): False when the drift exceeded the configured bound or
            the time coordinate of a timelike trajectory is not monotone.
        time_monotone (bool): ṫ keeps one strict sign (always True for
            spacelike and null trajectories).
        trajectory_id (int): Identifier used in batch reports.
        crossings (list): Level crossings met during integration.
    """

    u: np.ndarray
    t: np.ndarray
    chart: np.ndarray
    x: np.ndarray
    dt: np.ndarray
    dx: np.ndarray
    h_norm: np.ndarray
    causal: CausalClass
    norm_drift: float
    valid: bool = True
    time_monotone: bool = True
    trajectory_id: int = 0
    crossings: list[Crossing] = field(default_factory=list)

    @classmethod
    def from_arrays(
        cls,
        family: MetricFamily,
        u: np.ndarray,
        t: np.ndarray,
        chart: np.ndarray,
        x: np.ndarray,
        dt: np.ndarray,
        dx: np.ndarray,
        trajectory_id: int = 0,
        crossings: list[Crossing] | None = None,
        settings: IntegrationSettings = DEFAULT_SETTINGS,
    ) -> "Trajectory":
        u = np.asarray(u, dtype=float)
        if u.size > 1 and np.any(np.diff(u) <= 0):
            raise ValueError("Affine parameter must be strictly increasing.")
        x = np.asarray(x, dtype=float).reshape(u.size, -1)
        dx = np.asarray(dx, dtype=float).reshape(u.size, -1)
        chart = np.asarray(chart, dtype=int).reshape(u.size)
        t = np.asarray(t, dtype=float)
        dt = np.asarray(dt, dtype=float)
        norms = np.array(
            [h_norm(family, t[i], chart[i], x[i], dt[i], dx[i]) for i in range(u.size)]
        )
        drift = float(np.max(np.abs(norms - norms[0]))) if u.size else 0.0
        length = float(u[-1] - u[0]) if u.size else 0.0
        causal = _classify(norms[0], settings.null_tol)
        monotone = causal != CausalClass.TIMELIKE or bool(np.all(dt > 0) or np.all(dt < 0))
        valid = drift <= settings.drift_per_length * max(1.0, length) and monotone
        return cls(
            u=u,
            t=t,
            chart=chart,
            x=x,
            dt=dt,
            dx=dx,
            h_norm=norms,
            causal=causal,
            norm_drift=drift,
            valid=valid,
            time_monotone=monotone,
            trajectory_id=trajectory_id,
            crossings=list(crossings or []),
        )

    def __len__(self) -> int:
        return self.u.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def point(self, i: int) -> SpacetimePoint:
        return SpacetimePoint(float(self.t[i]), FiberPoint(self.chart[i], self.x[i]))

    def velocity(self, i: int) -> TangentVector:
        return TangentVector(self.dt[i], self.dx[i])

    def sample(self, i: int) -> tuple[float, SpacetimePoint, TangentVector]:
        return float(self.u[i]), self.point(i), self.velocity(i)

    @property
    def initial_norm(self) -> float:
        return float(self.h_norm[0])

    @property
    def affine_length(self) -> float:
        return float(self.u[-1] - self.u[0])

    @property
    def length(self) -> float:
        """Length ∫ sqrt(|h(γ̇, γ̇)|) du of the geodesic (constant speed)."""
        return math.sqrt(abs(self.initial_norm)) * self.affine_length

    def reversed(self) -> "Trajectory":
        """The same curve traversed backwards."""
        return replace(
            self,
            u=(self.u[-1] - self.u)[::-1].copy(),
            t=self.t[::-1].copy(),
            chart=self.chart[::-1].copy(),
            x=self.x[::-1].copy(),
            dt=-self.dt[::-1],
            dx=-self.dx[::-1],
            h_norm=self.h_norm[::-1].copy(),
            crossings=[Crossing(self.u[-1] - c.u, c.level) for c in self.crossings],
        )

    def shifted(self, offset: float) -> "Trajectory":
        return replace(
            self,
            u=self.u + offset,
            crossings=[Crossing(c.u + offset, c.level) for c in self.crossings],
        )

    def reparameterized(self, speed: float) -> "Trajectory":
        """Affine reparameterization with velocities scaled by ``speed``."""
        return replace(
            self,
            u=(self.u - self.u[0]) / speed,
            dt=self.dt * speed,
            dx=self.dx * speed,
            h_norm=self.h_norm * speed**2,
            norm_drift=self.norm_drift * speed**2,
            crossings=[Crossing((c.u - self.u[0]) / speed, c.level) for c in self.crossings],
        )

    @classmethod
    def concatenate(cls, parts: list["Trajectory"]) -> "Trajectory":
        """Join trajectories whose consecutive endpoints coincide."""
        pieces, crossings, offset = [], [], 0.0
        for k, part in enumerate(parts):
            part = part.shifted(offset - part.u[0])
            start = 0 if k == 0 else 1
            pieces.append((part, start))
            crossings.extend(part.crossings)
            offset = part.u[-1]

        def stack(name):
            return np.concatenate([getattr(p, name)[s:] for p, s in pieces])

        h = stack("h_norm")
        first = parts[0]
        return cls(
            u=stack("u"),
            t=stack("t"),
            chart=stack("chart"),
            x=stack("x"),
            dt=stack("dt"),
            dx=stack("dx"),
            h_norm=h,
            causal=first.causal,
            norm_drift=float(np.max(np.abs(h - h[0]))),
            valid=all(p.valid for p in parts),
            time_monotone=all(p.time_monotone for p in parts),
            trajectory_id=first.trajectory_id,
            crossings=crossings,
        )

    def to_dataframe(self) -> pd.DataFrame:
        """Samples as a DataFrame with columns u, t, chart_id, x1..xn, dt, dx1..dxn, h_norm."""
        n = self.dim
        data = {"u": self.u, "t": self.t, "chart_id": self.chart}
        data.update({f"x{i + 1}": self.x[:, i] for i in range(n)})
        data["dt"] = self.dt
        data.update({f"dx{i + 1}": self.dx[:, i] for i in range(n)})
        data["h_norm"] = self.h_norm
        return pd.DataFrame(data)


def _state_rhs(family: MetricFamily, chart_id: int, state: np.ndarray) -> np.ndarray:
    n = family.dim
    t, y = state[0], state[1 : n + 1]
    dt, dy = state[n + 1], state[n + 2 :]
    g = family.metric(t, chart_id, y)
    dg = family.metric_dt(t, chart_id, y)
    gamma = family.christoffels(t, chart_id, y)
    ddt = -0.5 * dy @ dg @ dy
    ddy = -np.einsum("kij,i,j->k", gamma, dy, dy) - dt * np.linalg.solve(g, dg @ dy)
    return np.concatenate([[dt], dy, [ddt], ddy])


def geodesic_rhs(
    family: MetricFamily, state: tuple[SpacetimePoint, TangentVector]
) -> tuple[TangentVector, TangentVector]:
    """
    Right hand side of the geodesic equation.

    Args:
        family (MetricFamily): The metric family.
        state (tuple): (point, velocity).

    Returns:
        tuple: (velocity, acceleration), the derivative of the state.
    """
    point, velocity = state
    family.fiber.validate(point.x)
    vector = np.concatenate([[point.t], point.x.coords, velocity.as_array()])
    derivative = _state_rhs(family, point.x.chart_id, vector)
    n = family.dim
    return (
        TangentVector(derivative[0], derivative[1 : n + 1]),
        TangentVector(derivative[n + 1], derivative[n + 2 :]),
    )


def causal_classify(
    family: MetricFamily, p: SpacetimePoint, v: TangentVector, tol: float = 1e-9
) -> CausalClass:
    """Causal class of v at p from the sign of -dt² + g_t(dx, dx)."""
    if v.is_zero:
        raise PreconditionError("The zero vector has no causal class.")
    family.fiber.validate(p.x)
    return _classify(h_norm(family, p.t, p.x.chart_id, p.x.coords, v.dt, v.dx), tol)


def _level_event(level: float, direction: int, terminal: bool):
    def event(u, state):
        return state[0] - level

    event.terminal = terminal
    event.direction = direction
    return event


def integrate_geodesic(
    family: MetricFamily,
    start: SpacetimePoint,
    v0: TangentVector,
    u_max: float,
    events: LevelCrossing | None = None,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    trajectory_id: int = 0,
) -> Trajectory:
    """
    Integrate the geodesic through ``start`` with initial velocity ``v0``.

    Args:
        family (MetricFamily): The metric family.
        start (SpacetimePoint): Initial point.
        v0 (TangentVector): Initial velocity, nonzero.
        u_max (float): Largest affine parameter.
        events (LevelCrossing | None): t-levels whose crossings are located.
        settings (IntegrationSettings): Tolerances and sampling.
        trajectory_id (int): Identifier carried by the result.

    Returns:
        Trajectory: Samples up to u_max or the first terminal crossing.

    Raises:
        PreconditionError: If v0 is zero.
        ChartDomainError: If the start point is outside its chart.
        IntegrationFailure: If the step size underflows.
    """
    if v0.is_zero:
        raise PreconditionError("Initial velocity must be nonzero.")
    if u_max <= 0:
        raise PreconditionError(f"u_max must be positive, got {u_max}.")
    fiber = family.fiber
    fiber.validate(start.x)
    chart = start.x.chart_id
    state = np.concatenate([[start.t], start.x.coords, v0.as_array()])
    n = family.dim

    level_events = [
        _level_event(level, events.direction, events.terminal)
        for level in (events.levels if events else ())
    ]
    us, states, charts, crossings = [], [], [], []
    u0, switches = 0.0, 0
    while True:
        current = chart
        event_fns = list(level_events)
        if fiber.switch_margin(current, state[1 : n + 1]) is not None:

            def switch(u, s, chart_id=current):
                return fiber.switch_margin(chart_id, s[1 : n + 1])

            switch.terminal = True
            switch.direction = -1
            event_fns.append(switch)

        sol = solve_ivp(
            lambda u, s: _state_rhs(family, current, s),
            (u0, u_max),
            state,
            method="RK45",
            rtol=settings.rtol,
            atol=settings.atol,
            max_step=settings.max_step,
            events=event_fns or None,
        )
        if sol.status == -1:
            raise IntegrationFailure(
                f"Geodesic integration failed at u={sol.t[-1]:.6g}, t={sol.y[0, -1]:.6g}: {sol.message}"
            )
        skip = 0 if not us else 1
        us.append(sol.t[skip:])
        states.append(sol.y[:, skip:].T)
        charts.append(np.full(sol.t.size - skip, current))
        for k in range(len(level_events)):
            for u_event in sol.t_events[k]:
                crossings.append(Crossing(float(u_event), events.levels[k]))
        if sol.status != 1:
            break
        switched = len(event_fns) > len(level_events) and sol.t_events[-1].size > 0
        level_hit = any(sol.t_events[k].size > 0 for k in range(len(level_events)))
        if level_hit and events.terminal:
            break
        if not switched:
            break
        switches += 1
        if switches > settings.max_chart_switches:
            raise IntegrationFailure(f"More than {settings.max_chart_switches} chart switches.")
        u0 = float(sol.t[-1])
        end = sol.y[:, -1]
        chart, y_new, v_new = fiber.transition(current, end[1 : n + 1], end[n + 2 :])
        state = np.concatenate([[end[0]], y_new, [end[n + 1]], v_new])
        logger.debug("Chart switch %d -> %d at u=%.6g", current, chart, u0)
        # the switch point is stored in the new chart
        us[-1] = us[-1][:-1]
        states[-1] = states[-1][:-1]
        charts[-1] = charts[-1][:-1]
        us.append(np.array([u0]))
        states.append(state[None, :])
        charts.append(np.array([chart]))
        if u0 >= u_max:
            break

    u = np.concatenate(us)
    y = np.vstack(states)
    chart_ids = np.concatenate(charts).astype(int)
    keep = np.concatenate([[True], np.diff(u) > 0])
    u, y, chart_ids = u[keep], y[keep], chart_ids[keep]
    x = np.array(
        [fiber.normalize(c, row[1 : n + 1]).coords for c, row in zip(chart_ids, y)]
    )
    trajectory = Trajectory.from_arrays(
        family,
        u=u,
        t=y[:, 0],
        chart=chart_ids,
        x=x,
        dt=y[:, n + 1],
        dx=y[:, n + 2 :],
        trajectory_id=trajectory_id,
        crossings=crossings,
        settings=settings,
    )
    if not trajectory.time_monotone:
        warnings.warn(f"Trajectory {trajectory_id}: ṫ changes sign along a timelike geodesic.")
    elif not trajectory.valid:
        warnings.warn(
            f"Trajectory {trajectory_id}: norm drift {trajectory.norm_drift:.3e} over affine length "
            f"{trajectory.affine_length:.3g} exceeds {settings.drift_per_length:.1e} per unit length."
        )
    return trajectory


def maximal_slab_extension(
    family: MetricFamily,
    seed: Trajectory,
    T: float,
    certificate: HypothesisCertificate,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    endpoint_tol: float = 1e-8,
) -> Trajectory:
    """
    Extend a spacelike geodesic in both directions until both ends lie on F_T.

    Args:
        family (MetricFamily): The metric family.
        seed (Trajectory): Spacelike geodesic inside t ≥ T (or t ≤ -T).
        T (float): Slice level, above the certificate's t0.
        certificate (HypothesisCertificate): Active growth certificate.
        settings (IntegrationSettings): Integration settings.
        endpoint_tol (float): Accepted |t_end - T| for an end already on F_T.

    Returns:
        Trajectory: The extension, parameterized from u = 0.

    Raises:
        PreconditionError: If the seed is not spacelike or leaves the region.
        NumericalAnomaly: If an end does not reach F_T within twice the proven
            length bound, or the extension is longer than π/c.
    """
    if seed.causal != CausalClass.SPACELIKE:
        raise PreconditionError(f"Seed must be spacelike, got {seed.causal}.")
    if T <= certificate.t0:
        raise PreconditionError(f"T={T} must exceed the certificate threshold t0={certificate.t0}.")
    side = 1.0 if seed.t[0] > 0 else -1.0
    if np.min(side * seed.t) < T - endpoint_tol:
        raise PreconditionError(f"Seed leaves the region |t| >= {T}.")
    level = side * T
    crossing = LevelCrossing(levels=(level,), direction=-int(side), terminal=True)
    speed = math.sqrt(seed.initial_norm)
    budget = 2.0 * certificate.length_bound / speed

    def extend(index: int, sign: float) -> Trajectory | None:
        if abs(seed.t[index] - level) <= endpoint_tol:
            return None
        velocity = seed.velocity(index).scaled(sign)
        piece = integrate_geodesic(
            family, seed.point(index), velocity, budget, crossing, settings, seed.trajectory_id
        )
        if not piece.crossings:
            raise NumericalAnomaly(
                f"Trajectory {seed.trajectory_id} did not reach t={level} within affine budget {budget:.6g}."
            )
        return piece

    forward = extend(len(seed) - 1, 1.0)
    backward = extend(0, -1.0)
    parts = ([backward.reversed()] if backward is not None else []) + [seed]
    if forward is not None:
        parts.append(forward)
    extended = Trajectory.concatenate(parts)
    extended = extended.shifted(-extended.u[0])
    if extended.length >= certificate.length_bound:
        raise NumericalAnomaly(
            f"Extended geodesic {seed.trajectory_id} has length {extended.length:.6g} "
            f">= {certificate.length_bound:.6g}."
        )
    return extended


@dataclass(frozen=True)
class ProjectedCurve:
    """
    Projection π_T(γ) of a trajectory to the slice F_T.

    Attributes:
        points (pd.DataFrame): Columns u, chart_id, x1..xn, speed.
        length (float): Length under g_T (composite Simpson quadrature).
        error_estimate (float): |Simpson - trapezoid|.
        T (float): The slice level.
    """

    points: pd.DataFrame
    length: float
    error_estimate: float
    T: float


def project_and_measure(
    family: MetricFamily,
    traj: Trajectory,
    T: float,
    max_gap: float | None = None,
) -> ProjectedCurve:
    """
    Project a trajectory to F_T and measure ∫ sqrt(g_T(γ̇_F, γ̇_F)) du.

    Args:
        family (MetricFamily): The metric family.
        traj (Trajectory): The curve to project.
        T (float): Slice level.
        max_gap (float | None): Largest allowed gap between samples; a warning
            is emitted when exceeded.

    Returns:
        ProjectedCurve: The projected samples and their length.
    """
    if max_gap is not None and len(traj) > 1 and np.max(np.diff(traj.u)) > max_gap:
        warnings.warn(
            f"Trajectory {traj.trajectory_id} has sample gaps above {max_gap}; projected length is coarse."
        )
    speed = np.array(
        [
            math.sqrt(max(traj.dx[i] @ family.metric(T, traj.chart[i], traj.x[i]) @ traj.dx[i], 0.0))
            for i in range(len(traj))
        ]
    )
    if len(traj) < 2:
        length, error = 0.0, 0.0
    else:
        length = float(simpson(speed, x=traj.u))
        error = abs(length - float(trapezoid(speed, x=traj.u)))
    frame = pd.DataFrame({"u": traj.u, "chart_id": traj.chart})
    for i in range(traj.dim):
        frame[f"x{i + 1}"] = traj.x[:, i]
    frame["speed"] = speed
    return ProjectedCurve(points=frame, length=length, error_estimate=error, T=T)
