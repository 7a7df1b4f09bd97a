"""
Comparison Bounds Module

Riccati comparison envelope and the three quantitative bounds on spacelike
geodesics confined to a slab |t| ≥ t0 of a family satisfying the growth
hypothesis with rate c:

- ``affine-length``: every such geodesic has length < π/c.
- ``projected-length``: an apex-started geodesic (ṫ(0) = 0) projects to the
  slice through its endpoint with length ≤ C′ = π/c + 1/c.
- ``endpoint-distance``: the endpoints of such a geodesic, projected to F_T,
  are at d_T-distance ≤ 2C′.

Classes:
    BoundReport: Aggregated outcome of one bound over a batch.
    ConfinedBatch: Apex-started confined spacelike geodesics.
"""

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
import pandas as pd
from scipy.integrate import simpson

from lorentz_lab.geometry.fibers import FiberPoint
from lorentz_lab.geometry.geodesic_engine import (
    DEFAULT_SETTINGS,
    CausalClass,
    IntegrationSettings,
    LevelCrossing,
    SpacetimePoint,
    TangentVector,
    Trajectory,
    integrate_geodesic,
    project_and_measure,
)
from lorentz_lab.geometry.metric_family import HypothesisCertificate, MetricFamily
from lorentz_lab.utils.errors import NumericalAnomaly, PreconditionError

logger = logging.getLogger(__name__)

BoundName = Literal["affine-length", "projected-length", "endpoint-distance"]

CONFINEMENT_TOL = 1e-8
APEX_TOL = 1e-8
ENVELOPE_TOL = 1e-8


def arccot(value: float) -> float:
    """Branch of arccot with values in (0, π)."""
    return math.pi / 2.0 - math.atan(value)


def riccati_envelope(c: float, u0: float, u: float) -> float:
    """
    G(u + u0) = cot(c(u + u0)), the solution of G′ = -c(1 + G²).

    Raises:
        PreconditionError: If c ≤ 0 or u + u0 ∉ (0, π/c).
    """
    if c <= 0:
        raise PreconditionError(f"Envelope rate must be positive, got {c}.")
    argument = u + u0
    if not 0.0 < argument < math.pi / c:
        raise PreconditionError(f"Envelope argument {argument} outside (0, {math.pi / c}).")
    return math.cos(c * argument) / math.sin(c * argument)


def envelope_offset(c: float, initial_rate: float) -> float:
    """u0 ∈ (0, π/c) with G(u0) = initial_rate."""
    return arccot(initial_rate) / c


@dataclass
class BoundReport:
    """
    Outcome of one bound check over a batch of trajectories.

    Attributes:
        bound_name (str): "affine-length", "projected-length" or "endpoint-distance".
        bound_value (float): The proven bound.
        observed_max (float): Largest observed quantity (0 for an empty batch).
        margin (float): bound_value - observed_max.
        sample_count (int): Number of accepted trajectories.
        worst_case_id (int | None): Trajectory attaining observed_max, lowest id on ties.
        runtime_ms (float): Wall time of the check.
        rejected (list): {"id", "reason"} for inputs outside the preconditions.
        extras (dict): Additional assertions recorded by the check.
    """

    bound_name: BoundName
    bound_value: float
    observed_max: float
    sample_count: int
    worst_case_id: int | None = None
    runtime_ms: float = 0.0
    rejected: list[dict] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.bound_value - self.observed_max

    @property
    def passed(self) -> bool:
        return self.margin > 0

    def to_dict(self) -> dict:
        return {
            "bound_name": self.bound_name,
            "bound_value": self.bound_value,
            "observed_max": self.observed_max,
            "margin": self.margin,
            "passed": self.passed,
            "sample_count": self.sample_count,
            "worst_case_id": self.worst_case_id,
            "runtime_ms": self.runtime_ms,
            "rejected": list(self.rejected),
            "extras": dict(self.extras),
        }


def _side(traj: Trajectory) -> float:
    return 1.0 if traj.t[0] > 0 else -1.0


def is_confined(traj: Trajectory, level: float, tol: float = CONFINEMENT_TOL) -> bool:
    """Whether every sample lies in t ≥ level or every sample in t ≤ -level."""
    side = _side(traj)
    return bool(np.all(side * traj.t >= level - tol))


def _reject(rejected: list, traj: Trajectory, reason: str):
    rejected.append({"id": traj.trajectory_id, "reason": reason})


def _warn_rejections(name: str, rejected: list):
    if rejected:
        warnings.warn(f"{name}: rejected {len(rejected)} trajectories outside the preconditions.")


def _unit_speed(traj: Trajectory) -> Trajectory:
    speed = math.sqrt(traj.initial_norm)
    return traj.reparameterized(speed)


def _envelope_margins(
    family: MetricFamily, traj: Trajectory, c: float
) -> tuple[float, float, float]:
    """Minimum margins of the rate envelope, the height envelope and the slab concavity."""
    unit = _unit_speed(traj)
    side = _side(unit)
    rates = side * unit.dt
    u0 = envelope_offset(c, rates[0])
    rate_margin, height_margin, concavity_margin = math.inf, math.inf, math.inf
    for i, u in enumerate(unit.u):
        argument = u + u0
        if argument >= math.pi / c:
            return -math.inf, -math.inf, concavity_margin
        envelope = math.cos(c * argument) / math.sin(c * argument)
        rate_margin = min(rate_margin, envelope - rates[i])
        height = side * unit.t[0] + math.log(math.sin(c * argument) / math.sin(c * u0)) / c
        height_margin = min(height_margin, height - side * unit.t[i])
        dg = family.metric_dt(unit.t[i], unit.chart[i], unit.x[i])
        acceleration = side * (-0.5 * unit.dx[i] @ dg @ unit.dx[i])
        concavity_margin = min(concavity_margin, -c * (1.0 + rates[i] ** 2) - acceleration)
    return rate_margin, height_margin, concavity_margin


def check_length_bound(
    family: MetricFamily,
    certificate: HypothesisCertificate,
    trajectories: list[Trajectory],
) -> BoundReport:
    """
    Check length < π/c for spacelike geodesics confined to |t| ≥ t0.

    Besides the length, each trajectory is checked against the rate envelope
    ṫ(u) ≤ cot(c(u + u0)), the integrated height envelope and the slab
    concavity ẗ ≤ -c(1 + ṫ²) (unit speed, mirrored for t < 0).

    Returns:
        BoundReport: ``affine-length`` report; envelope results are in ``extras``.

    Raises:
        NumericalAnomaly: If a trajectory satisfies the envelope but violates the
            length bound.
    """
    start = time.perf_counter()
    bound = certificate.length_bound
    observed, worst_id, count, rejected = 0.0, None, 0, []
    envelope_violations, rate_min, height_min, concavity_min = 0, math.inf, math.inf, math.inf
    for traj in sorted(trajectories, key=lambda tr: tr.trajectory_id):
        if traj.causal != CausalClass.SPACELIKE:
            _reject(rejected, traj, f"not spacelike ({traj.causal})")
            continue
        if not is_confined(traj, certificate.t0):
            _reject(rejected, traj, "not confined to |t| >= t0")
            continue
        count += 1
        length = traj.length
        if length > observed:
            observed, worst_id = length, traj.trajectory_id
        rate_margin, height_margin, concavity_margin = _envelope_margins(family, traj, certificate.c)
        rate_min = min(rate_min, rate_margin)
        height_min = min(height_min, height_margin)
        concavity_min = min(concavity_min, concavity_margin)
        envelope_ok = rate_margin >= -ENVELOPE_TOL
        if not envelope_ok:
            envelope_violations += 1
        if envelope_ok and length >= bound:
            raise NumericalAnomaly(
                f"Trajectory {traj.trajectory_id} satisfies the envelope but has length {length} >= {bound}."
            )
    _warn_rejections("affine-length", rejected)
    report = BoundReport(
        bound_name="affine-length",
        bound_value=bound,
        observed_max=observed,
        sample_count=count,
        worst_case_id=worst_id,
        rejected=rejected,
        extras={
            "envelope_violations": envelope_violations,
            "envelope_min_margin": rate_min if count else None,
            "height_min_margin": height_min if count else None,
            "concavity_min_margin": concavity_min if count else None,
        },
    )
    report.runtime_ms = (time.perf_counter() - start) * 1e3
    logger.info("affine-length: observed max %.6g vs bound %.6g over %d", observed, bound, count)
    return report


def projection_decomposition(
    traj: Trajectory, c: float
) -> tuple[float, float]:
    """
    The two terms ∫e^{-c(t(u) - t_L)} du and ∫e^{-c(t(u) - t_L)}|ṫ(u)| du
    (unit speed, mirrored for t < 0) that dominate the projected length.
    """
    unit = _unit_speed(traj)
    side = _side(unit)
    damping = np.exp(-c * side * (unit.t - unit.t[-1]))
    if len(unit) < 2:
        return 0.0, 0.0
    first = float(simpson(damping, x=unit.u))
    second = float(simpson(damping * np.abs(unit.dt), x=unit.u))
    return first, second


def check_projection_bound(
    family: MetricFamily,
    certificate: HypothesisCertificate,
    trajectories: list[Trajectory],
) -> BoundReport:
    """
    Check L(π_{t(L)}(γ)) ≤ C′ for apex-started confined spacelike geodesics.

    The decomposition terms are checked against L and 1/c and their sum against
    the projected length; violations are counted in ``extras``.
    """
    start = time.perf_counter()
    c = certificate.c
    observed, worst_id, count, rejected = 0.0, None, 0, []
    first_violations = second_violations = sum_violations = 0
    first_ratio, second_ratio = 0.0, 0.0
    for traj in sorted(trajectories, key=lambda tr: tr.trajectory_id):
        if traj.causal != CausalClass.SPACELIKE:
            _reject(rejected, traj, f"not spacelike ({traj.causal})")
            continue
        if abs(traj.dt[0]) > APEX_TOL * math.sqrt(traj.initial_norm):
            _reject(rejected, traj, "does not start at its apex")
            continue
        if not is_confined(traj, certificate.t0):
            _reject(rejected, traj, "not confined to |t| >= t0")
            continue
        count += 1
        projected = project_and_measure(family, traj, float(traj.t[-1])).length
        if projected > observed:
            observed, worst_id = projected, traj.trajectory_id
        first, second = projection_decomposition(traj, c)
        length = traj.length
        first_violations += first > length + ENVELOPE_TOL
        second_violations += second > 1.0 / c + ENVELOPE_TOL
        sum_violations += projected > first + second + ENVELOPE_TOL
        first_ratio = max(first_ratio, first / length if length else 0.0)
        second_ratio = max(second_ratio, second * c)
    _warn_rejections("projected-length", rejected)
    report = BoundReport(
        bound_name="projected-length",
        bound_value=certificate.projection_bound,
        observed_max=observed,
        sample_count=count,
        worst_case_id=worst_id,
        rejected=rejected,
        extras={
            "first_term_violations": int(first_violations),
            "second_term_violations": int(second_violations),
            "decomposition_violations": int(sum_violations),
            "max_first_term_ratio": first_ratio,
            "max_second_term_ratio": second_ratio,
        },
    )
    report.runtime_ms = (time.perf_counter() - start) * 1e3
    return report


def check_endpoint_distance(
    family: MetricFamily,
    certificate: HypothesisCertificate,
    T: float,
    trajectories: list[Trajectory],
    distance_fn: Callable[[FiberPoint, FiberPoint], float],
    net_error: float = 0.0,
) -> BoundReport:
    """
    Check d_T(π_T(y), π_T(z)) ≤ 2C′ + net_error for the endpoints y, z of
    spacelike geodesics confined beyond ±T.

    Args:
        family (MetricFamily): The metric family.
        certificate (HypothesisCertificate): Active certificate, t0 < T.
        T (float): Slice level.
        trajectories (list): The geodesics.
        distance_fn (Callable): Intrinsic distance on F_T.
        net_error (float): Tolerance of ``distance_fn``.

    Returns:
        BoundReport: ``endpoint-distance`` report with bound 2C′ + net_error.
    """
    if not T > certificate.t0:
        raise PreconditionError(f"T={T} must exceed t0={certificate.t0}.")
    start = time.perf_counter()
    observed, worst_id, count, rejected = 0.0, None, 0, []
    for traj in sorted(trajectories, key=lambda tr: tr.trajectory_id):
        if traj.causal != CausalClass.SPACELIKE:
            _reject(rejected, traj, f"not spacelike ({traj.causal})")
            continue
        if not is_confined(traj, T):
            _reject(rejected, traj, "not confined beyond T")
            continue
        count += 1
        distance = float(distance_fn(traj.point(0).x, traj.point(len(traj) - 1).x))
        if distance > observed:
            observed, worst_id = distance, traj.trajectory_id
    _warn_rejections("endpoint-distance", rejected)
    report = BoundReport(
        bound_name="endpoint-distance",
        bound_value=2.0 * certificate.projection_bound + net_error,
        observed_max=observed,
        sample_count=count,
        worst_case_id=worst_id,
        rejected=rejected,
        extras={"constant": 2.0 * certificate.projection_bound, "net_error": net_error, "T": T},
    )
    report.runtime_ms = (time.perf_counter() - start) * 1e3
    return report


@dataclass
class ConfinedBatch:
    """
    Batch of spacelike geodesics started at an apex and run down to a level.

    Attributes:
        full (list): Both halves joined; ids 0..count-1.
        halves (list): Apex-started halves; ids 2k and 2k+1 for apex k.
        apexes (pd.DataFrame): Apex time, chart and coordinates per id.
        level (float): The level |t| the geodesics end on.
    """

    full: list[Trajectory]
    halves: list[Trajectory]
    apexes: pd.DataFrame
    level: float


def _run_to_level(
    family: MetricFamily,
    apex: SpacetimePoint,
    velocity: TangentVector,
    level: float,
    budget: float,
    settings: IntegrationSettings,
    trajectory_id: int,
) -> Trajectory:
    side = 1.0 if apex.t > 0 else -1.0
    crossing = LevelCrossing(levels=(side * level,), direction=-int(side), terminal=True)
    traj = integrate_geodesic(family, apex, velocity, budget, crossing, settings, trajectory_id)
    if not traj.crossings:
        raise NumericalAnomaly(
            f"Apex geodesic {trajectory_id} did not reach |t| = {level} within {budget:.6g}."
        )
    return traj


def generate_confined_batch(
    family: MetricFamily,
    certificate: HypothesisCertificate,
    count: int,
    seed: int = 0,
    apex_offsets: tuple[float, float] = (0.1, 3.0),
    level: float | None = None,
    both_sides: bool = False,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
) -> ConfinedBatch:
    """
    Sample apex points with t ∈ [level + a, level + b] and unit fiber directions,
    and integrate both ways until |t| = level.

    Args:
        family (MetricFamily): The metric family.
        certificate (HypothesisCertificate): Supplies t0 and the length budget.
        count (int): Number of apexes.
        seed (int): Seed of the apex and direction sample.
        apex_offsets (tuple): Apex heights above the level.
        level (float | None): End level; defaults to t0.
        both_sides (bool): Mirror a random half of the apexes to t < 0.
        settings (IntegrationSettings): Integration settings.

    Returns:
        ConfinedBatch: The joined geodesics and their apex-started halves.
    """
    level = certificate.t0 if level is None else level
    rng = np.random.default_rng(seed)
    points = family.fiber.sample_points(count, seed=seed)
    budget = 2.0 * certificate.length_bound
    full, halves, rows = [], [], []
    for k, x in enumerate(points):
        side = -1.0 if both_sides and rng.random() < 0.5 else 1.0
        t = side * (level + rng.uniform(*apex_offsets))
        direction = rng.normal(size=family.dim)
        g = family.metric(t, x.chart_id, x.coords)
        direction /= math.sqrt(direction @ g @ direction)
        apex = SpacetimePoint(t, x)
        forward = _run_to_level(
            family, apex, TangentVector(0.0, direction), level, budget, settings, 2 * k
        )
        backward = _run_to_level(
            family, apex, TangentVector(0.0, -direction), level, budget, settings, 2 * k + 1
        )
        joined = Trajectory.concatenate([backward.reversed(), forward])
        joined.trajectory_id = k
        full.append(joined)
        halves.extend([forward, backward])
        rows.append({"id": k, "t": t, "chart_id": x.chart_id, **{f"x{i + 1}": v for i, v in enumerate(x.coords)}})
    logger.info("Generated %d confined geodesics ending on |t| = %s", count, level)
    return ConfinedBatch(full=full, halves=halves, apexes=pd.DataFrame(rows), level=level)
