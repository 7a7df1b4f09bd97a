"""
Covering Module

Covers of a slice F_T by small net balls whose points are pairwise joined by
spacelike geodesics staying inside the slab T - ε < t < T + ε. The number of
balls is the count n(T, ε) used by the slab-intersection argument.

Classes:
    CoverBall: One ball of the cover.
    SlabCover: The cover of a net by balls.
    CoverVerification: Outcome of the shooting checks.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.sparse.csgraph import dijkstra

from lorentz_lab.geometry.fibers import FiberPoint
from lorentz_lab.geometry.geodesic_engine import (
    DEFAULT_SETTINGS,
    CausalClass,
    IntegrationSettings,
    SpacetimePoint,
    TangentVector,
    Trajectory,
    causal_classify,
    integrate_geodesic,
)
from lorentz_lab.geometry.metric_family import HypothesisCertificate, MetricFamily
from lorentz_lab.utils.errors import (
    IntegrationFailure,
    NumericalAnomaly,
    PreconditionError,
)
from lorentz_lab.verification.metric_space import NetGraph

logger = logging.getLogger(__name__)

SHOOTING_TOL = 1e-8
EXCURSION_SLACK = 1e-6


@dataclass(frozen=True)
class CoverBall:
    center_id: int
    center: FiberPoint
    radius: float
    members: np.ndarray

    def to_dict(self) -> dict:
        return {
            "center_id": self.center_id,
            "center": self.center.to_dict(),
            "radius": self.radius,
            "member_ids": [int(m) for m in self.members],
        }


@dataclass(eq=False)
class SlabCover:
    """
    Cover of F_T by net balls of g_T radius ``radius``.

    Attributes:
        T (float): Slice level.
        epsilon (float): Slab half width.
        radius (float): Ball radius in graph distance.
        balls (list): The balls in construction order.
        net (NetGraph): The net the balls are made of.
        pilot (CoverVerification | None): Pilot check that fixed the radius.
    """

    T: float
    epsilon: float
    radius: float
    balls: list[CoverBall]
    net: NetGraph = field(repr=False)
    pilot: "CoverVerification | None" = None

    @property
    def count(self) -> int:
        return len(self.balls)

    def is_cover(self) -> bool:
        covered = np.zeros(len(self.net), dtype=bool)
        for ball in self.balls:
            covered[ball.members] = True
        return bool(covered.all())

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "epsilon": self.epsilon,
            "radius": self.radius,
            "count": self.count,
            "balls": [ball.to_dict() for ball in self.balls],
        }


def greedy_ball_cover(net: NetGraph, radius: float) -> list[CoverBall]:
    """Balls of graph radius ``radius`` centered at uncovered nodes in net order."""
    covered = np.zeros(len(net), dtype=bool)
    balls = []
    for node in range(len(net)):
        if covered[node]:
            continue
        distance = dijkstra(net.weights, indices=node, limit=radius)
        members = np.flatnonzero(distance <= radius)
        covered[members] = True
        balls.append(CoverBall(node, net.nodes[node], radius, members))
    return balls


@dataclass(frozen=True)
class ShootingResult:
    """
    Connecting geodesic between two points of F_T.

    Attributes:
        converged (bool): Endpoint mismatch below tolerance.
        residual (float): Final endpoint mismatch.
        excursion (float): max |t - T| along the geodesic.
        apex_margin (float): min t - (T - ε) along the geodesic.
        causal (CausalClass | None): Causal class of the connecting geodesic.
        trajectory (Trajectory | None): The geodesic, u ∈ [0, 1].
    """

    converged: bool
    residual: float
    excursion: float
    apex_margin: float
    causal: CausalClass | None
    trajectory: Trajectory | None = None


def shoot_geodesic(
    family: MetricFamily,
    T: float,
    epsilon: float,
    p: FiberPoint,
    q: FiberPoint,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
    restarts: tuple[float, ...] = (1.0, 0.0, 2.0),
) -> ShootingResult:
    """
    Solve the two-point problem (T, p) → (T, q) over u ∈ [0, 1] by shooting.

    The unknowns are the initial velocity (ṫ, ẋ); the residual is the endpoint
    mismatch in the chart of p. The initial guess is the chart line ẋ = Δy with
    ṫ = ¼·∂_t g(Δy, Δy), which lands on t = T for a constant ẗ; restarts scale
    that ṫ by the given factors.
    """
    fiber = family.fiber
    chart = p.chart_id
    target = fiber.express_in_chart(q, chart)
    delta = fiber.chart_difference(chart, p.coords, target)
    if not np.any(delta):
        return ShootingResult(True, 0.0, 0.0, epsilon, None)
    start = SpacetimePoint(T, p)
    dt_guess = 0.25 * float(delta @ family.metric_dt(T, chart, p.coords) @ delta)

    def endpoint(velocity: np.ndarray) -> Trajectory:
        return integrate_geodesic(
            family, start, TangentVector(velocity[0], velocity[1:]), 1.0, settings=settings
        )

    def residual(velocity: np.ndarray) -> np.ndarray:
        try:
            traj = endpoint(velocity)
        except IntegrationFailure:
            return np.full(velocity.size, 1e6)
        end = traj.point(len(traj) - 1)
        coords = fiber.express_in_chart(end.x, chart)
        return np.concatenate([[end.t - T], fiber.chart_difference(chart, target, coords)])

    best = None
    for factor in restarts:
        guess = np.concatenate([[factor * dt_guess], delta])
        solution = least_squares(residual, guess, xtol=1e-14, ftol=1e-14, gtol=1e-14)
        mismatch = float(np.max(np.abs(solution.fun)))
        if best is None or mismatch < best[0]:
            best = (mismatch, solution.x)
        if mismatch <= SHOOTING_TOL:
            break
    mismatch, velocity = best
    if mismatch > SHOOTING_TOL:
        return ShootingResult(False, mismatch, math.nan, math.nan, None)
    traj = endpoint(velocity)
    causal = causal_classify(family, start, TangentVector(velocity[0], velocity[1:]), settings.null_tol)
    return ShootingResult(
        converged=True,
        residual=mismatch,
        excursion=float(np.max(np.abs(traj.t - T))),
        apex_margin=float(np.min(traj.t) - (T - epsilon)),
        causal=causal,
        trajectory=traj,
    )


@dataclass
class CoverVerification:
    """
    Shooting checks on sampled pairs of cover balls.

    Attributes:
        passed (bool): Every sampled pair joined by a spacelike geodesic inside the slab.
        pairs_checked (int): Number of sampled pairs.
        max_excursion (float): Largest max |t - T| over the connecting geodesics.
        min_apex_margin (float): Smallest t - (T - ε) over the connecting geodesics.
        flagged_balls (list): Balls with a failing pair.
        failures (list): {"ball", "p", "q", "reason"} per failing pair.
    """

    passed: bool
    pairs_checked: int
    max_excursion: float
    min_apex_margin: float
    flagged_balls: list[int] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "pairs_checked": self.pairs_checked,
            "max_excursion": self.max_excursion,
            "min_apex_margin": self.min_apex_margin,
            "flagged_balls": list(self.flagged_balls),
            "failures": list(self.failures),
        }


def _sample_pairs(cover: SlabCover, pair_budget: int, seed: int) -> list[tuple[int, int, int]]:
    rng = np.random.default_rng(seed)
    per_ball = max(1, pair_budget // max(cover.count, 1))
    pairs = []
    for k, ball in enumerate(cover.balls):
        members = ball.members
        if members.size == 1:
            pairs.append((k, int(members[0]), int(members[0])))
            continue
        distance = dijkstra(cover.net.weights, indices=ball.center_id)
        farthest = int(members[np.argmax(distance[members])])
        pairs.append((k, ball.center_id, farthest))
        for _ in range(per_ball - 1):
            a, b = rng.choice(members, size=2, replace=False)
            pairs.append((k, int(a), int(b)))
        if len(pairs) >= pair_budget:
            break
    return pairs


def verify_cover(
    family: MetricFamily,
    cover: SlabCover,
    pair_budget: int = 64,
    seed: int = 0,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
) -> CoverVerification:
    """
    Check sampled pairs of each ball: a spacelike geodesic joins them with
    T - ε < t < T + ε along it (1e-6 slack).
    """
    failures, flagged = [], set()
    max_excursion, min_apex = 0.0, math.inf
    pairs = _sample_pairs(cover, pair_budget, seed)
    for k, a, b in pairs:
        p, q = cover.net.nodes[a], cover.net.nodes[b]
        result = shoot_geodesic(family, cover.T, cover.epsilon, p, q, settings)
        reason = None
        if not result.converged:
            reason = f"shooting did not converge (mismatch {result.residual:.3e})"
        elif result.causal is not None and result.causal != CausalClass.SPACELIKE:
            reason = f"connecting geodesic is {result.causal}"
        elif result.excursion >= cover.epsilon - EXCURSION_SLACK:
            reason = f"excursion {result.excursion:.6g} leaves the slab"
        elif result.apex_margin <= EXCURSION_SLACK:
            reason = "connecting geodesic drops below T - epsilon"
        if result.converged:
            max_excursion = max(max_excursion, result.excursion)
            min_apex = min(min_apex, result.apex_margin)
        if reason is not None:
            failures.append({"ball": k, "p": a, "q": b, "reason": reason})
            flagged.add(k)
    return CoverVerification(
        passed=not failures,
        pairs_checked=len(pairs),
        max_excursion=max_excursion,
        min_apex_margin=min_apex if pairs else math.nan,
        flagged_balls=sorted(flagged),
        failures=failures,
    )


def build_slab_cover(
    family: MetricFamily,
    net: NetGraph,
    T: float,
    epsilon: float,
    certificate: HypothesisCertificate | None,
    pilot_pairs: int = 8,
    min_radius: float = 1e-3,
    seed: int = 0,
    settings: IntegrationSettings = DEFAULT_SETTINGS,
) -> SlabCover:
    """
    Greedy ball cover of ``net`` whose radius starts at ε/2 and halves until a
    pilot ``verify_cover`` passes.

    Raises:
        PreconditionError: Without a certificate, or when T - ε ≤ t0.
        NumericalAnomaly: If the radius drops below ``min_radius``.
    """
    if certificate is None:
        raise PreconditionError("A slab cover needs an active growth certificate.")
    if not T - epsilon > certificate.t0:
        raise PreconditionError(f"Need T - epsilon > t0, got T={T}, epsilon={epsilon}, t0={certificate.t0}.")
    radius = epsilon / 2.0
    while radius >= min_radius:
        cover = SlabCover(T=T, epsilon=epsilon, radius=radius, balls=greedy_ball_cover(net, radius), net=net)
        pilot = verify_cover(family, cover, pilot_pairs, seed, settings)
        if pilot.passed:
            cover.pilot = pilot
            logger.info("Slab cover at T=%s: %d balls of radius %.4g", T, cover.count, radius)
            return cover
        logger.debug("Radius %.4g failed the pilot check: %s", radius, pilot.failures[:1])
        radius /= 2.0
    raise NumericalAnomaly(
        f"No cover radius above {min_radius} passed the pilot check at T={T}, epsilon={epsilon}."
    )
