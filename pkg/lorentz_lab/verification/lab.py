"""
Lab Module

Synchronous facade over the geometry engine and the verification modules. A
``VerificationLab`` owns one metric family and one run configuration, caches
the expensive shared objects (growth certificate, ε-nets, confined batches) in
LRU caches and runs the named verification suites.

Classes:
    VerificationLab: Runs suites for one configuration.

Functions:
    run_suite: Run one suite for a configuration.
    emit_report: Write a suite report to disk.
"""

import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from operator import attrgetter

import numpy as np
import pandas as pd
from cachetools import LRUCache, cachedmethod

from lorentz_lab.geometry.curvature_jacobi import (
    check_jacobi_metric_identity,
    curvature_samples_frame,
    curvature_scan,
    estimate_alpha,
    hessian_concavity_check,
    integrate_jacobi,
    jacobi_residual,
    normal_chart_gauss_check,
)
from lorentz_lab.geometry.de_sitter import (
    boost,
    oracle_deviation,
    require_de_sitter,
    rotation,
    sample_lorentz_elements,
)
from lorentz_lab.geometry.fibers import SphereFiber
from lorentz_lab.geometry.geodesic_engine import (
    SpacetimePoint,
    TangentVector,
    Trajectory,
    integrate_geodesic,
)
from lorentz_lab.geometry.metric_family import (
    HypothesisCertificate,
    HypothesisCounterexample,
    MetricFamily,
    WarpedProduct,
    check_exponential_growth,
    check_hypothesis_H,
)
from lorentz_lab.utils.config import RunConfig, build_family, resolve_growth_rate
from lorentz_lab.utils.errors import ConfigurationError, PreconditionError, UsageError
from lorentz_lab.utils.utils import lab_has_suite, snake_to_kebab, suite_method_name
from lorentz_lab.verification.comparison_bounds import (
    BoundReport,
    ConfinedBatch,
    check_endpoint_distance,
    check_length_bound,
    check_projection_bound,
    generate_confined_batch,
)
from lorentz_lab.verification.covering import build_slab_cover, verify_cover
from lorentz_lab.verification.isometry_harness import (
    IsometryAction,
    SlabSpec,
    divergence_proposition_check,
    main_theorem_experiment,
    orbit_return_experiment,
)
from lorentz_lab.verification.metric_space import (
    NetDistance,
    NetGraph,
    build_net,
    check_cover_subadditivity,
    check_net_refinement,
    diameter_growth_curve,
    interval_cover_instance,
    random_cover_instance,
    ring_cover_instance,
)
from lorentz_lab.verification.report_processor import (
    ReportFormat,
    ReportProcessor,
    SuiteReport,
)
from lorentz_lab.verification.suite_mappings import (
    all_suites,
    certified_suites,
    de_sitter_suites,
    suite_order,
)

logger = logging.getLogger(__name__)


def merge_batches(batches: list[ConfinedBatch]) -> ConfinedBatch:
    """Join chunk batches, shifting ids so they stay unique and ordered."""
    full, halves, frames, offset = [], [], [], 0
    for batch in batches:
        for traj in batch.full:
            traj.trajectory_id += offset
        for traj in batch.halves:
            traj.trajectory_id += 2 * offset
        frame = batch.apexes.copy()
        frame["id"] += offset
        full.extend(batch.full)
        halves.extend(batch.halves)
        frames.append(frame)
        offset += len(batch.full)
    return ConfinedBatch(
        full=full,
        halves=halves,
        apexes=pd.concat(frames, ignore_index=True),
        level=batches[0].level,
    )


def chunk_seeds(seed: int, stream: int, chunks: int) -> list[int]:
    """Independent chunk seeds that depend only on (seed, stream, chunk index)."""
    children = np.random.SeedSequence([seed, stream]).spawn(chunks)
    return [int(child.generate_state(1)[0]) for child in children]


def chunk_sizes(count: int, chunk_size: int) -> list[int]:
    full, rest = divmod(count, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def exact_slice_diameter(family: MetricFamily, T: float) -> float | None:
    """dia(F_T) of warped products over round spheres and flat tori, None otherwise."""
    if not isinstance(family, WarpedProduct):
        return None
    scale = family.warp.value(T)
    if isinstance(family.fiber, SphereFiber):
        return math.pi * scale
    return math.pi * math.sqrt(family.dim) * scale


def bound_frame(report: BoundReport) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "bound_name": report.bound_name,
                "bound_value": report.bound_value,
                "observed_max": report.observed_max,
                "margin": report.margin,
                "passed": report.passed,
                "sample_count": report.sample_count,
                "worst_case_id": report.worst_case_id,
                "rejected_count": len(report.rejected),
            }
        ]
    )


def worst_trajectory(trajectories: list[Trajectory], trajectory_id: int | None) -> pd.DataFrame:
    for traj in trajectories:
        if traj.trajectory_id == trajectory_id:
            return traj.to_dataframe()
    return pd.DataFrame()


@dataclass(eq=False)
class VerificationLab:
    """
    Runs verification suites for one configuration.

    Attributes:
        config (RunConfig): The run configuration.
        family (MetricFamily | None): The metric family; built from
            ``config.family`` when missing.
        processor (ReportProcessor): Writes reports.
    """

    config: RunConfig = field(default_factory=RunConfig)
    family: MetricFamily | None = None
    processor: ReportProcessor = field(default_factory=ReportProcessor)
    _nets: LRUCache = field(init=False, repr=False)
    _batches: LRUCache = field(init=False, repr=False)
    _hypothesis: LRUCache = field(init=False, repr=False)
    _lock: threading.RLock = field(init=False, repr=False)

    def __post_init__(self):
        if self.family is None:
            self.family = build_family(self.config.family, self.config.tolerances)
        self.settings = self.config.tolerances.integration_settings()
        self.digest = self.config.digest()
        self._nets = LRUCache(maxsize=self.config.net.cache_size)
        self._batches = LRUCache(maxsize=4)
        self._hypothesis = LRUCache(maxsize=1)
        self._lock = threading.RLock()

    @cachedmethod(attrgetter("_hypothesis"), lock=attrgetter("_lock"))
    def hypothesis_result(self) -> tuple[float, HypothesisCertificate | HypothesisCounterexample | None]:
        """
        The growth rate in use and the hypothesis check at that rate.

        Returns:
            tuple: (c, result); result is None when c is not positive.
        """
        cfg = self.config.certificate
        c = resolve_growth_rate(cfg, self.family, self.config.seed)
        if not c > 0:
            logger.info("No positive growth rate for %s (estimate %.6g)", self.family.describe(), c)
            return c, None
        result = check_hypothesis_H(
            self.family, cfg.t0, c, cfg.sample_budget, cfg.horizon, cfg.tol, self.config.seed
        )
        return c, result

    def certificate_or_none(self) -> HypothesisCertificate | None:
        _, result = self.hypothesis_result()
        return result if isinstance(result, HypothesisCertificate) else None

    def certificate(self) -> HypothesisCertificate:
        """
        Raises:
            PreconditionError: If the growth hypothesis is not certified.
        """
        certificate = self.certificate_or_none()
        if certificate is None:
            c, _ = self.hypothesis_result()
            raise PreconditionError(
                f"The growth hypothesis is not certified for {self.family.describe()} "
                f"at t0={self.config.certificate.t0}, c={c:.6g}."
            )
        return certificate

    @cachedmethod(attrgetter("_nets"), lock=attrgetter("_lock"))
    def net(self, T: float, epsilon: float) -> NetGraph:
        return build_net(self.family, T, epsilon)

    @cachedmethod(attrgetter("_batches"), lock=attrgetter("_lock"))
    def confined_batch(self, level: float, count: int, stream: int = 0) -> ConfinedBatch:
        """
        Confined spacelike geodesics ending on |t| = level, generated in chunks on
        ``config.jobs`` worker threads. The result does not depend on the number
        of workers.
        """
        cfg = self.config.batch
        certificate = self.certificate()
        sizes = chunk_sizes(count, cfg.chunk_size)
        seeds = chunk_seeds(self.config.seed, stream, len(sizes))
        task = partial(
            generate_confined_batch,
            self.family,
            certificate,
            apex_offsets=(cfg.apex_low, cfg.apex_high),
            level=level,
            both_sides=cfg.both_sides,
            settings=self.settings,
        )
        if self.config.jobs > 1 and len(sizes) > 1:
            with ThreadPoolExecutor(max_workers=self.config.jobs) as pool:
                batches = list(pool.map(lambda args: task(args[0], seed=args[1]), zip(sizes, seeds)))
        else:
            batches = [task(size, seed=seed) for size, seed in zip(sizes, seeds)]
        return merge_batches(batches)

    def isometries(self) -> list[IsometryAction]:
        """
        Sampled Lorentz transformations (de Sitter families) followed by the
        declared fiber isometries and, on request, the time reflection.

        Raises:
            ConfigurationError: If no isometry is available.
        """
        cfg = self.config.isometries
        fiber = self.family.fiber
        actions = []
        if self.family.is_de_sitter:
            elements = sample_lorentz_elements(
                fiber.dim + 2, cfg.count, self.config.seed, cfg.max_generators, cfg.max_rapidity
            )
            actions.extend(
                IsometryAction.lorentz(matrix, label=f"lorentz-{k}") for k, matrix in enumerate(elements)
            )
        for shift in cfg.fiber_shifts:
            actions.append(IsometryAction.fiber_translation(np.asarray(shift, dtype=float), f"shift{list(shift)}"))
        for angle in cfg.rotation_angles:
            matrix = rotation(fiber.dim + 2, 1, 2, angle)[1:, 1:]
            actions.append(IsometryAction.fiber_rotation(matrix, f"rotation({angle})"))
        if cfg.include_time_reflection:
            actions.append(IsometryAction.time_reflection())
        if not actions:
            raise ConfigurationError(
                f"No isometries to test for {self.family.describe()}; declare fiber_shifts or rotation_angles."
            )
        return actions

    def drift_summary(self, trajectories: list[Trajectory]) -> dict:
        """Norm drift per unit affine length over a batch."""
        rates = [traj.norm_drift / max(1.0, traj.affine_length) for traj in trajectories]
        worst = max(rates, default=0.0)
        return {
            "max_drift_per_length": worst,
            "limit": self.config.tolerances.drift_per_length,
            "invalid_count": sum(not traj.valid for traj in trajectories),
            "passed": worst <= self.config.tolerances.drift_per_length,
        }

    def _report(self, suite: str, passed: bool, sub_reports: dict, tables=None, documents=None) -> SuiteReport:
        return SuiteReport(
            suite=suite,
            passed=bool(passed),
            seed=self.config.seed,
            config_digest=self.digest,
            family=self.family.describe(),
            sub_reports=sub_reports,
            tables=tables or {},
            documents=documents or {},
        )

    def suite_hypothesis(self) -> SuiteReport:
        cfg = self.config.certificate
        c, result = self.hypothesis_result()
        sub = {"t0": cfg.t0, "c": c, "c_source": "auto" if cfg.c == "auto" else "config", "expect": cfg.expect}
        consistent = True
        if isinstance(result, HypothesisCertificate):
            sub["verdict"] = "certified"
            sub["certificate"] = result.to_dict()
            growth = check_exponential_growth(self.family, result, cfg.sample_budget, seed=self.config.seed)
            sub["exponential_growth"] = growth.to_dict()
            consistent = growth.passed
        else:
            sub["verdict"] = "rejected"
            sub["counterexample"] = result.to_dict() if result is not None else None
        return self._report("hypothesis", sub["verdict"] == cfg.expect and consistent, sub)

    def suite_affine_length(self) -> SuiteReport:
        certificate = self.certificate()
        batch = self.confined_batch(certificate.t0, self.config.batch.count, 0)
        bound = check_length_bound(self.family, certificate, batch.full)
        drift = self.drift_summary(batch.full)
        concavity = hessian_concavity_check(self.family, batch.halves)
        sub = {"bound": bound.to_dict(), "norm_conservation": drift, "concavity": concavity.to_dict()}
        tables = {
            "worst_trajectory": worst_trajectory(batch.full, bound.worst_case_id),
            "bound": bound_frame(bound),
        }
        return self._report("affine-length", bound.passed and drift["passed"] and concavity.passed, sub, tables)

    def suite_projected_length(self) -> SuiteReport:
        certificate = self.certificate()
        batch = self.confined_batch(certificate.t0, self.config.batch.count, 0)
        bound = check_projection_bound(self.family, certificate, batch.halves)
        tables = {
            "worst_trajectory": worst_trajectory(batch.halves, bound.worst_case_id),
            "bound": bound_frame(bound),
        }
        return self._report("projected-length", bound.passed, {"bound": bound.to_dict()}, tables)

    def suite_endpoint_distance(self) -> SuiteReport:
        certificate = self.certificate()
        T = self.config.net.endpoint_T
        batch = self.confined_batch(T, self.config.budgets.endpoint_samples, 1)
        net = self.net(T, self.config.net.endpoint_epsilon)
        distance = NetDistance(net, self.family)
        bound = check_endpoint_distance(self.family, certificate, T, batch.full, distance, distance.tolerance)
        sub = {"bound": bound.to_dict(), "net": {"T": T, "epsilon": net.epsilon, "nodes": len(net)}}
        tables = {
            "worst_trajectory": worst_trajectory(batch.full, bound.worst_case_id),
            "bound": bound_frame(bound),
        }
        return self._report("endpoint-distance", bound.passed, sub, tables)

    def suite_cover_diameter(self) -> SuiteReport:
        cfg = self.config.covers
        rng = np.random.default_rng(self.config.seed)
        instances = [
            random_cover_instance(rng, cfg.max_nodes, cfg.max_parts, name=f"random-{i}")
            for i in range(cfg.count)
        ]
        if cfg.include_hand_built:
            instances += [interval_cover_instance(), ring_cover_instance()]
        rows = []
        for instance in instances:
            result = check_cover_subadditivity(instance).to_dict()
            result.pop("part_diameters")
            rows.append({**result, "parts": len(instance.parts), "nodes": instance.distances.shape[0]})
        frame = pd.DataFrame(rows)
        tightest = frame.loc[frame["margin"].idxmin()] if len(frame) else None
        sub = {
            "instances": len(frame),
            "passed_count": int(frame["passed"].sum()) if len(frame) else 0,
            "min_margin": float(tightest["margin"]) if tightest is not None else None,
            "tightest": tightest["name"] if tightest is not None else None,
        }
        return self._report("cover-diameter", bool(frame["passed"].all()) if len(frame) else True, sub, {"covers": frame})

    def suite_growth(self) -> SuiteReport:
        cfg = self.config.net
        certificate = self.certificate_or_none()
        frame = diameter_growth_curve(
            self.family, certificate, cfg.T_values, cfg.epsilon, self.config.tolerances.growth_tol
        )
        expected = [exact_slice_diameter(self.family, T) for T in frame["T"]]
        fidelity_ok = True
        sub = {}
        if all(value is not None for value in expected):
            frame["expected"] = expected
            frame["relative_error"] = (frame["upper"] - frame["expected"]).abs() / frame["expected"]
            worst = float(frame["relative_error"].max())
            fidelity_ok = worst <= cfg.fidelity_tol
            sub["fidelity"] = {"max_relative_error": worst, "limit": cfg.fidelity_tol, "passed": fidelity_ok}
        growth_ok = bool(frame["growth_ok"].fillna(True).all()) if certificate is not None else True
        refinement = check_net_refinement(self.family, min(cfg.T_values), cfg.epsilon, cfg.refinement_tol)
        sub.update(
            {
                "certified": certificate is not None,
                "growth_passed": growth_ok,
                "refinement": refinement,
                "curve": frame[["T", "lower", "upper"]].to_dict("records"),
            }
        )
        passed = growth_ok and fidelity_ok and refinement["passed"]
        return self._report("growth", passed, sub, {"diameter_curve": frame})

    def suite_jacobi(self) -> SuiteReport:
        if not self.family.is_time_symmetric:
            raise PreconditionError("Jacobi fields start on F0 with vanishing derivative; F0 must be totally geodesic.")
        budgets, tolerances = self.config.budgets, self.config.tolerances
        samples = curvature_scan(
            self.family, budgets.curvature_planes, seed=self.config.seed, step=tolerances.fd_step
        )
        curvatures = np.array([s.K for s in samples])
        alpha = estimate_alpha(samples)
        curvature = {"count": len(samples), "min_K": float(curvatures.min()), "max_K": float(curvatures.max()), "alpha": alpha}
        curvature_ok = True
        if self.family.is_de_sitter:
            deviation = float(np.max(np.abs(curvatures - 1.0)))
            curvature_ok = deviation <= tolerances.curvature_tol
            curvature.update({"max_deviation_from_one": deviation, "passed": curvature_ok})
        rng = np.random.default_rng(self.config.seed)
        rows = []
        for i, x in enumerate(self.family.fiber.sample_points(budgets.jacobi_directions, seed=self.config.seed)):
            jacobi = integrate_jacobi(self.family, x, rng.normal(size=self.family.dim), (0.0, budgets.jacobi_u_max), self.settings)
            check = check_jacobi_metric_identity(self.family, jacobi, alpha, tolerances.jacobi_rtol)
            rows.append({"id": i, **check.to_dict(), "system_residual": jacobi_residual(self.family, jacobi)})
        checks = pd.DataFrame(rows)
        sub = {
            "curvature": curvature,
            "jacobi": {
                "fields": len(checks),
                "passed_count": int(checks["passed"].sum()),
                "max_relative_residual": float(checks["max_relative_residual"].max()),
                "min_tanh_margin": float(checks["min_tanh_margin"].min()),
            },
        }
        tables = {"curvature_samples": curvature_samples_frame(samples), "jacobi_checks": checks}
        return self._report("jacobi", curvature_ok and bool(checks["passed"].all()), sub, tables)

    def suite_gauss(self) -> SuiteReport:
        budgets = self.config.budgets
        points = self.family.fiber.sample_points(budgets.gauss_points, seed=self.config.seed)
        report = normal_chart_gauss_check(
            self.family, points, budgets.gauss_u_max, self.settings, cross_tol=self.config.tolerances.cross_tol
        )
        return self._report("gauss", report.passed, report.to_dict())

    def oracle_velocity(self, point: SpacetimePoint, k: int, rng: np.random.Generator) -> TangentVector:
        """Unit initial velocity of causal class k % 3: spacelike, timelike, null."""
        g = self.family.metric(point.t, point.x.chart_id, point.x.coords)
        a = rng.normal(size=self.family.dim)
        a /= math.sqrt(a @ g @ a)
        if k % 3 == 0:
            dt = float(rng.uniform(-1.0, 1.0))
            return TangentVector(dt, a * math.sqrt(1.0 + dt * dt))
        if k % 3 == 1:
            s = float(rng.uniform(0.0, 1.0))
            return TangentVector(math.copysign(math.sqrt(1.0 + s * s), rng.uniform(-1.0, 1.0)), s * a)
        return TangentVector(math.copysign(1.0, rng.uniform(-1.0, 1.0)), a)

    def suite_oracle(self) -> SuiteReport:
        require_de_sitter(self.family)
        budgets, tolerances = self.config.budgets, self.config.tolerances
        rng = np.random.default_rng(self.config.seed)
        rows = []
        for k, x in enumerate(self.family.fiber.sample_points(budgets.oracle_samples, seed=self.config.seed)):
            start = SpacetimePoint(float(rng.uniform(-2.0, 2.0)), x)
            traj = integrate_geodesic(
                self.family, start, self.oracle_velocity(start, k, rng), budgets.oracle_length,
                settings=self.settings, trajectory_id=k,
            )
            rows.append(
                {
                    "id": k,
                    "causal": str(traj.causal),
                    "affine_length": traj.affine_length,
                    "deviation": oracle_deviation(self.family, traj),
                    "norm_drift": traj.norm_drift,
                    "valid": traj.valid,
                }
            )
        frame = pd.DataFrame(rows)
        worst = float(frame["deviation"].max())
        drift = float((frame["norm_drift"] / frame["affine_length"].clip(lower=1.0)).max())
        sub = {
            "samples": len(frame),
            "by_class": frame["causal"].value_counts().sort_index().to_dict(),
            "max_deviation": worst,
            "deviation_limit": tolerances.oracle_tol,
            "max_drift_per_length": drift,
            "drift_limit": tolerances.drift_per_length,
        }
        passed = worst <= tolerances.oracle_tol and drift <= tolerances.drift_per_length
        return self._report("oracle", passed, sub, {"oracle": frame})

    def suite_slab_cover(self) -> SuiteReport:
        certificate = self.certificate()
        cfg = self.config.cover
        net = self.net(cfg.T1, cfg.net_epsilon)
        cover = build_slab_cover(
            self.family, net, cfg.T1, cfg.epsilon, certificate, cfg.pilot_pairs, cfg.min_radius,
            seed=self.config.seed, settings=self.settings,
        )
        verification = verify_cover(self.family, cover, cfg.pair_budget, self.config.seed + 1, self.settings)
        flagged = set(verification.flagged_balls)
        balls = pd.DataFrame(
            [
                {"center_id": ball.center_id, "radius": ball.radius, "members": int(ball.members.size), "flagged": k in flagged}
                for k, ball in enumerate(cover.balls)
            ]
        )
        sub = {
            "cover": {"T": cover.T, "epsilon": cover.epsilon, "radius": cover.radius, "count": cover.count, "is_cover": cover.is_cover()},
            "pilot": cover.pilot.to_dict() if cover.pilot else None,
            "verification": verification.to_dict(),
        }
        tables = {"cover_balls": balls, "net_nodes": net.node_frame()}
        return self._report("slab-cover", verification.passed and cover.is_cover(), sub, tables)

    def suite_slab_intersection(self) -> SuiteReport:
        certificate = self.certificate()
        cfg, iso = self.config.cover, self.config.isometries
        report = main_theorem_experiment(
            self.family, certificate, cfg.T1, cfg.epsilon, self.isometries(),
            net_epsilon=cfg.net_epsilon,
            relative_net_epsilon=cfg.relative_net_epsilon,
            T_step=cfg.T_step,
            T_budget=cfg.T_budget,
            pair_budget=cfg.pilot_pairs,
            min_radius=cfg.min_radius,
            grid=iso.grid,
            refinements=iso.refinements,
            seed=self.config.seed,
        )
        tested = len(report.isometries)
        sub = {
            "n_cover": report.n_cover,
            "T2": report.T2,
            "dia_T2": report.dia_T2,
            "threshold": report.threshold,
            "tested": tested,
            "intersecting": sum(entry["intersects"] for entry in report.isometries),
            "filtered": len(report.filtered),
        }
        documents = {"experiment": report.to_dict()}
        tables = {"diameter_march": pd.DataFrame(report.diameters)}
        return self._report("slab-intersection", report.passed and tested > 0, sub, tables, documents)

    def suite_divergence(self) -> SuiteReport:
        fiber = require_de_sitter(self.family)
        cfg = self.config.divergence
        action = IsometryAction.lorentz(
            boost(fiber.dim + 2, cfg.axis, cfg.rapidity), label=f"boost(axis={cfg.axis}, rapidity={cfg.rapidity})"
        )
        report = divergence_proposition_check(
            self.family, action, cfg.T, cfg.resolution, cfg.integral_atol, cfg.integral_rtol
        )
        return self._report("divergence", report.passed, {"action": action.to_dict(), **report.to_dict()})

    def suite_orbit_returns(self) -> SuiteReport:
        iso = self.config.isometries
        actions = [action for action in self.isometries() if action.preserves_orientation]
        if not actions:
            raise ConfigurationError("The orbit experiment needs an orientation preserving isometry.")
        action = actions[0]
        slab = SlabSpec(self.config.cover.T1)
        frame = orbit_return_experiment(action, slab, self.family, iso.orbit_powers, iso.grid, iso.refinements)
        sub = {
            "action": action.to_dict(),
            "slab_T": slab.T2,
            "powers": len(frame),
            "returns": int(frame["intersects"].sum()),
        }
        return self._report("orbit-returns", bool(frame["intersects"].all()), sub, {"orbit_returns": frame})

    def run_suite(self, suite: str) -> SuiteReport:
        """
        Run one suite.

        Raises:
            UsageError: If the suite is unknown.
        """
        name = snake_to_kebab(suite)
        if name not in all_suites or not lab_has_suite(self, name):
            raise UsageError(f"Unknown suite {suite!r}; expected one of {', '.join(suite_order)}.")
        logger.info("Suite %s started (seed %d, digest %s)", name, self.config.seed, self.digest[:12])
        start = time.perf_counter()
        report = getattr(self, suite_method_name(name))()
        report.wall_time_ms = (time.perf_counter() - start) * 1e3
        logger.info("Suite %s %s in %.0f ms", name, "passed" if report.passed else "FAILED", report.wall_time_ms)
        return report

    def applicable_suites(self) -> list[str]:
        """Suites whose preconditions the family meets, in run order."""
        skipped = set()
        if not self.family.is_de_sitter:
            skipped |= de_sitter_suites
        if not self.family.is_time_symmetric:
            skipped.add("jacobi")
        if self.certificate_or_none() is None:
            skipped |= certified_suites
        try:
            self.isometries()
        except ConfigurationError:
            skipped |= {"slab-intersection", "orbit-returns"}
        if skipped:
            logger.info("Skipping suites %s for %s", sorted(skipped), self.family.describe())
        return [suite for suite in suite_order if suite not in skipped]

    def run_suites(self, suites: list[str] | None = None) -> list[SuiteReport]:
        """Run suites in order; the configured list, or every applicable suite, by default."""
        return [self.run_suite(suite) for suite in (suites or self.config.suites or self.applicable_suites())]

    def emit(self, report: SuiteReport, format: ReportFormat = "json") -> list:
        return self.processor.emit(report, self.config.resolved_out_dir(), format)


def run_suite(config: RunConfig, suite: str) -> SuiteReport:
    """Run one suite for a configuration."""
    return VerificationLab(config).run_suite(suite)


def emit_report(report: SuiteReport, out_dir, format: ReportFormat = "json") -> list:
    """
    Write ``report.json`` (or ``report.csv``) and the side files of a report
    under ``out_dir/<suite>``.

    Raises:
        ReportWriteError: If the output directory cannot be written.
    """
    return ReportProcessor().emit(report, out_dir, format)
