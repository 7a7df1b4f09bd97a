"""
Config Module

Run configuration read from TOML. Every section is a dataclass with documented
defaults; unknown keys are rejected at any level and values are range checked
before any computation starts.

Classes:
    FamilyConfig: The metric family under test.
    CertificateConfig: Growth hypothesis parameters (t0, c).
    Tolerances: Numerical tolerances.
    Budgets: Sample counts of the smaller suites.
    BatchConfig: Confined geodesic batches.
    NetConfig: ε-nets and diameter curves.
    CoverConfig: Slab covers and the slab-intersection experiment.
    IsometryConfig: Sampled and declared isometries.
    DivergenceConfig: Divergence check.
    CoversConfig: Random cover instances.
    RunConfig: The whole run.
"""

import hashlib
import os
import tomllib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Literal

import numpy as np
import orjson

from lorentz_lab.geometry.fibers import make_fiber
from lorentz_lab.geometry.geodesic_engine import IntegrationSettings
from lorentz_lab.geometry.metric_family import (
    BumpPerturbedWarp,
    Envelope,
    FiberBump,
    MetricFamily,
    TorusMatrix,
    WarpedProduct,
    WarpFunction,
    estimate_growth_rate,
)
from lorentz_lab.utils.errors import ConfigurationError
from lorentz_lab.verification.suite_mappings import accepted_suite_names

OUT_DIR_ENV = "LORENTZ_LAB_OUT"
DEFAULT_OUT_DIR = "lorentz-lab-out"


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigurationError(message)


def _from_table(cls, table: Any, section: str):
    """Build a config dataclass from a TOML table, rejecting unknown keys."""
    if not isinstance(table, dict):
        raise ConfigurationError(f"[{section}] must be a table, got {type(table).__name__}.")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(table) - known)
    if unknown:
        raise ConfigurationError(f"Unknown key(s) in [{section}]: {', '.join(unknown)}.")
    try:
        return cls(**table)
    except TypeError as error:
        raise ConfigurationError(f"[{section}]: {error}") from error


@dataclass
class FamilyConfig:
    """
    Metric family specification.

    Attributes:
        kind (str): "warped-product", "torus-matrix" or "bump-perturbed-warp".
        fiber (str): "sphere" or "torus".
        dim (int): Fiber dimension.
        chart_system (str | None): Sphere chart system, see ``SphereFiber``.
        warp (str): Warp function name.
        rate (float): Warp rate λ.
        shift (float): Offset of the "sinh-shifted" warp.
        warps (list): Per-axis warps {name, rate, shift} of a diagonal torus family.
        matrix (list | None): Constant matrix of a torus family.
        epsilon (float): Bump amplitude.
        bump_width (float): Bump width σ.
        envelope (str): Bump time envelope.
        envelope_center (float): Envelope center.
        envelope_width (float): Envelope width.
    """

    kind: Literal["warped-product", "torus-matrix", "bump-perturbed-warp"] = "warped-product"
    fiber: Literal["sphere", "torus"] = "sphere"
    dim: int = 1
    chart_system: str | None = None
    warp: str = "cosh"
    rate: float = 1.0
    shift: float = 1.0
    warps: list[dict] = field(default_factory=list)
    matrix: list[list[float]] | None = None
    epsilon: float = 0.1
    bump_width: float = 0.5
    envelope: str = "sech"
    envelope_center: float = 0.0
    envelope_width: float = 1.0

    def __post_init__(self):
        _require(
            self.kind in ("warped-product", "torus-matrix", "bump-perturbed-warp"),
            f"Unknown family kind {self.kind!r}.",
        )
        _require(self.fiber in ("sphere", "torus"), f"Unknown fiber {self.fiber!r}.")
        _require(1 <= self.dim <= 3, f"Fiber dimension must be 1 to 3, got {self.dim}.")
        _require(
            self.kind != "torus-matrix" or self.fiber == "torus",
            "torus-matrix families need a torus fiber.",
        )
        _require(self.rate > 0, f"Warp rate must be positive, got {self.rate}.")
        _require(self.bump_width > 0 and self.envelope_width > 0, "Widths must be positive.")
        for warp in self.warps:
            _require(
                isinstance(warp, dict) and set(warp) <= {"name", "rate", "shift"},
                f"Torus warps take name, rate and shift; got {warp!r}.",
            )


@dataclass
class CertificateConfig:
    """
    Growth hypothesis parameters.

    Attributes:
        t0 (float): Slab threshold.
        c (float | str): Growth rate, or "auto" for the largest rate the grid
            check accepts.
        sample_budget (int): Grid evaluations of the hypothesis check.
        horizon (float): Checked |t| range above t0.
        tol (float): Allowed relative violation.
        expect (str): "certified" or "rejected"; the hypothesis suite passes when
            the verdict matches.
    """

    t0: float = 1.0
    c: float | Literal["auto"] = "auto"
    sample_budget: int = 4096
    horizon: float = 10.0
    tol: float = 1e-12
    expect: Literal["certified", "rejected"] = "certified"

    def __post_init__(self):
        _require(self.t0 > 0, f"t0 must be positive, got {self.t0}.")
        _require(
            self.c == "auto" or (isinstance(self.c, (int, float)) and self.c > 0),
            f"c must be positive or 'auto', got {self.c!r}.",
        )
        _require(self.sample_budget > 0 and self.horizon > 0, "Budget and horizon must be positive.")
        _require(self.expect in ("certified", "rejected"), f"Unknown expectation {self.expect!r}.")


@dataclass
class Tolerances:
    """Numerical tolerances; every field is positive."""

    rtol: float = 1e-10
    atol: float = 1e-10
    null_tol: float = 1e-9
    dt_step: float = 1e-5
    fd_step: float = 1e-4
    drift_per_length: float = 1e-8
    endpoint_tol: float = 1e-8
    max_gap: float = 0.05
    oracle_tol: float = 1e-6
    curvature_tol: float = 1e-6
    jacobi_rtol: float = 1e-6
    cross_tol: float = 1e-6
    growth_tol: float = 1e-3

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            _require(value > 0, f"Tolerance {f.name} must be positive, got {value}.")

    def integration_settings(self) -> IntegrationSettings:
        return IntegrationSettings(
            rtol=self.rtol,
            atol=self.atol,
            max_step=self.max_gap,
            null_tol=self.null_tol,
            drift_per_length=self.drift_per_length,
        )


@dataclass
class Budgets:
    """Sample counts and lengths of the oracle, curvature, Jacobi and Gauss suites."""

    oracle_samples: int = 200
    oracle_length: float = 10.0
    curvature_planes: int = 100
    jacobi_directions: int = 10
    jacobi_u_max: float = 5.0
    gauss_points: int = 50
    gauss_u_max: float = 2.0
    endpoint_samples: int = 500

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            _require(value > 0, f"Budget {f.name} must be positive, got {value}.")


@dataclass
class BatchConfig:
    """
    Confined geodesic batches.

    Attributes:
        count (int): Number of apex geodesics.
        apex_low (float): Smallest apex height above the level.
        apex_high (float): Largest apex height above the level.
        both_sides (bool): Also sample apexes with t < 0.
        chunk_size (int): Geodesics per worker task.
    """

    count: int = 1000
    apex_low: float = 0.1
    apex_high: float = 3.0
    both_sides: bool = False
    chunk_size: int = 50

    def __post_init__(self):
        _require(self.count > 0 and self.chunk_size > 0, "Batch sizes must be positive.")
        _require(0 < self.apex_low < self.apex_high, "Need 0 < apex_low < apex_high.")


@dataclass
class NetConfig:
    """
    ε-nets.

    Attributes:
        epsilon (float): Net fineness of the growth curve.
        T_values (list): Slice levels of the growth curve.
        endpoint_T (float): Slice level of the endpoint-distance suite.
        endpoint_epsilon (float): Net fineness of the endpoint-distance suite.
        refinement_tol (float): Accepted relative diameter change when ε halves.
        fidelity_tol (float): Accepted relative error against closed form diameters.
        cache_size (int): Nets kept by the lab.
    """

    epsilon: float = 0.02
    T_values: list[float] = field(default_factory=lambda: [1.0, 2.0, 3.0])
    endpoint_T: float = 1.5
    endpoint_epsilon: float = 0.02
    refinement_tol: float = 0.05
    fidelity_tol: float = 0.02
    cache_size: int = 8

    def __post_init__(self):
        _require(self.epsilon > 0 and self.endpoint_epsilon > 0, "Net fineness must be positive.")
        _require(len(self.T_values) > 0, "T_values must not be empty.")
        _require(self.cache_size > 0, "cache_size must be positive.")


@dataclass
class CoverConfig:
    """
    Slab covers and the slab-intersection experiment.

    Attributes:
        T1 (float): Cover level.
        epsilon (float): Slab half width.
        net_epsilon (float): Net fineness at T1.
        relative_net_epsilon (float): Net fineness of the T marching, relative
            to the slice's largest metric scale.
        T_step (float): Marching step.
        T_budget (float): Largest marched distance above T1.
        pilot_pairs (int): Pairs of the pilot check fixing the ball radius.
        pair_budget (int): Pairs checked by the slab-cover suite.
        min_radius (float): Smallest ball radius tried before the cover is
            declared a numerical anomaly.
    """

    T1: float = 1.5
    epsilon: float = 0.3
    net_epsilon: float = 0.05
    relative_net_epsilon: float = 0.02
    T_step: float = 0.5
    T_budget: float = 30.0
    pilot_pairs: int = 8
    pair_budget: int = 64
    min_radius: float = 1e-3

    def __post_init__(self):
        _require(self.epsilon > 0 and self.net_epsilon > 0, "Cover epsilons must be positive.")
        _require(self.T_step > 0 and self.T_budget > 0, "Marching step and budget must be positive.")
        _require(self.min_radius > 0, f"min_radius must be positive, got {self.min_radius}.")


@dataclass
class IsometryConfig:
    """
    Isometries tested by the slab-intersection and orbit suites.

    Attributes:
        count (int): Sampled Lorentz transformations (de Sitter families).
        max_generators (int): Generators per sampled transformation.
        max_rapidity (float): Largest boost rapidity per generator.
        grid (int): Witness search points per dimension.
        refinements (int): Witness search refinement levels.
        include_time_reflection (bool): Add t ↦ -t (filtered as orientation reversing).
        fiber_shifts (list): Declared coordinate translations of periodic fibers.
        rotation_angles (list): Declared sphere rotations in the (ω₁, ω₂) plane.
        orbit_powers (int): Powers of the orbit-returns suite.
    """

    count: int = 100
    max_generators: int = 3
    max_rapidity: float = 5.0
    grid: int = 64
    refinements: int = 3
    include_time_reflection: bool = False
    fiber_shifts: list[list[float]] = field(default_factory=list)
    rotation_angles: list[float] = field(default_factory=list)
    orbit_powers: int = 8

    def __post_init__(self):
        _require(self.count >= 0, "count must not be negative.")
        _require(self.max_generators >= 1 and self.max_rapidity >= 0, "Bad Lorentz sampling range.")
        _require(self.grid >= 2 and self.refinements >= 0 and self.orbit_powers >= 1, "Bad search sizes.")


@dataclass
class DivergenceConfig:
    """
    Divergence check of a boosted slice.

    Attributes:
        rapidity (float): Boost rapidity.
        axis (int): Boost axis in the hyperboloid embedding.
        T (float): Level beyond which the trace must be negative.
        resolution (int): Sample count on F₀.
        integral_atol (float): Absolute tolerance of the vanishing integral.
        integral_rtol (float | None): Relative tolerance; dimension default when missing.
    """

    rapidity: float = 6.0
    axis: int = 1
    T: float = 2.0
    resolution: int = 10_000
    integral_atol: float = 1e-4
    integral_rtol: float | None = None

    def __post_init__(self):
        _require(self.axis >= 1, "Boost axis must be a spatial axis (>= 1).")
        _require(self.resolution >= 16, "resolution must be at least 16.")


@dataclass
class CoversConfig:
    """
    Random cover instances of the cover-diameter suite.

    Attributes:
        count (int): Number of random instances.
        max_nodes (int): Largest graph size.
        max_parts (int): Largest number of parts.
        include_hand_built (bool): Also run the interval and ring instances.
    """

    count: int = 1000
    max_nodes: int = 200
    max_parts: int = 6
    include_hand_built: bool = True

    def __post_init__(self):
        _require(self.count >= 0, "count must not be negative.")
        _require(self.max_nodes >= 10 and self.max_parts >= 2, "Need max_nodes >= 10 and max_parts >= 2.")


SECTIONS = {
    "family": FamilyConfig,
    "certificate": CertificateConfig,
    "tolerances": Tolerances,
    "budgets": Budgets,
    "batch": BatchConfig,
    "net": NetConfig,
    "cover": CoverConfig,
    "isometries": IsometryConfig,
    "divergence": DivergenceConfig,
    "covers": CoversConfig,
}


@dataclass
class RunConfig:
    """
    A complete run configuration.

    Attributes:
        seed (int): Seed of every random choice of the run.
        jobs (int): Worker threads for batch work.
        out_dir (str | None): Report directory; ``LORENTZ_LAB_OUT`` or
            ``lorentz-lab-out`` when missing.
        suites (list): Suites run by ``verify all``.
        source (str | None): File the configuration was read from.
    """

    seed: int = 0
    jobs: int = 1
    out_dir: str | None = None
    suites: list[str] = field(default_factory=list)
    family: FamilyConfig = field(default_factory=FamilyConfig)
    certificate: CertificateConfig = field(default_factory=CertificateConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    budgets: Budgets = field(default_factory=Budgets)
    batch: BatchConfig = field(default_factory=BatchConfig)
    net: NetConfig = field(default_factory=NetConfig)
    cover: CoverConfig = field(default_factory=CoverConfig)
    isometries: IsometryConfig = field(default_factory=IsometryConfig)
    divergence: DivergenceConfig = field(default_factory=DivergenceConfig)
    covers: CoversConfig = field(default_factory=CoversConfig)
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        _require(isinstance(self.seed, int) and self.seed >= 0, f"seed must be a non-negative integer, got {self.seed!r}.")
        _require(isinstance(self.jobs, int) and self.jobs >= 1, f"jobs must be a positive integer, got {self.jobs!r}.")
        unknown = sorted(set(self.suites) - accepted_suite_names)
        _require(not unknown, f"Unknown suite(s): {', '.join(unknown)}.")

    @classmethod
    def from_dict(cls, data: dict, source: str | None = None) -> "RunConfig":
        """
        Build a configuration from a parsed TOML document.

        Raises:
            ConfigurationError: On unknown keys or invalid values.
        """
        top = {"seed", "jobs", "out_dir", "suites"}
        unknown = sorted(set(data) - top - set(SECTIONS))
        if unknown:
            raise ConfigurationError(f"Unknown top-level key(s): {', '.join(unknown)}.")
        kwargs = {key: data[key] for key in top if key in data}
        for name, section_cls in SECTIONS.items():
            if name in data:
                kwargs[name] = _from_table(section_cls, data[name], name)
        try:
            return cls(**kwargs, source=source)
        except TypeError as error:
            raise ConfigurationError(str(error)) from error

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """
        Read a TOML configuration file.

        Raises:
            ConfigurationError: If the file is missing, is not TOML or is invalid.
        """
        path = Path(path)
        try:
            with open(path, "rb") as toml_file:
                data = tomllib.load(toml_file)
        except FileNotFoundError as error:
            raise ConfigurationError(f"Configuration file not found: {path}") from error
        except tomllib.TOMLDecodeError as error:
            raise ConfigurationError(f"{path} is not valid TOML: {error}") from error
        return cls.from_dict(data, source=str(path))

    def with_overrides(
        self, seed: int | None = None, out_dir: str | None = None, jobs: int | None = None
    ) -> "RunConfig":
        """Command-line flags take precedence over the file."""
        changes = {
            key: value
            for key, value in {"seed": seed, "out_dir": out_dir, "jobs": jobs}.items()
            if value is not None
        }
        return replace(self, **changes)

    def resolved_out_dir(self) -> Path:
        return Path(self.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)

    def to_dict(self) -> dict:
        data = asdict(self)
        data.pop("source")
        return data

    def digest(self) -> str:
        """sha256 of the sorted-key JSON dump of everything that affects results."""
        data = self.to_dict()
        data.pop("out_dir")
        data.pop("jobs")
        return hashlib.sha256(orjson.dumps(data, option=orjson.OPT_SORT_KEYS)).hexdigest()


def build_family(config: FamilyConfig, tolerances: Tolerances | None = None) -> MetricFamily:
    """
    Instantiate the configured metric family.

    Raises:
        ConfigurationError: If the family cannot be built from the given values.
    """
    tolerances = tolerances or Tolerances()
    try:
        fiber = make_fiber(config.fiber, config.dim, config.chart_system)
        warp = WarpFunction(config.warp, config.rate, config.shift)
        if config.kind == "warped-product":
            return WarpedProduct(fiber=fiber, warp_function=warp)
        if config.kind == "torus-matrix":
            if config.matrix is not None:
                return TorusMatrix.constant(fiber, np.array(config.matrix, dtype=float))
            warps = [WarpFunction(**w) for w in config.warps] or [warp] * config.dim
            return TorusMatrix.diagonal(fiber, warps, dt_step=tolerances.dt_step)
        bump = FiberBump(fiber=fiber, center=fiber.origin(), width=config.bump_width)
        envelope = Envelope(config.envelope, config.envelope_center, config.envelope_width)
        return BumpPerturbedWarp(
            fiber=fiber, warp_function=warp, bump=bump, envelope=envelope, epsilon=config.epsilon
        )
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as error:
        raise ConfigurationError(f"Cannot build family {config.kind!r}: {error}") from error


def resolve_growth_rate(config: CertificateConfig, family: MetricFamily, seed: int = 0) -> float:
    """The configured c, or the estimated one for ``c = "auto"`` (may be ≤ 0)."""
    if config.c != "auto":
        return float(config.c)
    return estimate_growth_rate(family, config.t0, config.sample_budget, config.horizon, seed)
