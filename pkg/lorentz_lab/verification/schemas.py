"""
Schemas Module

pandera schemas of every table the lab writes. Tables are validated before
they are emitted, so a CSV side file always matches its documented columns.
"""

from typing import Optional

import pandas as pd
import pandera.pandas as pa

from lorentz_lab.verification.suite_mappings import all_suites


class TrajectorySchema(pa.DataFrameModel):
    """Samples of one geodesic."""

    u: float = pa.Field(description="Affine parameter, strictly increasing")
    t: float = pa.Field(description="Time coordinate")
    chart_id: int = pa.Field(ge=0, description="Fiber chart of the sample")
    coords: float = pa.Field(alias=r"^x\d+$", regex=True, description="Fiber chart coordinates")
    dt: float = pa.Field(description="Time velocity")
    velocity: float = pa.Field(alias=r"^dx\d+$", regex=True, description="Fiber chart velocity")
    h_norm: float = pa.Field(description="h(γ̇, γ̇)")

    @pa.dataframe_check
    def increasing_parameter(cls, df: pd.DataFrame) -> bool:
        return bool(df["u"].is_monotonic_increasing and df["u"].is_unique)

    class Config:
        coerce = True


class NetNodeSchema(pa.DataFrameModel):
    """Nodes of an ε-net."""

    id: int = pa.Field(ge=0, unique=True)
    chart_id: int = pa.Field(ge=0)
    coords: float = pa.Field(alias=r"^x\d+$", regex=True)

    class Config:
        coerce = True


class NetEdgeSchema(pa.DataFrameModel):
    """Edges of an ε-net, each listed once with i < j."""

    i: int = pa.Field(ge=0)
    j: int = pa.Field(ge=0)
    weight: float = pa.Field(gt=0)

    @pa.dataframe_check
    def upper_triangle(cls, df: pd.DataFrame) -> pd.Series:
        return df["i"] < df["j"]

    class Config:
        coerce = True


class DiameterCurveSchema(pa.DataFrameModel):
    """Diameter estimates of F_T along a list of slice levels."""

    T: float = pa.Field(description="Slice level")
    lower: float = pa.Field(ge=0)
    upper: float = pa.Field(ge=0)
    nodes: int = pa.Field(gt=0)
    ratio: Optional[float] = pa.Field(nullable=True)
    ratio_bound: Optional[float] = pa.Field(nullable=True)
    growth_ok: Optional[pd.BooleanDtype] = pa.Field(nullable=True)
    expected: Optional[float] = pa.Field(nullable=True)
    relative_error: Optional[float] = pa.Field(nullable=True, ge=0)

    @pa.dataframe_check
    def lower_below_upper(cls, df: pd.DataFrame) -> pd.Series:
        return df["lower"] <= df["upper"] * (1.0 + 1e-12)

    class Config:
        coerce = True


class DiameterMarchSchema(pa.DataFrameModel):
    """Diameter lower bounds met while marching T₂."""

    T: float
    lower: float = pa.Field(ge=0)
    upper: float = pa.Field(ge=0)
    exact: bool

    class Config:
        coerce = True


class CurvatureSampleSchema(pa.DataFrameModel):
    """Sectional curvature of sampled indefinite planes."""

    t: float
    chart_id: int = pa.Field(ge=0)
    coords: float = pa.Field(alias=r"^x\d+$", regex=True)
    K: float = pa.Field(description="Sectional curvature")

    class Config:
        coerce = True


class JacobiCheckSchema(pa.DataFrameModel):
    """One row per Jacobi field along a vertical geodesic."""

    id: int = pa.Field(ge=0)
    passed: bool
    max_relative_residual: float = pa.Field(ge=0)
    min_tanh_margin: Optional[float] = pa.Field(nullable=True)
    initial_orthogonality: float = pa.Field(ge=0)
    system_residual: float = pa.Field(ge=0)
    sample_count: int = pa.Field(gt=0)
    worst_u: float

    class Config:
        coerce = True


class BoundReportSchema(pa.DataFrameModel):
    """Bound check summaries."""

    bound_name: str = pa.Field(isin=["affine-length", "projected-length", "endpoint-distance"])
    bound_value: float = pa.Field(gt=0)
    observed_max: float = pa.Field(ge=0)
    margin: float
    passed: bool
    sample_count: int = pa.Field(ge=0)
    worst_case_id: Optional[float] = pa.Field(nullable=True, ge=0)
    rejected_count: int = pa.Field(ge=0)

    @pa.dataframe_check
    def margin_is_difference(cls, df: pd.DataFrame) -> pd.Series:
        return (df["margin"] - (df["bound_value"] - df["observed_max"])).abs() <= 1e-12 * df["bound_value"]

    class Config:
        coerce = True


class OracleSchema(pa.DataFrameModel):
    """Deviation of integrated geodesics from the closed form."""

    id: int = pa.Field(ge=0, unique=True)
    causal: str = pa.Field(isin=["spacelike", "timelike", "null"])
    affine_length: float = pa.Field(ge=0)
    deviation: float = pa.Field(ge=0)
    norm_drift: float = pa.Field(ge=0)
    valid: bool

    class Config:
        coerce = True


class CoverInstanceSchema(pa.DataFrameModel):
    """Cover-diameter inequality per instance."""

    name: str
    passed: bool
    diameter: float = pa.Field(ge=0)
    part_sum: float = pa.Field(ge=0)
    margin: float
    parts: int = pa.Field(ge=1)
    nodes: int = pa.Field(ge=1)

    class Config:
        coerce = True


class CoverBallSchema(pa.DataFrameModel):
    """Balls of a slab cover."""

    center_id: int = pa.Field(ge=0, unique=True)
    radius: float = pa.Field(gt=0)
    members: int = pa.Field(ge=1)
    flagged: bool

    class Config:
        coerce = True


class OrbitReturnSchema(pa.DataFrameModel):
    """Slab returns of the powers of one isometry."""

    k: int = pa.Field(ge=1, unique=True)
    intersects: bool
    witness_t: Optional[float] = pa.Field(nullable=True)
    image_t: Optional[float] = pa.Field(nullable=True)
    min_abs_t: float = pa.Field(ge=0)

    class Config:
        coerce = True


class SuiteSummarySchema(pa.DataFrameModel):
    """One row per report.json, as printed by ``lorentz-lab report``."""

    suite: str = pa.Field(isin=sorted(all_suites))
    passed: bool
    seed: int = pa.Field(ge=0)
    config_digest: str = pa.Field(str_length={"min_value": 64, "max_value": 64})
    wall_time_ms: float = pa.Field(ge=0)
    path: Optional[str] = pa.Field(nullable=True)

    class Config:
        coerce = True


table_schemas: dict[str, type[pa.DataFrameModel]] = {
    "worst_trajectory": TrajectorySchema,
    "trajectory": TrajectorySchema,
    "net_nodes": NetNodeSchema,
    "net_edges": NetEdgeSchema,
    "diameter_curve": DiameterCurveSchema,
    "diameter_march": DiameterMarchSchema,
    "curvature_samples": CurvatureSampleSchema,
    "jacobi_checks": JacobiCheckSchema,
    "bound": BoundReportSchema,
    "oracle": OracleSchema,
    "covers": CoverInstanceSchema,
    "cover_balls": CoverBallSchema,
    "orbit_returns": OrbitReturnSchema,
    "summary": SuiteSummarySchema,
}
