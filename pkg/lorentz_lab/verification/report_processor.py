"""
ReportProcessor Module

Turns suite results into files: report.json (or a one-row report.csv), CSV side
files for plotting and JSON side documents. Tables are validated against their
pandera schemas before they are written, floats are printed with 17
significant digits and JSON keeps the insertion order of the report, so two runs
with the same configuration produce identical numeric fields.

Classes:
    SuiteReport: Result of one verification suite.
    ReportProcessor: Validation and serialization of reports.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import orjson
import pandas as pd
import pandera.pandas as pa

from lorentz_lab.utils.errors import ReportWriteError
from lorentz_lab.utils.pandas_utils import (
    concat_results,
    expand_dict_columns,
    order_columns,
    sort_by_id,
)
from lorentz_lab.verification.schemas import SuiteSummarySchema, table_schemas

logger = logging.getLogger(__name__)

ReportFormat = Literal["json", "csv"]


@dataclass
class SuiteReport:
    """
    Result of one verification suite.

    Attributes:
        suite (str): Suite name.
        passed (bool): Verdict of the suite.
        seed (int): Seed of the run.
        config_digest (str): Digest of the resolved configuration.
        family (dict): Description of the metric family.
        sub_reports (dict): JSON-ready results of the underlying checks.
        tables (dict): Side tables, written as ``<name>.csv``.
        documents (dict): Side documents, written as ``<name>.json``.
        wall_time_ms (float): Wall time of the suite.
    """

    suite: str
    passed: bool
    seed: int
    config_digest: str
    family: dict
    sub_reports: dict = field(default_factory=dict)
    tables: dict[str, pd.DataFrame] = field(default_factory=dict, repr=False)
    documents: dict[str, dict] = field(default_factory=dict, repr=False)
    wall_time_ms: float = 0.0

    @property
    def side_files(self) -> list[str]:
        names = [f"{name}.csv" for name in self.tables] + [f"{name}.json" for name in self.documents]
        return sorted(names)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "family": self.family,
            "wall_time_ms": self.wall_time_ms,
            "side_files": self.side_files,
            "sub_reports": self.sub_reports,
        }

    def summary(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "wall_time_ms": self.wall_time_ms,
        }


def _default(value):
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, pd.DataFrame):
        return value.to_dict("records")
    if value is pd.NA:
        return None
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Type is not JSON serializable: {type(value).__name__}")


@dataclass
class ReportProcessor:
    """
    Validation and serialization of suite reports.

    Attributes:
        float_format (str): printf format of CSV floats.
        validate_tables (bool): Validate tables against their schemas before writing.
        json_options (int): orjson options of report documents.
        table_schemas (dict): Table name to pandera schema.
    """

    float_format: str = "%.17g"
    validate_tables: bool = True
    json_options: int = orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
    table_schemas: dict[str, type[pa.DataFrameModel]] = field(
        default_factory=lambda: dict(table_schemas), repr=False
    )

    def preprocess_table(self, name: str, data: pd.DataFrame) -> pd.DataFrame:
        """
        Validate a side table against its schema and put its columns in schema order.

        Args:
            name (str): Table name, the key of ``table_schemas``.
            data (pd.DataFrame): The table.

        Returns:
            pd.DataFrame: The validated table; tables without a schema pass through.
        """
        schema = self.table_schemas.get(name)
        if schema is None:
            return data.reset_index(drop=True)
        if self.validate_tables and not data.empty:
            data = schema.validate(data)
        return order_columns(data, schema).reset_index(drop=True)

    def dumps(self, data: dict) -> bytes:
        return orjson.dumps(data, default=_default, option=self.json_options)

    def write_bytes(self, path: Path, payload: bytes) -> Path:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(payload)
        except OSError as error:
            raise ReportWriteError(path, f"cannot write report ({error.strerror or error})") from error
        return path

    def write_json(self, path: Path, data: dict) -> Path:
        return self.write_bytes(Path(path), self.dumps(data) + b"\n")

    def write_table(self, path: Path, name: str, data: pd.DataFrame) -> Path:
        data = self.preprocess_table(name, data)
        payload = data.to_csv(index=False, float_format=self.float_format, lineterminator="\n")
        return self.write_bytes(Path(path), payload.encode())

    def report_to_dataframe(self, report: SuiteReport) -> pd.DataFrame:
        """One-row flat view of a report; nested sub reports become dotted columns."""
        return expand_dict_columns(pd.DataFrame([report.to_dict()]), separator=".")

    def emit(self, report: SuiteReport, out_dir: str | Path, format: ReportFormat = "json") -> list[Path]:
        """
        Write a report and its side files under ``out_dir/<suite>``.

        Returns:
            list: Written paths, report first.

        Raises:
            ReportWriteError: If a file cannot be written.
        """
        directory = Path(out_dir) / report.suite
        if format == "json":
            written = [self.write_json(directory / "report.json", report.to_dict())]
        elif format == "csv":
            frame = self.report_to_dataframe(report)
            payload = frame.to_csv(index=False, float_format=self.float_format, lineterminator="\n")
            written = [self.write_bytes(directory / "report.csv", payload.encode())]
        else:
            raise ValueError(f"Unknown report format {format!r}; expected 'json' or 'csv'.")
        for name, table in report.tables.items():
            written.append(self.write_table(directory / f"{name}.csv", name, table))
        for name, document in report.documents.items():
            written.append(self.write_json(directory / f"{name}.json", document))
        logger.info("Wrote %d file(s) for suite %s to %s", len(written), report.suite, directory)
        return written

    def load_summary(self, path: Path) -> dict:
        data = orjson.loads(Path(path).read_bytes())
        return {
            "suite": data["suite"],
            "passed": data["passed"],
            "seed": data["seed"],
            "config_digest": data["config_digest"],
            "wall_time_ms": data["wall_time_ms"],
            "path": str(path),
        }

    def summarize(self, directory: str | Path, errors: Literal["raise", "warn", "ignore"] = "warn") -> pd.DataFrame:
        """
        One row per report.json below ``directory``.

        Unreadable reports are handled according to ``errors``.
        """
        results = []
        for path in sorted(Path(directory).rglob("report.json")):
            try:
                results.append(self.load_summary(path))
            except (OSError, KeyError, orjson.JSONDecodeError) as error:
                results.append(error)
        frame = concat_results(results, errors=errors)
        if frame.empty:
            return frame
        frame = sort_by_id(frame, "path")
        return self.preprocess_table("summary", frame)
