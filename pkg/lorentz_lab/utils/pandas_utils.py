import asyncio
import warnings
from typing import Any, Awaitable, Literal, overload

import pandas as pd
import pandera.pandas as pa
from pandas import DataFrame

ErrorMode = Literal["raise", "warn", "ignore"]


def expand_dict_columns(data: pd.DataFrame, separator: str = ".") -> pd.DataFrame:
    """Flatten nested dict cells into ``parent.child`` columns, keeping column order."""
    records = data.reset_index(drop=True).to_dict("records")
    return pd.json_normalize(records, sep=separator)


def determine_mandatory_optional_fields_pandera(model: pa.DataFrameModel) -> dict:
    """Column names of a schema split by nullability, in schema order."""
    columns = model.to_schema().columns
    return {
        "mandatory": [name for name, column in columns.items() if not column.nullable],
        "optional": [name for name, column in columns.items() if column.nullable],
    }


def order_columns(data: pd.DataFrame, model: pa.DataFrameModel) -> pd.DataFrame:
    """Mandatory schema columns first, then optional ones, then the rest in their order."""
    fields = determine_mandatory_optional_fields_pandera(model)
    known = [c for c in fields["mandatory"] + fields["optional"] if c in data.columns]
    return data[known + [c for c in data.columns if c not in known]]


def sort_by_id(data: pd.DataFrame, column: str = "id") -> pd.DataFrame:
    if column not in data.columns:
        return data.reset_index(drop=True)
    return data.sort_values(column, kind="stable", ignore_index=True)


@overload
def concat_results(results: list[pd.DataFrame], errors: ErrorMode = "raise") -> DataFrame: ...


@overload
def concat_results(results: list[dict], errors: ErrorMode = "raise") -> DataFrame: ...


def concat_results(
    results: list[pd.DataFrame | dict | BaseException | None],
    errors: ErrorMode = "raise",
) -> DataFrame | list[dict | DataFrame]:
    """
    Join the results of gathered suite runs or net rows.

    Rows (dicts) become one frame, frames are concatenated without their empty
    members. Anything else counts as a failure: the first exception is raised,
    or the failures are reported with ``warnings.warn``, or dropped.

    Returns:
        DataFrame | list: The joined frame, or the results as a list when rows
        and frames are mixed.
    """
    rows = [x for x in results if isinstance(x, (dict, pd.DataFrame))]
    failures = [x for x in results if not isinstance(x, (dict, pd.DataFrame))]
    if failures and errors == "raise":
        raise next(
            (x for x in failures if isinstance(x, BaseException)),
            ValueError(f"Errors encountered: {failures}"),
        )
    if failures and errors == "warn":
        warnings.warn(f"Errors encountered: {failures}")
    if not rows:
        return pd.DataFrame()
    if all(isinstance(x, dict) for x in rows):
        return pd.DataFrame(rows)
    if all(isinstance(x, pd.DataFrame) for x in rows):
        frames = [x for x in rows if not x.empty]
        return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    return rows


async def async_concat_results(
    tasks: Awaitable | list[Awaitable],
    errors: ErrorMode = "raise",
) -> DataFrame | Any:
    """Await one task, or gather a list of tasks and join them with ``concat_results``."""
    if isinstance(tasks, Awaitable):
        return await tasks
    if not all(isinstance(t, Awaitable) for t in tasks):
        raise TypeError("Expected a coroutine or a list of coroutines.")
    results = await asyncio.gather(*tasks, return_exceptions=True)
    return concat_results(results, errors=errors)
