import asyncio
import math

import pytest

from lorentz_lab.utils.config import RunConfig
from lorentz_lab.utils.errors import PreconditionError, UsageError
from lorentz_lab.verification.async_lab import AsyncVerificationLab

CONFIG = {
    "certificate": {"t0": 1.0, "c": 0.75, "sample_budget": 256},
    "net": {"epsilon": 0.1, "T_values": [1.0, 1.5]},
    "covers": {"count": 3, "max_nodes": 30},
    "budgets": {"gauss_points": 2, "gauss_u_max": 1.0},
}


@pytest.fixture
def async_lab():
    return AsyncVerificationLab(RunConfig.from_dict(CONFIG), semaphore_value=2)


def test_diameter_curve(async_lab):
    frame = asyncio.run(async_lab.diameter_curve([1.5, 1.0], 0.1))
    assert frame["T"].tolist() == [1.0, 1.5]
    for T, lower, upper in zip(frame["T"], frame["lower"], frame["upper"]):
        assert lower <= upper
        assert upper == pytest.approx(math.pi * math.cosh(T), abs=0.2)
    assert bool(frame["growth_ok"].fillna(True).all())


def test_diameter_curve_below_t0(async_lab):
    with pytest.raises(PreconditionError):
        asyncio.run(async_lab.diameter_curve([0.5, 1.0], 0.1))


def test_run_suites_in_order(async_lab):
    frame = asyncio.run(async_lab.run_suites(["gauss", "hypothesis", "cover-diameter"]))
    assert frame["suite"].tolist() == ["hypothesis", "cover-diameter", "gauss"]
    assert frame["passed"].all()
    assert set(async_lab.reports) == {"hypothesis", "cover-diameter", "gauss"}


def test_run_suites_errors(async_lab):
    with pytest.raises(UsageError):
        asyncio.run(async_lab.run_suites(["hypothesis", "curvature"]))
    with pytest.warns(UserWarning, match="Errors encountered"):
        frame = asyncio.run(async_lab.run_suites(["hypothesis", "curvature"], errors="warn"))
    assert frame["suite"].tolist() == ["hypothesis"]


def test_semaphore_defaults_to_jobs():
    lab = AsyncVerificationLab(RunConfig(jobs=3))
    assert lab.semaphore_value == 3
