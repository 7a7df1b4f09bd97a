import asyncio
from asyncio import Semaphore
from dataclasses import dataclass, field

import pandas as pd
from async_lru import alru_cache

from lorentz_lab.utils.config import RunConfig
from lorentz_lab.utils.errors import PreconditionError
from lorentz_lab.utils.pandas_utils import async_concat_results
from lorentz_lab.verification.lab import VerificationLab
from lorentz_lab.verification.metric_space import (
    NetGraph,
    add_growth_columns,
    estimate_diameter,
)
from lorentz_lab.verification.report_processor import SuiteReport
from lorentz_lab.verification.suite_mappings import suite_order


@dataclass(eq=False)
class AsyncVerificationLab:
    """
    Asynchronous wrapper of ``VerificationLab``. Suites and nets run on worker
    threads; the semaphore bounds how many run at once.

    Attributes:
        config (RunConfig): The run configuration.
        semaphore_value (int): Maximum number of concurrent worker calls.
        reports (dict): Reports of the suites run so far, by suite name.
        _lab (VerificationLab): The wrapped synchronous lab.
        _semaphore (Semaphore): Concurrency limit.
    """

    config: RunConfig = field(default_factory=RunConfig)
    semaphore_value: int | None = None
    reports: dict[str, SuiteReport] = field(default_factory=dict)
    _lab: VerificationLab = field(init=False, repr=False)
    _semaphore: Semaphore = field(init=False, repr=False)

    def __post_init__(self):
        if self.semaphore_value is None:
            self.semaphore_value = max(1, self.config.jobs)
        self._lab = VerificationLab(self.config)
        self._semaphore = Semaphore(self.semaphore_value)
        self.net = alru_cache(maxsize=self.config.net.cache_size)(self._net)

    @property
    def lab(self) -> VerificationLab:
        return self._lab

    async def _run(self, function, *args):
        async with self._semaphore:
            return await asyncio.to_thread(function, *args)

    async def _net(self, T: float, epsilon: float) -> NetGraph:
        return await self._run(self._lab.net, T, epsilon)

    async def diameter_row(self, T: float, epsilon: float) -> dict:
        net = await self.net(T, epsilon)
        estimate = await self._run(estimate_diameter, net)
        return {"T": float(T), "lower": estimate.lower, "upper": estimate.upper, "nodes": len(net)}

    async def diameter_curve(self, T_values: list[float], epsilon: float) -> pd.DataFrame:
        """
        Diameter curve of the slices ``T_values``, one net per worker.

        Returns:
            pd.DataFrame: The same columns as ``diameter_growth_curve``.
        """
        certificate = await self._run(self._lab.certificate_or_none)
        if certificate is not None and min(T_values) < certificate.t0:
            raise PreconditionError(f"T values must be at least t0={certificate.t0}.")
        frame = await async_concat_results([self.diameter_row(T, epsilon) for T in T_values])
        return add_growth_columns(frame, certificate, self.config.tolerances.growth_tol)

    async def run_suite(self, suite: str) -> SuiteReport:
        report = await self._run(self._lab.run_suite, suite)
        self.reports[report.suite] = report
        return report

    async def _summary(self, suite: str) -> dict:
        return (await self.run_suite(suite)).summary()

    async def run_suites(
        self, suites: list[str] | None = None, errors: str = "raise"
    ) -> pd.DataFrame:
        """
        Run suites concurrently.

        Returns:
            pd.DataFrame: One summary row per suite that finished, in run order.
        """
        suites = suites or self.config.suites or await self._run(self._lab.applicable_suites)
        frame = await async_concat_results([self._summary(suite) for suite in suites], errors=errors)
        if frame.empty:
            return frame
        order = {name: k for k, name in enumerate(suite_order)}
        return frame.sort_values("suite", key=lambda s: s.map(order), ignore_index=True)
