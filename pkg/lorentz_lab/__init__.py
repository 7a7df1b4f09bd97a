from lorentz_lab.utils.config import RunConfig
from lorentz_lab.verification.async_lab import AsyncVerificationLab
from lorentz_lab.verification.lab import VerificationLab, emit_report, run_suite

__all__ = [
    "RunConfig",
    "VerificationLab",
    "AsyncVerificationLab",
    "run_suite",
    "emit_report",
]
