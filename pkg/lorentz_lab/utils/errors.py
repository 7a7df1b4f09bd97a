"""
Errors Module

Exception hierarchy shared by the geometry engine and the verification harness.
Input problems keep ``ValueError`` as a base so callers that already catch
``ValueError`` keep working; numerical failures derive from ``RuntimeError``.
"""


class LorentzLabError(Exception):
    """Root of every error raised by lorentz-lab."""


class ChartDomainError(LorentzLabError, ValueError):
    """Coordinates outside the declared domain of their chart."""


class DegeneratePlaneError(LorentzLabError, ValueError):
    """Two tangent vectors that do not span a nondegenerate plane."""


class UsageError(LorentzLabError, ValueError):
    """Unknown suite or command-line misuse."""


class ConfigurationError(LorentzLabError, ValueError):
    """Invalid run configuration or an object used with the wrong family."""


class PreconditionError(LorentzLabError, ValueError):
    """An operation was called outside its stated preconditions."""


class InvalidInstanceError(LorentzLabError, ValueError):
    """Malformed finite metric space, cover or graph."""


class IntegrationFailure(LorentzLabError, RuntimeError):
    """The ODE integrator gave up (typically a step-size underflow)."""


class NumericalAnomaly(LorentzLabError, RuntimeError):
    """A theorem-backed numerical assertion failed."""


class ReportWriteError(LorentzLabError, OSError):
    """A report could not be written.

    Attributes:
        path (str): The path that could not be written.
    """

    def __init__(self, path, message: str = "cannot write report"):
        super().__init__(f"{message}: {path}")
        self.path = str(path)
