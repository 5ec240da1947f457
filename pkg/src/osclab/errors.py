"""Exception hierarchy and process exit codes.

The CLI maps errors to exit codes: 2 for configuration problems, 3 for
numerical failures, 4 for statistical-validity failures.
"""


class OsclabError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(OsclabError):
    """Invalid configuration values, parameters, or input files."""

    exit_code = 2


class LatticeSizeError(ConfigurationError):
    """Requested lattice exceeds the configured site limit."""


class NumericalError(OsclabError):
    """A numerical operation failed or violated its contract."""

    exit_code = 3


class PositivityError(NumericalError):
    """The one-particle matrix is not positive definite.

    Carries the offending (smallest) eigenvalue and the threshold it had
    to clear.
    """

    def __init__(self, eigenvalue: float, threshold: float):
        self.eigenvalue = float(eigenvalue)
        self.threshold = float(threshold)
        super().__init__(
            f"smallest eigenvalue {self.eigenvalue:.6e} does not clear the "
            f"positivity threshold {self.threshold:.6e}"
        )


class EvaluationError(NumericalError):
    """A scalar function could not be evaluated on the spectrum."""


class ConditioningError(NumericalError):
    """A shifted linear system is too close to singular to solve reliably.

    ``distance`` holds the gap between the shift and the nearest eigenvalue
    when it is known.
    """

    def __init__(self, message: str, distance: float | None = None):
        self.distance = distance
        super().__init__(message)


class FitDomainError(NumericalError):
    """Decay fitting was requested on data outside its domain."""


class StatisticalValidityError(OsclabError):
    """Too many degenerate realizations for a trustworthy estimate."""

    exit_code = 4
