"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration and shape problems are
usage errors (exit 2), numerical failures are runtime errors (exit 1).
"""


class IcofactError(Exception):
    """Base class for all package errors."""


class ConfigError(IcofactError):
    """Invalid configuration value or unsupported option combination."""


class DataShapeError(IcofactError):
    """Matrix dimensions incompatible with the mesh or with each other."""


class DivergenceError(IcofactError):
    """An optimization step produced non-finite entries."""

    def __init__(self, factor: str, iteration: int | None = None):
        self.factor = factor
        self.iteration = iteration
        where = f" at iteration {iteration}" if iteration is not None else ""
        super().__init__(f"non-finite entries in factor {factor}{where}")


class RefinementExhaustedError(IcofactError):
    """Every design column already sits at the data resolution."""


class MultistartError(IcofactError):
    """Every multistart run diverged."""

    def __init__(self, reports: list[DivergenceError]):
        self.reports = reports
        super().__init__(f"all {len(reports)} multistart runs diverged")
