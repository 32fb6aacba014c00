"""Exception hierarchy shared by the cost models and the command line."""


class EstimationError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for this failure."""

    exit_code = 1


class InvalidInput(EstimationError, ValueError):
    exit_code = 2


class Infeasible(EstimationError):
    """The error budget cannot be met with the requested parameters."""

    exit_code = 3


class Unsupported(EstimationError):
    """Inputs outside the tabulated or representable range (e.g. K > 16)."""

    exit_code = 4
