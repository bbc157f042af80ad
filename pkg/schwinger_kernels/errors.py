"""Typed errors raised by the kernel pipeline, the oracle and the CLI."""


class SchwingerError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(SchwingerError, ValueError):
    """An input violates a documented precondition."""


class DegenerateMapError(SchwingerError):
    """The endpoint inversion needs an off-diagonal entry that vanishes.

    The kernel for this map is a distribution, not a Gaussian.
    """

    def __init__(self, message: str, entry: float):
        super().__init__(message)
        self.entry = entry


class CausticError(SchwingerError):
    """The requested time sits on or beyond the first caustic."""


class BranchError(SchwingerError):
    """The normalization factor changes sign inside the interval."""


class DegenerateKernelError(SchwingerError):
    """A Gaussian-only operation was applied to a delta kernel."""


class GridTooSmallError(SchwingerError, ValueError):
    """A state does not fit inside its grid."""


class StepCountError(SchwingerError, ValueError):
    def __init__(self, message: str, minimum_steps: int):
        super().__init__(message)
        self.minimum_steps = minimum_steps


class ResolutionError(SchwingerError):
    """The grid is too coarse for the kernel's oscillatory phase."""


class RepresentationMismatchError(SchwingerError, ValueError):
    """A kernel and a state use different representations."""
