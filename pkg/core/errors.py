"""Exception hierarchy shared by every package.

Validation failures subclass ValueError so callers that only know the
standard library still catch them.
"""


class OrthoseisError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(OrthoseisError, ValueError):
    """An array has the wrong rank, size or channel count for an operation."""


class ConfigError(OrthoseisError, ValueError):
    """A configuration value is outside its allowed domain."""


class FormatError(OrthoseisError, ValueError):
    """A persisted file (grid, checkpoint, SEG-Y) is malformed or unsupported."""


class AutodiffError(OrthoseisError, RuntimeError):
    """The computation trace cannot be differentiated as requested."""


class SolverDivergenceError(OrthoseisError, RuntimeError):
    """A proximal-gradient solve increased its objective."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class NonFiniteGradientError(OrthoseisError, RuntimeError):
    """An optimizer received a NaN or infinite gradient."""

    def __init__(self, message: str, parameter: str):
        super().__init__(message)
        self.parameter = parameter


class TrainingAbortedError(OrthoseisError, RuntimeError):
    """Training hit a non-finite loss; carries the offending batch."""

    def __init__(self, message: str, epoch: int, batch_indices: list[int]):
        super().__init__(message)
        self.epoch = epoch
        self.batch_indices = batch_indices


class DegenerateDataError(OrthoseisError, ValueError):
    """Input has no signal to work with (zero power, zero variance)."""
