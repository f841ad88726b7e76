"""Dense-grid substrate: autodiff, grid ops, Fourier transforms and shared plumbing."""
from .autodiff import Parameter, Tensor, backward, no_grad
from .errors import (
    AutodiffError,
    ConfigError,
    FormatError,
    NonFiniteGradientError,
    OrthoseisError,
    ShapeError,
    SolverDivergenceError,
    TrainingAbortedError,
)
from .grid import precision
from .rng import RngState

__all__ = [
    "Parameter",
    "Tensor",
    "backward",
    "no_grad",
    "precision",
    "RngState",
    "OrthoseisError",
    "ShapeError",
    "ConfigError",
    "FormatError",
    "AutodiffError",
    "SolverDivergenceError",
    "NonFiniteGradientError",
    "TrainingAbortedError",
]
