"""Central finite-difference check of recorded gradients.

Run it under ``precision("float64")``; in 32-bit mode the difference
quotient is dominated by rounding.
"""
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from core.autodiff import Parameter, Tensor, backward, no_grad
from core.rng import RngState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradCheckResult:
    parameter: str
    checked_entries: int
    relative_error: float

    def passes(self, tolerance: float) -> bool:
        return self.relative_error < tolerance


def _relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def _loss_value(fn: Callable[[], Tensor]) -> float:
    with no_grad():
        return float(np.real(fn().data))


def check_gradients(
    fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    step: float = 1e-5,
    max_entries: int | None = 64,
    rng: RngState | None = None,
) -> list[GradCheckResult]:
    """Compare backward() against central differences for every parameter.

    ``fn`` must rebuild the scalar loss from the current parameter values on
    every call; stochastic ops inside it need frozen masks. At most
    ``max_entries`` randomly chosen entries per parameter are perturbed.
    """
    rng = rng or RngState(0)
    for param in params:
        param.zero_grad()
    backward(fn())

    results = []
    for param in params:
        flat_count = param.data.size
        entries = np.arange(flat_count)
        if max_entries is not None and flat_count > max_entries:
            entries = np.sort(rng.child(param.name).generator.choice(flat_count, size=max_entries, replace=False))

        analytic = param.grad.reshape(-1)[entries]
        numeric = np.zeros(len(entries), dtype=param.grad.dtype)
        directions = (1.0, 1j) if np.iscomplexobj(param.data) else (1.0,)
        original = param.data.copy()
        for slot, entry in enumerate(entries):
            for direction in directions:
                bumped = original.copy().reshape(-1)
                bumped[entry] += step * direction
                param.value = bumped.reshape(original.shape)
                upper = _loss_value(fn)
                bumped[entry] -= 2 * step * direction
                param.value = bumped.reshape(original.shape)
                lower = _loss_value(fn)
                numeric[slot] += direction * (upper - lower) / (2 * step)
            param.value = original

        result = GradCheckResult(param.name, len(entries), _relative_error(analytic, numeric))
        logger.debug(f"[GradCheck] {result.parameter}: {result.checked_entries} entries, rel err {result.relative_error:.2e}")
        results.append(result)
    return results
