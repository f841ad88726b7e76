"""Bias-corrected Adam over named Parameters.

Complex parameters are optimized as independent real and imaginary
components: the second moment of a complex parameter stores the running
mean of Re(g)^2 in its real part and of Im(g)^2 in its imaginary part.
"""
from collections.abc import Sequence

import numpy as np

from core.autodiff import Parameter
from core.errors import NonFiniteGradientError, ShapeError
from training.models import AdamState


def _componentwise_square(g: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(g):
        return g.real**2 + 1j * g.imag**2
    return g * g


def _componentwise_ratio(m_hat: np.ndarray, v_hat: np.ndarray, eps: float) -> np.ndarray:
    if np.iscomplexobj(m_hat):
        return m_hat.real / (np.sqrt(v_hat.real) + eps) + 1j * (m_hat.imag / (np.sqrt(v_hat.imag) + eps))
    return m_hat / (np.sqrt(v_hat) + eps)


def adam_step(
    params: Sequence[Parameter],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
) -> AdamState:
    """Apply one Adam update in place and return the advanced state."""
    if len(params) != len(grads):
        raise ShapeError(f"{len(params)} parameters but {len(grads)} gradients")
    for param, grad in zip(params, grads):
        if grad.shape != param.shape:
            raise ShapeError(f"Gradient for {param.name} has shape {grad.shape}, parameter has {param.shape}")
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError(f"Non-finite gradient for parameter {param.name}", parameter=param.name)

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for param, grad in zip(params, grads):
        m = state.m.get(param.name)
        v = state.v.get(param.name)
        if m is None:
            m = np.zeros_like(grad)
            v = np.zeros_like(grad)
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * _componentwise_square(grad)
        state.m[param.name], state.v[param.name] = m, v
        if lr == 0:
            continue
        update = _componentwise_ratio(m / correction1, v / correction2, state.eps)
        param.value = param.value - lr * update.astype(param.dtype, copy=False)
    return state
