"""Differentiable regression losses: MAE, MSE, windowed SSIM and their mix."""
import numpy as np

from core import ops
from core.autodiff import Parameter, Tensor, as_tensor
from core.errors import ShapeError
from training.models import SsimConfig


def _pair(pred, target) -> tuple[Tensor, Tensor]:
    pred = as_tensor(pred)
    target = target if isinstance(target, Tensor) else Tensor(np.asarray(target, dtype=pred.dtype))
    if pred.shape != target.shape:
        raise ShapeError(f"prediction {pred.shape} and target {target.shape} shapes differ")
    return pred, target


def loss_mae(pred, target) -> Tensor:
    pred, target = _pair(pred, target)
    return ops.mean(ops.absolute(pred - target))


def loss_mse(pred, target) -> Tensor:
    pred, target = _pair(pred, target)
    return ops.mean(ops.square(pred - target))


def dynamic_range(target, cfg: SsimConfig) -> float:
    if cfg.dynamic_range is not None:
        return cfg.dynamic_range
    values = target.data if isinstance(target, Tensor) else np.asarray(target)
    spread = float(values.max() - values.min())
    return spread if spread > 0 else 1.0


def ssim_index(pred, target, cfg: SsimConfig) -> Tensor:
    """Mean SSIM over every fully contained uniform window (population statistics)."""
    pred, target = _pair(pred, target)
    if pred.ndim < 3:
        raise ShapeError(f"SSIM expects (..., H, W, C) grids, got {pred.shape}")
    height, width = pred.shape[-3], pred.shape[-2]
    if cfg.window > min(height, width):
        raise ShapeError(f"SSIM window {cfg.window} is larger than the {height}x{width} image")

    c1, c2 = cfg.constants(dynamic_range(target, cfg))
    window = cfg.window
    mu_p = ops.box_filter(pred, window)
    mu_t = ops.box_filter(target, window)
    var_p = ops.box_filter(pred * pred, window) - mu_p * mu_p
    var_t = ops.box_filter(target * target, window) - mu_t * mu_t
    cov = ops.box_filter(pred * target, window) - mu_p * mu_t
    numerator = (2.0 * mu_p * mu_t + c1) * (2.0 * cov + c2)
    denominator = (mu_p * mu_p + mu_t * mu_t + c1) * (var_p + var_t + c2)
    return ops.mean(numerator / denominator)


def loss_ssim(pred, target, cfg: SsimConfig) -> Tensor:
    return 1.0 - ssim_index(pred, target, cfg)


def mixed_loss(pred, target, weights: tuple[float, float, float], ssim_cfg: SsimConfig) -> Tensor:
    """w_mse * MSE + w_ssim * (1 - SSIM) + w_mae * MAE; zero-weight terms are skipped."""
    w_mse, w_ssim, w_mae = weights
    if min(weights) < 0:
        raise ValueError(f"loss weights must be non-negative, got {weights}")
    pred, target = _pair(pred, target)
    terms = []
    if w_mse:
        terms.append(w_mse * loss_mse(pred, target))
    if w_ssim:
        terms.append(w_ssim * loss_ssim(pred, target, ssim_cfg))
    if w_mae:
        terms.append(w_mae * loss_mae(pred, target))
    if not terms:
        raise ValueError("mixed_loss needs at least one positive weight")
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total


def l1_penalty(kernels: list[Parameter], weight: float) -> Tensor | None:
    if weight == 0 or not kernels:
        return None
    total = ops.total(ops.absolute(kernels[0]))
    for kernel in kernels[1:]:
        total = total + ops.total(ops.absolute(kernel))
    return weight * total
