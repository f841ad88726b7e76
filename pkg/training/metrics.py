"""Evaluation metrics (MAE, MSE, SSIM, R^2) over predictions and datasets."""
import numpy as np

from core.autodiff import no_grad
from core.errors import DegenerateDataError, ShapeError
from core.rng import RngState
from network.models import ModelState
from network.orthoseisnet import forward
from training.losses import ssim_index
from training.models import MetricsRecord, PatchDataset, SsimConfig

LOWER_IS_BETTER = ("mae", "mse")
HIGHER_IS_BETTER = ("ssim", "r2")


def r2_score(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"prediction {pred.shape} and target {target.shape} shapes differ")
    total = float(np.sum((target - target.mean()) ** 2))
    if total == 0.0:
        raise DegenerateDataError("R^2 is undefined for a zero-variance target")
    return 1.0 - float(np.sum((pred - target) ** 2)) / total


def evaluate_arrays(pred: np.ndarray, target: np.ndarray, ssim_cfg: SsimConfig) -> MetricsRecord:
    """Metrics of (..., H, W, C) predictions; SSIM is averaged over leading items, R^2 is pooled."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"prediction {pred.shape} and target {target.shape} shapes differ")
    items_pred = pred.reshape((-1,) + pred.shape[-3:])
    items_target = target.reshape((-1,) + target.shape[-3:])
    with no_grad():
        ssim = float(np.mean([ssim_index(p, t, ssim_cfg).item() for p, t in zip(items_pred, items_target)]))
    return MetricsRecord(
        mae=float(np.mean(np.abs(pred - target))),
        mse=float(np.mean((pred - target) ** 2)),
        ssim=float(np.clip(ssim, -1.0, 1.0)),
        r2=r2_score(pred, target),
    )


def predict(model: ModelState, inputs: np.ndarray, batch_size: int = 8) -> np.ndarray:
    """Inference-mode predictions for an (N, H, W, C) stack."""
    outputs = []
    rng = RngState(0)
    with no_grad():
        for start in range(0, len(inputs), batch_size):
            outputs.append(forward(model, inputs[start:start + batch_size], rng, training=False).data)
    return np.concatenate(outputs, axis=0) if outputs else np.zeros_like(inputs)


def evaluate(model: ModelState, dataset: PatchDataset, ssim_cfg: SsimConfig | None = None, batch_size: int = 8) -> MetricsRecord:
    if len(dataset) == 0:
        raise ShapeError("Cannot evaluate on an empty dataset")
    return evaluate_arrays(predict(model, dataset.inputs, batch_size), dataset.targets, ssim_cfg or SsimConfig())


def percent_improvement(reference: MetricsRecord, candidate: MetricsRecord) -> dict[str, float]:
    """Per-metric improvement of ``candidate`` over ``reference`` in percent (positive is better)."""
    improvement = {}
    for metric in LOWER_IS_BETTER:
        ref = getattr(reference, metric)
        improvement[metric] = 0.0 if ref == 0 else 100.0 * (ref - getattr(candidate, metric)) / ref
    for metric in HIGHER_IS_BETTER:
        ref = getattr(reference, metric)
        improvement[metric] = 0.0 if ref == 0 else 100.0 * (getattr(candidate, metric) - ref) / abs(ref)
    return improvement
