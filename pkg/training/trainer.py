"""Mini-batch training with early stopping on the validation loss."""
import copy
import logging
import math
import time

import numpy as np

from core.autodiff import backward, no_grad
from core.errors import ShapeError, TrainingAbortedError
from core.rng import RngState
from network.models import ModelState
from network.orthoseisnet import forward
from training.losses import l1_penalty, mixed_loss
from training.metrics import evaluate_arrays
from training.models import AdamState, EarlyStopping, EpochLog, FitResult, PatchDataset, TrainConfig
from training.optim import adam_step

logger = logging.getLogger(__name__)


def _batches(count: int, batch_size: int, order: np.ndarray) -> list[np.ndarray]:
    return [order[start:start + batch_size] for start in range(0, count, batch_size)]


def validation_pass(model: ModelState, dataset: PatchDataset, cfg: TrainConfig) -> tuple[float, np.ndarray]:
    """(size-weighted mean mixed loss, predictions) in inference mode."""
    rng = RngState(cfg.seed).child("validation")
    losses, weights, predictions = [], [], []
    with no_grad():
        for indices in _batches(len(dataset), cfg.batch_size, np.arange(len(dataset))):
            inputs, targets = dataset.batch(indices)
            pred = forward(model, inputs, rng, training=False)
            losses.append(mixed_loss(pred, targets, cfg.loss_weights, cfg.ssim).item())
            weights.append(len(indices))
            predictions.append(pred.data)
    return float(np.average(losses, weights=weights)), np.concatenate(predictions, axis=0)


def fit(
    model: ModelState,
    train_set: PatchDataset,
    val_set: PatchDataset,
    cfg: TrainConfig,
    log_wall_clock: bool = True,
) -> FitResult:
    """Train ``model`` in place and return the best-validation state.

    ``FitResult.model`` is ``model`` restored to its best epoch;
    ``FitResult.final_model`` is a copy of the last epoch's weights.
    """
    if cfg.epochs == 0:
        return FitResult(model=model, final_model=model, logs=[], best_epoch=0)
    if len(train_set) == 0 or len(val_set) == 0:
        raise ShapeError(f"fit needs non-empty datasets, got {len(train_set)} train / {len(val_set)} val patches")
    if not train_set.is_disjoint_from(val_set):
        raise ShapeError("Training and validation patches share source sections")

    rng = RngState(cfg.seed)
    adam = AdamState.from_config(cfg)
    stopper = EarlyStopping(patience=cfg.early_stop_patience)
    params = model.parameters()
    kernels = model.conv_kernels()
    best_snapshot = model.snapshot()
    logs: list[EpochLog] = []

    for epoch in range(1, cfg.epochs + 1):
        start_time = time.perf_counter()
        order = rng.child("shuffle", epoch).generator.permutation(len(train_set))
        batch_losses, batch_sizes = [], []
        for batch_number, indices in enumerate(_batches(len(train_set), cfg.batch_size, order)):
            inputs, targets = train_set.batch(indices)
            model.zero_grad()
            pred = forward(model, inputs, rng.child("dropout", epoch, batch_number), training=True)
            data_loss = mixed_loss(pred, targets, cfg.loss_weights, cfg.ssim)
            penalty = l1_penalty(kernels, model.config.l1_weight)
            loss = data_loss if penalty is None else data_loss + penalty
            if not math.isfinite(loss.item()):
                raise TrainingAbortedError(
                    f"Non-finite training loss at epoch {epoch}, batch {batch_number}",
                    epoch=epoch,
                    batch_indices=[int(i) for i in indices],
                )
            backward(loss)
            adam_step(params, [param.grad for param in params], adam, cfg.learning_rate)
            batch_losses.append(data_loss.item())
            batch_sizes.append(len(indices))

        train_loss = float(np.average(batch_losses, weights=batch_sizes))
        val_loss, val_pred = validation_pass(model, val_set, cfg)
        metrics = evaluate_arrays(val_pred, val_set.targets, cfg.ssim)
        seconds = time.perf_counter() - start_time if log_wall_clock else 0.0
        logs.append(EpochLog(epoch=epoch, train_loss=train_loss, val_loss=val_loss, seconds=seconds, **metrics.model_dump()))

        improved = stopper.update(val_loss, epoch)
        if improved:
            best_snapshot = model.snapshot()
        logger.info(
            f"[EPOCH {epoch}/{cfg.epochs}] train {train_loss:.5f} val {val_loss:.5f} "
            f"ssim {metrics.ssim:.4f}{' ✅ best' if improved else ''}"
        )
        if stopper.should_stop:
            logger.info(f"[EPOCH {epoch}/{cfg.epochs}] early stop; best epoch {stopper.best_epoch}")
            break

    final_model = copy.deepcopy(model)
    model.restore(best_snapshot)
    return FitResult(model=model, final_model=final_model, logs=logs, best_epoch=stopper.best_epoch)
