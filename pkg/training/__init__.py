"""Losses, Adam, early-stopping training loop and evaluation metrics."""
from .losses import loss_mae, loss_mse, loss_ssim, mixed_loss, ssim_index
from .metrics import evaluate, evaluate_arrays, percent_improvement, r2_score
from .models import AdamState, EpochLog, FitResult, MetricsRecord, PatchDataset, SsimConfig, TrainConfig
from .optim import adam_step
from .trainer import fit

__all__ = [
    "loss_mae",
    "loss_mse",
    "loss_ssim",
    "mixed_loss",
    "ssim_index",
    "evaluate",
    "evaluate_arrays",
    "percent_improvement",
    "r2_score",
    "AdamState",
    "EpochLog",
    "FitResult",
    "MetricsRecord",
    "PatchDataset",
    "SsimConfig",
    "TrainConfig",
    "adam_step",
    "fit",
]
