"""Training configuration, logs and the data containers fit() works on."""
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.errors import ShapeError
from network.models import ModelState


class SsimConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    window: int = Field(default=11, ge=1, description="Side of the uniform SSIM window (odd)")
    k1: float = Field(default=0.01, gt=0)
    k2: float = Field(default=0.03, gt=0)
    dynamic_range: float | None = Field(
        default=None, gt=0, description="L; null uses max(target) - min(target) of each batch (1 if constant)"
    )

    @model_validator(mode="after")
    def _check_window(self) -> "SsimConfig":
        if self.window % 2 == 0:
            raise ValueError(f"SSIM window must be odd, got {self.window}")
        return self

    def constants(self, dynamic_range: float) -> tuple[float, float]:
        """(C1, C2) = ((k1 L)^2, (k2 L)^2)."""
        return (self.k1 * dynamic_range) ** 2, (self.k2 * dynamic_range) ** 2


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    learning_rate: float = Field(default=1e-2, gt=0)
    epochs: int = Field(default=100, ge=0)
    batch_size: int = Field(default=8, ge=1)
    early_stop_patience: int = Field(default=15, ge=1)
    loss_weights: tuple[float, float, float] = Field(
        default=(0.5, 0.5, 0.0), description="(w_mse, w_ssim, w_mae), non-negative and summing to 1"
    )
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    target: Literal["reflectivity", "impedance"] = "reflectivity"
    norm_scheme: Literal["minmax_sym", "zscore"] = "minmax_sym"
    patch_stride: int | None = Field(default=None, ge=1, description="Training patch stride; null means half the patch")
    ssim: SsimConfig = Field(default_factory=SsimConfig)

    @model_validator(mode="after")
    def _check_weights(self) -> "TrainConfig":
        if any(weight < 0 for weight in self.loss_weights):
            raise ValueError(f"loss_weights must be non-negative, got {self.loss_weights}")
        if not any(weight > 0 for weight in self.loss_weights):
            raise ValueError("at least one loss weight must be positive")
        if not math.isclose(sum(self.loss_weights), 1.0, abs_tol=1e-9):
            raise ValueError(f"loss_weights must sum to 1, got {sum(self.loss_weights)}")
        return self


class MetricsRecord(BaseModel):
    mae: float = Field(ge=0)
    mse: float = Field(ge=0)
    ssim: float = Field(ge=-1, le=1)
    r2: float


class EpochLog(BaseModel):
    epoch: int
    train_loss: float
    val_loss: float
    mae: float
    mse: float
    ssim: float
    r2: float
    seconds: float


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_config(cls, cfg: TrainConfig) -> "AdamState":
        return cls(beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.adam_eps)


@dataclass
class EarlyStopping:
    patience: int
    best_loss: float = math.inf
    best_epoch: int = 0
    bad_epochs: int = 0

    def update(self, loss: float, epoch: int) -> bool:
        """Record an epoch's validation loss; True when it is a new best."""
        if loss < self.best_loss:
            self.best_loss, self.best_epoch, self.bad_epochs = loss, epoch, 0
            return True
        self.bad_epochs += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.bad_epochs >= self.patience


@dataclass
class PatchDataset:
    """Paired (N, H, W, 1) input/target patches and the section each came from."""
    inputs: np.ndarray
    targets: np.ndarray
    sources: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.inputs.shape != self.targets.shape or self.inputs.ndim != 4:
            raise ShapeError(f"inputs {self.inputs.shape} and targets {self.targets.shape} must share an (N, H, W, C) shape")
        if self.sources and len(self.sources) != len(self.inputs):
            raise ShapeError(f"{len(self.sources)} source ids for {len(self.inputs)} patches")

    def __len__(self) -> int:
        return len(self.inputs)

    def batch(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.inputs[indices], self.targets[indices]

    def is_disjoint_from(self, other: "PatchDataset") -> bool:
        if self.sources and other.sources:
            return not set(self.sources) & set(other.sources)
        return self.inputs is not other.inputs


@dataclass
class FitResult:
    model: ModelState
    final_model: ModelState
    logs: list[EpochLog]
    best_epoch: int
