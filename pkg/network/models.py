"""Architecture configuration and parameter containers for the spectral U-Net."""
import hashlib
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.autodiff import Parameter
from core.grid import is_power_of_two

DROPOUT_BAND = (0.1, 0.3)


class NetworkConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input_size: tuple[int, int] = Field(default=(32, 32), description="Patch (height, width), powers of two")
    input_channels: int = Field(default=1, ge=1)
    base_filters: int = Field(default=16, ge=1, description="Filters of the first encoder stage; doubled per stage")
    depth: int = Field(default=4, ge=1, description="Number of encoder (and decoder) stages")
    bottleneck_filters: int | None = Field(default=None, ge=1, description="Defaults to base_filters * 2**depth")
    kernel_size: int = Field(default=3, ge=1, description="Spatial size of the stage convolutions (odd)")
    upconv_kernel: int = Field(default=2, ge=2, description="Transpose-convolution kernel size (stride 2)")
    mode_fraction: float = Field(default=0.5, gt=0, le=1, description="Fraction of one-sided Fourier modes kept per axis")
    dropout_rate: float = Field(default=0.1, ge=0, lt=1)
    allow_any_dropout: bool = Field(default=False, description="Permit dropout outside [0.1, 0.3]")
    group_norm_max_groups: int = Field(default=8, ge=1)
    output_channels: int = Field(default=1, ge=1)
    output_softmax: bool = Field(default=False, description="Softmax across output channels (multi-channel heads only)")
    spectral: bool = Field(default=True, description="False replaces every spectral layer with identity (plain U-Net)")
    skip_source: Literal["pre_pool", "post_spectral"] = "pre_pool"
    l1_weight: float = Field(default=1e-5, ge=0, description="L1 penalty on convolution kernels during training")

    @model_validator(mode="after")
    def _check_architecture(self) -> "NetworkConfig":
        height, width = self.input_size
        if not (is_power_of_two(height) and is_power_of_two(width)):
            raise ValueError(f"input_size must be powers of two, got {self.input_size}")
        if height % 2**self.depth or width % 2**self.depth:
            raise ValueError(f"input_size {self.input_size} is not divisible by 2**depth = {2**self.depth}")
        if self.kernel_size % 2 == 0:
            raise ValueError(f"kernel_size must be odd for 'same' padding, got {self.kernel_size}")
        low, high = DROPOUT_BAND
        if not self.allow_any_dropout and self.dropout_rate != 0 and not low <= self.dropout_rate <= high:
            raise ValueError(
                f"dropout_rate {self.dropout_rate} is outside [{low}, {high}]; set allow_any_dropout to override"
            )
        if self.output_softmax and self.output_channels == 1:
            raise ValueError("output_softmax over a single output channel is constant 1")
        return self

    def stage_filters(self, stage: int) -> int:
        return self.base_filters * 2**stage

    @property
    def bottleneck_channels(self) -> int:
        return self.bottleneck_filters or self.stage_filters(self.depth)

    def resolution(self, level: int) -> tuple[int, int]:
        """Spatial size after ``level`` poolings."""
        return self.input_size[0] // 2**level, self.input_size[1] // 2**level

    def skip_channels(self, stage: int) -> int:
        if self.skip_source == "pre_pool":
            return self.stage_filters(stage)
        return self.input_channels if stage == 0 else self.stage_filters(stage - 1)

    @property
    def fingerprint(self) -> str:
        payload = self.model_dump_json().encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class ConvParams:
    kernel: Parameter
    bias: Parameter


@dataclass
class NormParams:
    gain: Parameter
    shift: Parameter
    groups: int


@dataclass
class SpectralWeights:
    """Learnable complex mixing tensor R over the retained modes of one resolution."""
    R: Parameter
    rows: np.ndarray
    cols: np.ndarray
    resolution: tuple[int, int]

    @property
    def c_in(self) -> int:
        return self.R.shape[2]

    @property
    def c_out(self) -> int:
        return self.R.shape[3]


@dataclass
class EncoderBlock:
    conv1: ConvParams
    norm1: NormParams
    conv2: ConvParams
    norm2: NormParams
    dropout_rate: float
    spectral: SpectralWeights | None


@dataclass
class BottleneckBlock:
    conv1: ConvParams
    conv2: ConvParams
    norm: NormParams
    dropout_rate: float
    spectral: SpectralWeights | None


@dataclass
class DecoderBlock:
    upconv: ConvParams
    conv1: ConvParams
    conv2: ConvParams
    norm: NormParams
    dropout_rate: float
    spectral: SpectralWeights | None


@dataclass
class ModelState:
    config: NetworkConfig
    encoders: list[EncoderBlock]
    bottleneck: BottleneckBlock
    decoders: list[DecoderBlock]
    head: ConvParams
    metadata: dict = field(default_factory=dict)

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint

    def named_parameters(self) -> Iterator[tuple[str, Parameter]]:
        """Every Parameter in a fixed order (encoders, bottleneck, decoders, head)."""
        seen: set[int] = set()
        for holder in [*self.encoders, self.bottleneck, *self.decoders, self.head]:
            for param in _parameters_of(holder):
                if id(param) not in seen:
                    seen.add(id(param))
                    yield param.name, param

    def parameters(self) -> list[Parameter]:
        return [param for _, param in self.named_parameters()]

    def conv_kernels(self) -> list[Parameter]:
        return [param for name, param in self.named_parameters() if name.endswith(".kernel")]

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.zero_grad()

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: param.value.copy() for name, param in self.named_parameters()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(snapshot))
        if missing:
            raise KeyError(f"Snapshot lacks parameters: {missing[:5]}")
        for name, param in params.items():
            param.value = snapshot[name].copy()


def _parameters_of(holder) -> Iterator[Parameter]:
    if isinstance(holder, Parameter):
        yield holder
    elif isinstance(holder, ConvParams):
        yield holder.kernel
        yield holder.bias
    elif isinstance(holder, NormParams):
        yield holder.gain
        yield holder.shift
    elif isinstance(holder, SpectralWeights):
        yield holder.R
    elif holder is None or isinstance(holder, (int, float)):
        return
    else:
        for value in vars(holder).values():
            if isinstance(value, (Parameter, ConvParams, NormParams, SpectralWeights)):
                yield from _parameters_of(value)
