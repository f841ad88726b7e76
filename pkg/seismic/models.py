"""Seismic signal containers and the dataset parameters."""
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.grid import is_power_of_two

ALLOWED_SNR_DB = (None, 30.0, 20.0, 10.0, 0.0)


@dataclass(frozen=True)
class Wavelet:
    samples: np.ndarray
    dt: float
    peak_frequency: float

    @property
    def center(self) -> int:
        return len(self.samples) // 2


@dataclass(frozen=True)
class ImpedanceSection:
    """Acoustic impedance in (m/s)*(g/cc), shaped (time, trace, 1)."""
    grid: np.ndarray
    dt: float


@dataclass(frozen=True)
class ReflectivitySection:
    grid: np.ndarray
    dt: float


@dataclass(frozen=True)
class TraceSection:
    grid: np.ndarray
    dt: float
    snr_db: float | None = None

    @property
    def is_clean(self) -> bool:
        return self.snr_db is None


def snr_label(snr_db: float | None) -> str:
    """File-name tag for an SNR variant: ``clean``, ``snr30``, ``snr0``..."""
    return "clean" if snr_db is None else f"snr{snr_db:g}"


class WaveletSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    peak_frequency: float = Field(default=30.0, gt=0, description="Ricker peak frequency in Hz")
    dt: float = Field(default=0.001, gt=0, description="Sampling interval in seconds")
    length: int = Field(default=81, ge=3, description="Wavelet length in samples (odd)")

    @model_validator(mode="after")
    def _check_wavelet(self) -> "WaveletSpec":
        if self.length % 2 == 0:
            raise ValueError(f"wavelet length must be odd, got {self.length}")
        nyquist = 1.0 / (2.0 * self.dt)
        if self.peak_frequency >= nyquist:
            raise ValueError(f"peak_frequency {self.peak_frequency} Hz must be below Nyquist {nyquist:g} Hz")
        return self


class DatasetSpec(BaseModel):
    """Layered/wedge impedance models and their forward-modelled traces."""
    model_config = ConfigDict(extra="forbid")

    section_shape: tuple[int, int] = Field(default=(64, 64), description="Section size (time samples, traces)")
    patch_size: tuple[int, int] = Field(default=(32, 32), description="Training patch size (powers of two)")
    sample_count: int = Field(default=16, ge=1, description="Total number of generated sections")
    layer_count_range: tuple[int, int] = Field(default=(3, 8), description="Inclusive range of layer counts")
    thin_layer_fraction: float = Field(default=0.3, ge=0, le=1, description="Probability an inner layer is 1-3 samples thick")
    impedance_range: tuple[float, float] = Field(default=(2000.0, 8000.0), description="Layer impedance bounds")
    max_dip: float = Field(default=0.15, ge=0, description="Maximum interface dip in samples per trace")
    wedge_fraction: float = Field(default=0.5, ge=0, le=1, description="Probability a section contains a pinch-out wedge")
    wavelet: WaveletSpec = Field(default_factory=WaveletSpec)
    snr_db_list: list[float | None] = Field(
        default_factory=lambda: list(ALLOWED_SNR_DB),
        description="SNR variants in dB; null is the clean section",
    )
    val_fraction: float = Field(default=0.2, ge=0, lt=1)
    test_fraction: float = Field(default=0.2, ge=0, lt=1)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @field_validator("snr_db_list")
    @classmethod
    def _check_snr_list(cls, value: list[float | None]) -> list[float | None]:
        if not value:
            raise ValueError("snr_db_list must name at least one variant")
        for snr in value:
            if snr not in ALLOWED_SNR_DB:
                raise ValueError(f"SNR {snr} dB is not one of clean/30/20/10/0")
        if len(set(value)) != len(value):
            raise ValueError(f"snr_db_list has duplicates: {value}")
        return value

    @property
    def margin(self) -> int:
        return max(1, self.section_shape[0] // 8)

    @model_validator(mode="after")
    def _check_geometry(self) -> "DatasetSpec":
        height, width = self.patch_size
        if not (is_power_of_two(height) and is_power_of_two(width)):
            raise ValueError(f"patch_size must be powers of two, got {self.patch_size}")
        if self.section_shape[0] < height or self.section_shape[1] < width:
            raise ValueError(f"section_shape {self.section_shape} is smaller than patch_size {self.patch_size}")
        low, high = self.layer_count_range
        if low < 1 or high < low:
            raise ValueError(f"layer_count_range must satisfy 1 <= min <= max, got {self.layer_count_range}")
        available = self.section_shape[0] - 2 * self.margin
        if (high - 1) * 4 > available:
            raise ValueError(
                f"{high} layers do not fit {self.section_shape[0]} time samples; at most {available // 4 + 1}"
            )
        if not 0 < self.impedance_range[0] < self.impedance_range[1]:
            raise ValueError(f"impedance_range must be positive and increasing, got {self.impedance_range}")
        if self.val_fraction + self.test_fraction >= 1:
            raise ValueError("val_fraction + test_fraction must leave room for training sections")
        return self
