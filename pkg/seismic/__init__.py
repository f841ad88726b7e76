"""Seismic forward modelling, synthetic datasets and the sparse-spike baseline."""
from .forward import (
    add_noise_snr,
    impedance_from_reflectivity,
    impedance_from_v_rho,
    measure_snr_db,
    reflectivity_from_impedance,
    ricker_wavelet,
    synthesize_section,
    synthesize_trace,
)
from .generator import generate_dataset, generate_section
from .models import DatasetSpec, ImpedanceSection, ReflectivitySection, TraceSection, Wavelet, WaveletSpec
from .sparse import BpiConfig, ConvOperator, fista_solve, invert_section, ista_solve, objective, select_chi, soft_threshold

__all__ = [
    "add_noise_snr",
    "impedance_from_reflectivity",
    "impedance_from_v_rho",
    "measure_snr_db",
    "reflectivity_from_impedance",
    "ricker_wavelet",
    "synthesize_section",
    "synthesize_trace",
    "generate_dataset",
    "generate_section",
    "DatasetSpec",
    "ImpedanceSection",
    "ReflectivitySection",
    "TraceSection",
    "Wavelet",
    "WaveletSpec",
    "BpiConfig",
    "ConvOperator",
    "fista_solve",
    "invert_section",
    "ista_solve",
    "objective",
    "select_chi",
    "soft_threshold",
]
