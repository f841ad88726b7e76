"""Desk-scale synthetic sections: layered impedance with dip, thin beds and wedges."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from core.rng import RngState
from seismic.forward import add_noise_snr, reflectivity_from_impedance, ricker_wavelet, synthesize_section
from seismic.models import DatasetSpec, ImpedanceSection, ReflectivitySection, TraceSection, Wavelet

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


@dataclass
class GeneratedSection:
    index: int
    split: str
    clean: TraceSection
    reflectivity: ReflectivitySection
    impedance: ImpedanceSection
    noisy: dict[float | None, TraceSection] = field(default_factory=dict)


def wavelet_for(spec: DatasetSpec) -> Wavelet:
    return ricker_wavelet(spec.wavelet.peak_frequency, spec.wavelet.dt, spec.wavelet.length)


def split_counts(sample_count: int, val_fraction: float, test_fraction: float) -> dict[str, int]:
    """Sections per split; val and test each get one section once there are at least three."""
    floor = 1 if sample_count >= 3 else 0
    n_val = max(floor if val_fraction > 0 else 0, int(round(sample_count * val_fraction)))
    n_test = max(floor if test_fraction > 0 else 0, int(round(sample_count * test_fraction)))
    n_train = sample_count - n_val - n_test
    if n_train < 1:
        n_train, n_val, n_test = sample_count, 0, 0
    return {"train": n_train, "val": n_val, "test": n_test}


def split_of(index: int, counts: dict[str, int]) -> str:
    if index < counts["train"]:
        return "train"
    if index < counts["train"] + counts["val"]:
        return "val"
    return "test"


def _layer_impedances(count: int, low: float, high: float, gen: np.random.Generator) -> np.ndarray:
    span = high - low
    values = [gen.uniform(low, high)]
    for _ in range(count - 1):
        step = gen.uniform(0.05, 0.35) * span * gen.choice((-1.0, 1.0))
        if not low <= values[-1] + step <= high:
            step = -step
        values.append(values[-1] + step)
    return np.asarray(values)


def _interface_depths(spec: DatasetSpec, count: int, gen: np.random.Generator) -> np.ndarray:
    """Per-trace interface times shaped (count - 1, traces), non-decreasing down the column."""
    n_time, n_trace = spec.section_shape
    n_interfaces = count - 1
    if n_interfaces == 0:
        return np.zeros((0, n_trace), dtype=np.int64)

    margin = spec.margin
    available = n_time - 2 * margin
    thick_cap = max(4, available // n_interfaces)
    thickness = [
        int(gen.integers(1, 4)) if gen.random() < spec.thin_layer_fraction else int(gen.integers(4, thick_cap + 1))
        for _ in range(n_interfaces - 1)
    ]
    top = margin + int(gen.integers(0, available - sum(thickness)))
    centers = top + np.concatenate([[0], np.cumsum(thickness)]).astype(np.float64)

    traces = np.arange(n_trace) - (n_trace - 1) / 2.0
    dips = gen.uniform(-spec.max_dip, spec.max_dip, size=n_interfaces) if spec.max_dip > 0 else np.zeros(n_interfaces)
    depths = np.rint(centers[:, None] + dips[:, None] * traces[None, :])

    if n_interfaces >= 2 and gen.random() < spec.wedge_fraction:
        # Pinch the layer below interface ``layer`` to zero thickness at one edge.
        layer = int(gen.integers(0, n_interfaces - 1))
        ramp = np.linspace(0.0, 1.0, n_trace)
        if gen.random() < 0.5:
            ramp = ramp[::-1]
        thickness_here = depths[layer + 1] - depths[layer]
        depths[layer + 1] = depths[layer] + np.rint(thickness_here * ramp)

    depths = np.clip(depths, 1, n_time - 1)
    return np.maximum.accumulate(depths, axis=0).astype(np.int64)


def impedance_model(spec: DatasetSpec, rng: RngState) -> ImpedanceSection:
    gen = rng.generator
    n_time, n_trace = spec.section_shape
    low, high = spec.layer_count_range
    count = int(gen.integers(low, high + 1))
    values = _layer_impedances(count, *spec.impedance_range, gen)
    depths = _interface_depths(spec, count, gen)
    times = np.arange(n_time)[:, None]
    layer_index = (depths[:, None, :] <= times[None, :, :]).sum(axis=0)
    return ImpedanceSection(grid=values[layer_index][..., None], dt=spec.wavelet.dt)


def generate_section(
    spec: DatasetSpec, rng: RngState, snr_db: float | None = None
) -> tuple[TraceSection, ReflectivitySection, ImpedanceSection]:
    """One layered section forward-modelled at ``snr_db`` (None for clean)."""
    impedance = impedance_model(spec, rng.child("model"))
    reflectivity = reflectivity_from_impedance(impedance)
    clean = synthesize_section(reflectivity, wavelet_for(spec))
    traces = add_noise_snr(clean, snr_db, rng.child("noise", "clean" if snr_db is None else int(snr_db)))
    return traces, reflectivity, impedance


def _generate_one(spec: DatasetSpec, rng: RngState, index: int, counts: dict[str, int]) -> GeneratedSection:
    section_rng = rng.child("section", index)
    clean, reflectivity, impedance = generate_section(spec, section_rng)
    noisy = {}
    for snr_db in spec.snr_db_list:
        noise_key = "clean" if snr_db is None else int(snr_db)
        noisy[snr_db] = add_noise_snr(clean, snr_db, section_rng.child("noise", noise_key))
    logger.info(f"[Generate] section {index:04d} ({split_of(index, counts)}) with {len(noisy)} SNR variants")
    return GeneratedSection(
        index=index,
        split=split_of(index, counts),
        clean=clean,
        reflectivity=reflectivity,
        impedance=impedance,
        noisy=noisy,
    )


def generate_dataset(spec: DatasetSpec, rng: RngState, threads: int = 1) -> list[GeneratedSection]:
    """All sections of a dataset; the result does not depend on ``threads``."""
    counts = split_counts(spec.sample_count, spec.val_fraction, spec.test_fraction)
    indices = range(spec.sample_count)
    if threads <= 1:
        return [_generate_one(spec, rng, index, counts) for index in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda index: _generate_one(spec, rng, index, counts), indices))
