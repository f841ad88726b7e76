"""Generated-dataset layout on disk and the patch pairs the network trains on."""
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from core.errors import ConfigError, FormatError, ShapeError
from network.models import ModelState
from seisio.gridfile import read_grid
from seisio.patches import extract_patches, normalize_patches, stitch_patches
from training.metrics import predict
from training.models import PatchDataset

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class TargetScaling:
    """Affine map from physical target units into the network's [-1, 1] range."""
    target: str
    offset: float
    scale: float

    def to_network(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.offset) / self.scale

    def to_physical(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.scale + self.offset

    def as_dict(self) -> dict:
        return {"target": self.target, "offset": self.offset, "scale": self.scale}

    @classmethod
    def from_dict(cls, data: dict) -> "TargetScaling":
        try:
            return cls(target=data["target"], offset=float(data["offset"]), scale=float(data["scale"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"Checkpoint metadata has no usable target scaling: {data}") from exc


def load_manifest(data_dir: str | Path) -> dict:
    path = Path(data_dir) / MANIFEST_NAME
    if not path.exists():
        raise ConfigError(f"No generated dataset at {data_dir} (missing {MANIFEST_NAME})")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Manifest {path} is not valid JSON: {exc}") from exc
    sections = manifest.get("sections") if isinstance(manifest, dict) else None
    if not isinstance(sections, list) or not all(isinstance(entry, dict) and "split" in entry for entry in sections):
        raise ConfigError(f"Manifest {path} needs a 'sections' list whose entries each name a 'split'")
    return manifest


def split_entries(manifest: dict, split: str) -> list[dict]:
    try:
        return [entry for entry in manifest["sections"] if entry["split"] == split]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"Manifest has no usable 'sections'/'split' entries: {exc!r}") from exc


def fit_target_scaling(data_dir: str | Path, entries: list[dict], target: str) -> TargetScaling:
    """Dataset-global scaling from the training sections' targets."""
    if not entries:
        raise ShapeError("Cannot fit target scaling without training sections")
    grids = [read_grid(Path(data_dir) / entry[target])[0] for entry in entries]
    if target == "reflectivity":
        peak = max(float(np.abs(grid).max()) for grid in grids)
        return TargetScaling(target, 0.0, peak if peak > 0 else 1.0)
    low = min(float(grid.min()) for grid in grids)
    high = max(float(grid.max()) for grid in grids)
    half_span = (high - low) / 2.0
    return TargetScaling(target, (high + low) / 2.0, half_span if half_span > 0 else 1.0)


def build_patch_dataset(
    data_dir: str | Path,
    entries: list[dict],
    variant: str,
    patch_size: tuple[int, int],
    stride: int | tuple[int, int],
    norm_scheme: str,
    scaling: TargetScaling,
) -> PatchDataset:
    """Input patches of one SNR variant paired with scaled target patches."""
    inputs, targets, sources = [], [], []
    for entry in entries:
        source = f"section_{entry['index']:04d}"
        section, _ = read_grid(Path(data_dir) / entry["inputs"][variant])
        target, _ = read_grid(Path(data_dir) / entry[scaling.target])
        patches, indices = extract_patches(section, patch_size, stride, source=source)
        normalized, _ = normalize_patches(patches, indices, norm_scheme)
        target_patches, _ = extract_patches(target, patch_size, stride, source=source)
        inputs.append(normalized)
        targets.append(scaling.to_network(target_patches))
        sources.extend([source] * len(normalized))
    if not inputs:
        raise ShapeError(f"No sections to build a {variant} patch dataset from")
    return PatchDataset(
        inputs=np.concatenate(inputs).astype(np.float32),
        targets=np.concatenate(targets).astype(np.float32),
        sources=tuple(sources),
    )


def predict_section(model: ModelState, section: np.ndarray, stride: int | None = None, batch_size: int = 8) -> np.ndarray:
    """Patch, normalize, infer, rescale and stitch a whole (time, trace, 1) section."""
    patch_size = tuple(model.config.input_size)
    scaling = TargetScaling.from_dict(model.metadata.get("target_scaling", {}))
    norm_scheme = model.metadata.get("norm_scheme", "minmax_sym")
    patches, indices = extract_patches(section, patch_size, stride or patch_size)
    normalized, indices = normalize_patches(patches, indices, norm_scheme)
    start_time = time.perf_counter()
    outputs = predict(model, normalized.astype(np.float32), batch_size)
    elapsed = time.perf_counter() - start_time
    logger.info(f"[Infer] {len(indices)} patches, {elapsed / len(indices) * 1e3:.2f} ms per patch")
    return stitch_patches(scaling.to_physical(outputs), indices, np.shape(section)[:2] + (outputs.shape[-1],))
