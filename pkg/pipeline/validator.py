"""Run-directory validator.

Checks that every artifact a command declared exists and parses according
to its type: grid files, checkpoints, CSV tables, JSON, PGM images and
Markdown reports. Pure Python and deterministic.
"""
import csv
import json
import logging
from collections.abc import Iterable
from pathlib import Path
from typing import Any

from core.errors import OrthoseisError
from network.checkpoint import load_checkpoint
from seisio.gridfile import read_grid
from seisio.images import read_pgm

logger = logging.getLogger(__name__)

REQUIRED_FILES = ("config.json",)


def _result(is_valid: bool, reason: str, details: list[Any] | None = None) -> dict[str, Any]:
    """Standardize validation output structure."""
    return {"is_valid": is_valid, "reason": reason, "details": details or []}


def _validate_json(path: Path) -> str:
    json.loads(path.read_text(encoding="utf-8"))
    return f"✅ JSON valid: {path}"


def _validate_csv(path: Path) -> str:
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows or not rows[0]:
        raise ValueError("missing header row")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise ValueError(f"ragged rows with widths {sorted(widths)}")
    return f"✅ CSV valid: {path} ({len(rows) - 1} rows)"


def _validate_grid(path: Path) -> str:
    grid, dt = read_grid(path)
    return f"✅ Grid valid: {path} {grid.shape} dt={dt}"


def _validate_checkpoint(path: Path) -> str:
    model = load_checkpoint(path)
    return f"✅ Checkpoint valid: {path} ({model.fingerprint})"


def _validate_pgm(path: Path) -> str:
    pixels = read_pgm(path)
    return f"✅ Image valid: {path} {pixels.shape}"


def _validate_text(path: Path) -> str:
    if not path.read_text(encoding="utf-8").strip():
        raise ValueError("empty file")
    return f"✅ Text present: {path}"


VALIDATORS = {
    ".json": _validate_json,
    ".csv": _validate_csv,
    ".osgd": _validate_grid,
    ".osn": _validate_checkpoint,
    ".pgm": _validate_pgm,
    ".md": _validate_text,
}


def validate_artifact(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        return _result(False, f"File not found: {path}")
    validator = VALIDATORS.get(path.suffix.lower())
    if validator is None:
        return _result(True, f"Skipped non-validated file: {path}")
    try:
        return _result(True, validator(path))
    except (OrthoseisError, ValueError, OSError) as exc:
        return _result(False, f"Validation failed for {path}: {exc}")


def check_required_files(run_dir: Path) -> dict[str, Any]:
    missing = [name for name in REQUIRED_FILES if not (run_dir / name).exists()]
    if missing:
        return _result(False, f"Missing files: {', '.join(missing)}", details=["Missing files"] + missing)
    return _result(True, f"All required files present in {run_dir}")


def validate_run_directory(run_dir: str | Path, artifacts: Iterable[str | Path] = ()) -> dict[str, Any]:
    """Validate the run layout plus every declared artifact."""
    run_dir = Path(run_dir)
    if not run_dir.exists():
        return _result(False, f"Run directory not found: {run_dir}")

    results = [check_required_files(run_dir), validate_artifact(run_dir / "config.json")]
    results.extend(validate_artifact(path) for path in artifacts)
    for item in results:
        if not item["is_valid"]:
            logger.warning(f"❌ {item['reason']}")
    overall_valid = all(item.get("is_valid", False) for item in results)
    return _result(overall_valid, "Validation completed", details=results)
