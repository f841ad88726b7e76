"""Pipeline commands: generate, train, infer, baseline, evaluate and the full experiment.

Every command takes a ``RunContext`` and returns the list of artifact paths
it wrote, which the runner hands to the run-directory validator.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from core.errors import ConfigError, FormatError, ShapeError
from core.grid import precision
from core.rng import ALGORITHM, RngState
from network.checkpoint import load_checkpoint, save_checkpoint
from network.orthoseisnet import init_params, param_count
from pipeline.config import RunConfig
from pipeline.datasets import (
    build_patch_dataset,
    fit_target_scaling,
    load_manifest,
    predict_section,
    split_entries,
)
from seismic.forward import impedance_from_reflectivity, measure_snr_db, ricker_wavelet
from seismic.generator import generate_dataset, split_counts
from seismic.models import ReflectivitySection, TraceSection, snr_label
from seismic.sparse import ConvOperator, invert_section, select_chi
from seisio.gridfile import read_grid, write_grid
from seisio.images import export_section_image
from seisio.tables import render_comparison_report, write_epoch_log_csv, write_metrics_csv, write_objective_csv
from training.metrics import evaluate_arrays, percent_improvement
from training.trainer import fit

logger = logging.getLogger(__name__)

ORTHOSEISNET = "OrthoSeisnet"
PLAIN_UNET = "plain-unet"
BASELINE = "BPI"
BASELINE_CHI_NAME = "baseline_chi.json"
RUN_SUBDIRS = ("data", "checkpoints", "logs", "figures", "tables", "predictions")


@dataclass(frozen=True)
class RunContext:
    config: RunConfig
    run_dir: Path
    threads: int = 1

    def path(self, *parts: str) -> Path:
        return self.run_dir.joinpath(*parts)

    def prepare(self) -> Path:
        """Create the run layout and echo the resolved config."""
        for name in RUN_SUBDIRS:
            self.path(name).mkdir(parents=True, exist_ok=True)
        config_path = self.path("config.json")
        config_path.write_text(self.config.resolved_json(), encoding="utf-8")
        return config_path


@dataclass(frozen=True)
class EvaluationEntry:
    method: str
    snr: str
    prediction: Path
    target: Path


def _model_tag(ablation: bool) -> str:
    return PLAIN_UNET if ablation else "orthoseisnet"


def cmd_generate(ctx: RunContext) -> list[Path]:
    spec = ctx.config.dataset
    data_dir = ctx.path("data")
    sections = generate_dataset(spec, RngState(spec.seed), threads=ctx.threads)
    artifacts: list[Path] = []
    entries = []
    for section in sections:
        stem = f"{section.split}/section_{section.index:04d}"
        inputs, measured = {}, {}
        # the clean variant is always written; training reads it
        for snr_db, traces in {None: section.clean, **section.noisy}.items():
            label = snr_label(snr_db)
            relative = f"{stem}_{label}.osgd"
            artifacts.append(write_grid(data_dir / relative, traces.grid, traces.dt))
            inputs[label] = relative
            if snr_db is not None:
                measured[label] = round(measure_snr_db(section.clean.grid, traces.grid), 6)
        for kind, grid in (("reflectivity", section.reflectivity), ("impedance", section.impedance)):
            artifacts.append(write_grid(data_dir / f"{stem}_{kind}.osgd", grid.grid, grid.dt))
        entries.append({
            "index": section.index,
            "split": section.split,
            "inputs": inputs,
            "reflectivity": f"{stem}_reflectivity.osgd",
            "impedance": f"{stem}_impedance.osgd",
            "measured_snr_db": measured,
        })

    manifest = {
        "seed": spec.seed,
        "rng": ALGORITHM,
        "section_seeds": {str(s.index): RngState(spec.seed).child_seed("section", s.index) for s in sections},
        "dt": spec.wavelet.dt,
        "dataset": spec.model_dump(mode="json"),
        "splits": split_counts(spec.sample_count, spec.val_fraction, spec.test_fraction),
        "snr_variants": [snr_label(snr) for snr in spec.snr_db_list],
        "sections": entries,
    }
    manifest_path = data_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"💾 Generated {len(sections)} sections into {data_dir}")
    return [manifest_path, *artifacts]


def cmd_train(ctx: RunContext, data_dir: Path | None = None, ablation: bool = False) -> list[Path]:
    cfg = ctx.config
    data_dir = Path(data_dir) if data_dir else ctx.path("data")
    manifest = load_manifest(data_dir)
    train_entries, val_entries = split_entries(manifest, "train"), split_entries(manifest, "val")
    if not val_entries:
        raise ConfigError("Training needs at least one validation section; raise dataset.val_fraction or sample_count")

    patch_size = tuple(cfg.dataset.patch_size)
    stride = cfg.train.patch_stride or max(1, patch_size[0] // 2)
    scaling = fit_target_scaling(data_dir, train_entries, cfg.train.target)
    train_set, val_set = (
        build_patch_dataset(data_dir, entries, "clean", patch_size, stride, cfg.train.norm_scheme, scaling)
        for entries in (train_entries, val_entries)
    )

    network_cfg = cfg.network.model_copy(update={"spectral": not ablation})
    with precision("float32"):
        model = init_params(network_cfg, RngState(cfg.train.seed).child("init"))
    model.metadata = {
        "patch_size": list(patch_size),
        "norm_scheme": cfg.train.norm_scheme,
        "target": cfg.train.target,
        "target_scaling": scaling.as_dict(),
        "variant": _model_tag(ablation),
    }
    tag = _model_tag(ablation)
    logger.info(
        f"[Train] {tag}: {param_count(network_cfg)} parameters, "
        f"{len(train_set)} train / {len(val_set)} val patches"
    )
    with precision("float32"):
        result = fit(model, train_set, val_set, cfg.train, log_wall_clock=cfg.io.log_wall_clock)
    result.model.metadata["best_epoch"] = result.best_epoch
    return [
        save_checkpoint(result.model, ctx.path("checkpoints", f"{tag}_best.osn")),
        save_checkpoint(result.final_model, ctx.path("checkpoints", f"{tag}_final.osn")),
        write_epoch_log_csv(result.logs, ctx.path("logs", f"{tag}_epochs.csv")),
    ]


def _load_matching_checkpoint(cfg: RunConfig, checkpoint: Path):
    model = load_checkpoint(checkpoint)
    expected = cfg.network.model_copy(update={"spectral": model.config.spectral}).fingerprint
    if model.fingerprint != expected:
        raise FormatError(
            f"Checkpoint {checkpoint} fingerprint {model.fingerprint} does not match the configured network ({expected})"
        )
    return model


def cmd_infer(ctx: RunContext, checkpoint: Path, input_grid: Path, output_name: str | None = None) -> list[Path]:
    model = _load_matching_checkpoint(ctx.config, checkpoint)
    section, dt = read_grid(input_grid)
    with precision("float32"):
        prediction = predict_section(model, section, ctx.config.io.infer_stride)
    name = output_name or f"{model.metadata.get('variant', 'model')}_{Path(input_grid).stem}"
    artifacts = [write_grid(ctx.path("predictions", f"{name}.osgd"), prediction, dt)]
    if ctx.config.io.export_images:
        artifacts.append(export_section_image(section, ctx.path("figures", f"{Path(input_grid).stem}_input.pgm")))
        artifacts.append(export_section_image(prediction, ctx.path("figures", f"{name}.pgm")))
    return artifacts


def _baseline_operator(ctx: RunContext, length: int, dt: float) -> ConvOperator:
    spec = ctx.config.dataset.wavelet
    return ConvOperator(ricker_wavelet(spec.peak_frequency, dt, spec.length), length)


def resolve_baseline_chi(ctx: RunContext, op: ConvOperator, data_dir: Path | None) -> tuple[float, Path]:
    """chi from the config, or one grid search over validation traces; recorded in tables/baseline_chi.json."""
    cfg = ctx.config
    if cfg.baseline.chi is not None:
        record = {"chi": cfg.baseline.chi, "source": "config", "candidates": []}
    else:
        if data_dir is None or not (Path(data_dir) / "manifest.json").exists():
            raise ConfigError("baseline.chi is null and there is no generated dataset to select it from")
        manifest = load_manifest(data_dir)
        traces, targets = [], []
        for entry in split_entries(manifest, "val") or split_entries(manifest, "train"):
            section, _ = read_grid(Path(data_dir) / entry["inputs"]["clean"])
            target, _ = read_grid(Path(data_dir) / entry["reflectivity"])
            for column in range(section.shape[1]):
                traces.append(section[:, column, 0].astype(np.float64))
                targets.append(target[:, column, 0].astype(np.float64))
        picks = np.linspace(0, len(traces) - 1, min(cfg.io.baseline_chi_traces, len(traces))).round().astype(int)
        selection = select_chi([traces[i] for i in picks], [targets[i] for i in picks], op, cfg.baseline, ctx.threads)
        logger.info(f"[Baseline] selected chi={selection.chi:.4e}")
        record = {
            "chi": selection.chi,
            "source": "selected",
            "candidates": [{"chi": chi, "mse": mse} for chi, mse in selection.candidates],
        }
    path = ctx.path("tables", BASELINE_CHI_NAME)
    path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
    return record["chi"], path


def run_baseline(ctx: RunContext, section: np.ndarray, dt: float, chi: float):
    """(reflectivity grid, objective histories) of basis-pursuit inversion on every trace."""
    op = _baseline_operator(ctx, section.shape[0], dt)
    bpi = ctx.config.baseline.model_copy(update={"chi": chi})
    histories: list[list[float]] = []
    inverted = invert_section(TraceSection(grid=section, dt=dt), op, bpi, ctx.threads, histories)
    return inverted.grid, histories


def cmd_baseline(ctx: RunContext, input_grid: Path, data_dir: Path | None = None, output_name: str | None = None) -> list[Path]:
    section, dt = read_grid(input_grid)
    chi, chi_path = resolve_baseline_chi(ctx, _baseline_operator(ctx, section.shape[0], dt), data_dir)
    grid, histories = run_baseline(ctx, section, dt, chi)
    name = output_name or f"bpi_{Path(input_grid).stem}"
    artifacts = [
        chi_path,
        write_grid(ctx.path("predictions", f"{name}.osgd"), grid, dt),
        write_objective_csv(histories, ctx.path("tables", f"{name}_objective.csv")),
    ]
    if ctx.config.io.export_images:
        artifacts.append(export_section_image(grid, ctx.path("figures", f"{name}.pgm")))
    return artifacts


def evaluate_entries(entries: list[EvaluationEntry], ctx: RunContext):
    """Metrics rows per (method, SNR); repeated pairs are pooled section by section."""
    if not entries:
        raise ConfigError("evaluate needs at least one prediction/target pair")
    grouped: dict[tuple[str, str], list[tuple[np.ndarray, np.ndarray]]] = {}
    for entry in entries:
        prediction, _ = read_grid(entry.prediction)
        target, _ = read_grid(entry.target)
        if prediction.shape != target.shape:
            raise ShapeError(f"Unpaired files: {entry.prediction} {prediction.shape} vs {entry.target} {target.shape}")
        grouped.setdefault((entry.method, entry.snr), []).append((prediction, target))

    methods = sorted({method for method, _ in grouped})
    levels = sorted({snr for _, snr in grouped})
    missing = [(method, snr) for method in methods for snr in levels if (method, snr) not in grouped]
    if missing:
        raise ConfigError(f"Unpaired evaluation grid; missing (method, snr) rows: {missing}")

    rows = []
    for method in methods:
        for snr in levels:
            pairs = grouped[(method, snr)]
            shapes = {pred.shape for pred, _ in pairs}
            if len(shapes) != 1:
                raise ShapeError(f"{method}/{snr} mixes section shapes {sorted(shapes)}")
            pred = np.stack([pred for pred, _ in pairs])
            target = np.stack([target for _, target in pairs])
            rows.append((method, snr, evaluate_arrays(pred, target, ctx.config.train.ssim)))
    return rows


def cmd_evaluate(ctx: RunContext, entries: list[EvaluationEntry], output: Path | None = None) -> list[Path]:
    rows = evaluate_entries(entries, ctx)
    for method, snr, record in rows:
        logger.info(f"[Evaluate] {method} {snr}: mae={record.mae:.5f} mse={record.mse:.5f} ssim={record.ssim:.4f} r2={record.r2:.4f}")
    return [write_metrics_csv(rows, output or ctx.path("tables", "metrics.csv"))]


def cmd_experiment(ctx: RunContext) -> list[Path]:
    """Generate, train both variants, infer and invert every test section, then tabulate."""
    cfg = ctx.config
    artifacts = cmd_generate(ctx)
    data_dir = ctx.path("data")
    artifacts += cmd_train(ctx, data_dir, ablation=False)
    artifacts += cmd_train(ctx, data_dir, ablation=True)

    manifest = load_manifest(data_dir)
    test_entries = split_entries(manifest, "test")
    if not test_entries:
        raise ConfigError("The experiment needs at least one test section; raise dataset.test_fraction or sample_count")
    target_kind = cfg.train.target
    checkpoints = {
        ORTHOSEISNET: ctx.path("checkpoints", "orthoseisnet_best.osn"),
        PLAIN_UNET: ctx.path("checkpoints", f"{PLAIN_UNET}_best.osn"),
    }
    # one chi for every test section and SNR variant
    bpi_op = _baseline_operator(ctx, cfg.dataset.section_shape[0], float(manifest["dt"]))
    chi, chi_path = resolve_baseline_chi(ctx, bpi_op, data_dir)
    artifacts.append(chi_path)

    entries: list[EvaluationEntry] = []
    for entry in test_entries:
        target_path = data_dir / entry[target_kind]
        for label, relative in entry["inputs"].items():
            input_path = data_dir / relative
            stem = Path(relative).stem
            for method, checkpoint in checkpoints.items():
                name = f"{method}_{stem}"
                artifacts += cmd_infer(ctx, checkpoint, input_path, output_name=name)
                entries.append(EvaluationEntry(method, label, ctx.path("predictions", f"{name}.osgd"), target_path))

            name = f"bpi_{stem}"
            section, dt = read_grid(input_path)
            grid, histories = run_baseline(ctx, section, dt, chi)
            if target_kind == "impedance":
                # tie the integration constant to the true top sample of each trace
                true_impedance, _ = read_grid(target_path)
                grid = impedance_from_reflectivity(ReflectivitySection(grid, dt), true_impedance[0, :, 0]).grid
            artifacts.append(write_grid(ctx.path("predictions", f"{name}.osgd"), grid, dt))
            artifacts.append(write_objective_csv(histories, ctx.path("tables", f"{name}_objective.csv")))
            entries.append(EvaluationEntry(BASELINE, label, ctx.path("predictions", f"{name}.osgd"), target_path))

    metrics_path = ctx.path("tables", "metrics.csv")
    rows = evaluate_entries(entries, ctx)
    artifacts.append(write_metrics_csv(rows, metrics_path))
    by_key = {(method, snr): record for method, snr, record in rows}
    improvements = {
        snr: percent_improvement(by_key[(PLAIN_UNET, snr)], by_key[(ORTHOSEISNET, snr)])
        for _, snr, _ in rows
        if (PLAIN_UNET, snr) in by_key and (ORTHOSEISNET, snr) in by_key
    }
    report = render_comparison_report(
        rows,
        name=ctx.run_dir.name,
        improvements=improvements,
        reference=PLAIN_UNET,
        candidate=ORTHOSEISNET,
        baseline_chi=chi,
    )
    report_path = ctx.path("tables", "report.md")
    report_path.write_text(report, encoding="utf-8")
    artifacts.append(report_path)
    return artifacts
