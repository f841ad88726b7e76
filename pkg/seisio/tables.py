"""CSV tables (epoch logs, metrics, objective histories) and the Markdown comparison report."""
import csv
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

from jinja2 import Environment

from core.errors import FormatError
from training.models import EpochLog, MetricsRecord

METRIC_COLUMNS = ("method", "snr", "mae", "mse", "ssim", "r2")
EPOCH_COLUMNS = ("epoch", "train_loss", "val_loss", "mae", "mse", "ssim", "r2", "seconds")

# Published synthetic-noise rows: (mae, mse, ssim) per SNR label.
REFERENCE_ROWS: dict[str, dict[str, tuple[float, float, float]]] = {
    "OrthoSeisnet": {
        "snr0": (0.043, 0.005, 0.991),
        "snr10": (0.083, 0.012, 0.855),
        "snr20": (0.112, 0.021, 0.803),
        "snr30": (0.134, 0.032, 0.772),
    },
    "Unet": {
        "snr0": (2.43, 3.12, 0.623),
        "snr10": (2.74, 3.331, 0.602),
        "snr20": (3.15, 3.56, 0.542),
        "snr30": (3.52, 3.89, 0.511),
    },
}

REPORT_TEMPLATE = """# Comparison report: {{ name }}

## Measured

| Method | SNR | MAE | MSE | SSIM | R2 |
|---|---|---|---|---|---|
{% for row in rows -%}
| {{ row.method }} | {{ row.snr }} | {{ "%.5f"|format(row.mae) }} | {{ "%.5f"|format(row.mse) }} | {{ "%.4f"|format(row.ssim) }} | {{ "%.4f"|format(row.r2) }} |
{% endfor %}
{% if baseline_chi is not none -%}
Basis-pursuit baseline chi: {{ "%.6e"|format(baseline_chi) }}
{% endif %}
{% if improvements %}
## Improvement of {{ candidate }} over {{ reference }} (percent, positive is better)

| SNR | MAE | MSE | SSIM | R2 |
|---|---|---|---|---|
{% for snr, values in improvements.items() -%}
| {{ snr }} | {{ "%.1f"|format(values.mae) }} | {{ "%.1f"|format(values.mse) }} | {{ "%.1f"|format(values.ssim) }} | {{ "%.1f"|format(values.r2) }} |
{% endfor %}
{% endif %}
## Published reference values (full-scale synthetic benchmark, not reproduced here)

| Method | SNR | MAE | MSE | SSIM |
|---|---|---|---|---|
{% for method, by_snr in published.items() -%}
{% for snr, values in by_snr.items() -%}
| {{ method }} | {{ snr }} | {{ values[0] }} | {{ values[1] }} | {{ values[2] }} |
{% endfor -%}
{% endfor %}
"""


def _fmt(value: float) -> str:
    return repr(float(value))


def _open_for_write(path: str | Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", newline="", encoding="utf-8")


def write_epoch_log_csv(logs: Iterable[EpochLog], path: str | Path) -> Path:
    with _open_for_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(EPOCH_COLUMNS)
        for log in logs:
            writer.writerow([log.epoch] + [_fmt(getattr(log, column)) for column in EPOCH_COLUMNS[1:]])
    return Path(path)


def read_epoch_log_csv(path: str | Path) -> list[EpochLog]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return [EpochLog(**row) for row in csv.DictReader(handle)]


def write_metrics_csv(rows: Sequence[tuple[str, str, MetricsRecord]], path: str | Path) -> Path:
    """One row per (method, SNR label)."""
    with _open_for_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(METRIC_COLUMNS)
        for method, snr, record in rows:
            writer.writerow([method, snr] + [_fmt(getattr(record, column)) for column in METRIC_COLUMNS[2:]])
    return Path(path)


def read_metrics_csv(path: str | Path) -> list[tuple[str, str, MetricsRecord]]:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != METRIC_COLUMNS:
            raise FormatError(f"{path} has columns {reader.fieldnames}, expected {list(METRIC_COLUMNS)}")
        for row in reader:
            values = {column: float(row[column]) for column in METRIC_COLUMNS[2:]}
            if not all(math.isfinite(value) for value in values.values()):
                raise FormatError(f"Non-finite metric in {path}: {row}")
            rows.append((row["method"], row["snr"], MetricsRecord(**values)))
    return rows


def write_objective_csv(histories: Sequence[Sequence[float]], path: str | Path) -> Path:
    """Objective value per (trace, iteration), iterations counted from 1."""
    with _open_for_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("trace", "iteration", "objective"))
        for trace, history in enumerate(histories):
            for iteration, value in enumerate(history, start=1):
                writer.writerow((trace, iteration, _fmt(value)))
    return Path(path)


def read_objective_csv(path: str | Path) -> list[list[float]]:
    histories: dict[int, list[float]] = {}
    with Path(path).open(newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            histories.setdefault(int(row["trace"]), []).append(float(row["objective"]))
    return [histories[trace] for trace in sorted(histories)]


def render_comparison_report(
    rows: Sequence[tuple[str, str, MetricsRecord]],
    name: str = "run",
    improvements: dict[str, dict[str, float]] | None = None,
    reference: str = "",
    candidate: str = "",
    baseline_chi: float | None = None,
) -> str:
    template = Environment(autoescape=False, trim_blocks=False).from_string(REPORT_TEMPLATE)
    return template.render(
        name=name,
        rows=[{"method": method, "snr": snr, **record.model_dump()} for method, snr, record in rows],
        improvements=improvements or {},
        reference=reference,
        candidate=candidate,
        baseline_chi=baseline_chi,
        published=REFERENCE_ROWS,
    )
