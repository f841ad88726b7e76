import numpy as np
import pytest

from core.errors import FormatError, ShapeError
from seisio.images import export_section_image, read_pgm, section_pixels
from seisio.tables import (
    read_epoch_log_csv,
    read_metrics_csv,
    read_objective_csv,
    render_comparison_report,
    write_epoch_log_csv,
    write_metrics_csv,
    write_objective_csv,
)
from training.models import EpochLog, MetricsRecord


def test_zero_section_maps_to_mid_gray():
    assert np.all(section_pixels(np.zeros((8, 4))) == 128)


def test_pixels_clip_symmetrically():
    section = np.zeros((10, 10))
    section[0, 0], section[0, 1] = 1.0, -1.0
    pixels = section_pixels(section)
    assert pixels[0, 0] == 255 and pixels[0, 1] == 0
    assert pixels[5, 5] == 128


def test_pgm_export_writes_binary_header(tmp_path):
    section = np.linspace(-1.0, 1.0, 24).reshape(4, 6, 1)
    path = export_section_image(section, tmp_path / "figures" / "section.pgm")
    assert path.read_bytes().startswith(b"P5\n6 4\n255\n")
    np.testing.assert_array_equal(read_pgm(path), section_pixels(section))


def test_read_pgm_rejects_other_files(tmp_path):
    path = tmp_path / "not.pgm"
    path.write_bytes(b"P2\n1 1\n255\n0")
    with pytest.raises(FormatError, match="not a binary PGM"):
        read_pgm(path)


def test_pixels_reject_non_finite():
    with pytest.raises(ShapeError, match="non-finite"):
        section_pixels(np.array([[np.nan]]))


def test_metrics_csv_reloads_exactly(tmp_path):
    rows = [
        ("OrthoSeisnet", "snr10", MetricsRecord(mae=0.1 / 3, mse=1e-7, ssim=0.987654321, r2=-0.25)),
        ("BPI", "clean", MetricsRecord(mae=0.0, mse=0.0, ssim=1.0, r2=1.0)),
    ]
    path = write_metrics_csv(rows, tmp_path / "tables" / "metrics.csv")
    assert path.read_text().splitlines()[0] == "method,snr,mae,mse,ssim,r2"
    assert read_metrics_csv(path) == rows


def test_metrics_csv_rejects_wrong_columns(tmp_path):
    path = tmp_path / "metrics.csv"
    path.write_text("method,snr,mae\nx,clean,0.1\n")
    with pytest.raises(FormatError, match="expected"):
        read_metrics_csv(path)


def test_metrics_csv_rejects_non_finite(tmp_path):
    path = tmp_path / "metrics.csv"
    path.write_text("method,snr,mae,mse,ssim,r2\nx,clean,0.1,0.1,0.5,nan\n")
    with pytest.raises(FormatError, match="Non-finite"):
        read_metrics_csv(path)


def test_epoch_log_csv_reloads(tmp_path):
    logs = [
        EpochLog(epoch=1, train_loss=0.5, val_loss=0.6, mae=0.2, mse=0.1, ssim=0.7, r2=0.3, seconds=1.25),
        EpochLog(epoch=2, train_loss=0.4, val_loss=0.55, mae=0.18, mse=0.09, ssim=0.72, r2=0.35, seconds=1.5),
    ]
    path = write_epoch_log_csv(logs, tmp_path / "epochs.csv")
    assert read_epoch_log_csv(path) == logs


def test_objective_csv_reloads(tmp_path):
    histories = [[3.0, 2.0, 1.5], [0.25]]
    path = write_objective_csv(histories, tmp_path / "objective.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "trace,iteration,objective"
    assert lines[1] == "0,1,3.0"
    assert read_objective_csv(path) == histories


def test_comparison_report_lists_rows_and_published_values():
    rows = [("OrthoSeisnet", "snr0", MetricsRecord(mae=0.05, mse=0.004, ssim=0.9, r2=0.8))]
    improvements = {"snr0": {"mae": 12.5, "mse": 3.0, "ssim": 1.0, "r2": -2.0}}
    report = render_comparison_report(rows, name="demo", improvements=improvements, reference="plain-unet", candidate="OrthoSeisnet")
    assert report.startswith("# Comparison report: demo")
    assert "| OrthoSeisnet | snr0 | 0.05000 | 0.00400 | 0.9000 | 0.8000 |" in report
    assert "Improvement of OrthoSeisnet over plain-unet" in report
    assert "| snr0 | 12.5 | 3.0 | 1.0 | -2.0 |" in report
    assert "| Unet | snr30 | 3.52 | 3.89 | 0.511 |" in report


def test_comparison_report_without_improvements():
    report = render_comparison_report([("BPI", "clean", MetricsRecord(mae=0.1, mse=0.1, ssim=0.5, r2=0.1))])
    assert "Improvement of" not in report
    assert "baseline chi" not in report


def test_comparison_report_records_baseline_chi():
    report = render_comparison_report([("BPI", "clean", MetricsRecord(mae=0.1, mse=0.1, ssim=0.5, r2=0.1))], baseline_chi=0.0125)
    assert "Basis-pursuit baseline chi: 1.250000e-02" in report
