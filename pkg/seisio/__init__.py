"""Grid files, SEG-Y ingestion, patching, normalization, figures and tables."""
from .gridfile import grid_bytes, grid_from_bytes, read_grid, write_grid
from .images import export_section_image, read_pgm, section_pixels
from .patches import NormStats, PatchIndex, denormalize, extract_patches, normalize, normalize_patches, stitch_patches
from .segy import SegyBinaryHeader, SegyTraceRecord, ibm32_to_real, read_segy, real_to_ibm32, section_from_traces, write_segy
from .tables import (
    read_epoch_log_csv,
    read_metrics_csv,
    read_objective_csv,
    render_comparison_report,
    write_epoch_log_csv,
    write_metrics_csv,
    write_objective_csv,
)

__all__ = [
    "grid_bytes",
    "grid_from_bytes",
    "read_grid",
    "write_grid",
    "export_section_image",
    "read_pgm",
    "section_pixels",
    "NormStats",
    "PatchIndex",
    "denormalize",
    "extract_patches",
    "normalize",
    "normalize_patches",
    "stitch_patches",
    "SegyBinaryHeader",
    "SegyTraceRecord",
    "ibm32_to_real",
    "read_segy",
    "real_to_ibm32",
    "section_from_traces",
    "write_segy",
    "read_epoch_log_csv",
    "read_metrics_csv",
    "read_objective_csv",
    "render_comparison_report",
    "write_epoch_log_csv",
    "write_metrics_csv",
    "write_objective_csv",
]
