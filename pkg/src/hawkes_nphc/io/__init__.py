from .events import CSV_HEADER, EventFormat, ingest_events, write_events_csv
from .heatmap import SHADES, render_heatmap, side_by_side
from .matrices import (
    read_manifest,
    read_matrix_csv,
    read_vector_csv,
    write_loss_trace,
    write_manifest,
    write_matrix_csv,
    write_vector_csv,
)

__all__ = [
    "CSV_HEADER",
    "EventFormat",
    "ingest_events",
    "write_events_csv",
    "SHADES",
    "render_heatmap",
    "side_by_side",
    "read_manifest",
    "read_matrix_csv",
    "read_vector_csv",
    "write_loss_trace",
    "write_manifest",
    "write_matrix_csv",
    "write_vector_csv",
]
