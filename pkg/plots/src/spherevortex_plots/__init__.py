"""Batch figure rendering for spherevortex CSV outputs.

The renderers never recompute any physics: they read the delimited
tables the simulation CLI writes, look columns up by name, and draw.
Styling is pinned so that identical inputs give identical image bytes.
"""

from .figures import (
    FigureError,
    FigureSpec,
    blob_spec,
    plot_blob,
    plot_sweep,
    read_table,
    sweep_spec,
)

__version__ = "0.1.0"

__all__ = [
    "FigureError",
    "FigureSpec",
    "blob_spec",
    "plot_blob",
    "plot_sweep",
    "read_table",
    "sweep_spec",
]
