"""Convergence figures for ergoaccel experiment output.

Reads the experiment CLI's CSV error series and JSON summaries and renders
log-scale error-decay plots with the predicted rate overlaid as a straight
line. The only coupling to the computing package is through those two file
formats.
"""

from .render import (
    CSV_COLUMNS,
    PlotJob,
    PlotPoint,
    RenderError,
    RenderResult,
    SeriesPlot,
    read_error_series,
    read_summary,
    render,
)

__all__ = [
    "CSV_COLUMNS",
    "PlotJob",
    "PlotPoint",
    "RenderError",
    "RenderResult",
    "SeriesPlot",
    "read_error_series",
    "read_summary",
    "render",
]
