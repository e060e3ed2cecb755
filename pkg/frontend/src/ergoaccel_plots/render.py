"""Render error-decay figures from ergoaccel CSV series and JSON summaries.

The data source is the experiment CLI's published file formats and nothing
else: a CSV with columns ``N, sqrtN, value, abs_error, theoretical_bound,
log10_abs_error, at_precision_floor`` and a JSON summary whose ``theory``
and ``fit`` objects carry the rate ``xi`` and the x-axis exponent ``a``.
The y-coordinates come from the precomputed ``log10_abs_error`` column;
``abs_error`` itself is an arbitrary-precision decimal string and is never
re-parsed into a machine float.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

from matplotlib.figure import Figure

CSV_COLUMNS = ("N", "sqrtN", "value", "abs_error", "theoretical_bound",
               "log10_abs_error", "at_precision_floor")

DATA_COLOR = "tab:purple"
OVERLAY_COLOR = "tab:orange"


class RenderError(Exception):
    """Input files are missing, malformed, or too thin to plot."""


@dataclass(frozen=True)
class PlotJob:
    """One figure: data series from CSVs, overlay rate from a summary.

    ``csv_paths`` supplies one plotted series per file. The summary fixes
    the x-axis transform N^a and the overlay slope -xi; the overlay line
    is anchored at the first data point of the first series.
    """

    csv_paths: tuple
    summary_path: str
    out_path: str
    title: str | None = None

    def __post_init__(self):
        if not self.csv_paths:
            raise RenderError("at least one CSV path is required")


@dataclass(frozen=True)
class PlotPoint:
    """One rendered row: x = N^a, data and overlay in log10 ordinates."""

    x: float
    log10_error: float
    overlay_log10: float

    @property
    def residual(self) -> float:
        """Natural-log gap between the data point and the overlay line."""
        return (self.log10_error - self.overlay_log10) * math.log(10)


@dataclass(frozen=True)
class SeriesPlot:
    label: str
    points: tuple


@dataclass(frozen=True)
class RenderResult:
    """What the figure actually shows, row by row.

    ``slope`` is the overlay's d(ln error)/dx, i.e. -xi; ``anchor`` is the
    (x, log10 error) pair the line passes through; ``yscale`` is read back
    from the finished axes.
    """

    series: tuple
    slope: float
    exponent_a: float
    anchor: tuple
    yscale: str
    out_path: str


def _parse_float(text: str, column: str, row: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise RenderError(
            f"row {row}: column {column} value {text!r} is not numeric"
        ) from None


def read_error_series(path: str) -> list:
    """Rows of (N, log10_abs_error) that sit above the precision floor.

    The header must match the published schema exactly; rows flagged
    ``at_precision_floor`` (and exact zeros, whose log is -inf) carry
    rounding noise rather than signal and are skipped.
    """
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise RenderError(f"{path}: empty file, no header") from None
            if tuple(header) != CSV_COLUMNS:
                raise RenderError(
                    f"{path}: column schema mismatch: expected "
                    f"{','.join(CSV_COLUMNS)}, got {','.join(header)}")
            rows = []
            for i, row in enumerate(reader, start=1):
                if len(row) != len(CSV_COLUMNS):
                    raise RenderError(
                        f"{path}: row {i} has {len(row)} fields, "
                        f"expected {len(CSV_COLUMNS)}")
                record = dict(zip(CSV_COLUMNS, row))
                extent = _parse_float(record["N"], "N", i)
                if not extent > 0:
                    raise RenderError(f"{path}: row {i}: N must be positive")
                if record["at_precision_floor"] not in ("true", "false"):
                    raise RenderError(
                        f"{path}: row {i}: at_precision_floor must be "
                        f"true or false")
                log10_err = _parse_float(record["log10_abs_error"],
                                         "log10_abs_error", i)
                if record["at_precision_floor"] == "true":
                    continue
                if math.isinf(log10_err):
                    continue
                rows.append((extent, log10_err))
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from None
    return rows


def _summary_number(summary: dict, section: str, key: str):
    block = summary.get(section)
    if not isinstance(block, dict) or key not in block:
        return None
    raw = block[key]
    if raw is None:
        return None
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise RenderError(
            f"summary {section}.{key} value {raw!r} is not numeric") from None


def read_summary(path: str) -> tuple:
    """(xi, a) from a JSON summary: the overlay rate and x-axis exponent.

    The predicted rate is preferred; when the theory block carries no xi
    (rates without an explicit constant) the fitted slope stands in.
    """
    try:
        with open(path) as handle:
            summary = json.load(handle)
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise RenderError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(summary, dict):
        raise RenderError(f"{path}: summary must be a JSON object")
    xi = _summary_number(summary, "theory", "xi")
    if xi is None:
        xi = _summary_number(summary, "fit", "slope")
    if xi is None:
        raise RenderError(
            f"{path}: neither theory.xi nor fit.slope is available "
            f"for the overlay")
    exponent_a = _summary_number(summary, "theory", "exponent_a")
    if exponent_a is None:
        exponent_a = _summary_number(summary, "fit", "exponent_a")
    if exponent_a is None or not exponent_a > 0:
        raise RenderError(f"{path}: no positive exponent_a in the summary")
    return xi, exponent_a


def _x_axis_label(exponent_a: float) -> str:
    if exponent_a == 0.5:
        return "sqrt(N)"
    if exponent_a == 1:
        return "N"
    return f"N^{exponent_a:g}"


def render(job: PlotJob) -> RenderResult:
    """Draw the figure and return the rendered-data table.

    Every series is plotted as log10(error) against x = N^a on a
    logarithmic y-axis; the overlay line starts at the first point of the
    first series and falls with slope -xi per unit x. The output format
    follows the file extension.
    """
    xi, exponent_a = read_summary(job.summary_path)
    series_rows = []
    for path in job.csv_paths:
        rows = read_error_series(path)
        if len(rows) < 2:
            raise RenderError(
                f"{path}: need at least 2 rows above the precision floor, "
                f"got {len(rows)}")
        label = os.path.splitext(os.path.basename(path))[0]
        series_rows.append((label, rows))

    anchor_n, anchor_log10 = series_rows[0][1][0]
    anchor_x = anchor_n ** exponent_a
    slope_log10 = -xi / math.log(10)

    series = []
    for label, rows in series_rows:
        points = tuple(
            PlotPoint(
                x=extent ** exponent_a,
                log10_error=log10_err,
                overlay_log10=anchor_log10
                + slope_log10 * (extent ** exponent_a - anchor_x),
            )
            for extent, log10_err in rows)
        series.append(SeriesPlot(label=label, points=points))

    fig = Figure(figsize=(7, 5))
    ax = fig.add_subplot()
    ax.set_yscale("log")
    for plot in series:
        xs = [p.x for p in plot.points]
        # 10**log10_error stays in float range for every value above the
        # precision floor at the mantissa widths the CLI runs at.
        ys = [10.0 ** p.log10_error for p in plot.points]
        ax.plot(xs, ys, marker="o", linestyle="-", color=DATA_COLOR,
                label=plot.label)
    first = series[0].points
    overlay_x = [p.x for p in first]
    overlay_y = [10.0 ** p.overlay_log10 for p in first]
    ax.plot(overlay_x, overlay_y, linestyle="--", color=OVERLAY_COLOR,
            label=f"exp({-xi:.5g} x) overlay")
    ax.set_xlabel(_x_axis_label(exponent_a))
    ax.set_ylabel("absolute error")
    if job.title:
        ax.set_title(job.title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    yscale = ax.get_yscale()
    try:
        fig.savefig(job.out_path, bbox_inches="tight")
    except (OSError, ValueError) as exc:
        raise RenderError(f"cannot write {job.out_path}: {exc}") from None

    return RenderResult(series=tuple(series), slope=-xi,
                        exponent_a=exponent_a,
                        anchor=(anchor_x, anchor_log10),
                        yscale=yscale, out_path=job.out_path)
