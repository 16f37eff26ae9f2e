"""Render simulation CSV tables into PNG or SVG figures.

The contract with the simulation package is the file schemas only:
comma-separated tables with one header row, columns addressed by name.
Rendering never recomputes physics; the only numeric work here is axis
scaling.  All style state that could leak into the output bytes is
pinned, so identical inputs give identical images.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

DPI = 150

# svg ids are salted with a constant instead of a fresh uuid, and text
# stays text (fonttype none) so labels survive into the file verbatim.
_STYLE = {
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": DPI,
    "savefig.dpi": DPI,
    "svg.hashsalt": "spherevortex-plots",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
}

_COLORS = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)
_LINESTYLES = ("-", "--", "-.")


class FigureError(Exception):
    """Bad figure request: unreadable table, unknown column, bad format."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw and where to put it.

    ``y`` may name several columns; every curve of one group shares a
    color and the y columns are told apart by line style.  ``marker``
    optionally names a column holding a per-group event time whose
    first nonempty value is drawn as a vertical line.
    """

    table: str | Path
    x: str
    y: tuple[str, ...]
    group: str
    out: str | Path
    marker: str | None = None
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""


def sweep_spec(table: str | Path, out: str | Path, title: str = "") -> FigureSpec:
    """Stability sweep: max real part of the spectrum against rotation rate."""
    return FigureSpec(
        table=table, x="gamma", y=("max_real_part",), group="a", out=out,
        title=title, xlabel="gamma", ylabel="max real part",
    )


def blob_spec(table: str | Path, out: str | Path, title: str = "") -> FigureSpec:
    """Blob moment series: inertia and support radius per blob, log scale."""
    return FigureSpec(
        table=table, x="t", y=("I", "R"), group="blob", out=out,
        marker="exit_time", title=title, xlabel="t", ylabel="I, R",
    )


def read_table(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Read a delimited table; returns (header, rows) with string cells."""
    p = Path(path)
    if not p.is_file():
        raise FigureError(f"no such table: {p}")
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FigureError(f"empty table: {p}") from None
        rows = [row for row in reader if row]
    return header, rows


def _checked_output(out: str | Path) -> Path:
    p = Path(out)
    if p.suffix.lower() not in (".png", ".svg"):
        raise FigureError(
            f"unsupported image format {p.suffix!r}: use .png or .svg")
    return p


def _column_indices(spec: FigureSpec, header: list[str]) -> dict[str, int]:
    wanted = [spec.x, *spec.y, spec.group]
    if spec.marker is not None:
        wanted.append(spec.marker)
    indices: dict[str, int] = {}
    for name in wanted:
        if name not in header:
            raise FigureError(
                f"missing column {name!r} in {spec.table} "
                f"(header: {','.join(header)})")
        indices[name] = header.index(name)
    return indices


def _float(cell: str) -> float:
    try:
        return float(cell)
    except ValueError:
        return math.nan


def _label_value(raw: str) -> str:
    try:
        return format(float(raw), "g")
    except ValueError:
        return raw


def _grouped(rows: list[list[str]], group_col: int) -> dict[str, list[list[str]]]:
    groups: dict[str, list[list[str]]] = {}
    for row in rows:
        groups.setdefault(row[group_col], []).append(row)
    return groups


def _group_order(keys) -> list[str]:
    try:
        return sorted(keys, key=lambda k: (float(k), k))
    except ValueError:
        return sorted(keys)


def _first_event(bucket: list[list[str]], col: int, name: str) -> float | None:
    for row in bucket:
        cell = row[col].strip()
        if cell:
            try:
                return float(cell)
            except ValueError:
                raise FigureError(f"bad {name} value {cell!r}") from None
    return None


def _load(spec: FigureSpec):
    """Validate the request and return (out, column indices, grouped rows).

    Everything that can fail does so here, before any figure exists.
    """
    out = _checked_output(spec.out)
    header, rows = read_table(spec.table)
    indices = _column_indices(spec, header)
    if not rows:
        raise FigureError(f"empty table: {spec.table}")
    groups = _grouped(rows, indices[spec.group])
    return out, indices, groups


def _draw(spec: FigureSpec, ax, indices, groups, label_fmt) -> None:
    # rows are sorted along x so the image does not depend on row order
    for k, key in enumerate(_group_order(groups)):
        color = _COLORS[k % len(_COLORS)]
        bucket = sorted(groups[key], key=lambda row: _float(row[indices[spec.x]]))
        xs = [_float(row[indices[spec.x]]) for row in bucket]
        for j, ycol in enumerate(spec.y):
            ys = [_float(row[indices[ycol]]) for row in bucket]
            ax.plot(xs, ys, color=color,
                    linestyle=_LINESTYLES[j % len(_LINESTYLES)],
                    marker="o", markersize=3.0, linewidth=1.4,
                    label=label_fmt(ycol, key))
        if spec.marker is not None:
            event = _first_event(bucket, indices[spec.marker], spec.marker)
            if event is not None:
                ax.axvline(event, color=color, linestyle=":", linewidth=1.2,
                           label=label_fmt(spec.marker, key))
    ax.set_xlabel(spec.xlabel or spec.x)
    ax.set_ylabel(spec.ylabel or ", ".join(spec.y))
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()


def _save(fig, out: Path) -> Path:
    # strip the only volatile metadata so reruns are byte-identical
    if out.suffix.lower() == ".svg":
        metadata = {"Date": None}
    else:
        metadata = {"Software": None}
    fig.savefig(out, dpi=DPI, format=out.suffix.lower().lstrip("."),
                metadata=metadata)
    plt.close(fig)
    return out


def plot_sweep(spec: FigureSpec) -> Path:
    """One curve per group value on linear axes; returns the image path."""
    out, indices, groups = _load(spec)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if len(spec.y) == 1:
            label = lambda col, key: f"{spec.group} = {_label_value(key)}"
        else:
            label = lambda col, key: f"{col}, {spec.group} = {_label_value(key)}"
        _draw(spec, ax, indices, groups, label)
        return _save(fig, out)


def plot_blob(spec: FigureSpec) -> Path:
    """Per-group time series on a log y-scale, with optional event lines."""
    out, indices, groups = _load(spec)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        label = lambda col, key: f"{col} ({spec.group} {_label_value(key)})"
        _draw(spec, ax, indices, groups, label)
        ax.set_yscale("log")
        return _save(fig, out)
