"""Turn a figure spec plus result CSVs into plotted series and an image.

The pipeline is deliberately split so each stage is testable on its own:

* :func:`read_rows` — read one CSV, checking that every referenced column
  exists and that the body is non-empty;
* :func:`collect_series` — filter to the requested metric, group rows by
  the series columns, and sort each series along the x axis;
* :func:`render` — draw the series on a matplotlib figure (one errorbar
  line per series);
* :func:`render_to_file` — all of the above plus saving the image.

All validation happens before any drawing, so a failing spec never leaves
a partial image file behind.  Nothing here recomputes a metric: the
``mean`` and ``stderr`` columns are plotted exactly as written by the
experiment runner, which is what makes rendering reproducible — identical
CSV contents yield identical plotted series.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import csv

import matplotlib.pyplot as plt
from matplotlib.figure import Figure

from .errors import DataError, SchemaError
from .figures import FigureSpec

__all__ = ["PlottedSeries", "collect_series", "read_rows", "render", "render_to_file"]

#: Columns every figure needs besides the spec's own x/series columns.
_BASE_COLUMNS = ("metric", "mean", "stderr")


@dataclass(frozen=True)
class PlottedSeries:
    """One line on the figure: the series key and its sorted points."""

    key: "tuple[str, ...]"
    label: str
    x: "tuple[float, ...]"
    y: "tuple[float, ...]"
    yerr: "tuple[float, ...]"


def read_rows(path: str, columns: "tuple[str, ...]") -> "list[dict[str, str]]":
    """Read one CSV, requiring ``columns`` in the header and a non-empty body."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        found = list(reader.fieldnames or [])
        missing = sorted(set(columns) - set(found))
        if missing:
            raise SchemaError(
                f"{path}: missing columns {missing}; expected at least "
                f"{sorted(set(columns))}, found {found}"
            )
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return rows


def _parse_float(value: str, column: str, path_hint: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise DataError(
            f"{path_hint}: column {column!r} value {value!r} is not a number"
        ) from exc


def _series_label(columns: "tuple[str, ...]", key: "tuple[str, ...]") -> str:
    parts = [key[0]] + [f"{col}={val}" for col, val in zip(columns[1:], key[1:])]
    return ", ".join(parts)


def collect_series(spec: FigureSpec) -> "tuple[PlottedSeries, ...]":
    """Read the spec's CSVs and group rows into plotted series.

    Rows are filtered to ``metric == spec.y_metric``; each distinct value
    combination of ``spec.series_columns`` becomes one series, sorted by
    the numeric x value.  Series are returned in sorted key order so the
    legend (and the tuple itself) is stable across runs.
    """
    needed = tuple(dict.fromkeys((spec.x_column, *spec.series_columns, *_BASE_COLUMNS)))
    rows: "list[tuple[str, dict[str, str]]]" = []
    for path in spec.csv_paths:
        rows.extend((path, row) for row in read_rows(path, needed))

    groups: "dict[tuple[str, ...], list[tuple[float, float, float]]]" = {}
    for path, row in rows:
        if row["metric"] != spec.y_metric:
            continue
        key = tuple(row[col] for col in spec.series_columns)
        point = (
            _parse_float(row[spec.x_column], spec.x_column, path),
            _parse_float(row["mean"], "mean", path),
            _parse_float(row["stderr"], "stderr", path),
        )
        groups.setdefault(key, []).append(point)
    if not groups:
        present = sorted({row["metric"] for _, row in rows})
        raise DataError(
            f"no rows with metric {spec.y_metric!r}; metrics present: {present}"
        )

    series = []
    for key in sorted(groups):
        points = sorted(groups[key])
        series.append(
            PlottedSeries(
                key=key,
                label=_series_label(spec.series_columns, key),
                x=tuple(p[0] for p in points),
                y=tuple(p[1] for p in points),
                yerr=tuple(p[2] for p in points),
            )
        )
    return tuple(series)


def render(spec: FigureSpec) -> "tuple[Figure, tuple[PlottedSeries, ...]]":
    """Draw the spec's series; returns the figure and the plotted data.

    The caller owns the figure and should ``plt.close`` it when done.
    """
    series = collect_series(spec)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for line in series:
        ax.errorbar(line.x, line.y, yerr=line.yerr, marker="o", capsize=3, label=line.label)
    ax.set_xlabel(spec.x_label or spec.x_column)
    ax.set_ylabel(spec.y_label or spec.y_metric)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig, series


def render_to_file(spec: FigureSpec) -> "tuple[Path, tuple[PlottedSeries, ...]]":
    """Render the spec and save the image to ``spec.out_path``."""
    fig, series = render(spec)
    try:
        out = Path(spec.out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
    finally:
        plt.close(fig)
    return out, series
