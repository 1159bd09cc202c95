"""Figure specs: what to plot, from which CSVs, to which file.

A spec names the input CSVs, the x-axis column, the metric to plot on the
y axis, the columns whose values distinguish one plotted series from
another, the axis labels, and the output image path.  Specs are written as
small JSON objects and loaded with :func:`load_spec`:

.. code-block:: json

    {
      "csv_paths": ["artifacts/rq_sweep/rq_sweep.csv"],
      "x_column": "sweep_value",
      "y_metric": "correlation",
      "out_path": "figures/rq_sweep.png",
      "x_label": "retained clusters R",
      "y_label": "correlation factor"
    }

``series_columns`` defaults to ``("method", "n_bs")`` — the grouping every
experiment CSV supports — and the axis labels default to the column and
metric names.  Unknown keys are rejected so a typo fails loudly instead of
silently falling back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from .errors import SpecError

__all__ = ["FigureSpec", "load_spec", "spec_from_obj"]

#: Grouping columns used when a spec does not name its own.
DEFAULT_SERIES_COLUMNS = ("method", "n_bs")


@dataclass(frozen=True)
class FigureSpec:
    """One figure: series of ``y_metric`` against ``x_column``.

    ``csv_paths`` are read in order and their rows concatenated, so a
    figure may combine several experiment runs (e.g. one CSV per antenna
    count).  Every referenced column — ``x_column``, the
    ``series_columns``, plus the fixed ``metric``/``mean``/``stderr``
    triple — must exist in each CSV.
    """

    csv_paths: "tuple[str, ...]"
    x_column: str
    y_metric: str
    out_path: str
    series_columns: "tuple[str, ...]" = DEFAULT_SERIES_COLUMNS
    x_label: str = ""
    y_label: str = ""
    title: str = ""

    def __post_init__(self) -> None:
        if not self.csv_paths:
            raise SpecError("csv_paths must name at least one CSV file")
        for name in ("x_column", "y_metric", "out_path"):
            if not getattr(self, name):
                raise SpecError(f"{name} must be a non-empty string")
        if not self.series_columns:
            raise SpecError("series_columns must name at least one column")
        if len(set(self.series_columns)) != len(self.series_columns):
            raise SpecError(f"series_columns repeats a column: {self.series_columns}")
        if self.x_column in self.series_columns:
            raise SpecError(
                f"x_column {self.x_column!r} cannot also be a series column"
            )


def spec_from_obj(obj: object) -> FigureSpec:
    """Build a :class:`FigureSpec` from a parsed JSON object."""
    if not isinstance(obj, dict):
        raise SpecError(f"figure spec must be a JSON object, got {type(obj).__name__}")
    known = {f.name for f in fields(FigureSpec)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise SpecError(f"unknown figure-spec keys {unknown}; known keys: {sorted(known)}")
    missing = sorted(name for name in ("csv_paths", "x_column", "y_metric", "out_path") if name not in obj)
    if missing:
        raise SpecError(f"figure spec is missing required keys {missing}")

    kwargs: "dict[str, object]" = {}
    paths = obj["csv_paths"]
    if not isinstance(paths, (list, tuple)) or not all(isinstance(p, str) for p in paths):
        raise SpecError("csv_paths must be a list of strings")
    kwargs["csv_paths"] = tuple(paths)
    if "series_columns" in obj:
        cols = obj["series_columns"]
        if not isinstance(cols, (list, tuple)) or not all(isinstance(c, str) for c in cols):
            raise SpecError("series_columns must be a list of strings")
        kwargs["series_columns"] = tuple(cols)
    for name in ("x_column", "y_metric", "out_path", "x_label", "y_label", "title"):
        if name in obj:
            value = obj[name]
            if not isinstance(value, str):
                raise SpecError(f"{name} must be a string, got {type(value).__name__}")
            kwargs[name] = value
    return FigureSpec(**kwargs)  # type: ignore[arg-type]


def load_spec(path: str) -> FigureSpec:
    """Read a figure-spec JSON file."""
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path} is not valid JSON: {exc}") from exc
    return spec_from_obj(obj)
