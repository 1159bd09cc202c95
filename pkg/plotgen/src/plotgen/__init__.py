"""Figure rendering for experiment result CSV files.

The experiment runner writes one CSV per experiment (schema version 1:
``experiment_id, sweep_name, sweep_value, method, n_bs, metric, mean,
stderr, n``).  This package turns those files into labeled figures — one
line per (method, antenna count) series, with error bars from the
``stderr`` column — without recomputing any metric.

A figure is described by a small JSON *figure spec* (see
:class:`FigureSpec`); the ``plotgen`` command renders one image per spec
file.  Rendering is pure: the plotted series are a function of the CSV
contents and the spec alone, so identical inputs produce identical
figures.
"""

from .errors import DataError, SchemaError, SpecError
from .figures import FigureSpec, load_spec, spec_from_obj
from .render import PlottedSeries, collect_series, read_rows, render, render_to_file

__all__ = [
    "DataError",
    "FigureSpec",
    "PlottedSeries",
    "SchemaError",
    "SpecError",
    "collect_series",
    "load_spec",
    "read_rows",
    "render",
    "render_to_file",
    "spec_from_obj",
]
