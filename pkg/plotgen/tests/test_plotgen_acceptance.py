"""Acceptance gate for the figure-rendering package.

Two shipped guarantees:

* every result CSV the experiment runner can produce renders into a
  labeled figure without error — exercised by running the real
  ``fdd-extrap experiment`` CLI over every experiment id with a miniature
  scenario, then rendering each CSV through the ``plotgen`` CLI;
* rendering is pure: byte-identical CSV inputs yield identical plotted
  series (and identical image bytes).

The experiment runner is driven only through its public command line and
consumed only through its CSV files — nothing here imports the experiment
package.
"""

import csv
import json
import shutil
import subprocess
import sys

import matplotlib.pyplot as plt
import pytest

from plotgen import FigureSpec, collect_series, load_spec, render, render_to_file
from plotgen.cli import main

MINI_SCENARIO = {
    "f_ul": 2.6e9,
    "f_dl": 2.9e9,
    "f_s": 100e6,
    "k": 8,
    "n_bs": 4,
    "n_clusters": 2,
    "n_subpaths": 2,
    "n_sample_sets": 6,
    "snapshots_per_set": 2,
    "snapshot_period": 40e-3,
    "processing_delay": 5e-3,
    "ms_speed": 1.0,
    "churn_min": 0,
    "churn_max": 1,
    "seed": 7,
}

MINI_TRAIN = {
    "epochs": 2,
    "batch_size": 4,
    "lr": 1e-3,
    "validation_fraction": 0.0,
    "q": 2,
    "r": 2,
}

# id -> (methods, sweep_values, y_metric)
EXPERIMENTS = {
    "r_sweep_perfect": ([], [1, 2], "correlation"),
    "rq_sweep": (["tPG"], [1, 2], "correlation"),
    "bandwidth_sweep": (["tPG"], [50e6, 100e6], "correlation"),
    "txpower_sweep": (["tPG"], [-90.0, -70.0], "correlation"),
    "carrier_sweep": (["tPG"], [2.6e9, 5.9e9], "correlation"),
    "guardband_sweep": (["tPG"], [0.1e9, 0.3e9], "correlation"),
    "speed_sweep": (["DL_training", "tPG"], [0.0, 3.0], "correlation"),
    "effective_rate": (["DL_training"], [10 / 3.6, 40 / 3.6], "effective_rate"),
}


def run_experiment_cli(plan_path):
    exe = shutil.which("fdd-extrap")
    if exe is not None:
        command = [exe, "experiment", "--plan", str(plan_path)]
    else:
        command = [
            sys.executable,
            "-c",
            "import sys; from fdd_extrap.cli import main; sys.exit(main(sys.argv[1:]))",
            "experiment",
            "--plan",
            str(plan_path),
        ]
    return subprocess.run(command, capture_output=True, text=True, check=False)


@pytest.fixture(scope="session")
def experiment_csvs(tmp_path_factory):
    """One result CSV per experiment id, produced by the real CLI."""
    root = tmp_path_factory.mktemp("experiments")
    paths = {}
    for experiment_id, (methods, sweep_values, _) in EXPERIMENTS.items():
        out_dir = root / experiment_id
        plan = {
            "experiment_id": experiment_id,
            "scenario": dict(MINI_SCENARIO),
            "methods": methods,
            "sweep_values": sweep_values,
            "split_fraction": 0.25,
            "out_dir": str(out_dir),
            "train": dict(MINI_TRAIN),
        }
        plan_path = root / f"{experiment_id}.plan.json"
        plan_path.write_text(json.dumps(plan))
        result = run_experiment_cli(plan_path)
        assert result.returncode == 0, (
            f"{experiment_id}: experiment CLI failed\n{result.stderr}"
        )
        csv_path = out_dir / f"{experiment_id}.csv"
        assert csv_path.exists(), f"{experiment_id}: no CSV at {csv_path}"
        paths[experiment_id] = csv_path
    return paths


@pytest.mark.acceptance("renders-every-experiment-csv")
def test_every_experiment_csv_renders_to_a_labeled_figure(experiment_csvs, tmp_path):
    for experiment_id, csv_path in experiment_csvs.items():
        _, _, y_metric = EXPERIMENTS[experiment_id]
        out_path = tmp_path / f"{experiment_id}.png"
        spec_path = tmp_path / f"{experiment_id}.json"
        spec_path.write_text(
            json.dumps(
                {
                    "csv_paths": [str(csv_path)],
                    "x_column": "sweep_value",
                    "y_metric": y_metric,
                    "out_path": str(out_path),
                    "x_label": "sweep value",
                    "y_label": y_metric.replace("_", " "),
                }
            )
        )
        assert main([str(spec_path)]) == 0, f"{experiment_id}: plotgen CLI failed"
        assert out_path.exists() and out_path.stat().st_size > 0

        fig, series = render(load_spec(str(spec_path)))
        try:
            ax = fig.axes[0]
            assert ax.get_xlabel() == "sweep value"
            assert ax.get_ylabel() == y_metric.replace("_", " ")
            legend_texts = [t.get_text() for t in ax.get_legend().get_texts()]
            assert len(legend_texts) == len(series) >= 1
        finally:
            plt.close(fig)
        for line in series:
            assert len(line.x) == len(sorted(set(line.x)))
            assert len(line.y) == len(line.x) == len(line.yerr)


@pytest.mark.acceptance("identical-csv-identical-series")
def test_identical_csv_yields_identical_series(experiment_csvs, tmp_path):
    source = experiment_csvs["speed_sweep"]
    copy_a = tmp_path / "a.csv"
    copy_b = tmp_path / "b.csv"
    copy_a.write_bytes(source.read_bytes())
    copy_b.write_bytes(source.read_bytes())

    def spec_for(csv_path, out_name):
        return FigureSpec(
            csv_paths=(str(csv_path),),
            x_column="sweep_value",
            y_metric="correlation",
            out_path=str(tmp_path / out_name),
        )

    series_a = collect_series(spec_for(copy_a, "a.png"))
    series_b = collect_series(spec_for(copy_b, "b.png"))
    assert series_a == series_b

    # And the stronger statement: the saved images are byte-identical.
    out_a, _ = render_to_file(spec_for(copy_a, "a.png"))
    out_b, _ = render_to_file(spec_for(copy_b, "b.png"))
    assert out_a.read_bytes() == out_b.read_bytes()

    # The CSV really carries what the figure needs (sanity on the schema).
    with open(source, newline="") as handle:
        header = next(csv.reader(handle))
    for column in ("sweep_value", "method", "n_bs", "metric", "mean", "stderr"):
        assert column in header
