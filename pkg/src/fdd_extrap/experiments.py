"""Named experiments: sweep definitions, execution, and CSV output.

An ``ExperimentPlan`` pins everything a run needs — scenario, link budget,
method set, sweep values, train/test split, output directory — so a plan
plus its seed reproduces the output CSV byte for byte.  Sweep points are
independent (each derives its own seeds from the scenario seed and the point
index), which makes them safely parallelizable without changing results.

Every run writes two files into the output directory:

* ``<experiment_id>.csv`` with the fixed columns
  experiment_id, sweep_name, sweep_value, method, n_bs, metric, mean,
  stderr, n  — one row per (sweep value, method, metric);
* ``<experiment_id>.manifest.json`` describing the plan that produced it
  (no timestamps, so reruns are bit-identical).

The eight experiment ids:

========================  =====================================================
r_sweep_perfect           correlation of the genie reconstruction vs the number
                          of strongest subpaths kept per cluster
rq_sweep                  learned-method correlation vs subpaths kept (q = r)
bandwidth_sweep           correlation vs total bandwidth f_s
txpower_sweep             correlation vs uplink pilot power (noise-limited
                          regime sits far below nominal power because the
                          model carries no path loss)
carrier_sweep             correlation vs uplink carrier (duplex gap kept)
guardband_sweep           correlation vs uplink->downlink frequency gap
speed_sweep               correlation vs terminal speed
effective_rate            correlation, spectral efficiency, and overhead-
                          discounted effective rate vs terminal speed
========================  =====================================================
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import CarrierConfig
from .exceptions import ConfigError
from .methods import (
    METHODS,
    LinkBudget,
    MethodPrediction,
    TrainSettings,
    link_budget_from_obj,
    perfect_gains_predictions,
    prediction_correlations,
    prediction_spectral_efficiencies,
    run_method,
    train_settings_from_obj,
)
from .metrics import coherence_block_length, coherence_time, effective_rate
from .records import (
    FORMAT_VERSION,
    reject_unknown_keys,
    scenario_config_from_obj,
    scenario_config_to_obj,
    write_json,
)
from .scenario import ScenarioConfig, generate_scenario

__all__ = [
    "EXPERIMENT_IDS",
    "CSV_COLUMNS",
    "DEFAULT_SWEEPS",
    "ExperimentPlan",
    "ResultRow",
    "split_dataset",
    "run_experiment",
    "plan_to_obj",
    "plan_from_obj",
    "read_result_rows",
]

EXPERIMENT_IDS = (
    "r_sweep_perfect",
    "rq_sweep",
    "bandwidth_sweep",
    "txpower_sweep",
    "carrier_sweep",
    "guardband_sweep",
    "speed_sweep",
    "effective_rate",
)

CSV_COLUMNS = (
    "experiment_id",
    "sweep_name",
    "sweep_value",
    "method",
    "n_bs",
    "metric",
    "mean",
    "stderr",
    "n",
)

_SWEEP_NAMES = {
    "r_sweep_perfect": "r",
    "rq_sweep": "q",
    "bandwidth_sweep": "f_s_hz",
    "txpower_sweep": "ul_tx_power_dbm",
    "carrier_sweep": "f_ul_hz",
    "guardband_sweep": "guard_hz",
    "speed_sweep": "speed_mps",
    "effective_rate": "speed_mps",
}

DEFAULT_SWEEPS = {
    "r_sweep_perfect": (1.0, 2.0, 3.0, 4.0),
    "rq_sweep": (1.0, 2.0, 3.0, 4.0),
    "bandwidth_sweep": (20e6, 50e6, 100e6),
    "txpower_sweep": (-100.0, -90.0, -80.0, -70.0),
    "carrier_sweep": (2.6e9, 5.9e9),
    "guardband_sweep": (0.1e9, 0.3e9, 0.5e9),
    "speed_sweep": (0.0, 1.0, 3.0, 10.0),
    "effective_rate": (3.0 / 3.6, 10.0 / 3.6, 30.0 / 3.6, 120.0 / 3.6),
}


@dataclass(frozen=True)
class ExperimentPlan:
    experiment_id: str
    scenario: ScenarioConfig
    methods: tuple[str, ...] = ("tPG",)
    sweep_values: tuple[float, ...] = ()
    split_fraction: float = 0.25
    out_dir: str = "artifacts"
    link: LinkBudget = field(default_factory=LinkBudget)
    train: TrainSettings = field(default_factory=TrainSettings)

    def __post_init__(self) -> None:
        if self.experiment_id not in EXPERIMENT_IDS:
            raise ConfigError(
                f"unknown experiment_id {self.experiment_id!r}; expected one of {EXPERIMENT_IDS}"
            )
        object.__setattr__(self, "methods", tuple(self.methods))
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected a subset of {METHODS}")
        values = tuple(float(v) for v in self.sweep_values)
        if not values:
            values = DEFAULT_SWEEPS[self.experiment_id]
        object.__setattr__(self, "sweep_values", values)
        if any(not math.isfinite(v) for v in values):
            raise ConfigError(f"sweep_values must all be finite, got {values!r}")
        if not (0.0 < self.split_fraction < 1.0):
            raise ConfigError(f"split_fraction must lie in (0, 1), got {self.split_fraction!r}")
        if self.experiment_id in ("r_sweep_perfect", "rq_sweep"):
            limit = self.scenario.n_subpaths
            bad = [v for v in values if v != int(v) or not (1 <= int(v) <= limit)]
            if bad:
                raise ConfigError(
                    f"{self.experiment_id}: sweep values must be integers in [1, "
                    f"n_subpaths={limit}], got {bad!r}"
                )
        if self.experiment_id == "effective_rate" and self.link.n0_dbm_per_hz == -math.inf:
            raise ConfigError("effective_rate needs a finite noise density to define the SNR")
        if self.experiment_id != "r_sweep_perfect" and not self.methods:
            raise ConfigError(f"{self.experiment_id}: at least one method is required")

    @property
    def sweep_name(self) -> str:
        return _SWEEP_NAMES[self.experiment_id]


@dataclass(frozen=True)
class ResultRow:
    experiment_id: str
    sweep_name: str
    sweep_value: float
    method: str
    n_bs: int
    metric: str
    mean: float
    stderr: float
    n: int


def split_dataset(sets: tuple, fraction: float, seed: int) -> tuple[tuple, tuple]:
    """Deterministically split sample sets into (train, test); ``fraction``
    is the held-out test share.  Both halves keep the original order."""
    if not (0.0 < fraction < 1.0):
        raise ConfigError(f"fraction must lie in (0, 1), got {fraction!r}")
    n = len(sets)
    if n < 2:
        raise ConfigError(f"need at least 2 sample sets to split, got {n}")
    n_test = min(max(int(round(fraction * n)), 1), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    test_indices = set(order[:n_test].tolist())
    train = tuple(s for i, s in enumerate(sets) if i not in test_indices)
    test = tuple(s for i, s in enumerate(sets) if i in test_indices)
    return train, test


def _with_carriers(config: ScenarioConfig, *, f_ul: "float | None" = None,
                   f_dl: "float | None" = None, f_s: "float | None" = None) -> ScenarioConfig:
    def rebuild(carrier: CarrierConfig, f_c: "float | None") -> CarrierConfig:
        return CarrierConfig(
            f_c=f_c if f_c is not None else carrier.f_c,
            f_s=f_s if f_s is not None else carrier.f_s,
            k=carrier.k,
            n_bs=carrier.n_bs,
        )

    return replace(config, ul=rebuild(config.ul, f_ul), dl=rebuild(config.dl, f_dl))


def _point_inputs(plan: ExperimentPlan, value: float) -> tuple[ScenarioConfig, LinkBudget, TrainSettings]:
    """Apply one sweep value to the plan's scenario/link/train settings."""
    eid = plan.experiment_id
    scenario, link, settings = plan.scenario, plan.link, plan.train
    if eid == "rq_sweep":
        settings = replace(settings, q=int(value), r=int(value))
    elif eid == "bandwidth_sweep":
        scenario = _with_carriers(scenario, f_s=value)
    elif eid == "txpower_sweep":
        link = replace(link, ul_tx_power_dbm=value)
    elif eid == "carrier_sweep":
        gap = plan.scenario.dl.f_c - plan.scenario.ul.f_c
        scenario = _with_carriers(scenario, f_ul=value, f_dl=value + gap)
    elif eid == "guardband_sweep":
        scenario = _with_carriers(scenario, f_dl=plan.scenario.ul.f_c + value)
    elif eid in ("speed_sweep", "effective_rate"):
        scenario = replace(scenario, ms_speed=value)
    return scenario, link, settings


def _mean_row(plan: ExperimentPlan, value: float, method: str, metric: str,
              samples: np.ndarray) -> ResultRow:
    samples = np.asarray(samples, dtype=np.float64)
    n = int(samples.size)
    if n == 0:
        raise ConfigError(f"{plan.experiment_id}: no samples for method {method!r}")
    stderr = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ResultRow(
        experiment_id=plan.experiment_id,
        sweep_name=plan.sweep_name,
        sweep_value=float(value),
        method=method,
        n_bs=plan.scenario.ul.n_bs,
        metric=metric,
        mean=float(np.mean(samples)),
        stderr=stderr,
        n=n,
    )


def _method_seed(plan: ExperimentPlan, point_index: int, method_index: int) -> int:
    seq = np.random.SeedSequence([plan.scenario.seed, point_index, method_index])
    return int(seq.generate_state(1)[0])


def _rate_rows(plan: ExperimentPlan, value: float, method: str,
               predictions: "list[MethodPrediction]", scenario: ScenarioConfig,
               link: LinkBudget) -> "list[ResultRow]":
    rho = link.snr_rho(scenario.ul.f_s, scenario.ul.k)
    spec_effs = prediction_spectral_efficiencies(predictions, rho)
    overhead = scenario.ul.n_bs if method == "DL_training" else 0
    block = coherence_block_length(
        link.coherence_bandwidth, coherence_time(scenario.dl.f_c, scenario.ms_speed)
    )
    eff = np.array([effective_rate(s, overhead, block) for s in spec_effs])
    return [
        _mean_row(plan, value, method, "spectral_efficiency", spec_effs),
        _mean_row(plan, value, method, "effective_rate", eff),
    ]


def _point_rows(plan: ExperimentPlan, point_index: int) -> "list[ResultRow]":
    """All rows of one sweep point.  Self-contained so points can run in
    separate processes."""
    value = plan.sweep_values[point_index]
    scenario, link, settings = _point_inputs(plan, value)
    sets = generate_scenario(scenario)
    train_sets, test_sets = split_dataset(sets, plan.split_fraction, plan.scenario.seed)
    rows: "list[ResultRow]" = []
    if plan.experiment_id == "r_sweep_perfect":
        predictions = perfect_gains_predictions(test_sets, scenario, int(value))
        rows.append(
            _mean_row(plan, value, "perfect_gains", "correlation",
                      prediction_correlations(predictions))
        )
        return rows
    for method_index, method in enumerate(plan.methods):
        seed = _method_seed(plan, point_index, method_index)
        run = run_method(method, train_sets, test_sets, scenario, link, settings, seed)
        rows.append(
            _mean_row(plan, value, method, "correlation",
                      prediction_correlations(run.predictions))
        )
        if plan.experiment_id == "effective_rate":
            rows.extend(_rate_rows(plan, value, method, run.predictions, scenario, link))
    return rows


def _point_worker(args: tuple) -> "list[ResultRow]":
    plan, point_index = args
    return _point_rows(plan, point_index)


def _format_float(x: float) -> str:
    return f"{x:.17g}"


def _write_rows_csv(path: Path, rows: "list[ResultRow]") -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.experiment_id,
                    r.sweep_name,
                    _format_float(r.sweep_value),
                    r.method,
                    r.n_bs,
                    r.metric,
                    _format_float(r.mean),
                    _format_float(r.stderr),
                    r.n,
                ]
            )


def read_result_rows(path: "Path | str") -> "list[ResultRow]":
    """Read a result CSV back into rows (used by tests and consumers)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected columns {reader.fieldnames!r}")
        for rec in reader:
            rows.append(
                ResultRow(
                    experiment_id=rec["experiment_id"],
                    sweep_name=rec["sweep_name"],
                    sweep_value=float(rec["sweep_value"]),
                    method=rec["method"],
                    n_bs=int(rec["n_bs"]),
                    metric=rec["metric"],
                    mean=float(rec["mean"]),
                    stderr=float(rec["stderr"]),
                    n=int(rec["n"]),
                )
            )
    return rows


def plan_to_obj(plan: ExperimentPlan) -> dict:
    return {
        "experiment_id": plan.experiment_id,
        "scenario": scenario_config_to_obj(plan.scenario),
        "methods": list(plan.methods),
        "sweep_values": list(plan.sweep_values),
        "split_fraction": plan.split_fraction,
        "out_dir": plan.out_dir,
        "link": {
            "ul_tx_power_dbm": plan.link.ul_tx_power_dbm,
            "dl_tx_power_dbm": plan.link.dl_tx_power_dbm,
            "n0_dbm_per_hz": plan.link.n0_dbm_per_hz,
            "coherence_bandwidth": plan.link.coherence_bandwidth,
        },
        "train": {
            "epochs": plan.train.epochs,
            "batch_size": plan.train.batch_size,
            "lr": plan.train.lr,
            "validation_fraction": plan.train.validation_fraction,
            "q": plan.train.q,
            "r": plan.train.r,
        },
    }


_PLAN_KEYS = (
    "experiment_id", "scenario", "methods", "sweep_values",
    "split_fraction", "out_dir", "link", "train",
)


def plan_from_obj(obj: dict) -> ExperimentPlan:
    reject_unknown_keys(obj, _PLAN_KEYS, "experiment plan")
    if "experiment_id" not in obj or "scenario" not in obj:
        raise ConfigError("experiment plan needs at least experiment_id and scenario")
    return ExperimentPlan(
        experiment_id=obj["experiment_id"],
        scenario=scenario_config_from_obj(obj["scenario"]),
        methods=tuple(obj.get("methods", ("tPG",))),
        sweep_values=tuple(obj.get("sweep_values", ())),
        split_fraction=float(obj.get("split_fraction", 0.25)),
        out_dir=str(obj.get("out_dir", "artifacts")),
        link=link_budget_from_obj(obj.get("link", {})),
        train=train_settings_from_obj(obj.get("train", {})),
    )


def run_experiment(plan: ExperimentPlan, threads: int = 1) -> Path:
    """Run every sweep point and write ``<experiment_id>.csv`` plus
    ``<experiment_id>.manifest.json`` into ``plan.out_dir``.  Returns the
    CSV path.

    ``threads`` > 1 runs sweep points in separate processes; results are
    identical to a serial run because each point's randomness depends only on
    the plan and the point index.
    """
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads!r}")
    jobs = [(plan, i) for i in range(len(plan.sweep_values))]
    if threads == 1 or len(jobs) == 1:
        per_point = [_point_rows(plan, i) for _, i in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            per_point = list(pool.map(_point_worker, jobs))
    rows = [row for point in per_point for row in point]
    out_dir = Path(plan.out_dir)
    csv_path = out_dir / f"{plan.experiment_id}.csv"
    _write_rows_csv(csv_path, rows)
    write_json(
        out_dir / f"{plan.experiment_id}.manifest.json",
        {
            "format_version": FORMAT_VERSION,
            "kind": "experiment",
            "experiment_id": plan.experiment_id,
            "columns": list(CSV_COLUMNS),
            "csv": csv_path.name,
            "plan": plan_to_obj(plan),
        },
        indent=2,
    )
    return csv_path
