"""Command-line interface.

Subcommands cover the full workflow:

* ``generate``   — render a scenario to a dataset directory of channel
                   records.
* ``extract``    — run the frequency-domain greedy extraction over a
                   dataset; writes per-snapshot extraction records and a
                   summary CSV of residual norms per pursuit step.
* ``train``      — train one learned method (CH / tPG / fPG) on a dataset
                   and save the model bundle.
* ``predict``    — apply a saved model to a dataset; writes predicted
                   downlink channels as JSON lines.
* ``evaluate``   — apply a saved model to its held-out split and report the
                   correlation factor per snapshot.
* ``experiment`` — run a named experiment plan end to end, producing the
                   result CSV and manifest.

Progress and diagnostics go to stderr; results and file paths go to stdout.
Configuration problems exit with status 2 and a message naming the failing
stage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channel import OfdmChannel, ofdm_from_time
from .exceptions import ConfigError, ShapeError, TrainingDivergedError
from .experiments import plan_from_obj, run_experiment, split_dataset
from .extraction import AngleGrid, DelayGrid, extract_clusters
from .linksim import ul_ls_estimate, ul_observe
from .methods import (
    LEARNED_METHODS,
    TRAIN_SETTINGS_KEYS,
    LinkBudget,
    TrainSettings,
    apply_model,
    build_features,
    fit_model,
    link_budget_from_obj,
    prediction_correlations,
    train_settings_from_obj,
)
from .nn import load_model, save_model
from .records import (
    extraction_to_obj,
    ofdm_to_obj,
    read_dataset,
    read_json,
    reject_unknown_keys,
    scenario_config_from_obj,
    scenario_config_to_obj,
    write_dataset,
    write_json,
)
from .scenario import default_config, generate_scenario

__all__ = ["main"]


def _status(message: str) -> None:
    print(message, file=sys.stderr)


def _load_scenario_config(path: "str | None", seed: "int | None"):
    config = scenario_config_from_obj(read_json(path)) if path else default_config()
    if seed is not None:
        config = replace(config, seed=seed)
    return config


def _cmd_generate(args: argparse.Namespace) -> int:
    config = _load_scenario_config(args.config, args.seed)
    _status(f"generate: {config.n_sample_sets} sample sets x {config.snapshots_per_set} snapshots")
    sets = generate_scenario(config)
    manifest = write_dataset(sets, config, args.out, overwrite=args.overwrite)
    print(manifest.parent)
    return 0


def _cmd_extract(args: argparse.Namespace) -> int:
    config, sets = read_dataset(args.dataset)
    l = args.clusters if args.clusters is not None else config.n_clusters
    p = args.subpaths if args.subpaths is not None else config.n_subpaths
    link = LinkBudget(ul_tx_power_dbm=args.tx_power_dbm, n0_dbm_per_hz=args.noise_dbm_hz)
    angle_grid = AngleGrid.for_array(config.ul.n_bs)
    delay_grid = DelayGrid.for_carrier(config.ul)
    rng = np.random.default_rng(args.seed)
    out_dir = Path(args.out)
    summary_path = out_dir / "summary.csv"
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["set", "snapshot", "step", "delay", "residual_norm"])
        for sample_set in sets:
            _status(f"extract: set {sample_set.index}")
            for snap_index, snap in enumerate(sample_set.snapshots):
                estimate = ul_ls_estimate(
                    ul_observe(ofdm_from_time(snap.ul), link.ul_pilots(), rng)
                )
                result = extract_clusters(estimate, delay_grid, angle_grid, l, p)
                write_json(
                    out_dir / f"set_{sample_set.index:04d}" / f"snap_{snap_index:04d}.json",
                    extraction_to_obj(result, set_index=sample_set.index, snapshot_index=snap_index),
                )
                for step, (cluster, norm) in enumerate(
                    zip(result.clusters, result.residual_norms)
                ):
                    writer.writerow(
                        [sample_set.index, snap_index, step, f"{cluster.delay:.17g}", f"{norm:.17g}"]
                    )
    print(summary_path)
    return 0


_TRAIN_CONFIG_KEYS = ("method", "dataset", "link", "split_fraction", "seed") + TRAIN_SETTINGS_KEYS


def _cmd_train(args: argparse.Namespace) -> int:
    spec = read_json(args.config)
    reject_unknown_keys(spec, _TRAIN_CONFIG_KEYS, "train config")
    method = spec.get("method")
    if method not in LEARNED_METHODS:
        raise ConfigError(f"train config: method must be one of {LEARNED_METHODS}, got {method!r}")
    dataset_dir = spec.get("dataset")
    if not dataset_dir:
        raise ConfigError("train config: a 'dataset' directory is required")
    config, sets = read_dataset(dataset_dir)
    settings = train_settings_from_obj({k: spec[k] for k in TRAIN_SETTINGS_KEYS if k in spec})
    link = link_budget_from_obj(spec.get("link", {}))
    split_fraction = float(spec.get("split_fraction", 0.25))
    seed = args.seed if args.seed is not None else int(spec.get("seed", 0))
    train_sets, test_sets = split_dataset(sets, split_fraction, config.seed)
    _status(
        f"train: {method} on {len(train_sets)} sets "
        f"({len(test_sets)} held out), {settings.epochs} epochs"
    )
    network, standardizer, history = fit_model(method, train_sets, config, link, settings, seed)
    meta = {
        "method": method,
        "q": settings.q,
        "r": settings.r,
        "epochs": settings.epochs,
        "batch_size": settings.batch_size,
        "lr": settings.lr,
        "validation_fraction": settings.validation_fraction,
        "link": {
            "ul_tx_power_dbm": link.ul_tx_power_dbm,
            "dl_tx_power_dbm": link.dl_tx_power_dbm,
            "n0_dbm_per_hz": link.n0_dbm_per_hz,
            "coherence_bandwidth": link.coherence_bandwidth,
        },
        "split_fraction": split_fraction,
        "seed": seed,
        "scenario": scenario_config_to_obj(config),
        "final_train_mse": history.train_mse[-1],
        "final_val_mse": history.val_mse[-1],
    }
    path = save_model(args.out, network, standardizer, meta)
    _status(
        f"train: final train mse {history.train_mse[-1]:.3e}, "
        f"val mse {history.val_mse[-1]:.3e}"
    )
    print(path)
    return 0


def _load_model_context(model_path: str, dataset_dir: str):
    network, standardizer, meta = load_model(model_path)
    for key in ("method", "q", "r", "link", "split_fraction", "scenario"):
        if key not in meta:
            raise ConfigError(f"{model_path}: model metadata is missing {key!r}")
    config, sets = read_dataset(dataset_dir)
    stored = meta["scenario"]
    for field_name in ("k", "n_bs", "n_clusters"):
        if stored.get(field_name) != scenario_config_to_obj(config)[field_name]:
            raise ConfigError(
                f"dataset {field_name} {scenario_config_to_obj(config)[field_name]!r} does not "
                f"match the model's training scenario ({stored.get(field_name)!r})"
            )
    settings = TrainSettings(q=int(meta["q"]), r=int(meta["r"]))
    link = link_budget_from_obj(meta["link"])
    return network, standardizer, meta, config, sets, settings, link


def _cmd_predict(args: argparse.Namespace) -> int:
    network, standardizer, meta, config, sets, settings, link = _load_model_context(
        args.model, args.dataset
    )
    if args.split == "test":
        _, sets = split_dataset(sets, float(meta["split_fraction"]), config.seed)
    _status(f"predict: {meta['method']} over {len(sets)} sets")
    rng = np.random.default_rng(args.seed)
    features = build_features(meta["method"], sets, config, link, settings, rng)
    predictions = apply_model(network, standardizer, features, config, settings)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for pred in predictions:
            record = {
                "set": pred.set_index,
                "snapshot": pred.snapshot_index,
                "estimate": ofdm_to_obj(OfdmChannel(carrier=config.dl, matrix=pred.estimate)),
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    print(out_path)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    network, standardizer, meta, config, sets, settings, link = _load_model_context(
        args.model, args.dataset
    )
    _, test_sets = split_dataset(sets, float(meta["split_fraction"]), config.seed)
    _status(f"evaluate: {meta['method']} on {len(test_sets)} held-out sets")
    rng = np.random.default_rng(args.seed)
    features = build_features(meta["method"], test_sets, config, link, settings, rng)
    predictions = apply_model(network, standardizer, features, config, settings)
    correlations = prediction_correlations(predictions)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["set", "snapshot", "correlation"])
        for pred, corr in zip(predictions, correlations):
            writer.writerow([pred.set_index, pred.snapshot_index, f"{corr:.17g}"])
    mean = float(np.mean(correlations))
    stderr = float(np.std(correlations, ddof=1) / np.sqrt(len(correlations))) if len(correlations) > 1 else 0.0
    print(f"correlation {mean:.6f} +/- {stderr:.6f} over {len(correlations)} snapshots")
    print(out_path)
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    plan = plan_from_obj(read_json(args.plan))
    if args.out is not None:
        plan = replace(plan, out_dir=args.out)
    if args.seed is not None:
        plan = replace(plan, scenario=replace(plan.scenario, seed=args.seed))
    _status(
        f"experiment: {plan.experiment_id}, {len(plan.sweep_values)} sweep points, "
        f"methods {list(plan.methods)}, threads {args.threads}"
    )
    csv_path = run_experiment(plan, threads=args.threads)
    print(csv_path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdd-extrap",
        description="Uplink-to-downlink channel extrapolation: simulation, "
        "extraction, learning, and experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="render a scenario into a dataset directory")
    p.add_argument("--config", help="scenario config JSON (defaults used when omitted)")
    p.add_argument("--out", required=True, help="dataset directory to create")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--overwrite", action="store_true", help="replace an existing dataset")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("extract", help="greedy extraction over a dataset")
    p.add_argument("--dataset", required=True, help="dataset directory from 'generate'")
    p.add_argument("--out", required=True, help="output directory for extraction records")
    p.add_argument("--clusters", type=int, help="clusters to extract (default: scenario value)")
    p.add_argument("--subpaths", type=int, help="subpaths per cluster (default: scenario value)")
    p.add_argument("--tx-power-dbm", type=float, default=30.0, help="uplink pilot power")
    p.add_argument(
        "--noise-dbm-hz",
        type=float,
        default=-float("inf"),
        help="noise density; default -inf (noiseless uplink)",
    )
    p.add_argument("--seed", type=int, default=0, help="observation noise seed")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("train", help="train a learned method and save the model")
    p.add_argument("--config", required=True, help="training config JSON")
    p.add_argument("--out", required=True, help="model file to write (.npz)")
    p.add_argument("--seed", type=int, help="override the training seed")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to a dataset")
    p.add_argument("--model", required=True, help="model file from 'train'")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="JSONL file of predicted downlink channels")
    p.add_argument("--split", choices=("all", "test"), default="all",
                   help="predict over all sets or only the held-out split")
    p.add_argument("--seed", type=int, default=0, help="observation noise seed")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="correlation of a saved model on its held-out split")
    p.add_argument("--model", required=True, help="model file from 'train'")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="per-snapshot correlation CSV")
    p.add_argument("--seed", type=int, default=0, help="observation noise seed")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("experiment", help="run a named experiment plan")
    p.add_argument("--plan", required=True, help="experiment plan JSON")
    p.add_argument("--out", help="override the plan's output directory")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--threads", type=int, default=1, help="parallel sweep points")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ShapeError, TrainingDivergedError, OSError, ValueError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
