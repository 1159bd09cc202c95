"""JSON interchange for channels, snapshots, datasets, and extractions.

All records are versioned dicts with a ``kind`` tag so files are
self-describing:

* ``time_domain`` — carrier + clusters (delay, subpath gains and AoDs).
* ``ofdm`` — carrier + dense complex matrix, split into re/im lists.
* ``snapshot`` — an uplink/downlink pair of time-domain records plus their
  sample times.
* ``dataset`` (manifest) — the generating scenario config and file layout;
  snapshot files live at ``set_XXXX/snap_XXXX.json`` next to it.
* ``extraction`` — one snapshot's extracted clusters and residual trace.

Complex numbers are stored as separate real/imaginary floats; Python floats
round-trip exactly through ``json``, so write -> read is bit-faithful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import CarrierConfig, Cluster, OfdmChannel, Subpath, TimeDomainChannel
from .exceptions import ConfigError
from .extraction import ClusterExtraction, ExtractionResult
from .scenario import MsSampleSet, ScenarioConfig, Snapshot

__all__ = [
    "FORMAT_VERSION",
    "LoadedSampleSet",
    "carrier_to_obj",
    "carrier_from_obj",
    "channel_to_obj",
    "channel_from_obj",
    "ofdm_to_obj",
    "ofdm_from_obj",
    "snapshot_to_obj",
    "snapshot_from_obj",
    "scenario_config_to_obj",
    "scenario_config_from_obj",
    "extraction_to_obj",
    "extraction_from_obj",
    "reject_unknown_keys",
    "write_json",
    "read_json",
    "write_dataset",
    "read_dataset",
]

FORMAT_VERSION = 1

_SET_DIR = "set_{index:04d}"
_SNAP_FILE = "snap_{index:04d}.json"


@dataclass(frozen=True)
class LoadedSampleSet:
    """A sample set read back from disk: snapshots only (latent state is a
    generator-side concept and is not serialized)."""

    index: int
    snapshots: tuple[Snapshot, ...]


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ConfigError(f"{context}: missing required key {key!r}")
    return obj[key]


def reject_unknown_keys(obj: dict, known: "tuple[str, ...]", context: str) -> None:
    """Raise ``ConfigError`` for keys outside ``known``.  A typo in a
    hand-written JSON file must fail loudly, not silently fall back to a
    default."""
    unknown = sorted(set(obj) - set(known))
    if unknown:
        noun = "key" if len(unknown) == 1 else "keys"
        names = ", ".join(repr(k) for k in unknown)
        raise ConfigError(f"{context}: unknown {noun} {names}; known keys: {', '.join(known)}")


def _check_header(obj: dict, kind: str, context: str) -> None:
    version = _require(obj, "format_version", context)
    if version != FORMAT_VERSION:
        raise ConfigError(f"{context}: unsupported format_version {version!r}")
    actual = _require(obj, "kind", context)
    if actual != kind:
        raise ConfigError(f"{context}: expected kind {kind!r}, found {actual!r}")


def carrier_to_obj(carrier: CarrierConfig) -> dict:
    return {"f_c": carrier.f_c, "f_s": carrier.f_s, "k": carrier.k, "n_bs": carrier.n_bs}


def carrier_from_obj(obj: dict) -> CarrierConfig:
    return CarrierConfig(
        f_c=float(_require(obj, "f_c", "carrier")),
        f_s=float(_require(obj, "f_s", "carrier")),
        k=int(_require(obj, "k", "carrier")),
        n_bs=int(_require(obj, "n_bs", "carrier")),
    )


def channel_to_obj(channel: TimeDomainChannel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "time_domain",
        "carrier": carrier_to_obj(channel.carrier),
        "clusters": [
            {
                "delay": cluster.delay,
                "subpaths": [
                    {"re": sub.gain.real, "im": sub.gain.imag, "aod": sub.aod}
                    for sub in cluster.subpaths
                ],
            }
            for cluster in channel.clusters
        ],
    }


def channel_from_obj(obj: dict) -> TimeDomainChannel:
    _check_header(obj, "time_domain", "channel record")
    clusters = tuple(
        Cluster(
            delay=float(_require(c, "delay", "cluster")),
            subpaths=tuple(
                Subpath(
                    gain=complex(float(s["re"]), float(s["im"])),
                    aod=float(_require(s, "aod", "subpath")),
                )
                for s in _require(c, "subpaths", "cluster")
            ),
        )
        for c in _require(obj, "clusters", "channel record")
    )
    return TimeDomainChannel(
        carrier=carrier_from_obj(_require(obj, "carrier", "channel record")),
        clusters=clusters,
    )


def ofdm_to_obj(channel: OfdmChannel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "ofdm",
        "carrier": carrier_to_obj(channel.carrier),
        "matrix_re": channel.matrix.real.tolist(),
        "matrix_im": channel.matrix.imag.tolist(),
    }


def ofdm_from_obj(obj: dict) -> OfdmChannel:
    _check_header(obj, "ofdm", "ofdm record")
    matrix = np.asarray(_require(obj, "matrix_re", "ofdm record"), dtype=np.float64) + 1j * np.asarray(
        _require(obj, "matrix_im", "ofdm record"), dtype=np.float64
    )
    return OfdmChannel(
        carrier=carrier_from_obj(_require(obj, "carrier", "ofdm record")), matrix=matrix
    )


def snapshot_to_obj(snapshot: Snapshot) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "snapshot",
        "t_ul": snapshot.t_ul,
        "t_dl": snapshot.t_dl,
        "ul": channel_to_obj(snapshot.ul),
        "dl": channel_to_obj(snapshot.dl),
    }


def snapshot_from_obj(obj: dict) -> Snapshot:
    _check_header(obj, "snapshot", "snapshot record")
    return Snapshot(
        t_ul=float(_require(obj, "t_ul", "snapshot record")),
        t_dl=float(_require(obj, "t_dl", "snapshot record")),
        ul=channel_from_obj(_require(obj, "ul", "snapshot record")),
        dl=channel_from_obj(_require(obj, "dl", "snapshot record")),
    )


def scenario_config_to_obj(config: ScenarioConfig) -> dict:
    return {
        "f_ul": config.ul.f_c,
        "f_dl": config.dl.f_c,
        "f_s": config.ul.f_s,
        "k": config.ul.k,
        "n_bs": config.ul.n_bs,
        "n_clusters": config.n_clusters,
        "n_subpaths": config.n_subpaths,
        "n_sample_sets": config.n_sample_sets,
        "snapshots_per_set": config.snapshots_per_set,
        "snapshot_period": config.snapshot_period,
        "processing_delay": config.processing_delay,
        "ms_speed": config.ms_speed,
        "churn_min": config.churn_min,
        "churn_max": config.churn_max,
        "seed": config.seed,
    }


_SCENARIO_CONFIG_KEYS = (
    "f_ul", "f_dl", "f_s", "k", "n_bs",
    "n_clusters", "n_subpaths", "n_sample_sets", "snapshots_per_set",
    "snapshot_period", "processing_delay", "ms_speed",
    "churn_min", "churn_max", "seed",
)


def scenario_config_from_obj(obj: dict) -> ScenarioConfig:
    reject_unknown_keys(obj, _SCENARIO_CONFIG_KEYS, "scenario config")

    def floats(*names):
        return (float(_require(obj, n, "scenario config")) for n in names)

    def ints(*names):
        return (int(_require(obj, n, "scenario config")) for n in names)

    f_ul, f_dl, f_s = floats("f_ul", "f_dl", "f_s")
    k, n_bs = ints("k", "n_bs")
    snapshot_period, processing_delay, ms_speed = floats(
        "snapshot_period", "processing_delay", "ms_speed"
    )
    n_clusters, n_subpaths, n_sample_sets, snapshots_per_set, churn_min, churn_max, seed = ints(
        "n_clusters", "n_subpaths", "n_sample_sets", "snapshots_per_set",
        "churn_min", "churn_max", "seed",
    )
    return ScenarioConfig(
        ul=CarrierConfig(f_c=f_ul, f_s=f_s, k=k, n_bs=n_bs),
        dl=CarrierConfig(f_c=f_dl, f_s=f_s, k=k, n_bs=n_bs),
        n_clusters=n_clusters,
        n_subpaths=n_subpaths,
        n_sample_sets=n_sample_sets,
        snapshots_per_set=snapshots_per_set,
        snapshot_period=snapshot_period,
        processing_delay=processing_delay,
        ms_speed=ms_speed,
        churn_min=churn_min,
        churn_max=churn_max,
        seed=seed,
    )


def extraction_to_obj(result: ExtractionResult, *, set_index: int, snapshot_index: int) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "extraction",
        "set": set_index,
        "snapshot": snapshot_index,
        "clusters": [
            {
                "delay": c.delay,
                "aods": c.aods.tolist(),
                "gains_re": c.gains.real.tolist(),
                "gains_im": c.gains.imag.tolist(),
            }
            for c in result.clusters
        ],
        "residual_norms": list(result.residual_norms),
    }


def extraction_from_obj(obj: dict) -> ExtractionResult:
    _check_header(obj, "extraction", "extraction record")
    clusters = tuple(
        ClusterExtraction(
            delay=float(_require(c, "delay", "extraction cluster")),
            aods=np.asarray(_require(c, "aods", "extraction cluster"), dtype=np.float64),
            gains=np.asarray(c["gains_re"], dtype=np.float64)
            + 1j * np.asarray(c["gains_im"], dtype=np.float64),
        )
        for c in _require(obj, "clusters", "extraction record")
    )
    return ExtractionResult(
        clusters=clusters,
        residual_norms=tuple(float(r) for r in _require(obj, "residual_norms", "extraction record")),
    )


def write_json(path: "Path | str", obj: dict, *, indent: "int | None" = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=indent, sort_keys=True)
        fh.write("\n")


def read_json(path: "Path | str") -> dict:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a JSON object at the top level")
    return obj


def write_dataset(
    sets: "tuple[MsSampleSet, ...]",
    config: ScenarioConfig,
    out_dir: "Path | str",
    *,
    overwrite: bool = False,
) -> Path:
    """Write a dataset directory: ``manifest.json`` plus one snapshot record
    per uplink/downlink pair.  Returns the manifest path."""
    out_dir = Path(out_dir)
    manifest_path = out_dir / "manifest.json"
    if manifest_path.exists() and not overwrite:
        raise FileExistsError(f"refusing to overwrite existing dataset at {manifest_path}")
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "dataset",
        "config": scenario_config_to_obj(config),
        "n_sample_sets": len(sets),
        "snapshots_per_set": len(sets[0].snapshots) if sets else 0,
        "layout": f"{_SET_DIR}/{_SNAP_FILE}",
    }
    write_json(manifest_path, manifest, indent=2)
    for sample_set in sets:
        set_dir = out_dir / _SET_DIR.format(index=sample_set.index)
        for snap_index, snapshot in enumerate(sample_set.snapshots):
            write_json(
                set_dir / _SNAP_FILE.format(index=snap_index), snapshot_to_obj(snapshot)
            )
    return manifest_path


def read_dataset(data_dir: "Path | str") -> tuple[ScenarioConfig, tuple[LoadedSampleSet, ...]]:
    """Read a dataset directory back into memory."""
    data_dir = Path(data_dir)
    manifest = read_json(data_dir / "manifest.json")
    _check_header(manifest, "dataset", "dataset manifest")
    config = scenario_config_from_obj(_require(manifest, "config", "dataset manifest"))
    n_sets = int(_require(manifest, "n_sample_sets", "dataset manifest"))
    n_snaps = int(_require(manifest, "snapshots_per_set", "dataset manifest"))
    sets = []
    for set_index in range(n_sets):
        set_dir = data_dir / _SET_DIR.format(index=set_index)
        snapshots = tuple(
            snapshot_from_obj(read_json(set_dir / _SNAP_FILE.format(index=i)))
            for i in range(n_snaps)
        )
        sets.append(LoadedSampleSet(index=set_index, snapshots=snapshots))
    return config, tuple(sets)
