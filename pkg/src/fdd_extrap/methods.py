"""The four downlink-acquisition methods, end to end.

Each method turns a split scenario (training sample sets, test sample sets)
into per-test-snapshot downlink channel estimates:

* ``CH`` — channel-to-channel: an MLP maps the (real-packed, flattened)
  uplink LS estimate straight to the downlink matrix.
* ``tPG`` — time-domain path gains: the true cluster delays and spatial
  coefficients (optionally perturbed by estimation-grade noise) feed the
  per-cluster subpath pursuit; a CNN maps the top-Q uplink gain image to
  downlink gains, and the downlink matrix is rebuilt from the shared
  geometry.
* ``fPG`` — frequency-domain path gains: same as tPG but the geometry and
  gains are themselves extracted from the uplink LS estimate.
* ``DL_training`` — the overhead baseline: downlink pilots plus terminal-side
  LS, no learning.

The gain-image convention for both PG methods is a (2, q, l) real tensor:
axis 0 is re/im, axis 1 the subpath dominance rank, axis 2 the cluster index
in channel (delay) order.  Training targets for the networks are downlink
gains least-squares-fitted on the *extracted* uplink geometry, so labels
stay consistent with what reconstruction will use.

The pieces compose two ways: ``run_method`` does the whole
train-then-evaluate pass from one seed (pilot noise on each pass, network
init, and the training loop each get an independent spawned stream), while
``build_features`` / ``fit_model`` / ``apply_model`` expose the stages
separately so a trained model can be saved and applied later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import OfdmChannel, cluster_coefficient, ofdm_from_time, reconstruct_dl
from .exceptions import ConfigError
from .extraction import (
    AngleGrid,
    DelayGrid,
    ExtractionResult,
    extract_clusters,
    extract_dl_targets,
    extract_from_coefficients,
    select_top_q,
)
from .linksim import (
    PilotConfig,
    complex_noise,
    dbm_to_watt,
    dl_observe_and_estimate,
    noise_variance,
    ul_ls_estimate,
    ul_observe,
)
from .metrics import correlation_factor, spectral_efficiency
from .records import reject_unknown_keys
from .nn import (
    Network,
    Standardizer,
    TrainConfig,
    TrainingHistory,
    build_cnn,
    build_mlp,
    complex_to_real,
    predict,
    real_to_complex,
    train,
)
from .scenario import ScenarioConfig

__all__ = [
    "METHODS",
    "LEARNED_METHODS",
    "LINK_BUDGET_KEYS",
    "TRAIN_SETTINGS_KEYS",
    "LinkBudget",
    "TrainSettings",
    "link_budget_from_obj",
    "train_settings_from_obj",
    "MethodPrediction",
    "MethodRun",
    "Features",
    "build_features",
    "fit_model",
    "apply_model",
    "run_method",
    "perfect_gains_predictions",
    "prediction_correlations",
    "prediction_spectral_efficiencies",
]

METHODS = ("CH", "tPG", "fPG", "DL_training")
LEARNED_METHODS = ("CH", "tPG", "fPG")


@dataclass(frozen=True)
class LinkBudget:
    """Transmit powers and noise density shared by every method."""

    ul_tx_power_dbm: float = 30.0
    dl_tx_power_dbm: float = 30.0
    n0_dbm_per_hz: float = -174.0  # -inf for a noiseless link
    coherence_bandwidth: float = 180e3  # Hz

    def __post_init__(self) -> None:
        for name in ("ul_tx_power_dbm", "dl_tx_power_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite, got {getattr(self, name)!r}")
        if math.isnan(self.n0_dbm_per_hz) or self.n0_dbm_per_hz == math.inf:
            raise ConfigError(
                f"n0_dbm_per_hz must be a real density or -inf, got {self.n0_dbm_per_hz!r}"
            )
        if not (self.coherence_bandwidth > 0 and math.isfinite(self.coherence_bandwidth)):
            raise ConfigError(
                f"coherence_bandwidth must be positive and finite, got {self.coherence_bandwidth!r}"
            )

    def ul_pilots(self) -> PilotConfig:
        return PilotConfig(
            tx_power_dbm=self.ul_tx_power_dbm, n0_dbm_per_hz=self.n0_dbm_per_hz, kind="unit_diag"
        )

    def dl_pilots(self) -> PilotConfig:
        return PilotConfig(
            tx_power_dbm=self.dl_tx_power_dbm, n0_dbm_per_hz=self.n0_dbm_per_hz, kind="dft"
        )

    def gain_noise_variance(self, f_s: float, k: int) -> float:
        """Per-entry variance of uplink LS estimation error — also the noise
        injected on true coefficients by the tPG front-end."""
        return noise_variance(self.n0_dbm_per_hz, f_s, k) / dbm_to_watt(self.ul_tx_power_dbm)

    def snr_rho(self, f_s: float, k: int) -> float:
        """Downlink beamforming SNR: total power over the per-subcarrier
        noise, P / (K * noise_variance)."""
        var = noise_variance(self.n0_dbm_per_hz, f_s, k)
        if var == 0.0:
            raise ConfigError("snr_rho is undefined on a noiseless link (n0 = -inf)")
        return dbm_to_watt(self.dl_tx_power_dbm) / (k * var)


@dataclass(frozen=True)
class TrainSettings:
    """Network-side knobs of the learned methods."""

    epochs: int = 150
    batch_size: int = 32
    lr: float = 1e-3
    validation_fraction: float = 0.1
    q: int = 2  # subpaths kept per cluster (network width)
    r: int = 2  # subpaths used for reconstruction, r <= q

    def __post_init__(self) -> None:
        if not isinstance(self.q, int) or self.q < 1:
            raise ConfigError(f"q must be a positive integer, got {self.q!r}")
        if not isinstance(self.r, int) or not (1 <= self.r <= self.q):
            raise ConfigError(f"r must be an integer in [1, q={self.q}], got {self.r!r}")

    def train_config(self, seed: int = 0) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            validation_fraction=self.validation_fraction,
            seed=seed,
        )


LINK_BUDGET_KEYS = ("ul_tx_power_dbm", "dl_tx_power_dbm", "n0_dbm_per_hz", "coherence_bandwidth")
TRAIN_SETTINGS_KEYS = ("epochs", "batch_size", "lr", "validation_fraction", "q", "r")


def link_budget_from_obj(obj: dict) -> LinkBudget:
    """Build a ``LinkBudget`` from a JSON object; absent keys keep their
    defaults, keys outside ``LINK_BUDGET_KEYS`` are rejected."""
    reject_unknown_keys(obj, LINK_BUDGET_KEYS, "link budget")
    defaults = LinkBudget()
    return LinkBudget(
        ul_tx_power_dbm=float(obj.get("ul_tx_power_dbm", defaults.ul_tx_power_dbm)),
        dl_tx_power_dbm=float(obj.get("dl_tx_power_dbm", defaults.dl_tx_power_dbm)),
        n0_dbm_per_hz=float(obj.get("n0_dbm_per_hz", defaults.n0_dbm_per_hz)),
        coherence_bandwidth=float(obj.get("coherence_bandwidth", defaults.coherence_bandwidth)),
    )


def train_settings_from_obj(obj: dict) -> TrainSettings:
    """Build ``TrainSettings`` from a JSON object; absent keys keep their
    defaults, keys outside ``TRAIN_SETTINGS_KEYS`` are rejected."""
    reject_unknown_keys(obj, TRAIN_SETTINGS_KEYS, "train settings")
    defaults = TrainSettings()
    return TrainSettings(
        epochs=int(obj.get("epochs", defaults.epochs)),
        batch_size=int(obj.get("batch_size", defaults.batch_size)),
        lr=float(obj.get("lr", defaults.lr)),
        validation_fraction=float(obj.get("validation_fraction", defaults.validation_fraction)),
        q=int(obj.get("q", defaults.q)),
        r=int(obj.get("r", defaults.r)),
    )


@dataclass(frozen=True)
class MethodPrediction:
    """One test snapshot's outcome: the true downlink channel and the
    method's estimate of it."""

    set_index: int
    snapshot_index: int
    truth: OfdmChannel
    estimate: np.ndarray  # (n_bs, k) complex

    def correlation(self) -> float:
        return correlation_factor(self.truth, self.estimate)


@dataclass
class MethodRun:
    """Predictions plus training diagnostics (None for DL_training)."""

    method: str
    predictions: "list[MethodPrediction]"
    history: "TrainingHistory | None" = field(default=None)


@dataclass
class Features:
    """One pass of a method's front-end over some sample sets."""

    method: str
    inputs: np.ndarray  # (n, ...) network inputs
    targets: np.ndarray  # (n, dim) network targets
    refs: "list[tuple[int, int]]"  # (set_index, snapshot_index)
    truths: "list[OfdmChannel]"  # true downlink channels
    extractions: "list[ExtractionResult] | None"  # top-q uplink geometry (PG only)


def _snapshots(sets):
    for sample_set in sets:
        for snap_index, snapshot in enumerate(sample_set.snapshots):
            yield sample_set.index, snap_index, snapshot


def _spawn_rngs(seed: int, n: int):
    seqs = np.random.SeedSequence(seed).spawn(n)
    rngs = [np.random.Generator(np.random.PCG64(s)) for s in seqs]
    child_seeds = [int(s.generate_state(1)[0]) for s in seqs]
    return rngs, child_seeds


def _gain_image(result: ExtractionResult, q: int) -> np.ndarray:
    """(2, q, l) real image of the top-q gains, clusters as columns."""
    gains = np.stack([c.gains[:q] for c in result.clusters], axis=1)  # (q, l)
    return complex_to_real(gains)


def _tpg_front_end(snapshot, config: ScenarioConfig, link: LinkBudget,
                   angle_grid: AngleGrid, rng: np.random.Generator) -> ExtractionResult:
    n_bs = config.ul.n_bs
    var = link.gain_noise_variance(config.ul.f_s, config.ul.k)
    coefficients = []
    delays = []
    for cluster in snapshot.ul.clusters:
        coeff = cluster_coefficient(cluster, n_bs)
        if var > 0.0:
            coeff = coeff + complex_noise(rng, (n_bs,), var)
        coefficients.append(coeff)
        delays.append(cluster.delay)
    return extract_from_coefficients(coefficients, delays, angle_grid, config.n_subpaths)


def _fpg_front_end(snapshot, config: ScenarioConfig, link: LinkBudget,
                   delay_grid: DelayGrid, angle_grid: AngleGrid,
                   rng: np.random.Generator) -> ExtractionResult:
    est = ul_ls_estimate(ul_observe(ofdm_from_time(snapshot.ul), link.ul_pilots(), rng))
    return extract_clusters(est, delay_grid, angle_grid, config.n_clusters, config.n_subpaths)


def build_features(method: str, sets, config: ScenarioConfig, link: LinkBudget,
                   settings: TrainSettings, rng: np.random.Generator) -> Features:
    """Run one method's front-end over sample sets, producing network inputs,
    training targets, and everything reconstruction will need."""
    if method == "CH":
        pilot = link.ul_pilots()
        inputs, targets, refs, truths = [], [], [], []
        for set_index, snap_index, snap in _snapshots(sets):
            ul_est = ul_ls_estimate(ul_observe(ofdm_from_time(snap.ul), pilot, rng))
            dl = ofdm_from_time(snap.dl)
            inputs.append(complex_to_real(ul_est.matrix).reshape(-1))
            targets.append(complex_to_real(dl.matrix).reshape(-1))
            refs.append((set_index, snap_index))
            truths.append(dl)
        return Features(method, np.asarray(inputs), np.asarray(targets), refs, truths, None)
    if method in ("tPG", "fPG"):
        angle_grid = AngleGrid.for_array(config.ul.n_bs)
        delay_grid = DelayGrid.for_carrier(config.ul)
        q = settings.q
        inputs, targets, refs, truths, extractions = [], [], [], [], []
        for set_index, snap_index, snap in _snapshots(sets):
            if method == "tPG":
                result = _tpg_front_end(snap, config, link, angle_grid, rng)
            else:
                result = _fpg_front_end(snap, config, link, delay_grid, angle_grid, rng)
            top = select_top_q(result, q)
            dl = ofdm_from_time(snap.dl)
            dl_fit = extract_dl_targets(dl, top, q)
            target_image = complex_to_real(np.stack(dl_fit.gains, axis=1))  # (2, q, l)
            inputs.append(_gain_image(top, q))
            targets.append(target_image.reshape(-1))
            refs.append((set_index, snap_index))
            truths.append(dl)
            extractions.append(top)
        return Features(method, np.asarray(inputs), np.asarray(targets), refs, truths, extractions)
    raise ConfigError(f"no feature front-end for method {method!r}")


def _new_network(method: str, config: ScenarioConfig, settings: TrainSettings, seed: int) -> Network:
    if method == "CH":
        return Network.build(build_mlp(2 * config.ul.n_bs * config.ul.k), seed=seed)
    if method in ("tPG", "fPG"):
        return Network.build(build_cnn(settings.q, config.n_clusters), seed=seed)
    raise ConfigError(f"no network for method {method!r}")


def fit_model(method: str, train_sets, config: ScenarioConfig, link: LinkBudget,
              settings: TrainSettings, seed: int):
    """Train one learned method; returns (network, standardizer, history)."""
    if method not in LEARNED_METHODS:
        raise ConfigError(f"method {method!r} has nothing to train")
    (rng_train, _, _, _), seeds = _spawn_rngs(seed, 4)
    features = build_features(method, train_sets, config, link, settings, rng_train)
    standardizer = Standardizer.fit(features.inputs)
    network = _new_network(method, config, settings, seeds[2])
    _, history = train(
        network,
        standardizer.transform(features.inputs),
        features.targets,
        settings.train_config(seed=seeds[3]),
    )
    return network, standardizer, history


def apply_model(network: Network, standardizer: Standardizer, features: Features,
                config: ScenarioConfig, settings: TrainSettings) -> "list[MethodPrediction]":
    """Turn network outputs on a feature pass into downlink estimates."""
    outputs = predict(network, standardizer.transform(features.inputs))
    predictions = []
    if features.method == "CH":
        n_bs, k = config.ul.n_bs, config.ul.k
        for (si, sj), truth, out in zip(features.refs, features.truths, outputs):
            predictions.append(
                MethodPrediction(set_index=si, snapshot_index=sj, truth=truth,
                                 estimate=real_to_complex(out.reshape(2, n_bs, k)))
            )
        return predictions
    q, l = settings.q, config.n_clusters
    for (si, sj), truth, out, extraction in zip(
        features.refs, features.truths, outputs, features.extractions
    ):
        gains = real_to_complex(out.reshape(2, q, l))  # (q, l)
        rebuilt = reconstruct_dl(
            delays=[c.delay for c in extraction.clusters],
            aods=[c.aods for c in extraction.clusters],
            gains=[gains[:, li] for li in range(l)],
            r=settings.r,
            carrier_dl=config.dl,
        )
        predictions.append(
            MethodPrediction(set_index=si, snapshot_index=sj, truth=truth, estimate=rebuilt.matrix)
        )
    return predictions


def _run_dl_training(test_sets, link: LinkBudget, seed: int) -> MethodRun:
    (rng_test,), _ = _spawn_rngs(seed, 1)
    predictions = []
    pilot = link.dl_pilots()
    for set_index, snap_index, snap in _snapshots(test_sets):
        dl = ofdm_from_time(snap.dl)
        est = dl_observe_and_estimate(dl, pilot, rng_test)
        predictions.append(
            MethodPrediction(set_index=set_index, snapshot_index=snap_index,
                             truth=dl, estimate=est.matrix)
        )
    return MethodRun(method="DL_training", predictions=predictions)


def run_method(method: str, train_sets, test_sets, config: ScenarioConfig,
               link: LinkBudget, settings: TrainSettings, seed: int) -> MethodRun:
    """Run one method over a split scenario and return its test predictions."""
    if method == "DL_training":
        return _run_dl_training(test_sets, link, seed)
    if method not in LEARNED_METHODS:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
    (rng_train, rng_test, _, _), seeds = _spawn_rngs(seed, 4)
    train_features = build_features(method, train_sets, config, link, settings, rng_train)
    standardizer = Standardizer.fit(train_features.inputs)
    network = _new_network(method, config, settings, seeds[2])
    _, history = train(
        network,
        standardizer.transform(train_features.inputs),
        train_features.targets,
        settings.train_config(seed=seeds[3]),
    )
    test_features = build_features(method, test_sets, config, link, settings, rng_test)
    predictions = apply_model(network, standardizer, test_features, config, settings)
    return MethodRun(method=method, predictions=predictions, history=history)


def perfect_gains_predictions(test_sets, config: ScenarioConfig, r: int) -> "list[MethodPrediction]":
    """Genie baseline: rebuild the downlink from its true geometry and true
    gains, keeping only each cluster's r strongest subpaths."""
    predictions = []
    for set_index, snap_index, snap in _snapshots(test_sets):
        dl = ofdm_from_time(snap.dl)
        delays, aods, gains = [], [], []
        for cluster in snap.dl.clusters:
            order = sorted(cluster.subpaths, key=lambda s: -abs(s.gain))
            delays.append(cluster.delay)
            aods.append([s.aod for s in order])
            gains.append([s.gain for s in order])
        rebuilt = reconstruct_dl(delays, aods, gains, r, config.dl)
        predictions.append(
            MethodPrediction(set_index=set_index, snapshot_index=snap_index,
                             truth=dl, estimate=rebuilt.matrix)
        )
    return predictions


def prediction_correlations(predictions: "list[MethodPrediction]") -> np.ndarray:
    return np.array([p.correlation() for p in predictions])


def prediction_spectral_efficiencies(
    predictions: "list[MethodPrediction]", rho: float
) -> np.ndarray:
    return np.array([spectral_efficiency(p.truth, p.estimate, rho) for p in predictions])
