"""Synthetic multipath scenario generation.

A scenario is a population of mobile-station "sample sets".  All sets share
one static cluster geometry (delays, AoDs, amplitudes, excess delays,
Doppler angles); each set then

* replaces a random number of clusters (``churn_min..churn_max``) with fresh
  draws — the per-position scattering differences,
* redraws every subpath's phase offset — the per-position small-scale state,
* renormalizes subpath amplitudes so the expected channel energy is
  n_bs * k,

and finally renders a time series of uplink/downlink channel-matrix
snapshots.  Uplink and downlink share all geometry; only the complex subpath
gains differ, through their carrier-frequency dependence:

    gain(f, t) = A * exp(j * (phi0 - 2 pi f tau_ex + 2 pi (f v / c) cos(psi) t))

with A the amplitude, tau_ex the subpath's excess delay, psi its Doppler
angle, and v the terminal speed.  The downlink snapshot lags the uplink one
by the processing delay.  Because the map from uplink to downlink gains is
deterministic given the latent state, perfect extrapolation is information-
theoretically possible; the latents are retained on each sample set so tests
can exercise that oracle.

Randomness is a seeded PCG64 stream per sample set (spawned from the
scenario seed), so generation is reproducible and order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import CarrierConfig, Cluster, Subpath, TimeDomainChannel
from .constants import SPEED_OF_LIGHT
from .exceptions import ConfigError

__all__ = [
    "EXCESS_DELAY_MAX",
    "DECAY_DB_PER_SECOND",
    "ScenarioConfig",
    "SubpathLatent",
    "ClusterLatent",
    "Snapshot",
    "MsSampleSet",
    "default_config",
    "gain_at",
    "draw_cluster",
    "churn_clusters",
    "channel_at",
    "generate_scenario",
]

EXCESS_DELAY_MAX = 40e-9  # s; subpath excess delays are uniform on [0, this)
DECAY_DB_PER_SECOND = 3.0 / 100e-9  # cluster power profile: 3 dB per 100 ns


@dataclass(frozen=True)
class ScenarioConfig:
    """Static description of a scenario; every field is validated."""

    ul: CarrierConfig
    dl: CarrierConfig
    n_clusters: int
    n_subpaths: int
    n_sample_sets: int
    snapshots_per_set: int
    snapshot_period: float  # s between consecutive uplink snapshots
    processing_delay: float  # s between an uplink snapshot and its downlink
    ms_speed: float  # m/s
    churn_min: int
    churn_max: int
    seed: int

    def __post_init__(self) -> None:
        if self.ul.k != self.dl.k:
            raise ConfigError(f"ul.k ({self.ul.k}) must equal dl.k ({self.dl.k})")
        if self.ul.n_bs != self.dl.n_bs:
            raise ConfigError(f"ul.n_bs ({self.ul.n_bs}) must equal dl.n_bs ({self.dl.n_bs})")
        for name in ("n_clusters", "n_subpaths", "n_sample_sets", "snapshots_per_set"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not (self.snapshot_period > 0 and math.isfinite(self.snapshot_period)):
            raise ConfigError(
                f"snapshot_period must be positive and finite, got {self.snapshot_period!r}"
            )
        if not (0 <= self.processing_delay < self.snapshot_period):
            raise ConfigError(
                "processing_delay must satisfy 0 <= delay < snapshot_period, got "
                f"{self.processing_delay!r} vs {self.snapshot_period!r}"
            )
        if not (self.ms_speed >= 0 and math.isfinite(self.ms_speed)):
            raise ConfigError(f"ms_speed must be >= 0 and finite, got {self.ms_speed!r}")
        if not isinstance(self.churn_min, int) or not isinstance(self.churn_max, int):
            raise ConfigError("churn_min and churn_max must be integers")
        if not (0 <= self.churn_min <= self.churn_max <= self.n_clusters):
            raise ConfigError(
                f"need 0 <= churn_min <= churn_max <= n_clusters, got "
                f"({self.churn_min}, {self.churn_max}) with n_clusters={self.n_clusters}"
            )
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")

    @property
    def delay_window(self) -> float:
        """Largest delay representable on both carriers."""
        return min(self.ul.delay_window, self.dl.delay_window)


@dataclass(frozen=True)
class SubpathLatent:
    """Carrier-independent state of one subpath."""

    amplitude: float
    aod: float
    excess_delay: float  # s, sets the frequency response of the gain phase
    doppler_angle: float  # rad, direction of travel relative to this subpath
    phase0: float  # rad, phase at excess_delay 0 and t 0

    def __post_init__(self) -> None:
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"amplitude must be positive and finite, got {self.amplitude!r}")
        if not (-np.pi / 2 <= self.aod < np.pi / 2):
            raise ValueError(f"aod must lie in [-pi/2, pi/2), got {self.aod!r}")
        if not (self.excess_delay >= 0 and math.isfinite(self.excess_delay)):
            raise ValueError(f"excess_delay must be >= 0 and finite, got {self.excess_delay!r}")
        for name in ("doppler_angle", "phase0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ClusterLatent:
    """Carrier-independent state of one cluster: a common delay plus its
    subpaths in draw order."""

    delay: float
    subpaths: tuple[SubpathLatent, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "subpaths", tuple(self.subpaths))
        if not (self.delay >= 0 and math.isfinite(self.delay)):
            raise ValueError(f"delay must be >= 0 and finite, got {self.delay!r}")
        if len(self.subpaths) < 1:
            raise ValueError("a cluster needs at least one subpath")

    @property
    def energy(self) -> float:
        return float(sum(s.amplitude**2 for s in self.subpaths))


@dataclass(frozen=True)
class Snapshot:
    """One uplink/downlink channel pair of a sample set's time series."""

    t_ul: float
    t_dl: float
    ul: TimeDomainChannel
    dl: TimeDomainChannel


@dataclass(frozen=True)
class MsSampleSet:
    """One mobile-station position: its latent cluster state (in channel
    cluster order) and the rendered snapshot series."""

    index: int
    latents: tuple[ClusterLatent, ...]
    snapshots: tuple[Snapshot, ...]


def default_config(
    *,
    f_ul: float = 2.6e9,
    f_dl: float = 2.9e9,
    f_s: float = 100e6,
    k: int = 32,
    n_bs: int = 8,
    n_clusters: int = 4,
    n_subpaths: int = 4,
    n_sample_sets: int = 40,
    snapshots_per_set: int = 50,
    snapshot_period: float = 40e-3,
    processing_delay: float = 5e-3,
    ms_speed: float = 10.0 / 3.6,
    churn_min: int = 1,
    churn_max: int = 3,
    seed: int = 0,
) -> ScenarioConfig:
    """A desk-scale scenario with the usual link parameters."""
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


def gain_at(latent: SubpathLatent, f_c: float, t: float, speed: float) -> complex:
    """Complex gain of one subpath at carrier ``f_c`` and time ``t``."""
    doppler = 2.0 * np.pi * (f_c * speed / SPEED_OF_LIGHT) * math.cos(latent.doppler_angle) * t
    phase = latent.phase0 - 2.0 * np.pi * f_c * latent.excess_delay + doppler
    return complex(latent.amplitude * np.exp(1j * phase))


def _cluster_power_weight(delay: float) -> float:
    """Relative cluster power under the exponential decay profile."""
    return 10.0 ** (-DECAY_DB_PER_SECOND * delay / 10.0)


def draw_cluster(rng: np.random.Generator, delay_window: float, n_subpaths: int) -> ClusterLatent:
    """Draw one cluster: uniform delay, Rayleigh subpath amplitudes scaled
    by the delay-decay profile, uniform AoDs / excess delays / Doppler
    angles / phases."""
    delay = float(rng.uniform(0.0, delay_window))
    weight = _cluster_power_weight(delay)
    scale = math.sqrt(weight / (2.0 * n_subpaths))
    subpaths = []
    for _ in range(n_subpaths):
        subpaths.append(
            SubpathLatent(
                amplitude=float(rng.rayleigh(scale)),
                aod=float(rng.uniform(-np.pi / 2, np.pi / 2)),
                excess_delay=float(rng.uniform(0.0, EXCESS_DELAY_MAX)),
                doppler_angle=float(rng.uniform(0.0, 2.0 * np.pi)),
                phase0=float(rng.uniform(0.0, 2.0 * np.pi)),
            )
        )
    return ClusterLatent(delay=delay, subpaths=tuple(subpaths))


def churn_clusters(
    clusters: tuple[ClusterLatent, ...],
    rng: np.random.Generator,
    churn_count: int,
    *,
    delay_window: float,
    n_subpaths: int,
) -> tuple[ClusterLatent, ...]:
    """Replace ``churn_count`` distinct clusters (chosen uniformly) with
    fresh draws; the remaining entries are returned untouched."""
    if not (0 <= churn_count <= len(clusters)):
        raise ValueError(
            f"churn_count must lie in [0, {len(clusters)}], got {churn_count!r}"
        )
    replaced = set(rng.choice(len(clusters), size=churn_count, replace=False).tolist())
    return tuple(
        draw_cluster(rng, delay_window, n_subpaths) if i in replaced else cluster
        for i, cluster in enumerate(clusters)
    )


def _redraw_phases(
    clusters: tuple[ClusterLatent, ...], rng: np.random.Generator
) -> tuple[ClusterLatent, ...]:
    return tuple(
        ClusterLatent(
            delay=c.delay,
            subpaths=tuple(
                replace(s, phase0=float(rng.uniform(0.0, 2.0 * np.pi))) for s in c.subpaths
            ),
        )
        for c in clusters
    )


def _normalize_energy(clusters: tuple[ClusterLatent, ...]) -> tuple[ClusterLatent, ...]:
    """Rescale amplitudes so sum_p A_p^2 == 1, i.e. E||H||_F^2 = n_bs * k."""
    total = sum(c.energy for c in clusters)
    scale = 1.0 / math.sqrt(total)
    return tuple(
        ClusterLatent(
            delay=c.delay,
            subpaths=tuple(replace(s, amplitude=s.amplitude * scale) for s in c.subpaths),
        )
        for c in clusters
    )


def _sort_like_channel(clusters: tuple[ClusterLatent, ...]) -> tuple[ClusterLatent, ...]:
    """Order latents the way TimeDomainChannel orders clusters, so index i
    of the latents matches cluster i of every rendered snapshot."""
    return tuple(sorted(clusters, key=lambda c: (c.delay, -c.energy)))


def channel_at(
    latents: tuple[ClusterLatent, ...], carrier: CarrierConfig, t: float, speed: float
) -> TimeDomainChannel:
    """Render the latent state on a carrier at time ``t``."""
    clusters = tuple(
        Cluster(
            delay=latent.delay,
            subpaths=tuple(
                Subpath(gain=gain_at(s, carrier.f_c, t, speed), aod=s.aod)
                for s in latent.subpaths
            ),
        )
        for latent in latents
    )
    return TimeDomainChannel(carrier=carrier, clusters=clusters)


def generate_scenario(config: ScenarioConfig) -> tuple[MsSampleSet, ...]:
    """Generate every sample set of a scenario.

    One child seed stream draws the shared static geometry; each sample set
    gets its own spawned stream for churn, phases, and nothing else, so any
    set can be regenerated bit-for-bit without the others.
    """
    root = np.random.SeedSequence(config.seed)
    geometry_seq, *set_seqs = root.spawn(1 + config.n_sample_sets)
    geometry_rng = np.random.Generator(np.random.PCG64(geometry_seq))
    static = tuple(
        draw_cluster(geometry_rng, config.delay_window, config.n_subpaths)
        for _ in range(config.n_clusters)
    )
    sets = []
    for index, seq in enumerate(set_seqs):
        rng = np.random.Generator(np.random.PCG64(seq))
        churn_count = int(rng.integers(config.churn_min, config.churn_max + 1))
        latents = churn_clusters(
            static,
            rng,
            churn_count,
            delay_window=config.delay_window,
            n_subpaths=config.n_subpaths,
        )
        latents = _redraw_phases(latents, rng)
        latents = _sort_like_channel(_normalize_energy(latents))
        snapshots = []
        for i in range(config.snapshots_per_set):
            t_ul = i * config.snapshot_period
            t_dl = t_ul + config.processing_delay
            snapshots.append(
                Snapshot(
                    t_ul=t_ul,
                    t_dl=t_dl,
                    ul=channel_at(latents, config.ul, t_ul, config.ms_speed),
                    dl=channel_at(latents, config.dl, t_dl, config.ms_speed),
                )
            )
        sets.append(MsSampleSet(index=index, latents=latents, snapshots=tuple(snapshots)))
    return tuple(sets)
