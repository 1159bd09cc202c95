"""Multipath channel types and OFDM response construction.

A channel is a set of ``L`` delay clusters; cluster ``l`` carries subpaths
that share the cluster delay ``tau_l`` but have individual angles of
departure (AoD) and complex gains.  The base-station array is an idealized
uniform linear array with half-wavelength element spacing, so its response
does not depend on the carrier:

    a(theta)[n] = exp(j * pi * n * sin(theta)),        n = 0 .. n_bs - 1

On subcarrier k (k = 1 .. K, bandwidth f_s split into K subcarriers) a
cluster at delay ``tau`` contributes through the delay basis vector

    p(tau)[k] = exp(-j * 2 * pi * f_s * tau * k / K)

and the full ``n_bs x K`` frequency response is

    H = sum_l coeff_l * p(tau_l)^T,   coeff_l = sum_p gain_lp * a(aod_lp).

Only the gains change between uplink and downlink carriers; delays and AoDs
are shared.  ``reconstruct_dl`` rebuilds a downlink ``H`` from per-cluster
geometry plus (predicted) downlink gains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CarrierConfig",
    "Subpath",
    "Cluster",
    "TimeDomainChannel",
    "OfdmChannel",
    "array_response",
    "delay_basis",
    "cluster_coefficient",
    "ofdm_from_time",
    "reconstruct_dl",
]


@dataclass(frozen=True)
class CarrierConfig:
    """One carrier's numerology: centre frequency, bandwidth, grid sizes.

    f_c   : carrier frequency in Hz
    f_s   : total bandwidth (equivalently the sample rate) in Hz
    k     : number of OFDM subcarriers the bandwidth is split into
    n_bs  : number of base-station antennas
    """

    f_c: float
    f_s: float
    k: int
    n_bs: int

    def __post_init__(self) -> None:
        if not (self.f_c > 0 and np.isfinite(self.f_c)):
            raise ValueError(f"f_c must be a positive finite frequency, got {self.f_c!r}")
        if not (self.f_s > 0 and np.isfinite(self.f_s)):
            raise ValueError(f"f_s must be a positive finite bandwidth, got {self.f_s!r}")
        if not (isinstance(self.k, (int, np.integer)) and self.k >= 1):
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        if not (isinstance(self.n_bs, (int, np.integer)) and self.n_bs >= 1):
            raise ValueError(f"n_bs must be an integer >= 1, got {self.n_bs!r}")

    @property
    def delay_window(self) -> float:
        """Unambiguous delay range [0, k / f_s) of the delay basis."""
        return self.k / self.f_s


@dataclass(frozen=True)
class Subpath:
    """A single propagation subpath: complex gain plus angle of departure."""

    gain: complex
    aod: float  # radians, in [-pi/2, pi/2)

    def __post_init__(self) -> None:
        if not np.isfinite(self.gain):
            raise ValueError(f"subpath gain must be finite, got {self.gain!r}")
        if not (-np.pi / 2 <= self.aod < np.pi / 2):
            raise ValueError(f"aod must lie in [-pi/2, pi/2), got {self.aod!r}")


@dataclass(frozen=True)
class Cluster:
    """A delay cluster: one shared delay, at least one subpath."""

    delay: float  # seconds, >= 0
    subpaths: tuple[Subpath, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "subpaths", tuple(self.subpaths))
        if not (self.delay >= 0 and np.isfinite(self.delay)):
            raise ValueError(f"cluster delay must be finite and >= 0, got {self.delay!r}")
        if len(self.subpaths) == 0:
            raise ValueError("cluster must contain at least one subpath")

    @property
    def power(self) -> float:
        """Total subpath power sum |gain|^2."""
        return float(sum(abs(s.gain) ** 2 for s in self.subpaths))


@dataclass(frozen=True)
class TimeDomainChannel:
    """Cluster set plus its carrier.  Clusters are stored canonically ordered
    by increasing delay (ties broken by descending cluster power)."""

    carrier: CarrierConfig
    clusters: tuple[Cluster, ...]

    def __post_init__(self) -> None:
        clusters = tuple(sorted(self.clusters, key=lambda c: (c.delay, -c.power)))
        object.__setattr__(self, "clusters", clusters)
        if len(clusters) == 0:
            raise ValueError("channel must contain at least one cluster")
        window = self.carrier.delay_window
        for c in clusters:
            if not (0 <= c.delay < window):
                raise ValueError(
                    f"cluster delay {c.delay!r} outside the unambiguous window [0, {window!r})"
                )


@dataclass(frozen=True)
class OfdmChannel:
    """Frequency response matrix, one column per subcarrier (n_bs x k)."""

    carrier: CarrierConfig
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", m)
        expected = (self.carrier.n_bs, self.carrier.k)
        if m.shape != expected:
            raise ValueError(f"matrix shape {m.shape} does not match carrier grid {expected}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must all be finite")


def array_response(aod: float, n_bs: int) -> np.ndarray:
    """Steering vector of the idealized half-wavelength ULA.

    Element n is exp(j * pi * n * sin(aod)); the norm is always sqrt(n_bs).
    """
    if n_bs < 1:
        raise ValueError(f"n_bs must be >= 1, got {n_bs!r}")
    n = np.arange(n_bs)
    return np.exp(1j * np.pi * n * np.sin(aod))


def delay_basis(delay: float, carrier: CarrierConfig) -> np.ndarray:
    """Per-subcarrier phase ramp of a delay: entry k is
    exp(-j*2*pi*f_s*delay*k/K) for k = 1 .. K.  Unit modulus everywhere,
    so the norm is always sqrt(K)."""
    k = np.arange(1, carrier.k + 1)
    return np.exp(-2j * np.pi * carrier.f_s * delay * k / carrier.k)


def cluster_coefficient(cluster: Cluster, n_bs: int) -> np.ndarray:
    """Aggregate spatial coefficient sum_p gain_p * a(aod_p) of one cluster."""
    coeff = np.zeros(n_bs, dtype=np.complex128)
    for sp in cluster.subpaths:
        coeff += sp.gain * array_response(sp.aod, n_bs)
    return coeff


def ofdm_from_time(channel: TimeDomainChannel) -> OfdmChannel:
    """Frequency response of a cluster channel:
    H = sum_l coeff_l * p(tau_l)^T  (n_bs x k)."""
    carrier = channel.carrier
    h = np.zeros((carrier.n_bs, carrier.k), dtype=np.complex128)
    for cluster in channel.clusters:
        coeff = cluster_coefficient(cluster, carrier.n_bs)
        h += np.outer(coeff, delay_basis(cluster.delay, carrier))
    return OfdmChannel(carrier=carrier, matrix=h)


def reconstruct_dl(
    delays: "list[float] | np.ndarray",
    aods: "list[np.ndarray] | list[list[float]]",
    gains: "list[np.ndarray] | list[list[complex]]",
    r: int,
    carrier_dl: CarrierConfig,
) -> OfdmChannel:
    """Rebuild a downlink OFDM channel from per-cluster geometry and gains.

    ``delays[l]`` is cluster l's delay; ``aods[l]`` / ``gains[l]`` list its
    subpath AoDs and downlink gains in dominance order.  Only the first ``r``
    subpaths of each cluster are used.
    """
    if not (len(delays) == len(aods) == len(gains)):
        raise ValueError(
            f"per-cluster lists disagree in length: {len(delays)} delays, "
            f"{len(aods)} aod lists, {len(gains)} gain lists"
        )
    if len(delays) == 0:
        raise ValueError("at least one cluster is required")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r!r}")
    clusters = []
    for l, (delay, cluster_aods, cluster_gains) in enumerate(zip(delays, aods, gains)):
        if len(cluster_aods) != len(cluster_gains):
            raise ValueError(
                f"cluster {l}: {len(cluster_aods)} aods vs {len(cluster_gains)} gains"
            )
        if r > len(cluster_aods):
            raise ValueError(
                f"cluster {l}: r={r} exceeds the {len(cluster_aods)} available subpaths"
            )
        subpaths = tuple(
            Subpath(gain=complex(g), aod=float(a))
            for a, g in zip(cluster_aods[:r], cluster_gains[:r])
        )
        clusters.append(Cluster(delay=float(delay), subpaths=subpaths))
    return ofdm_from_time(TimeDomainChannel(carrier=carrier_dl, clusters=tuple(clusters)))
