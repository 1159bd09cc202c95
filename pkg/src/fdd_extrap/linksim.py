"""Pilot transmission and least-squares channel estimation for both links.

Uplink: the single-antenna terminal sends one pilot symbol per subcarrier,
all at full transmit power (|s_k|^2 = P_ul), and the base station observes

    y_k = s_k * h_k + w_k            (one n_bs column per subcarrier)

so the LS estimate h_k = y_k / s_k has white error of per-entry variance
noise_variance / P_ul.

Downlink: the base station sends ``j`` pilot symbols (j >= n_bs) through a
pilot matrix S (n_bs x j) whose columns each spend the full BS power split
evenly over the antennas, making S @ S^H = (j / n_bs) * P_total * I.  The
terminal observes y_k = S^H h_k + w_k per subcarrier and the LS estimate has
white error of per-entry variance noise_variance * n_bs / (j * P_total)
(= noise_variance / P_total at j = n_bs).

Noise is complex white Gaussian with per-entry variance
``noise_variance(n0, f_s, k)`` — the density n0 integrated over one
subcarrier spacing f_s / k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import CarrierConfig, OfdmChannel

__all__ = [
    "PilotConfig",
    "NoisyObservation",
    "dbm_to_watt",
    "noise_variance",
    "complex_noise",
    "ul_observe",
    "ul_ls_estimate",
    "dl_observe_and_estimate",
]

PILOT_KINDS = ("unit_diag", "dft")


def dbm_to_watt(power_dbm: float) -> float:
    """Convert dBm to watts: 10 ** ((p - 30) / 10)."""
    return float(10.0 ** ((power_dbm - 30.0) / 10.0))


def noise_variance(n0_dbm_per_hz: float, f_s: float, k: int) -> float:
    """Per-subcarrier complex noise variance: density times subcarrier spacing."""
    if f_s <= 0 or k < 1:
        raise ValueError(f"need f_s > 0 and k >= 1, got f_s={f_s!r}, k={k!r}")
    return dbm_to_watt(n0_dbm_per_hz) * (f_s / k)


@dataclass(frozen=True)
class PilotConfig:
    """Pilot parameters shared by both links.

    tx_power_dbm   : total transmit power per pilot symbol
    n0_dbm_per_hz  : noise density at the receiver (-inf for noiseless)
    kind           : 'unit_diag' (constant-phase diagonal / per-antenna
                     bursts) or 'dft' (DFT phase pattern)
    j              : downlink pilot symbol count; None means n_bs at use time
    """

    tx_power_dbm: float
    n0_dbm_per_hz: float
    kind: str = "unit_diag"
    j: int | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.tx_power_dbm):
            raise ValueError(f"tx_power_dbm must be finite, got {self.tx_power_dbm!r}")
        if np.isnan(self.n0_dbm_per_hz) or self.n0_dbm_per_hz == np.inf:
            raise ValueError(f"n0_dbm_per_hz must be a real density or -inf, got {self.n0_dbm_per_hz!r}")
        if self.kind not in PILOT_KINDS:
            raise ValueError(f"kind must be one of {PILOT_KINDS}, got {self.kind!r}")
        if self.j is not None and (not isinstance(self.j, (int, np.integer)) or self.j < 1):
            raise ValueError(f"j must be an integer >= 1 or None, got {self.j!r}")


@dataclass(frozen=True)
class NoisyObservation:
    """Received uplink pilot matrix plus the pilot structure that formed it."""

    carrier: CarrierConfig
    matrix: np.ndarray  # (n_bs, k): column k is s_k * h_k + noise
    pilot: np.ndarray  # (k,) known pilot symbols s_k

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        p = np.asarray(self.pilot, dtype=np.complex128)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "pilot", p)
        expected = (self.carrier.n_bs, self.carrier.k)
        if m.shape != expected:
            raise ValueError(f"observation shape {m.shape} does not match carrier grid {expected}")
        if p.shape != (self.carrier.k,):
            raise ValueError(f"pilot shape {p.shape} must be ({self.carrier.k},)")
        if np.any(p == 0):
            raise ValueError("pilot symbols must be nonzero")


def complex_noise(rng: np.random.Generator, shape: tuple[int, ...], variance: float) -> np.ndarray:
    if variance == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _ul_pilot_vector(pilots: PilotConfig, k: int) -> np.ndarray:
    amplitude = np.sqrt(dbm_to_watt(pilots.tx_power_dbm))
    if pilots.kind == "unit_diag":
        phases = np.zeros(k)
    else:  # dft
        phases = -2.0 * np.pi * np.arange(k) / k
    return amplitude * np.exp(1j * phases)


def ul_observe(channel: OfdmChannel, pilots: PilotConfig, rng: np.random.Generator) -> NoisyObservation:
    """Send the per-subcarrier uplink pilots through ``channel`` and add noise."""
    carrier = channel.carrier
    s = _ul_pilot_vector(pilots, carrier.k)
    var = noise_variance(pilots.n0_dbm_per_hz, carrier.f_s, carrier.k)
    y = channel.matrix * s[np.newaxis, :] + complex_noise(rng, channel.matrix.shape, var)
    return NoisyObservation(carrier=carrier, matrix=y, pilot=s)


def ul_ls_estimate(observation: NoisyObservation) -> OfdmChannel:
    """Per-subcarrier least squares: divide column k by the known pilot s_k."""
    est = observation.matrix / observation.pilot[np.newaxis, :]
    return OfdmChannel(carrier=observation.carrier, matrix=est)


def _dl_pilot_matrix(pilots: PilotConfig, n_bs: int) -> np.ndarray:
    """Pilot matrix S (n_bs x j); every column spends the total power
    dbm_to_watt(tx_power_dbm) split evenly across antennas."""
    j = pilots.j if pilots.j is not None else n_bs
    if j < n_bs:
        raise ValueError(f"downlink needs at least n_bs={n_bs} pilot symbols, got j={j}")
    total_power = dbm_to_watt(pilots.tx_power_dbm)
    if pilots.kind == "unit_diag":
        if j != n_bs:
            raise ValueError(f"unit_diag downlink pilots require j == n_bs, got j={j}, n_bs={n_bs}")
        return np.sqrt(total_power) * np.eye(n_bs, dtype=np.complex128)
    antenna = np.arange(n_bs)[:, np.newaxis]
    symbol = np.arange(j)[np.newaxis, :]
    dft = np.exp(-2j * np.pi * antenna * symbol / j)
    return np.sqrt(total_power / n_bs) * dft


def dl_observe_and_estimate(
    channel: OfdmChannel, pilots: PilotConfig, rng: np.random.Generator
) -> OfdmChannel:
    """Downlink pilot burst plus the terminal-side LS estimate, per subcarrier.

    Observation y_k = S^H h_k + w_k; the estimate is the least-squares
    solution (S S^H)^{-1} S y_k, exact inverse at j = n_bs.
    """
    carrier = channel.carrier
    s = _dl_pilot_matrix(pilots, carrier.n_bs)
    j = s.shape[1]
    var = noise_variance(pilots.n0_dbm_per_hz, carrier.f_s, carrier.k)
    # Y holds one j-vector observation per subcarrier: (j, k).
    y = s.conj().T @ channel.matrix + complex_noise(rng, (j, carrier.k), var)
    gram_inv = np.linalg.inv(s @ s.conj().T)
    est = gram_inv @ (s @ y)
    return OfdmChannel(carrier=carrier, matrix=est)
