"""Channel-quality and rate metrics.

The headline figure of merit is the per-subcarrier correlation factor
|h_hat^H h| / (||h_hat|| ||h||) averaged over subcarriers: 1 means the
estimate points exactly along the true channel (up to phase and scale, which
maximum-ratio beamforming does not care about), 0 means orthogonal.

Spectral efficiency treats the (normalized) estimate as a beamforming vector
at SNR rho; the effective rate discounts it by the fraction of each coherence
block spent on training overhead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import OfdmChannel
from .constants import SPEED_OF_LIGHT

__all__ = [
    "RateContext",
    "correlation_factor",
    "spectral_efficiency",
    "coherence_time",
    "coherence_block_length",
    "effective_rate",
    "effective_rate_in_context",
]


@dataclass(frozen=True)
class RateContext:
    """Everything needed to turn a beamforming estimate into an effective
    rate: link SNR, coherence geometry, and per-block training overhead."""

    snr_rho: float
    coherence_bandwidth: float  # Hz
    ms_speed: float  # m/s
    f_c_dl: float  # Hz
    training_overhead: float  # symbols per coherence block

    def __post_init__(self) -> None:
        if not (self.snr_rho > 0 and math.isfinite(self.snr_rho)):
            raise ValueError(f"snr_rho must be positive and finite, got {self.snr_rho!r}")
        if not (self.coherence_bandwidth > 0 and math.isfinite(self.coherence_bandwidth)):
            raise ValueError(
                f"coherence_bandwidth must be positive and finite, got {self.coherence_bandwidth!r}"
            )
        if not (self.ms_speed >= 0 and math.isfinite(self.ms_speed)):
            raise ValueError(f"ms_speed must be >= 0 and finite, got {self.ms_speed!r}")
        if not (self.f_c_dl > 0 and math.isfinite(self.f_c_dl)):
            raise ValueError(f"f_c_dl must be positive and finite, got {self.f_c_dl!r}")
        if not (self.training_overhead >= 0 and math.isfinite(self.training_overhead)):
            raise ValueError(
                f"training_overhead must be >= 0 and finite, got {self.training_overhead!r}"
            )

    @property
    def block_length(self) -> float:
        return coherence_block_length(
            self.coherence_bandwidth, coherence_time(self.f_c_dl, self.ms_speed)
        )


def _as_matrix(channel: "OfdmChannel | np.ndarray") -> np.ndarray:
    matrix = channel.matrix if isinstance(channel, OfdmChannel) else np.asarray(channel)
    matrix = matrix.astype(np.complex128, copy=False)
    if matrix.ndim != 2:
        raise ValueError(f"expected an (n_bs, k) matrix, got shape {matrix.shape}")
    return matrix


def correlation_factor(truth: "OfdmChannel | np.ndarray", estimate: "OfdmChannel | np.ndarray") -> float:
    """Mean over subcarriers of |h_hat_k^H h_k| / (||h_hat_k|| ||h_k||).

    Invariant to per-subcarrier complex scaling of either argument; always in
    [0, 1].  Subcarriers where either column is all-zero are excluded with a
    warning naming how many were dropped.
    """
    t = _as_matrix(truth)
    e = _as_matrix(estimate)
    if t.shape != e.shape:
        raise ValueError(f"shape mismatch: truth {t.shape} vs estimate {e.shape}")
    t_norms = np.linalg.norm(t, axis=0)
    e_norms = np.linalg.norm(e, axis=0)
    valid = (t_norms > 0) & (e_norms > 0)
    n_dropped = int(np.sum(~valid))
    if n_dropped == t.shape[1]:
        raise ValueError("every subcarrier column is zero in truth or estimate")
    if n_dropped:
        warnings.warn(
            f"correlation_factor: excluded {n_dropped} zero subcarrier column(s)",
            stacklevel=2,
        )
    inner = np.abs(np.sum(e[:, valid].conj() * t[:, valid], axis=0))
    per_subcarrier = inner / (t_norms[valid] * e_norms[valid])
    # Guard against rounding pushing a perfect match to 1 + 1e-16.
    return float(np.mean(np.clip(per_subcarrier, 0.0, 1.0)))


def spectral_efficiency(
    truth: "OfdmChannel | np.ndarray", beamformer: "OfdmChannel | np.ndarray", rho: float
) -> float:
    """(1/K) sum_k log2(1 + rho |v_k^H h_k|^2) with v_k the unit-normalized
    beamformer column; an all-zero beamformer column contributes zero rate."""
    if not (rho > 0 and math.isfinite(rho)):
        raise ValueError(f"rho must be positive and finite, got {rho!r}")
    t = _as_matrix(truth)
    b = _as_matrix(beamformer)
    if t.shape != b.shape:
        raise ValueError(f"shape mismatch: truth {t.shape} vs beamformer {b.shape}")
    b_norms = np.linalg.norm(b, axis=0)
    active = b_norms > 0
    inner = np.zeros(t.shape[1])
    inner[active] = np.abs(
        np.sum(b[:, active].conj() * t[:, active], axis=0)
    ) / b_norms[active]
    return float(np.mean(np.log2(1.0 + rho * inner**2)))


def coherence_time(f_c: float, speed: float) -> float:
    """c / (4 f_c v) seconds; infinite for a static terminal."""
    if not (f_c > 0 and math.isfinite(f_c)):
        raise ValueError(f"f_c must be positive and finite, got {f_c!r}")
    if not (speed >= 0 and math.isfinite(speed)):
        raise ValueError(f"speed must be >= 0 and finite, got {speed!r}")
    if speed == 0:
        return math.inf
    return SPEED_OF_LIGHT / (4.0 * f_c * speed)


def coherence_block_length(coherence_bandwidth: float, t_coherence: float) -> float:
    """Symbols per coherence block: B_coh * T_coh."""
    if not (coherence_bandwidth > 0 and math.isfinite(coherence_bandwidth)):
        raise ValueError(
            f"coherence_bandwidth must be positive and finite, got {coherence_bandwidth!r}"
        )
    if not (t_coherence > 0):  # inf allowed
        raise ValueError(f"t_coherence must be positive, got {t_coherence!r}")
    return coherence_bandwidth * t_coherence


def effective_rate(spec_eff: float, overhead: float, block_length: float) -> float:
    """max(0, 1 - overhead / block) * spec_eff; an infinite block means no
    overhead penalty."""
    if not (spec_eff >= 0 and math.isfinite(spec_eff)):
        raise ValueError(f"spec_eff must be >= 0 and finite, got {spec_eff!r}")
    if not (overhead >= 0 and math.isfinite(overhead)):
        raise ValueError(f"overhead must be >= 0 and finite, got {overhead!r}")
    if not (block_length > 0):  # inf allowed
        raise ValueError(f"block_length must be positive, got {block_length!r}")
    if math.isinf(block_length):
        return spec_eff
    return max(0.0, 1.0 - overhead / block_length) * spec_eff


def effective_rate_in_context(ctx: RateContext, spec_eff: float) -> float:
    return effective_rate(spec_eff, ctx.training_overhead, ctx.block_length)
