"""Greedy extraction of cluster delays, subpath AoDs and gains.

Two entry points mirror the two front-ends of the extrapolation pipeline:

* ``extract_subpaths`` — matching pursuit on one cluster's spatial
  coefficient: repeatedly pick the grid angle whose steering vector best
  matches the residual, peel off its least-squares gain, and continue in the
  (approximate) nullspace of what was found.

* ``extract_clusters`` — full frequency-domain pursuit on an OFDM matrix:
  pick the grid delay maximizing ||H p*(tau)||^2, project out the delay to
  get that cluster's spatial coefficient, run ``extract_subpaths`` on it,
  then deflate H by the reconstructed rank-one term and repeat.

Ties in any argmax resolve to the lowest grid index.  With on-grid
orthogonal inputs both procedures are exact; ``extract_dl_targets`` reuses
an uplink extraction's geometry to fit downlink gains by least squares,
which is how training labels for the gain-predicting network are made.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import CarrierConfig, OfdmChannel, array_response, delay_basis

__all__ = [
    "AngleGrid",
    "DelayGrid",
    "ClusterExtraction",
    "ExtractionResult",
    "DlTargets",
    "nullspace_project",
    "extract_subpaths",
    "extract_clusters",
    "extract_from_coefficients",
    "select_top_q",
    "extract_dl_targets",
]

ANGLE_OVERSAMPLING = 4
DELAY_OVERSAMPLING = 4


@dataclass(frozen=True)
class AngleGrid:
    """Uniformly spaced candidate AoDs covering [-pi/2, pi/2)."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("angle grid needs a 1-d, non-empty point list")
        if pts[0] < -np.pi / 2 or pts[-1] >= np.pi / 2:
            raise ValueError("angle grid points must lie in [-pi/2, pi/2)")
        if pts.size > 1:
            steps = np.diff(pts)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
                raise ValueError("angle grid must be strictly increasing with uniform spacing")

    @property
    def resolution(self) -> int:
        return int(self.points.size)

    @classmethod
    def uniform(cls, resolution: int) -> "AngleGrid":
        """Grid of ``resolution`` angles at spacing pi / resolution."""
        if resolution < 1:
            raise ValueError(f"resolution must be >= 1, got {resolution!r}")
        return cls(points=-np.pi / 2 + np.pi * np.arange(resolution) / resolution)

    @classmethod
    def for_array(cls, n_bs: int, oversampling: int = ANGLE_OVERSAMPLING) -> "AngleGrid":
        return cls.uniform(oversampling * n_bs)


@dataclass(frozen=True)
class DelayGrid:
    """Uniformly spaced candidate delays covering [0, window)."""

    points: np.ndarray
    window: float

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("delay grid needs a 1-d, non-empty point list")
        if not (self.window > 0 and np.isfinite(self.window)):
            raise ValueError(f"window must be positive and finite, got {self.window!r}")
        if pts[0] < 0 or pts[-1] >= self.window:
            raise ValueError("delay grid points must lie in [0, window)")
        if pts.size > 1:
            steps = np.diff(pts)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
                raise ValueError("delay grid must be strictly increasing with uniform spacing")

    @property
    def resolution(self) -> int:
        return int(self.points.size)

    @classmethod
    def uniform(cls, window: float, resolution: int) -> "DelayGrid":
        if resolution < 1:
            raise ValueError(f"resolution must be >= 1, got {resolution!r}")
        return cls(points=window * np.arange(resolution) / resolution, window=window)

    @classmethod
    def for_carrier(cls, carrier: CarrierConfig, oversampling: int = DELAY_OVERSAMPLING) -> "DelayGrid":
        return cls.uniform(carrier.delay_window, oversampling * carrier.k)


@dataclass(frozen=True)
class ClusterExtraction:
    """One extracted cluster: delay plus subpath AoD/gain lists in greedy
    (dominance) order."""

    delay: float
    aods: np.ndarray  # (p,)
    gains: np.ndarray  # (p,) complex

    def __post_init__(self) -> None:
        aods = np.asarray(self.aods, dtype=np.float64)
        gains = np.asarray(self.gains, dtype=np.complex128)
        object.__setattr__(self, "aods", aods)
        object.__setattr__(self, "gains", gains)
        if aods.shape != gains.shape or aods.ndim != 1 or aods.size < 1:
            raise ValueError("aods and gains must be equal-length, non-empty 1-d arrays")

    @property
    def n_subpaths(self) -> int:
        return int(self.aods.size)

    def coefficient(self, n_bs: int) -> np.ndarray:
        """Spatial coefficient rebuilt from the extracted subpaths."""
        coeff = np.zeros(n_bs, dtype=np.complex128)
        for aod, gain in zip(self.aods, self.gains):
            coeff += gain * array_response(aod, n_bs)
        return coeff


@dataclass(frozen=True)
class ExtractionResult:
    """Per-cluster extractions plus the residual trace of the pursuit.

    ``residual_norms[i]`` is the Frobenius norm of what remained after
    extracting cluster i (for coefficient-driven extraction: the residual of
    that cluster's coefficient after its last subpath).
    """

    clusters: tuple[ClusterExtraction, ...]
    residual_norms: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "clusters", tuple(self.clusters))
        object.__setattr__(self, "residual_norms", tuple(float(r) for r in self.residual_norms))
        if len(self.clusters) == 0:
            raise ValueError("extraction result must contain at least one cluster")

    @property
    def delays(self) -> np.ndarray:
        return np.array([c.delay for c in self.clusters])


@dataclass(frozen=True)
class DlTargets:
    """Downlink gains fitted on an uplink extraction's geometry.

    ``rank_deficient[l]`` flags clusters whose steering matrix lost rank and
    needed the ridge-regularized solve.
    """

    gains: tuple[np.ndarray, ...]  # per cluster, (q,) complex
    rank_deficient: tuple[bool, ...]


def nullspace_project(vec: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Project ``vec`` onto the orthogonal complement of ``direction``:
    (I - d d^H / ||d||^2) vec."""
    direction = np.asarray(direction, dtype=np.complex128)
    vec = np.asarray(vec, dtype=np.complex128)
    norm_sq = float(np.real(np.vdot(direction, direction)))
    if norm_sq == 0.0:
        raise ValueError("cannot project against a zero direction")
    return vec - direction * (np.vdot(direction, vec) / norm_sq)


def _steering_table(grid: AngleGrid, n_bs: int) -> np.ndarray:
    """All grid steering vectors as columns, (n_bs, resolution)."""
    n = np.arange(n_bs)[:, np.newaxis]
    return np.exp(1j * np.pi * n * np.sin(grid.points)[np.newaxis, :])


def extract_subpaths(
    coeff: np.ndarray, grid: AngleGrid, p: int
) -> tuple[np.ndarray, np.ndarray]:
    """Matching pursuit of ``p`` subpaths from one spatial coefficient.

    Each round picks argmax_theta |a(theta)^H residual|^2 over the grid
    (lowest index on ties), assigns the least-squares gain
    a^H residual / ||a||^2, and subtracts the rank-one term — equivalently
    projects the residual onto the chosen vector's nullspace.

    Returns (aods, gains) in extraction order.
    """
    coeff = np.asarray(coeff, dtype=np.complex128)
    if coeff.ndim != 1:
        raise ValueError(f"coefficient must be a vector, got shape {coeff.shape}")
    n_bs = coeff.size
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    if p > grid.resolution:
        raise ValueError(f"p={p} exceeds the angle grid resolution {grid.resolution}")
    if grid.resolution < n_bs:
        raise ValueError(
            f"angle grid resolution {grid.resolution} is coarser than the array ({n_bs})"
        )
    table = _steering_table(grid, n_bs)
    residual = coeff.copy()
    aods = np.empty(p)
    gains = np.empty(p, dtype=np.complex128)
    for i in range(p):
        scores = np.abs(table.conj().T @ residual) ** 2
        idx = int(np.argmax(scores))
        a = table[:, idx]
        gain = np.vdot(a, residual) / n_bs  # ||a||^2 == n_bs
        aods[i] = grid.points[idx]
        gains[i] = gain
        residual -= gain * a
    return aods, gains


def extract_clusters(
    ofdm: OfdmChannel, delay_grid: DelayGrid, angle_grid: AngleGrid, l: int, p: int
) -> ExtractionResult:
    """Frequency-domain pursuit of ``l`` clusters with ``p`` subpaths each.

    Round for cluster i: pick tau maximizing ||H p*(tau)||^2 over the delay
    grid, form the cluster coefficient H p*(tau) / ||p||^2, extract its
    subpaths, then deflate H by the reconstructed outer product.
    """
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l!r}")
    if l > delay_grid.resolution:
        raise ValueError(f"l={l} exceeds the delay grid resolution {delay_grid.resolution}")
    if p > angle_grid.resolution:
        raise ValueError(f"p={p} exceeds the angle grid resolution {angle_grid.resolution}")
    carrier = ofdm.carrier
    k = np.arange(1, carrier.k + 1)[:, np.newaxis]
    basis = np.exp(-2j * np.pi * carrier.f_s * k * delay_grid.points[np.newaxis, :] / carrier.k)
    h = ofdm.matrix.copy()
    clusters = []
    residual_norms = []
    for _ in range(l):
        scores = np.sum(np.abs(h @ basis.conj()) ** 2, axis=0)
        idx = int(np.argmax(scores))
        tau = float(delay_grid.points[idx])
        p_vec = basis[:, idx]
        coeff = (h @ p_vec.conj()) / carrier.k  # ||p||^2 == k
        aods, gains = extract_subpaths(coeff, angle_grid, p)
        rebuilt = ClusterExtraction(delay=tau, aods=aods, gains=gains)
        h -= np.outer(rebuilt.coefficient(carrier.n_bs), p_vec)
        clusters.append(rebuilt)
        residual_norms.append(float(np.linalg.norm(h)))
    return ExtractionResult(clusters=tuple(clusters), residual_norms=tuple(residual_norms))


def extract_from_coefficients(
    coefficients: "list[np.ndarray]",
    delays: "list[float] | np.ndarray",
    angle_grid: AngleGrid,
    p: int,
) -> ExtractionResult:
    """Per-cluster pursuit when delays and spatial coefficients are already
    known (the time-domain front-end): run ``extract_subpaths`` on each
    coefficient and keep the given delay."""
    if len(coefficients) != len(delays):
        raise ValueError(
            f"{len(coefficients)} coefficients vs {len(delays)} delays"
        )
    clusters = []
    residual_norms = []
    for coeff, delay in zip(coefficients, delays):
        aods, gains = extract_subpaths(coeff, angle_grid, p)
        cluster = ClusterExtraction(delay=float(delay), aods=aods, gains=gains)
        residual = np.asarray(coeff, dtype=np.complex128) - cluster.coefficient(len(coeff))
        clusters.append(cluster)
        residual_norms.append(float(np.linalg.norm(residual)))
    return ExtractionResult(clusters=tuple(clusters), residual_norms=tuple(residual_norms))


def select_top_q(result: ExtractionResult, q: int) -> ExtractionResult:
    """Keep each cluster's first ``q`` subpaths (greedy order = dominance)."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q!r}")
    for i, c in enumerate(result.clusters):
        if q > c.n_subpaths:
            raise ValueError(f"cluster {i}: q={q} exceeds the {c.n_subpaths} extracted subpaths")
    kept = tuple(
        ClusterExtraction(delay=c.delay, aods=c.aods[:q], gains=c.gains[:q])
        for c in result.clusters
    )
    return ExtractionResult(clusters=kept, residual_norms=result.residual_norms)


def extract_dl_targets(dl: OfdmChannel, ul_result: ExtractionResult, q: int) -> DlTargets:
    """Fit downlink gains onto the uplink-extracted geometry.

    For cluster l: project the downlink OFDM matrix onto p(tau_l) to get its
    spatial coefficient, then least-squares fit the first ``q`` uplink AoDs'
    steering vectors to it.  A rank-deficient steering matrix falls back to a
    ridge solve (lambda = 1e-9) and flags the cluster.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q!r}")
    carrier = dl.carrier
    gains = []
    flags = []
    for i, cluster in enumerate(ul_result.clusters):
        if q > cluster.n_subpaths:
            raise ValueError(f"cluster {i}: q={q} exceeds the {cluster.n_subpaths} uplink subpaths")
        p_vec = delay_basis(cluster.delay, carrier)
        coeff_dl = (dl.matrix @ p_vec.conj()) / carrier.k
        steering = np.stack(
            [array_response(a, carrier.n_bs) for a in cluster.aods[:q]], axis=1
        )
        fit, _, rank, _ = np.linalg.lstsq(steering, coeff_dl, rcond=None)
        deficient = rank < q
        if deficient:
            gram = steering.conj().T @ steering + 1e-9 * np.eye(q)
            fit = np.linalg.solve(gram, steering.conj().T @ coeff_dl)
        gains.append(fit.astype(np.complex128))
        flags.append(bool(deficient))
    return DlTargets(gains=tuple(gains), rank_deficient=tuple(flags))
