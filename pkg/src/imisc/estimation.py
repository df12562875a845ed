"""Coarray MUSIC direction finding under mutual coupling.

Pipeline: snapshots -> sample covariance -> lag averaging over the
consecutive coarray -> spatial smoothing -> MUSIC on the virtual ULA.
Angles are in degrees throughout; positions are in half wavelengths, so the
steering phase of a sensor at ``p`` is ``pi * p * sin(theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .coarray import CoarrayProfile, CouplingModel, coupling_matrix, difference_coarray
from .geometry import ArrayGeometry

DEFAULT_SCAN = (-60.0, 60.0)
DEFAULT_GRID_STEP = 0.02


class IdentifiabilityError(ValueError):
    """More sources than the coarray aperture can resolve."""


@dataclass(frozen=True)
class SourceScene:
    """Uncorrelated far-field narrowband sources.

    Args:
        angles: Directions in degrees, strictly increasing, inside (-90, 90).
        powers: Source powers, one per angle.
        noise_power: White noise power per sensor.
    """

    angles: tuple[float, ...]
    powers: tuple[float, ...]
    noise_power: float = 1.0

    def __post_init__(self):
        ang = tuple(float(a) for a in self.angles)
        pw = tuple(float(p) for p in self.powers)
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "powers", pw)
        if not ang:
            raise ValueError("need at least one source")
        if len(pw) != len(ang):
            raise ValueError("one power per source")
        if any(b <= a for a, b in zip(ang, ang[1:])):
            raise ValueError("angles must be strictly increasing")
        if any(abs(a) >= 90 for a in ang):
            raise ValueError("angles must lie in (-90, 90)")
        if any(p <= 0 for p in pw) or self.noise_power < 0:
            raise ValueError("powers must be positive")

    @property
    def R(self) -> int:
        return len(self.angles)

    @classmethod
    def from_snr(cls, angles: Sequence[float], snr_db: float, noise_power: float = 1.0) -> "SourceScene":
        """Equal-power sources with ``10 log10(power / noise_power) = snr_db``."""
        p = noise_power * 10.0 ** (snr_db / 10.0)
        return cls(tuple(angles), (p,) * len(angles), noise_power)


def uniform_angles(R: int, lo: float = -60.0, hi: float = 60.0) -> np.ndarray:
    """R directions evenly spaced over [lo, hi], endpoints included."""
    if R == 1:
        return np.array([(lo + hi) / 2.0])
    return np.linspace(lo, hi, R)


def _positions(geom) -> np.ndarray:
    if isinstance(geom, ArrayGeometry):
        return geom.as_array().astype(float)
    return np.asarray(geom, dtype=float)


def _check_angles(angles):
    if np.any(np.abs(angles) >= 90):
        raise ValueError("angles must lie in (-90, 90) degrees")


def steering_vector(geom, angle_deg: float) -> np.ndarray:
    _check_angles(np.asarray(angle_deg))
    return np.exp(1j * np.pi * _positions(geom) * np.sin(np.deg2rad(angle_deg)))


def steering_matrix(geom, angles_deg) -> np.ndarray:
    """Q x K matrix whose columns are steering vectors."""
    angles = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    _check_angles(angles)
    return np.exp(1j * np.pi * np.outer(_positions(geom), np.sin(np.deg2rad(angles))))


@dataclass
class SnapshotSet:
    data: np.ndarray
    seed: Optional[int] = None
    scene: Optional[SourceScene] = None
    coupling: Optional[CouplingModel] = None

    @property
    def T(self) -> int:
        return self.data.shape[1]


def _effective_manifold(geom, scene: SourceScene, coupling: Optional[CouplingModel]) -> np.ndarray:
    V = steering_matrix(geom, scene.angles)
    if coupling is not None and not coupling.is_identity:
        V = coupling_matrix(geom, coupling) @ V
    return V


def synthesize_snapshots(geom: ArrayGeometry, scene: SourceScene, coupling: Optional[CouplingModel],
                         T: int, seed) -> SnapshotSet:
    """Draw ``x_t = A V s_t + n_t`` for t = 1..T with circular Gaussian s and n.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts; the same
    seed always gives the same matrix.
    """
    if T < 1:
        raise ValueError("need at least one snapshot")
    rng = np.random.default_rng(seed)
    AV = _effective_manifold(geom, scene, coupling)
    Q, R = AV.shape
    amp = np.sqrt(np.asarray(scene.powers) / 2.0)[:, None]
    s = amp * (rng.standard_normal((R, T)) + 1j * rng.standard_normal((R, T)))
    n = np.sqrt(scene.noise_power / 2.0) * (rng.standard_normal((Q, T)) + 1j * rng.standard_normal((Q, T)))
    return SnapshotSet(AV @ s + n, seed=seed, scene=scene, coupling=coupling)


def sample_covariance(snaps) -> np.ndarray:
    X = snaps.data if isinstance(snaps, SnapshotSet) else np.asarray(snaps)
    if X.ndim == 1:
        X = X[:, None]
    R = X @ X.conj().T / X.shape[1]
    return 0.5 * (R + R.conj().T)


def model_covariance(geom: ArrayGeometry, scene: SourceScene,
                     coupling: Optional[CouplingModel] = None) -> np.ndarray:
    """Exact covariance ``A V diag(powers) V^H A^H + noise_power I``."""
    AV = _effective_manifold(geom, scene, coupling)
    R = (AV * np.asarray(scene.powers)) @ AV.conj().T
    return R + scene.noise_power * np.eye(AV.shape[0])


def lag_average(Rx: np.ndarray, profile: CoarrayProfile, geom) -> np.ndarray:
    """Average covariance entries over each lag in ``[-L, L]``.

    Entry ``Rx[b, c]`` belongs to lag ``p_b - p_c``. Returns a vector of
    length ``2L + 1`` indexed so that element ``L + n`` holds lag ``n``.
    """
    pos = _positions(geom).astype(np.int64)
    L = profile.consecutive_bound
    diff = pos[:, None] - pos[None, :]
    mask = np.abs(diff) <= L
    idx = (diff[mask] + L).ravel()
    vals = Rx[mask].ravel()
    counts = np.bincount(idx, minlength=2 * L + 1)
    if np.any(counts == 0):
        raise AssertionError("profile claims a lag the geometry does not produce")
    re = np.bincount(idx, weights=vals.real, minlength=2 * L + 1)
    im = np.bincount(idx, weights=vals.imag, minlength=2 * L + 1)
    return (re + 1j * im) / counts


def spatial_smoothing(lag_vec: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Smoothed ``(L+1) x (L+1)`` covariance of the virtual ULA.

    Averages ``z_k z_k^H`` over the L + 1 windows ``z_k`` holding lags
    ``k - L .. k``.
    """
    z = np.asarray(lag_vec, dtype=complex)
    if z.ndim != 1 or len(z) % 2 == 0:
        raise ValueError("lag vector must have odd length 2L + 1")
    scale = max(np.max(np.abs(z)), 1.0)
    if np.max(np.abs(z - z[::-1].conj())) > rtol * scale:
        raise ValueError("lag vector is not conjugate symmetric")
    L = len(z) // 2
    # windows as rows of a Hankel-like matrix; Z[k] = z[k : k + L + 1]
    Z = np.lib.stride_tricks.sliding_window_view(z, L + 1)
    Rss = Z.T @ Z.conj() / (L + 1)
    return 0.5 * (Rss + Rss.conj().T)


@dataclass
class MusicResult:
    grid: np.ndarray
    spectrum: np.ndarray
    estimates: np.ndarray
    resolved: bool = True
    n_peaks: int = 0


def _local_maxima(s: np.ndarray) -> np.ndarray:
    n = len(s)
    if n == 1:
        return np.array([0])
    left = np.empty(n, dtype=bool)
    right = np.empty(n, dtype=bool)
    left[0] = True
    left[1:] = s[1:] > s[:-1]
    right[-1] = True
    right[:-1] = s[:-1] >= s[1:]
    return np.flatnonzero(left & right)


def _refine(grid, spectrum, idx):
    # parabolic fit on the log spectrum through the peak and its neighbours
    out = grid[idx].astype(float)
    step = grid[1] - grid[0] if len(grid) > 1 else 0.0
    logs = np.log(spectrum)
    for k, i in enumerate(idx):
        if 0 < i < len(grid) - 1:
            a, b, c = logs[i - 1], logs[i], logs[i + 1]
            denom = a - 2 * b + c
            if denom < 0:
                out[k] += 0.5 * step * (a - c) / denom
    return out


def music_estimate(Rss: np.ndarray, R: int, grid_step: float = DEFAULT_GRID_STEP,
                   scan_range: tuple[float, float] = DEFAULT_SCAN, refine: bool = False) -> MusicResult:
    """MUSIC on the smoothed coarray covariance.

    Args:
        Rss: ``(L+1) x (L+1)`` smoothed covariance of the virtual ULA.
        R: Number of sources.
        grid_step: Scan step in degrees.
        scan_range: Inclusive scan interval in degrees.
        refine: Interpolate each peak with a parabola on the log spectrum.

    Returns:
        A :class:`MusicResult`. ``resolved`` is False when fewer than R local
        maxima exist; ``estimates`` then holds the peaks that were found.
    """
    n = Rss.shape[0]
    L = n - 1
    if R > L:
        raise IdentifiabilityError(f"too many sources for coarray aperture: R={R} > L={L}")
    if grid_step <= 0:
        raise ValueError("grid step must be positive")
    lo, hi = scan_range
    grid = lo + grid_step * np.arange(int(np.floor((hi - lo) / grid_step + 1e-9)) + 1)
    _, vecs = np.linalg.eigh(Rss)
    En = vecs[:, : n - R]
    A = np.exp(1j * np.pi * np.outer(np.arange(n), np.sin(np.deg2rad(grid))))
    proj = En.conj().T @ A
    denom = np.einsum("ij,ij->j", proj.real, proj.real) + np.einsum("ij,ij->j", proj.imag, proj.imag)
    spectrum = 1.0 / np.maximum(denom, np.finfo(float).tiny)
    peaks = _local_maxima(spectrum)
    top = peaks[np.argsort(spectrum[peaks])[::-1][:R]]
    top = np.sort(top)
    est = _refine(grid, spectrum, top) if refine else grid[top]
    return MusicResult(grid, spectrum, np.sort(est), resolved=len(top) == R, n_peaks=len(peaks))


def coarray_music(Rx: np.ndarray, geom: ArrayGeometry, R: int, profile: Optional[CoarrayProfile] = None,
                  **kwargs) -> MusicResult:
    """Run lag averaging, spatial smoothing and MUSIC on a physical covariance."""
    profile = profile or difference_coarray(geom)
    return music_estimate(spatial_smoothing(lag_average(Rx, profile, geom)), R, **kwargs)


@dataclass
class RmseResult:
    """RMSE over successful trials.

    ``value`` is NaN when every trial failed. ``se`` is the delta-method
    standard error of ``value``.
    """

    value: float
    se: float
    failed: int
    trials: int
    per_trial_mse: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    @property
    def ok(self) -> bool:
        return self.trials > self.failed


def rmse(estimates: Sequence[Optional[Sequence[float]]], truth: Sequence[float]) -> RmseResult:
    """Root-mean-square angle error with sorted (order-statistic) pairing.

    Args:
        estimates: One entry per trial, either R angle estimates or None for a
            failed trial.
        truth: True angles.
    """
    truth = np.sort(np.asarray(truth, dtype=float))
    mse = []
    failed = 0
    for est in estimates:
        if est is None or len(est) != len(truth):
            failed += 1
            continue
        err = np.sort(np.asarray(est, dtype=float)) - truth
        mse.append(np.mean(err ** 2))
    mse = np.asarray(mse)
    if len(mse) == 0:
        return RmseResult(float("nan"), float("nan"), failed, len(estimates), mse)
    value = float(np.sqrt(mse.mean()))
    if len(mse) > 1 and value > 0:
        se = float(mse.std(ddof=1) / np.sqrt(len(mse)) / (2 * value))
    else:
        se = 0.0
    return RmseResult(value, se, failed, len(estimates), mse)
