"""Constant-velocity Kalman filter over (cx, cy, a, h) and affine camera warps.

State layout is ``(cx, cy, a, h, vcx, vcy, va, vh)`` where ``a`` is the
width/height aspect ratio. Noise standard deviations scale with the box
height, following the SORT/ByteTrack convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

H_FLOOR = 1e-3

_F = np.eye(8)
_F[:4, 4:] = np.eye(4)
_H = np.eye(4, 8)


@dataclass(frozen=True)
class NoiseModel:
    std_weight_position: float = 1.0 / 20
    std_weight_velocity: float = 1.0 / 160


DEFAULT_NOISE = NoiseModel()


@dataclass(frozen=True)
class KalmanState:
    mean: np.ndarray
    covariance: np.ndarray

    @property
    def xyah(self) -> np.ndarray:
        return self.mean[:4].copy()


def _check_measurement(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (4,):
        raise ValueError(f"measurement must be (cx, cy, a, h), got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError(f"non-finite measurement {z}")
    if z[3] <= 0:
        raise ValueError(f"measurement height must be positive, got {z[3]}")
    return z


def kf_initiate(measurement, noise: NoiseModel = DEFAULT_NOISE) -> KalmanState:
    z = _check_measurement(measurement)
    h = z[3]
    wp, wv = noise.std_weight_position, noise.std_weight_velocity
    std = np.array([2 * wp * h, 2 * wp * h, 1e-2, 2 * wp * h, 10 * wv * h, 10 * wv * h, 1e-5, 10 * wv * h])
    mean = np.concatenate([z, np.zeros(4)])
    return KalmanState(mean, np.diag(std**2))


def _process_noise(h: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """Diagonal of Q for each height in ``h``; shape (n, 8)."""
    wp, wv = noise.std_weight_position, noise.std_weight_velocity
    n = h.shape[0]
    std = np.empty((n, 8))
    std[:, 0] = std[:, 1] = std[:, 3] = wp * h
    std[:, 2] = 1e-2
    std[:, 4] = std[:, 5] = std[:, 7] = wv * h
    std[:, 6] = 1e-5
    return std**2


def predict_many(means: np.ndarray, covs: np.ndarray, noise: NoiseModel = DEFAULT_NOISE):
    """Batched predict; ``means`` is (n, 8), ``covs`` is (n, 8, 8)."""
    if len(means) == 0:
        return means.copy(), covs.copy()
    q = _process_noise(means[:, 3], noise)
    new_means = means @ _F.T
    new_covs = _F @ covs @ _F.T
    idx = np.arange(8)
    new_covs[:, idx, idx] += q
    return new_means, _symmetrize(new_covs)


def kf_predict(s: KalmanState, noise: NoiseModel = DEFAULT_NOISE) -> KalmanState:
    m, c = predict_many(s.mean[None], s.covariance[None], noise)
    return KalmanState(m[0], c[0])


def update_many(means: np.ndarray, covs: np.ndarray, zs: np.ndarray, noise: NoiseModel = DEFAULT_NOISE):
    """Batched Kalman correction with measurement model ``[I4 | 0]``."""
    if len(means) == 0:
        return means.copy(), covs.copy()
    zs = np.asarray(zs, dtype=float)
    if not np.all(np.isfinite(zs)):
        raise ValueError("non-finite measurement")
    wp = noise.std_weight_position
    h = means[:, 3]
    r = np.empty((len(means), 4))
    r[:, 0] = r[:, 1] = r[:, 3] = wp * h
    r[:, 2] = 1e-1
    r = r**2

    proj_cov = covs[:, :4, :4].copy()
    idx = np.arange(4)
    proj_cov[:, idx, idx] += r
    pht = covs[:, :, :4]  # P H^T, (n, 8, 4)
    # K = P H^T S^-1  <=>  S K^T = H P
    gain = np.linalg.solve(proj_cov, np.swapaxes(pht, 1, 2))
    gain = np.swapaxes(gain, 1, 2)
    innovation = zs - means[:, :4]
    new_means = means + np.einsum("nij,nj->ni", gain, innovation)
    new_covs = covs - gain @ proj_cov @ np.swapaxes(gain, 1, 2)
    bad = ~(new_means[:, 3] > H_FLOOR)
    if np.any(bad):
        new_means[bad, 3] = H_FLOOR
    return new_means, _symmetrize(new_covs)


def kf_update(s: KalmanState, z, noise: NoiseModel = DEFAULT_NOISE) -> KalmanState:
    z = np.asarray(z, dtype=float)
    if z.shape != (4,) or not np.all(np.isfinite(z)):
        raise ValueError(f"non-finite or malformed measurement {z}")
    if z[3] <= 0:
        raise ValueError(f"measurement height must be positive, got {z[3]}")
    m, c = update_many(s.mean[None], s.covariance[None], z[None], noise)
    return KalmanState(m[0], c[0])


def _symmetrize(covs: np.ndarray) -> np.ndarray:
    return 0.5 * (covs + np.swapaxes(covs, -1, -2))


# --- camera motion -----------------------------------------------------------

IDENTITY_WARP = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def check_warp(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (2, 3):
        raise ValueError(f"warp must be 2x3, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("warp has non-finite entries")
    if abs(np.linalg.det(w[:, :2])) < 1e-12:
        raise ValueError(f"warp linear part is singular: {w[:, :2].tolist()}")
    return w


def is_identity_warp(w) -> bool:
    return w is None or np.array_equal(np.asarray(w, dtype=float), IDENTITY_WARP)


def _warp_transform(w: np.ndarray) -> np.ndarray:
    """8x8 linear map applied to the state (translation handled separately).

    Positions and velocities go through the 2x2 linear part, ``h`` scales with
    the y-axis scale and ``a`` with x-scale / y-scale.
    """
    lin = w[:, :2]
    sx = float(np.hypot(lin[0, 0], lin[1, 0]))
    sy = float(np.hypot(lin[0, 1], lin[1, 1]))
    block = np.zeros((4, 4))
    block[:2, :2] = lin
    block[2, 2] = sx / sy
    block[3, 3] = sy
    t = np.zeros((8, 8))
    t[:4, :4] = block
    t[4:, 4:] = block
    return t


def warp_many(means: np.ndarray, covs: np.ndarray, w) -> tuple[np.ndarray, np.ndarray]:
    w = check_warp(w)
    if len(means) == 0 or np.array_equal(w, IDENTITY_WARP):
        return means.copy(), covs.copy()
    t = _warp_transform(w)
    new_means = means @ t.T
    new_means[:, :2] += w[:, 2]
    new_covs = t @ covs @ t.T
    return new_means, _symmetrize(new_covs)


def apply_warp(s: KalmanState, w) -> KalmanState:
    m, c = warp_many(s.mean[None], s.covariance[None], w)
    return KalmanState(m[0], c[0])
