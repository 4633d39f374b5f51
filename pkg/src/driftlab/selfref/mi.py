"""Mutual information between state and readout series.

Kraskov-style k-nearest-neighbour estimator (first variant) with
Chebyshev distances. Chain series are decimated to roughly one
autocorrelation time before estimation; uncertainty comes from a moving
block bootstrap whose block length covers at least one autocorrelation
time of the original series.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma

from ..errors import ConfigError

KSG_K = 5
KSG_K_MIN = 3
KSG_K_MAX = 20
NEAR_DETERMINISTIC_MI = 2.0
MIN_BOOTSTRAP = 100


def integrated_autocorr_time(series: np.ndarray, c: float = 5.0) -> float:
    """Chain-averaged integrated autocorrelation time, in sample strides.

    Uses the self-consistent window rule: the window M is the smallest
    index with M >= c * iat(M). Returns at least 1.0.
    """
    s = np.atleast_2d(np.asarray(series, dtype=float))
    n = s.shape[1]
    if n < 4:
        return 1.0
    s = s - s.mean(axis=1, keepdims=True)
    m = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(s, n=m, axis=1)
    acf = np.fft.irfft(f * np.conj(f), n=m, axis=1)[:, :n].mean(axis=0)
    if acf[0] <= 0:
        return 1.0
    rho = acf / acf[0]
    iat = 2.0 * np.cumsum(rho) - 1.0
    window = np.arange(n) >= c * iat
    idx = int(np.argmax(window)) if window.any() else n - 1
    return float(max(1.0, iat[idx]))


def _standardize(a: np.ndarray) -> np.ndarray:
    sd = a.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (a - a.mean(axis=0)) / sd


def ksg_mi(x: np.ndarray, y: np.ndarray, k: int = KSG_K) -> float:
    """Mutual information in nats between paired continuous samples."""
    if not KSG_K_MIN <= k <= KSG_K_MAX:
        raise ConfigError(
            f"neighbour count k={k} outside [{KSG_K_MIN}, {KSG_K_MAX}]"
        )
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x = x[:, None] if x.ndim == 1 else x
    y = y[:, None] if y.ndim == 1 else y
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ConfigError("x and y must be (n, dx) and (n, dy) with equal n")
    n = x.shape[0]
    if n <= k + 1:
        raise ConfigError(f"need more than k+1={k + 1} samples, got {n}")
    x = _standardize(x)
    y = _standardize(y)
    joint = np.hstack([x, y])
    eps = cKDTree(joint).query(joint, k=k + 1, p=np.inf)[0][:, k]
    # strictly-inside counts; the query includes the point itself
    r = np.nextafter(eps, 0.0)
    nx = cKDTree(x).query_ball_point(x, r, p=np.inf, return_length=True) - 1
    ny = cKDTree(y).query_ball_point(y, r, p=np.inf, return_length=True) - 1
    return float(
        digamma(k) + digamma(n) - np.mean(digamma(nx + 1) + digamma(ny + 1))
    )


@dataclass(frozen=True)
class MIEstimate:
    value: float
    ci_low: float | None
    ci_high: float | None
    n_points: int
    decimation: int
    block_len: int
    near_deterministic: bool


def _decimate(states: np.ndarray, readouts: np.ndarray, decim: int):
    return states[:, ::decim, :], readouts[:, ::decim, :]


def _pool_cap(
    x: np.ndarray, y: np.ndarray, max_points: int
) -> tuple[np.ndarray, np.ndarray]:
    xp = x.reshape(-1, x.shape[2])
    yp = y.reshape(-1, y.shape[2])
    if xp.shape[0] > max_points:
        idx = np.linspace(0, xp.shape[0] - 1, max_points).astype(np.intp)
        xp, yp = xp[idx], yp[idx]
    return xp, yp


def mutual_information(
    states: np.ndarray,
    readouts: np.ndarray,
    k: int = KSG_K,
    n_boot: int = 0,
    max_points: int = 8192,
    rng: np.random.Generator | None = None,
    ci_level: float = 0.95,
) -> MIEstimate:
    """MI between per-chain state and readout series, shapes (C, T, *).

    n_boot = 0 skips the bootstrap (point estimate only); otherwise at
    least MIN_BOOTSTRAP resamples are required.
    """
    states = np.asarray(states, dtype=float)
    readouts = np.asarray(readouts, dtype=float)
    if states.ndim != 3 or readouts.ndim != 3 or states.shape[:2] != readouts.shape[:2]:
        raise ConfigError("states and readouts must be (C, T, dim) with equal C, T")
    if 0 < n_boot < MIN_BOOTSTRAP:
        raise ConfigError(f"bootstrap needs at least {MIN_BOOTSTRAP} resamples")
    iat = max(
        integrated_autocorr_time(states[:, :, 0]),
        integrated_autocorr_time(readouts[:, :, 0]),
    )
    decim = max(1, int(np.ceil(iat)))
    xs, ys = _decimate(states, readouts, decim)
    if xs.shape[1] <= k + 1:
        raise ConfigError(
            f"series too short: {xs.shape[1]} points per chain after "
            f"decimating by the autocorrelation time ({iat:.1f} strides)"
        )
    xp, yp = _pool_cap(xs, ys, max_points)
    value = ksg_mi(xp, yp, k)

    lo = hi = None
    block = decim  # raw strides per block: at least one autocorrelation time
    if n_boot > 0:
        # blocks are resampled from the raw series and each resample is
        # decimated at a random phase, so repeated blocks contribute
        # different raw samples; the estimator is sensitive to duplicates
        rng = np.random.default_rng(0) if rng is None else rng
        n_chains, t_raw = states.shape[:2]
        n_blocks = int(np.ceil(t_raw / block))
        vals = np.empty(n_boot)
        for b in range(n_boot):
            xcs, ycs = [], []
            for c in range(n_chains):
                starts = rng.integers(0, max(1, t_raw - block + 1), size=n_blocks)
                idx = (starts[:, None] + np.arange(block)).ravel()[:t_raw]
                phase = int(rng.integers(0, decim))
                xcs.append(states[c, idx][phase::decim])
                ycs.append(readouts[c, idx][phase::decim])
            xb = np.concatenate(xcs, axis=0)
            yb = np.concatenate(ycs, axis=0)
            if xb.shape[0] > max_points:
                sel = np.linspace(0, xb.shape[0] - 1, max_points).astype(np.intp)
                xb, yb = xb[sel], yb[sel]
            vals[b] = ksg_mi(xb, yb, k)
        tail = 100.0 * (1.0 - ci_level) / 2.0
        lo, hi = np.percentile(vals, [tail, 100.0 - tail])
    return MIEstimate(
        value=value,
        ci_low=None if lo is None else float(lo),
        ci_high=None if hi is None else float(hi),
        n_points=xp.shape[0],
        decimation=decim,
        block_len=block,
        near_deterministic=value > NEAR_DETERMINISTIC_MI,
    )
