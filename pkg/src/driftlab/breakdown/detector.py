"""Windowed log-likelihood-ratio shift detection.

The stream is split into disjoint consecutive windows of fixed length; each
window's summed log-likelihood ratio ln(p2/p1) is compared against the
threshold, and a shift is declared at the first run of `run_length`
consecutive windows above it. Trailing symbols short of a full window are
discarded, and streams shorter than window * run_length return no-shift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .ontology import Ontology, detection_lower_bound

WINDOW_FACTORS = (6.0, 10.0)
UNANIMITY_SLACKS = (0, 1, 2)


@dataclass(frozen=True)
class DetectorConfig:
    window: int
    threshold: float
    run_length: int = 1

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError("detector window must be at least 1 symbol")
        if self.run_length < 1:
            raise ConfigError("detector run_length must be at least 1")
        if not np.isfinite(self.threshold):
            raise ConfigError("detector threshold must be finite")


@dataclass(frozen=True)
class Detection:
    shift: bool
    index: int | None  # window index at which the run completed


def _window_sums(streams: np.ndarray, llr: np.ndarray, window: int) -> np.ndarray:
    """Per-window LLR sums for a batch of streams, shape (n, n_windows)."""
    n_windows = streams.shape[1] // window
    trimmed = streams[:, : n_windows * window]
    values = llr[trimmed]
    return values.reshape(streams.shape[0], n_windows, window).sum(axis=2)


def _first_run_index(passing: np.ndarray, run_length: int) -> np.ndarray:
    """Index where a run of run_length True values completes, -1 if never."""
    n, n_windows = passing.shape
    run = np.zeros(n, dtype=np.int64)
    found = np.full(n, -1, dtype=np.int64)
    for j in range(n_windows):
        run = (run + 1) * passing[:, j]
        hit = (run >= run_length) & (found < 0)
        found[hit] = j
    return found


def _detect_block(
    streams: np.ndarray, llr: np.ndarray, detector: DetectorConfig
) -> np.ndarray:
    """Shift decisions for a batch of streams, shape (n,), dtype bool."""
    n_windows = streams.shape[1] // detector.window
    if n_windows < detector.run_length:
        return np.zeros(streams.shape[0], dtype=bool)
    sums = _window_sums(streams, llr, detector.window)
    passing = sums > detector.threshold
    return _first_run_index(passing, detector.run_length) >= 0


def detect_shift(
    stream: np.ndarray, ontology: Ontology, detector: DetectorConfig
) -> Detection:
    stream = np.asarray(stream)
    if stream.ndim != 1:
        raise ConfigError("stream must be one-dimensional")
    if not np.issubdtype(stream.dtype, np.integer):
        raise ConfigError("stream must contain integer symbol indices")
    if stream.size and (stream.min() < 0 or stream.max() >= ontology.n_primitives):
        raise ConfigError(
            f"stream symbols must lie in [0, {ontology.n_primitives})"
        )
    n_windows = stream.size // detector.window
    if n_windows < detector.run_length:
        return Detection(False, None)
    sums = _window_sums(stream[None, :], ontology.llr(), detector.window)
    passing = sums > detector.threshold
    index = int(_first_run_index(passing, detector.run_length)[0])
    if index < 0:
        return Detection(False, None)
    return Detection(True, index)


def default_detector_family(
    ontology: Ontology,
    n_symbols: int,
    window_factors: tuple[float, ...] = WINDOW_FACTORS,
    slacks: tuple[int, ...] = UNANIMITY_SLACKS,
) -> tuple[DetectorConfig, ...]:
    """Strict-unanimity detectors sized by the detection lower bound.

    Window lengths are multiples of ln(N)/delta. A window passes when its
    LLR sits within slack + 1/2 maximal single-symbol swaps of the
    everything-at-top-evidence level, i.e. when at most `slack` symbols
    carry bottom-level evidence. Run length is 1: one passing window
    anywhere declares the shift, so defeating these detectors requires
    landing low-evidence symbols in every window, which ties the
    breakdown rate to 1/window.
    """
    if ontology.delta <= 0:
        raise ConfigError("detector family needs an ontology with delta > 0")
    llr = ontology.llr()
    top, bottom = float(llr.max()), float(llr.min())
    swap_cost = top - bottom
    if swap_cost <= 0:
        raise ConfigError("detector family needs contexts that differ")
    bound = detection_lower_bound(ontology.n_primitives, ontology.delta)
    family = []
    seen = set()
    for factor in window_factors:
        window = max(2, math.ceil(factor * bound))
        if window > n_symbols:
            continue
        for slack in slacks:
            threshold = window * top - (slack + 0.5) * swap_cost
            key = (window, round(threshold, 12))
            if key in seen:
                continue
            seen.add(key)
            family.append(DetectorConfig(window, threshold, 1))
    if not family:
        raise ConfigError(
            f"no default detector fits a stream of {n_symbols} symbols at "
            f"delta {ontology.delta:.4g}"
        )
    return tuple(family)
