"""Summed detection error under symmetric adversarial corruption.

Risk at rate alpha is the false-positive rate on base-truth streams
corrupted by mimic-shift plus the false-negative rate on shifted-truth
streams corrupted by mimic-null, both at the same rate. Each side is a
Monte Carlo proportion over independent trials; the interval adds the two
Wilson intervals end to end. Trial draws are seeded per side only, so risk
evaluations at different rates under one seed share nested corruption
masks and the empirical curve is close to monotone in the rate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..rng import child_rng
from .detector import DetectorConfig, _detect_block
from .ontology import Ontology
from .stream import (
    MIMIC_NULL,
    MIMIC_SHIFT,
    TRUTH_NULL,
    TRUTH_SHIFT,
    AdversaryModel,
    _sample_block,
    default_stream_length,
)

MIN_TRIALS = 200
DEFAULT_TRIALS = 400
CI_Z = 1.96


def wilson_interval(
    successes: int, trials: int, z: float = CI_Z
) -> tuple[float, float]:
    if trials < 1:
        raise ConfigError("Wilson interval needs at least one trial")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class RiskEstimate:
    value: float  # fp_rate + fn_rate, in [0, 2]
    ci_low: float
    ci_high: float
    fp_rate: float
    fn_rate: float
    fp_count: int
    fn_count: int
    n_trials: int
    n_symbols: int


def risk(
    ontology: Ontology,
    rate: float,
    detector: DetectorConfig,
    n_trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    n_symbols: int | None = None,
) -> RiskEstimate:
    if n_trials < MIN_TRIALS:
        raise ConfigError(
            f"risk needs at least {MIN_TRIALS} trials per side, got {n_trials}"
        )
    if n_symbols is None:
        n_symbols = default_stream_length(ontology)
    if n_symbols < 1:
        raise ConfigError("n_symbols must be at least 1")
    llr = ontology.llr()

    fp_streams = _sample_block(
        child_rng(seed, "breakdown.risk", 0),
        ontology,
        TRUTH_NULL,
        AdversaryModel(rate, MIMIC_SHIFT),
        n_trials,
        n_symbols,
    )
    fn_streams = _sample_block(
        child_rng(seed, "breakdown.risk", 1),
        ontology,
        TRUTH_SHIFT,
        AdversaryModel(rate, MIMIC_NULL),
        n_trials,
        n_symbols,
    )
    fp_count = int(_detect_block(fp_streams, llr, detector).sum())
    fn_count = int((~_detect_block(fn_streams, llr, detector)).sum())
    fp_lo, fp_hi = wilson_interval(fp_count, n_trials)
    fn_lo, fn_hi = wilson_interval(fn_count, n_trials)
    return RiskEstimate(
        value=(fp_count + fn_count) / n_trials,
        ci_low=fp_lo + fn_lo,
        ci_high=fp_hi + fn_hi,
        fp_rate=fp_count / n_trials,
        fn_rate=fn_count / n_trials,
        fp_count=fp_count,
        fn_count=fn_count,
        n_trials=n_trials,
        n_symbols=n_symbols,
    )
