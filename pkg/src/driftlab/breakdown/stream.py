"""Symbol streams with i.i.d. adversarial corruption.

Each stream position is drawn from the truth context, then independently
replaced with probability `rate` by a draw from the opposite context:
mimic-shift injects shifted-context symbols into base streams, mimic-null
injects base-context symbols into shifted streams. The draw order is fixed
(corruption mask, truth symbols, adversary symbols), so streams at
different rates under a common seed share nested corruption masks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..rng import child_rng
from .ontology import Ontology, detection_lower_bound

TRUTH_NULL = "null"
TRUTH_SHIFT = "shift"
MIMIC_SHIFT = "mimic-shift"
MIMIC_NULL = "mimic-null"

STREAM_LENGTH_FACTOR = 20.0
STREAM_LENGTH_FLOOR = 16


@dataclass(frozen=True)
class AdversaryModel:
    """Position-wise corruption at a fixed rate with one injection strategy."""

    rate: float
    strategy: str

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigError(f"adversary rate must lie in [0, 1], got {self.rate!r}")
        if self.strategy not in (MIMIC_SHIFT, MIMIC_NULL):
            raise ConfigError(
                f"unknown adversary strategy {self.strategy!r}; expected "
                f"{MIMIC_SHIFT!r} or {MIMIC_NULL!r}"
            )


def default_stream_length(ontology: Ontology) -> int:
    """Twenty detection lower bounds, so honest detection has headroom."""
    if ontology.delta <= 0:
        raise ConfigError(
            "stream length has no default when delta = 0; pass n_symbols"
        )
    bound = detection_lower_bound(ontology.n_primitives, ontology.delta)
    return max(STREAM_LENGTH_FLOOR, math.ceil(STREAM_LENGTH_FACTOR * bound))


def _draw_symbols(
    rng: np.random.Generator, p: np.ndarray, shape: tuple[int, ...]
) -> np.ndarray:
    # inverse-CDF draws; cumsum is clamped so u < 1 always lands in range
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(shape), side="right")


def _context_pair(
    ontology: Ontology, truth: str, strategy: str
) -> tuple[np.ndarray, np.ndarray]:
    if truth not in (TRUTH_NULL, TRUTH_SHIFT):
        raise ConfigError(
            f"unknown truth {truth!r}; expected {TRUTH_NULL!r} or {TRUTH_SHIFT!r}"
        )
    truth_p = ontology.p1 if truth == TRUTH_NULL else ontology.p2
    adv_p = ontology.p2 if strategy == MIMIC_SHIFT else ontology.p1
    return truth_p, adv_p


def _sample_block(
    rng: np.random.Generator,
    ontology: Ontology,
    truth: str,
    adversary: AdversaryModel,
    n_trials: int,
    n_symbols: int,
) -> np.ndarray:
    truth_p, adv_p = _context_pair(ontology, truth, adversary.strategy)
    shape = (n_trials, n_symbols)
    corrupt = rng.random(shape) < adversary.rate
    base = _draw_symbols(rng, truth_p, shape)
    injected = _draw_symbols(rng, adv_p, shape)
    return np.where(corrupt, injected, base)


def sample_stream(
    ontology: Ontology,
    truth: str,
    adversary: AdversaryModel,
    n_symbols: int,
    seed: int = 0,
) -> np.ndarray:
    """One corrupted symbol stream of length n_symbols."""
    if n_symbols < 1:
        raise ConfigError("n_symbols must be at least 1")
    rng = child_rng(seed, "breakdown.stream")
    return _sample_block(rng, ontology, truth, adversary, 1, n_symbols)[0]
