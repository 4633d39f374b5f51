"""Stationary target-region mass from simulated ensembles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..fields import DriftSpec, Ensemble, ManifoldSpec, SimConfig, simulate
from ..rng import child_rng
from .geometry import TargetRegion, check_region_inside

MIN_BOOT = 100
DEFAULT_BOOT = 400


@dataclass(frozen=True)
class YieldEstimate:
    value: float
    ci_low: float
    ci_high: float
    per_chain: tuple[float, ...]

    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


def chain_fractions(
    ensemble: Ensemble, region: TargetRegion, complement: bool = False
) -> np.ndarray:
    """Fraction of retained samples inside the region, per chain."""
    check_region_inside(region, ensemble.manifold)
    n_chains, n_rows, dim = ensemble.samples.shape
    inside = region.indicator(ensemble.samples.reshape(-1, dim))
    if complement:
        inside = ~inside
    return inside.reshape(n_chains, n_rows).mean(axis=1)


def bootstrap_mean(
    per_chain: np.ndarray, rng: np.random.Generator, n_boot: int
) -> tuple[float, float]:
    n = per_chain.size
    draws = per_chain[rng.integers(0, n, size=(n_boot, n))].mean(axis=1)
    return float(np.percentile(draws, 2.5)), float(np.percentile(draws, 97.5))


def yield_of_ensemble(
    ensemble: Ensemble,
    region: TargetRegion,
    n_boot: int = DEFAULT_BOOT,
    seed: int = 0,
    complement: bool = False,
) -> YieldEstimate:
    """Target mass of an existing ensemble with a chain-level bootstrap CI."""
    if n_boot < MIN_BOOT:
        raise ConfigError(f"n_boot must be at least {MIN_BOOT}, got {n_boot}")
    fractions = chain_fractions(ensemble, region, complement=complement)
    rng = child_rng(seed, "synergy.yield")
    lo, hi = bootstrap_mean(fractions, rng, n_boot)
    return YieldEstimate(
        value=float(fractions.mean()),
        ci_low=lo,
        ci_high=hi,
        per_chain=tuple(float(f) for f in fractions),
    )


def yield_at_target(
    manifold: ManifoldSpec,
    spec: DriftSpec,
    region: TargetRegion,
    config: SimConfig,
    seed: int = 0,
    n_boot: int = DEFAULT_BOOT,
    workers: int = 1,
) -> YieldEstimate:
    """Simulate the drift and estimate the stationary mass of the region."""
    check_region_inside(region, manifold)
    ensemble = simulate(
        manifold, spec, config, seed, label="synergy", workers=workers
    )
    return yield_of_ensemble(ensemble, region, n_boot=n_boot, seed=seed)
