"""Superlinearity of paired perturbations and yield curves under driving.

The four-condition experiment (base, +A, +B, +A+B) reuses one master seed,
so every condition sees the same Brownian increments per chain index and
the yield deltas are paired differences. The superlinearity factor divides
the joint response by the sum of single responses; additivity of
disjoint-support wells over a gradient base puts it near 1.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigError
from ..fields import DriftSpec, ManifoldSpec, SimConfig, simulate
from ..io_utils import atomic_write_text, render_csv, render_kv
from ..rng import child_rng, child_seed_sequence
from .geometry import (
    PerturbationWell,
    TargetRegion,
    apply_wells,
    check_region_inside,
    disjoint_supports,
    touches_support,
)
from .yields import (
    DEFAULT_BOOT,
    MIN_BOOT,
    YieldEstimate,
    bootstrap_mean,
    chain_fractions,
)

METRIC_YIELD = "yield"
METRIC_DEPTH = "neg-log-yield"  # chemical-depth reading of the same mass

CONDITIONS = ("base", "A", "B", "AB")

MIN_SWEEP_VALUES = 7
SMOOTH_WINDOW = 3


@dataclass(frozen=True)
class SynergyReport:
    yields: tuple[YieldEstimate, ...]  # base, A, B, AB
    delta_a: float
    delta_b: float
    delta_ab: float
    superlinearity: float  # nan when indeterminate
    ci_low: float
    ci_high: float
    indeterminate: bool
    paired: bool
    metric: str
    note: str = ""

    @property
    def y_base(self) -> float:
        return self.yields[0].value

    @property
    def y_a(self) -> float:
        return self.yields[1].value

    @property
    def y_b(self) -> float:
        return self.yields[2].value

    @property
    def y_ab(self) -> float:
        return self.yields[3].value


def _metric(fractions: np.ndarray, metric: str) -> np.ndarray:
    if metric == METRIC_YIELD:
        return fractions
    if metric == METRIC_DEPTH:
        floor = 1e-300
        return -np.log(np.maximum(fractions, floor))
    raise ConfigError(
        f"unknown synergy metric {metric!r}; expected "
        f"{METRIC_YIELD!r} or {METRIC_DEPTH!r}"
    )


def synergy_experiment(
    manifold: ManifoldSpec,
    base: DriftSpec,
    well_a: PerturbationWell,
    well_b: PerturbationWell,
    region: TargetRegion,
    config: SimConfig,
    seed: int = 0,
    n_boot: int = DEFAULT_BOOT,
    paired: bool = True,
    metric: str = METRIC_YIELD,
    workers: int = 1,
) -> SynergyReport:
    """Four-condition well experiment at a shared target region.

    Preconditions: the wells' support balls must not intersect each other,
    and the target region may touch at most one of them. An indeterminate
    report (not an error) is returned when the single-well responses sum
    to less than their own bootstrap CI width.
    """
    if n_boot < MIN_BOOT:
        raise ConfigError(f"n_boot must be at least {MIN_BOOT}, got {n_boot}")
    _metric(np.ones(1), metric)
    check_region_inside(region, manifold)
    if not disjoint_supports(well_a, well_b):
        raise ConfigError(
            "well supports intersect; synergy needs disjoint perturbations"
        )
    if touches_support(region, well_a) and touches_support(region, well_b):
        raise ConfigError(
            "target region touches both well supports; move the target or "
            "shrink the wells"
        )

    specs = (
        base,
        apply_wells(base, well_a),
        apply_wells(base, well_b),
        apply_wells(base, well_a, well_b),
    )
    if paired:
        seeds = (seed,) * 4
    else:
        seeds = tuple(
            int(child_seed_sequence(seed, "synergy.cond", i).generate_state(1)[0])
            for i in range(4)
        )

    def run(item: tuple[int, DriftSpec]) -> np.ndarray:
        index, spec = item
        ens = simulate(
            manifold, spec, config, seeds[index], label="synergy"
        )
        return chain_fractions(ens, region)

    items = list(enumerate(specs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fractions = np.stack(list(pool.map(run, items)))
    else:
        fractions = np.stack([run(it) for it in items])

    rng = child_rng(seed, "synergy.boot")
    estimates = []
    for row in fractions:
        lo, hi = bootstrap_mean(row, rng, n_boot)
        estimates.append(
            YieldEstimate(float(row.mean()), lo, hi, tuple(map(float, row)))
        )

    values = _metric(fractions, metric)
    n_chains = values.shape[1]
    means = values.mean(axis=1)
    delta_a = float(means[1] - means[0])
    delta_b = float(means[2] - means[0])
    delta_ab = float(means[3] - means[0])
    denom = delta_a + delta_b

    # joint bootstrap over chain indices; paired runs share the index draw
    # across conditions so the replicate deltas stay paired
    denom_reps = np.empty(n_boot)
    ratio_reps = np.empty(n_boot)
    for b in range(n_boot):
        if paired:
            idx = rng.integers(0, n_chains, n_chains)
            m = values[:, idx].mean(axis=1)
        else:
            m = np.array(
                [row[rng.integers(0, n_chains, n_chains)].mean() for row in values]
            )
        da, db, dab = m[1] - m[0], m[2] - m[0], m[3] - m[0]
        denom_reps[b] = da + db
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio_reps[b] = dab / (da + db)

    denom_width = float(
        np.percentile(denom_reps, 97.5) - np.percentile(denom_reps, 2.5)
    )
    indeterminate = abs(denom) <= denom_width
    if indeterminate:
        s = s_lo = s_hi = float("nan")
        note = (
            f"single-well responses sum to {denom:.3g}, below their CI "
            f"width {denom_width:.3g}; superlinearity indeterminate"
        )
    else:
        finite = ratio_reps[np.isfinite(ratio_reps)]
        s = delta_ab / denom
        s_lo = float(np.percentile(finite, 2.5))
        s_hi = float(np.percentile(finite, 97.5))
        note = ""
    return SynergyReport(
        yields=tuple(estimates),
        delta_a=delta_a,
        delta_b=delta_b,
        delta_ab=delta_ab,
        superlinearity=s,
        ci_low=s_lo,
        ci_high=s_hi,
        indeterminate=indeterminate,
        paired=paired,
        metric=metric,
        note=note,
    )


@dataclass(frozen=True)
class YieldCurve:
    values: tuple[float, ...]  # driving parameter, ascending
    yields: tuple[YieldEstimate, ...]
    smoothed: tuple[float, ...]
    mode_count: int
    unimodal: bool
    peaks: tuple[int, ...]  # indices into values


def smooth_moving_average(y: np.ndarray, window: int = SMOOTH_WINDOW) -> np.ndarray:
    """Centered moving average; windows shrink at the edges."""
    n = y.size
    half = window // 2
    out = np.empty(n)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        out[i] = y[lo:hi].mean()
    return out


def count_modes(
    smoothed: np.ndarray, half_widths: np.ndarray
) -> tuple[int, tuple[int, ...]]:
    """Strict local maxima that stay separated after a CI-depth merge.

    Adjacent candidate peaks merge (the lower one is dropped) when the
    valley between them is shallower than the uncertainty at the valley
    plus the uncertainty at the lower peak.
    """
    n = smoothed.size
    if n == 0:
        return 0, ()
    peaks = []
    for i in range(n):
        left = smoothed[i] > smoothed[i - 1] if i > 0 else True
        right = smoothed[i] > smoothed[i + 1] if i < n - 1 else True
        if n > 1 and left and right:
            peaks.append(i)
    while len(peaks) > 1:
        merged = False
        for k in range(len(peaks) - 1):
            p, q = peaks[k], peaks[k + 1]
            valley = p + int(np.argmin(smoothed[p : q + 1]))
            lower = p if smoothed[p] <= smoothed[q] else q
            depth = smoothed[lower] - smoothed[valley]
            if depth <= half_widths[valley] + half_widths[lower]:
                peaks.pop(k if lower == p else k + 1)
                merged = True
                break
        if not merged:
            break
    return len(peaks), tuple(peaks)


def yield_curve(
    family: Callable[[float], DriftSpec],
    manifold: ManifoldSpec,
    region: TargetRegion,
    sweep: Sequence[float],
    config: SimConfig,
    seed: int = 0,
    n_boot: int = DEFAULT_BOOT,
    workers: int = 1,
) -> YieldCurve:
    """Yield at the target across a driving sweep, with a unimodality verdict."""
    sweep = [float(v) for v in sweep]
    if len(sweep) < MIN_SWEEP_VALUES:
        raise ConfigError(
            f"sweep needs at least {MIN_SWEEP_VALUES} values, got {len(sweep)}"
        )
    if any(b <= a for a, b in zip(sweep, sweep[1:])):
        raise ConfigError("sweep values must be strictly increasing")
    check_region_inside(region, manifold)

    def run(item: tuple[int, float]) -> np.ndarray:
        index, value = item
        sub_seed = int(
            child_seed_sequence(seed, "synergy.sweep", index).generate_state(1)[0]
        )
        ens = simulate(
            manifold, family(value), config, sub_seed, label="synergy"
        )
        return chain_fractions(ens, region)

    items = list(enumerate(sweep))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, items))
    else:
        rows = [run(it) for it in items]

    rng = child_rng(seed, "synergy.boot")
    estimates = []
    for row in rows:
        lo, hi = bootstrap_mean(row, rng, n_boot)
        estimates.append(
            YieldEstimate(float(row.mean()), lo, hi, tuple(map(float, row)))
        )
    y = np.array([e.value for e in estimates])
    smoothed = smooth_moving_average(y)
    # averaging w independent sims shrinks the noise by sqrt(w)
    half = np.array([e.half_width() for e in estimates])
    half = smooth_moving_average(half) / np.sqrt(SMOOTH_WINDOW)
    count, peaks = count_modes(smoothed, half)
    return YieldCurve(
        values=tuple(sweep),
        yields=tuple(estimates),
        smoothed=tuple(float(v) for v in smoothed),
        mode_count=count,
        unimodal=count <= 1,
        peaks=peaks,
    )


SYNERGY_CSV_HEADER = ("condition", "yield", "ci_lo", "ci_hi")
CURVE_CSV_HEADER = ("value", "yield", "ci_lo", "ci_hi", "smoothed")


def synergy_rows(report: SynergyReport) -> list[tuple]:
    return [
        (name, est.value, est.ci_low, est.ci_high)
        for name, est in zip(CONDITIONS, report.yields)
    ]


def write_synergy_csv(path: str, report: SynergyReport) -> None:
    atomic_write_text(path, render_csv(SYNERGY_CSV_HEADER, synergy_rows(report)))


def synergy_summary(report: SynergyReport) -> dict:
    return {
        "delta_a": report.delta_a,
        "delta_b": report.delta_b,
        "delta_ab": report.delta_ab,
        "superlinearity": report.superlinearity,
        "ci_lo": report.ci_low,
        "ci_hi": report.ci_high,
        "indeterminate": report.indeterminate,
        "paired": report.paired,
        "metric": report.metric,
    }


def write_synergy_summary(path: str, report: SynergyReport) -> None:
    atomic_write_text(path, render_kv(synergy_summary(report)))


def curve_csv_rows(curve: YieldCurve) -> list[tuple]:
    return [
        (v, e.value, e.ci_low, e.ci_high, s)
        for v, e, s in zip(curve.values, curve.yields, curve.smoothed)
    ]


def write_yield_curve_csv(path: str, curve: YieldCurve) -> None:
    atomic_write_text(path, render_csv(CURVE_CSV_HEADER, curve_csv_rows(curve)))
