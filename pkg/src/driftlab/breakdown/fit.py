"""Breakdown-rate estimation and its scaling fit.

For each detector, the largest corruption rate with risk below 1/2 is
found by bisection on a common-random-number risk curve; the breakdown
rate is the maximum over the detector family. Uncertainty comes from a
parametric bootstrap of the per-side trial counts along the stored
evaluation paths, re-taking the family maximum per replicate. The scaling
fit regresses log(alpha_dagger) on log(log N).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DegenerateInstanceError
from ..io_utils import render_csv, render_kv, atomic_write_text
from ..rng import child_rng, child_seed_sequence
from .detector import DetectorConfig, default_detector_family
from .ontology import Ontology, make_ontology
from .risk import DEFAULT_TRIALS, RiskEstimate, risk, wilson_interval
from .stream import default_stream_length

RISK_THRESHOLD = 0.5
BISECTION_TOL = 0.01
BOOTSTRAP_DEFAULT = 200
# curve defaults are tighter than single-point defaults: CI separation
# between adjacent N values needs crossing noise well under the gaps
CURVE_TRIALS = 2000
CURVE_TOL = 0.0025
MIN_FIT_POINTS = 5
FIT_SPAN_DECADES = 2.0


@dataclass(frozen=True)
class DetectorCurve:
    """Risk evaluations accumulated while bisecting one detector."""

    detector: DetectorConfig
    rates: tuple[float, ...]  # ascending
    fp_counts: tuple[int, ...]
    fn_counts: tuple[int, ...]
    n_trials: int
    alpha_dagger: float

    def risks(self) -> np.ndarray:
        fp = np.asarray(self.fp_counts, dtype=float)
        fn = np.asarray(self.fn_counts, dtype=float)
        return (fp + fn) / self.n_trials


@dataclass(frozen=True)
class BreakdownResult:
    alpha_dagger: float
    ci_low: float
    ci_high: float
    detector: DetectorConfig  # family member attaining the maximum
    curves: tuple[DetectorCurve, ...]
    n_symbols: int
    n_trials: int
    n_boot: int
    monotonicity_violations: int
    note: str = ""


def _crossing(rates: np.ndarray, risks: np.ndarray) -> float:
    """Rate where risk first reaches 1/2, interpolated on an ascending grid."""
    for i in range(len(rates)):
        if risks[i] >= RISK_THRESHOLD:
            if i == 0:
                return float(rates[0])
            r0, r1 = risks[i - 1], risks[i]
            if r1 > r0:
                frac = (RISK_THRESHOLD - r0) / (r1 - r0)
                return float(rates[i - 1] + frac * (rates[i] - rates[i - 1]))
            return float(0.5 * (rates[i - 1] + rates[i]))
    return float(rates[-1])


def _bisect_detector(
    ontology: Ontology,
    detector: DetectorConfig,
    tol: float,
    n_trials: int,
    seed: int,
    n_symbols: int,
) -> tuple[DetectorCurve, bool]:
    """Bisection path for one detector; returns (curve, degenerate_at_zero)."""
    evals: dict[float, RiskEstimate] = {}

    def at(rate: float) -> RiskEstimate:
        if rate not in evals:
            evals[rate] = risk(ontology, rate, detector, n_trials, seed, n_symbols)
        return evals[rate]

    def pack(alpha: float) -> DetectorCurve:
        rates = sorted(evals)
        return DetectorCurve(
            detector=detector,
            rates=tuple(rates),
            fp_counts=tuple(evals[r].fp_count for r in rates),
            fn_counts=tuple(evals[r].fn_count for r in rates),
            n_trials=n_trials,
            alpha_dagger=alpha,
        )

    if at(0.0).value >= RISK_THRESHOLD:
        return pack(0.0), True
    # mixing rates above 1/2 swap the stream distributions, so the risk
    # curve reaches 1/2 by rate 0.5 up to Monte Carlo noise; widen if not
    hi = 0.5
    while at(hi).value < RISK_THRESHOLD:
        if hi >= 1.0:
            return pack(1.0), False
        hi = min(1.0, hi + 0.25)
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if at(mid).value < RISK_THRESHOLD:
            lo = mid
        else:
            hi = mid
    return pack(0.5 * (lo + hi)), False


def _count_inversions(curve: DetectorCurve) -> int:
    """CI-separated decreases of risk along increasing rate."""
    est = [
        wilson_sum_interval(fp, fn, curve.n_trials)
        for fp, fn in zip(curve.fp_counts, curve.fn_counts)
    ]
    count = 0
    for i in range(len(est) - 1):
        for j in range(i + 1, len(est)):
            if est[i][0] > est[j][1]:
                count += 1
    return count


def wilson_sum_interval(
    fp_count: int, fn_count: int, n_trials: int
) -> tuple[float, float]:
    fp = wilson_interval(fp_count, n_trials)
    fn = wilson_interval(fn_count, n_trials)
    return (fp[0] + fn[0], fp[1] + fn[1])


def breakdown_rate(
    ontology: Ontology,
    family: tuple[DetectorConfig, ...] | None = None,
    tol: float = BISECTION_TOL,
    n_trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    n_symbols: int | None = None,
    n_boot: int = BOOTSTRAP_DEFAULT,
) -> BreakdownResult:
    """Largest corruption rate at which the best family member keeps risk < 1/2."""
    if tol <= 0:
        raise ConfigError("bisection tol must be positive")
    if n_boot < 0:
        raise ConfigError("n_boot must be nonnegative")
    if n_symbols is None:
        n_symbols = default_stream_length(ontology)
    if family is None:
        family = default_detector_family(ontology, n_symbols)
    if not family:
        raise ConfigError("detector family is empty")

    curves = []
    all_degenerate = True
    for detector in family:
        curve, degenerate = _bisect_detector(
            ontology, detector, tol, n_trials, seed, n_symbols
        )
        curves.append(curve)
        all_degenerate &= degenerate
    if all_degenerate:
        raise DegenerateInstanceError(
            f"risk is at least 1/2 with no corruption for every one of the "
            f"{len(family)} detectors; the instance is undetectable as posed"
        )

    best = max(range(len(curves)), key=lambda i: curves[i].alpha_dagger)
    alpha = curves[best].alpha_dagger

    ci_low = ci_high = alpha
    if n_boot > 0:
        rng = child_rng(seed, "breakdown.boot")
        replicates = np.empty(n_boot)
        for b in range(n_boot):
            family_max = 0.0
            for curve in curves:
                rates = np.asarray(curve.rates)
                fp = rng.binomial(curve.n_trials, np.asarray(curve.fp_counts) / curve.n_trials)
                fn = rng.binomial(curve.n_trials, np.asarray(curve.fn_counts) / curve.n_trials)
                risks = (fp + fn) / curve.n_trials
                family_max = max(family_max, _crossing(rates, risks))
            replicates[b] = family_max
        ci_low = float(np.percentile(replicates, 2.5))
        ci_high = float(np.percentile(replicates, 97.5))

    violations = sum(_count_inversions(c) for c in curves)
    note = ""
    if violations:
        note = (
            f"risk curve decreased with rate at {violations} CI-separated "
            "pair(s); reported as-is"
        )
    return BreakdownResult(
        alpha_dagger=alpha,
        ci_low=ci_low,
        ci_high=ci_high,
        detector=curves[best].detector,
        curves=tuple(curves),
        n_symbols=n_symbols,
        n_trials=n_trials,
        n_boot=n_boot,
        monotonicity_violations=violations,
        note=note,
    )


@dataclass(frozen=True)
class ScalingFit:
    gamma1: float
    gamma1_se: float
    c1: float
    n_points: int
    r_squared: float
    law_violation: bool  # slope indistinguishable from no decay


def scaling_fit(
    n_values: np.ndarray,
    alpha_values: np.ndarray,
    log_alpha_se: np.ndarray | None = None,
) -> ScalingFit:
    """Fit alpha_dagger = c1 / (log N)^gamma1 by regression in log coordinates.

    Needs at least 5 points spanning at least 2 decades of N. Optional
    per-point standard errors on log(alpha_dagger) turn the regression
    into weighted least squares.
    """
    n_values = np.asarray(n_values, dtype=float)
    alpha_values = np.asarray(alpha_values, dtype=float)
    if n_values.shape != alpha_values.shape or n_values.ndim != 1:
        raise ConfigError("n_values and alpha_values must be matching 1-d arrays")
    if len(n_values) < MIN_FIT_POINTS:
        raise ConfigError(
            f"scaling fit needs at least {MIN_FIT_POINTS} points, "
            f"got {len(n_values)}"
        )
    if np.any(n_values < 2):
        raise ConfigError("n_values must be at least 2")
    span = math.log10(n_values.max() / n_values.min())
    if span < FIT_SPAN_DECADES:
        raise ConfigError(
            f"n_values span {span:.2f} decades; at least "
            f"{FIT_SPAN_DECADES:g} required"
        )
    if np.any(alpha_values <= 0):
        raise ConfigError("alpha_values must be positive to fit in log scale")

    x = np.log(np.log(n_values))
    y = np.log(alpha_values)
    if log_alpha_se is None:
        w = np.ones_like(x)
    else:
        log_alpha_se = np.asarray(log_alpha_se, dtype=float)
        if log_alpha_se.shape != x.shape or np.any(log_alpha_se <= 0):
            raise ConfigError("log_alpha_se must be positive and match n_values")
        w = 1.0 / log_alpha_se**2
    wsum = w.sum()
    xb = (w * x).sum() / wsum
    yb = (w * y).sum() / wsum
    sxx = (w * (x - xb) ** 2).sum()
    if sxx <= 0:
        raise ConfigError("n_values are too clustered to identify a slope")
    slope = (w * (x - xb) * (y - yb)).sum() / sxx
    intercept = yb - slope * xb
    resid = y - (intercept + slope * x)
    ssr = (w * resid**2).sum()
    sst = (w * (y - yb) ** 2).sum()
    dof = len(x) - 2
    if log_alpha_se is None:
        slope_var = (ssr / dof) / sxx if dof > 0 else 0.0
    else:
        slope_var = 1.0 / sxx
    gamma1 = -slope
    gamma1_se = float(np.sqrt(slope_var))
    c1 = float(np.mean(alpha_values * np.log(n_values) ** gamma1))
    r_squared = 1.0 if sst == 0 else float(1.0 - ssr / sst)
    return ScalingFit(
        gamma1=float(gamma1),
        gamma1_se=gamma1_se,
        c1=c1,
        n_points=len(x),
        r_squared=r_squared,
        law_violation=bool(gamma1 - 2.0 * gamma1_se <= 0.0),
    )


@dataclass(frozen=True)
class BreakdownPoint:
    n_primitives: int
    delta: float
    result: BreakdownResult


@dataclass(frozen=True)
class BreakdownCurve:
    points: tuple[BreakdownPoint, ...]
    fit: ScalingFit | None
    note: str = ""


def breakdown_curve(
    n_values: tuple[int, ...],
    delta: float,
    seed: int = 0,
    n_trials: int = CURVE_TRIALS,
    tol: float = CURVE_TOL,
    n_symbols: int | None = None,
    family: tuple[DetectorConfig, ...] | None = None,
    n_boot: int = BOOTSTRAP_DEFAULT,
    workers: int = 1,
) -> BreakdownCurve:
    """Breakdown rate per alphabet size, plus the scaling fit when fittable.

    Each alphabet size runs with a derived seed, a fresh tilted ontology at
    the shared delta, and (unless an explicit family is given) the default
    detector family sized to its own detection lower bound.
    """
    if len(n_values) < 1:
        raise ConfigError("n_values must not be empty")
    if len(set(n_values)) != len(n_values):
        raise ConfigError("n_values must not repeat")

    def run_one(item: tuple[int, int]) -> BreakdownPoint:
        index, n = item
        sub_seed = int(
            child_seed_sequence(seed, "breakdown.curve", index).generate_state(1)[0]
        )
        ontology = make_ontology(n, delta, seed=sub_seed)
        result = breakdown_rate(
            ontology,
            family=family,
            tol=tol,
            n_trials=n_trials,
            seed=sub_seed,
            n_symbols=n_symbols,
            n_boot=n_boot,
        )
        # report the requested divergence, not the 1e-4-matched realization
        return BreakdownPoint(n, delta, result)

    items = list(enumerate(n_values))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(run_one, items))
    else:
        points = tuple(map(run_one, items))

    fit = None
    note = ""
    alphas = np.array([p.result.alpha_dagger for p in points])
    ns = np.array([p.n_primitives for p in points], dtype=float)
    if len(points) >= MIN_FIT_POINTS and np.all(alphas > 0):
        span = math.log10(ns.max() / ns.min())
        if span >= FIT_SPAN_DECADES:
            fit = scaling_fit(ns, alphas)
        else:
            note = f"no fit: N range spans {span:.2f} decades, need 2"
    else:
        note = "no fit: need 5 positive breakdown rates"
    return BreakdownCurve(points=points, fit=fit, note=note)


BREAKDOWN_CSV_HEADER = (
    "N",
    "delta",
    "alpha_dagger",
    "ci_lo",
    "ci_hi",
    "best_w",
    "best_theta",
    "best_r",
)


def curve_rows(curve: BreakdownCurve) -> list[tuple]:
    rows = []
    for p in curve.points:
        r = p.result
        rows.append(
            (
                p.n_primitives,
                p.delta,
                r.alpha_dagger,
                r.ci_low,
                r.ci_high,
                r.detector.window,
                r.detector.threshold,
                r.detector.run_length,
            )
        )
    return rows


def write_breakdown_csv(path: str, curve: BreakdownCurve) -> None:
    atomic_write_text(path, render_csv(BREAKDOWN_CSV_HEADER, curve_rows(curve)))


def fit_summary(fit: ScalingFit) -> dict:
    return {
        "gamma1": fit.gamma1,
        "gamma1_se": fit.gamma1_se,
        "c1": fit.c1,
        "n_points": fit.n_points,
        "r_squared": fit.r_squared,
    }


def write_fit_summary(path: str, fit: ScalingFit) -> None:
    atomic_write_text(path, render_kv(fit_summary(fit)))
