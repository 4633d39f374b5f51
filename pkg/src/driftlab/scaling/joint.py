"""Joint size-scaling of breakdown rates and coupling thresholds.

Per size N the breakdown rate comes from the adversarial corruption
bisection and the coupling threshold from the feedback-strength scan;
both are then regressed on log log N. Verdict flags encode the four
falsification clauses: (a) either regression is visibly nonlinear,
(b) the breakdown exponent leaves 1.0 +- 0.15, (c) the threshold
exponent differs across families claiming the same class, (d) the
threshold exponent is not positive.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..breakdown import ScalingFit, breakdown_rate, scaling_fit
from ..errors import CensoringError, ConfigError
from ..io_utils import atomic_write_text, render_csv, render_kv
from ..rng import child_seed_sequence
from ..selfref import evaluate_coupling, kappa_threshold
from .family import ScalingConfig, SystemFamily

GAMMA1_TARGET = 1.0
GAMMA1_BAND = 0.15
R_SQUARED_MIN = 0.9
CENSOR_LIMIT = 0.4
UPPER_MIN_POINTS = 3

LOG_SE_FLOOR = 1e-9

SCALING_CSV_HEADER = (
    "N", "alpha_dagger", "alpha_lo", "alpha_hi",
    "kappa_c", "kappa_lo", "kappa_hi", "note",
)


@dataclass(frozen=True)
class JointPoint:
    n: int
    alpha: float
    alpha_ci: tuple[float, float]
    kappa_c: float  # inf when no scanned feedback strength couples
    kappa_ci: tuple[float, float]
    note: str = ""

    @property
    def censored(self) -> bool:
        return not math.isfinite(self.kappa_c)


@dataclass(frozen=True)
class JointScalingReport:
    family_id: str
    points: tuple[JointPoint, ...]
    alpha_fit: ScalingFit
    kappa_fit: ScalingFit  # gamma1 field carries the threshold exponent
    verdict_a: bool
    verdict_b: bool
    verdict_c: bool | None  # needs a second family; None until compared
    verdict_d: bool
    range_note: str = ""
    note: str = ""

    @property
    def gamma1(self) -> float:
        return self.alpha_fit.gamma1

    @property
    def gamma1_se(self) -> float:
        return self.alpha_fit.gamma1_se

    @property
    def c1(self) -> float:
        return self.alpha_fit.c1

    @property
    def gamma2(self) -> float:
        return self.kappa_fit.gamma1

    @property
    def gamma2_se(self) -> float:
        return self.kappa_fit.gamma1_se

    @property
    def c2(self) -> float:
        return self.kappa_fit.c1


def measure_family(
    family: SystemFamily,
    config: ScalingConfig = ScalingConfig(),
    seed: int = 0,
    workers: int = 1,
) -> tuple[JointPoint, ...]:
    """Estimate the breakdown rate and coupling threshold at every size."""

    def run(item: tuple[int, int]) -> JointPoint:
        index, n = item
        instance = family.generator(n)
        if instance.ontology.n_primitives != n:
            raise ConfigError(
                f"generator returned an ontology over "
                f"{instance.ontology.n_primitives} primitives for N = {n}"
            )
        seeds = child_seed_sequence(seed, "scaling.point", index).generate_state(2)
        result = breakdown_rate(
            instance.ontology,
            tol=config.alpha_tol,
            n_trials=config.n_trials,
            seed=int(seeds[0]),
            n_symbols=config.n_symbols,
        )
        report = kappa_threshold(
            lambda k: evaluate_coupling(
                replace(instance.system, kappa=k),
                instance.manifold,
                config.sim,
                seed=int(seeds[1]),
                max_points=config.max_points,
            ),
            kappas=config.kappas,
            f_min=config.f_min,
            c_min=config.c_min,
            rel_tol=config.rel_tol,
            on_ambiguous=config.on_ambiguous,
        )
        t = report.threshold
        if math.isfinite(t):
            kappa_ci = (t * (1.0 - config.rel_tol), t * (1.0 + config.rel_tol))
        else:
            kappa_ci = (math.inf, math.inf)
        return JointPoint(
            n=n,
            alpha=result.alpha_dagger,
            alpha_ci=(result.ci_low, result.ci_high),
            kappa_c=t,
            kappa_ci=kappa_ci,
            note=report.note,
        )

    items = list(enumerate(family.n_values))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(run, items))
    else:
        points = [run(it) for it in items]
    return tuple(points)


def planted_points(
    n_values: Sequence[int],
    gamma1: float = 1.0,
    c1: float = 1.0,
    gamma2: float = 0.5,
    c2: float = 2.0,
) -> tuple[JointPoint, ...]:
    """Noise-free points following exact power laws in log N.

    Zero-width intervals mark the values as exact; the fit then runs
    unweighted. Used to validate the regression and verdict pipeline
    against laws whose exponents are known by construction.
    """
    points = []
    for n in n_values:
        logn = math.log(n)
        a = c1 / logn**gamma1
        k = c2 / logn**gamma2
        points.append(
            JointPoint(n=int(n), alpha=a, alpha_ci=(a, a),
                       kappa_c=k, kappa_ci=(k, k))
        )
    return tuple(points)


def _log_se(values: np.ndarray, los: np.ndarray, his: np.ndarray):
    if np.all(his == los):
        return None
    with np.errstate(divide="ignore"):
        width = np.log(his) - np.log(los)
    return np.maximum(width / 3.92, LOG_SE_FLOOR)


def _ols_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    xb, yb = x.mean(), y.mean()
    sxx = ((x - xb) ** 2).sum()
    slope = ((x - xb) * (y - yb)).sum() / sxx
    resid = y - (yb + slope * (x - xb))
    dof = x.size - 2
    var = (resid**2).sum() / dof / sxx if dof > 0 else 0.0
    return float(slope), float(math.sqrt(var))


def _upper_half_note(points: Sequence[JointPoint], full: ScalingFit,
                     values: np.ndarray, label: str) -> str:
    """OLS over the largest half of the sizes, compared against the full fit."""
    half = len(points) // 2
    tail = slice(half, None)
    ns = np.array([p.n for p in points], dtype=float)[tail]
    vals = values[tail]
    keep = np.isfinite(vals) & (vals > 0)
    if keep.sum() < UPPER_MIN_POINTS:
        return f"{label}: upper-half fit skipped (too few points)"
    slope, se = _ols_slope(
        np.log(np.log(ns[keep])), np.log(vals[keep])
    )
    gamma_upper = -slope
    gap = abs(gamma_upper - full.gamma1)
    spread = 2.0 * math.sqrt(se**2 + full.gamma1_se**2)
    if gap > spread and spread > 0:
        return (
            f"{label}: upper-half exponent {gamma_upper:.3f} disagrees with "
            f"full-range {full.gamma1:.3f} (gap {gap:.3f} > 2-SE {spread:.3f})"
        )
    return (
        f"{label}: upper-half exponent {gamma_upper:.3f} consistent with "
        f"full-range {full.gamma1:.3f}"
    )


def fit_joint(
    points: Sequence[JointPoint],
    family_id: str = "family",
    note: str = "",
) -> JointScalingReport:
    """Regress both laws, evaluate verdicts, and diagnose the fit range."""
    points = tuple(points)
    if not points:
        raise ConfigError("no points to fit")
    censored = [p for p in points if p.censored]
    if len(censored) / len(points) > CENSOR_LIMIT:
        raise CensoringError(
            f"{len(censored)} of {len(points)} sizes have no finite coupling "
            "threshold; the experiment is infeasible at this budget"
        )
    if censored:
        tags = ", ".join(str(p.n) for p in censored)
        note = (note + "; " if note else "") + (
            f"censored sizes (no finite threshold): {tags}"
        )

    ns = np.array([p.n for p in points], dtype=float)
    alphas = np.array([p.alpha for p in points])
    a_lo = np.array([p.alpha_ci[0] for p in points])
    a_hi = np.array([p.alpha_ci[1] for p in points])
    alpha_fit = scaling_fit(ns, alphas, _log_se(alphas, a_lo, a_hi))

    kept = [p for p in points if not p.censored]
    if len(kept) < len(points) and len(kept) < 5:
        raise CensoringError(
            f"only {len(kept)} uncensored sizes remain; at least 5 needed"
        )
    kn = np.array([p.n for p in kept], dtype=float)
    kv = np.array([p.kappa_c for p in kept])
    k_lo = np.array([p.kappa_ci[0] for p in kept])
    k_hi = np.array([p.kappa_ci[1] for p in kept])
    kappa_fit = scaling_fit(kn, kv, _log_se(kv, k_lo, k_hi))

    range_note = "; ".join([
        _upper_half_note(points, alpha_fit, alphas, "breakdown"),
        _upper_half_note(kept, kappa_fit, kv, "threshold"),
    ])

    return JointScalingReport(
        family_id=family_id,
        points=points,
        alpha_fit=alpha_fit,
        kappa_fit=kappa_fit,
        verdict_a=bool(
            alpha_fit.r_squared >= R_SQUARED_MIN
            and kappa_fit.r_squared >= R_SQUARED_MIN
        ),
        verdict_b=bool(abs(alpha_fit.gamma1 - GAMMA1_TARGET) <= GAMMA1_BAND),
        verdict_c=None,
        verdict_d=bool(not kappa_fit.law_violation),
        range_note=range_note,
        note=note,
    )


def run_joint_scaling(
    family: SystemFamily,
    config: ScalingConfig = ScalingConfig(),
    seed: int = 0,
    workers: int = 1,
) -> JointScalingReport:
    points = measure_family(family, config, seed=seed, workers=workers)
    return fit_joint(points, family_id=family.family_id, note=family.note)


def consistent_exponents(
    reports: Sequence[JointScalingReport],
) -> list[JointScalingReport]:
    """Fill the cross-family verdict: thresholds must share one exponent.

    Every pair of families must agree within joint 2-SE intervals for the
    class-consistency flag to hold; with fewer than two reports the flag
    stays undetermined.
    """
    reports = list(reports)
    if len(reports) < 2:
        return reports
    ok = True
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            a, b = reports[i], reports[j]
            gap = abs(a.gamma2 - b.gamma2)
            spread = 2.0 * math.sqrt(a.gamma2_se**2 + b.gamma2_se**2)
            if gap > spread:
                ok = False
    return [replace(r, verdict_c=ok) for r in reports]


def joint_scaling_suite(
    families: Sequence[SystemFamily],
    config: ScalingConfig = ScalingConfig(),
    seed: int = 0,
    workers: int = 1,
) -> list[JointScalingReport]:
    reports = []
    for index, family in enumerate(families):
        sub = int(
            child_seed_sequence(seed, "scaling.family", index).generate_state(1)[0]
        )
        reports.append(
            run_joint_scaling(family, config, seed=sub, workers=workers)
        )
    return consistent_exponents(reports)


def scaling_rows(report: JointScalingReport) -> list[tuple]:
    return [
        (
            p.n, p.alpha, p.alpha_ci[0], p.alpha_ci[1],
            p.kappa_c, p.kappa_ci[0], p.kappa_ci[1], p.note,
        )
        for p in report.points
    ]


def write_scaling_csv(path: str, report: JointScalingReport) -> None:
    atomic_write_text(path, render_csv(SCALING_CSV_HEADER, scaling_rows(report)))


def _verdict_text(flag: bool | None) -> str:
    if flag is None:
        return "n/a"
    return "pass" if flag else "fail"


def scaling_summary(report: JointScalingReport) -> dict:
    return {
        "gamma1": report.gamma1,
        "gamma1_se": report.gamma1_se,
        "gamma2": report.gamma2,
        "gamma2_se": report.gamma2_se,
        "c1": report.c1,
        "c2": report.c2,
        "verdict_a": _verdict_text(report.verdict_a),
        "verdict_b": _verdict_text(report.verdict_b),
        "verdict_c": _verdict_text(report.verdict_c),
        "verdict_d": _verdict_text(report.verdict_d),
    }


def write_scaling_summary(path: str, report: JointScalingReport) -> None:
    atomic_write_text(path, render_kv(scaling_summary(report)))
