"""Coupling measures and the feedback-strength threshold scan.

A system counts as self-referential when the informational fidelity of
its readout channel and the causal efficacy of its feedback both clear
their thresholds. The scan walks a feedback-strength grid, finds the
single pass/fail transition, and bisects it; a non-monotone pattern is an
error by default because it means the grid does not bracket one
well-defined onset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import AmbiguousThresholdError, ConfigError
from ..fields.drift import eval_drift
from ..fields.manifold import ManifoldSpec
from ..fields.sim import SimConfig
from .mi import KSG_K, mutual_information
from .system import SelfRefSystem, integrate_selfref

FIDELITY_MIN = 0.5
EFFICACY_MIN = 0.1
BASELINE_TOTAL = "total"
BASELINE_SUBSTRATE = "substrate"


def linfoot(mi: float) -> float:
    """Map mutual information (nats) to a [0, 1) correlation-like scale."""
    return 1.0 - math.exp(-2.0 * max(float(mi), 0.0))


def causal_efficacy(
    system: SelfRefSystem, states: np.ndarray, baseline: str = BASELINE_TOTAL
) -> float:
    """Mean feedback magnitude relative to the drift it is embedded in.

    baseline "total" compares against the full drift (substrate plus
    feedback); "substrate" compares against the substrate alone.
    """
    x = np.atleast_2d(np.asarray(states, dtype=float))
    f = system.feedback_at(x)
    num = float(np.linalg.norm(f, axis=1).mean())
    if baseline == BASELINE_TOTAL:
        den_vec = eval_drift(system.total_drift(), x)
    elif baseline == BASELINE_SUBSTRATE:
        den_vec = system.substrate_drift_at(x)
    else:
        raise ConfigError(f"unknown efficacy baseline {baseline!r}")
    den = float(np.linalg.norm(den_vec, axis=1).mean())
    if den == 0.0:
        return math.inf if num > 0.0 else 0.0
    return num / den


@dataclass(frozen=True)
class CouplingPoint:
    kappa: float
    mi: float
    fidelity: float
    efficacy: float
    near_deterministic: bool = False


def evaluate_coupling(
    system: SelfRefSystem,
    manifold: ManifoldSpec,
    config: SimConfig,
    seed: int,
    k: int = KSG_K,
    n_boot: int = 0,
    max_points: int = 8192,
    baseline: str = BASELINE_TOTAL,
    label: str = "coupling",
    workers: int = 1,
) -> CouplingPoint:
    trace = integrate_selfref(
        system, manifold, config, seed, label=label, workers=workers
    )
    est = mutual_information(
        trace.states, trace.readouts, k=k, n_boot=n_boot, max_points=max_points
    )
    x, _ = trace.pooled_pairs()
    eff = causal_efficacy(system, x, baseline)
    return CouplingPoint(
        kappa=system.kappa,
        mi=est.value,
        fidelity=linfoot(est.value),
        efficacy=eff,
        near_deterministic=est.near_deterministic,
    )


@dataclass(frozen=True)
class CouplingReport:
    points: tuple[CouplingPoint, ...]
    threshold: float
    f_min: float
    c_min: float
    note: str = ""

    def passes(self, p: CouplingPoint) -> bool:
        return p.fidelity >= self.f_min and p.efficacy >= self.c_min

    def rows(self) -> tuple[list[str], list[list]]:
        header = ["kappa", "mi", "fidelity", "efficacy", "coupled"]
        rows = [
            [p.kappa, p.mi, p.fidelity, p.efficacy, self.passes(p)]
            for p in sorted(self.points, key=lambda q: q.kappa)
        ]
        return header, rows


def kappa_threshold(
    evaluate: Callable[[float], CouplingPoint],
    kappas: Sequence[float],
    f_min: float = FIDELITY_MIN,
    c_min: float = EFFICACY_MIN,
    rel_tol: float = 0.01,
    max_iters: int = 60,
    on_ambiguous: str = "raise",
) -> CouplingReport:
    """Locate the smallest feedback strength at which the system couples.

    Scans the given grid, then bisects the single fail-to-pass bracket to
    relative width rel_tol. Returns threshold = inf when no grid point
    passes. A grid that passes at its smallest point is bracketed against
    zero (zero feedback has zero efficacy, so it can never pass).
    """
    ks = [float(k) for k in kappas]
    if len(ks) < 2 or any(k <= 0 for k in ks) or sorted(ks) != ks:
        raise ConfigError("kappas must be >= 2 positive increasing values")
    if on_ambiguous not in ("raise", "first"):
        raise ConfigError(f"unknown ambiguity policy {on_ambiguous!r}")

    def ok(p: CouplingPoint) -> bool:
        return p.fidelity >= f_min and p.efficacy >= c_min

    points = [evaluate(k) for k in ks]
    states = [ok(p) for p in points]
    note = ""
    if not any(states):
        return CouplingReport(
            points=tuple(points),
            threshold=math.inf,
            f_min=f_min,
            c_min=c_min,
            note="no scanned feedback strength couples",
        )
    flips = [i for i in range(len(ks) - 1) if states[i] != states[i + 1]]
    if states[0]:
        lo, hi = 0.0, ks[0]
        if flips:
            flips.insert(0, -1)
    elif flips:
        lo, hi = ks[flips[0]], ks[flips[0] + 1]
    if len(flips) > 1:
        trace = list(zip(ks, states))
        if on_ambiguous == "raise":
            raise AmbiguousThresholdError(trace)
        note = (
            "non-monotone pass pattern; reporting the first crossing "
            f"(pattern {''.join('P' if s else 'f' for s in states)})"
        )

    for _ in range(max_iters):
        if hi - lo <= rel_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        p = evaluate(mid)
        points.append(p)
        if ok(p):
            hi = mid
        else:
            lo = mid
    return CouplingReport(
        points=tuple(points),
        threshold=0.5 * (lo + hi),
        f_min=f_min,
        c_min=c_min,
        note=note,
    )
