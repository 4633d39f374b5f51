"""Finite-alphabet context pairs for shift detection.

The base context is uniform over the alphabet. The shifted context
concentrates the base measure on a seeded random sub-alphabet, keeping a
small uniform leakage on the remaining symbols; this is an exponential
tilt along the subset indicator, parameterized by the leakage weight,
which is solved by bisection so KL(shifted || base) hits the requested
divergence. The sub-alphabet size is chosen so the solved leakage lands
near a fixed target, keeping the off-subset evidence rate comparable
across alphabet sizes. The supremum of reachable divergences is
ln(alphabet size), so requests at or above that are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import ConfigError, TiltRangeError
from ..rng import child_rng

DELTA_MIN = 0.05
DELTA_MAX = 5.0
KL_TOLERANCE = 1e-4
CONTEXT_LEAKAGE = 0.008


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) in nats. q must be positive wherever p is."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        raise ConfigError("KL undefined: q vanishes on the support of p")
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


@dataclass(frozen=True, eq=False)
class Ontology:
    """A pair of contexts (categorical distributions) over one alphabet."""

    n_primitives: int
    p1: np.ndarray  # base context
    p2: np.ndarray  # shifted context
    delta: float  # KL(p2 || p1), nats

    def __post_init__(self):
        if self.n_primitives < 2:
            raise ConfigError("an ontology needs at least 2 primitives")
        for name, p in (("p1", self.p1), ("p2", self.p2)):
            p = np.asarray(p, dtype=float)
            if p.shape != (self.n_primitives,):
                raise ConfigError(
                    f"{name} must have shape ({self.n_primitives},), got {p.shape}"
                )
            if np.any(p <= 0):
                raise ConfigError(f"{name} must be strictly positive")
            if abs(p.sum() - 1.0) > 1e-9:
                raise ConfigError(f"{name} must sum to 1, got {p.sum()!r}")
            object.__setattr__(self, name, p)
        realized = kl_divergence(self.p2, self.p1)
        if abs(realized - self.delta) > KL_TOLERANCE:
            raise ConfigError(
                f"declared delta {self.delta:.6g} disagrees with KL(p2||p1) "
                f"= {realized:.6g} beyond {KL_TOLERANCE:g}"
            )

    @property
    def delta_rev(self) -> float:
        """KL(p1 || p2), the clean-symbol cost in the log-likelihood ratio."""
        return kl_divergence(self.p1, self.p2)

    def llr(self) -> np.ndarray:
        """Per-symbol log-likelihood ratio ln(p2/p1)."""
        return np.log(self.p2) - np.log(self.p1)


def detection_lower_bound(n_primitives: int, delta: float) -> float:
    """Minimum samples to tell the contexts apart: ln(N) / delta."""
    if n_primitives < 2:
        raise ConfigError("an ontology needs at least 2 primitives")
    if delta <= 0:
        raise ConfigError("detection lower bound needs delta > 0")
    return float(np.log(n_primitives) / delta)


def _mixture_kl(n: int, m: int, leak: float) -> float:
    """KL(p2 || uniform) for mass 1-leak uniform on m symbols, leak off."""
    return float(
        (1.0 - leak) * np.log(n * (1.0 - leak) / m)
        + leak * np.log(n * leak / (n - m))
    )


def make_ontology(
    n_primitives: int,
    delta_target: float,
    seed: int = 0,
    delta_bounds: tuple[float, float] = (DELTA_MIN, DELTA_MAX),
) -> Ontology:
    """Uniform base plus a tilted shift context at the requested divergence.

    delta_target = 0 is allowed and returns identical contexts; any other
    target must lie within delta_bounds and strictly below ln(n_primitives).
    """
    n = n_primitives
    if n < 2:
        raise ConfigError("an ontology needs at least 2 primitives")
    uniform = np.full(n, 1.0 / n)
    if delta_target == 0:
        return Ontology(n, uniform, uniform.copy(), 0.0)
    lo, hi = delta_bounds
    if not lo <= delta_target <= hi:
        raise ConfigError(
            f"delta_target {delta_target:.6g} outside bounds "
            f"[{lo:.6g}, {hi:.6g}]"
        )
    cap = np.log(n)
    if delta_target >= cap - 1e-6:
        raise TiltRangeError(
            f"delta_target {delta_target:.6g} is not reachable by tilting a "
            f"uniform base over {n} primitives "
            f"(supremum ln {n} = {cap:.6g})"
        )

    # largest sub-alphabet still reaching the target at the leakage target;
    # _mixture_kl decreases in m, so bisect the predicate boundary
    if _mixture_kl(n, 1, CONTEXT_LEAKAGE) < delta_target:
        m = 1
    else:
        m_lo, m_hi = 1, n - 1
        while m_lo < m_hi:
            mid = (m_lo + m_hi + 1) // 2
            if _mixture_kl(n, mid, CONTEXT_LEAKAGE) >= delta_target:
                m_lo = mid
            else:
                m_hi = mid - 1
        m = m_lo

    # the leakage weight sweeps KL from ln(n/m) down to 0 at 1 - m/n
    leak = brentq(
        lambda u: _mixture_kl(n, m, u) - delta_target,
        1e-12,
        1.0 - m / n,
        xtol=1e-15,
        rtol=1e-15,
    )
    members = child_rng(seed, "breakdown.tilt").permutation(n)[:m]
    p2 = np.full(n, leak / (n - m))
    p2[members] = (1.0 - leak) / m
    realized = kl_divergence(p2, uniform)
    if abs(realized - delta_target) > KL_TOLERANCE:
        raise TiltRangeError(
            f"tilt bisection stopped at KL {realized:.6g}, more than "
            f"{KL_TOLERANCE:g} away from delta_target {delta_target:.6g}"
        )
    return Ontology(n, uniform, p2, realized)


def relabel(ontology: Ontology, permutation: np.ndarray) -> Ontology:
    """The same ontology with primitives renamed by a permutation."""
    perm = np.asarray(permutation)
    if sorted(perm.tolist()) != list(range(ontology.n_primitives)):
        raise ConfigError("permutation must rearrange all primitive indices")
    return Ontology(
        ontology.n_primitives,
        ontology.p1[perm],
        ontology.p2[perm],
        ontology.delta,
    )
