"""Stationary distribution of a rate network."""
from __future__ import annotations

import numpy as np

from ..errors import NumericalError
from .rate_matrix import RateMatrix


def generator_matrix(rm: RateMatrix) -> np.ndarray:
    """Q with Q[i, j] = k_ij off-diagonal and rows summing to zero."""
    q = rm.rates.copy()
    np.fill_diagonal(q, -q.sum(axis=1))
    return q


def stationary_distribution(rm: RateMatrix) -> np.ndarray:
    """Solve p^T Q = 0 with sum(p) = 1 by a dense linear solve.

    Strong connectivity guarantees a unique strictly positive solution;
    positivity and the global-balance residual are checked after the solve.
    """
    n = rm.n_states
    q = generator_matrix(rm)
    a = q.T.copy()
    a[-1, :] = 1.0  # replace one balance equation by normalization
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        p = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"stationary solve failed: {exc}") from exc
    scale = float(np.abs(rm.rates).max())
    if np.any(p <= 0):
        worst = float(p.min())
        if worst < -1e-12:
            raise NumericalError(
                f"stationary solve produced a negative probability ({worst:.3e})"
            )
        p = np.clip(p, 1e-300, None)
    p = p / p.sum()
    residual = float(np.abs(p @ q).max())
    if residual > 1e-10 * max(1.0, scale):
        raise NumericalError(
            f"global balance residual {residual:.3e} too large for rate scale {scale:.3e}"
        )
    return p
