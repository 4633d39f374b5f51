"""Pure-numpy Euler-Maruyama stepping, vectorized across chains.

Reference backend: consumes exactly the same per-chain noise blocks as the
compiled kernel, so the two backends are interchangeable (statistically
identical streams; floating-point op order may differ in the last ulp).
"""
from __future__ import annotations

import numpy as np

from ..errors import DivergenceError
from ..fields.drift import DriftSpec, eval_drift

BACKEND_NAME = "python"

SIMPLEX_FLOOR = 1e-12
MAX_REFLECTIONS = 64


def run_block(
    x: np.ndarray,  # (n_chains, dim), updated in place
    noise: np.ndarray,  # (n_chains, block_steps, dim)
    spec: DriftSpec,
    manifold_kind: int,  # 0 box, 1 simplex
    lo: np.ndarray | None,
    hi: np.ndarray | None,
    dt: float,
    sig: float,  # sqrt(2 D dt)
    stride: int,
    rec: np.ndarray,  # (n_chains, block_steps // stride, dim)
    step_offset: int = 0,
) -> None:
    n_chains, block_steps, dim = noise.shape
    for t in range(block_steps):
        incr = eval_drift(spec, x) * dt + sig * noise[:, t, :]
        if manifold_kind == 1:
            incr -= incr.mean(axis=1, keepdims=True)
            x += incr
            np.clip(x, SIMPLEX_FLOOR, None, out=x)
            x /= x.sum(axis=1, keepdims=True)
        else:
            x += incr
            if np.any(x > hi) or np.any(x < lo):
                for _ in range(MAX_REFLECTIONS):
                    over = x > hi
                    under = x < lo
                    if not (over.any() or under.any()):
                        break
                    np.copyto(x, np.where(over, 2.0 * hi - x, x))
                    np.copyto(x, np.where(under, 2.0 * lo - x, x))
                else:
                    chain = int(
                        np.argwhere((x > hi) | (x < lo))[0][0]
                    )
                    raise DivergenceError(
                        chain, step_offset + t, "reflection failed to converge"
                    )
        if not np.all(np.isfinite(x)):
            chain = int(np.argwhere(~np.isfinite(x))[0][0])
            raise DivergenceError(chain, step_offset + t)
        nxt = t + 1
        if nxt % stride == 0:
            rec[:, nxt // stride - 1, :] = x
