"""Langevin ensemble simulation.

Euler-Maruyama with constant isotropic noise: dX = b(X) dt + sqrt(2 D) dW.
Boxes reflect at the boundary; simplex updates are projected onto the
tangent space, floored, and renormalized. Each chain owns a derived RNG
stream, so results are independent of chain scheduling and reproducible
for a fixed master seed.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import ConfigError, DivergenceError, StabilityError
from ..rng import child_rng
from .drift import DriftSpec, check_confinement, encode_drift, eval_drift
from .manifold import BOX, SIMPLEX, ManifoldSpec, uniform_points

STABILITY_FACTOR = 0.1


@dataclass(frozen=True)
class SimConfig:
    dt: float
    noise: float  # diffusion constant D
    n_steps: int  # steps per chain (rounded down to a multiple of thin)
    n_chains: int = 16
    burn_fraction: float = 0.2
    thin: int = 10
    block_steps: int = 32768
    check_stability: bool = True

    def __post_init__(self):
        if self.dt <= 0 or self.noise <= 0:
            raise ConfigError("dt and noise must be positive")
        if self.n_chains < 1 or self.n_steps < 1 or self.thin < 1:
            raise ConfigError("n_chains, n_steps, and thin must be >= 1")
        if not 0.0 <= self.burn_fraction < 1.0:
            raise ConfigError("burn_fraction must be in [0, 1)")


@dataclass(frozen=True)
class Ensemble:
    manifold: ManifoldSpec
    spec: DriftSpec
    config: SimConfig
    seed: int
    samples: np.ndarray  # (n_chains, n_retained, dim)
    backend: str

    @property
    def n_retained(self) -> int:
        return self.samples.shape[0] * self.samples.shape[1]

    @property
    def stride_time(self) -> float:
        """Time between retained samples."""
        return self.config.dt * self.config.thin

    def pooled(self) -> np.ndarray:
        return self.samples.reshape(-1, self.samples.shape[2])


def check_stability(
    manifold: ManifoldSpec, spec: DriftSpec, config: SimConfig, seed: int = 0
) -> float:
    """dt * max |b| must stay under a tenth of the smallest grid cell."""
    rng = np.random.default_rng(seed)
    pts = uniform_points(manifold, 2048, rng)
    bmax = float(np.abs(eval_drift(spec, pts)).max())
    cell = float(manifold.cell_size().min())
    limit = STABILITY_FACTOR * cell
    if config.dt * bmax >= limit:
        raise StabilityError(
            f"dt*max|b| = {config.dt * bmax:.3e} exceeds {STABILITY_FACTOR} * "
            f"cell size = {limit:.3e}; reduce dt below "
            f"{limit / max(bmax, 1e-300):.3e}"
        )
    return bmax


def _plan(config: SimConfig) -> tuple[int, int, int]:
    """(effective steps, burn-in steps, retained rows per chain)."""
    steps = config.n_steps - config.n_steps % config.thin
    burn = int(np.ceil(config.burn_fraction * steps))
    burn += (-burn) % config.thin
    rows = (steps - burn) // config.thin
    if rows < 1:
        raise ConfigError(
            f"no retained samples: {config.n_steps} steps, burn-in {burn}, "
            f"thinning {config.thin}"
        )
    return steps, burn, rows


def _initial_state(
    manifold: ManifoldSpec, rng: np.random.Generator
) -> np.ndarray:
    if manifold.kind == BOX:
        u = rng.random(manifold.dim)
        return manifold.lo + (0.1 + 0.8 * u) * (manifold.hi - manifold.lo)
    e = rng.standard_exponential(manifold.dim)
    return e / e.sum()


def _run_chain_compiled(
    chain: int,
    manifold: ManifoldSpec,
    spec: DriftSpec,
    enc,
    config: SimConfig,
    seed: int,
    label: str,
    steps: int,
    burn_rows: int,
) -> np.ndarray:
    em = kernels.compiled_module()
    rng = child_rng(seed, label + ".chain", chain)
    x = _initial_state(manifold, rng)
    mkind = 1 if manifold.kind == SIMPLEX else 0
    lo, hi = (manifold.lo, manifold.hi) if mkind == 0 else (
        np.zeros(manifold.dim), np.ones(manifold.dim)
    )
    sig = np.sqrt(2.0 * config.noise * config.dt)
    block = max(config.thin, config.block_steps - config.block_steps % config.thin)
    out: list[np.ndarray] = []
    done = 0
    while done < steps:
        b = min(block, steps - done)
        noise = rng.standard_normal((b, manifold.dim))
        rec = np.empty((b // config.thin, manifold.dim))
        bad_step, bad_kind = em.run_chain_block(
            x, noise, enc.kinds, enc.meta, enc.offsets, enc.data,
            mkind, lo, hi, config.dt, sig, config.thin, rec,
        )
        if bad_step >= 0:
            detail = "reflection failed to converge" if bad_kind == 2 else (
                "non-finite state"
            )
            raise DivergenceError(chain, done + bad_step, detail)
        out.append(rec)
        done += b
    return np.concatenate(out)[burn_rows:]


def _run_all_python(
    manifold: ManifoldSpec,
    spec: DriftSpec,
    config: SimConfig,
    seed: int,
    label: str,
    steps: int,
    burn_rows: int,
) -> np.ndarray:
    from ..kernels import _em_py

    rngs = [child_rng(seed, label + ".chain", i) for i in range(config.n_chains)]
    x = np.stack([_initial_state(manifold, rng) for rng in rngs])
    mkind = 1 if manifold.kind == SIMPLEX else 0
    lo = manifold.lo if mkind == 0 else None
    hi = manifold.hi if mkind == 0 else None
    sig = float(np.sqrt(2.0 * config.noise * config.dt))
    block = max(config.thin, config.block_steps - config.block_steps % config.thin)
    out: list[np.ndarray] = []
    done = 0
    while done < steps:
        b = min(block, steps - done)
        noise = np.stack([rng.standard_normal((b, manifold.dim)) for rng in rngs])
        rec = np.empty((config.n_chains, b // config.thin, manifold.dim))
        _em_py.run_block(
            x, noise, spec, mkind, lo, hi, config.dt, sig, config.thin, rec,
            step_offset=done,
        )
        out.append(rec)
        done += b
    return np.concatenate(out, axis=1)[:, burn_rows:]


def simulate(
    manifold: ManifoldSpec,
    spec: DriftSpec,
    config: SimConfig,
    seed: int,
    label: str = "fields",
    workers: int = 1,
    backend: str = "auto",
) -> Ensemble:
    if backend not in ("auto", "compiled", "python"):
        raise ConfigError(f"unknown backend {backend!r}")
    if backend == "compiled" and not kernels.HAVE_COMPILED:
        raise ConfigError("compiled backend requested but not available")
    use_compiled = kernels.HAVE_COMPILED if backend == "auto" else (
        backend == "compiled"
    )
    if spec.dim != manifold.dim:
        raise ConfigError(
            f"drift dim {spec.dim} does not match manifold dim {manifold.dim}"
        )
    if manifold.kind == BOX:
        check_confinement(manifold, spec)
    if config.check_stability:
        check_stability(manifold, spec, config, seed=0)
    steps, burn, rows = _plan(config)
    burn_rows = burn // config.thin

    if use_compiled:
        enc = encode_drift(spec)
        args = [
            (c, manifold, spec, enc, config, seed, label, steps, burn_rows)
            for c in range(config.n_chains)
        ]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                chains = list(pool.map(lambda a: _run_chain_compiled(*a), args))
        else:
            chains = [_run_chain_compiled(*a) for a in args]
        samples = np.stack(chains)
    else:
        samples = _run_all_python(
            manifold, spec, config, seed, label, steps, burn_rows
        )
    return Ensemble(
        manifold=manifold,
        spec=spec,
        config=config,
        seed=seed,
        samples=samples,
        backend="compiled" if use_compiled else "python",
    )
