"""Histogram reconstruction of stationary fields.

Density is estimated on a regular grid; cells with fewer samples than the
support threshold are masked. Derivatives use central differences only, so
cells bordering the grid edge or a masked cell carry no gradient. The
per-chain histograms are kept so that current fields get chain-level
standard errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from .manifold import DEFAULT_CELLS, SIMPLEX, ManifoldSpec, validate_grid_dim
from .sim import Ensemble

SUPPORT_THRESHOLD = 10


@dataclass
class FieldGrid:
    manifold: ManifoldSpec
    lo: np.ndarray
    hi: np.ndarray
    shape: tuple[int, ...]
    cell_sizes: np.ndarray
    counts: np.ndarray  # (*shape,) pooled occupancy
    chain_p: np.ndarray  # (n_chains, *shape) per-chain density estimates
    p_hat: np.ndarray  # (*shape,)
    support: np.ndarray  # (*shape,) bool
    phi: np.ndarray  # (*shape,) -ln p_hat, nan off support
    n_samples: int
    support_threshold: int
    noise: float  # diffusion constant of the generating ensemble
    # filled by stationary_current / entropy_field / collinearity_map
    b_centers: np.ndarray | None = None
    grad_p: np.ndarray | None = None
    j: np.ndarray | None = None
    j_mask: np.ndarray | None = None
    j_se: np.ndarray | None = None
    divergence: np.ndarray | None = None
    divergence_se: np.ndarray | None = None
    divergence_mask: np.ndarray | None = None
    sigma: np.ndarray | None = None
    sigma_floor: np.ndarray | None = None
    grad_phi: np.ndarray | None = None
    grad_phi_mask: np.ndarray | None = None
    grad_sigma: np.ndarray | None = None
    grad_sigma_mask: np.ndarray | None = None
    sin2: np.ndarray | None = None
    included: np.ndarray | None = None

    @property
    def grid_dim(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.cell_sizes))

    def axis_centers(self, k: int) -> np.ndarray:
        n = self.shape[k]
        return self.lo[k] + (np.arange(n) + 0.5) * self.cell_sizes[k]

    def centers(self) -> np.ndarray:
        """Cell centers, shape (n_cells, grid_dim), C-order flat."""
        axes = [self.axis_centers(k) for k in range(self.grid_dim)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def mass(self) -> np.ndarray:
        """Per-cell probability mass (p_hat * cell volume)."""
        return self.p_hat * self.cell_volume


def estimate_density(
    ensemble: Ensemble,
    cells_per_axis: int | None = None,
    support_threshold: int = SUPPORT_THRESHOLD,
) -> FieldGrid:
    manifold = ensemble.manifold
    validate_grid_dim(manifold)
    g = manifold.grid_dim
    if cells_per_axis is None:
        cells_per_axis = DEFAULT_CELLS[min(g, 4)]
    lo, hi = manifold.grid_bounds()
    shape = (cells_per_axis,) * g
    edges = [np.linspace(lo[k], hi[k], cells_per_axis + 1) for k in range(g)]
    cell_sizes = (hi - lo) / cells_per_axis
    volume = float(np.prod(cell_sizes))

    samples = ensemble.samples
    if manifold.kind == SIMPLEX:
        samples = samples[:, :, :g]
    n_chains = samples.shape[0]
    per_chain_n = samples.shape[1]
    chain_counts = np.empty((n_chains,) + shape)
    for c in range(n_chains):
        chain_counts[c], _ = np.histogramdd(samples[c], bins=edges)
    counts = chain_counts.sum(axis=0)
    n_total = n_chains * per_chain_n
    clipped = counts.sum()
    if clipped < 0.99 * n_total:
        raise ConfigError(
            f"{(1 - clipped / n_total) * 100:.1f}% of samples fall outside the "
            "grid; bounds do not cover the ensemble"
        )
    p_hat = counts / (n_total * volume)
    chain_p = chain_counts / (per_chain_n * volume)
    support = counts >= support_threshold
    phi = np.full(shape, np.nan)
    phi[support] = -np.log(p_hat[support])
    return FieldGrid(
        manifold=manifold,
        lo=lo,
        hi=hi,
        shape=shape,
        cell_sizes=cell_sizes,
        counts=counts,
        chain_p=chain_p,
        p_hat=p_hat,
        support=support,
        phi=phi,
        n_samples=int(n_total),
        support_threshold=support_threshold,
        noise=ensemble.config.noise,
    )


def central_gradient(
    values: np.ndarray, cell_sizes: np.ndarray, valid: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Central differences along every axis.

    Returns (grad, mask): grad has a trailing axis of length ndim; mask is
    True only where the cell itself and both stencil neighbors along every
    axis are valid (grid-boundary cells are always masked).
    """
    g = values.ndim
    shape = values.shape
    grad = np.zeros(shape + (g,))
    mask = valid.copy()
    vals = np.where(valid, values, 0.0)
    for k in range(g):
        plus = np.zeros(shape)
        minus = np.zeros(shape)
        vplus = np.zeros(shape, dtype=bool)
        vminus = np.zeros(shape, dtype=bool)
        src_hi = [slice(None)] * g
        src_hi[k] = slice(1, None)
        dst_hi = [slice(None)] * g
        dst_hi[k] = slice(0, -1)
        plus[tuple(dst_hi)] = vals[tuple(src_hi)]
        vplus[tuple(dst_hi)] = valid[tuple(src_hi)]
        minus[tuple(src_hi)] = vals[tuple(dst_hi)]
        vminus[tuple(src_hi)] = valid[tuple(dst_hi)]
        grad[..., k] = (plus - minus) / (2.0 * cell_sizes[k])
        mask &= vplus & vminus
    grad[~mask] = np.nan
    return grad, mask


def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    order = np.argsort(values)
    v = values[order]
    w = weights[order]
    cdf = np.cumsum(w)
    if cdf[-1] <= 0:
        return float("nan")
    return float(v[np.searchsorted(cdf, 0.5 * cdf[-1])])
