"""State-space geometry for Langevin ensembles.

Two kinds are supported: an axis-aligned box with reflecting boundaries,
and the probability simplex (componentwise positive, summing to one) where
updates are projected onto the tangent space and renormalized.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError

BOX = "box"
SIMPLEX = "simplex"

# default histogram resolution per axis, keyed by effective grid dimension
DEFAULT_CELLS = {1: 64, 2: 64, 3: 24, 4: 12}


@dataclass(frozen=True)
class ManifoldSpec:
    kind: str
    dim: int
    lo: np.ndarray = field(default=None)  # type: ignore[assignment]
    hi: np.ndarray = field(default=None)  # type: ignore[assignment]

    @property
    def grid_dim(self) -> int:
        """Dimension of the histogram grid (simplex drops one coordinate)."""
        return self.dim - 1 if self.kind == SIMPLEX else self.dim

    def cell_size(self, cells_per_axis: int | None = None) -> np.ndarray:
        lo, hi = self.grid_bounds()
        if cells_per_axis is None:
            cells_per_axis = DEFAULT_CELLS[min(self.grid_dim, 4)]
        return (hi - lo) / cells_per_axis

    def grid_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == BOX:
            return self.lo, self.hi
        g = self.grid_dim
        return np.zeros(g), np.ones(g)


def box(lo, hi) -> ManifoldSpec:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ConfigError("box bounds must be 1-d arrays of equal length")
    if np.any(hi <= lo):
        k = int(np.argwhere(hi <= lo)[0])
        raise ConfigError(f"box axis {k} has hi={hi[k]} <= lo={lo[k]}")
    return ManifoldSpec(kind=BOX, dim=lo.size, lo=lo, hi=hi)


def simplex(dim: int) -> ManifoldSpec:
    if dim < 2:
        raise ConfigError("simplex manifold needs at least 2 components")
    return ManifoldSpec(kind=SIMPLEX, dim=int(dim), lo=None, hi=None)


def validate_grid_dim(manifold: ManifoldSpec) -> None:
    if manifold.grid_dim > 4:
        raise ConfigError(
            f"grid-based field reconstruction supports up to 4 effective "
            f"dimensions, got {manifold.grid_dim}"
        )


def uniform_points(
    manifold: ManifoldSpec, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniform draws on the manifold, for stability and confinement probes."""
    if manifold.kind == BOX:
        u = rng.random((n, manifold.dim))
        return manifold.lo + u * (manifold.hi - manifold.lo)
    # uniform Dirichlet(1, ..., 1) on the simplex
    e = rng.standard_exponential((n, manifold.dim))
    return e / e.sum(axis=1, keepdims=True)
