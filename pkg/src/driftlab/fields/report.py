"""Tabular export of an estimated field grid.

One row per cell in C order. The mask column is a small bitmask so a
single integer records which estimates are defined for the cell:

    1  density support (enough samples)
    2  current defined
    4  grad Phi defined
    8  grad Sigma defined
   16  included in the collinearity comparison
"""
from __future__ import annotations

import numpy as np

from ..io_utils import render_csv, write_csv
from .grid import FieldGrid

MASK_SUPPORT = 1
MASK_CURRENT = 2
MASK_GRAD_PHI = 4
MASK_GRAD_SIGMA = 8
MASK_INCLUDED = 16


def _flat(a: np.ndarray | None, shape: tuple[int, ...]) -> np.ndarray:
    if a is None:
        return np.full(int(np.prod(shape)), np.nan)
    return np.asarray(a).reshape(-1)


def field_table(grid: FieldGrid) -> tuple[list[str], list[list]]:
    g = grid.grid_dim
    n = int(np.prod(grid.shape))
    header = ["cell_index"]
    header += [f"center_{k}" for k in range(g)]
    header += ["p_hat", "phi", "sigma"]
    header += [f"j_{k}" for k in range(g)]
    header += [f"gradphi_{k}" for k in range(g)]
    header += [f"gradsigma_{k}" for k in range(g)]
    header += ["sin2theta", "mask"]

    centers = grid.centers()
    p = _flat(grid.p_hat, grid.shape)
    phi = _flat(grid.phi, grid.shape)
    sigma = _flat(grid.sigma, grid.shape)
    sin2 = _flat(grid.sin2, grid.shape)

    def vec(a: np.ndarray | None) -> np.ndarray:
        if a is None:
            return np.full((n, g), np.nan)
        return np.asarray(a).reshape(n, g)

    j = vec(grid.j)
    gphi = vec(grid.grad_phi)
    gsig = vec(grid.grad_sigma)

    def flag(mask: np.ndarray | None, bit: int) -> np.ndarray:
        if mask is None:
            return np.zeros(n, dtype=int)
        return np.asarray(mask).reshape(-1).astype(int) * bit

    bits = flag(grid.support, MASK_SUPPORT)
    bits = bits + flag(grid.j_mask, MASK_CURRENT)
    bits = bits + flag(grid.grad_phi_mask, MASK_GRAD_PHI)
    bits = bits + flag(grid.grad_sigma_mask, MASK_GRAD_SIGMA)
    bits = bits + flag(grid.included, MASK_INCLUDED)

    rows = []
    for i in range(n):
        row: list = [i]
        row += [float(c) for c in centers[i]]
        row += [float(p[i]), float(phi[i]), float(sigma[i])]
        row += [float(v) for v in j[i]]
        row += [float(v) for v in gphi[i]]
        row += [float(v) for v in gsig[i]]
        row += [float(sin2[i]), int(bits[i])]
        rows.append(row)
    return header, rows


def render_field_csv(grid: FieldGrid) -> str:
    header, rows = field_table(grid)
    return render_csv(header, rows)


def write_field_csv(path, grid: FieldGrid) -> None:
    header, rows = field_table(grid)
    write_csv(path, header, rows)
