"""Collinearity of the dissipation and quasi-potential gradient fields.

The two-field comparison asks where grad Sigma and grad Phi point in
genuinely different directions. Cells only count when both gradients are
defined, both are strong enough to trust (per-field thresholds at a
fraction of the mass-weighted median magnitude), and the local current is
statistically distinguishable from zero; an equilibrium system then
reports a fraction near zero because its Sigma field is pure estimation
noise.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import CollinearRegressorsError, ConfigError, DegenerateFieldWarning
from .drift import DriftSpec, eval_drift
from .grid import FieldGrid, central_gradient, weighted_median

EPS_ANGLE = 0.1
EPS_GRAD_FRACTION = 0.05
CURRENT_SIGNIFICANCE_Z = 2.0
GRAM_CONDITION_LIMIT = 1e12


def _ensure_gradients(grid: FieldGrid) -> None:
    if grid.sigma is None:
        raise ConfigError("run entropy_field first (sigma missing)")
    if grid.grad_phi is None:
        phi = np.where(grid.support, grid.phi, 0.0)
        grid.grad_phi, grid.grad_phi_mask = central_gradient(
            phi, grid.cell_sizes, grid.support
        )
    if grid.grad_sigma is None:
        smask = grid.j_mask & np.isfinite(grid.sigma)
        sig = np.where(smask, grid.sigma, 0.0)
        grid.grad_sigma, grid.grad_sigma_mask = central_gradient(
            sig, grid.cell_sizes, smask
        )


@dataclass(frozen=True)
class CollinearityReport:
    noncollinear_fraction: float
    included_mass_fraction: float
    eps_angle: float
    eps_grad_phi: float
    eps_grad_sigma: float
    significance_z: float
    n_included: int


def collinearity_map(
    grid: FieldGrid,
    eps_angle: float = EPS_ANGLE,
    eps_grad_fraction: float = EPS_GRAD_FRACTION,
    significance_z: float = CURRENT_SIGNIFICANCE_Z,
) -> CollinearityReport:
    """Per-cell sin^2 of the angle between grad Sigma and grad Phi.

    Returns the mass fraction (relative to all supported cells) of
    included cells whose sin^2 exceeds eps_angle. Fills grid.sin2 and
    grid.included.
    """
    _ensure_gradients(grid)
    mass = grid.mass()

    gphi = grid.grad_phi
    gsig = grid.grad_sigma
    nphi = np.sqrt((np.where(np.isfinite(gphi), gphi, 0.0) ** 2).sum(axis=-1))
    nsig = np.sqrt((np.where(np.isfinite(gsig), gsig, 0.0) ** 2).sum(axis=-1))

    both = grid.grad_phi_mask & grid.grad_sigma_mask
    w = mass
    eps_phi = eps_grad_fraction * weighted_median(
        nphi[grid.grad_phi_mask], w[grid.grad_phi_mask]
    )
    eps_sigma = eps_grad_fraction * weighted_median(
        nsig[grid.grad_sigma_mask], w[grid.grad_sigma_mask]
    )

    j2 = (np.where(grid.j_mask[..., None], grid.j, 0.0) ** 2).sum(axis=-1)
    se2 = (np.where(grid.j_mask[..., None], grid.j_se, 0.0) ** 2).sum(axis=-1)
    significant = grid.j_mask & (j2 > significance_z**2 * se2)

    included = both & (nphi >= eps_phi) & (nsig >= eps_sigma) & significant

    sin2 = np.full(grid.shape, np.nan)
    if included.any():
        dot = (gphi * gsig).sum(axis=-1)
        denom = nphi**2 * nsig**2
        with np.errstate(invalid="ignore", divide="ignore"):
            s2 = 1.0 - dot**2 / denom
        sin2[included] = np.clip(s2[included], 0.0, 1.0)
    else:
        warnings.warn(
            "no cells qualify for the collinearity comparison (fields at "
            "noise floor or too little support)",
            DegenerateFieldWarning,
        )

    total_mass = float(mass[grid.support].sum())
    noncol = included & (sin2 > eps_angle)
    fraction = float(mass[noncol].sum() / total_mass) if total_mass > 0 else 0.0
    grid.sin2 = sin2
    grid.included = included
    return CollinearityReport(
        noncollinear_fraction=fraction,
        included_mass_fraction=float(mass[included].sum() / total_mass)
        if total_mass > 0
        else 0.0,
        eps_angle=eps_angle,
        eps_grad_phi=float(eps_phi),
        eps_grad_sigma=float(eps_sigma),
        significance_z=significance_z,
        n_included=int(included.sum()),
    )


@dataclass(frozen=True)
class DriftDecomposition:
    alpha: float
    beta: float
    residual_fraction: float
    gram_condition: float
    n_cells: int


def decompose_drift(
    grid: FieldGrid,
    spec: DriftSpec | None = None,
    b_field: np.ndarray | None = None,
) -> DriftDecomposition:
    """Mass-weighted least squares of b onto {-grad Sigma, -grad Phi}.

    The drift may be given either as a DriftSpec (evaluated at cell
    centers) or directly as a per-cell vector field with shape
    (*grid.shape, dim). Raises CollinearRegressorsError when the 2x2 Gram
    system is numerically singular (condition > 1e12), which is the
    expected outcome in exact equilibrium where grad Sigma vanishes.
    """
    _ensure_gradients(grid)
    if (spec is None) == (b_field is None):
        raise ConfigError("pass exactly one of spec or b_field")
    d = grid.grid_dim
    if b_field is None:
        b_field = eval_drift(spec, grid.centers()).reshape(grid.shape + (d,))
    b_field = np.asarray(b_field, dtype=float)
    if b_field.shape != grid.shape + (d,):
        raise ConfigError(
            f"b_field shape {b_field.shape} does not match grid {grid.shape + (d,)}"
        )

    cells = grid.grad_phi_mask & grid.grad_sigma_mask
    if cells.sum() < 3:
        raise CollinearRegressorsError(float("inf"))
    w = grid.mass()[cells]
    w = w / w.sum()
    x1 = -grid.grad_sigma[cells]
    x2 = -grid.grad_phi[cells]
    b = b_field[cells]

    m11 = float((w * (x1 * x1).sum(axis=1)).sum())
    m12 = float((w * (x1 * x2).sum(axis=1)).sum())
    m22 = float((w * (x2 * x2).sum(axis=1)).sum())
    v1 = float((w * (x1 * b).sum(axis=1)).sum())
    v2 = float((w * (x2 * b).sum(axis=1)).sum())
    gram = np.array([[m11, m12], [m12, m22]])
    eigs = np.linalg.eigvalsh(gram)
    condition = float("inf") if eigs[0] <= 0 else float(eigs[1] / eigs[0])
    if condition > GRAM_CONDITION_LIMIT:
        raise CollinearRegressorsError(condition)
    alpha, beta = np.linalg.solve(gram, np.array([v1, v2]))

    residual = b - alpha * x1 - beta * x2
    res_norm = float((w * np.linalg.norm(residual, axis=1)).sum())
    b_norm = float((w * np.linalg.norm(b, axis=1)).sum())
    return DriftDecomposition(
        alpha=float(alpha),
        beta=float(beta),
        residual_fraction=res_norm / b_norm if b_norm > 0 else 0.0,
        gram_condition=condition,
        n_cells=int(cells.sum()),
    )
