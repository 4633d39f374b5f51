"""Langevin simulation and stationary field estimation."""
from .collinear import (
    CollinearityReport,
    DriftDecomposition,
    collinearity_map,
    decompose_drift,
)
from .current import EntropySummary, entropy_field, stationary_current
from .drift import (
    DriftSpec,
    FeedbackTanhTerm,
    GaussWellsTerm,
    LinearTerm,
    PolyAxisTerm,
    ReplicatorTerm,
    SolenoidTerm,
    check_confinement,
    drift,
    eval_drift,
    eval_potential,
)
from .grid import FieldGrid, central_gradient, estimate_density, weighted_median
from .manifold import ManifoldSpec, box, simplex, uniform_points
from .report import field_table, render_field_csv, write_field_csv
from .sim import Ensemble, SimConfig, check_stability, simulate

__all__ = [
    "CollinearityReport",
    "DriftDecomposition",
    "Ensemble",
    "EntropySummary",
    "DriftSpec",
    "FeedbackTanhTerm",
    "FieldGrid",
    "GaussWellsTerm",
    "LinearTerm",
    "ManifoldSpec",
    "PolyAxisTerm",
    "ReplicatorTerm",
    "SimConfig",
    "SolenoidTerm",
    "box",
    "central_gradient",
    "check_confinement",
    "check_stability",
    "collinearity_map",
    "decompose_drift",
    "drift",
    "entropy_field",
    "estimate_density",
    "eval_drift",
    "eval_potential",
    "field_table",
    "render_field_csv",
    "simplex",
    "simulate",
    "stationary_current",
    "uniform_points",
    "weighted_median",
    "write_field_csv",
]
