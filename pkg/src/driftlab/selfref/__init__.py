"""Self-referential systems: feedback drift, information, coupling onset."""
from .coupling import (
    BASELINE_SUBSTRATE,
    BASELINE_TOTAL,
    EFFICACY_MIN,
    FIDELITY_MIN,
    CouplingPoint,
    CouplingReport,
    causal_efficacy,
    evaluate_coupling,
    kappa_threshold,
    linfoot,
)
from .mi import (
    KSG_K,
    NEAR_DETERMINISTIC_MI,
    MIEstimate,
    integrated_autocorr_time,
    ksg_mi,
    mutual_information,
)
from .system import (
    FEEDBACK_LINEAR,
    FEEDBACK_SATURATING,
    SelfRefSystem,
    SelfRefTrace,
    integrate_selfref,
)

__all__ = [
    "BASELINE_SUBSTRATE",
    "BASELINE_TOTAL",
    "CouplingPoint",
    "CouplingReport",
    "EFFICACY_MIN",
    "FEEDBACK_LINEAR",
    "FEEDBACK_SATURATING",
    "FIDELITY_MIN",
    "KSG_K",
    "MIEstimate",
    "NEAR_DETERMINISTIC_MI",
    "SelfRefSystem",
    "SelfRefTrace",
    "causal_efficacy",
    "evaluate_coupling",
    "integrate_selfref",
    "integrated_autocorr_time",
    "kappa_threshold",
    "ksg_mi",
    "linfoot",
    "mutual_information",
]
