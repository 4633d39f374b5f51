"""Adversarial contamination limits of context-shift detection."""
from .detector import (
    Detection,
    DetectorConfig,
    default_detector_family,
    detect_shift,
)
from .fit import (
    BreakdownCurve,
    BreakdownPoint,
    BreakdownResult,
    DetectorCurve,
    ScalingFit,
    breakdown_curve,
    breakdown_rate,
    curve_rows,
    fit_summary,
    scaling_fit,
    write_breakdown_csv,
    write_fit_summary,
)
from .ontology import (
    CONTEXT_LEAKAGE,
    DELTA_MAX,
    DELTA_MIN,
    Ontology,
    detection_lower_bound,
    kl_divergence,
    make_ontology,
    relabel,
)
from .risk import MIN_TRIALS, RiskEstimate, risk, wilson_interval
from .stream import (
    MIMIC_NULL,
    MIMIC_SHIFT,
    TRUTH_NULL,
    TRUTH_SHIFT,
    AdversaryModel,
    default_stream_length,
    sample_stream,
)

__all__ = [
    "AdversaryModel",
    "BreakdownCurve",
    "BreakdownPoint",
    "BreakdownResult",
    "CONTEXT_LEAKAGE",
    "DELTA_MAX",
    "DELTA_MIN",
    "Detection",
    "DetectorConfig",
    "DetectorCurve",
    "MIMIC_NULL",
    "MIMIC_SHIFT",
    "MIN_TRIALS",
    "Ontology",
    "RiskEstimate",
    "ScalingFit",
    "TRUTH_NULL",
    "TRUTH_SHIFT",
    "breakdown_curve",
    "breakdown_rate",
    "curve_rows",
    "default_detector_family",
    "default_stream_length",
    "detect_shift",
    "detection_lower_bound",
    "fit_summary",
    "kl_divergence",
    "make_ontology",
    "relabel",
    "risk",
    "sample_stream",
    "scaling_fit",
    "wilson_interval",
    "write_breakdown_csv",
    "write_fit_summary",
]
