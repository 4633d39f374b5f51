"""Localized perturbation pairs: superlinearity factor and yield curves."""
from .experiment import (
    CONDITIONS,
    CURVE_CSV_HEADER,
    METRIC_DEPTH,
    METRIC_YIELD,
    MIN_SWEEP_VALUES,
    SYNERGY_CSV_HEADER,
    SynergyReport,
    YieldCurve,
    count_modes,
    curve_csv_rows,
    smooth_moving_average,
    synergy_experiment,
    synergy_rows,
    synergy_summary,
    write_synergy_csv,
    write_synergy_summary,
    write_yield_curve_csv,
    yield_curve,
)
from .geometry import (
    PerturbationWell,
    TargetRegion,
    apply_wells,
    check_region_inside,
    disjoint_supports,
    target_ball,
    target_box,
    touches_support,
)
from .yields import (
    DEFAULT_BOOT,
    MIN_BOOT,
    YieldEstimate,
    chain_fractions,
    yield_at_target,
    yield_of_ensemble,
)

__all__ = [
    "CONDITIONS",
    "CURVE_CSV_HEADER",
    "DEFAULT_BOOT",
    "METRIC_DEPTH",
    "METRIC_YIELD",
    "MIN_BOOT",
    "MIN_SWEEP_VALUES",
    "PerturbationWell",
    "SYNERGY_CSV_HEADER",
    "SynergyReport",
    "TargetRegion",
    "YieldCurve",
    "YieldEstimate",
    "apply_wells",
    "chain_fractions",
    "check_region_inside",
    "count_modes",
    "curve_csv_rows",
    "disjoint_supports",
    "smooth_moving_average",
    "synergy_experiment",
    "synergy_rows",
    "synergy_summary",
    "target_ball",
    "target_box",
    "touches_support",
    "write_synergy_csv",
    "write_synergy_summary",
    "write_yield_curve_csv",
    "yield_at_target",
    "yield_curve",
    "yield_of_ensemble",
]
