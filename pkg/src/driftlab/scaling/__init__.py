"""Joint scaling experiments across system sizes."""
from .family import (
    DEFAULT_DELTA,
    DEFAULT_FAMILY_NOTE,
    DEFAULT_SIZES,
    MANIFOLD_HALF_WIDTH,
    MIN_SIZES,
    SPAN_DECADES,
    SUBSTRATE_DIM,
    ScalingConfig,
    ScalingInstance,
    SystemFamily,
    default_family,
    readout_count,
)
from .joint import (
    CENSOR_LIMIT,
    GAMMA1_BAND,
    GAMMA1_TARGET,
    R_SQUARED_MIN,
    SCALING_CSV_HEADER,
    JointPoint,
    JointScalingReport,
    consistent_exponents,
    fit_joint,
    joint_scaling_suite,
    measure_family,
    planted_points,
    run_joint_scaling,
    scaling_rows,
    scaling_summary,
    write_scaling_csv,
    write_scaling_summary,
)

__all__ = [
    "CENSOR_LIMIT",
    "DEFAULT_DELTA",
    "DEFAULT_FAMILY_NOTE",
    "DEFAULT_SIZES",
    "GAMMA1_BAND",
    "GAMMA1_TARGET",
    "JointPoint",
    "JointScalingReport",
    "MANIFOLD_HALF_WIDTH",
    "MIN_SIZES",
    "R_SQUARED_MIN",
    "SCALING_CSV_HEADER",
    "SPAN_DECADES",
    "SUBSTRATE_DIM",
    "ScalingConfig",
    "ScalingInstance",
    "SystemFamily",
    "consistent_exponents",
    "default_family",
    "fit_joint",
    "joint_scaling_suite",
    "measure_family",
    "planted_points",
    "readout_count",
    "run_joint_scaling",
    "scaling_rows",
    "scaling_summary",
    "write_scaling_csv",
    "write_scaling_summary",
]
