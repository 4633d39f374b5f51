"""Command line front end: config parsing, dispatch, manifests."""
from .config import (
    KINDS,
    OUT_ENV,
    ExperimentConfig,
    apply_overrides,
    build_plan,
    flatten_config,
    load_raw,
    resolve_config,
    resolved_lines,
)
from .main import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_NUMERICAL,
    EXIT_OK,
    exit_code_for,
    main,
)
from .runner import (
    MANIFEST_NAME,
    check_outdir_writable,
    config_hash,
    execute,
    resolve_outdir,
)

__all__ = [
    "EXIT_CONFIG",
    "EXIT_INFEASIBLE",
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "ExperimentConfig",
    "KINDS",
    "MANIFEST_NAME",
    "OUT_ENV",
    "apply_overrides",
    "build_plan",
    "check_outdir_writable",
    "config_hash",
    "execute",
    "exit_code_for",
    "flatten_config",
    "load_raw",
    "main",
    "resolve_config",
    "resolve_outdir",
    "resolved_lines",
]
