"""Experiment execution: dispatch, output files, and the run manifest."""
from __future__ import annotations

import hashlib
import os
import time
from dataclasses import replace

from ..breakdown import breakdown_curve, fit_summary, write_breakdown_csv
from ..errors import ConfigError
from ..fields import (
    collinearity_map,
    entropy_field,
    estimate_density,
    simulate,
    stationary_current,
    write_field_csv,
)
from ..io_utils import atomic_write_text, render_csv, render_kv, sha256_file
from ..markov import (
    cycle_report_rows,
    detailed_balance_check,
    entropy_production,
)
from ..scaling import (
    default_family,
    run_joint_scaling,
    write_scaling_csv,
    write_scaling_summary,
)
from ..selfref import evaluate_coupling, kappa_threshold
from ..synergy import (
    synergy_experiment,
    write_synergy_csv,
    write_synergy_summary,
    write_yield_curve_csv,
    yield_curve,
)
from . import config as cfgmod
from .config import (
    BreakdownPlan,
    ExperimentConfig,
    FieldPlan,
    MarkovPlan,
    ScalingPlan,
    SelfrefPlan,
    SynergyPlan,
    tilted,
)

MANIFEST_NAME = "manifest.txt"

CYCLE_CSV_HEADER = (
    "cycle_id", "chord_i", "chord_j", "affinity", "current", "contribution",
)
COUPLING_CSV_HEADER = (
    "kappa", "mi", "fidelity", "efficacy", "near_deterministic",
)


def _run_markov(plan: MarkovPlan, outdir, seed, workers) -> dict[str, str]:
    report = entropy_production(plan.rm)
    balanced, worst = detailed_balance_check(plan.rm)
    files = {}
    files["cycles.csv"] = render_csv(
        CYCLE_CSV_HEADER, cycle_report_rows(report)
    )
    files["markov_summary.txt"] = render_kv({
        "n_states": plan.rm.n_states,
        "sigma_edge": report.sigma_edge,
        "sigma_cycle": report.sigma_cycle,
        "balanced": balanced,
        "worst_affinity": worst,
    })
    return files


def _run_field(plan: FieldPlan, outdir, seed, workers) -> dict[str, str]:
    ens = simulate(
        plan.manifold, plan.spec, plan.sim, seed,
        label="cli.field", workers=workers,
    )
    grid = estimate_density(ens, plan.cells_per_axis)
    stationary_current(grid, plan.spec)
    entropy = entropy_field(grid, plan.spec)
    kwargs = {} if plan.eps_angle is None else {"eps_angle": plan.eps_angle}
    coll = collinearity_map(grid, **kwargs)
    write_field_csv(os.path.join(outdir, "field.csv"), grid)
    summary = render_kv({
        "retained_samples": int(
            ens.samples.shape[0] * ens.samples.shape[1]
        ),
        "sigma_bar": entropy.sigma_bar,
        "noise_floor": entropy.noise_floor,
        "valid_mass": entropy.valid_mass,
        "noncollinear_fraction": coll.noncollinear_fraction,
        "included_mass_fraction": coll.included_mass_fraction,
        "eps_angle": coll.eps_angle,
        "n_included": coll.n_included,
    })
    return {"field.csv": None, "field_summary.txt": summary}


def _run_selfref(plan: SelfrefPlan, outdir, seed, workers) -> dict[str, str]:
    def evaluate(k: float):
        return evaluate_coupling(
            replace(plan.system, kappa=k),
            plan.manifold,
            plan.sim,
            seed=seed,
            max_points=plan.max_points,
            workers=workers,
        )

    report = kappa_threshold(
        evaluate,
        kappas=plan.kappas,
        f_min=plan.f_min,
        c_min=plan.c_min,
        rel_tol=plan.rel_tol,
        on_ambiguous=plan.on_ambiguous,
    )
    rows = [
        (p.kappa, p.mi, p.fidelity, p.efficacy, p.near_deterministic)
        for p in report.points
    ]
    files = {}
    files["coupling.csv"] = render_csv(COUPLING_CSV_HEADER, rows)
    files["coupling_summary.txt"] = render_kv({
        "threshold": report.threshold,
        "f_min": report.f_min,
        "c_min": report.c_min,
        "n_points": len(report.points),
        "note": report.note,
    })
    return files


def _run_breakdown(plan: BreakdownPlan, outdir, seed, workers) -> dict[str, str]:
    kwargs = {}
    if plan.n_trials is not None:
        kwargs["n_trials"] = plan.n_trials
    if plan.tol is not None:
        kwargs["tol"] = plan.tol
    if plan.n_symbols is not None:
        kwargs["n_symbols"] = plan.n_symbols
    if plan.n_boot is not None:
        kwargs["n_boot"] = plan.n_boot
    curve = breakdown_curve(
        plan.sizes, plan.delta, seed=seed, workers=workers, **kwargs
    )
    write_breakdown_csv(os.path.join(outdir, "breakdown.csv"), curve)
    if curve.fit is not None:
        summary = dict(fit_summary(curve.fit))
    else:
        summary = {"n_sizes": len(curve.points), "delta": plan.delta}
    summary["note"] = curve.note
    return {
        "breakdown.csv": None,
        "breakdown_summary.txt": render_kv(summary),
    }


def _run_synergy(plan: SynergyPlan, outdir, seed, workers) -> dict[str, str]:
    report = synergy_experiment(
        plan.manifold,
        plan.base,
        plan.well_a,
        plan.well_b,
        plan.region,
        plan.sim,
        seed=seed,
        n_boot=plan.n_boot,
        paired=plan.paired,
        metric=plan.metric,
        workers=workers,
    )
    write_synergy_csv(os.path.join(outdir, "synergy.csv"), report)
    write_synergy_summary(
        os.path.join(outdir, "synergy_summary.txt"), report
    )
    files = {"synergy.csv": None, "synergy_summary.txt": None}
    if plan.sweep_values is not None:
        curve = yield_curve(
            lambda s: tilted(plan.base, s, plan.sweep_axis),
            plan.manifold,
            plan.region,
            plan.sweep_values,
            plan.sim,
            seed=seed,
            n_boot=plan.n_boot,
            workers=workers,
        )
        write_yield_curve_csv(
            os.path.join(outdir, "yield_curve.csv"), curve
        )
        files["yield_curve.csv"] = None
        files["curve_summary.txt"] = render_kv({
            "n_values": len(curve.values),
            "mode_count": curve.mode_count,
            "unimodal": curve.unimodal,
            "peaks": "[" + ", ".join(str(i) for i in curve.peaks) + "]",
        })
    return files


def _run_scaling(plan: ScalingPlan, outdir, seed, workers) -> dict[str, str]:
    family = default_family(n_values=plan.sizes, delta=plan.delta, seed=seed)
    report = run_joint_scaling(
        family, plan.config, seed=seed, workers=workers
    )
    write_scaling_csv(os.path.join(outdir, "scaling.csv"), report)
    write_scaling_summary(
        os.path.join(outdir, "scaling_summary.txt"), report
    )
    return {"scaling.csv": None, "scaling_summary.txt": None}


_RUNNERS = {
    MarkovPlan: _run_markov,
    FieldPlan: _run_field,
    SelfrefPlan: _run_selfref,
    BreakdownPlan: _run_breakdown,
    SynergyPlan: _run_synergy,
    ScalingPlan: _run_scaling,
}


def config_hash(cfg: ExperimentConfig) -> str:
    """Digest of the effective experiment inputs (seed + kind section)."""
    tree = {"seed": cfg.seed, cfg.kind: cfg.section}
    text = "\n".join(
        f"{key} = {value}" for key, value in cfgmod.flatten_config(tree)
    )
    return hashlib.sha256(text.encode()).hexdigest()


def resolve_outdir(cfg: ExperimentConfig, out_flag: str | None,
                   config_path: str) -> str:
    if out_flag:
        return out_flag
    if cfg.out:
        return os.path.join(cfg.base_dir, cfg.out)
    stem = os.path.splitext(os.path.basename(config_path))[0]
    root = os.environ.get(cfgmod.OUT_ENV, "runs")
    return os.path.join(root, stem)


def check_outdir_writable(outdir: str) -> str | None:
    """Nearest-existing-ancestor writability probe; None when fine."""
    probe = os.path.abspath(outdir)
    while not os.path.exists(probe):
        parent = os.path.dirname(probe)
        if parent == probe:
            break
        probe = parent
    if os.path.isfile(probe):
        return f"output path {outdir!r} collides with file {probe!r}"
    if not os.access(probe, os.W_OK):
        return f"output directory {outdir!r} is not writable at {probe!r}"
    return None


def execute(cfg: ExperimentConfig, plan, outdir: str,
            workers: int = 1) -> list[str]:
    """Run the plan and emit every artifact plus the manifest."""
    problem = check_outdir_writable(outdir)
    if problem:
        raise ConfigError(problem)
    os.makedirs(outdir, exist_ok=True)

    start = time.monotonic()
    files = _RUNNERS[type(plan)](plan, outdir, cfg.seed, workers)
    for name, text in files.items():
        if text is not None:
            atomic_write_text(os.path.join(outdir, name), text)
    duration = time.monotonic() - start

    manifest = {
        "tool_version": _version(),
        "config_hash": config_hash(cfg),
        "duration_seconds": round(duration, 3),
        "n_files": len(files),
    }
    for name in sorted(files):
        manifest[f"sha256:{name}"] = sha256_file(os.path.join(outdir, name))
    for key, value in cfgmod.flatten_config(
        {"seed": cfg.seed, "verbosity": cfg.verbosity, cfg.kind: cfg.section}
    ):
        manifest[f"config.{key}"] = value
    atomic_write_text(
        os.path.join(outdir, MANIFEST_NAME), render_kv(manifest)
    )
    return sorted(files) + [MANIFEST_NAME]


def _version() -> str:
    from .. import __version__

    return __version__
