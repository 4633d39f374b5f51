"""Experiment configuration: TOML schema, overrides, and plan builders.

A config names exactly one experiment kind and everything the kind needs
to run. Builders construct the same objects the runner will use, so a
config that validates cheaply is a config that runs: every constructor
precondition, geometry check, and simulation pre-check (confinement,
stability) fires here, before any sampling starts.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..breakdown import DELTA_MAX, DELTA_MIN, MIN_TRIALS
from ..errors import ConfigError
from ..fields import (
    DriftSpec,
    FeedbackTanhTerm,
    GaussWellsTerm,
    LinearTerm,
    ManifoldSpec,
    PolyAxisTerm,
    ReplicatorTerm,
    SimConfig,
    SolenoidTerm,
    box,
    check_confinement,
    check_stability,
    drift,
    simplex,
)
from ..markov import RateMatrix, load_edge_list, rate_matrix
from ..scaling import DEFAULT_SIZES, ScalingConfig, default_family
from ..selfref import (
    EFFICACY_MIN,
    FEEDBACK_LINEAR,
    FIDELITY_MIN,
    SelfRefSystem,
)
from ..synergy import (
    METRIC_DEPTH,
    METRIC_YIELD,
    MIN_BOOT,
    MIN_SWEEP_VALUES,
    DEFAULT_BOOT,
    PerturbationWell,
    TargetRegion,
    apply_wells,
    check_region_inside,
    disjoint_supports,
    target_ball,
    target_box,
    touches_support,
)

KINDS = ("markov", "field", "selfref", "breakdown", "synergy", "scaling")
TOP_KEYS = ("seed", "out", "verbosity")
SEED_MAX = 2**64
OUT_ENV = "DRIFTLAB_OUT"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    section: dict
    seed: int
    out: str | None
    verbosity: int
    base_dir: str
    warnings: tuple[str, ...] = ()


def load_raw(path: str) -> dict:
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path!r} does not parse: {exc}") from exc


def apply_overrides(raw: dict, sets: list[str]) -> dict:
    """Apply repeatable ``--set dotted.path=value`` pairs onto the raw tree.

    Values parse as TOML literals, falling back to a bare string; missing
    intermediate tables are created so a section can be built from flags
    alone.
    """
    out = _deep_copy(raw)
    for spec in sets:
        key, sep, text = spec.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override {spec!r} is not of the form key=value")
        try:
            value = tomllib.loads(f"v = {text}")["v"]
        except tomllib.TOMLDecodeError:
            value = text
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(
                    f"override {key!r} descends into non-table key {part!r}"
                )
            node = nxt
        node[parts[-1]] = value
    return out


def _deep_copy(node: Any) -> Any:
    if isinstance(node, dict):
        return {k: _deep_copy(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_deep_copy(v) for v in node]
    return node


def resolve_config(
    raw: dict, base_dir: str = "."
) -> tuple[ExperimentConfig | None, list[str], list[str]]:
    """Top-level structure check: (config or None, errors, warnings)."""
    errors: list[str] = []
    warnings: list[str] = []

    present = [k for k in KINDS if k in raw]
    if len(present) == 0:
        errors.append(
            "config has no experiment section; expected exactly one of: "
            + ", ".join(KINDS)
        )
    elif len(present) > 1:
        errors.append(
            f"config has {len(present)} experiment sections "
            f"({', '.join(present)}); exactly one allowed"
        )

    unknown = [k for k in raw if k not in KINDS and k not in TOP_KEYS]
    if unknown:
        errors.append(f"unknown top-level keys: {', '.join(sorted(unknown))}")

    seed = 0
    if "seed" in raw:
        value = raw["seed"]
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"seed must be an integer, got {value!r}")
        elif not 0 <= value < SEED_MAX:
            errors.append(f"seed must be an unsigned 64-bit integer, got {value}")
        else:
            seed = value
    else:
        warnings.append("seed missing; defaulting to 0")

    out = None
    if "out" in raw:
        if not isinstance(raw["out"], str) or not raw["out"]:
            errors.append(f"out must be a nonempty string, got {raw['out']!r}")
        else:
            out = raw["out"]

    verbosity = 1
    if "verbosity" in raw:
        value = raw["verbosity"]
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            errors.append(f"verbosity must be a nonnegative integer, got {value!r}")
        else:
            verbosity = value

    if errors:
        return None, errors, warnings
    kind = present[0]
    section = raw[kind]
    if not isinstance(section, dict):
        return None, [f"[{kind}] must be a table"], warnings
    return (
        ExperimentConfig(
            kind=kind,
            section=section,
            seed=seed,
            out=out,
            verbosity=verbosity,
            base_dir=base_dir,
            warnings=tuple(warnings),
        ),
        [],
        warnings,
    )


# ---------------------------------------------------------------------------
# table walking


class _Table:
    """One config table: typed key extraction with collected complaints."""

    def __init__(self, name: str, data: dict, issues: list[str]):
        if not isinstance(data, dict):
            raise ConfigError(f"[{name}] must be a table")
        self.name = name
        self.data = data
        self.issues = issues
        self.seen: set[str] = set()

    def _get(self, key: str, required: bool, default):
        self.seen.add(key)
        if key not in self.data:
            if required:
                self.issues.append(f"[{self.name}] is missing required key {key!r}")
            return default
        return self.data[key]

    def number(self, key: str, required=False, default=None):
        v = self._get(key, required, default)
        if v is default and key not in self.data:
            return default
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.issues.append(f"[{self.name}] {key} must be a number, got {v!r}")
            return default
        return float(v)

    def integer(self, key: str, required=False, default=None):
        v = self._get(key, required, default)
        if v is default and key not in self.data:
            return default
        if isinstance(v, bool) or not isinstance(v, int):
            self.issues.append(f"[{self.name}] {key} must be an integer, got {v!r}")
            return default
        return v

    def text(self, key: str, required=False, default=None):
        v = self._get(key, required, default)
        if v is default and key not in self.data:
            return default
        if not isinstance(v, str):
            self.issues.append(f"[{self.name}] {key} must be a string, got {v!r}")
            return default
        return v

    def boolean(self, key: str, required=False, default=None):
        v = self._get(key, required, default)
        if v is default and key not in self.data:
            return default
        if not isinstance(v, bool):
            self.issues.append(f"[{self.name}] {key} must be a boolean, got {v!r}")
            return default
        return v

    def array(self, key: str, required=False, default=None):
        v = self._get(key, required, default)
        if v is default and key not in self.data:
            return default
        if not isinstance(v, list):
            self.issues.append(f"[{self.name}] {key} must be an array, got {v!r}")
            return default
        return v

    def table(self, key: str, required=False):
        v = self._get(key, required, None)
        if v is None:
            return None
        if not isinstance(v, dict):
            self.issues.append(f"[{self.name}] {key} must be a table")
            return None
        return v

    def finish(self):
        extra = sorted(set(self.data) - self.seen)
        if extra:
            self.issues.append(
                f"[{self.name}] has unknown keys: {', '.join(extra)}"
            )


def _raise_issues(issues: list[str]):
    if issues:
        raise ConfigError("\n".join(issues))


# ---------------------------------------------------------------------------
# shared sub-schemas


def parse_manifold(data: dict, name: str) -> ManifoldSpec:
    issues: list[str] = []
    tab = _Table(name, data, issues)
    kind = tab.text("kind", required=True)
    if kind == "box":
        lo = tab.array("lo", required=True)
        hi = tab.array("hi", required=True)
        tab.finish()
        _raise_issues(issues)
        return box(lo, hi)
    if kind == "simplex":
        if "lo" in data or "hi" in data:
            issues.append(
                f"[{name}] simplex manifolds are bounded by the simplex "
                "itself and do not take box bounds (lo/hi); give dim only"
            )
        dim = tab.integer("dim", required=True)
        tab.array("lo")
        tab.array("hi")
        tab.finish()
        _raise_issues(issues)
        return simplex(dim)
    if kind is not None:
        issues.append(f"[{name}] kind must be 'box' or 'simplex', got {kind!r}")
    _raise_issues(issues)
    raise AssertionError("unreachable")


def parse_sim(data: dict, name: str) -> SimConfig:
    issues: list[str] = []
    tab = _Table(name, data, issues)
    dt = tab.number("dt", required=True)
    noise = tab.number("noise", required=True)
    n_steps = tab.integer("n_steps", required=True)
    n_chains = tab.integer("n_chains", default=16)
    burn_fraction = tab.number("burn_fraction", default=0.2)
    thin = tab.integer("thin", default=10)
    tab.finish()
    _raise_issues(issues)
    return SimConfig(
        dt=dt,
        noise=noise,
        n_steps=n_steps,
        n_chains=n_chains,
        burn_fraction=burn_fraction,
        thin=thin,
    )


_TERM_KEYS = {
    "linear": ("matrix", "offset"),
    "poly_axis": ("coeffs",),
    "gauss_wells": ("centers", "widths", "depths"),
    "solenoid": ("omega", "center", "axes"),
    "replicator": ("payoff",),
    "feedback_tanh": ("kappa", "gain", "proj"),
}


def parse_terms(entries: list, name: str) -> tuple:
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"[{name}] must be a nonempty array of term tables")
    terms = []
    for i, entry in enumerate(entries):
        label = f"{name}[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"[{label}] must be a table")
        kind = entry.get("type")
        if kind not in _TERM_KEYS:
            raise ConfigError(
                f"[{label}] type must be one of "
                f"{', '.join(sorted(_TERM_KEYS))}; got {kind!r}"
            )
        extra = sorted(set(entry) - set(_TERM_KEYS[kind]) - {"type"})
        if extra:
            raise ConfigError(
                f"[{label}] has unknown keys for type {kind!r}: "
                + ", ".join(extra)
            )
        args = {k: v for k, v in entry.items() if k != "type"}
        try:
            if kind == "linear":
                terms.append(LinearTerm(**args))
            elif kind == "poly_axis":
                terms.append(PolyAxisTerm(**args))
            elif kind == "gauss_wells":
                terms.append(GaussWellsTerm(**args))
            elif kind == "solenoid":
                if "axes" in args:
                    args["axes"] = tuple(args["axes"])
                terms.append(SolenoidTerm(**args))
            elif kind == "replicator":
                terms.append(ReplicatorTerm(**args))
            else:
                terms.append(FeedbackTanhTerm(**args))
        except (ConfigError, TypeError) as exc:
            raise ConfigError(f"[{label}] {exc}") from exc
    return tuple(terms)


def _parse_kappas(values, name: str) -> tuple[float, ...]:
    if (
        not isinstance(values, list)
        or len(values) < 2
        or not all(
            isinstance(k, (int, float)) and not isinstance(k, bool) and k > 0
            for k in values
        )
    ):
        raise ConfigError(
            f"[{name}] kappas must be at least 2 positive numbers"
        )
    scan = tuple(float(k) for k in values)
    if any(b <= a for a, b in zip(scan, scan[1:])):
        raise ConfigError(f"[{name}] kappas must be strictly increasing")
    return scan


def _check_delta(delta: float, sizes, name: str, issues: list[str]):
    if delta is None:
        return
    if delta < DELTA_MIN:
        issues.append(
            f"[{name}] delta {delta:g} is below the minimum divergence "
            f"{DELTA_MIN:g}"
        )
    elif delta > DELTA_MAX:
        issues.append(
            f"[{name}] delta {delta:g} is above the maximum divergence "
            f"{DELTA_MAX:g}"
        )
    elif sizes and min(sizes) >= 2 and delta >= math.log(min(sizes)):
        issues.append(
            f"[{name}] delta {delta:g} must stay strictly below "
            f"ln(min N) = {math.log(min(sizes)):.4g}"
        )


# ---------------------------------------------------------------------------
# kind builders


@dataclass(frozen=True)
class MarkovPlan:
    rm: RateMatrix


@dataclass(frozen=True)
class FieldPlan:
    manifold: ManifoldSpec
    spec: DriftSpec
    sim: SimConfig
    cells_per_axis: int | None
    eps_angle: float | None


@dataclass(frozen=True)
class SelfrefPlan:
    system: SelfRefSystem
    manifold: ManifoldSpec
    sim: SimConfig
    kappas: tuple[float, ...]
    f_min: float
    c_min: float
    rel_tol: float
    max_points: int
    on_ambiguous: str


@dataclass(frozen=True)
class BreakdownPlan:
    sizes: tuple[int, ...]
    delta: float
    n_trials: int | None
    tol: float | None
    n_symbols: int | None
    n_boot: int | None


@dataclass(frozen=True)
class SynergyPlan:
    manifold: ManifoldSpec
    base: DriftSpec
    well_a: PerturbationWell
    well_b: PerturbationWell
    region: TargetRegion
    sim: SimConfig
    n_boot: int
    paired: bool
    metric: str
    sweep_values: tuple[float, ...] | None
    sweep_axis: int


@dataclass(frozen=True)
class ScalingPlan:
    sizes: tuple[int, ...]
    delta: float
    config: ScalingConfig


def build_markov(cfg: ExperimentConfig) -> MarkovPlan:
    issues: list[str] = []
    tab = _Table("markov", cfg.section, issues)
    edges = tab.text("edges")
    ring = tab.integer("ring")
    rates = tab.array("rates")
    forward = tab.number("forward", default=2.0)
    backward = tab.number("backward", default=1.0)
    tab.finish()
    sources = [k for k, v in
               (("edges", edges), ("ring", ring), ("rates", rates))
               if v is not None]
    if len(sources) != 1:
        issues.append(
            "[markov] needs exactly one network source (edges, ring, or "
            f"rates); got {len(sources)}"
        )
    _raise_issues(issues)
    if edges is not None:
        return MarkovPlan(load_edge_list(os.path.join(cfg.base_dir, edges)))
    if ring is not None:
        if ring < 2:
            raise ConfigError("[markov] ring needs at least 2 states")
        if forward <= 0 or backward <= 0:
            raise ConfigError("[markov] ring rates must be positive")
        mat = np.zeros((ring, ring))
        for i in range(ring):
            mat[i, (i + 1) % ring] = forward
            mat[(i + 1) % ring, i] = backward
        return MarkovPlan(rate_matrix(mat))
    return MarkovPlan(rate_matrix(rates))


def _precheck_dynamics(manifold, spec, sim, name: str):
    """The exact pre-flight checks simulate() runs, surfaced at build time."""
    try:
        if manifold.kind == "box":
            check_confinement(manifold, spec)
        if sim.check_stability:
            check_stability(manifold, spec, sim, seed=0)
    except ConfigError as exc:
        raise ConfigError(f"[{name}] {exc}") from exc


def build_field(cfg: ExperimentConfig) -> FieldPlan:
    issues: list[str] = []
    tab = _Table("field", cfg.section, issues)
    man_tab = tab.table("manifold", required=True)
    sim_tab = tab.table("sim", required=True)
    terms = tab.array("terms", required=True)
    cells = tab.integer("cells_per_axis")
    eps_angle = tab.number("eps_angle")
    tab.finish()
    _raise_issues(issues)
    manifold = parse_manifold(man_tab, "field.manifold")
    sim = parse_sim(sim_tab, "field.sim")
    spec = drift(manifold.dim, *parse_terms(terms, "field.terms"))
    if manifold.kind != "box":
        raise ConfigError(
            "[field] current reconstruction needs a box manifold"
        )
    _precheck_dynamics(manifold, spec, sim, "field")
    return FieldPlan(
        manifold=manifold,
        spec=spec,
        sim=sim,
        cells_per_axis=cells,
        eps_angle=eps_angle,
    )


def build_selfref(cfg: ExperimentConfig) -> SelfrefPlan:
    issues: list[str] = []
    tab = _Table("selfref", cfg.section, issues)
    man_tab = tab.table("manifold", required=True)
    sim_tab = tab.table("sim", required=True)
    terms = tab.array("substrate", required=True)
    readout = tab.array("readout", required=True)
    feedback_map = tab.array("feedback_map")
    feedback = tab.text("feedback", default=FEEDBACK_LINEAR)
    lag_strides = tab.integer("lag_strides", default=1)
    obs_noise = tab.number("obs_noise", default=0.0)
    kappas = tab.array("kappas", required=True)
    f_min = tab.number("f_min", default=FIDELITY_MIN)
    c_min = tab.number("c_min", default=EFFICACY_MIN)
    rel_tol = tab.number("rel_tol", default=0.01)
    max_points = tab.integer("max_points", default=8192)
    on_ambiguous = tab.text("on_ambiguous", default="raise")
    tab.finish()
    _raise_issues(issues)
    manifold = parse_manifold(man_tab, "selfref.manifold")
    sim = parse_sim(sim_tab, "selfref.sim")
    substrate = drift(manifold.dim, *parse_terms(terms, "selfref.substrate"))
    scan = _parse_kappas(kappas, "selfref")
    if rel_tol <= 0:
        raise ConfigError("[selfref] rel_tol must be positive")
    if on_ambiguous not in ("raise", "first"):
        raise ConfigError(
            f"[selfref] on_ambiguous must be 'raise' or 'first', "
            f"got {on_ambiguous!r}"
        )
    system = SelfRefSystem(
        substrate=substrate,
        readout=readout,
        kappa=scan[-1],
        feedback=feedback,
        feedback_map=feedback_map,
        lag_strides=lag_strides,
        obs_noise=obs_noise,
    )
    # bisection stays within (0, max kappa]; drift is affine in kappa, so
    # the endpoints bound every visited strength
    _precheck_dynamics(manifold, substrate, sim, "selfref")
    _precheck_dynamics(manifold, system.total_drift(), sim, "selfref")
    return SelfrefPlan(
        system=system,
        manifold=manifold,
        sim=sim,
        kappas=scan,
        f_min=f_min,
        c_min=c_min,
        rel_tol=rel_tol,
        max_points=max_points,
        on_ambiguous=on_ambiguous,
    )


def build_breakdown(cfg: ExperimentConfig) -> BreakdownPlan:
    issues: list[str] = []
    tab = _Table("breakdown", cfg.section, issues)
    sizes = tab.array("sizes")
    single = tab.integer("n_primitives")
    delta = tab.number("delta", required=True)
    n_trials = tab.integer("n_trials")
    tol = tab.number("tol")
    n_symbols = tab.integer("n_symbols")
    n_boot = tab.integer("n_boot")
    tab.finish()
    if (sizes is None) == (single is None):
        issues.append(
            "[breakdown] needs exactly one of sizes (array) or "
            "n_primitives (integer)"
        )
    ns: tuple[int, ...] = ()
    if sizes is not None:
        if not sizes or not all(
            isinstance(n, int) and not isinstance(n, bool) and n >= 2
            for n in sizes
        ):
            issues.append("[breakdown] sizes must be integers >= 2")
        else:
            ns = tuple(sizes)
    elif single is not None:
        if single < 2:
            issues.append("[breakdown] n_primitives must be at least 2")
        else:
            ns = (single,)
    _check_delta(delta, ns, "breakdown", issues)
    if n_trials is not None and n_trials < MIN_TRIALS:
        issues.append(
            f"[breakdown] n_trials must be at least {MIN_TRIALS}, "
            f"got {n_trials}"
        )
    if tol is not None and tol <= 0:
        issues.append("[breakdown] tol must be positive")
    if n_boot is not None and n_boot < 0:
        issues.append("[breakdown] n_boot must be nonnegative")
    if n_symbols is not None and n_symbols < 1:
        issues.append("[breakdown] n_symbols must be at least 1")
    _raise_issues(issues)
    return BreakdownPlan(
        sizes=ns,
        delta=delta,
        n_trials=n_trials,
        tol=tol,
        n_symbols=n_symbols,
        n_boot=n_boot,
    )


def build_synergy(cfg: ExperimentConfig) -> SynergyPlan:
    issues: list[str] = []
    tab = _Table("synergy", cfg.section, issues)
    man_tab = tab.table("manifold", required=True)
    sim_tab = tab.table("sim", required=True)
    terms = tab.array("terms", required=True)
    wells = tab.array("wells", required=True)
    target = tab.table("target", required=True)
    n_boot = tab.integer("n_boot", default=DEFAULT_BOOT)
    paired = tab.boolean("paired", default=True)
    metric = tab.text("metric", default=METRIC_YIELD)
    sweep_tab = tab.table("sweep")
    tab.finish()
    if wells is not None and len(wells) != 2:
        issues.append(f"[synergy] needs exactly 2 wells, got {len(wells)}")
    if metric not in (METRIC_YIELD, METRIC_DEPTH):
        issues.append(
            f"[synergy] metric must be {METRIC_YIELD!r} or "
            f"{METRIC_DEPTH!r}, got {metric!r}"
        )
    if n_boot is not None and n_boot < MIN_BOOT:
        issues.append(
            f"[synergy] n_boot must be at least {MIN_BOOT}, got {n_boot}"
        )
    _raise_issues(issues)
    manifold = parse_manifold(man_tab, "synergy.manifold")
    sim = parse_sim(sim_tab, "synergy.sim")
    base = drift(manifold.dim, *parse_terms(terms, "synergy.terms"))

    def parse_well(entry, label):
        sub: list[str] = []
        wt = _Table(label, entry, sub)
        center = wt.array("center", required=True)
        width = wt.number("width", required=True)
        depth = wt.number("depth", required=True)
        support = wt.number("support_radius")
        wt.finish()
        _raise_issues(sub)
        kwargs = {} if support is None else {"support_radius": support}
        return PerturbationWell(center, width, depth, **kwargs)

    well_a = parse_well(wells[0], "synergy.wells[0]")
    well_b = parse_well(wells[1], "synergy.wells[1]")
    region = parse_target(target, "synergy.target")

    check_region_inside(region, manifold)
    if not disjoint_supports(well_a, well_b):
        raise ConfigError(
            "[synergy] well supports intersect; synergy needs disjoint "
            "perturbations"
        )
    if touches_support(region, well_a) and touches_support(region, well_b):
        raise ConfigError(
            "[synergy] target region touches both well supports"
        )
    for spec in (base, apply_wells(base, well_a),
                 apply_wells(base, well_b),
                 apply_wells(base, well_a, well_b)):
        _precheck_dynamics(manifold, spec, sim, "synergy")

    sweep_values = None
    sweep_axis = 0
    if sweep_tab is not None:
        sub: list[str] = []
        st = _Table("synergy.sweep", sweep_tab, sub)
        values = st.array("values", required=True)
        sweep_axis = st.integer("axis", default=0)
        st.finish()
        _raise_issues(sub)
        if not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in values
        ):
            raise ConfigError("[synergy.sweep] values must be numbers")
        sweep_values = tuple(float(v) for v in values)
        if len(sweep_values) < MIN_SWEEP_VALUES:
            raise ConfigError(
                f"[synergy.sweep] needs at least {MIN_SWEEP_VALUES} values"
            )
        if any(b <= a for a, b in
               zip(sweep_values, sweep_values[1:])):
            raise ConfigError(
                "[synergy.sweep] values must be strictly increasing"
            )
        if not 0 <= sweep_axis < manifold.dim:
            raise ConfigError(
                f"[synergy.sweep] axis {sweep_axis} outside dimension "
                f"{manifold.dim}"
            )
        for s in (sweep_values[0], sweep_values[-1]):
            _precheck_dynamics(
                manifold, tilted(base, s, sweep_axis), sim, "synergy.sweep"
            )
    return SynergyPlan(
        manifold=manifold,
        base=base,
        well_a=well_a,
        well_b=well_b,
        region=region,
        sim=sim,
        n_boot=n_boot,
        paired=paired,
        metric=metric,
        sweep_values=sweep_values,
        sweep_axis=sweep_axis,
    )


def parse_target(data: dict, name: str) -> TargetRegion:
    issues: list[str] = []
    tab = _Table(name, data, issues)
    kind = tab.text("kind", required=True)
    if kind == "box":
        lo = tab.array("lo", required=True)
        hi = tab.array("hi", required=True)
        tab.finish()
        _raise_issues(issues)
        return target_box(lo, hi)
    if kind == "ball":
        center = tab.array("center", required=True)
        radius = tab.number("radius", required=True)
        tab.finish()
        _raise_issues(issues)
        return target_ball(center, radius)
    if kind is not None:
        issues.append(f"[{name}] kind must be 'box' or 'ball', got {kind!r}")
    _raise_issues(issues)
    raise AssertionError("unreachable")


def tilted(base: DriftSpec, strength: float, axis: int) -> DriftSpec:
    """Base drift plus a linear potential tilt along one axis."""
    coeffs = np.zeros((base.dim, 4))
    coeffs[axis, 0] = strength
    return base.with_term(PolyAxisTerm(coeffs))


def build_scaling(cfg: ExperimentConfig) -> ScalingPlan:
    issues: list[str] = []
    tab = _Table("scaling", cfg.section, issues)
    sizes = tab.array("sizes")
    delta = tab.number("delta", default=0.5)
    sim_tab = tab.table("sim")
    kappas = tab.array("kappas")
    rel_tol = tab.number("rel_tol")
    n_trials = tab.integer("n_trials")
    alpha_tol = tab.number("alpha_tol")
    n_symbols = tab.integer("n_symbols")
    max_points = tab.integer("max_points")
    tab.finish()
    ns = None
    if sizes is not None:
        if not all(
            isinstance(n, int) and not isinstance(n, bool) for n in sizes
        ):
            issues.append("[scaling] sizes must be integers")
        else:
            ns = tuple(sizes)
    _check_delta(delta, ns if ns is not None else DEFAULT_SIZES,
                 "scaling", issues)
    _raise_issues(issues)

    defaults = ScalingConfig()
    overrides: dict[str, Any] = {}
    if sim_tab is not None:
        overrides["sim"] = parse_sim(sim_tab, "scaling.sim")
    if kappas is not None:
        overrides["kappas"] = _parse_kappas(kappas, "scaling")
    if rel_tol is not None:
        if rel_tol <= 0:
            raise ConfigError("[scaling] rel_tol must be positive")
        overrides["rel_tol"] = rel_tol
    if n_trials is not None:
        if n_trials < MIN_TRIALS:
            raise ConfigError(
                f"[scaling] n_trials must be at least {MIN_TRIALS}, "
                f"got {n_trials}"
            )
        overrides["n_trials"] = n_trials
    if alpha_tol is not None:
        if alpha_tol <= 0:
            raise ConfigError("[scaling] alpha_tol must be positive")
        overrides["alpha_tol"] = alpha_tol
    if n_symbols is not None:
        overrides["n_symbols"] = n_symbols
    if max_points is not None:
        overrides["max_points"] = max_points
    config = replace(defaults, **overrides) if overrides else defaults

    # family invariants (size count, spacing, span) fire on construction
    family = (
        default_family(n_values=ns, delta=delta)
        if ns is not None
        else default_family(delta=delta)
    )
    return ScalingPlan(sizes=family.n_values, delta=delta, config=config)


_BUILDERS = {
    "markov": build_markov,
    "field": build_field,
    "selfref": build_selfref,
    "breakdown": build_breakdown,
    "synergy": build_synergy,
    "scaling": build_scaling,
}


def build_plan(cfg: ExperimentConfig):
    return _BUILDERS[cfg.kind](cfg)


# ---------------------------------------------------------------------------
# resolved-config serialization


def flatten_config(node: Any, prefix: str = "") -> list[tuple[str, str]]:
    """Dotted-key lines for hashing and the manifest echo, sorted."""
    from ..io_utils import fmt_value

    if isinstance(node, dict):
        lines: list[tuple[str, str]] = []
        for key in sorted(node):
            sub = f"{prefix}.{key}" if prefix else str(key)
            lines.extend(flatten_config(node[key], sub))
        return lines
    if isinstance(node, list):
        if any(isinstance(v, (dict, list)) for v in node):
            lines = []
            for i, item in enumerate(node):
                lines.extend(flatten_config(item, f"{prefix}.{i}"))
            return lines
        body = ", ".join(fmt_value(v) for v in node)
        return [(prefix, f"[{body}]")]
    return [(prefix, fmt_value(node))]


def resolved_lines(cfg: ExperimentConfig) -> list[str]:
    tree = {
        "seed": cfg.seed,
        "verbosity": cfg.verbosity,
        cfg.kind: cfg.section,
    }
    return [f"{key} = {value}" for key, value in flatten_config(tree)]
