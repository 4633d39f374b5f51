"""System families: one knob (the alphabet size N) moves everything.

A family couples a context ontology and a self-referential system to a
shared size parameter so breakdown rates and coupling thresholds can be
measured on the same axis. The default generator grows the readout count
like log2(N) over a fixed substrate; the feedback applied per unit kappa
then grows with the readout count, so the coupling threshold falls like
1/log N. That coupling is a modeling choice and is carried into report
notes verbatim.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..breakdown import Ontology, make_ontology
from ..errors import ConfigError
from ..fields import LinearTerm, ManifoldSpec, SimConfig, box, drift
from ..rng import child_rng, child_seed_sequence
from ..selfref import EFFICACY_MIN, FIDELITY_MIN, SelfRefSystem

MIN_SIZES = 5
SPAN_DECADES = 2.0

SUBSTRATE_DIM = 4
MANIFOLD_HALF_WIDTH = 6.0

DEFAULT_SIZES = (16, 64, 256, 1024, 4096)
DEFAULT_DELTA = 0.5

DEFAULT_FAMILY_NOTE = (
    "default generator: ceil(log2 N) unit readout rows over a fixed "
    f"{SUBSTRATE_DIM}-d substrate; feedback per unit kappa grows with the "
    "readout count, so the coupling threshold falls like 1/log N"
)


@dataclass(frozen=True)
class ScalingInstance:
    """Everything one size N pins down: contexts, system, state space."""

    ontology: Ontology
    system: SelfRefSystem
    manifold: ManifoldSpec


@dataclass(frozen=True)
class SystemFamily:
    family_id: str
    generator: Callable[[int], ScalingInstance]
    n_values: tuple[int, ...]
    note: str = ""

    def __post_init__(self):
        if not self.family_id:
            raise ConfigError("family_id must be a nonempty string")
        ns = tuple(int(n) for n in self.n_values)
        if len(ns) < MIN_SIZES:
            raise ConfigError(
                f"a family needs at least {MIN_SIZES} sizes, got {len(ns)}"
            )
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("family sizes must be strictly increasing")
        if ns[0] < 2:
            raise ConfigError("family sizes must be at least 2")
        span = math.log10(ns[-1] / ns[0])
        if span < SPAN_DECADES:
            raise ConfigError(
                f"family sizes span {span:.2f} decades; at least "
                f"{SPAN_DECADES:g} required"
            )
        object.__setattr__(self, "n_values", ns)


@dataclass(frozen=True)
class ScalingConfig:
    """Per-size estimation budgets shared by every N in a sweep."""

    sim: SimConfig = SimConfig(dt=1e-3, noise=0.5, n_steps=30_000, n_chains=4)
    kappas: tuple[float, ...] = (0.01, 0.03, 0.09, 0.27, 0.81)
    rel_tol: float = 0.02
    n_trials: int = 400
    alpha_tol: float = 0.01
    n_symbols: int | None = None
    f_min: float = FIDELITY_MIN
    c_min: float = EFFICACY_MIN
    max_points: int = 2048
    on_ambiguous: str = "first"  # a sweep should not die on one noisy flip


def readout_count(n: int) -> int:
    return int(math.ceil(math.log2(n)))


def default_family(
    n_values: tuple[int, ...] = DEFAULT_SIZES,
    delta: float = DEFAULT_DELTA,
    seed: int = 0,
    family_id: str = "log2-readout",
) -> SystemFamily:
    """Family whose readout count tracks log2(N) over an OU substrate."""
    substrate = drift(SUBSTRATE_DIM, LinearTerm(-np.eye(SUBSTRATE_DIM)))
    manifold = box(
        [-MANIFOLD_HALF_WIDTH] * SUBSTRATE_DIM,
        [MANIFOLD_HALF_WIDTH] * SUBSTRATE_DIM,
    )

    def generate(n: int) -> ScalingInstance:
        m = readout_count(n)
        rng = child_rng(seed, "scaling.readout", n)
        p = rng.normal(size=(m, SUBSTRATE_DIM))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        ont_seed = int(
            child_seed_sequence(seed, "scaling.ontology", n).generate_state(1)[0]
        )
        return ScalingInstance(
            ontology=make_ontology(n, delta, seed=ont_seed),
            system=SelfRefSystem(substrate=substrate, readout=p, kappa=1.0),
            manifold=manifold,
        )

    return SystemFamily(
        family_id=family_id,
        generator=generate,
        n_values=n_values,
        note=DEFAULT_FAMILY_NOTE,
    )
