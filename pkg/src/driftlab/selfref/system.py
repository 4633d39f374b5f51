"""Self-referential Langevin systems.

A substrate drift is augmented with a feedback term that depends on the
system's own readout g(x) = P x. The feedback is either linear,
b += -kappa W g, or saturating, b += -kappa tanh(G g). The readout series
used for information measures is the lagged readout of the *simulated*
trajectory, optionally with observation noise, so the measured channel is
the one the feedback actually acts through.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..fields.drift import DriftSpec, FeedbackTanhTerm, LinearTerm, eval_drift
from ..fields.manifold import ManifoldSpec
from ..fields.sim import Ensemble, SimConfig, simulate
from ..rng import child_rng

FEEDBACK_LINEAR = "linear"
FEEDBACK_SATURATING = "saturating"


@dataclass(frozen=True)
class SelfRefSystem:
    substrate: DriftSpec
    readout: np.ndarray  # P (m, dim): g(x) = P x
    kappa: float
    feedback: str = FEEDBACK_LINEAR
    feedback_map: np.ndarray = None  # type: ignore[assignment]  # W (dim, m)
    lag_strides: int = 1
    obs_noise: float = 0.0

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.readout, dtype=float))
        if p.shape[1] != self.substrate.dim:
            raise ConfigError(
                f"readout maps dim {p.shape[1]}, substrate has {self.substrate.dim}"
            )
        w = self.feedback_map
        w = p.T.copy() if w is None else np.atleast_2d(np.asarray(w, dtype=float))
        if w.shape != (self.substrate.dim, p.shape[0]):
            raise ConfigError(
                f"feedback map must be {(self.substrate.dim, p.shape[0])}, "
                f"got {w.shape}"
            )
        if self.feedback not in (FEEDBACK_LINEAR, FEEDBACK_SATURATING):
            raise ConfigError(f"unknown feedback style {self.feedback!r}")
        if self.kappa < 0:
            raise ConfigError("kappa must be nonnegative")
        if self.lag_strides < 0:
            raise ConfigError("lag_strides must be nonnegative")
        if self.obs_noise < 0:
            raise ConfigError("obs_noise must be nonnegative")
        object.__setattr__(self, "readout", p)
        object.__setattr__(self, "feedback_map", w)

    @property
    def n_readouts(self) -> int:
        return self.readout.shape[0]

    def total_drift(self) -> DriftSpec:
        if self.kappa == 0.0:
            return self.substrate
        if self.feedback == FEEDBACK_LINEAR:
            term = LinearTerm(-self.kappa * (self.feedback_map @ self.readout))
        else:
            term = FeedbackTanhTerm(
                kappa=self.kappa, gain=self.feedback_map, proj=self.readout
            )
        return self.substrate.with_term(term)

    def readout_of(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.readout.T

    def feedback_at(self, x: np.ndarray) -> np.ndarray:
        """The feedback contribution to the drift at given states."""
        g = self.readout_of(x)
        if self.feedback == FEEDBACK_LINEAR:
            return -self.kappa * (g @ self.feedback_map.T)
        return -self.kappa * np.tanh(g @ self.feedback_map.T)

    def substrate_drift_at(self, x: np.ndarray) -> np.ndarray:
        return eval_drift(self.substrate, x)


@dataclass(frozen=True)
class SelfRefTrace:
    system: SelfRefSystem
    ensemble: Ensemble
    states: np.ndarray  # (n_chains, n_pairs, dim), aligned with readouts
    readouts: np.ndarray  # (n_chains, n_pairs, m), lagged by lag_strides

    @property
    def stride_time(self) -> float:
        return self.ensemble.stride_time

    def pooled_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.states.shape[2]
        m = self.readouts.shape[2]
        return self.states.reshape(-1, d), self.readouts.reshape(-1, m)


def integrate_selfref(
    system: SelfRefSystem,
    manifold: ManifoldSpec,
    config: SimConfig,
    seed: int,
    label: str = "selfref",
    workers: int = 1,
) -> SelfRefTrace:
    ens = simulate(
        manifold, system.total_drift(), config, seed, label=label, workers=workers
    )
    lag = system.lag_strides
    if ens.samples.shape[1] <= lag:
        raise ConfigError(
            f"retained series ({ens.samples.shape[1]} strides) shorter than "
            f"the readout lag ({lag})"
        )
    if lag > 0:
        states = ens.samples[:, lag:, :]
        readouts = system.readout_of(ens.samples[:, :-lag, :])
    else:
        states = ens.samples
        readouts = system.readout_of(ens.samples)
    if system.obs_noise > 0:
        rng = child_rng(seed, label + ".obs", 0)
        readouts = readouts + system.obs_noise * rng.standard_normal(
            readouts.shape
        )
    return SelfRefTrace(
        system=system, ensemble=ens, states=states, readouts=readouts
    )
