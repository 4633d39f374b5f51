"""Exception hierarchy.

Three failure categories map onto CLI exit codes: configuration problems
(exit 2), numerical failures (exit 3), and experiments that are infeasible
as requested (exit 4).
"""
from __future__ import annotations


class DriftlabError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(DriftlabError):
    """Invalid configuration, input data, or violated preconditions."""

    exit_code = 2


class NotStronglyConnectedError(ConfigError):
    """Rate network is not strongly connected on its positive-rate digraph."""

    def __init__(self, components: list[list[int]]):
        self.components = components
        parts = "; ".join("{" + ", ".join(map(str, c)) + "}" for c in components)
        super().__init__(
            f"rate network is not strongly connected: components {parts}"
        )


class TiltRangeError(ConfigError):
    """Requested divergence is outside the feasible range for the tilt family."""


class ConfinementError(ConfigError):
    """Drift points outward at the manifold boundary."""


class StabilityError(ConfigError):
    """Time step too large for the drift magnitude and grid resolution."""


class NumericalError(DriftlabError):
    """Numerical failure during an otherwise valid computation."""

    exit_code = 3


class DivergenceError(NumericalError):
    """Trajectory left the representable domain (non-finite or unboundable)."""

    def __init__(self, chain: int, step: int, detail: str = "non-finite state"):
        self.chain = chain
        self.step = step
        super().__init__(f"chain {chain} diverged at step {step}: {detail}")


class CollinearRegressorsError(NumericalError):
    """Gradient regressors are numerically collinear (ill-conditioned Gram)."""

    def __init__(self, condition: float):
        self.condition = condition
        super().__init__(
            f"gradient regressors are collinear: Gram condition {condition:.3e} "
            "exceeds 1e12"
        )


class AmbiguousThresholdError(NumericalError):
    """Threshold scan produced a non-monotone pass pattern."""

    def __init__(self, trace: list[tuple[float, bool]]):
        self.trace = trace
        shown = ", ".join(f"{k:.4g}:{'pass' if ok else 'fail'}" for k, ok in trace)
        super().__init__(f"non-monotone pass pattern in threshold scan: [{shown}]")


class InfeasibleError(DriftlabError):
    """Experiment cannot produce a meaningful answer as configured."""

    exit_code = 4


class DegenerateInstanceError(InfeasibleError):
    """No detector in the family works even without corruption."""


class CensoringError(InfeasibleError):
    """Too many scan points censored to fit a scaling law."""


class DegenerateFieldWarning(UserWarning):
    """A reconstructed field has too little usable support."""
