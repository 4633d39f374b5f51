"""Drift vector fields as sums of closed-form terms.

Each term family has a vectorized numpy evaluation here (the reference
implementation, also used for cell-center evaluation and validation) and a
matching scalar evaluation in the compiled kernel. Terms are encoded into
flat arrays so both backends consume the same description.

Families:
    linear        b(x) = A x + c
    poly_axis     separable polynomial potential, V = sum_k poly(x_k), deg <= 4
    gauss_wells   truncated Gaussian potential wells (depth > 0 attracts)
    solenoid      divergence-free rotation in one coordinate plane
    replicator    simplex dynamics b_i = x_i ((K x)_i - x.K.x)
    feedback_tanh saturating self-referential coupling -kappa tanh(G (P x))
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..errors import ConfigError, ConfinementError
from .manifold import BOX, SIMPLEX, ManifoldSpec

KIND_LINEAR = 0
KIND_POLY_AXIS = 1
KIND_GAUSS_WELLS = 2
KIND_SOLENOID = 3
KIND_REPLICATOR = 4
KIND_FEEDBACK_TANH = 5


@dataclass(frozen=True)
class LinearTerm:
    matrix: np.ndarray
    offset: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigError("linear term matrix must be square")
        object.__setattr__(self, "matrix", m)
        off = self.offset
        off = np.zeros(m.shape[0]) if off is None else np.asarray(off, dtype=float)
        if off.shape != (m.shape[0],):
            raise ConfigError("linear term offset has wrong length")
        object.__setattr__(self, "offset", off)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class PolyAxisTerm:
    """Potential sum_k (c1 x + c2 x^2 + c3 x^3 + c4 x^4) per axis; b = -V'."""

    coeffs: np.ndarray  # (dim, 4): columns are c1..c4

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if c.shape[1] != 4:
            raise ConfigError("poly_axis coeffs must have 4 columns (c1..c4)")
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class GaussWellsTerm:
    """Wells V -= depth * (exp(-r^2 / 2 w^2) - exp(-R^2 / 2 w^2)) for r < R.

    Positive depth lowers the potential (attractive); the constant offset
    keeps V continuous at the truncation radius R.
    """

    centers: np.ndarray  # (m, dim)
    widths: np.ndarray  # (m,)
    depths: np.ndarray  # (m,)
    cutoffs: np.ndarray = None  # type: ignore[assignment]  # (m,), default 3w

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        w = np.atleast_1d(np.asarray(self.widths, dtype=float))
        d = np.atleast_1d(np.asarray(self.depths, dtype=float))
        if not (c.shape[0] == w.size == d.size):
            raise ConfigError("gauss_wells arrays disagree on the well count")
        if np.any(w <= 0):
            raise ConfigError("well widths must be positive")
        cut = self.cutoffs
        cut = 3.0 * w if cut is None else np.atleast_1d(np.asarray(cut, dtype=float))
        if np.any(cut <= 0):
            raise ConfigError("well cutoffs must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)
        object.__setattr__(self, "depths", d)
        object.__setattr__(self, "cutoffs", cut)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class SolenoidTerm:
    """b_i = omega (x_j - c_j), b_j = -omega (x_i - c_i) in plane (i, j)."""

    omega: float
    center: np.ndarray
    axes: tuple[int, int] = (0, 1)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        i, j = self.axes
        if i == j or min(i, j) < 0 or max(i, j) >= c.size:
            raise ConfigError(f"solenoid axes {self.axes} invalid for dim {c.size}")

    @property
    def dim(self) -> int:
        return self.center.size


@dataclass(frozen=True)
class ReplicatorTerm:
    """Simplex flow b_i = x_i ((K x)_i - x.K.x); tangent by construction."""

    payoff: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.payoff, dtype=float)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise ConfigError("replicator payoff matrix must be square")
        object.__setattr__(self, "payoff", k)

    @property
    def dim(self) -> int:
        return self.payoff.shape[0]


@dataclass(frozen=True)
class FeedbackTanhTerm:
    """Self-referential drift -kappa * tanh(G (P x)), componentwise tanh."""

    kappa: float
    gain: np.ndarray  # (dim, m)
    proj: np.ndarray  # (m, dim)

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.gain, dtype=float))
        p = np.atleast_2d(np.asarray(self.proj, dtype=float))
        if g.shape[1] != p.shape[0] or g.shape[0] != p.shape[1]:
            raise ConfigError(
                f"feedback shapes mismatch: gain {g.shape}, proj {p.shape}"
            )
        object.__setattr__(self, "gain", g)
        object.__setattr__(self, "proj", p)

    @property
    def dim(self) -> int:
        return self.gain.shape[0]


Term = Union[
    LinearTerm, PolyAxisTerm, GaussWellsTerm, SolenoidTerm, ReplicatorTerm,
    FeedbackTanhTerm,
]

_TERM_KINDS = {
    LinearTerm: KIND_LINEAR,
    PolyAxisTerm: KIND_POLY_AXIS,
    GaussWellsTerm: KIND_GAUSS_WELLS,
    SolenoidTerm: KIND_SOLENOID,
    ReplicatorTerm: KIND_REPLICATOR,
    FeedbackTanhTerm: KIND_FEEDBACK_TANH,
}


@dataclass(frozen=True)
class DriftSpec:
    dim: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        for t in self.terms:
            if t.dim != self.dim:
                raise ConfigError(
                    f"term {type(t).__name__} has dim {t.dim}, drift has {self.dim}"
                )

    def with_term(self, term: Term) -> "DriftSpec":
        return DriftSpec(dim=self.dim, terms=self.terms + (term,))


def drift(dim: int, *terms: Term) -> DriftSpec:
    return DriftSpec(dim=int(dim), terms=tuple(terms))


def eval_drift(spec: DriftSpec, x: np.ndarray) -> np.ndarray:
    """Vectorized drift evaluation; x is (..., dim)."""
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    pts = np.atleast_2d(x)
    b = np.zeros_like(pts)
    for term in spec.terms:
        if isinstance(term, LinearTerm):
            b += pts @ term.matrix.T + term.offset
        elif isinstance(term, PolyAxisTerm):
            c = term.coeffs
            b -= (
                c[:, 0]
                + 2.0 * c[:, 1] * pts
                + 3.0 * c[:, 2] * pts**2
                + 4.0 * c[:, 3] * pts**3
            )
        elif isinstance(term, GaussWellsTerm):
            for k in range(term.centers.shape[0]):
                delta = pts - term.centers[k]
                r2 = (delta**2).sum(axis=1)
                w2 = term.widths[k] ** 2
                inside = r2 < term.cutoffs[k] ** 2
                bump = np.where(inside, np.exp(-r2 / (2.0 * w2)), 0.0)
                b -= (term.depths[k] / w2) * delta * bump[:, None]
        elif isinstance(term, SolenoidTerm):
            i, j = term.axes
            b[:, i] += term.omega * (pts[:, j] - term.center[j])
            b[:, j] -= term.omega * (pts[:, i] - term.center[i])
        elif isinstance(term, ReplicatorTerm):
            kx = pts @ term.payoff.T
            quad = (pts * kx).sum(axis=1, keepdims=True)
            b += pts * (kx - quad)
        elif isinstance(term, FeedbackTanhTerm):
            y = pts @ term.proj.T
            b -= term.kappa * np.tanh(y @ term.gain.T)
        else:  # pragma: no cover
            raise ConfigError(f"unknown drift term {type(term).__name__}")
    return b[0] if squeeze else b


def eval_potential(spec: DriftSpec, x: np.ndarray) -> np.ndarray:
    """Potential of the gradient terms (poly_axis and gauss_wells only).

    Raises if the spec contains non-gradient terms, so callers cannot
    silently treat a driven system as an equilibrium one.
    """
    x = np.asarray(x, dtype=float)
    pts = np.atleast_2d(x)
    v = np.zeros(pts.shape[0])
    for term in spec.terms:
        if isinstance(term, PolyAxisTerm):
            c = term.coeffs
            v += (
                c[:, 0] * pts + c[:, 1] * pts**2 + c[:, 2] * pts**3 + c[:, 3] * pts**4
            ).sum(axis=1)
        elif isinstance(term, GaussWellsTerm):
            for k in range(term.centers.shape[0]):
                delta = pts - term.centers[k]
                r2 = (delta**2).sum(axis=1)
                w2 = term.widths[k] ** 2
                edge = np.exp(-term.cutoffs[k] ** 2 / (2.0 * w2))
                inside = r2 < term.cutoffs[k] ** 2
                v -= term.depths[k] * np.where(
                    inside, np.exp(-r2 / (2.0 * w2)) - edge, 0.0
                )
        else:
            raise ConfigError(
                f"{type(term).__name__} has no scalar potential; "
                "eval_potential only applies to gradient drifts"
            )
    return v[0] if x.ndim == 1 else v


@dataclass(frozen=True)
class DriftEncoding:
    """Flat-array form of a DriftSpec shared by both integrator backends."""

    dim: int
    kinds: np.ndarray  # int32 (n_terms,)
    meta: np.ndarray  # int32 (n_terms, 2)
    offsets: np.ndarray  # int64 (n_terms + 1,)
    data: np.ndarray  # float64 flat
    scratch: int = field(default=0)  # floats of per-point workspace needed


def encode_drift(spec: DriftSpec) -> DriftEncoding:
    kinds: list[int] = []
    meta: list[tuple[int, int]] = []
    chunks: list[np.ndarray] = []
    scratch = 0
    d = spec.dim
    for term in spec.terms:
        kinds.append(_TERM_KINDS[type(term)])
        if isinstance(term, LinearTerm):
            meta.append((0, 0))
            chunks.append(np.concatenate([term.matrix.ravel(), term.offset]))
        elif isinstance(term, PolyAxisTerm):
            meta.append((0, 0))
            chunks.append(term.coeffs.ravel())
        elif isinstance(term, GaussWellsTerm):
            m = term.centers.shape[0]
            meta.append((m, 0))
            per = np.column_stack(
                [term.centers, term.widths, term.depths, term.cutoffs]
            )
            chunks.append(per.ravel())
        elif isinstance(term, SolenoidTerm):
            meta.append(term.axes)
            chunks.append(np.concatenate([[term.omega], term.center]))
        elif isinstance(term, ReplicatorTerm):
            meta.append((0, 0))
            chunks.append(term.payoff.ravel())
            scratch = max(scratch, d)
        elif isinstance(term, FeedbackTanhTerm):
            m = term.gain.shape[1]
            meta.append((m, 0))
            chunks.append(
                np.concatenate([[term.kappa], term.gain.ravel(), term.proj.ravel()])
            )
            scratch = max(scratch, m)
    offsets = np.zeros(len(kinds) + 1, dtype=np.int64)
    for i, chunk in enumerate(chunks):
        offsets[i + 1] = offsets[i] + chunk.size
    data = (
        np.concatenate(chunks) if chunks else np.zeros(0)
    ).astype(np.float64, copy=False)
    return DriftEncoding(
        dim=d,
        kinds=np.asarray(kinds, dtype=np.int32),
        meta=np.asarray(meta, dtype=np.int32).reshape(len(kinds), 2),
        offsets=offsets,
        data=np.ascontiguousarray(data),
        scratch=scratch,
    )


def check_confinement(
    manifold: ManifoldSpec,
    spec: DriftSpec,
    n_per_face: int = 256,
    tol: float = 1e-9,
    seed: int = 0,
) -> float:
    """Verify the drift does not point outward on the box boundary.

    Samples points on every face (plus corners) and checks the inward
    normal component of the drift. Returns the worst inward component;
    raises ConfinementError if any sampled point has drift pointing out.
    Simplex drifts are tangent-projected during integration, so only box
    manifolds are checked.
    """
    if manifold.kind != BOX:
        return float("inf")
    if spec.dim != manifold.dim:
        raise ConfigError(
            f"drift dim {spec.dim} does not match manifold dim {manifold.dim}"
        )
    rng = np.random.default_rng(seed)
    worst = float("inf")
    d = manifold.dim
    for axis in range(d):
        for side, bound, normal in ((0, manifold.lo[axis], 1.0),
                                    (1, manifold.hi[axis], -1.0)):
            pts = manifold.lo + rng.random((n_per_face, d)) * (
                manifold.hi - manifold.lo
            )
            # include extreme corners along the other axes
            corners = np.stack(
                [manifold.lo.copy(), manifold.hi.copy()]
            )
            pts = np.vstack([pts, corners])
            pts[:, axis] = bound
            inward = normal * eval_drift(spec, pts)[:, axis]
            low = float(inward.min())
            worst = min(worst, low)
            if low < -tol:
                k = int(np.argmin(inward))
                raise ConfinementError(
                    f"drift points outward at face x[{axis}]="
                    f"{'lo' if side == 0 else 'hi'} (inward component {low:.3e} "
                    f"at {pts[k].round(4).tolist()})"
                )
    return worst
