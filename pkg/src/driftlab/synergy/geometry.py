"""Perturbation wells and target regions.

A well is a truncated Gaussian dip added to the base potential; its
support ball makes disjointness checkable geometrically. Targets are
balls or boxes whose stationary mass the experiments track.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..fields import DriftSpec, GaussWellsTerm
from ..fields.manifold import BOX, ManifoldSpec

SUPPORT_WIDTHS = 3.0  # default truncation radius in units of the width

REGION_BOX = "box"
REGION_BALL = "ball"


@dataclass(frozen=True)
class PerturbationWell:
    center: np.ndarray
    width: float
    depth: float
    support_radius: float = None  # type: ignore[assignment]

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        if self.width <= 0:
            raise ConfigError("well width must be positive")
        if self.depth <= 0:
            raise ConfigError("well depth must be positive")
        r = self.support_radius
        r = SUPPORT_WIDTHS * self.width if r is None else float(r)
        if r < self.width:
            raise ConfigError(
                "support radius must be at least the well width"
            )
        object.__setattr__(self, "support_radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def term(self) -> GaussWellsTerm:
        return GaussWellsTerm(
            centers=self.center[None, :],
            widths=[self.width],
            depths=[self.depth],
            cutoffs=[self.support_radius],
        )


def disjoint_supports(a: PerturbationWell, b: PerturbationWell) -> bool:
    gap = float(np.linalg.norm(a.center - b.center))
    return gap > a.support_radius + b.support_radius


def apply_wells(spec: DriftSpec, *wells: PerturbationWell) -> DriftSpec:
    for well in wells:
        spec = spec.with_term(well.term())
    return spec


@dataclass(frozen=True)
class TargetRegion:
    kind: str
    lo: np.ndarray = None  # type: ignore[assignment]  # box corners
    hi: np.ndarray = None  # type: ignore[assignment]
    center: np.ndarray = None  # type: ignore[assignment]  # ball
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == REGION_BOX:
            lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
            hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
            if lo.shape != hi.shape or np.any(lo >= hi):
                raise ConfigError("target box needs lo < hi per axis")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == REGION_BALL:
            c = np.atleast_1d(np.asarray(self.center, dtype=float))
            if self.radius <= 0:
                raise ConfigError("target ball needs a positive radius")
            object.__setattr__(self, "center", c)
        else:
            raise ConfigError(
                f"unknown target region kind {self.kind!r}; "
                f"expected {REGION_BOX!r} or {REGION_BALL!r}"
            )

    @property
    def dim(self) -> int:
        return self.lo.size if self.kind == REGION_BOX else self.center.size

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == REGION_BOX:
            return self.lo, self.hi
        return self.center - self.radius, self.center + self.radius

    def indicator(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise ConfigError(
                f"points have dim {points.shape[1]}, region has {self.dim}"
            )
        if self.kind == REGION_BOX:
            return np.all((points >= self.lo) & (points <= self.hi), axis=1)
        d2 = ((points - self.center) ** 2).sum(axis=1)
        return d2 <= self.radius**2

    def distance_to(self, point: np.ndarray) -> float:
        """Euclidean distance from a point to the region."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        if self.kind == REGION_BALL:
            return max(0.0, float(np.linalg.norm(point - self.center)) - self.radius)
        gap = np.maximum(self.lo - point, 0.0) + np.maximum(point - self.hi, 0.0)
        return float(np.linalg.norm(gap))


def target_box(lo, hi) -> TargetRegion:
    return TargetRegion(kind=REGION_BOX, lo=lo, hi=hi)


def target_ball(center, radius: float) -> TargetRegion:
    return TargetRegion(kind=REGION_BALL, center=center, radius=radius)


def check_region_inside(region: TargetRegion, manifold: ManifoldSpec) -> None:
    lo, hi = region.bounds()
    if region.dim != manifold.dim:
        raise ConfigError(
            f"target region dim {region.dim} does not match manifold "
            f"dim {manifold.dim}"
        )
    mlo, mhi = (manifold.lo, manifold.hi) if manifold.kind == BOX else (
        np.zeros(manifold.dim), np.ones(manifold.dim)
    )
    if np.any(lo < mlo - 1e-12) or np.any(hi > mhi + 1e-12):
        raise ConfigError(
            f"target region [{lo.round(4).tolist()}, {hi.round(4).tolist()}] "
            "extends outside the manifold"
        )


def touches_support(region: TargetRegion, well: PerturbationWell) -> bool:
    return region.distance_to(well.center) <= well.support_radius
