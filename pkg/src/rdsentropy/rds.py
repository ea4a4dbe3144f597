"""Fibers, cocycle maps, skew product steps and the windowed orbit metric.

A fiber is a finite metric model of the state space attached to one
environment: an array of point descriptors (one row per point, rows in
lexicographic order) plus a vectorized distance function. Cocycle maps
transform whole descriptor arrays at once. All model systems work in
integer arithmetic, so the identity and composition laws hold exactly,
not merely to rounding.

The windowed orbit metric ("Bowen distance") over a window F is

    d_F(x, y) = max over s in F of d(T_s x, T_s y)

where T_s is the cocycle map at s. It refines the base metric whenever
the identity element belongs to F.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .driving import EnvironmentPath, shift_environment
from .errors import CocycleDomainError
from .groups import FolnerWindow, GroupElement, compose


@dataclass(frozen=True)
class FiberModel:
    """Finite metric model of one fiber.

    ``points`` has one descriptor per row; ``metric`` maps two
    broadcast-compatible descriptor arrays to their distances.
    """

    points: np.ndarray
    metric: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = ""

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def point(self, i: int) -> np.ndarray:
        return self.points[i]

    def distance(self, x, y) -> float:
        x = np.asarray(x).reshape(1, -1)
        y = np.asarray(y).reshape(1, -1)
        return float(self.metric(x, y)[0])

    def pairwise(self, ids=None) -> np.ndarray:
        pts = self.points if ids is None else self.points[np.asarray(ids)]
        return np.asarray(self.metric(pts[:, None, :], pts[None, :, :]), dtype=float)


class CocycleMap:
    """Family of fiber maps indexed by group elements.

    ``domain`` is "group" when negative elements are supported and
    "monoid" when only the forward sub-monoid is defined (non-invertible
    maps). Applying an out-of-domain element raises; there is no silent
    wraparound.
    """

    domain: str = "group"

    def supports(self, g: GroupElement) -> bool:
        if self.domain == "group":
            return True
        return all(c >= 0 for c in g)

    def apply(self, g: GroupElement, omega: EnvironmentPath, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def apply_cocycle(system, g: GroupElement, omega: EnvironmentPath, points: np.ndarray) -> np.ndarray:
    """Evaluate the system's cocycle at g, checking the declared domain."""
    cocycle = system.cocycle
    if not cocycle.supports(g):
        raise CocycleDomainError(
            f"element {g} outside the declared {cocycle.domain} domain of {system.name}"
        )
    return cocycle.apply(g, omega, np.asarray(points))


def skew_step(system, g: GroupElement, omega: EnvironmentPath, points: np.ndarray):
    """One step of the skew product: (omega, x) -> (g omega, T_g x)."""
    return shift_environment(g, omega), apply_cocycle(system, g, omega, points)


def window_orbits(system, omega: EnvironmentPath, window: FolnerWindow, points: np.ndarray):
    """Transformed copies of ``points`` for every window element, in window order."""
    return [apply_cocycle(system, s, omega, points) for s in window]


def bowen_distance(system, omega: EnvironmentPath, window: FolnerWindow, x, y) -> float:
    x = np.asarray(x).reshape(1, -1)
    y = np.asarray(y).reshape(1, -1)
    metric = system.metric
    best = 0.0
    for s in window:
        xs = apply_cocycle(system, s, omega, x)
        ys = apply_cocycle(system, s, omega, y)
        best = max(best, float(metric(xs, ys)[0]))
    return best


def cocycle_audit(system, omega: EnvironmentPath, g1: GroupElement, g2: GroupElement, x) -> bool:
    """Check T_{g2, g1 omega} . T_{g1, omega} == T_{g2 g1, omega} at the point x."""
    x = np.asarray(x).reshape(1, -1)
    step = apply_cocycle(system, g2, shift_environment(g1, omega), apply_cocycle(system, g1, omega, x))
    direct = apply_cocycle(system, compose(g2, g1), omega, x)
    return bool(np.array_equal(step, direct))
