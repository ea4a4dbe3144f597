"""Shared fixtures: tiny hand-checkable systems for solver and metric tests."""

from __future__ import annotations

import numpy as np
import pytest

from rdsentropy.driving import SymbolLaw
from rdsentropy.rds import CocycleMap, FiberModel
from rdsentropy.systems import ModelSystem


def circle_distance(P, Q):
    d = np.abs(np.asarray(P)[..., 0] - np.asarray(Q)[..., 0]) % 1.0
    return np.minimum(d, 1.0 - d)


class FloatCircleCocycle(CocycleMap):
    """x -> multiplier**s * x mod 1 on real circle points (test double)."""

    domain = "monoid"

    def __init__(self, multiplier):
        self.multiplier = multiplier

    def apply(self, g, omega, points):
        s = g[0]
        if s < 0:
            raise ValueError("forward steps only")
        return (np.asarray(points) * float(self.multiplier) ** s) % 1.0


class FloatCircleSystem(ModelSystem):
    """Explicit circle points with real doubling dynamics; for examples
    whose coordinates are not dyadic (0.1, 0.3, ...)."""

    def __init__(self, points, multiplier=2):
        self.name = f"float-circle(x{multiplier})"
        self.driving_law = SymbolLaw.point_mass(0)
        self.metric = circle_distance
        self.cocycle = FloatCircleCocycle(multiplier)
        self._points = np.asarray(points, dtype=float).reshape(-1, 1)
        self._fiber_cache = None

    @property
    def fiber_size(self):
        return self._points.shape[0]

    def _build_fiber(self):
        return FiberModel(points=self._points, metric=self.metric, label=self.name)

    @property
    def resolution(self):
        pts = self._points
        d = circle_distance(pts[:, None, :], pts[None, :, :])
        off = d[~np.eye(len(pts), dtype=bool)]
        return float(off.min()) if off.size else 1.0

    def canonical_partitions(self):
        return ()


class DiscreteMetricSystem(ModelSystem):
    """k labeled points, distance 1 between distinct points, static dynamics."""

    def __init__(self, k):
        self.name = f"discrete({k})"
        self.k = k
        self.driving_law = SymbolLaw.point_mass(0)
        self.metric = lambda P, Q: (
            np.asarray(P)[..., 0] != np.asarray(Q)[..., 0]
        ).astype(float)
        self.cocycle = _IdentityCocycle()
        self._fiber_cache = None

    @property
    def fiber_size(self):
        return self.k

    def _build_fiber(self):
        pts = np.arange(self.k, dtype=np.int64).reshape(-1, 1)
        return FiberModel(points=pts, metric=self.metric, label=self.name)

    @property
    def resolution(self):
        return 1.0

    def canonical_partitions(self):
        return ()


class _IdentityCocycle(CocycleMap):
    domain = "group"

    def apply(self, g, omega, points):
        return np.asarray(points)


@pytest.fixture
def quarter_circle():
    return FloatCircleSystem([0.0, 0.3, 0.6, 0.9])


@pytest.fixture
def discrete6():
    return DiscreteMetricSystem(6)
