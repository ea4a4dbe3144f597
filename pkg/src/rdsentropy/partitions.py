"""Finite partitions of a fiber and empirical measures on it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .rds import FiberModel


class PartitionSpec:
    """A labeled partition given by a point classifier.

    ``classify`` maps a descriptor array (rows are points, possibly the
    images of fiber points under a cocycle map) to cell indices.
    ``declared_diameter`` bounds every cell's internal base-metric
    diameter; None means unbounded. ``generating`` marks partitions whose
    iterated joins separate points, so their fiber entropy attains the
    supremum.
    """

    def __init__(self, name, labels, classify, declared_diameter=None, generating=False,
                 analytic_tag=None):
        self.name = name
        self.labels = tuple(labels)
        self._classify = classify
        self.declared_diameter = declared_diameter
        self.generating = bool(generating)
        self.analytic_tag = analytic_tag

    @property
    def n_cells(self) -> int:
        return len(self.labels)

    def classify(self, points: np.ndarray) -> np.ndarray:
        out = np.asarray(self._classify(np.asarray(points)), dtype=np.int64)
        if out.size and (out.min() < 0 or out.max() >= self.n_cells):
            raise ConfigError(f"partition {self.name!r} classified a point outside its cells")
        return out

    def assign(self, fiber: FiberModel) -> np.ndarray:
        return self.classify(fiber.points)

    def __repr__(self) -> str:
        return f"PartitionSpec({self.name!r}, cells={self.n_cells})"


class MaterializedPartition:
    """A partition stored as an explicit cell assignment of one fiber.

    Produced by joins; ``cell_itineraries`` records, per cell, the base
    cell visited at each window element (window order).
    """

    def __init__(self, name, assignment, n_cells, cell_itineraries=None, base_labels=None):
        self.name = name
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.n_cells = int(n_cells)
        self.cell_itineraries = cell_itineraries
        self.base_labels = base_labels

    @property
    def labels(self):
        if self.cell_itineraries is None:
            return tuple(range(self.n_cells))
        if self.base_labels is None:
            return tuple(tuple(row) for row in self.cell_itineraries)
        return tuple(
            tuple(self.base_labels[c] for c in row) for row in self.cell_itineraries
        )

    def assign(self, fiber: FiberModel) -> np.ndarray:
        if fiber is not None and fiber.size != self.assignment.shape[0]:
            raise ConfigError("materialized partition belongs to a different fiber")
        return self.assignment

    def __repr__(self) -> str:
        return f"MaterializedPartition({self.name!r}, cells={self.n_cells})"


def check_partition(fiber: FiberModel, partition) -> None:
    """Verify the two partition invariants exhaustively on a finite fiber.

    Every point must land in exactly one cell (total classification into
    range), and when a diameter is declared every cell's internal
    base-metric diameter must not exceed it.
    """
    assignment = partition.assign(fiber)
    if assignment.shape != (fiber.size,):
        raise ConfigError("partition assignment must cover the fiber exactly once")
    diameter = getattr(partition, "declared_diameter", None)
    if diameter is None:
        return
    for cell in range(int(assignment.max()) + 1 if assignment.size else 0):
        members = np.nonzero(assignment == cell)[0]
        if members.size < 2:
            continue
        pts = fiber.points[members]
        dists = fiber.metric(pts[:, None, :], pts[None, :, :])
        worst = float(np.max(dists))
        if worst > diameter + 1e-12:
            raise ConfigError(
                f"cell {cell} of {partition.name!r} has diameter {worst} > declared {diameter}"
            )


@dataclass(frozen=True)
class EmpiricalFiberMeasure:
    """Probability weights on fiber point ids (dense, sums to one)."""

    weights: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1:
            raise ConfigError("weights must be a vector over fiber point ids")
        if w.size and float(w.min()) < 0:
            raise ConfigError("weights must be nonnegative")
        total = math.fsum(w.tolist())
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"weights must sum to 1 within 1e-12, got {total!r}")

    @property
    def support(self) -> np.ndarray:
        return np.nonzero(self.weights > 0)[0]


def uniform_measure(size: int) -> EmpiricalFiberMeasure:
    return EmpiricalFiberMeasure(np.full(size, 1.0 / size))


def point_mass_measure(size: int, idx: int) -> EmpiricalFiberMeasure:
    w = np.zeros(size)
    w[idx] = 1.0
    return EmpiricalFiberMeasure(w)


# Classifier callables are plain classes (not closures) so partitions and
# the systems carrying them can cross process boundaries.


class ColumnClassifier:
    """Cell index = the value of one descriptor column."""

    def __init__(self, column: int = 0):
        self.column = column

    def __call__(self, points):
        return np.asarray(points)[..., self.column]


class ThresholdClassifier:
    """Cell 1 where one descriptor column is >= threshold, else cell 0."""

    def __init__(self, threshold: int, column: int = 0):
        self.threshold = threshold
        self.column = column

    def __call__(self, points):
        return (np.asarray(points)[..., self.column] >= self.threshold).astype(np.int64)


class ConstantClassifier:
    """Single-cell (trivial) partition."""

    def __call__(self, points):
        return np.zeros(np.asarray(points).shape[:-1], dtype=np.int64)


class ArcClassifier:
    """Circle grid split into consecutive arcs of ``arc_points`` grid points."""

    def __init__(self, arc_points: int, modulus: int):
        if not 1 <= arc_points <= modulus:
            raise ConfigError("arc_points must lie in [1, modulus]")
        self.arc_points = arc_points
        self.modulus = modulus

    def __call__(self, points):
        return (np.asarray(points)[..., 0] % self.modulus) // self.arc_points


class PatchClassifier:
    """Torus grid split into axis-aligned square patches of given side."""

    def __init__(self, side: int, modulus: int):
        if not 1 <= side <= modulus:
            raise ConfigError("patch side must lie in [1, modulus]")
        self.side = side
        self.modulus = modulus
        self.per_axis = -(-modulus // side)

    def __call__(self, points):
        pts = np.asarray(points) % self.modulus
        return (pts[..., 0] // self.side) * self.per_axis + pts[..., 1] // self.side
