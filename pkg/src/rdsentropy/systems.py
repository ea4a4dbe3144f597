"""Model systems with exactly known entropy.

Each system bundles a driving law, a finite exact-arithmetic fiber, a
cocycle in integer arithmetic, its invariant fiber measure, canonical
partitions, and a closed-form entropy oracle with a derivation note.

The zoo:

* ``make_full_shift(k, m, n_max)`` -- the two-sided full shift on k
  symbols over a trivial driving system. The fiber is the set of
  periodic sequences of period L = n_max + 2m - 2, stored as cyclic
  words, on which the shift acts as an exact rotation (a genuine Z
  action). For the cylinder metric d(x, y) = 2**-min{|i|: x_i != y_i},
  two period-L words are separated over the box window [0, n) at scale
  2**-m exactly when they differ somewhere on the determining arc of
  n + 2m - 2 consecutive residues, so

      Sep([0, n), 2**-m) = k ** (n + 2m - 2)        for n <= n_max.

  The word fiber realizes that count verbatim, which gives this system
  closed-form counting shortcuts, cross-checked against the generic
  solvers on small instances. Oracle: log k.

* ``make_random_expansion(multiplier_law, grid_exponent)`` -- the random
  circle expansion x -> m(omega_0) x mod 1 on the dyadic grid Z/2**Q,
  driven by an i.i.d. multiplier field. Forward monoid only. The fiber
  measure is the uniform grid measure (the exact Lebesgue
  discretization); each multiplier pushes it to the uniform measure on
  its image sublattice, and joined-partition entropies under it match
  the continuum values exactly on dyadic-boundary partitions. Oracle:
  E[log m]. A point mass on 2 is the deterministic doubling map.

* ``make_toral_automorphism(matrix, grid_exponent)`` -- a unimodular
  integer matrix acting on the grid (Z/2**Q)**2, an invertible Z action
  with exact modular inverses. Oracle: log(spectral radius).

Grid fibers enumerate points in lexicographic order, so conflict
relations of the windowed metric are translation invariant and the
systems expose difference-offset tables for the sieve form of the greedy
solver.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import numpy as np

from .driving import EnvironmentPath, SymbolLaw, sample_environment
from .errors import CocycleDomainError, ConfigError, ResourceCapError
from .groups import FolnerWindow
from .partitions import (
    ArcClassifier,
    ColumnClassifier,
    ConstantClassifier,
    EmpiricalFiberMeasure,
    PartitionSpec,
    PatchClassifier,
    ThresholdClassifier,
    uniform_measure,
)
from .rds import CocycleMap, FiberModel

DEFAULT_FIBER_CAP = 1 << 20


class CircleGridMetric:
    """Arc-length distance on the dyadic circle grid Z/modulus, values in [0, 1/2]."""

    def __init__(self, modulus: int):
        self.modulus = modulus

    def __call__(self, P, Q):
        d = (np.asarray(P)[..., 0] - np.asarray(Q)[..., 0]) % self.modulus
        d = np.minimum(d, self.modulus - d)
        return d / float(self.modulus)


class TorusGridMetric:
    """Sup metric over coordinate-wise circle distances on (Z/modulus)**2."""

    def __init__(self, modulus: int):
        self.modulus = modulus

    def __call__(self, P, Q):
        d = (np.asarray(P) - np.asarray(Q)) % self.modulus
        d = np.minimum(d, self.modulus - d)
        return d.max(axis=-1) / float(self.modulus)


class CyclicWordMetric:
    """d(x, y) = 2**-r with r the cyclic distance from 0 to the nearest
    residue where the period-L words differ; 0 for equal words."""

    def __init__(self, period: int):
        self.period = period
        j = np.arange(period)
        self._ring = np.minimum(j, period - j)

    def __call__(self, P, Q):
        diff = np.asarray(P) != np.asarray(Q)
        marked = np.where(diff, self._ring, self.period + 1)
        r = marked.min(axis=-1)
        return np.where(r <= self.period, np.ldexp(1.0, -r), 0.0)


class RotationCocycle(CocycleMap):
    """Cyclic shift on period-L words; an exact Z action independent of omega."""

    domain = "group"

    def __init__(self, period: int):
        self.period = period

    def apply(self, g, omega, points):
        s = g[0] % self.period
        return np.roll(np.asarray(points), -s, axis=1)


class ExpansionCocycle(CocycleMap):
    """x -> (product of the first s multipliers read from omega) * x mod N."""

    domain = "monoid"

    def __init__(self, modulus: int):
        self.modulus = modulus

    def multiplier(self, omega: EnvironmentPath, steps: int) -> int:
        m = 1
        for i in range(steps):
            m = (m * omega.symbol_at((i,))) % self.modulus
        return m

    def apply(self, g, omega, points):
        s = g[0]
        if s < 0:
            raise CocycleDomainError("random expansion supports forward steps only")
        return (np.asarray(points) * self.multiplier(omega, s)) % self.modulus


class ToralCocycle(CocycleMap):
    """Row vectors times the s-th matrix power, mod N; negative s uses the
    exact integer inverse (the matrix is unimodular)."""

    domain = "group"

    def __init__(self, matrix: np.ndarray, modulus: int):
        self.modulus = modulus
        self.matrix = np.asarray(matrix, dtype=np.int64) % modulus
        a, b, c, d = (int(x) for x in np.asarray(matrix, dtype=np.int64).ravel())
        det = a * d - b * c
        inv = np.array([[d, -b], [-c, a]], dtype=np.int64) * det
        self.inverse = inv % modulus

    def power(self, s: int) -> np.ndarray:
        base = self.matrix if s >= 0 else self.inverse
        out = np.eye(2, dtype=np.int64)
        for _ in range(abs(s)):
            out = (out @ base) % self.modulus
        return out

    def apply(self, g, omega, points):
        P = self.power(g[0])
        return (np.asarray(points) @ P.T) % self.modulus


class ModelSystem:
    """Base class: driving law plus fiber geometry plus cocycle.

    Fibers are independent of omega up to relabeling, so they are built
    once and cached. ``fiber_size`` is always available even when the
    fiber itself is too large to materialize; systems that cannot
    materialize may declare closed-form counting shortcuts instead
    (``log_sep_exact``, ``joined_entropy_exact``).
    """

    name: str = ""
    group_dim: int = 1
    driving_law: SymbolLaw
    cocycle: CocycleMap
    metric = None
    oracle_value: float = 0.0
    oracle_note: str = ""
    greedy_attains_max: bool = False

    _fiber_cache: FiberModel | None = None

    # -- driving ---------------------------------------------------------

    def sample_environment(self, master_seed: int, sample_index: int) -> EnvironmentPath:
        return sample_environment(master_seed, sample_index, self.driving_law, self.group_dim)

    # -- fiber -----------------------------------------------------------

    @property
    def fiber_size(self) -> int:
        raise NotImplementedError

    def _build_fiber(self) -> FiberModel:
        raise NotImplementedError

    def fiber(self, omega=None, cap: int = DEFAULT_FIBER_CAP) -> FiberModel:
        if self.fiber_size > cap:
            raise ResourceCapError(
                f"fiber of {self.name} has {self.fiber_size} points, above the cap {cap}"
            )
        if self._fiber_cache is None:
            self._fiber_cache = self._build_fiber()
        return self._fiber_cache

    def sample_points(self, omega, count: int, seed: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def resolution(self) -> float:
        """Smallest positive base distance; the scale guard compares eps to it."""
        raise NotImplementedError

    def point_ids(self, fiber: FiberModel, points: np.ndarray) -> np.ndarray:
        """Row indices of the given descriptors in the fiber (generic lookup)."""
        index = {tuple(int(c) for c in row): i for i, row in enumerate(fiber.points)}
        return np.asarray([index[tuple(int(c) for c in row)] for row in np.asarray(points)])

    # -- measures and partitions -----------------------------------------

    def invariant_measure(self, omega, fiber: FiberModel) -> EmpiricalFiberMeasure:
        return uniform_measure(fiber.size)

    def canonical_partitions(self) -> tuple[PartitionSpec, ...]:
        raise NotImplementedError

    def partition(self, name: str) -> PartitionSpec:
        for p in self.canonical_partitions():
            if p.name == name:
                return p
        known = ", ".join(p.name for p in self.canonical_partitions())
        raise ConfigError(f"unknown partition {name!r} for {self.name}; known: {known}")

    # -- optional closed-form shortcuts ------------------------------------

    def conflict_offsets(self, omega, window: FolnerWindow, eps: float):
        """(offsets, grid shape) when the conflict relation is translation
        invariant in lexicographic fiber order; None otherwise."""
        return None

    def log_sep_exact(self, omega, window: FolnerWindow, eps: float):
        return None

    def joined_entropy_exact(self, omega, window: FolnerWindow, partition) -> float | None:
        return None


def _scale_exponent(eps: float) -> int:
    """Number of integers r >= 0 with 2**-r > eps (so coordinates within
    distance m_eff - 1 of a window element decide separation)."""
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    m_eff = 0
    while np.ldexp(1.0, -m_eff) > eps:
        m_eff += 1
    return m_eff


class FullShiftSystem(ModelSystem):
    def __init__(self, k: int, m: int, n_max: int):
        if k < 2:
            raise ConfigError(f"alphabet size k must be >= 2, got {k}")
        if m < 1:
            raise ConfigError(f"resolution exponent m must be >= 1, got {m}")
        if n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {n_max}")
        self.k = k
        self.m = m
        self.n_max = n_max
        self.period = max(1, n_max + 2 * m - 2)
        # CSV rows join fields with commas, so names must stay comma-free.
        self.name = f"full-shift(k={k};m={m};n_max={n_max})"
        self.driving_law = SymbolLaw.point_mass(0)
        self.metric = CyclicWordMetric(self.period)
        self.cocycle = RotationCocycle(self.period)
        self.oracle_value = math.log(k)
        self.oracle_note = f"full shift on {k} symbols: log {k}"
        self.greedy_attains_max = True
        self._fiber_cache = None

    @property
    def fiber_size(self) -> int:
        return self.k ** self.period

    def _build_fiber(self) -> FiberModel:
        words = np.array(list(product(range(self.k), repeat=self.period)), dtype=np.int64)
        return FiberModel(points=words, metric=self.metric, label=self.name)

    def sample_points(self, omega, count, seed):
        rng = np.random.default_rng(seed)
        return rng.integers(0, self.k, size=(count, self.period), dtype=np.int64)

    @property
    def resolution(self) -> float:
        # Word fibers count exactly at every scale: separation depends only
        # on which residues the determining arc covers, and every arc up to
        # the full period is represented verbatim. No grid spacing exists,
        # so no scale guard binds.
        return 0.0

    def canonical_partitions(self):
        symbol = PartitionSpec(
            name="symbol",
            labels=tuple(str(j) for j in range(self.k)),
            classify=ColumnClassifier(0),
            declared_diameter=0.5,
            generating=True,
            analytic_tag="symbol",
        )
        trivial = PartitionSpec(
            name="trivial",
            labels=("all",),
            classify=ConstantClassifier(),
            declared_diameter=None,
            generating=False,
            analytic_tag="trivial",
        )
        return (symbol, trivial)

    def _determining_residues(self, window: FolnerWindow, eps: float) -> int:
        m_eff = _scale_exponent(eps)
        residues = set()
        for s in window.scalars():
            for i in range(-(m_eff - 1), m_eff):
                residues.add((s + i) % self.period)
        return len(residues)

    def log_sep_exact(self, omega, window, eps):
        # Distinct words are separated exactly when they differ on the
        # determining residue set; the fiber realizes every assignment.
        return self._determining_residues(window, eps) * math.log(self.k)

    def joined_entropy_exact(self, omega, window, partition):
        tag = getattr(partition, "analytic_tag", None)
        if tag == "trivial":
            return 0.0
        if tag == "symbol":
            # Join of the time-zero symbol partition over the window refines
            # the fiber into equal-mass cylinders, one per visited residue.
            residues = {s % self.period for s in window.scalars()}
            return len(residues) * math.log(self.k)
        return None


class RandomExpansionSystem(ModelSystem):
    def __init__(self, multiplier_law, grid_exponent: int):
        pairs = sorted((int(s), Fraction(w)) for s, w in multiplier_law)
        if not pairs:
            raise ConfigError("multiplier law must not be empty")
        if any(s < 2 for s, _ in pairs):
            raise ConfigError("multipliers must be integers >= 2")
        if grid_exponent < 2:
            raise ConfigError(f"grid_exponent must be >= 2, got {grid_exponent}")
        self.grid_exponent = grid_exponent
        self.modulus = 1 << grid_exponent
        self.driving_law = SymbolLaw.from_weights(pairs)
        if len(pairs) == 1:
            desc = str(pairs[0][0])
        else:
            desc = ";".join(f"{s}:{w}" for s, w in zip(self.driving_law.symbols, self.driving_law.weights))
        self.name = f"random-expansion(m={{{desc}}};Q={grid_exponent})"
        self.metric = CircleGridMetric(self.modulus)
        self.cocycle = ExpansionCocycle(self.modulus)
        self.oracle_value = float(
            math.fsum(float(w) * math.log(s) for s, w in zip(self.driving_law.symbols, self.driving_law.weights))
        )
        self.oracle_note = "expected log multiplier: sum_m P(m) log m"
        self._fiber_cache = None

    @property
    def fiber_size(self) -> int:
        return self.modulus

    def _build_fiber(self) -> FiberModel:
        pts = np.arange(self.modulus, dtype=np.int64).reshape(-1, 1)
        return FiberModel(points=pts, metric=self.metric, label=self.name)

    def sample_points(self, omega, count, seed):
        rng = np.random.default_rng(seed)
        return rng.integers(0, self.modulus, size=(count, 1), dtype=np.int64)

    @property
    def resolution(self) -> float:
        return 1.0 / self.modulus

    def point_ids(self, fiber, points):
        return np.asarray(points)[:, 0] % self.modulus

    def canonical_partitions(self):
        half_circle = PartitionSpec(
            name="half",
            labels=("left", "right"),
            classify=ThresholdClassifier(self.modulus // 2),
            declared_diameter=0.5,
            generating=True,
        )
        trivial = PartitionSpec(
            name="trivial",
            labels=("all",),
            classify=ConstantClassifier(),
            declared_diameter=None,
        )
        return (half_circle, trivial)

    def conflict_offsets(self, omega, window, eps):
        N = self.modulus
        deltas = np.arange(N, dtype=np.int64)
        worst = np.zeros(N)
        for s in window.scalars():
            M = self.cocycle.multiplier(omega, s)
            v = (deltas * M) % N
            v = np.minimum(v, N - v)
            worst = np.maximum(worst, v / float(N))
        mask = (worst <= eps) & (deltas > 0)
        return deltas[mask].reshape(-1, 1), (N,)


class ToralAutomorphismSystem(ModelSystem):
    def __init__(self, matrix, grid_exponent: int):
        A = np.asarray(matrix, dtype=np.int64)
        if A.shape != (2, 2):
            raise ConfigError("matrix must be 2x2 integer")
        det = int(A[0, 0]) * int(A[1, 1]) - int(A[0, 1]) * int(A[1, 0])
        if det not in (1, -1):
            raise ConfigError(f"matrix must be unimodular (det +-1), got det {det}")
        if grid_exponent < 2:
            raise ConfigError(f"grid_exponent must be >= 2, got {grid_exponent}")
        self.grid_exponent = grid_exponent
        self.modulus = 1 << grid_exponent
        self.matrix = A
        flat = " ".join(str(int(x)) for x in A.ravel())
        self.name = f"toral-automorphism([{flat}];Q={grid_exponent})"
        self.driving_law = SymbolLaw.point_mass(0)
        self.metric = TorusGridMetric(self.modulus)
        self.cocycle = ToralCocycle(A, self.modulus)
        tr = int(A[0, 0]) + int(A[1, 1])
        disc = tr * tr - 4 * det
        if disc >= 0:
            r = max(abs(tr + math.sqrt(disc)), abs(tr - math.sqrt(disc))) / 2.0
        else:
            r = math.sqrt(det if det > 0 else -det)  # complex pair: |eig| = sqrt(|det|)
        self.oracle_value = math.log(max(r, 1.0))
        self.oracle_note = "log spectral radius of the matrix"
        self._fiber_cache = None

    @property
    def fiber_size(self) -> int:
        return self.modulus * self.modulus

    def _build_fiber(self) -> FiberModel:
        N = self.modulus
        a, b = np.divmod(np.arange(N * N, dtype=np.int64), N)
        pts = np.stack([a, b], axis=1)
        return FiberModel(points=pts, metric=self.metric, label=self.name)

    def sample_points(self, omega, count, seed):
        rng = np.random.default_rng(seed)
        return rng.integers(0, self.modulus, size=(count, 2), dtype=np.int64)

    @property
    def resolution(self) -> float:
        return 1.0 / self.modulus

    def point_ids(self, fiber, points):
        pts = np.asarray(points) % self.modulus
        return pts[:, 0] * self.modulus + pts[:, 1]

    def canonical_partitions(self):
        half_x = PartitionSpec(
            name="half-x",
            labels=("low", "high"),
            classify=ThresholdClassifier(self.modulus // 2, column=0),
            declared_diameter=0.5,
        )
        trivial = PartitionSpec(
            name="trivial",
            labels=("all",),
            classify=ConstantClassifier(),
            declared_diameter=None,
        )
        return (half_x, trivial)

    def conflict_offsets(self, omega, window, eps):
        N = self.modulus
        a, b = np.divmod(np.arange(N * N, dtype=np.int64), N)
        deltas = np.stack([a, b], axis=1)
        worst = np.zeros(N * N)
        for s in window.scalars():
            P = self.cocycle.power(s)
            v = (deltas @ P.T) % N
            v = np.minimum(v, N - v)
            worst = np.maximum(worst, v.max(axis=1) / float(N))
        mask = (worst <= eps) & ((a != 0) | (b != 0))
        return deltas[mask], (N, N)


def make_full_shift(k: int, m: int, n_max: int) -> FullShiftSystem:
    return FullShiftSystem(k, m, n_max)


def make_random_expansion(multiplier_law, grid_exponent: int) -> RandomExpansionSystem:
    """multiplier_law: iterable of (multiplier, weight) pairs."""
    return RandomExpansionSystem(multiplier_law, grid_exponent)


def make_doubling_map(grid_exponent: int) -> RandomExpansionSystem:
    return RandomExpansionSystem([(2, 1)], grid_exponent)


def make_toral_automorphism(matrix, grid_exponent: int) -> ToralAutomorphismSystem:
    return ToralAutomorphismSystem(matrix, grid_exponent)


def arc_partition(modulus: int, arc_points: int, name: str | None = None) -> PartitionSpec:
    """Circle-grid partition into arcs of arc_points points, diameter (arc_points-1)/N."""
    n_cells = -(-modulus // arc_points)
    return PartitionSpec(
        name=name or f"arc{arc_points}",
        labels=tuple(f"arc{i}" for i in range(n_cells)),
        classify=ArcClassifier(arc_points, modulus),
        declared_diameter=(arc_points - 1) / modulus,
    )


def patch_partition(modulus: int, side: int, name: str | None = None) -> PartitionSpec:
    """Torus-grid partition into square patches of given side, diameter (side-1)/N."""
    per_axis = -(-modulus // side)
    return PartitionSpec(
        name=name or f"patch{side}",
        labels=tuple(f"patch{i}" for i in range(per_axis * per_axis)),
        classify=PatchClassifier(side, modulus),
        declared_diameter=(side - 1) / modulus,
    )


def oracle_entropy(system: ModelSystem) -> tuple[float, str]:
    """The system's closed-form entropy with its derivation note."""
    return system.oracle_value, system.oracle_note
