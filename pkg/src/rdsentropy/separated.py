"""Separated and spanning sets in the windowed orbit metric.

Separation is strict: a set is (omega, F, eps)-separated when every
distinct pair has windowed distance > eps. The conflict graph therefore
joins pairs at distance <= eps, so an exact tie (frequent on grid
metrics) counts as a conflict, never as separation.

Three solvers:

* ``max_separated_exact`` is a bitset branch-and-bound maximum independent
  set search on the conflict graph. It is capped because the count grows
  exponentially in the window; its answers are cross-checked against a
  plain subset enumeration in the test suite.
* ``max_separated_greedy`` is the deterministic lexicographic sweep. It is
  maximal by inclusion, so its cardinality brackets the true maximum:
  greedy(eps) lies in [Sep(2 eps), Sep(eps)]. On fibers whose conflict
  relation is translation invariant (grids under linear maps) the sweep
  runs as a sieve over difference offsets, which visits each point once
  and provably returns the same witness as the generic sweep.
* ``spanning_number`` is the greedy covering count, a bracketing
  diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResourceCapError
from .groups import FolnerWindow
from .rds import FiberModel, window_orbits

DEFAULT_EXACT_CAP = 24


@dataclass(frozen=True)
class SeparatedSetResult:
    cardinality: int
    witness: tuple[int, ...]
    method: str
    epsilon: float
    window: FolnerWindow

    def __post_init__(self) -> None:
        if self.cardinality != len(self.witness):
            raise ValueError("cardinality must equal the witness length")
        if len(set(self.witness)) != len(self.witness):
            raise ValueError("witness must not contain duplicates")


def _resolve_fiber(system, omega, fiber):
    return fiber if fiber is not None else system.fiber(omega)


def _orbit_stack(system, omega, window, fiber, ids):
    pts = fiber.points if ids is None else fiber.points[np.asarray(ids)]
    return window_orbits(system, omega, window, pts)


def bowen_matrix(system, omega, window, fiber=None, ids=None) -> np.ndarray:
    """All pairwise windowed distances among the selected fiber points."""
    fiber = _resolve_fiber(system, omega, fiber)
    orbits = _orbit_stack(system, omega, window, fiber, ids)
    m = orbits[0].shape[0]
    dist = np.zeros((m, m))
    for orb in orbits:
        dist = np.maximum(dist, np.asarray(fiber.metric(orb[:, None, :], orb[None, :, :]), dtype=float))
    return dist


def is_separated(system, omega, window, eps, ids, fiber=None) -> bool:
    """True iff every distinct pair of the given points has distance > eps."""
    ids = list(ids)
    if len(ids) <= 1:
        return True
    dist = bowen_matrix(system, omega, window, fiber=fiber, ids=ids)
    iu = np.triu_indices(len(ids), k=1)
    return bool(np.all(dist[iu] > eps))


def _conflict_masks(dist: np.ndarray, eps: float) -> list[int]:
    m = dist.shape[0]
    masks = [0] * m
    conflict = dist <= eps
    np.fill_diagonal(conflict, False)
    for i in range(m):
        mask = 0
        for j in np.nonzero(conflict[i])[0]:
            mask |= 1 << int(j)
        masks[i] = mask
    return masks


def _mis_branch_bound(adj: list[int]) -> list[int]:
    """First maximum independent set in include-first lexicographic order."""
    n = len(adj)
    best_mask = 0
    best_size = 0

    def rec(chosen_mask: int, chosen_size: int, cand: int) -> None:
        nonlocal best_mask, best_size
        if chosen_size + cand.bit_count() <= best_size:
            return
        if cand == 0:
            best_mask, best_size = chosen_mask, chosen_size
            return
        v_bit = cand & -cand
        v = v_bit.bit_length() - 1
        rec(chosen_mask | v_bit, chosen_size + 1, cand & ~adj[v] & ~v_bit)
        rec(chosen_mask, chosen_size, cand & ~v_bit)

    rec(0, 0, (1 << n) - 1)
    return [i for i in range(n) if best_mask >> i & 1]


def max_separated_exact(system, omega, window, eps, fiber=None, ids=None,
                        cap: int = DEFAULT_EXACT_CAP) -> SeparatedSetResult:
    """Certified maximum-cardinality separated subset of the fiber.

    Exhaustive branch and bound on at most ``cap`` points; ties in the
    witness are broken by lexicographic point order (include-first
    search). Larger instances are refused with a pointer to the greedy
    solver.
    """
    fiber = _resolve_fiber(system, omega, fiber)
    pool = list(range(fiber.size)) if ids is None else [int(i) for i in ids]
    if len(pool) > cap:
        raise ResourceCapError(
            f"{len(pool)} points exceed the exact solver cap {cap}; "
            "too large for exact search, use max_separated_greedy"
        )
    dist = bowen_matrix(system, omega, window, fiber=fiber, ids=pool)
    chosen = _mis_branch_bound(_conflict_masks(dist, eps))
    witness = tuple(pool[i] for i in chosen)
    return SeparatedSetResult(len(witness), witness, "exact", float(eps), window)


def _greedy_sieve(offsets: np.ndarray, shape: tuple[int, ...]) -> list[int]:
    """Lexicographic sweep over a grid with translation-invariant conflicts.

    Accepting point v blocks exactly the points v + offset (cyclically per
    coordinate), which are the points at windowed distance <= eps from v,
    so the accept/reject sequence coincides with the generic sweep.
    """
    size = int(np.prod(shape))
    blocked = np.zeros(size, dtype=bool)
    chosen: list[int] = []
    if len(shape) == 1:
        offs = offsets.reshape(-1).astype(np.int64)
        for v in range(size):
            if blocked[v]:
                continue
            chosen.append(v)
            idx = offs + v
            idx = np.where(idx >= size, idx - size, idx)
            blocked[idx] = True
        return chosen
    rows, cols = shape
    da = offsets[:, 0].astype(np.int64)
    db = offsets[:, 1].astype(np.int64)
    for v in range(size):
        if blocked[v]:
            continue
        chosen.append(v)
        a, b = divmod(v, cols)
        ia = a + da
        ia = np.where(ia >= rows, ia - rows, ia)
        ib = b + db
        ib = np.where(ib >= cols, ib - cols, ib)
        blocked[ia * cols + ib] = True
    return chosen


def max_separated_greedy(system, omega, window, eps, fiber=None, ids=None) -> SeparatedSetResult:
    """Maximal-by-inclusion separated set from the lexicographic sweep."""
    fiber = _resolve_fiber(system, omega, fiber)
    if ids is None:
        offsets_shape = system.conflict_offsets(omega, window, eps)
        if offsets_shape is not None:
            offsets, shape = offsets_shape
            witness = tuple(_greedy_sieve(offsets, shape))
            return SeparatedSetResult(len(witness), witness, "greedy", float(eps), window)
    pool = list(range(fiber.size)) if ids is None else [int(i) for i in ids]
    orbits = _orbit_stack(system, omega, window, fiber, pool)
    accepted: list[int] = []
    for cand in range(len(pool)):
        if accepted:
            acc = np.asarray(accepted)
            dist = np.zeros(len(accepted))
            for orb in orbits:
                dist = np.maximum(
                    dist, np.asarray(fiber.metric(orb[cand : cand + 1], orb[acc]), dtype=float)
                )
            if not np.all(dist > eps):
                continue
        accepted.append(cand)
    witness = tuple(pool[i] for i in accepted)
    return SeparatedSetResult(len(witness), witness, "greedy", float(eps), window)


def spanning_number(system, omega, window, eps, fiber=None, ids=None) -> int:
    """Size of the greedy covering: every point within eps of some center."""
    fiber = _resolve_fiber(system, omega, fiber)
    pool = list(range(fiber.size)) if ids is None else [int(i) for i in ids]
    orbits = _orbit_stack(system, omega, window, fiber, pool)
    m = len(pool)
    covered = np.zeros(m, dtype=bool)
    centers = 0
    for i in range(m):
        if covered[i]:
            continue
        centers += 1
        dist = np.zeros(m)
        for orb in orbits:
            dist = np.maximum(dist, np.asarray(fiber.metric(orb[i : i + 1], orb), dtype=float))
        covered |= dist <= eps
    return centers
