"""Named invariant suites: one callable per property family.

``run_audit`` executes every suite on small, fast instances and reports
one PASS/FAIL line each; the first failure stops the run and names the
suite. All randomness is drawn from the given seed, so two audits with
the same seed print identical summaries.

The brute-force separated-set maximum used here enumerates subsets
directly and shares no search logic with the branch-and-bound solver, so
the two sides stay independent.
"""

from __future__ import annotations

import math

import numpy as np

from .driving import SymbolLaw, sample_environment
from .entropy import (
    atom_injectivity_check,
    conditional_partition_entropy,
    entropy_bound_check,
    joined_partition,
    shannon_entropy,
)
from .groups import compose, folner_box, folner_defect, identity, inverse
from .partitions import EmpiricalFiberMeasure
from .rds import bowen_distance, cocycle_audit
from .separated import bowen_matrix, max_separated_exact, max_separated_greedy
from .systems import (
    arc_partition,
    make_full_shift,
    make_random_expansion,
    make_toral_automorphism,
    patch_partition,
)


class AuditFailure(AssertionError):
    pass


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise AuditFailure(message)


def default_audit_systems():
    """Small, fast instances of every model family."""
    return (
        make_full_shift(2, 1, 6),
        make_full_shift(3, 2, 3),
        make_random_expansion([(2, 1)], 8),
        make_random_expansion([(2, 1), (3, 1)], 8),
        make_toral_automorphism([[2, 1], [1, 1]], 4),
    )


def brute_force_max_separated(system, omega, window, eps, ids=None) -> int:
    """Independent oracle: largest separated subset by subset enumeration.

    Walks all 2**m subsets with the incremental rule "a set is separated
    iff dropping its lowest point leaves a separated set and that point
    conflicts with none of the rest"; no search tree, no pruning.
    """
    fiber = system.fiber(omega)
    pool = list(range(fiber.size)) if ids is None else list(ids)
    dist = bowen_matrix(system, omega, window, fiber=fiber, ids=pool)
    m = len(pool)
    conflict = dist <= eps
    np.fill_diagonal(conflict, False)
    conflict_bits = [0] * m
    for i in range(m):
        bits = 0
        for j in np.nonzero(conflict[i])[0]:
            bits |= 1 << int(j)
        conflict_bits[i] = bits
    ok = [False] * (1 << m)
    ok[0] = True
    best = 0
    for mask in range(1, 1 << m):
        low = mask & -mask
        rest = mask ^ low
        if ok[rest] and conflict_bits[low.bit_length() - 1] & rest == 0:
            ok[mask] = True
            size = mask.bit_count()
            if size > best:
                best = size
    return best


# -- suites ---------------------------------------------------------------


def check_group_axioms(rng, systems) -> None:
    for dim in (1, 2):
        e = identity(dim)
        for _ in range(1000):
            g, h, k = (tuple(int(v) for v in rng.integers(-50, 51, size=dim)) for _ in range(3))
            _require(compose(compose(g, h), k) == compose(g, compose(h, k)), "associativity broke")
            _require(compose(g, h) == compose(h, g), "commutativity broke")
            _require(compose(g, e) == g, "identity broke")
            _require(compose(g, inverse(g)) == e, "inverse broke")


def check_folner_defects(rng, systems) -> None:
    for dim in (1, 2):
        gen = tuple(1 if i == 0 else 0 for i in range(dim))
        previous = None
        for n in range(1, 65):
            window = folner_box(dim, n)
            _require(folner_defect(window, identity(dim)) == 0, "identity defect nonzero")
            d = folner_defect(window, gen)
            _require(d * n <= 2 * dim, f"defect bound 2d/n broke at n={n}, d={d}")
            _require(previous is None or d <= previous, f"defect not monotone at n={n}")
            previous = d


def check_environment_shift(rng, systems) -> None:
    law = SymbolLaw.uniform((0, 1, 2))
    for dim in (1, 2):
        omega = sample_environment(12345, 0, law, dim)
        sites = [tuple(int(v) for v in rng.integers(-40, 41, size=dim)) for _ in range(100)]
        for h in [tuple(int(v) for v in rng.integers(-5, 6, size=dim)) for _ in range(5)]:
            shifted = omega.shift(h)
            for g in sites:
                _require(
                    shifted.symbol_at(g) == omega.symbol_at(compose(h, g)),
                    "shift equivariance broke",
                )
    a = sample_environment(999, 0, law)
    b = sample_environment(999, 1, law)
    probes = [(int(v),) for v in rng.integers(-50, 51, size=100)]
    _require(any(a.symbol_at(g) != b.symbol_at(g) for g in probes),
             "independent samples coincide on 100 sites")


def check_cocycle_laws(rng, systems) -> None:
    for system in systems:
        monoid = system.cocycle.domain == "monoid"
        lo = 0 if monoid else -3
        e = identity(1)
        for trial in range(1000):
            omega = system.sample_environment(4242, trial % 20)
            x = system.sample_points(omega, 1, seed=trial)
            _require(
                np.array_equal(system.cocycle.apply(e, omega, x), x),
                f"identity law broke on {system.name}",
            )
            g1 = (int(rng.integers(lo, 4)),)
            g2 = (int(rng.integers(lo, 4)),)
            _require(
                cocycle_audit(system, omega, g1, g2, x),
                f"cocycle law broke on {system.name} at g1={g1}, g2={g2}",
            )


def check_fiber_metrics(rng, systems) -> None:
    for system in systems:
        fiber = system.fiber(None)
        n = fiber.size
        take = rng.choice(n, size=min(n, 24), replace=False)
        pts = fiber.points[take]
        d = np.asarray(fiber.metric(pts[:, None, :], pts[None, :, :]), dtype=float)
        _require(np.array_equal(d, d.T), f"metric asymmetry on {system.name}")
        _require(np.all(np.diag(d) == 0), f"metric self-distance nonzero on {system.name}")
        off = d[~np.eye(len(take), dtype=bool)]
        _require(off.size == 0 or off.min() > 0, f"distinct points at distance 0 on {system.name}")
        for _ in range(200):
            i, j, k = rng.integers(0, len(take), size=3)
            _require(
                d[i, k] <= d[i, j] + d[j, k] + 1e-12,
                f"triangle inequality broke on {system.name}",
            )


def check_bowen_monotonicity(rng, systems) -> None:
    for system in systems:
        omega = system.sample_environment(7, 0)
        fiber = system.fiber(omega)
        small, large = folner_box(1, 2), folner_box(1, 4)
        for _ in range(50):
            i, j = rng.integers(0, fiber.size, size=2)
            d_small = bowen_distance(system, omega, small, fiber.points[i], fiber.points[j])
            d_large = bowen_distance(system, omega, large, fiber.points[i], fiber.points[j])
            base = fiber.distance(fiber.points[i], fiber.points[j])
            _require(d_small <= d_large, f"window monotonicity broke on {system.name}")
            _require(base <= d_small, f"windowed metric below base metric on {system.name}")


def _random_small_instances(rng, count):
    """Random (system, omega, window, eps, ids) tuples with at most 16 points."""
    out = []
    for trial in range(count):
        q = int(rng.integers(4, 7))
        system = make_random_expansion([(2, 1), (3, 1)], q)
        omega = system.sample_environment(1000 + trial, 0)
        window = folner_box(1, int(rng.integers(1, 4)))
        eps = float(rng.uniform(0.02, 0.45))
        size = int(rng.integers(2, 17))
        ids = sorted(int(v) for v in rng.choice(system.fiber_size, size=size, replace=False))
        out.append((system, omega, window, eps, ids))
    return out


def check_solver_oracle(rng, systems) -> None:
    for system, omega, window, eps, ids in _random_small_instances(rng, 60):
        exact = max_separated_exact(system, omega, window, eps, ids=ids)
        brute = brute_force_max_separated(system, omega, window, eps, ids=ids)
        _require(exact.cardinality == brute,
                 f"exact solver disagrees with enumeration: {exact.cardinality} vs {brute}")


def check_greedy_bracketing(rng, systems) -> None:
    for system, omega, window, eps, ids in _random_small_instances(rng, 60):
        greedy = max_separated_greedy(system, omega, window, eps, ids=ids)
        sep_eps = max_separated_exact(system, omega, window, eps, ids=ids).cardinality
        sep_2eps = max_separated_exact(system, omega, window, 2 * eps, ids=ids).cardinality
        _require(sep_2eps <= greedy.cardinality <= sep_eps,
                 f"greedy bracketing broke: {sep_2eps} <= {greedy.cardinality} <= {sep_eps}")


def check_sep_monotonicity(rng, systems) -> None:
    for system, omega, window, eps, ids in _random_small_instances(rng, 40):
        bigger = float(eps * rng.uniform(1.2, 2.5))
        sep_small = max_separated_exact(system, omega, window, eps, ids=ids).cardinality
        sep_big = max_separated_exact(system, omega, window, bigger, ids=ids).cardinality
        _require(sep_big <= sep_small, "eps monotonicity broke")
        wider = folner_box(1, window.index_n + 1)
        sep_wider = max_separated_exact(system, omega, wider, eps, ids=ids).cardinality
        _require(sep_small <= sep_wider, "window monotonicity broke")


def check_entropy_bound(rng, systems) -> None:
    for _ in range(1000):
        k = int(rng.integers(2, 8))
        p = rng.dirichlet(np.ones(k))
        a = rng.normal(0.0, 2.0, size=k)
        lhs, rhs = entropy_bound_check(p, a)
        _require(lhs <= rhs + 1e-12, f"standard inequality broke: {lhs} > {rhs}")
    a = rng.normal(0.0, 1.0, size=5)
    p = np.exp(a - a.max())
    p /= p.sum()
    lhs, rhs = entropy_bound_check(p, a)
    _require(abs(lhs - rhs) <= 1e-12, "Gibbs equality case broke")


def check_conditional_bound(rng, systems) -> None:
    for _ in range(200):
        size = int(rng.integers(4, 40))
        l = int(rng.integers(2, 6))
        alpha = rng.integers(0, l, size=size)
        cond = np.zeros(size, dtype=np.int64)
        for m in range(1, l + 1):
            inside = np.nonzero(alpha == m - 1)[0]
            chosen = inside[rng.random(inside.size) < 0.5]
            cond[chosen] = m
        w = rng.dirichlet(np.ones(size))
        measure = EmpiricalFiberMeasure(w / math.fsum(w.tolist()))
        h = conditional_partition_entropy(measure, alpha, cond)
        mass_c0 = float(w[cond == 0].sum())
        _require(h <= mass_c0 * math.log(l) + 1e-12,
                 f"conditional bound broke: {h} > {mass_c0 * math.log(l)}")


def check_atom_injectivity(rng, systems) -> None:
    for trial in range(40):
        q = int(rng.integers(4, 7))
        system = make_random_expansion([(2, 1), (3, 1)], q)
        omega = system.sample_environment(77 + trial, 0)
        window = folner_box(1, int(rng.integers(1, 5)))
        eps = float(rng.uniform(3.0 / system.modulus, 0.2))
        arc = max(1, int(eps * system.modulus) )
        part = arc_partition(system.modulus, arc)
        _require(part.declared_diameter <= eps, "instance generation broke the diameter bound")
        witness = max_separated_greedy(system, omega, window, eps).witness
        _require(
            atom_injectivity_check(system, omega, window, eps, part, witness),
            f"atom injectivity broke on {system.name}",
        )


def check_measure_invariance(rng, systems) -> None:
    """Pushforwards of the invariant measure stay Lebesgue-discretized.

    Invertible systems must reproduce the invariant measure exactly. A
    non-invertible grid expansion collapses the grid onto its image
    sublattice (multiplication by 2 on a dyadic grid is 2-to-1 onto the
    even points), so there the pushforward must equal the uniform measure
    on that sublattice, which is the Lebesgue discretization at the image
    resolution.
    """
    for system in systems:
        omega = system.sample_environment(31, 0)
        fiber = system.fiber(omega)
        mu = system.invariant_measure(omega, fiber)
        for g in ((1,), (2,)):
            images = system.cocycle.apply(g, omega, fiber.points)
            ids = system.point_ids(fiber, images)
            pushed = np.zeros(fiber.size)
            np.add.at(pushed, ids, mu.weights)
            support = pushed > 0
            uniform_on_image = np.where(support, 1.0 / int(support.sum()), 0.0)
            tv = 0.5 * float(np.abs(pushed - uniform_on_image).sum())
            _require(tv <= 1e-9,
                     f"pushforward not sublattice-uniform on {system.name}: TV={tv}")
            if system.cocycle.domain == "group":
                mu_shifted = system.invariant_measure(omega.shift(g), fiber)
                tv_full = 0.5 * float(np.abs(pushed - mu_shifted.weights).sum())
                _require(tv_full <= 1e-9,
                         f"invariant measure not preserved on {system.name}: TV={tv_full}")


def check_join_counting(rng, systems) -> None:
    # One uniform point per nonempty joined atom: its entropy equals
    # log(#atoms), and #atoms is at most the separated count at any eps
    # below the smallest positive pairwise windowed distance.
    for system in systems:
        if system.fiber_size > 4096:
            continue
        omega = system.sample_environment(5, 0)
        fiber = system.fiber(omega)
        window = folner_box(1, 2)
        part = system.canonical_partitions()[0]
        joined = joined_partition(system, omega, window, part, fiber)
        reps = np.array([np.nonzero(joined.assignment == c)[0][0] for c in range(joined.n_cells)])
        w = np.zeros(fiber.size)
        w[reps] = 1.0 / reps.size
        h = shannon_entropy(w)
        _require(h <= math.log(joined.n_cells) + 1e-12, "entropy above log(#atoms)")
        dist = bowen_matrix(system, omega, window, fiber=fiber, ids=list(reps[:20]))
        off = dist[~np.eye(min(20, reps.size), dtype=bool)]
        if off.size:
            eps = 0.5 * float(off[off > 0].min()) if np.any(off > 0) else 0.0
            if eps > 0 and fiber.size <= 24:
                sep = max_separated_exact(system, omega, window, eps).cardinality
                _require(joined.n_cells <= sep, "atom count above separated count at fine scale")


ALL_CHECKS = (
    ("group_axioms", check_group_axioms),
    ("folner_defect", check_folner_defects),
    ("environment_shift", check_environment_shift),
    ("cocycle_audit", check_cocycle_laws),
    ("fiber_metric", check_fiber_metrics),
    ("bowen_monotonicity", check_bowen_monotonicity),
    ("solver_oracle", check_solver_oracle),
    ("greedy_bracketing", check_greedy_bracketing),
    ("sep_monotonicity", check_sep_monotonicity),
    ("entropy_bound", check_entropy_bound),
    ("conditional_bound", check_conditional_bound),
    ("atom_injectivity", check_atom_injectivity),
    ("measure_invariance", check_measure_invariance),
    ("join_counting", check_join_counting),
)


def run_audit(seed: int = 0, systems=None, stream=None) -> bool:
    """Run every suite; print one line per suite; stop at the first failure."""
    emit = (lambda line: None) if stream is None else (lambda line: print(line, file=stream))
    systems = default_audit_systems() if systems is None else tuple(systems)
    for position, (name, check) in enumerate(ALL_CHECKS):
        rng = np.random.default_rng(seed * 1009 + position)
        try:
            check(rng, systems)
        except AuditFailure as exc:
            emit(f"FAIL {name}: {exc}")
            return False
        emit(f"PASS {name}")
    emit("audit: all suites passed")
    return True
