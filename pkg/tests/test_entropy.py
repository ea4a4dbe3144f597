"""Entropy primitives, rate estimators, joins, empirical measures."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdsentropy import (
    ConfigError,
    atom_injectivity_check,
    conditional_partition_entropy,
    empirical_mu,
    empirical_nu,
    entropy_bound_check,
    estimate_h_fiber,
    estimate_h_top,
    fiber_partition_entropy_rate,
    folner_box,
    joined_partition,
    make_doubling_map,
    make_full_shift,
    make_random_expansion,
    make_toral_automorphism,
    max_separated_greedy,
    sep_entropy_rate,
    shannon_entropy,
)
from rdsentropy.entropy import EntropyRow, EntropyTable, _extrapolate
from rdsentropy.partitions import EmpiricalFiberMeasure

LOG2 = math.log(2)


# -- shannon_entropy ---------------------------------------------------------


def test_shannon_uniform_and_point_mass():
    assert shannon_entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-12)
    assert shannon_entropy([1.0, 0.0, 0.0]) == 0.0


def test_shannon_mixed_example():
    assert shannon_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5 * LOG2, abs=1e-12)


def test_shannon_validation():
    with pytest.raises(ConfigError):
        shannon_entropy([0.5, 0.6])
    with pytest.raises(ConfigError):
        shannon_entropy([-0.2, 1.2])


@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**32))
@settings(max_examples=200, deadline=None)
def test_shannon_bounds_property(k, seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(k))
    h = shannon_entropy(p, tol=1e-6)
    assert -1e-12 <= h <= math.log(k) + 1e-9


# -- the standard inequality --------------------------------------------------


def test_entropy_bound_equality_cases():
    lhs, rhs = entropy_bound_check([0.5, 0.5], [0.0, 0.0])
    assert lhs == pytest.approx(LOG2, abs=1e-12)
    assert rhs == pytest.approx(LOG2, abs=1e-12)
    lhs, rhs = entropy_bound_check([1.0, 0.0], [0.0, 0.0])
    assert lhs == 0.0
    assert rhs == pytest.approx(LOG2, abs=1e-12)


def test_entropy_bound_gibbs_equality():
    rng = np.random.default_rng(8)
    for _ in range(50):
        a = rng.normal(0, 2, size=6)
        p = np.exp(a - a.max())
        p /= p.sum()
        lhs, rhs = entropy_bound_check(p, a)
        assert abs(lhs - rhs) <= 1e-12


def test_entropy_bound_random_sweep():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        k = int(rng.integers(2, 9))
        p = rng.dirichlet(np.ones(k))
        a = rng.normal(0, 3, size=k)
        lhs, rhs = entropy_bound_check(p, a)
        assert lhs <= rhs + 1e-12


def test_entropy_bound_length_mismatch():
    with pytest.raises(ConfigError):
        entropy_bound_check([1.0], [0.0, 1.0])


# -- joins ---------------------------------------------------------------


def test_join_identity_window_keeps_structure():
    system = make_random_expansion([(2, 1)], 6)
    omega = system.sample_environment(0, 0)
    fiber = system.fiber(omega)
    half = system.partition("half")
    joined = joined_partition(system, omega, folner_box(1, 1), half, fiber)
    assert joined.n_cells == 2
    assert np.array_equal(joined.assignment, half.assign(fiber))


def test_join_doubling_half_circle_four_cells():
    # Z/64, two half-circle cells, window {0, 1}: the four itinerary
    # classes are the quarter arcs, 16 points each.
    system = make_doubling_map(6)
    omega = system.sample_environment(0, 0)
    fiber = system.fiber(omega)
    joined = joined_partition(system, omega, folner_box(1, 2), system.partition("half"), fiber)
    assert joined.n_cells == 4
    counts = np.bincount(joined.assignment)
    assert counts.tolist() == [16, 16, 16, 16]


def test_join_single_cell_stays_single():
    system = make_full_shift(2, 1, 4)
    omega = system.sample_environment(0, 0)
    joined = joined_partition(system, omega, folner_box(1, 3), system.partition("trivial"))
    assert joined.n_cells == 1


def test_join_labels_are_itineraries():
    system = make_doubling_map(4)
    omega = system.sample_environment(0, 0)
    joined = joined_partition(system, omega, folner_box(1, 2), system.partition("half"))
    assert joined.labels == (
        ("left", "left"), ("left", "right"), ("right", "left"), ("right", "right"),
    )


# -- conditional entropy -------------------------------------------------


def test_conditional_refinement_gives_zero():
    alpha = np.array([0, 0, 1, 1])
    refines = np.array([0, 1, 2, 3])
    mu = EmpiricalFiberMeasure(np.full(4, 0.25))
    assert conditional_partition_entropy(mu, alpha, refines) == 0.0


def test_conditional_trivial_conditioning_is_plain_entropy():
    alpha = np.array([0, 1, 0, 1])
    trivial = np.zeros(4, dtype=int)
    mu = EmpiricalFiberMeasure(np.full(4, 0.25))
    h = conditional_partition_entropy(mu, alpha, trivial)
    assert h == pytest.approx(LOG2, abs=1e-12)


def test_conditional_mixing_cell_bound():
    # alpha two cells; conditioning has one cell holding everything:
    # H(alpha | C) = H(alpha) = log 2 = mass(C0) log 2.
    alpha = np.array([0, 1, 0, 1])
    c = np.zeros(4, dtype=int)
    mu = EmpiricalFiberMeasure(np.full(4, 0.25))
    h = conditional_partition_entropy(mu, alpha, c)
    assert h <= 1.0 * LOG2 + 1e-12


def test_conditional_below_unconditional():
    rng = np.random.default_rng(11)
    for _ in range(100):
        size = int(rng.integers(3, 30))
        alpha = rng.integers(0, 4, size=size)
        cond = rng.integers(0, 3, size=size)
        w = rng.dirichlet(np.ones(size))
        mu = EmpiricalFiberMeasure(w / math.fsum(w.tolist()))
        h_cond = conditional_partition_entropy(mu, alpha, cond)
        h_plain = conditional_partition_entropy(mu, alpha, np.zeros(size, dtype=int))
        assert h_cond <= h_plain + 1e-12


def test_step_one_bound_nested_conditioning():
    # C_m inside A_m for m >= 1 forces H(alpha | C) <= mu(C_0) log l.
    rng = np.random.default_rng(12)
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
        w = w / math.fsum(w.tolist())
        mu = EmpiricalFiberMeasure(w)
        h = conditional_partition_entropy(mu, alpha, cond)
        assert h <= float(w[cond == 0].sum()) * math.log(l) + 1e-12


# -- separated-count rates -------------------------------------------------


def test_rate_deterministic_system_zero_spread():
    system = make_doubling_map(8)
    row = sep_entropy_rate(system, 3, 0.1, omega_samples=5, master_seed=1, method="greedy")
    assert row.std_error == 0.0


def test_rate_discrete_fiber_closed_form(discrete6):
    # Sep = k for any window at eps < 1, so the rate is log(k)/n.
    row_like = sep_entropy_rate(discrete6, 3, 0.5, 2, 0, method="exact")
    assert row_like.mean_rate == pytest.approx(math.log(6) / 3, abs=1e-12)


def test_rate_full_shift_small_exact():
    system = make_full_shift(2, 1, 2)
    row = sep_entropy_rate(system, 2, 0.5, 4, 9, method="exact")
    assert row.mean_rate == LOG2
    assert row.std_error == 0.0
    assert row.occupancy == 1.0


def test_rate_full_shift_closed_form_large():
    system = make_full_shift(2, 3, 50)
    row = sep_entropy_rate(system, 50, 2**-3, 1, 0, method="exact")
    assert row.analytic
    assert row.mean_rate == pytest.approx((54 / 50) * LOG2, abs=1e-12)


def test_rate_validation():
    system = make_full_shift(2, 1, 2)
    with pytest.raises(ConfigError):
        sep_entropy_rate(system, 2, 0.5, 0, 0)
    with pytest.raises(ConfigError):
        sep_entropy_rate(system, 0, 0.5, 1, 0)
    with pytest.raises(ConfigError):
        sep_entropy_rate(system, 2, -0.5, 1, 0)


def test_estimate_h_top_full_shift_exact_affine():
    system = make_full_shift(2, 1, 64)
    est, table = estimate_h_top(system, (16, 32, 64), (0.5,), 2, 5, method="exact")
    assert est.extrapolation == "linear-in-1/n"
    assert est.value == pytest.approx(LOG2, abs=1e-9)
    assert len(table.rows) == 3
    assert all(r.analytic for r in table.rows)


def test_estimate_h_top_grid_validation():
    system = make_doubling_map(6)
    with pytest.raises(ConfigError):
        estimate_h_top(system, (4, 2), (0.25,), 1, 0)
    with pytest.raises(ConfigError):
        estimate_h_top(system, (2, 4), (0.1, 0.2), 1, 0)
    with pytest.raises(ConfigError):  # eps guard: 4 * (1/64) = 1/16
        estimate_h_top(system, (2, 4), (0.05,), 1, 0)


def test_estimate_monotone_in_eps_with_exact_method():
    system = make_full_shift(2, 1, 4)  # 16 cyclic words, within the exact cap
    _, table = estimate_h_top(system, (2, 4), (0.5, 0.25), 1, 0, method="exact",
                              exact_cap=24)
    by_n = {}
    for row in table.rows:
        by_n.setdefault(row.n, {})[row.eps] = row.mean_rate
    for n, rates in by_n.items():
        assert rates[0.25] >= rates[0.5] - 1e-12


def test_two_box_subsequences_agree_on_full_shift():
    system = make_full_shift(2, 1, 64)
    est_a, _ = estimate_h_top(system, (8, 16, 32), (0.5,), 1, 0, method="exact")
    est_b, _ = estimate_h_top(system, (12, 24, 48), (0.5,), 1, 0, method="exact")
    assert est_a.value == pytest.approx(est_b.value, abs=1e-9)


def test_extrapolation_recovers_affine_data():
    rows = tuple(
        EntropyRow("s", n, 0.5, 1, "exact", 0.7 + 1.3 / n, 0.0) for n in (8, 16, 32)
    )
    est = _extrapolate(rows)
    assert est.value == pytest.approx(0.7, abs=1e-12)
    assert est.fit_window_sizes == (8, 16, 32)


def test_single_row_estimate_has_no_extrapolation():
    rows = (EntropyRow("s", 4, 0.5, 3, "exact", 0.9, 0.01),)
    est = _extrapolate(rows)
    assert est.extrapolation == "none"
    assert est.value == 0.9
    assert est.ci_halfwidth == 0.01


def test_table_rejects_duplicate_keys():
    row = EntropyRow("s", 4, 0.5, 3, "exact", 0.9, 0.01)
    with pytest.raises(ConfigError):
        EntropyTable((row, row))


# -- empirical measures ----------------------------------------------------


def test_empirical_nu_examples():
    nu = empirical_nu([3], fiber_size=8)
    assert nu.weights[3] == 1.0
    nu = empirical_nu([0, 2, 5], fiber_size=8)
    assert sorted(nu.weights[nu.support].tolist()) == [pytest.approx(1 / 3)] * 3
    assert shannon_entropy(nu.weights) == pytest.approx(math.log(3), abs=1e-12)


def test_empirical_mu_identity_window():
    system = make_doubling_map(5)
    omega = system.sample_environment(0, 0)
    fiber = system.fiber(omega)
    nu = empirical_nu([1, 4], fiber.size)
    pairs = empirical_mu(system, nu, omega, folner_box(1, 1), fiber)
    assert len(pairs) == 1
    _, pushed = pairs[0]
    assert np.array_equal(pushed.weights, nu.weights)


def test_empirical_mu_collision_sums():
    # On Z/32 the points 0 and 16 both double to 0.
    system = make_doubling_map(5)
    omega = system.sample_environment(0, 0)
    fiber = system.fiber(omega)
    nu = empirical_nu([0, 16], fiber.size)
    pairs = empirical_mu(system, nu, omega, folner_box(1, 2), fiber)
    _, pushed = pairs[1]  # window element (1,)
    assert pushed.weights[0] == pytest.approx(1.0, abs=1e-12)


def test_empirical_mu_bijective_preserves_uniform_support():
    system = make_toral_automorphism([[2, 1], [1, 1]], 3)
    omega = system.sample_environment(0, 0)
    fiber = system.fiber(omega)
    nu = empirical_nu(list(range(10)), fiber.size)
    for _, pushed in empirical_mu(system, nu, omega, folner_box(1, 3), fiber):
        assert len(pushed.support) == 10
        assert np.allclose(pushed.weights[pushed.support], 0.1)


# -- fiber (partition) rates -----------------------------------------------


def test_fiber_rate_full_shift_symbol_exact_small():
    system = make_full_shift(2, 1, 6)
    for n in range(1, 7):
        row = fiber_partition_entropy_rate(system, system.partition("symbol"), n, 3, 0)
        assert row.mean_rate == pytest.approx(LOG2, abs=1e-12)


def test_fiber_rate_generic_equals_closed_form_on_overlap():
    system = make_full_shift(2, 1, 8)
    omega = system.sample_environment(0, 0)
    part = system.partition("symbol")
    for n in (2, 5, 8):
        generic = fiber_partition_entropy_rate(system, part, n, 1, 0)
        closed = system.joined_entropy_exact(omega, folner_box(1, n), part) / n
        assert generic.mean_rate == pytest.approx(closed, abs=1e-12)


def test_fiber_rate_trivial_partition_zero():
    for system in (make_full_shift(2, 1, 4), make_doubling_map(6)):
        row = fiber_partition_entropy_rate(system, system.partition("trivial"), 3, 2, 1)
        assert row.mean_rate == 0.0


def test_fiber_rate_doubling_half_circle_exact():
    system = make_doubling_map(16)
    row = fiber_partition_entropy_rate(system, system.partition("half"), 10, 1, 0)
    assert row.mean_rate == pytest.approx(LOG2, abs=1e-12)
    assert abs(row.mean_rate - LOG2) / LOG2 < 0.02


def test_estimate_h_fiber_extrapolates():
    system = make_full_shift(2, 1, 16)
    est, table = estimate_h_fiber(system, system.partition("symbol"), (4, 8, 16), 2, 3)
    assert est.value == pytest.approx(LOG2, abs=1e-12)
    assert len(table.rows) == 3
    assert table.rows[0].method == "fiber"
    assert table.rows[0].eps is None


# -- atom injectivity and the counting identity ------------------------------


def test_atom_injectivity_singleton():
    system = make_doubling_map(6)
    omega = system.sample_environment(0, 0)
    part = system.partition("half")
    assert atom_injectivity_check(system, omega, folner_box(1, 2), 0.5, part, [17])


def test_atom_injectivity_full_shift_symbol():
    system = make_full_shift(2, 1, 5)
    omega = system.sample_environment(0, 0)
    window = folner_box(1, 3)
    witness = max_separated_greedy(system, omega, window, 0.5).witness
    part = system.partition("symbol")
    assert part.declared_diameter <= 0.5
    assert atom_injectivity_check(system, omega, window, 0.5, part, witness)


def test_atom_injectivity_evaluates_outside_precondition():
    # diam > eps: the check still runs and returns a boolean.
    system = make_doubling_map(6)
    omega = system.sample_environment(0, 0)
    part = system.partition("half")  # diameter 1/2 > eps
    out = atom_injectivity_check(system, omega, folner_box(1, 1), 0.1, part, [0, 1, 40])
    assert isinstance(out, bool)


def test_counting_identity_uniform_on_witness():
    # With one point per atom, the entropy of the empirical measure under
    # the join equals log(witness size) exactly.
    from rdsentropy import arc_partition

    system = make_random_expansion([(2, 1), (3, 1)], 7)
    omega = system.sample_environment(21, 0)
    window = folner_box(1, 3)
    eps = 0.1
    part = arc_partition(system.modulus, int(eps * system.modulus))
    witness = max_separated_greedy(system, omega, window, eps).witness
    assert atom_injectivity_check(system, omega, window, eps, part, witness)
    fiber = system.fiber(omega)
    joined = joined_partition(system, omega, window, part, fiber)
    nu = empirical_nu(witness, fiber.size)
    cell_weights = np.bincount(joined.assignment, weights=nu.weights,
                               minlength=joined.n_cells)
    h = shannon_entropy(cell_weights, tol=1e-9)
    assert h == pytest.approx(math.log(len(witness)), abs=1e-9)
    assert math.log(joined.n_cells) >= h - 1e-12


# -- reproducibility ---------------------------------------------------------


def test_rows_identical_across_workers():
    system = make_random_expansion([(2, 1), (3, 1)], 8)
    serial = sep_entropy_rate(system, 4, 0.1, 6, 33, method="greedy", workers=1)
    parallel = sep_entropy_rate(system, 4, 0.1, 6, 33, method="greedy", workers=2)
    assert serial == parallel
    f_serial = fiber_partition_entropy_rate(system, system.partition("half"), 4, 6, 33, workers=1)
    f_parallel = fiber_partition_entropy_rate(system, system.partition("half"), 4, 6, 33, workers=2)
    assert f_serial == f_parallel
