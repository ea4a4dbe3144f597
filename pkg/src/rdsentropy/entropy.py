"""Entropy estimators and the inequality toolkit for the variational audit.

Two families of estimates, both Monte Carlo averages over seeded
environment paths, in nats:

* separated-count rates: (1/|F_n|) log(cardinality of a maximal
  (omega, F_n, eps)-separated set), whose n -> infinity, eps -> 0 limit
  is the separated-set topological entropy;
* partition rates: (1/|F_n|) H_mu_omega(join over F_n of pulled-back
  partition cells), whose supremum over partitions is the fiber entropy.

Estimates never extrapolate in eps. The headline value is a linear
least-squares extrapolation in 1/n over the three largest usable window
sizes at the smallest requested eps; Monte Carlo spread and the fit
residual are folded into the reported half-width. Rows where the witness
occupies more than ``occupancy_cap`` of a materialized fiber are excluded
from the fit (the count then measures the grid, not the dynamics);
closed-form rows are exempt because their counts are exact.

Aggregation over samples runs in sample-index order regardless of worker
count, so parallel runs reproduce serial ones byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .driving import EnvironmentPath
from .errors import ConfigError, ResourceCapError
from .groups import FolnerWindow, folner_box
from .partitions import EmpiricalFiberMeasure, MaterializedPartition
from .rds import FiberModel, window_orbits
from .separated import (
    DEFAULT_EXACT_CAP,
    max_separated_exact,
    max_separated_greedy,
)
from .systems import DEFAULT_FIBER_CAP

OCCUPANCY_CAP = 1.0 / 16.0


def _clip_entropy(value: float) -> float:
    # Guard against -1e-16 style round-off on quantities that are >= 0.
    return 0.0 if -1e-12 < value < 0.0 else value


def shannon_entropy(weights, *, tol: float = 1e-9) -> float:
    """-sum p log p in nats with 0 log 0 = 0; input must be a probability vector."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0:
        raise ConfigError("weights must be nonempty")
    if float(w.min()) < 0:
        raise ConfigError(f"weights must be nonnegative, got min {w.min()!r}")
    total = math.fsum(w.tolist())
    if abs(total - 1.0) > tol:
        raise ConfigError(f"weights must sum to 1 within {tol}, got {total!r}")
    pos = w[w > 0]
    return _clip_entropy(-math.fsum((pos * np.log(pos)).tolist()))


def entropy_bound_check(p, a) -> tuple[float, float]:
    """Both sides of sum p_m (a_m - log p_m) <= log sum exp(a_m).

    Equality holds exactly when p_m is proportional to exp(a_m).
    """
    p = np.asarray(p, dtype=float).ravel()
    a = np.asarray(a, dtype=float).ravel()
    if p.shape != a.shape:
        raise ConfigError(f"length mismatch: {p.size} weights vs {a.size} exponents")
    if float(p.min()) < 0 or abs(math.fsum(p.tolist()) - 1.0) > 1e-9:
        raise ConfigError("first argument must be a probability vector")
    mask = p > 0
    lhs = math.fsum((p[mask] * (a[mask] - np.log(p[mask]))).tolist())
    peak = float(a.max())
    rhs = peak + math.log(math.fsum(np.exp(a - peak).tolist()))
    return lhs, rhs


def joined_partition(system, omega, window: FolnerWindow, partition, fiber: FiberModel | None = None
                     ) -> MaterializedPartition:
    """Join of the pulled-back partition over the window.

    A point's cell is its itinerary: the base cell its image visits at
    each window element, in window order. Empty itineraries are omitted;
    cells are indexed by the lexicographic order of their itineraries.
    """
    fiber = fiber if fiber is not None else system.fiber(omega)
    rows = [partition.classify(orb) for orb in window_orbits(system, omega, window, fiber.points)]
    stack = np.stack(rows, axis=1)
    itineraries, assignment = np.unique(stack, axis=0, return_inverse=True)
    return MaterializedPartition(
        name=f"join({partition.name},n={window.index_n})",
        assignment=assignment.reshape(-1),
        n_cells=itineraries.shape[0],
        cell_itineraries=itineraries,
        base_labels=getattr(partition, "labels", None),
    )


def _as_assignment(partition_or_assignment, fiber: FiberModel | None) -> np.ndarray:
    obj = partition_or_assignment
    if isinstance(obj, np.ndarray):
        return obj.astype(np.int64, copy=False)
    if hasattr(obj, "assignment"):
        return np.asarray(obj.assignment, dtype=np.int64)
    if hasattr(obj, "assign"):
        if fiber is None:
            raise ConfigError("a fiber is required to evaluate a classifier partition")
        return np.asarray(obj.assign(fiber), dtype=np.int64)
    raise ConfigError(f"cannot interpret {obj!r} as a partition")


def conditional_partition_entropy(measure: EmpiricalFiberMeasure, alpha, cond,
                                  fiber: FiberModel | None = None) -> float:
    """H(alpha | cond) under the given fiber measure, in nats.

    Computed as H(joint) - H(cond); conditioning cells of measure zero
    contribute nothing.
    """
    a = _as_assignment(alpha, fiber)
    c = _as_assignment(cond, fiber)
    if a.shape != c.shape:
        raise ConfigError("partitions live on different fibers")
    w = np.asarray(measure.weights, dtype=float)
    if w.shape != a.shape:
        raise ConfigError("measure and partitions live on different fibers")
    n_a = int(a.max()) + 1 if a.size else 1
    joint = np.bincount(c * n_a + a, weights=w)
    cond_w = np.bincount(c, weights=w)
    h_joint = -math.fsum((joint[joint > 0] * np.log(joint[joint > 0])).tolist())
    h_cond = -math.fsum((cond_w[cond_w > 0] * np.log(cond_w[cond_w > 0])).tolist())
    return _clip_entropy(h_joint - h_cond)


def empirical_nu(witness: Sequence[int], fiber_size: int) -> EmpiricalFiberMeasure:
    """Uniform probability on a maximal separated set's point ids."""
    ids = np.asarray(list(witness), dtype=np.int64)
    if ids.size == 0:
        raise ConfigError("witness must be nonempty")
    w = np.zeros(fiber_size)
    w[ids] = 1.0 / ids.size
    return EmpiricalFiberMeasure(w)


def empirical_mu(system, nu: EmpiricalFiberMeasure, omega, window: FolnerWindow,
                 fiber: FiberModel | None = None):
    """Window average of nu under the skew product.

    Returns one (shifted environment, pushforward of nu) pair per window
    element, each carrying weight 1/|F_n|; weights of colliding images
    are summed.
    """
    fiber = fiber if fiber is not None else system.fiber(omega)
    support = nu.support
    out = []
    for g in window:
        shifted = omega.shift(g)
        images = system.cocycle.apply(g, omega, fiber.points[support])
        ids = system.point_ids(fiber, images)
        w = np.zeros(fiber.size)
        np.add.at(w, ids, nu.weights[support])
        out.append((shifted, EmpiricalFiberMeasure(w)))
    return out


def atom_injectivity_check(system, omega, window: FolnerWindow, eps, partition, witness,
                           fiber: FiberModel | None = None) -> bool:
    """True iff every joined-partition atom holds at most one witness point.

    Guaranteed whenever the partition's declared diameter is <= eps and
    the witness is (omega, F, eps)-separated: two points sharing every
    itinerary cell stay within eps along the whole window.
    """
    fiber = fiber if fiber is not None else system.fiber(omega)
    joined = joined_partition(system, omega, window, partition, fiber)
    ids = np.asarray(list(witness), dtype=np.int64)
    counts = np.bincount(joined.assignment[ids], minlength=joined.n_cells)
    return bool(counts.max(initial=0) <= 1)


# ---------------------------------------------------------------------------
# Rate rows, tables, extrapolation


@dataclass(frozen=True)
class EntropyRow:
    """One table row; the CSV column order is fixed and load-bearing."""

    system: str
    n: int
    eps: float | None
    omega_samples: int
    method: str
    mean_rate: float
    std_error: float
    occupancy: float | None = field(default=None, compare=False)
    analytic: bool = field(default=False, compare=False)

    def key(self):
        return (self.system, self.n, self.eps, self.method)

    def csv_fields(self) -> tuple[str, ...]:
        eps = "" if self.eps is None else repr(float(self.eps))
        return (
            self.system,
            str(self.n),
            eps,
            str(self.omega_samples),
            self.method,
            repr(float(self.mean_rate)),
            repr(float(self.std_error)),
        )


CSV_HEADER = "system,n,eps,omega_samples,method,mean_rate,std_error"


@dataclass(frozen=True)
class EntropyTable:
    rows: tuple[EntropyRow, ...]

    def __post_init__(self) -> None:
        keys = [r.key() for r in self.rows]
        if len(set(keys)) != len(keys):
            raise ConfigError("table rows must be uniquely keyed by (system, n, eps, method)")
        if any(r.mean_rate < -1e-12 for r in self.rows):
            raise ConfigError("mean rates must be nonnegative")
        if any("," in r.system for r in self.rows):
            raise ConfigError("system labels must not contain commas (fixed CSV columns)")

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        lines.extend(",".join(r.csv_fields()) for r in self.rows)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    epsilon_used: float | None
    ci_halfwidth: float
    extrapolation: str  # "none" | "linear-in-1/n"
    fit_window_sizes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ConfigError("estimate value must be finite")
        if self.ci_halfwidth < 0:
            raise ConfigError("ci_halfwidth must be nonnegative")


def _extrapolate(rows: Sequence[EntropyRow]) -> EntropyEstimate:
    """Least-squares line in x = 1/n through the given rows, evaluated at x = 0.

    The half-width combines the Monte Carlo errors propagated through the
    fit weights with the root-mean-square fit residual.
    """
    eps = rows[-1].eps
    if len(rows) == 1:
        r = rows[0]
        return EntropyEstimate(r.mean_rate, eps, r.std_error, "none", (r.n,))
    xs = np.array([1.0 / r.n for r in rows])
    ys = np.array([r.mean_rate for r in rows])
    ses = np.array([r.std_error for r in rows])
    xm = xs.mean()
    ym = ys.mean()
    sxx = float(((xs - xm) ** 2).sum())
    slope = float(((xs - xm) * (ys - ym)).sum()) / sxx
    intercept = ym - slope * xm
    # Intercept as a linear combination of the y values.
    weights = 1.0 / len(rows) - xm * (xs - xm) / sxx
    residuals = ys - (intercept + slope * xs)
    rmse = float(np.sqrt((residuals**2).mean()))
    ci = float(np.sqrt(((weights * ses) ** 2).sum())) + rmse
    return EntropyEstimate(
        float(intercept), eps, ci, "linear-in-1/n", tuple(r.n for r in rows)
    )


# ---------------------------------------------------------------------------
# Separated-count rates


def _log_sep_once(system, omega, window, eps, method, exact_cap, fiber_cap):
    """log(separated count) for one environment; returns (value, occupancy, analytic)."""
    size = system.fiber_size
    if method == "exact":
        if size <= exact_cap:
            res = max_separated_exact(system, omega, window, eps, cap=exact_cap)
            return math.log(res.cardinality), res.cardinality / size, False
        closed = system.log_sep_exact(omega, window, eps)
        if closed is not None:
            return float(closed), None, True
        raise ResourceCapError(
            f"fiber of {system.name} has {size} points, above the exact solver cap "
            f"{exact_cap}, and no closed form is available; use method='greedy'"
        )
    if method == "greedy":
        if size <= fiber_cap:
            res = max_separated_greedy(system, omega, window, eps)
            return math.log(res.cardinality), res.cardinality / size, False
        if system.greedy_attains_max:
            closed = system.log_sep_exact(omega, window, eps)
            if closed is not None:
                return float(closed), None, True
        raise ResourceCapError(
            f"fiber of {system.name} has {size} points, above the materialization cap {fiber_cap}"
        )
    raise ConfigError(f"method must be 'exact' or 'greedy', got {method!r}")


def _sep_samples(system, n, eps, omega_samples, master_seed, method, exact_cap, fiber_cap,
                 sample_range=None):
    window = folner_box(1, n)
    out = []
    indices = range(omega_samples) if sample_range is None else sample_range
    for i in indices:
        omega = system.sample_environment(master_seed, i)
        out.append(_log_sep_once(system, omega, window, eps, method, exact_cap, fiber_cap))
    return out


def _mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    s = len(values)
    mean = math.fsum(values) / s
    if s == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (s * (s - 1))
    return mean, math.sqrt(var)


def _pooled_samples(worker_args, workers: int):
    if workers <= 1:
        fn, common, indices = worker_args
        return fn(*common, sample_range=indices)
    from concurrent.futures import ProcessPoolExecutor

    fn, common, indices = worker_args
    chunks = [list(indices)[i::workers] for i in range(workers)]
    chunks = [c for c in chunks if c]
    results: dict[int, object] = {}
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        futures = [pool.submit(_chunk_worker, fn, common, chunk) for chunk in chunks]
        for fut in futures:
            for idx, value in fut.result():
                results[idx] = value
    return [results[i] for i in sorted(results)]


def _chunk_worker(fn, common, chunk):
    values = fn(*common, sample_range=chunk)
    return list(zip(chunk, values))


def sep_entropy_rate(system, n: int, eps: float, omega_samples: int, master_seed: int,
                     method: str = "greedy", *, workers: int = 1,
                     exact_cap: int = DEFAULT_EXACT_CAP,
                     fiber_cap: int = DEFAULT_FIBER_CAP) -> EntropyRow:
    """Monte Carlo mean of (1/|F_n|) log(separated count) over environments."""
    if omega_samples < 1:
        raise ConfigError(f"omega_samples must be >= 1, got {omega_samples}")
    if n < 1:
        raise ConfigError(f"window size n must be >= 1, got {n}")
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    triples = _pooled_samples(
        (
            _sep_samples,
            (system, n, eps, omega_samples, master_seed, method, exact_cap, fiber_cap),
            range(omega_samples),
        ),
        workers,
    )
    window_size = n  # |[0, n)| in Z
    rates = [t[0] / window_size for t in triples]
    mean, se = _mean_and_se(rates)
    occupancies = [t[1] for t in triples]
    analytic = all(t[2] for t in triples)
    occupancy = None
    if all(o is not None for o in occupancies):
        occupancy = math.fsum(occupancies) / len(occupancies)
    return EntropyRow(
        system=system.name,
        n=n,
        eps=float(eps),
        omega_samples=omega_samples,
        method=method,
        mean_rate=mean,
        std_error=se,
        occupancy=occupancy,
        analytic=analytic,
    )


def _validate_grid(system, n_list, eps_list) -> tuple[tuple[int, ...], tuple[float, ...]]:
    n_list = tuple(int(n) for n in n_list)
    eps_list = tuple(float(e) for e in eps_list)
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 1:
        raise ConfigError(f"n_list must be strictly increasing positive integers, got {n_list}")
    if not eps_list or any(b >= a for a, b in zip(eps_list, eps_list[1:])) or eps_list[-1] <= 0:
        raise ConfigError(f"eps_list must be strictly decreasing positive reals, got {eps_list}")
    guard = 4.0 * system.resolution
    bad = [e for e in eps_list if e <= guard]
    if bad:
        raise ConfigError(
            f"eps values {bad} violate the scale guard eps > 4 * grid resolution "
            f"({guard!r}) of {system.name}"
        )
    return n_list, eps_list


def estimate_h_top(system, n_list, eps_list, omega_samples: int, master_seed: int,
                   method: str = "greedy", *, workers: int = 1,
                   occupancy_cap: float = OCCUPANCY_CAP,
                   exact_cap: int = DEFAULT_EXACT_CAP,
                   fiber_cap: int = DEFAULT_FIBER_CAP) -> tuple[EntropyEstimate, EntropyTable]:
    """Separated-set entropy estimate over an (n, eps) grid.

    All rows are retained in the table so both limits can be inspected;
    the headline is the 1/n extrapolation at the smallest eps over the
    three largest unsaturated window sizes.
    """
    n_list, eps_list = _validate_grid(system, n_list, eps_list)
    rows = []
    for eps in eps_list:
        for n in n_list:
            rows.append(
                sep_entropy_rate(
                    system, n, eps, omega_samples, master_seed, method,
                    workers=workers, exact_cap=exact_cap, fiber_cap=fiber_cap,
                )
            )
    table = EntropyTable(tuple(rows))
    eps_min = eps_list[-1]
    at_min = [r for r in rows if r.eps == eps_min]
    usable = [r for r in at_min if r.analytic or r.occupancy is None or r.occupancy <= occupancy_cap]
    if len(usable) < 2:
        usable = at_min
    estimate = _extrapolate(usable[-3:])
    return estimate, table


# ---------------------------------------------------------------------------
# Partition (fiber) entropy rates


def _fiber_entropy_samples(system, partition, n, omega_samples, master_seed, mu_sampler,
                           fiber_cap, sample_range=None):
    window = folner_box(1, n)
    out = []
    indices = range(omega_samples) if sample_range is None else sample_range
    for i in indices:
        omega = system.sample_environment(master_seed, i)
        if system.fiber_size <= fiber_cap:
            fiber = system.fiber(omega)
            joined = joined_partition(system, omega, window, partition, fiber)
            if mu_sampler is None:
                measure = system.invariant_measure(omega, fiber)
            else:
                measure = mu_sampler(omega, fiber)
            cell_w = np.bincount(joined.assignment, weights=measure.weights,
                                 minlength=joined.n_cells)
            out.append(shannon_entropy(cell_w, tol=1e-6))
            continue
        closed = system.joined_entropy_exact(omega, window, partition)
        if closed is None:
            raise ResourceCapError(
                f"fiber of {system.name} has {system.fiber_size} points, above the "
                f"materialization cap {fiber_cap}, and the partition "
                f"{partition.name!r} has no closed-form join entropy"
            )
        out.append(float(closed))
    return out


def fiber_partition_entropy_rate(system, partition, n: int, omega_samples: int,
                                 master_seed: int, *, mu_sampler=None, workers: int = 1,
                                 fiber_cap: int = DEFAULT_FIBER_CAP) -> EntropyRow:
    """Monte Carlo mean of (1/|F_n|) H_mu_omega(joined partition)."""
    if omega_samples < 1:
        raise ConfigError(f"omega_samples must be >= 1, got {omega_samples}")
    if n < 1:
        raise ConfigError(f"window size n must be >= 1, got {n}")
    values = _pooled_samples(
        (
            _fiber_entropy_samples,
            (system, partition, n, omega_samples, master_seed, mu_sampler, fiber_cap),
            range(omega_samples),
        ),
        workers,
    )
    rates = [v / n for v in values]
    mean, se = _mean_and_se(rates)
    return EntropyRow(
        system=f"{system.name}/{partition.name}",
        n=n,
        eps=None,
        omega_samples=omega_samples,
        method="fiber",
        mean_rate=_clip_entropy(mean),
        std_error=se,
        analytic=system.fiber_size > fiber_cap,
    )


def estimate_h_fiber(system, partition, n_list, omega_samples: int, master_seed: int, *,
                     mu_sampler=None, workers: int = 1,
                     fiber_cap: int = DEFAULT_FIBER_CAP) -> tuple[EntropyEstimate, EntropyTable]:
    """Partition entropy estimate: rate rows per n plus the 1/n extrapolation."""
    n_list = tuple(int(n) for n in n_list)
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 1:
        raise ConfigError(f"n_list must be strictly increasing positive integers, got {n_list}")
    rows = tuple(
        fiber_partition_entropy_rate(
            system, partition, n, omega_samples, master_seed,
            mu_sampler=mu_sampler, workers=workers, fiber_cap=fiber_cap,
        )
        for n in n_list
    )
    return _extrapolate(rows[-3:]), EntropyTable(rows)


# ---------------------------------------------------------------------------
# Variational audit


@dataclass(frozen=True)
class VariationalReport:
    system: str
    top: EntropyEstimate
    per_partition: tuple[tuple[str, EntropyEstimate], ...]
    best_partition: str
    gap: float
    tolerance: float
    passed: bool
    generating: tuple[tuple[str, float, bool], ...]
    slack: float

    def lines(self) -> list[str]:
        out = [
            f"system: {self.system}",
            f"h_top estimate: {self.top.value:.6f} nats "
            f"(ci {self.top.ci_halfwidth:.2e}, eps {self.top.epsilon_used}, "
            f"extrapolation {self.top.extrapolation})",
        ]
        for name, est in self.per_partition:
            out.append(
                f"fiber estimate [{name}]: {est.value:.6f} nats (ci {est.ci_halfwidth:.2e})"
            )
        out.append(f"best fiber estimate: {dict(self.per_partition)[self.best_partition].value:.6f} "
                   f"[{self.best_partition}]")
        out.append(f"gap (top - fiber): {self.gap:.6f}")
        out.append(f"tolerance (ci_top + ci_fiber + c/n slack): {self.tolerance:.6f}")
        for name, g, closes in self.generating:
            verdict = "yes" if closes else "no"
            out.append(f"generating partition [{name}]: |gap| = {abs(g):.6f}, closes within slack: {verdict}")
        if not self.generating:
            out.append("generating partition: none declared")
        out.append("PASS" if self.passed else "FAIL")
        return out


def variational_report(system, n_list, eps_list, omega_samples: int, master_seed: int,
                       method: str = "greedy", partitions=None, *, workers: int = 1,
                       occupancy_cap: float = OCCUPANCY_CAP,
                       exact_cap: int = DEFAULT_EXACT_CAP,
                       fiber_cap: int = DEFAULT_FIBER_CAP) -> VariationalReport:
    """Audit the inequality: fiber entropy <= separated-set entropy.

    The tolerance is ci_top + ci_best + log(2/eps_min)/n_fit, the last
    term covering the O(1/n) packing and itinerary boundary constants
    that the finite-window fit cannot cancel. Generating partitions are
    additionally required to close the gap within the same slack.
    """
    top, _ = estimate_h_top(
        system, n_list, eps_list, omega_samples, master_seed, method,
        workers=workers, occupancy_cap=occupancy_cap, exact_cap=exact_cap, fiber_cap=fiber_cap,
    )
    if partitions is None:
        partitions = system.canonical_partitions()
    per = []
    for part in partitions:
        est, _ = estimate_h_fiber(
            system, part, n_list, omega_samples, master_seed,
            workers=workers, fiber_cap=fiber_cap,
        )
        per.append((part.name, est))
    best_name, best = max(per, key=lambda item: item[1].value)
    gap = top.value - best.value
    eps_min = float(tuple(eps_list)[-1])
    n_fit = max(top.fit_window_sizes) if top.fit_window_sizes else max(n_list)
    slack = math.log(2.0 / eps_min) / n_fit
    tolerance = top.ci_halfwidth + best.ci_halfwidth + slack
    generating = tuple(
        (part.name, top.value - dict(per)[part.name].value,
         abs(top.value - dict(per)[part.name].value)
         <= top.ci_halfwidth + dict(per)[part.name].ci_halfwidth + slack)
        for part in partitions
        if getattr(part, "generating", False)
    )
    passed = gap >= -tolerance and all(closes for _, _, closes in generating)
    return VariationalReport(
        system=system.name,
        top=top,
        per_partition=tuple(per),
        best_partition=best_name,
        gap=gap,
        tolerance=tolerance,
        passed=passed,
        generating=generating,
        slack=slack,
    )
