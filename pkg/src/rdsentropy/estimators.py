"""Scikit-learn style estimator facade.

Both estimators follow the fit/attributes convention: the constructor
stores hyperparameters verbatim (so ``get_params``, ``set_params`` and
``clone`` work), ``fit(system)`` runs the Monte Carlo sweep, and the
results land in trailing-underscore attributes:

    est = TopologicalEntropyEstimator(n_list=(2, 4, 8), eps_list=(0.25,))
    est.fit(make_full_shift(2, 1, 8))
    est.value_, est.estimate_, est.table_

The "X" of ``fit`` is a model system rather than a data matrix; the
hyperparameters are the estimation grid.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .entropy import estimate_h_fiber, estimate_h_top, OCCUPANCY_CAP
from .validation import (
    check_epsilons,
    check_method,
    check_omega_samples,
    check_seed,
    check_system,
    check_window_sizes,
    check_workers,
)


class TopologicalEntropyEstimator(BaseEstimator):
    """Separated-set entropy of a model system over an (n, eps) grid."""

    def __init__(self, n_list=(2, 3, 4, 5, 6), eps_list=(0.25,), omega_samples=1,
                 master_seed=0, method="greedy", occupancy_cap=OCCUPANCY_CAP, workers=1):
        self.n_list = n_list
        self.eps_list = eps_list
        self.omega_samples = omega_samples
        self.master_seed = master_seed
        self.method = method
        self.occupancy_cap = occupancy_cap
        self.workers = workers

    def fit(self, X, y=None):
        system = check_system(X)
        estimate, table = estimate_h_top(
            system,
            check_window_sizes(self.n_list),
            check_epsilons(self.eps_list, system.resolution),
            check_omega_samples(self.omega_samples),
            check_seed(self.master_seed),
            check_method(self.method),
            workers=check_workers(self.workers),
            occupancy_cap=float(self.occupancy_cap),
        )
        self.estimate_ = estimate
        self.table_ = table
        self.value_ = estimate.value
        return self


class FiberEntropyEstimator(BaseEstimator):
    """Partition entropy rate of a model system, extrapolated in 1/n.

    ``partition`` is the name of one of the system's canonical partitions
    or a PartitionSpec instance.
    """

    def __init__(self, partition="symbol", n_list=(2, 3, 4, 5, 6), omega_samples=1,
                 master_seed=0, workers=1):
        self.partition = partition
        self.n_list = n_list
        self.omega_samples = omega_samples
        self.master_seed = master_seed
        self.workers = workers

    def fit(self, X, y=None):
        system = check_system(X)
        part = self.partition
        if isinstance(part, str):
            part = system.partition(part)
        estimate, table = estimate_h_fiber(
            system,
            part,
            check_window_sizes(self.n_list),
            check_omega_samples(self.omega_samples),
            check_seed(self.master_seed),
            workers=check_workers(self.workers),
        )
        self.partition_ = part
        self.estimate_ = estimate
        self.table_ = table
        self.value_ = estimate.value
        return self
