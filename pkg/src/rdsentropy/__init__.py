"""Entropy of continuous bundle random dynamical systems over amenable groups.

Separated-set counts in windowed orbit metrics, the separated-set
topological entropy estimator, partition (fiber) entropy rates, and the
numerical variational audit between the two, on model systems with
closed-form entropy oracles.
"""

from .driving import EnvironmentPath, SymbolLaw, sample_environment, shift_environment
from .entropy import (
    EntropyEstimate,
    EntropyRow,
    EntropyTable,
    atom_injectivity_check,
    conditional_partition_entropy,
    empirical_mu,
    empirical_nu,
    entropy_bound_check,
    estimate_h_fiber,
    estimate_h_top,
    fiber_partition_entropy_rate,
    joined_partition,
    sep_entropy_rate,
    shannon_entropy,
    variational_report,
)
from .errors import CocycleDomainError, ConfigError, ResourceCapError
from .estimators import FiberEntropyEstimator, TopologicalEntropyEstimator
from .groups import FolnerWindow, compose, folner_box, folner_defect, identity, inverse
from .partitions import EmpiricalFiberMeasure, PartitionSpec, check_partition
from .rds import (
    CocycleMap,
    FiberModel,
    apply_cocycle,
    bowen_distance,
    cocycle_audit,
    skew_step,
)
from .separated import (
    SeparatedSetResult,
    is_separated,
    max_separated_exact,
    max_separated_greedy,
    spanning_number,
)
from .systems import (
    ModelSystem,
    arc_partition,
    make_doubling_map,
    make_full_shift,
    make_random_expansion,
    make_toral_automorphism,
    oracle_entropy,
    patch_partition,
)

__version__ = "0.1.0"

__all__ = [
    "CocycleDomainError",
    "CocycleMap",
    "ConfigError",
    "EmpiricalFiberMeasure",
    "EntropyEstimate",
    "EntropyRow",
    "EntropyTable",
    "EnvironmentPath",
    "FiberEntropyEstimator",
    "FiberModel",
    "FolnerWindow",
    "ModelSystem",
    "PartitionSpec",
    "ResourceCapError",
    "SeparatedSetResult",
    "SymbolLaw",
    "TopologicalEntropyEstimator",
    "apply_cocycle",
    "arc_partition",
    "atom_injectivity_check",
    "bowen_distance",
    "check_partition",
    "cocycle_audit",
    "compose",
    "conditional_partition_entropy",
    "empirical_mu",
    "empirical_nu",
    "entropy_bound_check",
    "estimate_h_fiber",
    "estimate_h_top",
    "fiber_partition_entropy_rate",
    "folner_box",
    "folner_defect",
    "identity",
    "inverse",
    "is_separated",
    "joined_partition",
    "make_doubling_map",
    "make_full_shift",
    "make_random_expansion",
    "make_toral_automorphism",
    "max_separated_exact",
    "max_separated_greedy",
    "oracle_entropy",
    "patch_partition",
    "sample_environment",
    "sep_entropy_rate",
    "shannon_entropy",
    "shift_environment",
    "skew_step",
    "spanning_number",
    "variational_report",
]
