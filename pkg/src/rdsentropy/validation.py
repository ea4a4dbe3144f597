"""Input validation helpers in the scikit-learn ``check_*`` style.

Each helper returns the cleaned value or raises ConfigError naming the
offending field, which the CLI maps to exit code 1.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def check_window_sizes(n_list) -> tuple[int, ...]:
    try:
        out = tuple(int(n) for n in n_list)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"n_list must be integers, got {n_list!r}") from exc
    if not out or out[0] < 1 or any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"n_list must be strictly increasing positive integers, got {out}")
    return out


def check_epsilons(eps_list, resolution: float | None = None) -> tuple[float, ...]:
    try:
        out = tuple(float(e) for e in eps_list)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"eps_list must be real numbers, got {eps_list!r}") from exc
    if not out or out[-1] <= 0 or any(b >= a for a, b in zip(out, out[1:])):
        raise ConfigError(f"eps_list must be strictly decreasing positive reals, got {out}")
    if resolution is not None:
        guard = 4.0 * resolution
        bad = [e for e in out if e <= guard]
        if bad:
            raise ConfigError(
                f"eps values {bad} violate the scale guard eps > 4 * grid resolution ({guard!r})"
            )
    return out


def check_omega_samples(value) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"omega_samples must be an integer, got {value!r}") from exc
    if out < 1:
        raise ConfigError(f"omega_samples must be >= 1, got {out}")
    return out


def check_seed(value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an integer, got {value!r}") from exc


def check_method(value) -> str:
    if value not in ("exact", "greedy"):
        raise ConfigError(f"method must be 'exact' or 'greedy', got {value!r}")
    return value


def check_workers(value) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"workers must be an integer, got {value!r}") from exc
    if out < 1:
        raise ConfigError(f"workers must be >= 1, got {out}")
    return out


def check_system(obj):
    for attr in ("name", "fiber_size", "cocycle", "metric", "sample_environment", "resolution"):
        if not hasattr(obj, attr):
            raise ConfigError(f"not a model system (missing {attr!r}): {obj!r}")
    return obj


def check_probability_vector(p, tol: float = 1e-9) -> np.ndarray:
    import math

    arr = np.asarray(p, dtype=float).ravel()
    if arr.size == 0:
        raise ConfigError("probability vector must be nonempty")
    if float(arr.min()) < 0:
        raise ConfigError("probability vector must be nonnegative")
    total = math.fsum(arr.tolist())
    if abs(total - 1.0) > tol:
        raise ConfigError(f"probability vector must sum to 1 within {tol}, got {total!r}")
    return arr
