"""Seeded environment paths: the driving randomness of the bundle.

An environment path assigns one symbol from a finite law to every site of
Z^d. The field is i.i.d. in distribution but computed as a pure function
of (seed, site), so a path can be evaluated on any bounded region, shifted
exactly, and shared between workers with no state.

Seed handling uses SplitMix64: the per-sample seed for Monte Carlo sample
``i`` is the i-th output of the SplitMix64 stream started at the master
seed. Per-site values hash the path seed together with the site
coordinates through the same finalizer. Symbols are then chosen by
comparing the 64-bit site value against integer thresholds precomputed
from the exact (Fraction) cumulative weights, so symbol draws never touch
floating point.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError
from .groups import GroupElement, compose

_M64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # SplitMix64 stream increment


def mix64(x: int) -> int:
    """SplitMix64 finalizer (Steele, Lea & Flood's published constants)."""
    x &= _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def derive_sample_seed(master_seed: int, sample_index: int) -> int:
    """The sample_index-th output of the SplitMix64 stream at master_seed."""
    if sample_index < 0:
        raise ConfigError(f"sample_index must be >= 0, got {sample_index}")
    return mix64((master_seed + (sample_index + 1) * _GAMMA) & _M64)


@dataclass(frozen=True)
class SymbolLaw:
    """A discrete distribution over a finite symbol set.

    ``thresholds[i]`` is the exclusive upper bound of symbol i's slice of
    [0, 2**64); a site value r selects the first symbol whose threshold
    exceeds r.
    """

    symbols: tuple[int, ...]
    weights: tuple[Fraction, ...]
    thresholds: tuple[int, ...] = field(repr=False, compare=False, default=())

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ConfigError("law needs at least one symbol")
        if len(self.symbols) != len(self.weights):
            raise ConfigError("symbols and weights must have equal length")
        if len(set(self.symbols)) != len(self.symbols):
            raise ConfigError("symbols must be distinct")
        if any(w < 0 for w in self.weights):
            raise ConfigError("weights must be nonnegative")
        total = sum(self.weights)
        if total == 0:
            raise ConfigError("weights must not all vanish")
        if total != 1:
            object.__setattr__(
                self, "weights", tuple(w / total for w in self.weights)
            )
        cum = Fraction(0)
        thresholds = []
        for w in self.weights:
            cum += w
            thresholds.append((cum.numerator * (1 << 64)) // cum.denominator)
        thresholds[-1] = 1 << 64
        object.__setattr__(self, "thresholds", tuple(thresholds))

    @classmethod
    def from_weights(cls, pairs) -> "SymbolLaw":
        symbols = tuple(int(s) for s, _ in pairs)
        weights = tuple(Fraction(w) for _, w in pairs)
        return cls(symbols=symbols, weights=weights)

    @classmethod
    def uniform(cls, symbols) -> "SymbolLaw":
        symbols = tuple(int(s) for s in symbols)
        return cls(symbols=symbols, weights=(Fraction(1, len(symbols)),) * len(symbols))

    @classmethod
    def point_mass(cls, symbol: int) -> "SymbolLaw":
        return cls(symbols=(int(symbol),), weights=(Fraction(1),))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(s for s, w in zip(self.symbols, self.weights) if w > 0)

    def pick(self, r: int) -> int:
        return self.symbols[bisect_right(self.thresholds, r)]


@dataclass(frozen=True)
class EnvironmentPath:
    """One realization of the driving randomness, evaluable anywhere.

    Shifting adds to ``base_offset``, which gives exact equivariance:
    ``path.shift(h).symbol_at(g) == path.symbol_at(compose(h, g))``.
    """

    seed: int
    law: SymbolLaw
    base_offset: GroupElement = (0,)

    @property
    def dim(self) -> int:
        return len(self.base_offset)

    def symbol_at(self, g: GroupElement) -> int:
        site = compose(self.base_offset, g)
        h = self.seed & _M64
        for c in site:
            h = mix64(h ^ (c & _M64))
        return self.law.pick(h)

    def shift(self, h: GroupElement) -> "EnvironmentPath":
        return EnvironmentPath(
            seed=self.seed, law=self.law, base_offset=compose(self.base_offset, h)
        )


def sample_environment(
    master_seed: int, sample_index: int, law: SymbolLaw, dim: int = 1
) -> EnvironmentPath:
    """Deterministic i.i.d. environment sample: index fully determines the path."""
    seed = derive_sample_seed(master_seed, sample_index)
    return EnvironmentPath(seed=seed, law=law, base_offset=(0,) * dim)


def shift_environment(h: GroupElement, omega: EnvironmentPath) -> EnvironmentPath:
    return omega.shift(h)
