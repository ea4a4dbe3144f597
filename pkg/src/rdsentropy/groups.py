"""Acting groups (Z and Z^2) and their Folner box windows.

Group elements are plain integer tuples; composition is coordinate-wise
addition, the identity is the zero tuple, inversion is negation. Box
windows [0, n)^d are the standard Folner sequence for Z^d: the translation
defect |gF symdiff F| / |F| of a generator decays like 2/n.

Window elements are kept in lexicographic order so that every sweep,
solver and Monte Carlo aggregation downstream is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import ConfigError

GroupElement = tuple[int, ...]


def identity(dim: int) -> GroupElement:
    return (0,) * dim


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """Coordinate-wise sum of two elements of the same Z^d."""
    if len(g) != len(h):
        raise ConfigError(f"dimension mismatch: {len(g)} vs {len(h)}")
    return tuple(a + b for a, b in zip(g, h))


def inverse(g: GroupElement) -> GroupElement:
    return tuple(-a for a in g)


@dataclass(frozen=True)
class FolnerWindow:
    """A finite subset of Z^d with a deterministic iteration order."""

    elements: tuple[GroupElement, ...]
    index_n: int
    kind: str = "box"

    def __post_init__(self) -> None:
        if not self.elements:
            raise ConfigError("window must be nonempty")
        if len(set(self.elements)) != len(self.elements):
            raise ConfigError("window elements must be distinct")
        if tuple(sorted(self.elements)) != self.elements:
            raise ConfigError("window elements must be in lexicographic order")

    @property
    def dim(self) -> int:
        return len(self.elements[0])

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, g: GroupElement) -> bool:
        return g in self.elements

    def translate(self, g: GroupElement) -> tuple[GroupElement, ...]:
        return tuple(compose(g, f) for f in self.elements)

    def scalars(self) -> tuple[int, ...]:
        """Window elements as bare integers (one-dimensional windows only)."""
        if self.dim != 1:
            raise ConfigError("scalars() requires a one-dimensional window")
        return tuple(e[0] for e in self.elements)


def folner_box(dim: int, n: int) -> FolnerWindow:
    """The box window [0, n)^d in lexicographic order, size n**d."""
    if dim not in (1, 2):
        raise ConfigError(f"dim must be 1 or 2, got {dim}")
    if n < 1:
        raise ConfigError(f"window index n must be >= 1, got {n}")
    elements = tuple(sorted(product(range(n), repeat=dim)))
    return FolnerWindow(elements=elements, index_n=n, kind="box")


def folner_defect(window: FolnerWindow, g: GroupElement) -> Fraction:
    """Exact translation defect |gF symdiff F| / |F|."""
    base = set(window.elements)
    shifted = set(window.translate(g))
    return Fraction(len(base.symmetric_difference(shifted)), len(base))
