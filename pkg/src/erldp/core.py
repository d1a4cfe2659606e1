"""Size configurations of a graph on N vertices and their empirical measures.

A configuration is stored only through its component sizes, as a histogram
``l_k = #{components of size k}``.  From a histogram three views are taken:

* the microscopic measure ``lambda_k = l_k / N`` for ``k <= R``;
* the macroscopic point measure with one atom ``S_i / N`` per component of
  size at least ``ceil(eps * N)``;
* the mesoscopic mass, the fraction of vertices in the open band
  ``R < k < eps * N``.

With these boundary conventions the three masses add up to one exactly.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

MASS_TOL = 1e-12


class SizeHistogram:
    """Counts of components by size, ``{k: l_k}`` with ``sum k*l_k = N``.

    Zero counts are never stored.  Instances are immutable and hashable, so
    they can key probability tables.
    """

    __slots__ = ("_items", "_n")

    def __init__(self, counts: Mapping[int, int], n_vertices: int | None = None):
        items = []
        for k, c in counts.items():
            k, c = int(k), int(c)
            if k < 1:
                raise ValueError(f"component size must be positive, got {k}")
            if c < 0:
                raise ValueError(f"count for size {k} is negative")
            if c:
                items.append((k, c))
        items.sort()
        n = sum(k * c for k, c in items)
        if n_vertices is not None and n != n_vertices:
            raise ValueError(f"sizes sum to {n}, expected N={n_vertices}")
        if n < 1:
            raise ValueError("histogram must contain at least one vertex")
        self._items = tuple(items)
        self._n = n

    @property
    def n_vertices(self) -> int:
        return self._n

    @property
    def counts(self) -> dict[int, int]:
        return dict(self._items)

    def items(self) -> tuple[tuple[int, int], ...]:
        return self._items

    def get(self, k: int) -> int:
        for size, c in self._items:
            if size == k:
                return c
        return 0

    @property
    def n_components(self) -> int:
        return sum(c for _, c in self._items)

    @property
    def largest(self) -> int:
        return self._items[-1][0]

    def sizes(self) -> list[int]:
        """Component sizes in descending order."""
        out = []
        for k, c in reversed(self._items):
            out.extend([k] * c)
        return out

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self._items)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SizeHistogram):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {c}" for k, c in self._items)
        return f"SizeHistogram({{{body}}}, N={self._n})"


@dataclass(frozen=True)
class MicroMeasure:
    """Truncated sequence ``(lambda_1, ..., lambda_K)``; entries past K are zero."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise ValueError("truncation K must be positive")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        mass = float(np.dot(np.arange(1, w.size + 1), w))
        if mass > 1 + MASS_TOL:
            raise ValueError(f"sum k*lambda_k = {mass!r} exceeds 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zeros(cls, K: int) -> "MicroMeasure":
        return cls(np.zeros(K))

    @classmethod
    def from_pairs(cls, pairs: Mapping[int, float], K: int | None = None) -> "MicroMeasure":
        if K is None:
            K = max(pairs) if pairs else 1
        w = np.zeros(K)
        for k, v in pairs.items():
            if not 1 <= k <= K:
                raise ValueError(f"index {k} outside 1..{K}")
            w[k - 1] = v
        return cls(w)

    @property
    def truncation(self) -> int:
        return self.weights.size

    def __getitem__(self, k: int) -> float:
        """``lambda_k`` with 1-based k; zero past the truncation."""
        if k < 1:
            raise IndexError(k)
        return float(self.weights[k - 1]) if k <= self.weights.size else 0.0


@dataclass(frozen=True)
class MacroMeasure:
    """Finite point measure on (0, 1], atoms kept with multiplicity, descending."""

    atoms: tuple[float, ...] = field(default=())

    def __post_init__(self):
        atoms = tuple(sorted((float(a) for a in self.atoms), reverse=True))
        for a in atoms:
            if not 0 < a <= 1:
                raise ValueError(f"atom {a!r} not in (0, 1]")
        if sum(atoms) > 1 + MASS_TOL:
            raise ValueError(f"atoms sum to {sum(atoms)!r} > 1")
        object.__setattr__(self, "atoms", atoms)

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class MesoCutoffs:
    R: int
    eps: float

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("R must be a positive integer")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")

    def check(self, n_vertices: int) -> None:
        if not self.R < self.eps * n_vertices:
            raise ValueError(
                f"cutoffs need R < eps*N, got R={self.R}, eps*N={self.eps * n_vertices}"
            )

    @classmethod
    def cube_root(cls, n_vertices: int) -> "MesoCutoffs":
        """``R_N = ceil(N^(1/3))``, ``eps_N = N^(-1/3)``."""
        return cls(math.ceil(round(n_vertices ** (1 / 3), 12)), n_vertices ** (-1 / 3))


def macro_threshold(eps: float, n_vertices: int) -> int:
    """Smallest macroscopic size, ``ceil(eps*N)`` with a guard against 0.1*30 = 3.0000000000000004."""
    return max(1, math.ceil(eps * n_vertices - 1e-9))


def histogram_from_sizes(sizes: Iterable[int]) -> SizeHistogram:
    sizes = list(sizes)
    if not sizes:
        raise ValueError("need at least one component size")
    return SizeHistogram(Counter(sizes))


def micro_measure(h: SizeHistogram, R: int) -> MicroMeasure:
    w = np.zeros(R)
    for k, c in h:
        if k <= R:
            w[k - 1] = c / h.n_vertices
    return MicroMeasure(w)


def macro_measure(h: SizeHistogram, eps: float) -> MacroMeasure:
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    n = h.n_vertices
    kmin = macro_threshold(eps, n)
    atoms = []
    for k, c in h:
        if k >= kmin:
            atoms.extend([k / n] * c)
    return MacroMeasure(tuple(atoms))


def meso_mass(h: SizeHistogram, cut: MesoCutoffs) -> float:
    n = h.n_vertices
    cut.check(n)
    kmax = macro_threshold(cut.eps, n)
    return sum(k * c for k, c in h if cut.R < k < kmax) / n


def total_mass_micro(lam: MicroMeasure) -> float:
    return float(np.dot(np.arange(1, lam.truncation + 1), lam.weights))


def total_mass_macro(alpha: MacroMeasure) -> float:
    return float(sum(alpha.atoms))


def micro_distance(lam: MicroMeasure, other: MicroMeasure, R: int) -> float:
    """Cut-off weighted l1 distance ``sum_{k<=R} 2^-k |lambda_k - lambda~_k|``."""
    a = _padded(lam.weights, R)
    b = _padded(other.weights, R)
    return float(np.sum(np.ldexp(np.abs(a - b), -np.arange(1, R + 1))))


def macro_distance(alpha: MacroMeasure, other: MacroMeasure, eps: float) -> float:
    n = max(len(alpha.atoms), len(other.atoms))
    a = np.array(alpha.atoms + (0.0,) * (n - len(alpha.atoms)))
    b = np.array(other.atoms + (0.0,) * (n - len(other.atoms)))
    keep = np.maximum(a, b) >= eps
    return float(np.sum(np.ldexp(np.abs(a - b), -np.arange(1, n + 1))[keep]))


def _padded(w: np.ndarray, R: int) -> np.ndarray:
    out = np.zeros(R)
    m = min(R, w.size)
    out[:m] = w[:m]
    return out


def expand_sizes(h: SizeHistogram) -> list[int]:
    """Ascending list of component sizes; inverse of :func:`histogram_from_sizes`."""
    return sorted(h.sizes())


__all__: Sequence[str] = [
    "SizeHistogram",
    "MicroMeasure",
    "MacroMeasure",
    "MesoCutoffs",
    "histogram_from_sizes",
    "micro_measure",
    "macro_measure",
    "meso_mass",
    "total_mass_micro",
    "total_mass_macro",
    "micro_distance",
    "macro_distance",
    "macro_threshold",
    "expand_sizes",
    "NumericalError",
]


class NumericalError(ArithmeticError):
    """A numeric routine failed to reach its target (underflowed step, no bracket, ...)."""
