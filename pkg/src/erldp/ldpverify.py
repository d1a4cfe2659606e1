"""Finite-N witnesses for the rate functions.

``recovery_sequence`` builds, for a target ``(lam, alpha)``, an explicit size
histogram on N vertices whose micro and macro views approach the target:

* ``l_k = floor(lam_k N)`` for ``2 <= k < R``,
* ``l_R = floor((1 - c_lam - c_alpha) N / R)`` carries the free mass in
  components of the cutoff size,
* each atom ``x`` becomes one component of size ``k = ceil(xN)`` when
  ``k > R`` (atoms sharing a cell add up),
* ``l_1`` absorbs the rest.

``rate_convergence`` evaluates ``-(1/N) log P`` of those histograms exactly
and compares with the joint rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy import optimize

from .connectivity import DEFAULT_PRECISION, PrecisionConfig
from .core import (
    MacroMeasure,
    MesoCutoffs,
    MicroMeasure,
    SizeHistogram,
    total_mass_macro,
    total_mass_micro,
)
from .exactdist import log_prob_config
from .ratefn import MASS_EXCESS_TOL, macro_integrand, rate_joint, rate_meso

EXACT_MAX_N = 1000  # cost guard: the connectivity table is O(N^2) multiprecision products


def cube_root_cutoff(n_vertices: int) -> int:
    return MesoCutoffs.cube_root(n_vertices).R


@dataclass(frozen=True)
class RecoveryTarget:
    micro: MicroMeasure
    macro: MacroMeasure = field(default_factory=MacroMeasure)
    cutoff: Callable[[int], int] = cube_root_cutoff

    def __post_init__(self):
        if self.free_mass < -MASS_EXCESS_TOL:
            raise ValueError(
                f"micro mass {total_mass_micro(self.micro):.6g} + macro mass "
                f"{total_mass_macro(self.macro):.6g} exceeds 1"
            )

    @property
    def free_mass(self) -> float:
        return 1.0 - total_mass_micro(self.micro) - total_mass_macro(self.macro)

    def rate(self, t: float) -> float:
        return rate_joint(self.micro, self.macro, t)


class TargetTooLarge(ValueError):
    """The target needs more vertices than N provides."""


def macro_cell(x: float, n_vertices: int) -> int:
    """Index k with ``x`` in ``((k-1)/N, k/N]``."""
    return max(1, math.ceil(x * n_vertices - 1e-9))


def recovery_sequence(target: RecoveryTarget, n_vertices: int) -> SizeHistogram:
    N = n_vertices
    R = target.cutoff(N)
    if R < 2:
        raise ValueError(f"cutoff R={R} must be at least 2")
    counts: dict[int, int] = {}
    for k in range(2, min(R, target.micro.truncation + 1)):
        c = math.floor(target.micro[k] * N)
        if c:
            counts[k] = c
    counts[R] = counts.get(R, 0) + math.floor(max(0.0, target.free_mass) * N / R)
    for x in target.macro.atoms:
        k = macro_cell(x, N)
        if k > R:
            counts[k] = counts.get(k, 0) + 1
    used = sum(k * c for k, c in counts.items())
    ones = N - used
    if ones < 0:
        raise TargetTooLarge(f"N={N} too small for target: {used} vertices needed beyond singletons")
    counts[1] = ones
    return SizeHistogram(counts, n_vertices=N)


@dataclass(frozen=True)
class ConvergenceRow:
    n_vertices: int
    neg_log_prob: float  # -(1/N) log P(A_N(l^(N)))
    rate: float
    gap: float


def rate_convergence(
    target: RecoveryTarget,
    t: float,
    n_list: Sequence[int],
    prec: PrecisionConfig = DEFAULT_PRECISION,
) -> list[ConvergenceRow]:
    """Exact ``-(1/N) log P`` of the recovery histograms at ``p = t/N``."""
    if not t > 0:
        raise ValueError("t must be positive")
    rate = target.rate(t)
    if math.isinf(rate):
        raise ValueError("target has infinite rate")
    for N in n_list:
        if N > EXACT_MAX_N:
            raise ValueError(f"N={N} above the exact-evaluation limit {EXACT_MAX_N}")
        if N <= t:
            raise ValueError(f"N={N} must exceed t so that p = t/N < 1")
    rows = []
    for N in n_list:
        h = recovery_sequence(target, N)
        lp = log_prob_config(h, t / N, prec)
        v = -lp / N
        rows.append(ConvergenceRow(N, v, rate, abs(v - rate)))
    return rows


# --------------------------------------------------------------------------
# Mesoscopic total mass by direct minimization


def _micro_floor(x: float, t: float) -> float:
    """Least entropy cost of micro mass ``x``: ``x(log tx - tx/2) + 1/(2t)`` below ``1/t``, else 0."""
    if x >= 1 / t:
        return 0.0
    if x <= 0:
        return 1 / (2 * t)
    return x * (math.log(t * x) - t * x / 2) + 1 / (2 * t)


def meso_objective(x: float, c: float, t: float) -> float:
    """Joint rate of micro mass ``x``, meso mass ``c`` and one giant of the rest."""
    m = max(0.0, 1 - c - x)
    return (
        _micro_floor(x, t)
        + (c + x) * (t / 2 - math.log(t))
        - 1 / (2 * t)
        + float(macro_integrand(m, t))
    )


@dataclass(frozen=True)
class MesoMinimum:
    value: float
    micro_mass: float
    closed_form: float

    @property
    def discrepancy(self) -> float:
        return abs(self.value - self.closed_form)


def meso_displacement_rate(c: float, t: float) -> MesoMinimum:
    """Minimize over the micro mass ``x`` in ``[0, 1-c]`` with the remaining
    ``1-c-x`` in a single giant, and compare with ``rate_meso``."""
    if not 0 <= c <= 1:
        raise ValueError("c must lie in [0, 1]")
    if not t > 0:
        raise ValueError("t must be positive")
    top = 1 - c

    def obj(x):
        return meso_objective(x, c, t)

    # the micro floor changes formula at 1/t, so search each piece separately
    knots = sorted({0.0, min(1 / t, top), top})
    cands = [(obj(x), x) for x in knots]
    for lo, hi in zip(knots, knots[1:]):
        if hi - lo > 0:
            res = optimize.minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
            cands.append((float(res.fun), float(res.x)))
    value, x = min(cands)
    return MesoMinimum(value, x, rate_meso(c, t))
