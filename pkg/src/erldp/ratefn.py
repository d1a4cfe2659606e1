"""Rate functions for the component-size statistics of G(N, t/N).

Micro measures ``lam`` carry weights ``lam_k`` (k = 1..K), macro measures
carry atoms ``x_j`` in (0, 1].  Rates are plain floats; ``math.inf`` marks an
infeasible configuration.  ``0 * log 0`` is taken as 0 throughout.

Total-mass rates are named after the mass they constrain:

* ``rate_micro_mass(c, t)``: the cheapest way to put mass ``c`` in finite
  components.  Its zero is at ``c = 1`` for ``t <= 1`` and at
  ``c = beta_t(t)`` above.
* ``rate_macro_mass(m, t) = rate_micro_mass(1 - m, t)``.
* ``rate_meso(c, t)``: cost of mass ``c`` in intermediate-size components.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .core import MacroMeasure, MicroMeasure, NumericalError, total_mass_macro, total_mass_micro

MASS_EXCESS_TOL = 1e-9
BETA_LOWER = 1e-15
PHASE_GAP = 1e-4

RateValue = float


def _check_t(t: float) -> None:
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")


def _check_mass(c: float) -> None:
    if not 0 <= c <= 1:
        raise ValueError(f"mass must lie in [0, 1], got {c!r}")


# --------------------------------------------------------------------------
# Borel distribution and the micro minimizer


def log_borel_pmf(mu: float, k):
    """``log Bo_mu(k)`` with ``Bo_mu(k) = e^{-mu k} (mu k)^{k-1} / k!``."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise ValueError("k must be >= 1")
    # xlogy gives 0 for the k = 1 term when mu = 0 (Bo_0 is a point mass at 1)
    out = -mu * k + special.xlogy(k - 1, mu * k) - special.gammaln(k + 1)
    return out if out.ndim else float(out)


def borel_pmf(mu: float, k):
    """Borel probability mass at ``k`` (scalar or array)."""
    return np.exp(log_borel_pmf(mu, k))


def _envelope_sum(r: float, K: int, power: float) -> float:
    """Upper bound on ``sum_{k>K} r^k k^{-power}`` for ``0 <= r <= 1``."""
    head = r ** (K + 1)
    zeta_bound = head * float(special.zeta(power, K + 1))
    if r < 1:
        return min(zeta_bound, head * (K + 1) ** (-power) / (1 - r))
    return zeta_bound


def borel_tail_bound(mu: float, K: int, moment: int = 0) -> float:
    """Bound on ``sum_{k>K} Bo_mu(k) / k^moment``.

    From Stirling, ``Bo_mu(k) <= (mu e^{1-mu})^k k^{-3/2} / (mu sqrt(2 pi))``.
    Needs ``mu`` in (0, 1]; above 1 the ratio ``mu e^{1-mu}`` is again below
    one, so the same bound is valid there too.
    """
    if mu <= 0:
        return 0.0
    r = mu * math.exp(1 - mu)
    r = min(r, 1.0)
    return _envelope_sum(r, K, 1.5 + moment) / (mu * math.sqrt(2 * math.pi))


def log_lambda_star(c: float, t: float, K: int) -> np.ndarray:
    k = np.arange(1, K + 1, dtype=float)
    return math.log(c) + log_borel_pmf(c * t, k) - np.log(k)


def lambda_star(c: float, t: float, K: int) -> MicroMeasure:
    """Micro minimizer at total mass ``c``:
    ``lam_k = k^{k-2} c^k t^{k-1} e^{-ctk} / k!``, i.e. ``k lam_k = c Bo_{ct}(k)``.

    Only for ``c t <= 1`` does the untruncated sequence carry mass ``c``.
    """
    _check_t(t)
    if c < 0:
        raise ValueError("c must be nonnegative")
    if K < 1:
        raise ValueError("K must be positive")
    if c == 0:
        return MicroMeasure.zeros(K)
    if c * t > 1 + 1e-12:
        warnings.warn(
            f"c*t = {c * t:.6g} > 1: the sequence carries less than mass c", RuntimeWarning, stacklevel=2
        )
    return MicroMeasure(np.exp(log_lambda_star(c, t, K)))


@dataclass(frozen=True)
class TailBound:
    """Bounds on what a truncation at K drops from the minimizer sequence."""

    mass: float  # sum_{k>K} k lam_k
    count: float  # sum_{k>K} lam_k


def lambda_star_tail(c: float, t: float, K: int) -> TailBound:
    if c == 0:
        return TailBound(0.0, 0.0)
    mu = c * t
    return TailBound(c * borel_tail_bound(mu, K, 0), c * borel_tail_bound(mu, K, 1))


# --------------------------------------------------------------------------
# Joint rate and its pieces


def _micro_arrays(lam: MicroMeasure) -> tuple[np.ndarray, np.ndarray]:
    w = lam.weights
    k = np.arange(1, w.size + 1, dtype=float)
    return w, k


def rate_micro(lam: MicroMeasure, t: float) -> RateValue:
    """``sum_k lam_k log(k! t lam_k / (e k^{k-2})) + c (1 + t/2 - log t)``."""
    _check_t(t)
    w, k = _micro_arrays(lam)
    log_coef = special.gammaln(k + 1) + math.log(t) - 1 - special.xlogy(k - 2, k)
    s = float(np.sum(special.xlogy(w, w) + w * log_coef))
    c = float(np.dot(k, w))
    return s + c * (1 + t / 2 - math.log(t))


def macro_integrand(x, t: float):
    """``x log(x / (1 - e^{-tx})) + (t/2) x (1 - x)``, zero at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = special.xlogy(x, x) - special.xlogy(x, -np.expm1(-t * x)) + 0.5 * t * x * (1 - x)
    val = np.where(x == 0, 0.0, val)
    return val if val.ndim else float(val)


def macro_slope(x, t: float):
    """``log(x / (1 - e^{-tx})) + (t/2)(1 - x)``: per-unit-mass macro cost, strictly decreasing."""
    x = np.asarray(x, dtype=float)
    return np.log(x) - np.log(-np.expm1(-t * x)) + 0.5 * t * (1 - x)


def rate_macro(alpha: MacroMeasure, t: float) -> RateValue:
    _check_t(t)
    if not alpha.atoms:
        return 0.0
    return float(np.sum(macro_integrand(np.array(alpha.atoms), t)))


def rate_joint(lam: MicroMeasure, alpha: MacroMeasure, t: float) -> RateValue:
    """Joint rate; ``inf`` when the micro and macro masses exceed one."""
    _check_t(t)
    free = 1 - total_mass_micro(lam) - total_mass_macro(alpha)
    if free < -MASS_EXCESS_TOL:
        return math.inf
    return rate_micro(lam, t) + rate_macro(alpha, t) + free * (t / 2 - math.log(t))


def _macro_mass_gap(u: float, c: float, t: float) -> float:
    """``u [log((1 - e^{-ut}) / u) - c t / 2]`` with ``u = 1 - c``; tends to 0 as ``u -> 0``."""
    if u <= 0:
        return 0.0
    return u * (math.log(-math.expm1(-u * t)) - math.log(u) - c * t / 2)


def rate_micro_contracted(lam: MicroMeasure, t: float) -> RateValue:
    """Micro rate with the macro part optimized out (at most one giant)."""
    _check_t(t)
    c = total_mass_micro(lam)
    if c > 1 + MASS_EXCESS_TOL:
        return math.inf
    return rate_micro(lam, t) - _macro_mass_gap(1 - c, c, t)


def rate_macro_contracted(alpha: MacroMeasure, t: float) -> RateValue:
    """Macro rate with the micro part optimized out."""
    _check_t(t)
    ca = total_mass_macro(alpha)
    if ca > 1 + MASS_EXCESS_TOL:
        return math.inf
    free = max(0.0, 1 - ca)
    cap = min(free, 1 / t)
    tail = cap * (math.log(t * cap) - t * cap / 2) if cap > 0 else 0.0
    return rate_macro(alpha, t) + free * (t / 2 - math.log(t)) + tail


def entropy_form(lam: MicroMeasure, t: float) -> RateValue:
    """``sum_k lam_k log(lam_k / p_k) + p_k - lam_k`` against
    ``p_k = k^{k-2} e^{-k} / (t k!)``.  The reference mass past K is added as
    ``1/(2t) - sum_{k<=K} p_k``."""
    _check_t(t)
    w, k = _micro_arrays(lam)
    log_p = special.xlogy(k - 2, k) - k - math.log(t) - special.gammaln(k + 1)
    p = np.exp(log_p)
    body = float(np.sum(special.xlogy(w, w) - w * log_p + p - w))
    tail = max(0.0, 1 / (2 * t) - float(np.sum(p)))
    return body + tail


# --------------------------------------------------------------------------
# Total-mass rates


def rate_meso(c: float, t: float) -> RateValue:
    """Cost of mass ``c`` in mesoscopic components."""
    _check_t(t)
    _check_mass(c)
    u = 1 - c
    head = u * (math.log(u * t) - u * t / 2) if u > 0 else 0.0
    return head + t / 2 - math.log(t)


def rate_micro_mass(c: float, t: float) -> RateValue:
    """Cost of finding total mass ``c`` in finite components."""
    _check_t(t)
    _check_mass(c)
    u = 1 - c
    giant = u * (math.log(u) - math.log(-math.expm1(-t * u))) if u > 0 else 0.0
    if c < 1 / t:
        finite = special.xlogy(c, c) - t * c * c
    else:
        finite = -1 / (2 * t) - t * c * c / 2 - c * math.log(t)
    return t * c + giant + float(finite)


def rate_macro_mass(m: float, t: float) -> RateValue:
    """Cost of total mass ``m`` in macroscopic components."""
    _check_mass(m)
    return rate_micro_mass(1 - m, t)


def beta_residual(beta: float, t: float) -> float:
    return math.log(beta) - t * beta + t


def beta_t(t: float) -> float:
    """Smallest positive root of ``log b = t b - t``; 1 for ``t <= 1``.

    For ``t > 1`` the root sits in ``(0, 1/t)``: bisection there, then a
    couple of Newton steps.
    """
    _check_t(t)
    if t <= 1:
        return 1.0
    lo = min(BETA_LOWER, 0.5 * math.exp(-t))
    hi = 1 / t
    if lo <= 0 or beta_residual(lo, t) >= 0:
        raise NumericalError(f"no bracket for the threshold root at t={t!r}")
    # full relative precision at a root near e^-t needs about 52 + 1.44 t halvings
    beta = optimize.bisect(
        beta_residual, lo, hi, args=(t,), xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000
    )
    for _ in range(3):
        step = beta_residual(beta, t) / (1 / beta - t)
        beta -= step
        if abs(step) <= 1e-17 * beta:
            break
    return beta


def beta_t_fixed_point(t: float, tol: float = 1e-15, max_iter: int = 100_000) -> float:
    """Same root via ``b <- exp(t (b - 1))`` from ``b = 0`` (increases to the smallest root)."""
    _check_t(t)
    if t <= 1:
        return 1.0
    b = 0.0
    for _ in range(max_iter):
        nb = math.exp(t * (b - 1))
        if abs(nb - b) <= tol * nb:
            return nb
        b = nb
    raise NumericalError(f"fixed-point iteration did not settle at t={t!r}")


@dataclass(frozen=True)
class MassMinimum:
    c: float
    value: float
    phase: str  # "subcritical" (argmin 1) or "supercritical" (argmin < 1)


def minimize_micro_mass(t: float, n_grid: int = 1001) -> MassMinimum:
    """Grid scan of ``rate_micro_mass`` over [0, 1] then bounded refinement."""
    _check_t(t)
    grid = np.linspace(0.0, 1.0, n_grid)
    vals = np.array([rate_micro_mass(float(c), t) for c in grid])
    i = int(np.argmin(vals))
    best_c, best_v = float(grid[i]), float(vals[i])
    lo, hi = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, n_grid - 1)])
    res = optimize.minimize_scalar(
        lambda c: rate_micro_mass(c, t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )
    # ties at rounding level go to the grid point, so a flat minimum at c = 1 stays there
    if res.fun < best_v - 4 * np.finfo(float).eps:
        best_c, best_v = float(res.x), float(res.fun)
    phase = "supercritical" if best_c < 1 - PHASE_GAP else "subcritical"
    return MassMinimum(best_c, best_v, phase)
