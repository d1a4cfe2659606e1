"""Probability that G(k, p) is connected.

``mu_exact`` runs the first-component recursion

    mu_k = 1 - sum_{j=1}^{k-1} C(k-1, j-1) mu_j (1-p)^{j(k-j)}

in multiprecision.  The subtraction cancels almost everything once ``mu_k``
is tiny, and errors in earlier entries are amplified by the same amount, so
the working precision is the requested number of significant bits plus
twice the bit-size of the smallest tree lower bound up to ``k`` (plus a
fixed margin).  That guard is computed before the recursion runs.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath

GUARD_MARGIN_BITS = 64


@dataclass(frozen=True)
class PrecisionConfig:
    """Number of significant bits wanted from multiprecision paths."""

    bits: int = 256

    def __post_init__(self):
        if self.bits < 53:
            raise ValueError("precision below double (53 bits) is not supported")


DEFAULT_PRECISION = PrecisionConfig()


def _as_fraction(p) -> Fraction:
    if isinstance(p, Fraction):
        f = p
    elif isinstance(p, int):
        f = Fraction(p)
    else:
        f = Fraction(float(p))
    if not 0 <= f <= 1:
        raise ValueError(f"p must lie in [0, 1], got {float(f)!r}")
    return f


def _xlog(a: float, x: float) -> float:
    """``a*log(x)`` with ``0*log(0) = 0``."""
    if a == 0:
        return 0.0
    return a * math.log(x) if x > 0 else -math.inf


def mu_bounds_tree(k: int, p: float) -> tuple[float, float]:
    """Log of the spanning-tree bracket for ``mu_k(p)``.

    ``k^(k-2) p^(k-1) (1-p)^((k-1)(k-2)/2) <= mu_k(p) <= k^(k-2) p^(k-1)``
    """
    if k < 1:
        raise ValueError("k must be positive")
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    upper = (k - 2) * math.log(k) + _xlog(k - 1, p)
    e = (k - 1) * (k - 2) / 2
    if e == 0:
        lower = upper
    elif p == 1:
        lower = -math.inf
    else:
        lower = upper + e * math.log1p(-p)
    return lower, upper


def mu_upper_macro(k: int, p: float) -> float:
    """``(k-1) * log(1 - (1-p)^k)``, the log of an upper bound on ``mu_k(p)``."""
    if k < 1:
        raise ValueError("k must be positive")
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if k == 1:
        return 0.0
    return (k - 1) * math.log(-math.expm1(k * math.log1p(-p)))


def mu_macro_asymptotic(x: float, t: float, N: int) -> float:
    """Log of the large-N approximation of ``mu_{xN}(t/N)``:

    ``(1 - xt/(e^{xt}-1)) * (1 - e^{-tx})^{xN}``.
    """
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    if t <= 0:
        raise ValueError("t must be positive")
    xt = x * t
    prefactor = 1.0 - xt / math.expm1(xt)
    return math.log(prefactor) + x * N * math.log(-math.expm1(-xt))


def _guard_bits(k: int, p: Fraction) -> int:
    pf = float(p)
    if pf == 0.0 or pf == 1.0:
        return 0
    worst = 0.0
    for j in range(2, k + 1):
        lower, _ = mu_bounds_tree(j, pf)
        worst = min(worst, lower)
    return int(math.ceil(-2.0 * worst / math.log(2)))


class _MuTable:
    """Growing memo of ``mu_1..mu_k`` for one ``(p, bits)`` pair."""

    def __init__(self, p: Fraction, bits: int):
        self.p = p
        self.bits = bits
        self.work = 0
        self.values: list = []  # values[k-1] = mu_k
        self.lock = threading.Lock()

    def get(self, k: int) -> list:
        with self.lock:
            need = self.bits + GUARD_MARGIN_BITS + _guard_bits(k, self.p)
            if need > self.work:
                # grow geometrically so an increasing sequence of k does not
                # rebuild the table at every step
                self.values = []
                self.work = max(need, self.work + self.work // 2)
            if len(self.values) < k:
                self._extend(k)
            return self.values[:k]

    def _extend(self, k: int) -> None:
        with mpmath.workprec(self.work):
            p = mpmath.mpf(self.p.numerator) / self.p.denominator
            q = 1 - p
            vals = self.values
            if not vals:
                vals.append(mpmath.mpf(1))
            n0 = len(vals) + 1
            qpow = [q ** j for j in range(k + 1)]
            for n in range(n0, k + 1):
                s = mpmath.mpf(0)
                for j in range(1, n):
                    s += mpmath.mpf(math.comb(n - 1, j - 1)) * vals[j - 1] * qpow[j] ** (n - j)
                vals.append(1 - s)


_tables: dict[tuple[Fraction, int], _MuTable] = {}
_tables_lock = threading.Lock()


def _table(p, prec: PrecisionConfig) -> _MuTable:
    key = (_as_fraction(p), prec.bits)
    with _tables_lock:
        tab = _tables.get(key)
        if tab is None:
            tab = _tables[key] = _MuTable(*key)
        return tab


def mu_table_mp(k: int, p, prec: PrecisionConfig = DEFAULT_PRECISION) -> tuple[list, int]:
    """``[mu_1, ..., mu_k]`` as mpmath numbers plus the working precision used."""
    if k < 1:
        raise ValueError("k must be positive")
    tab = _table(p, prec)
    vals = tab.get(k)
    return vals, tab.work


def mu_exact(k: int, p, prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    """Probability that G(k, p) is connected, rounded to a double.

    Accepts ``p`` as a float or :class:`fractions.Fraction`; floats are
    used at their exact binary value.
    """
    vals, _ = mu_table_mp(k, p, prec)
    v = vals[k - 1]
    return float(min(max(v, 0), 1))


def log_mu_exact(k: int, p, prec: PrecisionConfig = DEFAULT_PRECISION):
    """Natural log of ``mu_k(p)`` as an mpmath number (``-inf`` when zero)."""
    vals, work = mu_table_mp(k, p, prec)
    with mpmath.workprec(work):
        v = vals[k - 1]
        return mpmath.log(v) if v > 0 else mpmath.ninf


def clear_cache() -> None:
    with _tables_lock:
        _tables.clear()
