"""Exact finite-N law of the component-size histogram of G(N, p).

For a histogram ``l`` with ``sum k l_k = N``::

    P(A_N(l)) = N! prod_k mu_k(p)^{l_k} (1-p)^{k(N-k) l_k / 2} / (k!^{l_k} l_k!)

Everything is evaluated in log space at multiprecision and only rounded to
a double at the end.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import mpmath

from .connectivity import DEFAULT_PRECISION, PrecisionConfig, _as_fraction, mu_table_mp
from .core import SizeHistogram
from .simulate import DisjointSet

ORACLE_MAX_N = 7
NORMALIZE_MAX_N = 60


class _LogProbEvaluator:
    """Per-size coefficients ``log mu_k - log k! + k(N-k)/2 log(1-p)`` for fixed (N, p)."""

    def __init__(self, N: int, p, prec: PrecisionConfig):
        self.N = N
        mus, work = mu_table_mp(N, p, prec)
        self.work = work
        pf = _as_fraction(p)
        with mpmath.workprec(work):
            pm = mpmath.mpf(pf.numerator) / pf.denominator
            log_q = mpmath.log1p(-pm) if pf < 1 else mpmath.ninf
            self.log_nfact = mpmath.loggamma(N + 1)
            self.coef = [None]
            for k in range(1, N + 1):
                mu = mus[k - 1]
                if mu <= 0:
                    self.coef.append(mpmath.ninf)
                    continue
                e = k * (N - k)
                sep = mpmath.mpf(0) if e == 0 else (e * log_q) / 2
                self.coef.append(mpmath.log(mu) - mpmath.loggamma(k + 1) + sep)
            self._logfact = [mpmath.mpf(0)]
            for m in range(1, N + 1):
                self._logfact.append(self._logfact[-1] + mpmath.log(m))

    def log_prob(self, h: SizeHistogram):
        if h.n_vertices != self.N:
            raise ValueError(f"histogram has N={h.n_vertices}, evaluator has N={self.N}")
        with mpmath.workprec(self.work):
            total = self.log_nfact
            for k, c in h:
                a = self.coef[k]
                if a == mpmath.ninf:
                    return mpmath.ninf
                total += c * a - self._logfact[c]
            return total


@lru_cache(maxsize=64)
def _evaluator(N: int, p: Fraction, bits: int) -> _LogProbEvaluator:
    return _LogProbEvaluator(N, p, PrecisionConfig(bits))


def log_prob_config_mp(h: SizeHistogram, p, prec: PrecisionConfig = DEFAULT_PRECISION):
    return _evaluator(h.n_vertices, _as_fraction(p), prec.bits).log_prob(h)


def log_prob_config(h: SizeHistogram, p, prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    """Natural log of ``P(A_N(l))``; ``-inf`` when the configuration is impossible."""
    v = log_prob_config_mp(h, p, prec)
    return -math.inf if v == mpmath.ninf else float(v)


def _partitions(n: int, max_part: int) -> Iterator[list[tuple[int, int]]]:
    """Partitions of n into parts <= max_part as (part, multiplicity) lists,
    largest part first, in reverse-lexicographic order."""
    if n == 0:
        yield []
        return
    for k in range(min(n, max_part), 0, -1):
        for m in range(n // k, 0, -1):
            for rest in _partitions(n - m * k, k - 1):
                yield [(k, m)] + rest


def enumerate_histograms(N: int) -> Iterator[SizeHistogram]:
    """Stream every integer partition of N exactly once, as a histogram."""
    if N < 1:
        raise ValueError("N must be positive")
    for parts in _partitions(N, N):
        yield SizeHistogram(dict(parts))


@lru_cache(maxsize=8)
def _edge_count_table(N: int) -> dict[SizeHistogram, tuple[int, ...]]:
    """For every histogram, the number of edge subsets with m edges producing it."""
    edges = list(itertools.combinations(range(N), 2))
    E = len(edges)
    table: dict[SizeHistogram, list[int]] = {}
    for mask in range(1 << E):
        ds = DisjointSet(N)
        m = 0
        bits = mask
        i = 0
        while bits:
            if bits & 1:
                u, v = edges[i]
                ds.union(u, v)
                m += 1
            bits >>= 1
            i += 1
        h = SizeHistogram(ds.size_histogram())
        row = table.get(h)
        if row is None:
            row = table[h] = [0] * (E + 1)
        row[m] += 1
    return {h: tuple(row) for h, row in table.items()}


def exhaustive_oracle(N: int, p) -> dict[SizeHistogram, float | Fraction]:
    """Brute-force law of the size histogram over all graphs on N <= 7 vertices.

    A :class:`Fraction` ``p`` gives exact rational masses, anything else
    gives doubles.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if N > ORACLE_MAX_N:
        raise ValueError(f"exhaustive enumeration limited to N <= {ORACLE_MAX_N}")
    exact = isinstance(p, Fraction)
    if exact:
        if not 0 <= p <= 1:
            raise ValueError("p must lie in [0, 1]")
        one = Fraction(1)
    else:
        p = float(p)
        if not 0 <= p <= 1:
            raise ValueError("p must lie in [0, 1]")
        one = 1.0
    E = N * (N - 1) // 2
    weights = [p ** m * (one - p) ** (E - m) for m in range(E + 1)]
    out = {}
    for h, row in _edge_count_table(N).items():
        out[h] = sum(c * w for c, w in zip(row, weights) if c)
    return out


def verify_normalization(N: int, p, prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    """``|log sum_l P(A_N(l))|`` over all partitions of N; zero in exact arithmetic."""
    if N > NORMALIZE_MAX_N:
        raise ValueError(f"normalization limited to N <= {NORMALIZE_MAX_N}")
    ev = _evaluator(N, _as_fraction(p), prec.bits)
    with mpmath.workprec(ev.work):
        total = mpmath.mpf(0)
        for h in enumerate_histograms(N):
            lp = ev.log_prob(h)
            if lp != mpmath.ninf:
                total += mpmath.exp(lp)
        return float(abs(mpmath.log(total)))
