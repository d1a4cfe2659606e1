"""Monte Carlo sampling of component sizes.

Two exact samplers are provided:

* ``sample_er_components`` draws G(N, p) by first drawing the edge count
  M ~ Binomial(N(N-1)/2, p), then M distinct unordered pairs by rejection,
  and merging them in a disjoint-set forest.
* ``simulate_ml`` runs the Marcus-Lushnikov coalescent with kernel
  ``m*m'/N`` from N unit masses.  The total rate is ``(N^2 - sum m_i^2)/(2N)``
  and the merging pair is found by drawing two uniform vertices until they
  sit in different clusters, which selects clusters with probability
  proportional to ``m_i * m_j``.

Reproducibility: sample ``i`` of a run with root seed ``s`` always uses the
generator built from ``np.random.SeedSequence(s).spawn(n)[i]``.  Worker
processes only change who evaluates which sample, so results do not depend
on the worker count.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import MesoCutoffs, SizeHistogram, meso_mass


class DisjointSet:
    """Union-find over ``0..n-1`` with union by size and path halving."""

    __slots__ = ("parent", "size")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> int:
        """Merge the sets of x and y; returns the new root."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return rx
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        return rx

    def size_histogram(self) -> dict[int, int]:
        roots = (i for i, p in enumerate(self.parent) if p == i)
        return dict(Counter(self.size[r] for r in roots))


def _distinct_pairs(N: int, M: int, rng: np.random.Generator) -> np.ndarray:
    """M distinct unordered vertex pairs, uniformly, as an (M, 2) array."""
    keys = np.empty(0, dtype=np.int64)
    while keys.size < M:
        need = M - keys.size
        batch = int(need * 1.1) + 16
        u = rng.integers(0, N, size=batch)
        v = rng.integers(0, N, size=batch)
        ok = u != v
        lo = np.minimum(u[ok], v[ok])
        hi = np.maximum(u[ok], v[ok])
        fresh = lo * N + hi
        # keep first occurrences in draw order so the accepted set stays uniform
        merged = np.concatenate([keys, fresh])
        _, first = np.unique(merged, return_index=True)
        keys = merged[np.sort(first)][:M]
    return np.stack([keys // N, keys % N], axis=1)


def sample_er_components(N: int, p: float, rng: np.random.Generator) -> SizeHistogram:
    if N < 1:
        raise ValueError("N must be positive")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    n_pairs = N * (N - 1) // 2
    M = int(rng.binomial(n_pairs, p)) if n_pairs else 0
    ds = DisjointSet(N)
    if M == n_pairs:
        for u in range(1, N):
            ds.union(0, u)
    elif M:
        for u, v in _distinct_pairs(N, M, rng).tolist():
            ds.union(u, v)
    return SizeHistogram(ds.size_histogram())


def simulate_ml(N: int, t_end: float, rng: np.random.Generator) -> SizeHistogram:
    """State at ``t_end`` of the multiplicative Marcus-Lushnikov process."""
    if N < 1:
        raise ValueError("N must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    ds = DisjointSet(N)
    sum_sq = N  # sum of squared cluster masses
    t = 0.0
    labels = rng.integers(0, N, size=4096).tolist()
    pos = 0
    while True:
        rate = (N * N - sum_sq) / (2.0 * N)
        if rate <= 0:
            break
        t += rng.exponential(1.0 / rate)
        if t > t_end:
            break
        while True:
            if pos + 2 > len(labels):
                labels = rng.integers(0, N, size=4096).tolist()
                pos = 0
            u, v = labels[pos], labels[pos + 1]
            pos += 2
            ru, rv = ds.find(u), ds.find(v)
            if ru != rv:
                break
        a, b = ds.size[ru], ds.size[rv]
        ds.union(ru, rv)
        sum_sq += 2 * a * b
    return SizeHistogram(ds.size_histogram())


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run parameters.  The edge probability is ``(t + t_shift)/N``
    for the ER model and the evaluation time is ``t + t_shift`` for the
    coalescent."""

    n_vertices: int
    t: float
    samples: int
    seed: int = 0
    workers: int = 1
    model: str = "er"
    t_shift: float = 0.0

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("n_vertices must be positive")
        if self.t <= 0:
            raise ValueError("t must be positive")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.model not in ("er", "ml"):
            raise ValueError("model must be 'er' or 'ml'")

    @property
    def t_n(self) -> float:
        return self.t + self.t_shift

    @property
    def p(self) -> float:
        return min(1.0, self.t_n / self.n_vertices)


def _one_sample(cfg: SimConfig, seq: np.random.SeedSequence) -> SizeHistogram:
    rng = np.random.default_rng(seq)
    if cfg.model == "er":
        return sample_er_components(cfg.n_vertices, cfg.p, rng)
    return simulate_ml(cfg.n_vertices, cfg.t_n, rng)


def _run_chunk(args) -> list[SizeHistogram]:
    cfg, seqs = args
    return [_one_sample(cfg, s) for s in seqs]


def draw_samples(cfg: SimConfig) -> list[SizeHistogram]:
    """All samples of a run, in sample order."""
    seqs = np.random.SeedSequence(cfg.seed).spawn(cfg.samples)
    if cfg.workers == 1 or cfg.samples == 1:
        return [_one_sample(cfg, s) for s in seqs]
    chunks = [(cfg, seqs[i :: cfg.workers]) for i in range(cfg.workers)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(_run_chunk, chunks))
    out: list[SizeHistogram | None] = [None] * cfg.samples
    for i, res in enumerate(results):
        out[i :: cfg.workers] = res
    return out  # type: ignore[return-value]


@dataclass(frozen=True)
class SampleSummary:
    n_vertices: int
    t: float
    samples: int
    largest_fraction: np.ndarray = field(repr=False)
    micro_mean: np.ndarray
    micro_stderr: np.ndarray
    meso_mean: float
    meso_stderr: float
    cutoffs: MesoCutoffs

    @property
    def largest_mean(self) -> float:
        return float(self.largest_fraction.mean())

    @property
    def largest_stderr(self) -> float:
        return _stderr(self.largest_fraction)


def _stderr(x: np.ndarray) -> float:
    if x.size < 2:
        return math.nan
    return float(x.std(ddof=1) / math.sqrt(x.size))


def summarize(hists: list[SizeHistogram], cut: MesoCutoffs, t: float) -> SampleSummary:
    N = hists[0].n_vertices
    cut.check(N)
    largest = np.array([h.largest / N for h in hists])
    micro = np.zeros((len(hists), cut.R))
    meso = np.zeros(len(hists))
    for i, h in enumerate(hists):
        for k, c in h:
            if k <= cut.R:
                micro[i, k - 1] = c / N
        meso[i] = meso_mass(h, cut)
    n = len(hists)
    micro_se = micro.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full(cut.R, math.nan)
    return SampleSummary(
        n_vertices=N,
        t=t,
        samples=n,
        largest_fraction=largest,
        micro_mean=micro.mean(axis=0),
        micro_stderr=micro_se,
        meso_mean=float(meso.mean()),
        meso_stderr=_stderr(meso),
        cutoffs=cut,
    )


def mc_summary(cfg: SimConfig, cut: MesoCutoffs) -> SampleSummary:
    cut.check(cfg.n_vertices)
    return summarize(draw_samples(cfg), cut, cfg.t)


@dataclass(frozen=True)
class EventEstimate:
    """``-(1/N) log`` of a hit frequency.  ``estimate`` is ``inf`` with no hits."""

    estimate: float
    stderr: float
    hits: int
    samples: int

    @property
    def no_hits(self) -> bool:
        return self.hits == 0


def mc_event_logprob(cfg: SimConfig, event: Callable[[SizeHistogram], bool]) -> EventEstimate:
    hists = draw_samples(cfg)
    hits = sum(1 for h in hists if event(h))
    n, N = len(hists), cfg.n_vertices
    if hits == 0:
        return EventEstimate(math.inf, math.nan, 0, n)
    frac = hits / n
    # delta method: sd(log f) ~ sqrt((1 - f) / (n f))
    se = math.sqrt((1 - frac) / (n * frac)) / N
    return EventEstimate(-math.log(frac) / N, se, hits, n)


def largest_at_least(fraction: float) -> Callable[[SizeHistogram], bool]:
    def event(h: SizeHistogram) -> bool:
        return h.largest >= fraction * h.n_vertices

    return event


def all_isolated(h: SizeHistogram) -> bool:
    return h.get(1) == h.n_vertices


def always(h: SizeHistogram) -> bool:
    return True
