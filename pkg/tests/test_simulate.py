import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erldp.core import MesoCutoffs, SizeHistogram
from erldp.simulate import (
    DisjointSet,
    SimConfig,
    all_isolated,
    always,
    draw_samples,
    largest_at_least,
    mc_event_logprob,
    mc_summary,
    sample_er_components,
    simulate_ml,
    summarize,
)
from oracles import three_vertex_law

N3_SAMPLES = 100_000


def frequencies(draw, n):
    counts = Counter(tuple(sorted(k for k, c in draw() for _ in range(c))) for _ in range(n))
    return {k: v / n for k, v in counts.items()}


def assert_within_4se(freq, law, n):
    for sizes, prob in law.items():
        se = math.sqrt(prob * (1 - prob) / n)
        assert abs(freq.get(sizes, 0.0) - prob) <= 4 * se + 1e-12, (sizes, freq.get(sizes), prob)


def test_disjoint_set():
    ds = DisjointSet(5)
    ds.union(0, 1)
    ds.union(3, 4)
    ds.union(1, 4)
    assert ds.find(0) == ds.find(3)
    assert ds.size_histogram() == {1: 1, 4: 1}


def test_er_trivial_cases():
    rng = np.random.default_rng(0)
    assert sample_er_components(1, 0.5, rng) == SizeHistogram({1: 1})
    assert sample_er_components(2, 1.0, rng) == SizeHistogram({2: 1})
    assert sample_er_components(6, 0.0, rng) == SizeHistogram({1: 6})
    assert sample_er_components(6, 1.0, rng) == SizeHistogram({6: 1})
    with pytest.raises(ValueError):
        sample_er_components(0, 0.5, rng)
    with pytest.raises(ValueError):
        sample_er_components(4, 1.5, rng)


@pytest.mark.parametrize("p", [0.2, 0.5])
def test_er_three_vertex_frequencies(p):
    rng = np.random.default_rng(int(p * 1000))
    freq = frequencies(lambda: sample_er_components(3, p, rng), N3_SAMPLES)
    law = {k: float(v) for k, v in three_vertex_law(p).items()}
    assert_within_4se(freq, law, N3_SAMPLES)


def test_ml_two_vertices():
    rng = np.random.default_rng(1)
    n = 50_000
    merged = sum(simulate_ml(2, 1.0, rng).largest == 2 for _ in range(n)) / n
    expected = 1 - math.exp(-0.5)
    assert abs(merged - expected) <= 4 * math.sqrt(expected * (1 - expected) / n)


def test_ml_matches_er_with_exponential_edge_probability():
    # each vertex pair is joined at rate 1/N, so at time t the graph is G(N, 1 - exp(-t/N))
    t = 1.5
    rng = np.random.default_rng(2)
    freq = frequencies(lambda: simulate_ml(3, t, rng), N3_SAMPLES)
    law = {k: float(v) for k, v in three_vertex_law(-math.expm1(-t / 3)).items()}
    assert_within_4se(freq, law, N3_SAMPLES)


def test_ml_edge_cases():
    rng = np.random.default_rng(3)
    assert simulate_ml(5, 0.0, rng) == SizeHistogram({1: 5})
    assert simulate_ml(1, 3.0, rng) == SizeHistogram({1: 1})
    with pytest.raises(ValueError):
        simulate_ml(4, -1.0, rng)


@settings(max_examples=30)
@given(st.integers(1, 300), st.floats(0.0, 4.0), st.integers(0, 2**32 - 1), st.sampled_from(["er", "ml"]))
def test_histograms_conserve_vertices(N, t, seed, model):
    rng = np.random.default_rng(seed)
    h = sample_er_components(N, min(1.0, t / N), rng) if model == "er" else simulate_ml(N, t, rng)
    assert sum(k * c for k, c in h) == N


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(0, 1.0, 10)
    with pytest.raises(ValueError):
        SimConfig(10, 0.0, 10)
    with pytest.raises(ValueError):
        SimConfig(10, 1.0, 0)
    with pytest.raises(ValueError):
        SimConfig(10, 1.0, 5, model="xx")
    assert SimConfig(10, 20.0, 1).p == 1.0
    assert SimConfig(100, 1.0, 1, t_shift=0.5).p == pytest.approx(0.015)


def test_determinism_and_worker_independence():
    cfg = SimConfig(500, 1.5, 12, seed=42)
    a = draw_samples(cfg)
    assert a == draw_samples(cfg)
    assert a == draw_samples(SimConfig(500, 1.5, 12, seed=42, workers=3))
    assert a != draw_samples(SimConfig(500, 1.5, 12, seed=43))
    ml = SimConfig(300, 2.0, 6, seed=5, model="ml")
    assert draw_samples(ml) == draw_samples(SimConfig(300, 2.0, 6, seed=5, model="ml", workers=2))


def test_sample_prefix_is_stable():
    # sample i does not depend on how many samples were requested after it
    short = draw_samples(SimConfig(200, 1.0, 3, seed=9))
    long = draw_samples(SimConfig(200, 1.0, 8, seed=9))
    seqs3 = np.random.SeedSequence(9).spawn(3)
    seqs8 = np.random.SeedSequence(9).spawn(8)
    assert [s.spawn_key for s in seqs3] == [s.spawn_key for s in seqs8[:3]]
    assert short == long[:3]


def test_event_examples():
    cfg = SimConfig(50, 1.0, 20, seed=1)
    est = mc_event_logprob(cfg, always)
    assert est.estimate == 0.0 and est.hits == 20
    none = mc_event_logprob(cfg, largest_at_least(1.01))
    assert none.no_hits and none.estimate == math.inf
    h = SizeHistogram({1: 4, 6: 1})
    assert largest_at_least(0.6)(h) and not largest_at_least(0.61)(h)
    assert all_isolated(SizeHistogram({1: 3})) and not all_isolated(h)


def test_event_probability_against_exact_value():
    # all-isolated probability is (1-p)^(N(N-1)/2)
    N, t = 6, 0.5
    cfg = SimConfig(N, t, 20_000, seed=4)
    est = mc_event_logprob(cfg, all_isolated)
    exact = -(N - 1) / 2 * math.log1p(-t / N)
    assert abs(est.estimate - exact) <= 4 * est.stderr


def test_summary_examples():
    hists = [SizeHistogram({1: 4, 2: 1, 10: 1}), SizeHistogram({1: 2, 4: 1, 10: 1})]
    s = summarize(hists, MesoCutoffs(2, 0.5), t=1.0)
    # N = 16 in both; micro k <= 2, macro k >= 8, the size-4 component is mesoscopic
    np.testing.assert_allclose(s.micro_mean, [(4 + 2) / 32, 1 / 32])
    assert s.meso_mean == pytest.approx(0.125)
    assert s.largest_mean == pytest.approx(0.625)
    assert s.samples == 2


def test_mc_summary_runs():
    cfg = SimConfig(1000, 0.5, 20, seed=0)
    s = mc_summary(cfg, MesoCutoffs.cube_root(1000))
    assert s.micro_mean.size == 10
    assert 0 < s.largest_mean < 0.1
    assert s.micro_mean[0] == pytest.approx(math.exp(-0.5), abs=0.02)
