import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from erldp.core import (
    MacroMeasure,
    MesoCutoffs,
    MicroMeasure,
    SizeHistogram,
    expand_sizes,
    histogram_from_sizes,
    macro_distance,
    macro_measure,
    meso_mass,
    micro_distance,
    micro_measure,
    total_mass_macro,
    total_mass_micro,
)


@pytest.mark.parametrize(
    "sizes, counts, n",
    [
        ([1, 1, 2], {1: 2, 2: 1}, 4),
        ([5], {5: 1}, 5),
        ([3, 3, 3, 1], {1: 1, 3: 3}, 10),
    ],
)
def test_histogram_from_sizes(sizes, counts, n):
    h = histogram_from_sizes(sizes)
    assert h.counts == counts
    assert h.n_vertices == n


def test_histogram_rejects_bad_input():
    with pytest.raises(ValueError):
        histogram_from_sizes([])
    with pytest.raises(ValueError):
        SizeHistogram({0: 1})
    with pytest.raises(ValueError):
        SizeHistogram({1: -1, 2: 1})
    with pytest.raises(ValueError):
        SizeHistogram({1: 2}, n_vertices=3)


def test_histogram_drops_zero_counts_and_hashes():
    a = SizeHistogram({1: 2, 2: 0, 3: 1})
    b = SizeHistogram({3: 1, 1: 2})
    assert a == b and hash(a) == hash(b)
    assert a.counts == {1: 2, 3: 1}
    assert a.largest == 3 and a.n_components == 3
    assert a.get(2) == 0


@pytest.mark.parametrize(
    "counts, R, expected",
    [
        ({1: 2, 2: 1}, 2, [0.5, 0.25]),
        ({4: 1}, 2, [0.0, 0.0]),
        ({1: 5, 5: 1}, 5, [0.5, 0, 0, 0, 0.1]),
    ],
)
def test_micro_measure(counts, R, expected):
    lam = micro_measure(SizeHistogram(counts), R)
    assert lam.truncation == R
    np.testing.assert_allclose(lam.weights, expected)


@pytest.mark.parametrize(
    "counts, eps, atoms",
    [
        ({1: 2, 2: 1}, 0.4, (0.5,)),
        ({1: 100}, 0.1, ()),
        ({60: 1, 15: 1, 5: 5}, 0.1, (0.6, 0.15)),
    ],
)
def test_macro_measure(counts, eps, atoms):
    assert macro_measure(SizeHistogram(counts), eps).atoms == pytest.approx(atoms)


@pytest.mark.parametrize(
    "counts, R, eps, expected",
    [
        ({60: 1, 15: 1, 5: 5}, 5, 0.2, 0.15),
        ({1: 100}, 5, 0.2, 0.0),
        ({10: 10}, 9, 0.5, 1.0),
    ],
)
def test_meso_mass(counts, R, eps, expected):
    assert meso_mass(SizeHistogram(counts), MesoCutoffs(R, eps)) == pytest.approx(expected)


def test_meso_mass_needs_R_below_eps_n():
    with pytest.raises(ValueError):
        meso_mass(SizeHistogram({1: 10}), MesoCutoffs(5, 0.5))


def test_total_masses():
    assert total_mass_micro(MicroMeasure(np.array([0.5, 0.25]))) == pytest.approx(1.0)
    assert total_mass_macro(MacroMeasure((0.6, 0.15))) == pytest.approx(0.75)
    assert total_mass_micro(MicroMeasure.zeros(4)) == 0


def test_distances_examples():
    lam = MicroMeasure(np.array([0.3, 0.1]))
    assert micro_distance(lam, lam, 5) == 0
    assert micro_distance(MicroMeasure(np.array([1.0, 0.0])), MicroMeasure.zeros(2), 1) == 0.5
    assert macro_distance(MacroMeasure((0.5,)), MacroMeasure((0.5, 0.3)), 0.1) == pytest.approx(0.075)


def test_measure_validation():
    with pytest.raises(ValueError):
        MicroMeasure(np.array([0.5, 0.5]))  # mass 1.5
    with pytest.raises(ValueError):
        MicroMeasure(np.array([-0.1]))
    with pytest.raises(ValueError):
        MacroMeasure((0.7, 0.5))
    with pytest.raises(ValueError):
        MacroMeasure((0.0,))
    assert MacroMeasure((0.2, 0.5, 0.2)).atoms == (0.5, 0.2, 0.2)


def test_cube_root_cutoffs():
    assert MesoCutoffs.cube_root(1000).R == 10
    assert MesoCutoffs.cube_root(10**5).R == 47
    assert MesoCutoffs.cube_root(1000).eps == pytest.approx(0.1)


size_lists = st.lists(st.integers(1, 40), min_size=1, max_size=60)


@given(size_lists)
def test_round_trip(sizes):
    assert expand_sizes(histogram_from_sizes(sizes)) == sorted(sizes)


@given(size_lists, st.data())
def test_three_masses_partition_one(sizes, data):
    h = histogram_from_sizes(sizes)
    N = h.n_vertices
    R = data.draw(st.integers(1, max(1, N)))
    eps = data.draw(st.floats(0.001, 0.999))
    if not R < eps * N:
        with pytest.raises(ValueError):
            MesoCutoffs(R, eps).check(N)
        return
    cut = MesoCutoffs(R, eps)
    lam = micro_measure(h, R)
    alpha = macro_measure(h, eps)
    # exact in units of 1/N
    parts = [round(total_mass_micro(lam) * N), round(meso_mass(h, cut) * N), round(total_mass_macro(alpha) * N)]
    assert sum(parts) == N
    assert math.isclose(total_mass_micro(lam) + meso_mass(h, cut) + total_mass_macro(alpha), 1.0, abs_tol=1e-12)


micro_vecs = st.lists(st.floats(0, 0.1), min_size=1, max_size=6).map(lambda w: MicroMeasure(np.array(w) / 4))
macro_lists = st.lists(st.floats(0.01, 0.3), max_size=3).map(lambda a: MacroMeasure(tuple(a)))


@given(micro_vecs, micro_vecs, micro_vecs, st.integers(1, 8))
def test_micro_distance_is_metric(a, b, c, R):
    dab = micro_distance(a, b, R)
    assert dab == pytest.approx(micro_distance(b, a, R))
    assert micro_distance(a, a, R) == 0
    assert dab <= micro_distance(a, c, R) + micro_distance(c, b, R) + 1e-15


@given(macro_lists, macro_lists, macro_lists, st.floats(0.001, 0.5))
def test_macro_distance_is_metric_on_truncated_data(a, b, c, eps):
    # atoms below the cutoff are dropped first; with them the cutoff sum can
    # violate the triangle inequality, e.g. [0.5], [], [0.05] at eps = 0.1
    a, b, c = (MacroMeasure(tuple(x for x in m.atoms if x >= eps)) for m in (a, b, c))
    dab = macro_distance(a, b, eps)
    assert dab == pytest.approx(macro_distance(b, a, eps))
    assert macro_distance(a, a, eps) == 0
    assert dab <= macro_distance(a, c, eps) + macro_distance(c, b, eps) + 1e-15


def test_macro_distance_cutoff_counterexample():
    a, b, c = MacroMeasure((0.5,)), MacroMeasure(()), MacroMeasure((0.05,))
    assert macro_distance(a, b, 0.1) > macro_distance(a, c, 0.1) + macro_distance(c, b, 0.1)
