import warnings

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from erldp.core import NumericalError
from erldp.ratefn import beta_t, lambda_star
from erldp.smoluchowski import (
    SmolConfig,
    SmolState,
    evolve,
    gel_mass,
    integrate,
    mass_flux,
    smol_rhs,
)


def exact_profile(t, K):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return lambda_star(1.0, t, K).weights


def test_rhs_examples():
    mono = SmolState.monodisperse(3)
    np.testing.assert_allclose(smol_rhs(mono), [-1.0, 0.5, 0.0])
    np.testing.assert_allclose(smol_rhs(mono, "sol"), [-1.0, 0.5, 0.0])
    np.testing.assert_array_equal(smol_rhs(np.zeros(5)), np.zeros(5))
    with pytest.raises(ValueError):
        smol_rhs(mono, "other")


def test_rhs_two_class_state():
    l = np.array([0.5, 0.25, 0.0])
    # a = (0.5, 0.5, 0); gain_2 = a1^2/2, gain_3 = a1 a2
    np.testing.assert_allclose(smol_rhs(l, "gel"), [-0.5, 0.125 - 0.5, 0.25])
    np.testing.assert_allclose(smol_rhs(l, "sol"), [-0.5, 0.125 - 0.5, 0.25])  # in-window mass is 1
    l2 = np.array([0.2, 0.1, 0.0])
    np.testing.assert_allclose(smol_rhs(l2, "sol"), [0.2 * -0.4, 0.02 - 0.2 * 0.4, 0.04])


def test_sol_closure_flux_identity_symbolic():
    K = 4
    ls = sympy.symbols(f"l1:{K + 1}", nonnegative=True)
    a = [(i + 1) * ls[i] for i in range(K)]
    S = sum(a)
    rhs = []
    for k in range(1, K + 1):
        gain = sympy.Rational(1, 2) * sum(a[m - 1] * a[k - m - 1] for m in range(1, k))
        rhs.append(gain - k * ls[k - 1] * S)
    d_mass = sum((k + 1) * rhs[k] for k in range(K))
    flux = sympy.Rational(1, 2) * sum(
        (i + j) * a[i - 1] * a[j - 1] for i in range(1, K + 1) for j in range(1, K + 1) if i + j > K
    )
    assert sympy.expand(d_mass + flux) == 0
    # and the numerical right-hand side agrees with the symbolic one
    vals = {s: v for s, v in zip(ls, (0.3, 0.1, 0.05, 0.02))}
    num = smol_rhs(np.array([0.3, 0.1, 0.05, 0.02]), "sol")
    np.testing.assert_allclose(num, [float(r.subs(vals)) for r in rhs], rtol=1e-14)
    assert mass_flux(np.array([0.3, 0.1, 0.05, 0.02])) == pytest.approx(float(flux.subs(vals)), rel=1e-14)


@given(st.lists(st.floats(0, 0.2), min_size=2, max_size=30))
def test_sol_closure_conserves_mass_up_to_flux(l):
    l = np.array(l)
    k = np.arange(1, l.size + 1)
    assert np.dot(k, smol_rhs(l, "sol")) == pytest.approx(-mass_flux(l), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("t", [0.2, 0.5, 0.8])
def test_minimizer_profile_solves_gel_closure(t):
    K, h = 20, 1e-5
    deriv = (exact_profile(t + h, K) - exact_profile(t - h, K)) / (2 * h)
    residual = deriv - smol_rhs(exact_profile(t, K), "gel")
    assert np.max(np.abs(residual)) <= 1e-8


@pytest.mark.parametrize("t", [0.5, 0.8, 1.5, 2.0])
def test_integration_matches_profile(t):
    K = 200
    tr = integrate(SmolConfig(K, t, tol=1e-11))
    assert np.max(np.abs(tr.l[-1] - exact_profile(t, K))) <= 1e-9


def test_gel_mass_after_gelation():
    K = 400
    final = evolve(SmolConfig(K, 2.0, tol=1e-11))
    assert final.time == 2.0
    # in-window mass converges to beta_t as K grows; the window misses the Borel tail
    in_window = 1 - gel_mass(final)
    assert in_window == pytest.approx(beta_t(2.0), abs=2e-3)


def test_trajectory_properties():
    times = np.linspace(0, 3, 13)
    tr = integrate(SmolConfig(100, 3.0), times)
    assert tr.times.tolist() == times.tolist()
    assert np.all(tr.l >= 0)
    assert np.all(np.diff(tr.gel) >= -1e-12)
    assert tr.gel[0] == 0.0
    np.testing.assert_array_equal(tr.l[0], SmolState.monodisperse(100).l)
    sol = integrate(SmolConfig(100, 3.0, closure="sol"), times)
    assert np.all(sol.l >= 0)
    assert np.all(np.diff(sol.gel) >= -1e-12)


def test_zero_horizon():
    tr = integrate(SmolConfig(5, 0.0))
    np.testing.assert_array_equal(tr.l[-1], [1, 0, 0, 0, 0])
    assert tr.steps_accepted == 0


def test_determinism():
    a = integrate(SmolConfig(60, 1.7), [0.5, 1.7])
    b = integrate(SmolConfig(60, 1.7), [0.5, 1.7])
    np.testing.assert_array_equal(a.l, b.l)


def test_config_and_failure_modes():
    with pytest.raises(ValueError):
        SmolConfig(1, 1.0)
    with pytest.raises(ValueError):
        SmolConfig(10, -1.0)
    with pytest.raises(ValueError):
        SmolConfig(10, 1.0, closure="x")
    with pytest.raises(ValueError):
        integrate(SmolConfig(10, 1.0), [2.0])
    with pytest.raises(NumericalError):
        integrate(SmolConfig(50, 2.0, tol=1e-13, h_min=0.5))
    with pytest.raises(NumericalError):
        integrate(SmolConfig(50, 2.0, max_steps=3))
    with pytest.raises(ValueError):
        SmolState(np.array([]))
