import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qdiscord import evolution
from qdiscord.evolution import (ConvergenceError, closed_form_elements, closed_form_state,
                                default_steps, initial_state, integrate, numerical_state,
                                spectrum, uses_envelope, validate_density_matrix)


# --- independent oracles ----------------------------------------------------

def lindblad_oracle(lam, om, t):
    """expm of the generator assembled from operators, not from the bracket tables.

    H = omega (n_L + n_R); dephasing 2 rho - X_L rho X_L - X_R rho X_R, where
    X flips one mode. Flat index n_L + 2 n_R means kron(right, left).
    """
    eye = np.eye(2)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    num = np.diag([0.0, 1.0])
    XL, XR = np.kron(eye, sx), np.kron(sx, eye)
    H = np.kron(eye, num) + np.kron(num, eye)
    I4 = np.eye(4)

    def sandwich(A, B):  # row-major vec(A rho B)
        return np.kron(A, B.T)

    gen = (-1j * om * (sandwich(H, I4) - sandwich(I4, H))
           - 0.5 * lam * (2 * np.eye(16) - sandwich(XL, XL) - sandwich(XR, XR)))
    return (expm(gen * t) @ initial_state().ravel()).reshape(4, 4)


def alpha_beta_form(lam, om, t):
    """rho23 and rho14 in the unsimplified alpha/beta exponential form."""
    with mp.workdps(50):
        L, w, t = mp.mpf(lam), mp.mpf(om), mp.mpf(t)
        r = mp.sqrt(mp.mpc(L**2 - 4 * w**2))
        a, b = L + r, -L + r
        E = mp.exp
        r23 = (E(-L * t - a * t) * (L**2 * E(L * t) + L**2 * E(L * t + b * t + a * t)
                                    - 8 * w**2 * E(a * t)) / (4 * (L**2 - 4 * w**2)))
        r14 = (L / (4 * r**3) * E(-L * t - a * t)
               * (-E(L * t) * L**2 + L**2 * E(L * t + b * t + a * t) + 4 * w**2 * E(L * t)
                  - 4 * w**2 * E(L * t + b * t + a * t) + 2j * w * r * E(L * t)
                  - 4j * w * r * E(a * t) + 2j * w * r * E(L * t + b * t + a * t)))
        return complex(r23), complex(r14)


def max_err(a, b):
    return float(np.max(np.abs(a - b)))


# --- initial state -----------------------------------------------------------

def test_initial_state():
    rho = initial_state()
    assert np.trace(rho).real == 1.0
    assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rho)), [0, 0, 0, 1], atol=1e-15)
    validate_density_matrix(rho)


@pytest.mark.parametrize("lam,om", [(0.0, 1.0), (0.3, 2.0), (5.0, 0.5), (1.0, 0.5)])
def test_closed_form_at_zero_time(lam, om):
    np.testing.assert_array_equal(closed_form_state(lam, om, 0.0, exact=True), initial_state())


# --- closed form against oracles ---------------------------------------------

def test_no_decay_is_stationary():
    t = np.linspace(0, 1e3, 101)
    r11, r22, r23, r14, _ = closed_form_elements(0.0, 1.0, t, exact=True)
    assert np.all(r11 == 0) and np.all(r22 == 0.5) and np.all(r23 == 0.5)
    assert np.all(r14 == 0)
    rho = numerical_state(0.0, 1.0, 10.0, default_steps(0.0, 1.0, 10.0))
    expected = np.zeros((4, 4))
    expected[1, 1] = expected[2, 2] = expected[1, 2] = expected[2, 1] = 0.5
    assert max_err(rho, expected) < 1e-12


@pytest.mark.parametrize("lam,om,t", [(0.1, 1.0, 3.0), (1.0, 0.4, 2.0)])
def test_closed_form_matches_integrator(lam, om, t):
    rho = numerical_state(lam, om, t, default_steps(lam, om, t))
    assert max_err(closed_form_state(lam, om, t, exact=True), rho) <= 1e-8


@pytest.mark.parametrize("lam,om,t", [
    (0.1, 1.0, 3.0), (1.0, 0.4, 2.0), (2.0, 1.0, 1.7), (2.0 + 1e-6, 1.0, 4.0),
    (7.0, 0.2, 20.0), (0.0, 3.0, 5.0), (9.5, 9.9, 0.3), (0.01, 10.0, 19.0),
])
def test_closed_form_matches_lindblad_oracle(lam, om, t):
    assert max_err(closed_form_state(lam, om, t, exact=True),
                   lindblad_oracle(lam, om, t)) < 1e-11


@pytest.mark.parametrize("lam,om,t", [(0.1, 1.0, 3.0), (1.0, 0.4, 2.0), (3.0, 1.0, 0.7),
                                      (0.5, 2.0, 6.0)])
def test_closed_form_matches_alpha_beta_form(lam, om, t):
    r23, r14 = alpha_beta_form(lam, om, t)
    _, _, c23, c14, _ = closed_form_elements(lam, om, t, exact=True)
    assert abs(r23.imag) < 1e-30
    assert abs(c23 - r23.real) < 1e-14
    assert abs(c14 - r14) < 1e-14


def test_rho14_tail_decays_at_lambda():
    # the imaginary part of rho14 carries (cosh(st) e^{-Lt} - e^{-Lt}) / s^2;
    # a e^{-2Lt} second term would not solve the generator
    lam, om, t = 0.5, 1.0, 3.0
    s2 = complex(lam**2 - 4 * om**2)
    s = np.sqrt(s2)
    wrong = (lam / 2 * np.exp(-lam * t) * np.sinh(s * t) / s
             + 1j * om * lam / s2 * (np.exp(-lam * t) * np.cosh(s * t) - np.exp(-2 * lam * t)))
    right = lindblad_oracle(lam, om, t)[0, 3]
    assert abs(closed_form_elements(lam, om, t, exact=True)[3] - right) < 1e-12
    assert abs(wrong - right) > 1e-2


def test_critical_point_is_continuous():
    om, t = 1.0, 2.5
    at = closed_form_state(2.0, om, t, exact=True)
    for eps in (1e-5, 1e-8, 1e-12):
        assert max_err(at, closed_form_state(2.0 + eps, om, t, exact=True)) < 10 * eps
        assert max_err(at, closed_form_state(2.0 - eps, om, t, exact=True)) < 10 * eps
    assert max_err(at, lindblad_oracle(2.0, om, t)) < 1e-12


def test_large_lambda_t_is_finite():
    for lam, om, t in [(1e3, 1.0, 1e3), (1.0, 1e3, 1e5), (1e8, 1.0, 1e8), (1.0, 0.5, 1e6)]:
        rho = closed_form_state(lam, om, t, exact=True)
        assert np.all(np.isfinite(rho))
        np.testing.assert_allclose(np.diag(rho).real, 0.25, atol=1e-12)


def test_envelope_mode_switch():
    assert uses_envelope(5e-3, 1e13)
    assert not uses_envelope(5e-3, 1e13, exact=True)
    assert not uses_envelope(0.1, 1.0)
    *_, env = closed_form_elements(5e-3, 1e13, 10.0)
    assert env


def test_envelope_error_bound():
    # the dropped parts are O(Lambda/omega) in rho14, O((Lambda/omega)^2) in rho23
    lam, om = 1e-10, 1.0
    t = np.linspace(0, 5 / lam, 50)
    ex = closed_form_elements(lam, om, t, exact=True)
    env = closed_form_elements(lam, om, t)
    assert env[4] and not ex[4]
    assert np.max(np.abs(ex[3] - env[3])) <= lam / om
    assert np.max(np.abs(ex[2] - env[2])) <= (lam / om) ** 2


def test_input_validation():
    with pytest.raises(ValueError):
        closed_form_state(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        closed_form_state(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        closed_form_state(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        integrate(1.0, 1.0, 1.0, 0)


# --- integrator ---------------------------------------------------------------

def test_trace_preserved_over_many_steps():
    _, _, drift = integrate(0.7, 1.3, 50.0, 100_000)
    assert drift < 1e-10


def test_too_few_steps_raise():
    with pytest.raises(ConvergenceError):
        numerical_state(2.0, 5.0, 10.0, steps=20)


def test_backends_agree():
    rho0 = initial_state()
    for lam, om, t, n in [(0.3, 2.0, 5.0, 4000), (4.0, 1.0, 2.0, 800)]:
        fast = evolution._rk4_loop(rho0, lam, om, t, n)
        slow = evolution._rk4_numpy(rho0, lam, om, t, n)
        assert max_err(fast, slow) < 1e-12


def test_generator_matches_operator_form():
    lam, om = 0.8, 1.7
    gen = evolution.generator_matrix(lam, om)
    np.testing.assert_allclose(expm(gen * 2.0) @ initial_state().ravel(),
                               lindblad_oracle(lam, om, 2.0).ravel(), atol=1e-13)


# --- spectrum -----------------------------------------------------------------

def test_spectrum_examples():
    np.testing.assert_allclose(spectrum(initial_state()), [0, 1, 0, 0], atol=0)
    late = closed_form_state(1.0, 1.0, 60.0, exact=True)
    np.testing.assert_allclose(spectrum(late), [0.25] * 4, atol=1e-15)


def test_spectrum_falls_back_to_dense():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    np.testing.assert_allclose(spectrum(rho), np.linalg.eigvalsh(rho), atol=1e-14)


def test_spectrum_clamps_tiny_negatives():
    rho = closed_form_state(1.0, 1.0, 0.0, exact=True)
    rho[1, 2] = rho[2, 1] = 0.5 + 1e-12
    assert spectrum(rho).min() == 0.0


# --- invariants over random inputs ---------------------------------------------

@settings(max_examples=300, deadline=None)
@given(st.floats(0, 10), st.floats(0.2, 10), st.floats(0, 20))
def test_state_invariants(lam, om, t):
    rho = closed_form_state(lam, om, t, exact=True)
    validate_density_matrix(rho)
    assert abs(rho[1, 2].imag) < 1e-12
    assert rho[3, 0] == np.conj(rho[0, 3])
    sig = spectrum(rho)
    assert abs(sig.sum() - 1) < 1e-12
    np.testing.assert_allclose(np.sort(sig), np.linalg.eigvalsh(rho), atol=1e-10)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(0.2, 10.0), st.floats(0, 20))
def test_coherence_envelope_bound(lam, om, t):
    if not lam < 2 * om:
        return
    r23 = closed_form_elements(lam, om, t, exact=True)[2]
    bound = 0.5 * math.exp(-lam * t) * (1 + 2 * lam**2 / abs(lam**2 - 4 * om**2))
    assert abs(r23) <= bound * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 10), st.floats(0.2, 10), st.floats(0, 20))
def test_integrator_matches_closed_form(lam, om, t):
    rho = numerical_state(lam, om, t, default_steps(lam, om, t))
    validate_density_matrix(rho)
    assert max_err(rho, closed_form_state(lam, om, t, exact=True)) <= 1e-7
