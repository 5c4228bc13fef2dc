"""Density-matrix dynamics of the two entangled phonon modes.

Basis ordering (0-based array index):

    0 = |0_L 0_R>,  1 = |1_L 0_R>,  2 = |0_L 1_R>,  3 = |1_L 1_R>

Two independent routes produce rho(t):

* :func:`closed_form_state` evaluates the analytic solution, rewritten so
  that no growing exponential is ever formed;
* :func:`numerical_state` integrates the 4x4 generator entry by entry with
  fixed-step classical RK4.

With ``s^2 = Lambda^2 - 4 omega^2`` the coherences are

    rho_23 = e^{-Lt} / 2 + Lambda^2 e^{-Lt} K / 2
    rho_14 = Lambda/2 e^{-Lt} S + i omega Lambda e^{-Lt} K

where ``S = sinh(st)/s`` and ``K = (cosh(st) - 1)/s^2 = 2 S(t/2)^2``; both are
real for either sign of ``s^2``.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# below this Lambda/omega the oscillating O(Lambda/omega) parts are dropped
ENVELOPE_RATIO = 1e-9

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_DRIFT_TOL = 1e-10


class ConvergenceError(RuntimeError):
    """The integrator's step-halving error estimate exceeded the tolerance."""


def initial_state() -> np.ndarray:
    """rho(0) for (|1_L 0_R> + |0_L 1_R>)/sqrt(2)."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = rho[2, 2] = rho[1, 2] = rho[2, 1] = 0.5
    return rho


def _check_inputs(lambda_big, omega, t):
    if not (math.isfinite(lambda_big) and lambda_big >= 0):
        raise ValueError(f"lambda_big must be >= 0 (got {lambda_big!r})")
    if not (math.isfinite(omega) and omega > 0):
        raise ValueError(f"omega must be > 0 (got {omega!r})")
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise ValueError("t must be finite and >= 0")
    return t


def uses_envelope(lambda_big: float, omega: float, exact: bool = False) -> bool:
    return not exact and lambda_big / omega < ENVELOPE_RATIO


def _damped_sinc(lambda_big, omega, s2, t):
    """``exp(-Lambda t) sinh(s t)/s`` for real s^2 of either sign."""
    if s2 > 0:
        a = math.sqrt(s2)
        # Lambda - a without cancellation; both exponents are <= 0
        slow = 4.0 * omega * omega / (lambda_big + a)
        return np.exp(-slow * t) * (-np.expm1(-2.0 * a * t)) / (2.0 * a)
    if s2 < 0:
        big_omega = math.sqrt(-s2)
        return np.exp(-lambda_big * t) * t * np.sinc(big_omega * t / math.pi)
    return np.exp(-lambda_big * t) * t


def envelope_elements(lambda_big: float, t):
    """Closed-form entries with the oscillating terms dropped.

    rho23 = exp(-Lambda t)/2 and rho14 = 0; depends on Lambda t only.
    """
    t = np.asarray(t, dtype=float)
    if not (math.isfinite(lambda_big) and lambda_big >= 0):
        raise ValueError(f"lambda_big must be >= 0 (got {lambda_big!r})")
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise ValueError("t must be finite and >= 0")
    decay = np.exp(-lambda_big * t)
    rho11 = -np.expm1(-2.0 * lambda_big * t) / 4.0
    rho22 = (1.0 + decay * decay) / 4.0
    return rho11, rho22, decay / 2.0, np.zeros_like(t, dtype=complex)


def closed_form_elements(lambda_big: float, omega: float, t, exact: bool = False):
    """Non-zero entries of rho(t) on an array of times.

    Returns ``(rho11, rho22, rho23, rho14, envelope)``: rho11 = rho44,
    rho22 = rho33, rho23 = rho32 real, rho41 = conj(rho14). ``envelope``
    tells whether the oscillating terms were dropped (Lambda/omega below
    ``ENVELOPE_RATIO`` and not ``exact``); the error that introduces is at
    most about Lambda/omega in rho14 and (Lambda/omega)^2 in rho23.
    """
    t = _check_inputs(lambda_big, omega, t)
    rho11, rho22, rho23, rho14 = envelope_elements(lambda_big, t)
    envelope = uses_envelope(lambda_big, omega, exact)
    if not envelope:
        decay = 2.0 * rho23
        s2 = (lambda_big - 2.0 * omega) * (lambda_big + 2.0 * omega)
        dsinc = _damped_sinc(lambda_big, omega, s2, t)
        half = _damped_sinc(lambda_big, omega, s2, t / 2.0)
        dk = 2.0 * half * half
        rho23 = (decay + lambda_big**2 * dk) / 2.0
        rho14 = 0.5 * lambda_big * dsinc + 1j * omega * lambda_big * dk
    return rho11, rho22, rho23, rho14, envelope


def assemble(rho11, rho22, rho23, rho14) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[3, 3] = rho11
    rho[1, 1] = rho[2, 2] = rho22
    rho[1, 2] = rho[2, 1] = rho23
    rho[0, 3] = rho14
    rho[3, 0] = np.conj(rho14)
    return rho


def closed_form_state(lambda_big: float, omega: float, t: float,
                      exact: bool = False) -> np.ndarray:
    """Analytic rho(t); see :func:`closed_form_elements` for envelope mode."""
    r11, r22, r23, r14, _ = closed_form_elements(lambda_big, omega, float(t), exact)
    return assemble(r11, r22, r23, r14)


# ---------------------------------------------------------------------------
# generator: Hamiltonian and double-commutator brackets, entry by entry

@njit
def _rhs(r, lam, om, out):
    """out = d(rho)/dt = -i om H(rho) - (lam/2) D(rho)."""
    ham = np.empty((4, 4), dtype=np.complex128)
    ham[0, 0] = 0.0
    ham[0, 1] = -r[0, 1]
    ham[0, 2] = -r[0, 2]
    ham[0, 3] = -2.0 * r[0, 3]
    ham[1, 0] = r[1, 0]
    ham[1, 1] = 0.0
    ham[1, 2] = 0.0
    ham[1, 3] = -r[1, 3]
    ham[2, 0] = r[2, 0]
    ham[2, 1] = 0.0
    ham[2, 2] = 0.0
    ham[2, 3] = -r[2, 3]
    ham[3, 0] = 2.0 * r[3, 0]
    ham[3, 1] = r[3, 1]
    ham[3, 2] = r[3, 2]
    ham[3, 3] = 0.0

    dc = np.empty((4, 4), dtype=np.complex128)
    dc[0, 0] = 2 * r[0, 0] - r[1, 1] - r[2, 2]
    dc[0, 1] = 2 * r[0, 1] - r[1, 0] - r[2, 3]
    dc[0, 2] = 2 * r[0, 2] - r[1, 3] - r[2, 0]
    dc[0, 3] = 2 * r[0, 3] - r[1, 2] - r[2, 1]
    dc[1, 0] = 2 * r[1, 0] - r[0, 1] - r[3, 2]
    dc[1, 1] = 2 * r[1, 1] - r[0, 0] - r[3, 3]
    dc[1, 2] = 2 * r[1, 2] - r[3, 0] - r[0, 3]
    dc[1, 3] = 2 * r[1, 3] - r[0, 2] - r[3, 1]
    dc[2, 0] = 2 * r[2, 0] - r[3, 1] - r[0, 2]
    dc[2, 1] = 2 * r[2, 1] - r[3, 0] - r[0, 3]
    dc[2, 2] = 2 * r[2, 2] - r[3, 3] - r[0, 0]
    dc[2, 3] = 2 * r[2, 3] - r[3, 2] - r[0, 1]
    dc[3, 0] = 2 * r[3, 0] - r[2, 1] - r[1, 2]
    dc[3, 1] = 2 * r[3, 1] - r[2, 0] - r[1, 3]
    dc[3, 2] = 2 * r[3, 2] - r[2, 3] - r[1, 0]
    dc[3, 3] = 2 * r[3, 3] - r[2, 2] - r[1, 1]

    for i in range(4):
        for j in range(4):
            out[i, j] = -1j * om * ham[i, j] - 0.5 * lam * dc[i, j]


@njit
def _rk4_loop(rho0, lam, om, t, steps):
    h = t / steps
    r = rho0.copy()
    tmp = np.empty_like(r)
    k1 = np.empty_like(r)
    k2 = np.empty_like(r)
    k3 = np.empty_like(r)
    k4 = np.empty_like(r)
    for _ in range(steps):
        _rhs(r, lam, om, k1)
        for i in range(4):
            for j in range(4):
                tmp[i, j] = r[i, j] + 0.5 * h * k1[i, j]
        _rhs(tmp, lam, om, k2)
        for i in range(4):
            for j in range(4):
                tmp[i, j] = r[i, j] + 0.5 * h * k2[i, j]
        _rhs(tmp, lam, om, k3)
        for i in range(4):
            for j in range(4):
                tmp[i, j] = r[i, j] + h * k3[i, j]
        _rhs(tmp, lam, om, k4)
        for i in range(4):
            for j in range(4):
                r[i, j] += h / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
    return r


def generator_matrix(lambda_big: float, omega: float) -> np.ndarray:
    """16x16 matrix of the (linear) generator acting on row-major vec(rho)."""
    rhs = getattr(_rhs, "py_func", _rhs)
    L = np.empty((16, 16), dtype=complex)
    basis = np.zeros((4, 4), dtype=complex)
    out = np.empty((4, 4), dtype=complex)
    for col in range(16):
        basis.flat[col] = 1.0
        rhs(basis, lambda_big, omega, out)
        L[:, col] = out.ravel()
        basis.flat[col] = 0.0
    return L


def _rk4_numpy(rho0, lam, om, t, steps):
    # one RK4 step of a linear ODE is the matrix polynomial below; raising it
    # to the step count reproduces the stepping loop without Python iteration
    hL = (t / steps) * generator_matrix(lam, om)
    eye = np.eye(16, dtype=complex)
    step = eye + hL @ (eye + hL @ (eye / 2 + hL @ (eye / 6 + hL / 24)))
    return (np.linalg.matrix_power(step, steps) @ rho0.ravel()).reshape(4, 4)


_rk4 = _rk4_loop if USE_NUMBA else _rk4_numpy


def default_steps(lambda_big: float, omega: float, t: float, h_rate: float = 0.005) -> int:
    """Step count keeping h times the fastest generator rate at ``h_rate``."""
    return max(16, math.ceil(t * (2.0 * lambda_big + 2.0 * omega) / h_rate))


def integrate(lambda_big: float, omega: float, t: float, steps: int,
              rho0: np.ndarray | None = None):
    """RK4 from ``rho0`` (default :func:`initial_state`) to time ``t``.

    Returns ``(rho, error_estimate, trace_drift)``. The error estimate
    compares against a run at half the step size; the result is then
    hermitised and renormalised, and ``trace_drift`` is |Tr(rho) - 1| before
    renormalisation.
    """
    _check_inputs(lambda_big, omega, t)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rho0 = initial_state() if rho0 is None else np.ascontiguousarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy(), 0.0, abs(np.trace(rho0).real - 1.0)
    coarse = _rk4(rho0, float(lambda_big), float(omega), float(t), int(steps))
    fine = _rk4(rho0, float(lambda_big), float(omega), float(t), 2 * int(steps))
    error = float(np.max(np.abs(coarse - fine))) * 16.0 / 15.0
    trace = np.trace(coarse)
    drift = abs(trace - np.trace(rho0))
    rho = 0.5 * (coarse + coarse.conj().T)
    rho /= np.trace(rho).real
    return rho, error, float(drift)


def numerical_state(lambda_big: float, omega: float, t: float, steps: int,
                    tol: float | None = 1e-8) -> np.ndarray:
    """Integrated rho(t); raises ConvergenceError if the error estimate exceeds ``tol``."""
    rho, error, drift = integrate(lambda_big, omega, t, steps)
    if tol is not None and error > tol:
        raise ConvergenceError(f"step-halving error estimate {error:.3g} exceeds {tol:.3g} "
                               f"with {steps} steps; increase steps")
    if drift > TRACE_DRIFT_TOL:
        raise ConvergenceError(f"trace drifted by {drift:.3g}")
    return rho


# ---------------------------------------------------------------------------

def _has_solution_pattern(rho, atol=1e-14):
    off = [(0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2)]
    if any(abs(rho[i, j]) > atol for i, j in off):
        return False
    return (abs(rho[0, 0] - rho[3, 3]) <= atol and abs(rho[1, 1] - rho[2, 2]) <= atol
            and abs(rho[1, 2].imag) <= atol and abs(rho[1, 2] - rho[2, 1]) <= atol
            and abs(rho[0, 3] - np.conj(rho[3, 0])) <= atol)


def _clamp(sigma, tol=PSD_TOL):
    sigma = np.where((sigma < 0) & (sigma >= -tol), 0.0, sigma)
    return np.where((sigma > 1) & (sigma <= 1 + tol), 1.0, sigma)


def spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues (sigma1..sigma4) of a 4x4 density matrix.

    States with the solution's X-shaped sparsity use the closed forms
    rho22 -/+ rho23 and rho11 -/+ |rho14|; anything else goes to a dense
    Hermitian eigensolve (ascending order).
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    if _has_solution_pattern(rho):
        r22 = rho[1, 1].real
        r23 = rho[1, 2].real
        r11 = rho[0, 0].real
        c14 = abs(rho[0, 3])
        sigma = np.array([r22 - r23, r22 + r23, r11 - c14, r11 + c14])
    else:
        sigma = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return _clamp(sigma)


def spectrum_from_elements(rho11, rho22, rho23, rho14):
    """Vectorised closed-form spectrum; returns shape (..., 4)."""
    c14 = np.abs(rho14)
    sigma = np.stack([rho22 - rho23, rho22 + rho23, rho11 - c14, rho11 + c14], axis=-1)
    return _clamp(sigma)


def validate_density_matrix(rho: np.ndarray) -> None:
    """Raise ValueError unless rho is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -PSD_TOL:
        raise ValueError("density matrix is not positive semidefinite")
