"""Exponentially scaled modified Bessel functions and the CSL form factor.

Only ``exp(-z) I0(z)`` and ``exp(-z) I1(z)`` are ever formed; the raw
functions overflow for the arguments a micron-sized crystal produces.
Power series below ``SWITCH_Z``, large-argument asymptotic series above.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

SWITCH_Z = 20.0
# below this z = x**2 the form factor is summed as a power series with the
# leading 1 cancelled analytically; the direct form loses digits there
GAMMA_SERIES_Z = 2.0

ZETA_9 = 1.0020083928260822
ZETA_3 = 1.2020569031595942
ZETA_3_2 = 2.6123753486854883

_SERIES_TERMS = 64
_ASYM_TERMS = 30
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_GAMMA_TERMS = 48


@njit
def _scaled_i0_i1_scalar(z):
    if z <= SWITCH_Z:
        q = 0.25 * z * z
        t0 = 1.0
        t1 = 0.5 * z
        s0 = t0
        s1 = t1
        for k in range(1, _SERIES_TERMS):
            t0 *= q / (k * k)
            t1 *= q / (k * (k + 1))
            s0 += t0
            s1 += t1
            if t0 < 1e-17 * s0:
                break
        scale = math.exp(-z)
        return s0 * scale, s1 * scale
    a0 = 1.0
    a1 = 1.0
    s0 = 1.0
    s1 = 1.0
    inv8z = 1.0 / (8.0 * z)
    for k in range(1, _ASYM_TERMS):
        odd = (2 * k - 1) * (2 * k - 1)
        a0 *= odd * inv8z / k
        # (odd - 4) < 0 only at k = 1, which carries the sign of the I1 tail
        a1 *= (odd - 4.0) * inv8z / k
        s0 += a0
        s1 += a1
        if a0 < 1e-17:
            break
    pref = _INV_SQRT_2PI / math.sqrt(z)
    return s0 * pref, s1 * pref


@njit
def _scaled_i0_i1_loop(z, out0, out1):
    for i in range(z.size):
        out0[i], out1[i] = _scaled_i0_i1_scalar(z[i])


def _series_numpy(z):
    q = 0.25 * z * z
    k = np.arange(1, _SERIES_TERMS)
    # term ratios, accumulated as a cumulative product along the last axis
    t0 = np.cumprod(q[:, None] / (k * k)[None, :], axis=1)
    t1 = np.cumprod(q[:, None] / (k * (k + 1))[None, :], axis=1)
    s0 = 1.0 + t0.sum(axis=1)
    s1 = 0.5 * z * (1.0 + t1.sum(axis=1))
    scale = np.exp(-z)
    return s0 * scale, s1 * scale


def _asymptotic_numpy(z):
    k = np.arange(1, _ASYM_TERMS)
    odd = (2.0 * k - 1.0) ** 2
    inv8z = 1.0 / (8.0 * z)
    a0 = np.cumprod(odd[None, :] * inv8z[:, None] / k[None, :], axis=1)
    a1 = np.cumprod((odd - 4.0)[None, :] * inv8z[:, None] / k[None, :], axis=1)
    s0 = 1.0 + a0.sum(axis=1)
    s1 = 1.0 + a1.sum(axis=1)
    pref = _INV_SQRT_2PI / np.sqrt(z)
    return s0 * pref, s1 * pref


def _scaled_i0_i1_numpy(z):
    out0 = np.empty_like(z)
    out1 = np.empty_like(z)
    low = z <= SWITCH_Z
    if low.any():
        out0[low], out1[low] = _series_numpy(z[low])
    if (~low).any():
        out0[~low], out1[~low] = _asymptotic_numpy(z[~low])
    return out0, out1


def _scaled_i0_i1_numba(z):
    out0 = np.empty_like(z)
    out1 = np.empty_like(z)
    _scaled_i0_i1_loop(z, out0, out1)
    return out0, out1


_scaled_i0_i1 = _scaled_i0_i1_numba if USE_NUMBA else _scaled_i0_i1_numpy


def _as_checked_array(z, name, strict=False):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if strict and np.any(arr <= 0):
        raise ValueError(f"{name} must be > 0")
    if not strict and np.any(arr < 0):
        raise ValueError(f"{name} must be >= 0")
    return arr


def scaled_bessel_i0_i1(z):
    """Return ``(exp(-z) I0(z), exp(-z) I1(z))`` for ``z >= 0``.

    Accepts scalars or arrays; scalars in, floats out.
    """
    arr = _as_checked_array(z, "z")
    flat = np.ascontiguousarray(arr.ravel())
    i0, i1 = _scaled_i0_i1(flat)
    if arr.ndim == 0:
        return float(i0[0]), float(i1[0])
    return i0.reshape(arr.shape), i1.reshape(arr.shape)


def bessel_i0e(z):
    """``exp(-z) * I0(z)``."""
    return scaled_bessel_i0_i1(z)[0]


def bessel_i1e(z):
    """``exp(-z) * I1(z)``."""
    return scaled_bessel_i0_i1(z)[1]


def gamma_perp(x):
    """Transverse CSL form factor of a cylinder, in (0, 1].

    ``2/x^2 * [1 - exp(-x^2) (I0(x^2) + I1(x^2))]``, with ``x`` the cylinder
    radius over ``sqrt(2) r_C``. Tends to 1 as x -> 0 and to 2/x^2 for
    large x.
    """
    arr = _as_checked_array(x, "x", strict=True)
    z = arr * arr
    out = np.empty_like(z)
    small = z < GAMMA_SERIES_Z
    if small.any():
        out[small] = _gamma_perp_series(z[small])
    if (~small).any():
        zl = np.ascontiguousarray(z[~small])
        i0, i1 = _scaled_i0_i1(zl)
        out[~small] = 2.0 / zl * (1.0 - (i0 + i1))
    if arr.ndim == 0:
        return float(out)
    return out


def _gamma_perp_series(z):
    # exp(-z) I0 = 1F1(1/2; 1; -2z) and exp(-z) I1 = (z/2) 1F1(3/2; 3; -2z).
    # The leading 1 of the first cancels against the bracket's 1 and its next
    # term is -z, so the 2/z prefactor is divided out analytically.
    w = -2.0 * z[:, None]
    n = np.arange(2, _GAMMA_TERMS)
    c = 1.0 + np.cumprod((n - 0.5) / (n * n) * w, axis=1).sum(axis=1)
    n = np.arange(1, _GAMMA_TERMS)
    d = 1.0 + np.cumprod((n + 0.5) / ((n + 2.0) * n) * w, axis=1).sum(axis=1)
    return 2.0 * c - d
