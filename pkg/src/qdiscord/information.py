"""Entropies, reduced states and quantum discord of two-mode states.

All entropies are in nats. Discord is computed for a projective
measurement on the right crystal unless stated otherwise:

    delta(L:R) = S(rho_R) - S(rho) + sum_j p_j S(rho_{L|j})

with the conditional states normalised by p_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ._accel import USE_NUMBA, njit
from .evolution import PSD_TOL, spectrum

EIG_FLOOR = 1e-14
LN2 = math.log(2.0)


@dataclass(frozen=True)
class MeasurementBasis:
    """Rank-1 projector pair on one mode, from Bloch angles (theta, phi).

    (0, 0) is the phonon-number basis {|0>, |1>}.
    """

    theta: float = 0.0
    phi: float = 0.0

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        c = math.cos(self.theta / 2.0)
        s = math.sin(self.theta / 2.0)
        phase = complex(math.cos(self.phi), math.sin(self.phi))
        b0 = np.array([c, phase * s], dtype=complex)
        b1 = np.array([-phase.conjugate() * s, c], dtype=complex)
        return b0, b1

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.outer(b, b.conj()) for b in self.vectors())


COMPUTATIONAL = MeasurementBasis()


@dataclass(frozen=True)
class DiscordReport:
    I_mutual: float
    J_measured: float
    delta: float
    p0: float
    p1: float
    S_total: float
    S_left: float
    S_right: float


def entropy_from_eigenvalues(sigma) -> float:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.min() < -PSD_TOL:
        raise ValueError(f"negative eigenvalue {sigma.min():.3g}: not a density matrix")
    kept = sigma[sigma > EIG_FLOOR]
    return float(-np.sum(kept * np.log(kept)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """-Tr(rho ln rho) of a Hermitian PSD matrix (any size)."""
    rho = np.asarray(rho)
    return entropy_from_eigenvalues(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))


def _as_modes(rho):
    # flat index = n_L + 2 n_R, so the reshaped axes are (n_R, n_L, n_R', n_L')
    return np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)


def reduce(rho: np.ndarray, keep: str = "left") -> np.ndarray:
    """2x2 reduced state of the ``"left"`` or ``"right"`` crystal."""
    modes = _as_modes(rho)
    keep = keep.lower()
    if keep == "left":
        return np.einsum("rarb->ab", modes)
    if keep == "right":
        return np.einsum("albl->ab", modes)
    raise ValueError(f"keep must be 'left' or 'right' (got {keep!r})")


def conditional_states(rho: np.ndarray, basis: MeasurementBasis = COMPUTATIONAL,
                       measured: str = "right"):
    """Unnormalised post-measurement states of the unmeasured crystal, one per outcome."""
    modes = _as_modes(rho)
    out = []
    for b in basis.vectors():
        if measured == "right":
            out.append(np.einsum("r,rasb,s->ab", b.conj(), modes, b))
        elif measured == "left":
            out.append(np.einsum("l,rlsm,m->rs", b.conj(), modes, b))
        else:
            raise ValueError(f"measured must be 'left' or 'right' (got {measured!r})")
    return out


def conditional_entropy_after_measurement(rho: np.ndarray,
                                          basis: MeasurementBasis = COMPUTATIONAL,
                                          measured: str = "right"):
    """Return ``(sum_j p_j S(rho_{X|j}), p0, p1)``.

    Outcomes with probability below 1e-14 contribute nothing.
    """
    value = 0.0
    probs = []
    for sub in conditional_states(rho, basis, measured):
        p = float(np.trace(sub).real)
        probs.append(p)
        if p > EIG_FLOOR:
            value += p * von_neumann_entropy(sub / p)
    return value, probs[0], probs[1]


def _xlogx(x):
    return x * math.log(x) if x > 0.0 else 0.0


def quarter_coefficient_conditional_entropy(rho: np.ndarray) -> float:
    """Conditional-entropy term with 1/4 coefficients instead of (1 +/- e)/2.

    Only meaningful for the evolution's X-shaped states; it reads the decay
    factor e = exp(-2 Lambda t) off the populations. Kept for comparison:
    it does not vanish-compensate at late times, so discord built on it
    tends to -ln(2)/2 instead of 0.
    """
    rho = np.asarray(rho)
    e = (rho[1, 1] + rho[2, 2] - rho[0, 0] - rho[3, 3]).real
    return _quarter_term(e)


def _quarter_term(e):
    return -0.5 * (_xlogx((1.0 + e) / 2.0) + _xlogx((1.0 - e) / 2.0))


def discord(rho: np.ndarray, basis: MeasurementBasis = COMPUTATIONAL,
            paper_compat: bool = False) -> DiscordReport:
    """Quantum discord delta(L:R) for a measurement on the right crystal.

    ``paper_compat`` swaps in :func:`quarter_coefficient_conditional_entropy`,
    which assumes the phonon-number basis.
    """
    rho = np.asarray(rho, dtype=complex)
    s_total = entropy_from_eigenvalues(spectrum(rho))
    s_left = von_neumann_entropy(reduce(rho, "left"))
    s_right = von_neumann_entropy(reduce(rho, "right"))
    cond, p0, p1 = conditional_entropy_after_measurement(rho, basis, "right")
    if paper_compat:
        if basis != COMPUTATIONAL:
            raise ValueError("paper_compat applies to the phonon-number basis only")
        cond = quarter_coefficient_conditional_entropy(rho)
    mutual = s_left + s_right - s_total
    measured = s_left - cond
    return DiscordReport(I_mutual=mutual, J_measured=measured, delta=mutual - measured,
                         p0=p0, p1=p1, S_total=s_total, S_left=s_left, S_right=s_right)


def discord_minimized(rho: np.ndarray, grid: int = 16):
    """Discord minimised over projective measurements on the right crystal.

    A ``grid x grid`` scan of the Bloch sphere followed by Nelder-Mead from
    the best point. Returns ``(delta_min, basis)``; never exceeds the
    phonon-number-basis value.
    """
    if grid < 8:
        raise ValueError("grid must be >= 8")

    def objective(angles):
        return discord(rho, MeasurementBasis(*angles)).delta

    best_val = objective((0.0, 0.0))
    best = (0.0, 0.0)
    for theta in np.linspace(0.0, math.pi, grid):
        for phi in np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False):
            val = objective((theta, phi))
            if val < best_val:
                best_val, best = val, (theta, phi)
    res = minimize(objective, np.array(best), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    if res.fun < best_val:
        best_val, best = float(res.fun), tuple(res.x)
    return best_val, MeasurementBasis(*map(float, best))


# ---------------------------------------------------------------------------
# fast path for evolution states: delta = sum_i s_i ln s_i - 2 rho11 ln rho11
# - 2 rho22 ln rho22, valid for the X-shaped states with rho11 = rho44 and
# rho22 = rho33 measured in the phonon-number basis

@njit
def _discord_elements_loop(rho11, rho22, rho23, abs14, paper_compat, out):
    for i in range(rho11.size):
        a = rho11[i]
        b = rho22[i]
        acc = 0.0
        for s in (b - rho23[i], b + rho23[i], a - abs14[i], a + abs14[i]):
            if s > 1e-14:
                acc += s * math.log(s)
        if paper_compat:
            e = 2.0 * (b - a)
            cond = 0.0
            for q in ((1.0 + e) / 2.0, (1.0 - e) / 2.0):
                if q > 1e-14:
                    cond -= 0.5 * q * math.log(q)
            out[i] = math.log(2.0) + acc + cond
        else:
            if a > 1e-14:
                acc -= 2.0 * a * math.log(a)
            if b > 1e-14:
                acc -= 2.0 * b * math.log(b)
            out[i] = acc


def _xlogx_array(x):
    pos = x > EIG_FLOOR
    return np.where(pos, x * np.log(np.where(pos, x, 1.0)), 0.0)


def _discord_elements_numpy(rho11, rho22, rho23, abs14, paper_compat, out):
    sig = np.stack([rho22 - rho23, rho22 + rho23, rho11 - abs14, rho11 + abs14])
    acc = _xlogx_array(sig).sum(axis=0)
    if paper_compat:
        e = 2.0 * (rho22 - rho11)
        cond = -0.5 * (_xlogx_array((1.0 + e) / 2.0) + _xlogx_array((1.0 - e) / 2.0))
        out[:] = LN2 + acc + cond
    else:
        out[:] = acc - 2.0 * _xlogx_array(rho11) - 2.0 * _xlogx_array(rho22)


_discord_elements = _discord_elements_loop if USE_NUMBA else _discord_elements_numpy


def discord_from_elements(rho11, rho22, rho23, rho14, paper_compat: bool = False):
    """Phonon-number-basis discord of evolution states, vectorised over time.

    Takes the non-zero entries as returned by
    :func:`qdiscord.evolution.closed_form_elements`.
    """
    arrays = np.broadcast_arrays(np.asarray(rho11, float), np.asarray(rho22, float),
                                 np.asarray(rho23, float),
                                 np.abs(np.asarray(rho14, complex)))
    shape = arrays[0].shape
    flat = [np.ascontiguousarray(a.ravel()) for a in arrays]
    out = np.empty_like(flat[0])
    _discord_elements(*flat, bool(paper_compat), out)
    return out.reshape(shape) if shape else float(out[0])
