"""Dephasing strengths and decay-rate constants for each noise model.

Every model is reduced to the coefficient ``eta`` of the position double
commutator, and ``eta`` to the decay rate ``Lambda = 2 eta hbar / (3 omega m0)``
through the single function :func:`lambda_from_eta`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import (CONSTANTS, CSL, Diosi, Environmental, ExperimentParams, NoNoise,
                        NoiseModel, PhysicalConstants)
from .special import ZETA_3, ZETA_3_2, ZETA_9, gamma_perp

FACTORIAL_8 = 40320


@dataclass(frozen=True)
class DecayRate:
    eta: float
    lambda_big: float
    model_tag: str
    components: dict = field(default_factory=dict)


def eta_csl(p: ExperimentParams, lambda_csl: float, r_c: float) -> float:
    """Double-commutator coefficient of CSL for two cylindrical sublattices."""
    if r_c <= 0:
        raise ValueError("r_c must be > 0")
    if lambda_csl == 0:
        return 0.0
    form = gamma_perp(p.R / (math.sqrt(2.0) * r_c))
    # -expm1 keeps the bracket accurate when d << r_C
    axial = -math.expm1(-p.d * p.d / (4.0 * r_c * r_c))
    return lambda_csl * (p.N * p.N) / (p.d * p.d) * form * axial


def eta_diosi(p: ExperimentParams, c: PhysicalConstants = CONSTANTS) -> float:
    """Diosi-Penrose coefficient for a homogeneous sphere of radius R'."""
    return c.G * p.m * p.m / (4.0 * c.hbar * p.R_prime**3)


def _clausius_mossotti(eps: complex) -> complex:
    return (eps - 1.0) / (eps + 2.0)


def gamma_environment(p: ExperimentParams, env: Environmental,
                      c: PhysicalConstants = CONSTANTS) -> dict:
    """Localisation rates (m^-2 s^-1) from photons and gas collisions.

    Returns ``sc``, ``em``, ``abs``, ``coll`` and their sum ``total``.
    """
    cm = _clausius_mossotti(env.epsilon)
    R6 = p.R_prime**6
    therm = c.k_B * env.T / (c.hbar * c.c)
    therm_i = c.k_B * env.T_i / (c.hbar * c.c)
    radiative = 16.0 * math.pi**5 * c.c * R6 / 189.0
    g_sc = FACTORIAL_8 * 8.0 * ZETA_9 * c.c * R6 / (9.0 * math.pi) * therm**9 * cm.real**2
    g_em = radiative * therm**6 * cm.imag
    g_abs = radiative * therm_i**6 * cm.imag
    # pressure form; n_gas = P / (k_B T) turns T^(3/2) into T^(1/2)
    g_coll = (8.0 * math.sqrt(2.0 * math.pi) * ZETA_3 / (3.0 * ZETA_3_2)
              * math.sqrt(env.m_gas) * p.R_prime**2 * env.P / c.hbar**2
              * math.sqrt(c.k_B * env.T))
    return {"sc": g_sc, "em": g_em, "abs": g_abs, "coll": g_coll,
            "total": g_sc + g_em + g_abs + g_coll}


def lambda_from_eta(eta: float, p: ExperimentParams,
                    c: PhysicalConstants = CONSTANTS) -> float:
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return 2.0 * eta * c.hbar / (3.0 * p.omega * c.m0)


def decay_rate(p: ExperimentParams, model: NoiseModel,
               c: PhysicalConstants = CONSTANTS) -> DecayRate:
    """Reduce a noise model to its (eta, Lambda) pair."""
    components = {}
    if isinstance(model, CSL):
        eta = eta_csl(p, model.lambda_csl, model.r_c)
        components["gamma_perp"] = gamma_perp(p.R / (math.sqrt(2.0) * model.r_c))
    elif isinstance(model, Diosi):
        eta = eta_diosi(p, c)
    elif isinstance(model, Environmental):
        components = gamma_environment(p, model, c)
        eta = components["total"] / 2.0
    elif isinstance(model, NoNoise):
        eta = 0.0
    else:
        raise TypeError(f"unknown noise model {model!r}")
    return DecayRate(eta=eta, lambda_big=lambda_from_eta(eta, p, c), model_tag=model.tag,
                     components=components)


def newtonian_pair_potential(separation: float, m: float, R_prime: float,
                             c: PhysicalConstants = CONSTANTS) -> float:
    """Newtonian energy (J) between two displaced copies of a homogeneous sphere.

    Quadratic inner form for ``|x - y| <= R'``, point-mass form beyond.
    The two branches do not join continuously at R'. Diagnostic only: the
    dynamics use the quadratic coefficient through :func:`eta_diosi`.
    """
    if m <= 0 or R_prime <= 0:
        raise ValueError("m and R_prime must be > 0")
    r = abs(separation)
    scale = c.G * m * m
    if r <= R_prime:
        return -scale / R_prime * (6.0 / 5.0 - 0.5 * r * r / R_prime**2)
    return -scale / r
