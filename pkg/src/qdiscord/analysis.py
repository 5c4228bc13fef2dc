"""Detection times and CSL exclusion bounds derived from discord dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .constants import CSL, ExperimentParams
from .evolution import closed_form_elements, envelope_elements, spectrum_from_elements
from .information import LN2, discord_from_elements
from .rates import eta_csl, lambda_from_eta

# Discord has to fall to this fraction of its initial ln 2 for a model to
# count as detected. Calibrated once against the three target detection
# times (Adler 1e-7 s, GRW 100 s, gravity 1500 s); it lands all three within
# a factor 1.6. Frozen.
THRESHOLD_FRAC = 0.5
DEFAULT_LAMBDA_CAP = 1e12
DETECTION_ATOL = 1e-9


@dataclass(frozen=True)
class DetectionResult:
    t_detect: float
    threshold: float
    lambda_big: float
    converged: bool
    note: str = ""


@dataclass(frozen=True)
class ExclusionPoint:
    r_c: float
    lambda_bound: float


@dataclass
class DiscordTrace:
    t: np.ndarray
    delta: np.ndarray
    sigma: np.ndarray
    rho11: np.ndarray
    rho22: np.ndarray
    rho23: np.ndarray
    rho14: np.ndarray
    envelope: bool


def envelope_discord(lambda_big: float, t) -> np.ndarray | float:
    """Discord with the O(Lambda/omega) oscillations dropped; decreasing in t."""
    return discord_from_elements(*envelope_elements(lambda_big, t))


def detection_time(lambda_big: float, omega: float,
                   threshold_frac: float = THRESHOLD_FRAC) -> DetectionResult:
    """First time the envelope discord reaches ``threshold_frac * ln 2``.

    The envelope depends on Lambda t only, so ``omega`` is just validated.
    Lambda = 0 never decoheres and gives a non-converged result.
    """
    if not 0.0 < threshold_frac < 1.0:
        raise ValueError("threshold_frac must lie in (0, 1)")
    if not omega > 0:
        raise ValueError("omega must be > 0")
    if not (math.isfinite(lambda_big) and lambda_big >= 0):
        raise ValueError("lambda_big must be >= 0")
    threshold = threshold_frac * LN2
    if lambda_big == 0:
        return DetectionResult(math.inf, threshold, 0.0, False,
                               "Lambda = 0: discord stays at ln 2, nothing to detect")

    def excess(t):
        return envelope_discord(lambda_big, t) - threshold

    hi = 1.0 / lambda_big
    for _ in range(200):
        if excess(hi) < 0:
            break
        hi *= 2.0
    else:  # pragma: no cover - discord decays to 0, so the loop always breaks
        return DetectionResult(math.inf, threshold, lambda_big, False, "no bracket found")
    t_star = bisect(excess, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                    maxiter=2000)
    converged = abs(excess(t_star)) <= DETECTION_ATOL
    return DetectionResult(t_star, threshold, lambda_big, converged,
                           "" if converged else "bisection did not reach tolerance")


def discord_trace(lambda_big: float, omega: float, t_grid, exact: bool = False,
                  paper_compat: bool = False) -> DiscordTrace:
    """Discord, spectrum and matrix elements at each time of ``t_grid``."""
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size and (np.any(np.diff(t) < 0) or t[0] < 0):
        raise ValueError("t_grid must be sorted and non-negative")
    r11, r22, r23, r14, envelope = closed_form_elements(lambda_big, omega, t, exact)
    delta = discord_from_elements(r11, r22, r23, r14, paper_compat=paper_compat)
    return DiscordTrace(t=t, delta=np.atleast_1d(delta),
                        sigma=spectrum_from_elements(r11, r22, r23, r14),
                        rho11=r11, rho22=r22, rho23=r23, rho14=r14, envelope=envelope)


def unit_rate_lambda(p: ExperimentParams, r_c) -> np.ndarray:
    """Lambda per unit lambda_CSL (i.e. at lambda_CSL = 1 s^-1)."""
    r_c = np.atleast_1d(np.asarray(r_c, dtype=float))
    return np.array([lambda_from_eta(eta_csl(p, 1.0, rc), p) for rc in r_c])


def csl_bound_scan(p: ExperimentParams, lambda_cap: float = DEFAULT_LAMBDA_CAP,
                   r_c_range: tuple[float, float] = (1e-9, 1e-4),
                   points: int = 50) -> list[ExclusionPoint]:
    """Upper bound on lambda_CSL over a log grid of r_C.

    Lambda is linear in lambda_CSL, so the bound is ``lambda_cap`` over the
    unit-rate Lambda; points above it are excluded.
    """
    lo, hi = r_c_range
    if not (lo > 0 and hi > 0 and lo <= hi):
        raise ValueError("r_c_range must be positive and ordered")
    if points < 2:
        raise ValueError("points must be >= 2")
    if not lambda_cap > 0:
        raise ValueError("lambda_cap must be > 0")
    r_c = np.logspace(math.log10(lo), math.log10(hi), points)
    # logspace round-trips the endpoints only approximately
    r_c[0], r_c[-1] = lo, hi
    bounds = lambda_cap / unit_rate_lambda(p, r_c)
    return [ExclusionPoint(float(rc), float(b)) for rc, b in zip(r_c, bounds)]


def is_allowed(p: ExperimentParams, model: CSL, lambda_cap: float = DEFAULT_LAMBDA_CAP
               ) -> bool:
    """True when (lambda_CSL, r_C) keeps Lambda below the cap."""
    return lambda_from_eta(eta_csl(p, model.lambda_csl, model.r_c), p) < lambda_cap
