"""Quantum discord of entangled diamond phonons under collapse and decoherence models."""

__version__ = "0.1.0"

from ._accel import BACKEND
from .analysis import (THRESHOLD_FRAC, DetectionResult, DiscordTrace, ExclusionPoint,
                       csl_bound_scan, detection_time, discord_trace)
from .constants import (CONSTANTS, CSL, ConfigError, Diosi, Environmental,
                        ExperimentParams, NoNoise, PhysicalConstants, dump_config,
                        load_config, table1_presets)
from .evolution import (ConvergenceError, closed_form_state, initial_state,
                        numerical_state, spectrum)
from .information import (DiscordReport, MeasurementBasis, conditional_entropy_after_measurement,
                          discord, discord_minimized, reduce, von_neumann_entropy)
from .rates import (DecayRate, decay_rate, eta_csl, eta_diosi, gamma_environment,
                    lambda_from_eta, newtonian_pair_potential)
from .special import bessel_i0e, bessel_i1e, gamma_perp
