"""Physical constants, experiment geometry and noise-model specifications.

Everything here is in SI units. The three reference parameter sets (GRW,
Adler, gravity) are available through :func:`table1_presets`; a flat ``key=value`` config
format is read by :func:`load_config` and written by :func:`dump_config`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values."""

    hbar: float = 1.054571817e-34
    G: float = 6.67430e-11
    k_B: float = 1.380649e-23
    c: float = 299792458.0
    # reference mass of the collapse models: the proton (nucleon) mass
    m0: float = 1.67262192369e-27
    amu: float = 1.66053906660e-27


CONSTANTS = PhysicalConstants()


class ConfigError(ValueError):
    """Raised for malformed config text or parameters violating a constraint.

    ``key`` names the offending entry when there is one.
    """

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def _require(cond: bool, key: str, constraint: str, value) -> None:
    if not cond:
        raise ConfigError(f"must satisfy {constraint} (got {value!r})", key=key)


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def equal_volume_radius(R: float, d: float) -> float:
    """Radius of the sphere with the volume of a cylinder of radius R, width d."""
    return (0.75 * R * R * d) ** (1.0 / 3.0)


@dataclass(frozen=True)
class ExperimentParams:
    """Geometry and phonon parameters of one diamond crystal.

    ``R_prime`` defaults to the equal-volume sphere radius when omitted.
    ``m`` and ``N`` are independent inputs; neither is rederived from the other.
    """

    omega: float = 1e13
    N: float = 5e14
    m: float = 1e-11
    R: float = 1.3427e-6
    d: float = 2.5e-4
    R_prime: float | None = None

    def __post_init__(self):
        for key in ("omega", "m", "R", "d"):
            value = getattr(self, key)
            _require(_finite(value) and value > 0, key, f"{key} > 0", value)
        _require(_finite(self.N) and self.N >= 1, "N", "N >= 1", self.N)
        if self.R_prime is None:
            object.__setattr__(self, "R_prime", equal_volume_radius(self.R, self.d))
        _require(_finite(self.R_prime) and self.R_prime > 0, "R_prime", "R_prime > 0",
                 self.R_prime)


@dataclass(frozen=True)
class CSL:
    lambda_csl: float = 1e-17
    r_c: float = 1e-7
    tag: str = field(default="csl", init=False)

    def __post_init__(self):
        _require(_finite(self.lambda_csl) and self.lambda_csl >= 0, "lambda_csl",
                 "lambda_csl >= 0", self.lambda_csl)
        _require(_finite(self.r_c) and self.r_c > 0, "r_c", "r_c > 0", self.r_c)


@dataclass(frozen=True)
class Diosi:
    tag: str = field(default="diosi", init=False)


@dataclass(frozen=True)
class Environmental:
    """Radiation and gas-collision decoherence at ambient temperature T.

    ``epsilon`` is the complex dielectric constant of the crystal; ``T_i``
    the internal temperature (defaults to T, i.e. thermal equilibrium).
    """

    T: float
    P: float
    epsilon: complex
    T_i: float | None = None
    m_gas: float = 28.97 * CONSTANTS.amu
    tag: str = field(default="environmental", init=False)

    def __post_init__(self):
        if self.T_i is None:
            object.__setattr__(self, "T_i", self.T)
        object.__setattr__(self, "epsilon", complex(self.epsilon))
        _require(_finite(self.T) and self.T > 0, "T", "T > 0", self.T)
        _require(_finite(self.T_i) and self.T_i > 0, "T_i", "T_i > 0", self.T_i)
        _require(_finite(self.P) and self.P >= 0, "P", "P >= 0", self.P)
        _require(math.isfinite(self.epsilon.real), "epsilon_re", "finite",
                 self.epsilon.real)
        _require(math.isfinite(self.epsilon.imag) and self.epsilon.imag >= 0,
                 "epsilon_im", "epsilon_im >= 0", self.epsilon.imag)
        _require(_finite(self.m_gas) and self.m_gas > 0, "m_gas", "m_gas > 0", self.m_gas)


@dataclass(frozen=True)
class NoNoise:
    """Pure Schroedinger evolution: decay rate zero."""

    tag: str = field(default="none", init=False)


NoiseModel = Union[CSL, Diosi, Environmental, NoNoise]


# Reference parameter sets. R' of the gravity set is fixed at 6.97 um rather
# than rederived from the cylinder.
_REFERENCE_GEOMETRY = dict(omega=1e13, N=5e14, m=1e-11, R=1.3427e-6, d=0.25e-3)
_REFERENCE_SETS = {
    "grw": (ExperimentParams(**_REFERENCE_GEOMETRY), CSL(lambda_csl=1e-17, r_c=1e-7)),
    "adler": (ExperimentParams(**_REFERENCE_GEOMETRY), CSL(lambda_csl=1e-8, r_c=1e-7)),
    "diosi": (ExperimentParams(**_REFERENCE_GEOMETRY, R_prime=6.97e-6), Diosi()),
}
PRESET_NAMES = tuple(_REFERENCE_SETS)


def table1_presets(name: str) -> tuple[ExperimentParams, NoiseModel]:
    """Return the (params, model) pair of one reference parameter set.

    ``name`` is case-insensitive: ``"GRW"``, ``"Adler"`` or ``"Diosi"``.
    """
    try:
        return _REFERENCE_SETS[name.strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; expected one of "
                          f"{', '.join(PRESET_NAMES)}", key="preset") from None


# ---------------------------------------------------------------------------
# key=value config files

PARAM_KEYS = ("omega", "N", "m", "R", "d", "R_prime")
MODEL_KEYS = ("model", "lambda_csl", "r_c", "T", "T_i", "P", "epsilon_re",
              "epsilon_im", "m_gas")
CONFIG_KEYS = PARAM_KEYS + MODEL_KEYS
MODEL_NAMES = ("csl", "diosi", "environmental", "none")


def parse_config_text(source: str) -> dict[str, str]:
    """Split config text into a raw ``{key: value}`` dict.

    One ``key=value`` per line; ``#`` starts a comment; blank lines ignored.
    """
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key", key=key)
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key", key=key)
        if not value:
            raise ConfigError(f"line {lineno}: empty value", key=key)
        entries[key] = value
    return entries


def _to_float(entries, key):
    try:
        return float(entries[key])
    except ValueError:
        raise ConfigError(f"not a number: {entries[key]!r}", key=key) from None


def load_config(source: str, defaults: tuple[ExperimentParams, NoiseModel] | None = None,
                model: str | None = None) -> tuple[ExperimentParams, NoiseModel]:
    """Parse and validate config text.

    Omitted geometry keys fall back to the reference geometry (or to ``defaults`` when
    given, e.g. a preset); an omitted ``model`` falls back to the default
    model, CSL with the GRW parameters unless ``defaults`` says otherwise.
    ``model`` overrides the file's model key.
    """
    entries = parse_config_text(source)
    if model is not None:
        entries["model"] = model
    base_params, base_model = defaults if defaults is not None else (ExperimentParams(),
                                                                     CSL())
    values = {k: _to_float(entries, k) for k in PARAM_KEYS if k in entries}
    geom = {k: getattr(base_params, k) for k in PARAM_KEYS}
    if ("R" in values or "d" in values) and "R_prime" not in values:
        # R' follows the cylinder unless given explicitly
        geom["R_prime"] = None
    geom.update(values)
    params = ExperimentParams(**geom)

    model_name = entries.get("model", base_model.tag).strip().lower()
    if model_name not in MODEL_NAMES:
        raise ConfigError(f"must be one of {', '.join(MODEL_NAMES)} (got {model_name!r})",
                          key="model")
    allowed = {"csl": ("lambda_csl", "r_c"),
               "environmental": ("T", "T_i", "P", "epsilon_re", "epsilon_im", "m_gas")}
    for key in MODEL_KEYS[1:]:
        if key in entries and key not in allowed.get(model_name, ()):
            raise ConfigError(f"not used by model {model_name!r}", key=key)

    if model_name == "csl":
        base = base_model if isinstance(base_model, CSL) else CSL()
        model = CSL(
            lambda_csl=_to_float(entries, "lambda_csl") if "lambda_csl" in entries
            else base.lambda_csl,
            r_c=_to_float(entries, "r_c") if "r_c" in entries else base.r_c,
        )
    elif model_name == "diosi":
        model = Diosi()
    elif model_name == "none":
        model = NoNoise()
    else:
        for key in ("T", "P", "epsilon_re", "epsilon_im"):
            if key not in entries:
                raise ConfigError("required for model 'environmental'", key=key)
        kwargs = dict(T=_to_float(entries, "T"), P=_to_float(entries, "P"),
                      epsilon=complex(_to_float(entries, "epsilon_re"),
                                      _to_float(entries, "epsilon_im")))
        if "T_i" in entries:
            kwargs["T_i"] = _to_float(entries, "T_i")
        if "m_gas" in entries:
            kwargs["m_gas"] = _to_float(entries, "m_gas")
        model = Environmental(**kwargs)
    return params, model


def dump_config(params: ExperimentParams, model: NoiseModel) -> str:
    """Serialise to config text that :func:`load_config` reads back exactly."""
    lines = [f"{k}={getattr(params, k)!r}" for k in PARAM_KEYS]
    lines.append(f"model={model.tag}")
    if isinstance(model, CSL):
        lines += [f"lambda_csl={model.lambda_csl!r}", f"r_c={model.r_c!r}"]
    elif isinstance(model, Environmental):
        lines += [f"T={model.T!r}", f"T_i={model.T_i!r}", f"P={model.P!r}",
                  f"epsilon_re={model.epsilon.real!r}",
                  f"epsilon_im={model.epsilon.imag!r}", f"m_gas={model.m_gas!r}"]
    return "\n".join(lines) + "\n"
