"""Device parameters, physical constants and unit conversions.

Internal units are strict SI (seconds, amperes, watts, kelvin, radians,
photon counts). Only the CLI layer converts to ns/mA/mW for human I/O.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace

# Fixed physical constants (CODATA exact values).
E_CHARGE = 1.602176634e-19  # elementary charge [C]
HBAR = 1.054571817e-34      # reduced Planck constant [J s]
C_LIGHT = 2.99792458e8      # speed of light [m/s]

TWO_PI = 6.283185307179586


class ConfigError(ValueError):
    """Raised for missing/malformed config keys or parameter-invariant violations.

    The message always names the offending key or field.
    """


@dataclass(frozen=True)
class LaserParams:
    """Single-mode laser device constants.

    The angular optical frequency is always derived from `wavelength`;
    the wavelength is the stored source of truth.
    """

    tau_ph: float            # photon lifetime [s]
    tau_e: float             # electron lifetime [s]
    epsilon: float           # differential quantum output (0, 1]
    n_tr: float              # transparency carrier number
    n_th: float              # threshold carrier number
    c_sp: float              # spontaneous emission coupling factor
    gamma: float             # confinement factor (0, 1]
    alpha: float             # linewidth enhancement factor
    chi: float               # gain compression factor [1/W]
    wavelength: float        # lasing wavelength [m]
    v_active: float | None = None  # active-region volume [m^3], optional

    def __post_init__(self):
        checks = [
            ("tau_ph", self.tau_ph > 0, "must be > 0"),
            ("tau_e", self.tau_e > 0, "must be > 0"),
            ("epsilon", 0 < self.epsilon <= 1, "must be in (0, 1]"),
            ("N_tr", self.n_tr >= 0, "must be >= 0"),
            ("N_th", self.n_th > self.n_tr, "must exceed N_tr"),
            ("C_sp", self.c_sp >= 0, "must be >= 0"),
            ("Gamma", 0 < self.gamma <= 1, "must be in (0, 1]"),
            ("chi", self.chi >= 0, "must be >= 0"),
            ("lambda", self.wavelength > 0, "must be > 0"),
        ]
        if self.v_active is not None:
            checks.append(("V_active", self.v_active > 0, "must be > 0"))
        for key, ok, what in checks:
            if not ok:
                raise ConfigError(f"invalid laser parameter '{key}': {what}")

    @property
    def omega0(self) -> float:
        """Central angular frequency 2*pi*c/lambda [rad/s]."""
        return TWO_PI * C_LIGHT / self.wavelength

    @property
    def photon_energy(self) -> float:
        return HBAR * self.omega0

    @property
    def power_per_photon(self) -> float:
        """Single-facet output power per intracavity photon [W]."""
        return self.epsilon * self.photon_energy / (2.0 * self.gamma * self.tau_ph)

    @property
    def chi_q_dimensionless(self) -> float:
        """Photon-number form of the gain compression factor."""
        return self.chi * self.power_per_photon


@dataclass(frozen=True)
class CouplingParams:
    """Master-to-slave optical injection coupling."""

    kappa_ex: float                    # injection coupling rate [1/s]
    delta_omega: float = 0.0           # master-slave angular detuning [rad/s]
    t_ms: float | None = None          # facet amplitude transmittance
    tau_round_trip: float | None = None  # cavity round-trip time [s]

    def __post_init__(self):
        if self.kappa_ex < 0:
            raise ConfigError("invalid coupling parameter 'kappa_ex': must be >= 0")


@dataclass(frozen=True)
class CurrentPoint:
    """A pump current tagged by its role in a drive program."""

    current: float           # [A]
    role: str = "steady"     # one of {"bias", "steady", "perturbed"}

    def __post_init__(self):
        if self.current < 0:
            raise ConfigError("invalid current point 'I': must be >= 0")
        if self.role not in ("bias", "steady", "perturbed"):
            raise ConfigError(f"invalid current point role '{self.role}'")


def threshold_current(p: LaserParams) -> float:
    """I_th = N_th e / tau_e [A]."""
    return p.n_th * E_CHARGE / p.tau_e


def transparency_current(p: LaserParams) -> float:
    """I_tr = N_tr e / tau_e [A]."""
    return p.n_tr * E_CHARGE / p.tau_e


def photon_to_power(q: float, p: LaserParams) -> float:
    """Single-facet output power for an intracavity photon number [W]."""
    if q < 0:
        raise ValueError("photon number must be >= 0")
    return q * p.power_per_photon


_CHI_KINDS = ("chi", "chi_Q", "chi_q")


def chi_convert(value: float, from_kind: str, to_kind: str, p: LaserParams) -> float:
    """Convert between the three gain-compression conventions.

    'chi' multiplies output power [1/W], 'chi_Q' multiplies the photon
    number (dimensionless), 'chi_q' multiplies the photon density [m^3].
    Round trips are exact to a few ulps.
    """
    for kind in (from_kind, to_kind):
        if kind not in _CHI_KINDS:
            raise ValueError(f"unknown chi kind '{kind}'")
    if "chi_q" in (from_kind, to_kind) and p.v_active is None:
        raise ConfigError("chi_q conversion requires 'V_active' to be set")
    if from_kind == to_kind:
        return value
    # pivot through the dimensionless photon-number form
    if from_kind == "chi":
        pivot = value * p.power_per_photon
    elif from_kind == "chi_q":
        pivot = value / p.v_active
    else:
        pivot = value
    if to_kind == "chi":
        return pivot / p.power_per_photon
    if to_kind == "chi_q":
        return pivot * p.v_active
    return pivot


# --------------------------------------------------------------------------
# Config-file parsing.
#
# Flat key-value text with sections [master], [slave], [coupling], [thermal].
# All keys carry their unit in the name; values are plain numbers.

_LASER_KEYS = {
    "tau_ph_ps": ("tau_ph", 1e-12),
    "tau_e_ns": ("tau_e", 1e-9),
    "epsilon": ("epsilon", 1.0),
    "N_tr": ("n_tr", 1.0),
    "N_th": ("n_th", 1.0),
    "C_sp": ("c_sp", 1.0),
    "Gamma": ("gamma", 1.0),
    "alpha": ("alpha", 1.0),
    "chi_per_W": ("chi", 1.0),
    "lambda_nm": ("wavelength", 1e-9),
}
_LASER_OPTIONAL = {
    "V_active_m3": ("v_active", 1.0),
}


def _parse_number(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"non-numeric value for '{key}' in [{section}]: {raw!r}"
        ) from None


def _read_sections(text: str) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError:
        cp.read_string("[laser]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"config text does not parse: {exc}") from None
    return {name: dict(cp[name]) for name in cp.sections()}


def _laser_from_mapping(section: str, mapping: dict[str, str]) -> LaserParams:
    kwargs = {}
    for key, (attr, scale) in _LASER_KEYS.items():
        if key not in mapping:
            raise ConfigError(f"missing key '{key}' in [{section}]")
        kwargs[attr] = _parse_number(section, key, mapping[key]) * scale
    for key, (attr, scale) in _LASER_OPTIONAL.items():
        if key in mapping:
            kwargs[attr] = _parse_number(section, key, mapping[key]) * scale
    return LaserParams(**kwargs)


def load_params(text: str, section: str | None = None) -> LaserParams:
    """Parse one laser's parameter block from key-value text.

    With `section=None` the text must contain exactly one section (or bare
    key-value lines). Raises ConfigError naming any missing key, non-numeric
    value, or invariant violation.
    """
    sections = _read_sections(text)
    if not sections:
        raise ConfigError("config text contains no keys")
    if section is None:
        if len(sections) != 1:
            raise ConfigError(
                "several sections present; pass section= to pick one of "
                + ", ".join(sections)
            )
        (section,) = sections
    if section not in sections:
        raise ConfigError(f"missing section [{section}]")
    return _laser_from_mapping(section, sections[section])


def _coupling_from_mapping(mapping: dict[str, str]) -> CouplingParams:
    if "kappa_ex_per_s" not in mapping:
        raise ConfigError("missing key 'kappa_ex_per_s' in [coupling]")
    kappa = _parse_number("coupling", "kappa_ex_per_s", mapping["kappa_ex_per_s"])
    # delta_omega_hz holds the detuning as a plain frequency (delta_omega/2pi)
    dw = 0.0
    if "delta_omega_hz" in mapping:
        dw = TWO_PI * _parse_number("coupling", "delta_omega_hz", mapping["delta_omega_hz"])
    return CouplingParams(kappa_ex=kappa, delta_omega=dw)


@dataclass(frozen=True)
class SimConfig:
    """Everything a two-laser simulation run needs."""

    master: LaserParams
    slave: LaserParams
    coupling: CouplingParams
    thermal: "object | None" = None  # thermal.ThermalParams when present

    def with_overrides(self, **kwargs) -> "SimConfig":
        return replace(self, **kwargs)


def load_config(text: str) -> SimConfig:
    """Parse a full [master]/[slave]/[coupling](/[thermal]) config."""
    from . import thermal as _thermal  # local import, avoids cycle at module load

    sections = _read_sections(text)
    for name in ("master", "slave", "coupling"):
        if name not in sections:
            raise ConfigError(f"missing section [{name}]")
    master = _laser_from_mapping("master", sections["master"])
    slave = _laser_from_mapping("slave", sections["slave"])
    coupling = _coupling_from_mapping(sections["coupling"])
    therm = None
    if "thermal" in sections:
        therm = _thermal.thermal_params_from_mapping(
            sections["thermal"], master, _parse_number
        )
    return SimConfig(master=master, slave=slave, coupling=coupling, thermal=therm)


def load_config_file(path: str) -> SimConfig:
    with io.open(path, "r", encoding="utf-8") as fh:
        return load_config(fh.read())


def table1_params() -> LaserParams:
    """The baseline device used throughout: 1.55 um laser, 1 ps photon
    lifetime, strong gain compression."""
    return LaserParams(
        tau_ph=1.0e-12,
        tau_e=1.0e-9,
        epsilon=0.3,
        n_tr=4.0e7,
        n_th=5.5e7,
        c_sp=1.0e-5,
        gamma=0.12,
        alpha=5.0,
        chi=30.0,
        wavelength=1.55e-6,
    )
