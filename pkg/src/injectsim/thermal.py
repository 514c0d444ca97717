"""Active-layer heating and the temperature-to-frequency coupling.

A one-dimensional slab model (active layer heating a clamping layer bonded
to a heat sink) reduces to a single-pole response characterized by a
thermal resistance r_h and rise time tau_h. Joule heating in the bulk is
neglected throughout; only the non-radiated fraction of the pump power
heats the junction. The temperature deviation feeds the master laser's
phase equation only; amplitudes are left untouched (first-order
approximation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .params import ConfigError, LaserParams

SQRT_PI = math.sqrt(math.pi)

# y(p) series truncation: terms decay super-exponentially once n ~ sqrt(p)
_SERIES_TOL = 1e-12
_SERIES_MAX_TERMS = 10_000


@dataclass(frozen=True)
class ThermalMaterial:
    """Clamping-layer material and geometry."""

    k: float         # thermal conductivity [W/(m K)]
    rho: float       # mass density [kg/m^3]
    c_heat: float    # specific heat capacity [J/(kg K)]
    l: float         # clamping-layer thickness [m]
    l_active: float  # active-layer length [m]
    w_active: float  # active-layer width [m]

    def __post_init__(self):
        for name in ("k", "rho", "c_heat", "l", "l_active", "w_active"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"invalid thermal material '{name}': must be > 0")

    @property
    def area(self) -> float:
        return self.l_active * self.w_active


@dataclass(frozen=True)
class ThermalParams:
    """Phenomenological single-pole heating model of one laser."""

    r_h: float        # thermal resistance junction-to-sink [K/W]
    tau_h: float      # thermal rise time [s]
    mu_omega: float   # frequency-vs-temperature coefficient [rad/(s K)]
    wavelength: float  # lasing wavelength [m]
    epsilon: float    # differential quantum output
    i_bias: float = 0.0  # current at which dT is defined as zero [A]
    t0: float = 293.0    # reference active-layer temperature [K]

    def __post_init__(self):
        if self.r_h <= 0:
            raise ConfigError("invalid thermal parameter 'r_h': must be > 0")
        if self.tau_h <= 0:
            raise ConfigError("invalid thermal parameter 'tau_h': must be > 0")
        if self.mu_omega < 0:
            raise ConfigError("invalid thermal parameter 'mu_omega': must be >= 0")

    @property
    def heat_coefficient(self) -> float:
        """Steady temperature rise per ampere of current above bias [K/A]."""
        return self.r_h * (1.24 / (self.wavelength * 1e6)) * (1.0 - self.epsilon)


def ierfc(z):
    """First iterated integral of the complementary error function.

    ierfc(z) = exp(-z^2)/sqrt(pi) - z*erfc(z). Accurate to ~1e-10 absolute
    (limited only by the library erfc).
    """
    z = np.asarray(z, dtype=float)
    out = np.exp(-z * z) / SQRT_PI - z * erfc(z)
    return out if out.ndim else float(out)


def y_exact(p: float) -> float:
    """Dimensionless face temperature of the heated slab at time p = D*t/l^2.

    Image-source series; truncated when the next term drops below 1e-12.
    Rises from sqrt(p) at short times to sqrt(pi)/2 at saturation.
    """
    if p <= 0:
        raise ValueError("dimensionless time must be > 0")
    sp = math.sqrt(p)
    total = 0.0
    sign = -1.0
    for n in range(1, _SERIES_MAX_TERMS + 1):
        term = 2.0 * SQRT_PI * sp * ierfc(n / sp)
        total += sign * term
        if term < _SERIES_TOL:
            break
        sign = -sign
    return sp + total


def f_fit(p):
    """Single-exponential approximation to y_exact: 0.87*(1 - exp(-3.29 p))."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("dimensionless time must be >= 0")
    out = 0.87 * (1.0 - np.exp(-3.29 * p))
    return out if out.ndim else float(out)


def thermal_constants(m: ThermalMaterial) -> tuple[float, float, float]:
    """(r_h, tau_h, D) from material constants.

    r_h = 0.87*l/(k*A*sqrt(pi)), i.e. l/(2kA) to within 2%: the heat is
    shared by two clamping layers. tau_h = l^2/(3.9*D); at t = 3.9*tau_h
    the diffusion length reaches the layer thickness.
    """
    d_heat = m.k / (m.rho * m.c_heat)
    r_h = 0.87 * m.l / (m.k * m.area * SQRT_PI)
    tau_h = m.l**2 / (3.9 * d_heat)
    return r_h, tau_h, d_heat


def heat_power(i: float, wavelength: float, epsilon: float) -> float:
    """Heat dissipated in the active layer at pump current i [W].

    The junction voltage is taken as the band gap, 1.24/lambda volts with
    lambda in micrometers; only the non-radiated fraction heats.
    """
    if i < 0:
        raise ValueError("current must be >= 0")
    return (1.24 / (wavelength * 1e6)) * i * (1.0 - epsilon)


def integrate_dt(drive, tp: ThermalParams, t_grid) -> np.ndarray:
    """Temperature deviation along a uniform time grid, dT(0) = 0.

    The response to a piecewise-constant drive is integrated exactly,
    segment by segment (single-pole linear dynamics), so a rectangular
    pulse reproduces the closed-form exponential to machine precision.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("time grid must be a 1-D array")
    if t_grid.size > 1:
        steps = np.diff(t_grid)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError("time grid must be uniform")

    starts = np.asarray(drive.segment_starts, dtype=float)
    currents = np.asarray(drive.currents, dtype=float)
    coef = tp.heat_coefficient

    out = np.empty_like(t_grid)
    x = 0.0           # dT at time t_cur
    t_cur = starts[0]
    seg = 0
    if t_grid[0] < t_cur:
        raise ValueError("time grid starts before the drive waveform")

    def advance(x, t_from, t_to, i_seg):
        target = coef * (i_seg - tp.i_bias)
        return target + (x - target) * math.exp(-(t_to - t_from) / tp.tau_h)

    for k, t in enumerate(t_grid):
        # cross any segment boundaries between t_cur and t exactly
        while seg + 1 < starts.size and starts[seg + 1] <= t:
            x = advance(x, t_cur, starts[seg + 1], currents[seg])
            t_cur = starts[seg + 1]
            seg += 1
        x = advance(x, t_cur, t, currents[seg])
        t_cur = t
        out[k] = x
    return out


def phase_rate_correction(delta_t, tp: ThermalParams):
    """Angular-frequency offset added to the phase rate: -mu_omega*dT."""
    if np.ndim(delta_t):
        return -tp.mu_omega * np.asarray(delta_t, dtype=float)
    return -tp.mu_omega * float(delta_t)


def convert_mu(mu_lambda: float, wavelength: float) -> float:
    """Wavelength temperature coefficient [m/K] -> angular-frequency one.

    mu_omega = omega^2 * mu_lambda / (2 pi c).
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    from .params import C_LIGHT, TWO_PI

    omega = TWO_PI * C_LIGHT / wavelength
    return omega**2 * mu_lambda / (TWO_PI * C_LIGHT)


_THERMAL_DIRECT_KEYS = ("r_h_K_per_W", "tau_h_ns", "mu_omega_GHz_per_K")
_THERMAL_MATERIAL_KEYS = ("k", "rho", "C_heat", "l_um", "L_um", "w_um")


def thermal_params_from_mapping(mapping, master: LaserParams, parse) -> ThermalParams:
    """Build ThermalParams from a [thermal] config section.

    Either r_h/tau_h are given directly, or they are derived from the
    material keys (k, rho, C_heat, l_um, L_um, w_um).
    """
    if "mu_omega_GHz_per_K" not in mapping:
        raise ConfigError("missing key 'mu_omega_GHz_per_K' in [thermal]")
    mu = 2.0 * math.pi * 1e9 * parse("thermal", "mu_omega_GHz_per_K", mapping["mu_omega_GHz_per_K"])

    have_direct = all(k in mapping for k in _THERMAL_DIRECT_KEYS[:2])
    have_material = all(k in mapping for k in _THERMAL_MATERIAL_KEYS)
    if have_direct:
        r_h = parse("thermal", "r_h_K_per_W", mapping["r_h_K_per_W"])
        tau_h = 1e-9 * parse("thermal", "tau_h_ns", mapping["tau_h_ns"])
    elif have_material:
        mat = ThermalMaterial(
            k=parse("thermal", "k", mapping["k"]),
            rho=parse("thermal", "rho", mapping["rho"]),
            c_heat=parse("thermal", "C_heat", mapping["C_heat"]),
            l=1e-6 * parse("thermal", "l_um", mapping["l_um"]),
            l_active=1e-6 * parse("thermal", "L_um", mapping["L_um"]),
            w_active=1e-6 * parse("thermal", "w_um", mapping["w_um"]),
        )
        r_h, tau_h, _ = thermal_constants(mat)
    else:
        raise ConfigError(
            "section [thermal] needs either 'r_h_K_per_W' and 'tau_h_ns' or "
            "the material keys " + ", ".join(_THERMAL_MATERIAL_KEYS)
        )
    i_bias = 0.0
    if "I_b_mA" in mapping:
        i_bias = 1e-3 * parse("thermal", "I_b_mA", mapping["I_b_mA"])
    t0 = 293.0
    if "T0_K" in mapping:
        t0 = parse("thermal", "T0_K", mapping["T0_K"])
    return ThermalParams(
        r_h=r_h,
        tau_h=tau_h,
        mu_omega=mu,
        wavelength=master.wavelength,
        epsilon=master.epsilon,
        i_bias=i_bias,
        t0=t0,
    )
