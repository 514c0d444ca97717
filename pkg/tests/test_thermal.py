import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from injectsim import (
    ThermalMaterial,
    ThermalParams,
    convert_mu,
    f_fit,
    heat_power,
    ierfc,
    integrate_dt,
    phase_rate_correction,
    thermal_constants,
    y_exact,
)
from injectsim.drive import DriveWaveform, constant_drive
from injectsim.params import ConfigError


def fourier_face_temperature(p):
    """Independent oracle: eigenmode series for the slab step response
    (zero-temperature face at x=0, constant flux at x=l), evaluated at the
    heated face, in the same dimensionless units as y_exact."""
    total = 0.0
    n = 0
    while True:
        term = math.exp(-((2 * n + 1) ** 2) * math.pi**2 * p / 4) / (2 * n + 1) ** 2
        total += term
        if term < 1e-18:
            break
        n += 1
    return math.sqrt(math.pi) / 2 * (1 - 8 / math.pi**2 * total)


def test_ierfc_values():
    assert ierfc(0.0) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-12)
    assert ierfc(1.0) == pytest.approx(0.050254541660012, abs=1e-10)
    assert ierfc(2.0) == pytest.approx(9.780227149515e-4, abs=1e-10)
    assert ierfc(10.0) < 1e-40


def test_ierfc_vectorized_and_monotone():
    z = np.linspace(0, 6, 200)
    v = ierfc(z)
    assert v.shape == z.shape
    assert np.all(np.diff(v) < 0)
    assert np.all(v > 0)


def test_y_exact_short_time_is_sqrt_p():
    assert y_exact(0.01) == pytest.approx(0.1, abs=1e-6)


def test_y_exact_saturates():
    y10 = y_exact(10.0)
    assert y10 == pytest.approx(0.8862269254, rel=1e-9)
    assert abs(y10 - 0.87) / 0.87 < 0.02
    assert y10 < math.sqrt(math.pi) / 2 + 1e-12


def test_y_exact_frozen_midrange():
    assert y_exact(0.5) == pytest.approx(0.677033352814, rel=1e-9)
    assert y_exact(1.0) == pytest.approx(0.825307401643, rel=1e-9)


def test_y_exact_matches_fourier_oracle():
    for p in np.geomspace(0.05, 10, 40):
        assert y_exact(p) == pytest.approx(fourier_face_temperature(p), abs=1e-9)


def test_y_exact_monotone_and_domain():
    grid = np.geomspace(0.01, 10, 60)
    vals = [y_exact(p) for p in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        y_exact(0.0)


def test_f_fit_values():
    assert f_fit(0.0) == 0.0
    assert f_fit(1.0) == pytest.approx(0.837589151, rel=1e-9)
    assert f_fit(1e9) == pytest.approx(0.87)
    with pytest.raises(ValueError):
        f_fit(-1.0)


def test_fit_quality_is_good_only_past_the_diffusive_regime():
    # A single exponential cannot follow the sqrt(p) short-time growth:
    # the gap peaks near 0.093 around p ~ 0.04 and is still ~0.026 at
    # p ~ 0.6. Past p ~ 1 the fit tracks within ~0.016.
    grid = np.geomspace(0.01, 10, 400)
    gaps = np.array([abs(y_exact(q) - f_fit(q)) for q in grid])
    assert 0.085 < gaps.max() < 0.10
    late = grid >= 1.0
    assert gaps[late].max() < 0.02


def test_thermal_constants_examples():
    m = ThermalMaterial(k=68.0, rho=5317.0, c_heat=330.0, l=1.5e-6,
                        l_active=500e-6, w_active=2e-6)
    r_h, tau_h, d_heat = thermal_constants(m)
    assert r_h == pytest.approx(10.827462, rel=1e-6)    # ~10 K/W
    m2 = ThermalMaterial(k=55.0, rho=5317.0, c_heat=330.0, l=1.5e-6,
                         l_active=500e-6, w_active=2e-6)
    _, tau_h2, d2 = thermal_constants(m2)
    assert d2 == pytest.approx(3.1345997e-5, rel=1e-6)
    assert tau_h2 == pytest.approx(18.405e-9, rel=1e-4)  # tens of ns


def test_thermal_constants_scalings():
    base = ThermalMaterial(k=68.0, rho=5317.0, c_heat=330.0, l=1.5e-6,
                           l_active=500e-6, w_active=2e-6)
    r0, _, _ = thermal_constants(base)
    r_thick, _, _ = thermal_constants(ThermalMaterial(
        k=68.0, rho=5317.0, c_heat=330.0, l=3.0e-6, l_active=500e-6, w_active=2e-6))
    assert r_thick == pytest.approx(2 * r0, rel=1e-12)
    r_wide, _, _ = thermal_constants(ThermalMaterial(
        k=68.0, rho=5317.0, c_heat=330.0, l=1.5e-6, l_active=500e-6, w_active=4e-6))
    assert r_wide == pytest.approx(r0 / 2, rel=1e-12)
    # the 0.87/sqrt(pi) prefactor is the l/(2kA) shorthand to within 2%
    assert 0.87 / math.sqrt(math.pi) == pytest.approx(0.5, rel=0.02)


def test_heat_power():
    assert heat_power(0.030, 1.55e-6, 0.3) == pytest.approx(16.8e-3, rel=1e-12)
    assert heat_power(0.030, 1.55e-6, 1.0) == 0.0
    assert heat_power(0.0, 1.55e-6, 0.3) == 0.0
    with pytest.raises(ValueError):
        heat_power(-1e-3, 1.55e-6, 0.3)


TP = ThermalParams(r_h=10.0, tau_h=10e-9, mu_omega=2 * math.pi * 1e10,
                   wavelength=1.55e-6, epsilon=0.3, i_bias=0.0)


def test_integrate_dt_bias_current_stays_cold():
    grid = np.linspace(0, 50e-9, 501)
    out = integrate_dt(constant_drive(TP.i_bias), TP, grid)
    assert np.all(out == 0.0)


def test_integrate_dt_step_matches_closed_form():
    grid = np.linspace(0, 150e-9, 3001)
    out = integrate_dt(constant_drive(0.030), TP, grid)
    target = 0.168 * (1 - np.exp(-grid / TP.tau_h))
    assert out == pytest.approx(target, rel=1e-12, abs=1e-15)
    assert out[-1] == pytest.approx(0.168, rel=1e-3)


def test_integrate_dt_settles_98_percent_at_3p9_tau():
    t39 = 3.9 * TP.tau_h
    out = integrate_dt(constant_drive(0.030), TP, np.array([0.0, t39]))
    ratio = out[-1] / 0.168
    assert ratio == pytest.approx(1 - math.exp(-3.9), rel=1e-12)
    assert abs(ratio - 0.98) < 1e-3


def test_integrate_dt_pulse_with_unaligned_edges_is_exact():
    # pulse edges deliberately off the sample grid: per-segment exponentials
    # must still be exact
    t_on, t_off = 7.3e-9, 23.7e-9
    wf = DriveWaveform(np.array([0.0, t_on, t_off]), np.array([0.0, 0.030, 0.0]))
    grid = np.linspace(0, 60e-9, 601)
    out = integrate_dt(wf, TP, grid)
    dt_inf = 0.168

    def closed(t):
        if t <= t_on:
            return 0.0
        if t <= t_off:
            return dt_inf * (1 - math.exp(-(t - t_on) / TP.tau_h))
        peak = dt_inf * (1 - math.exp(-(t_off - t_on) / TP.tau_h))
        return peak * math.exp(-(t - t_off) / TP.tau_h)

    target = np.array([closed(t) for t in grid])
    assert out == pytest.approx(target, rel=1e-12, abs=1e-15)


def test_integrate_dt_rejects_nonuniform_grid():
    with pytest.raises(ValueError):
        integrate_dt(constant_drive(0.03), TP, np.array([0.0, 1e-9, 3e-9]))


def test_phase_rate_correction():
    assert phase_rate_correction(0.0, TP) == 0.0
    one = phase_rate_correction(0.168, TP)
    assert one == pytest.approx(-2 * math.pi * 1.68e9, rel=1e-12)
    assert phase_rate_correction(0.336, TP) == pytest.approx(2 * one, rel=1e-12)
    arr = phase_rate_correction(np.array([0.0, 0.168]), TP)
    assert arr[1] == pytest.approx(one)


def test_convert_mu():
    mu = convert_mu(0.08e-9, 1.55e-6)
    assert mu / (2 * math.pi) == pytest.approx(9.9826833e9, rel=1e-6)
    assert convert_mu(0.0, 1.55e-6) == 0.0
    assert convert_mu(0.16e-9, 1.55e-6) == pytest.approx(2 * mu, rel=1e-12)
    with pytest.raises(ValueError):
        convert_mu(0.08e-9, 0.0)


@given(dt_val=st.floats(min_value=-5, max_value=5))
def test_phase_rate_correction_is_linear(dt_val):
    assert phase_rate_correction(dt_val, TP) == pytest.approx(-TP.mu_omega * dt_val, rel=1e-12)


def test_thermal_params_from_material_keys():
    from injectsim import load_config
    from injectsim.scenarios import DEFAULT_CONFIG

    text = DEFAULT_CONFIG.replace(
        "r_h_K_per_W = 10.0\ntau_h_ns = 10.0\n",
        "k = 68.0\nrho = 5317.0\nC_heat = 330.0\nl_um = 1.5\nL_um = 500.0\nw_um = 2.0\n",
    )
    cfg = load_config(text)
    assert cfg.thermal.r_h == pytest.approx(10.827462, rel=1e-6)
    assert cfg.thermal.tau_h == pytest.approx((1.5e-6) ** 2 / (3.9 * 68.0 / (5317.0 * 330.0)), rel=1e-12)


def test_thermal_params_require_one_parameterization():
    from injectsim import load_config
    from injectsim.scenarios import DEFAULT_CONFIG

    text = DEFAULT_CONFIG.replace("r_h_K_per_W = 10.0\ntau_h_ns = 10.0\n", "")
    with pytest.raises(ConfigError, match="thermal"):
        load_config(text)


def test_thermal_material_validation():
    with pytest.raises(ConfigError, match="rho"):
        ThermalMaterial(k=68.0, rho=0.0, c_heat=330.0, l=1.5e-6,
                        l_active=500e-6, w_active=2e-6)
