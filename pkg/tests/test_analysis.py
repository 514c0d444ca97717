import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from injectsim import (
    PulseTrainSpec,
    Trajectory,
    coding_error_rate,
    cosine_fit_residual,
    default_gates,
    delta_i_pi,
    extract_pulse_phases,
    fringe_scan,
    interfere_delayed,
    pair_phase_diffs,
    pair_phases_delayed,
    wrap_phase,
)
from injectsim.analysis import FringePoint, classify_bit


def synthetic_traj(q, phi, dt=1e-12):
    q = np.asarray(q, dtype=float)
    phi = np.asarray(phi, dtype=float)
    z = np.zeros_like(q)
    return Trajectory(t0=0.0, dt=dt, n_m=z, q_m=z, phi_m=z, d_temp_m=z,
                      n_s=z, q_s=q, phi_s=phi, i_m=z, i_s=z)


def two_pulse_traj(phase2, q_peak=100.0, n=400, dt=1e-12):
    """Two identical rectangular pulses, second carrying an extra phase."""
    q = np.zeros(n)
    phi = np.zeros(n)
    q[50:150] = q_peak
    q[250:350] = q_peak
    phi[200:] = phase2
    return synthetic_traj(q, phi, dt), 200e-12


def test_wrap_phase_range_convention():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_phase(0.25) == pytest.approx(0.25)
    assert wrap_phase(-0.25) == pytest.approx(-0.25)


@given(x=st.floats(min_value=-50, max_value=50), k=st.integers(min_value=-5, max_value=5))
def test_wrap_phase_periodic(x, k):
    assert wrap_phase(x + 2 * math.pi * k) == pytest.approx(wrap_phase(x), abs=1e-9)


def test_interference_constructive():
    traj, delay = two_pulse_traj(0.0)
    trace = interfere_delayed(traj, delay)
    k = traj.index_at(270e-12) - round(delay / traj.dt)
    assert trace.intensity[k] == pytest.approx(100.0)


def test_interference_destructive_and_quadrature():
    traj, delay = two_pulse_traj(math.pi)
    trace = interfere_delayed(traj, delay)
    sel = (trace.t >= 260e-12) & (trace.t < 340e-12)
    assert np.max(trace.intensity[sel]) < 1e-20
    traj, delay = two_pulse_traj(math.pi / 2)
    trace = interfere_delayed(traj, delay)
    sel = (trace.t >= 260e-12) & (trace.t < 340e-12)
    assert trace.intensity[sel] == pytest.approx(0.25 * (100 + 100), rel=1e-12)


def test_interference_bias_phase_shifts_operating_point():
    traj, delay = two_pulse_traj(1.1)
    trace = interfere_delayed(traj, delay, bias_phase=1.1)
    sel = (trace.t >= 260e-12) & (trace.t < 340e-12)
    assert trace.intensity[sel] == pytest.approx(100.0, rel=1e-12)


def test_interference_requires_on_grid_delay():
    traj, _ = two_pulse_traj(0.0)
    with pytest.raises(ValueError, match="multiple"):
        interfere_delayed(traj, 200.5e-12)


@given(shift=st.floats(min_value=-10, max_value=10))
@settings(max_examples=25, deadline=None)
def test_interference_invariant_under_global_phase(shift):
    traj, delay = two_pulse_traj(0.7)
    shifted = synthetic_traj(traj.q_s, traj.phi_s + shift)
    a = interfere_delayed(traj, delay).intensity
    b = interfere_delayed(shifted, delay).intensity
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


def test_interference_energy_bound():
    rng = np.random.default_rng(0)
    q = rng.uniform(0, 50, 300)
    phi = rng.uniform(-math.pi, math.pi, 300)
    traj = synthetic_traj(q, phi)
    trace = interfere_delayed(traj, 100e-12)
    k = round(100e-12 / traj.dt)
    bound = 0.25 * (np.sqrt(q[k:]) + np.sqrt(q[:-k])) ** 2
    assert np.all(trace.intensity <= bound + 1e-9)
    assert np.all(trace.intensity >= 0)


def test_extract_pulse_phases_constant_phase():
    q = np.zeros(200)
    q[40:80] = 10.0
    q[140:180] = 10.0
    phi = np.full(200, 0.3)
    traj = synthetic_traj(q, phi)
    recs = extract_pulse_phases(traj, [(40e-12, 80e-12), (140e-12, 180e-12)])
    assert recs[0].phase == pytest.approx(0.3, abs=1e-12)
    assert recs[0].energy == pytest.approx(40 * 10 * 1e-12, rel=1e-12)
    assert recs[0].centroid == pytest.approx(59.5e-12, rel=1e-6)
    assert all(r.has_pulse for r in recs)


def test_extract_pulse_phases_circular_mean_near_pi():
    q = np.zeros(100)
    q[10:50] = 5.0
    phi = np.zeros(100)
    phi[10:30] = math.pi - 0.01
    phi[30:50] = -math.pi + 0.01  # same angle as pi + 0.01
    traj = synthetic_traj(q, phi)
    recs = extract_pulse_phases(traj, [(10e-12, 50e-12)])
    assert abs(wrap_phase(recs[0].phase - math.pi)) < 1e-9


def test_extract_pulse_phases_equivariance():
    q = np.zeros(200)
    q[40:80] = 10.0
    q[140:180] = 10.0
    phi = np.linspace(0, 1.0, 200)
    gates = [(40e-12, 80e-12), (140e-12, 180e-12)]
    base = extract_pulse_phases(synthetic_traj(q, phi), gates)
    phi2 = phi.copy()
    phi2[130:200] += 0.8  # shift covering the second gate only
    moved = extract_pulse_phases(synthetic_traj(q, phi2), gates)
    assert wrap_phase(moved[1].phase - base[1].phase) == pytest.approx(0.8, abs=1e-9)
    assert moved[0].phase == pytest.approx(base[0].phase)
    dp = pair_phase_diffs(moved)
    assert dp[0] == pytest.approx(pair_phase_diffs(base)[0] + 0.8, abs=1e-9)


def test_extract_pulse_phases_flags_missing_pulse():
    q = np.zeros(300)
    q[40:80] = 10.0
    q[140:180] = 10.0
    # third gate has (almost) no light
    q[240:280] = 1e-6
    traj = synthetic_traj(q, np.zeros(300))
    recs = extract_pulse_phases(
        traj, [(40e-12, 80e-12), (140e-12, 180e-12), (240e-12, 280e-12)])
    assert recs[0].has_pulse and recs[1].has_pulse
    assert not recs[2].has_pulse


def test_extract_pulse_phases_validates_gates():
    traj = synthetic_traj(np.ones(100), np.zeros(100))
    with pytest.raises(ValueError, match="ordered"):
        extract_pulse_phases(traj, [(40e-12, 80e-12), (50e-12, 90e-12)])
    with pytest.raises(ValueError, match="empty"):
        extract_pulse_phases(traj, [(40e-12, 40e-12)])


def test_pair_phases_delayed_reads_encoded_offset():
    # phase winds fast (many turns per gate) plus a per-pulse offset; the
    # interferometric pair phase must recover the offset exactly
    n, dt = 1000, 1e-12
    period = 250e-12
    q = np.zeros(n)
    phi = 2 * math.pi * 3e9 * dt * np.arange(n)  # 3 GHz winding
    offsets = [0.0, 0.4, 0.4 + math.pi, 0.4 + math.pi]
    gates = []
    for j in range(4):
        a = j * 250 + 50
        q[a:a + 150] = 70.0
        phi[j * 250:(j + 1) * 250] += sum(offsets[: j + 1])
        gates.append(((a + 30) * dt, (a + 120) * dt))
    traj = synthetic_traj(q, phi)
    phases, weights = pair_phases_delayed(traj, period, gates)
    wind = wrap_phase(2 * math.pi * 3e9 * period)
    assert wrap_phase(phases[0] - wind) == pytest.approx(0.4, abs=1e-9)
    assert wrap_phase(phases[1] - wind) == pytest.approx(wrap_phase(0.4 + math.pi), abs=1e-9)
    assert weights[0] == pytest.approx(70.0 * 90e-12, rel=1e-9)


def test_default_gates_trim_margins():
    spec = PulseTrainSpec(2.5e-9, 1.0e-9, 0.004, 0.026, 2, t_start=2e-9)
    gates = default_gates(spec)
    assert gates[0] == (pytest.approx(2.2e-9), pytest.approx(2.8e-9))
    assert gates[1][0] == pytest.approx(4.7e-9)


def test_fringe_scan_end_to_end(p, cfg):
    dipi = delta_i_pi(p, 0.030, 0.1e-9)
    train = PulseTrainSpec(2.5e-9, 1.0e-9, 0.004, 0.026, 2, t_start=2e-9)
    ramp = [-dipi, -dipi / 2, 0.0, dipi / 2, dipi]
    pts = fringe_scan(cfg, 0.030, ramp, 0.1e-9, train, 5e-14)
    phases = [q.delta_phi for q in pts]
    energies = [q.pair_energy for q in pts]
    assert phases[2] == pytest.approx(0.0, abs=0.05)
    assert energies[2] == max(energies)
    assert abs(wrap_phase(phases[-1] - math.pi)) < 0.1 * math.pi
    assert abs(wrap_phase(phases[0] + math.pi)) < 0.1 * math.pi
    assert cosine_fit_residual(pts) < 0.05
    with pytest.raises(ValueError, match="sorted"):
        fringe_scan(cfg, 0.030, [0.0, -dipi], 0.1e-9, train, 5e-14)


def test_classify_bit_threshold():
    assert classify_bit(0.0) == 0
    assert classify_bit(math.pi) == 1
    assert classify_bit(math.pi / 2 - 1e-6) == 0
    assert classify_bit(math.pi / 2 + 1e-6) == 1
    assert classify_bit(-3.0) == 1


def test_coding_error_rate_exact_and_uniform():
    exact = coding_error_rate([0.01, math.pi - 0.01, -0.02, math.pi + 0.05], [0, 1, 0, 1])
    assert exact.rate == 0.0
    assert exact.ci_low == 0.0
    rng = np.random.default_rng(5)
    uniform = rng.uniform(-math.pi, math.pi, 2000)
    bits = rng.integers(0, 2, 2000)
    er = coding_error_rate(uniform, bits)
    assert er.rate == pytest.approx(0.5, abs=0.05)
    assert er.ci_low < 0.5 < er.ci_high


def test_coding_error_rate_exchangeable():
    rng = np.random.default_rng(8)
    dphi = rng.uniform(-math.pi, math.pi, 500)
    bits = rng.integers(0, 2, 500)
    base = coding_error_rate(dphi, bits)
    perm = rng.permutation(500)
    shuffled = coding_error_rate(dphi[perm], bits[perm])
    assert shuffled.rate == base.rate
    assert shuffled.errors == base.errors


def test_coding_error_rate_validation():
    with pytest.raises(ValueError):
        coding_error_rate([], [])
    with pytest.raises(ValueError):
        coding_error_rate([0.1, 0.2], [0])


def test_cosine_fit_residual_on_clean_cosine():
    phi = np.linspace(-math.pi, math.pi, 20)
    pts = [FringePoint(0.0, 3.0 + 2.0 * math.cos(x + 0.3), x) for x in phi]
    assert cosine_fit_residual(pts) < 1e-12
    noisy = [FringePoint(0.0, 3.0 + 2.0 * math.cos(x) + 0.05 * math.sin(5 * x), x)
             for x in phi]
    assert 0 < cosine_fit_residual(noisy) < 0.05
