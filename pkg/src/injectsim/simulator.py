"""Time-domain engine for the coupled master/slave rate equations.

Carrier number, photon number and optical phase of both lasers are stepped
with a fixed-step Euler-Maruyama scheme; the slave's photon and phase
equations carry the injection terms, the master's phase optionally carries
the thermal frequency drift. Spontaneous-emission noise enters through
three independent Wiener channels per laser.

Both phases are integrated in the solitary-slave rotating frame. Wherever
1/sqrt(Q) appears (phase-noise amplitude, injection phase pull) the photon
number is floored at Q_FLOOR: between gain-switched pulses Q collapses and
the phase diffusion amplitude would diverge; physically the phase is fully
randomized there, and the floor keeps the integrator finite while
preserving that randomization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .params import E_CHARGE, SimConfig, LaserParams, CouplingParams
from .drive import DriveWaveform

TWO_PI = 2.0 * math.pi
Q_FLOOR = 1e-2          # photons; floor for 1/sqrt(Q) amplitudes
_CHUNK = 1 << 18        # steps per kernel call (bounds noise-buffer memory)
_FINITE_CHECK_EVERY = 4096


@dataclass(frozen=True)
class LaserState:
    """Instantaneous state of one laser."""

    n: float          # carrier number
    q: float          # photon number
    phi: float        # optical phase [rad]
    d_temp: float = 0.0  # active-layer temperature deviation [K]

    def __post_init__(self):
        if self.n < 0 or self.q < 0:
            raise ValueError("carrier and photon numbers must be >= 0")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled run of both lasers plus their drives."""

    t0: float
    dt: float           # sample spacing (integration step x record stride)
    n_m: np.ndarray
    q_m: np.ndarray
    phi_m: np.ndarray
    d_temp_m: np.ndarray
    n_s: np.ndarray
    q_s: np.ndarray
    phi_s: np.ndarray
    i_m: np.ndarray
    i_s: np.ndarray

    def __post_init__(self):
        n = len(self.q_m)
        if n < 1 or self.dt <= 0:
            raise ValueError("trajectory needs dt > 0 and at least one sample")
        for name in ("n_m", "phi_m", "d_temp_m", "n_s", "q_s", "phi_s", "i_m", "i_s"):
            if len(getattr(self, name)) != n:
                raise ValueError("trajectory arrays must share one grid")

    def __len__(self):
        return len(self.q_m)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    def index_at(self, t: float) -> int:
        k = round((t - self.t0) / self.dt)
        if not 0 <= k < len(self):
            raise IndexError(f"time {t} outside trajectory")
        return int(k)


class NoiseStream:
    """Counter-based (Philox) source of the six Wiener channels.

    Keyed by (seed, stream id): equal keys reproduce the identical
    sequence, distinct stream ids give independent sequences, so ensemble
    members can be drawn in any order or in parallel. Channel layout per
    step: (A, B, C) master then (A, B, C) slave.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def normals(self, n_steps: int) -> np.ndarray:
        """Next (n_steps, 6) block of standard normals."""
        return self._gen.standard_normal((n_steps, 6))


def estimate_kappa(t_ms: float, tau_round_trip: float) -> float:
    """Injection rate from facet amplitude transmittance over round-trip time."""
    if tau_round_trip <= 0:
        raise ValueError("round-trip time must be > 0")
    if not 0 <= t_ms <= 1:
        raise ValueError("amplitude transmittance must be in [0, 1]")
    return t_ms / tau_round_trip


def _laser_packed(p: LaserParams) -> np.ndarray:
    return np.array(
        [p.tau_ph, p.tau_e, p.n_tr, p.n_th, p.c_sp, p.gamma, p.alpha,
         p.chi_q_dimensionless],
        dtype=np.float64,
    )


def deterministic_rhs(
    master: LaserState,
    slave: LaserState,
    i_m: float,
    i_s: float,
    config: SimConfig,
    t: float,
    thermal_on: bool = False,
):
    """Drift terms of all six rate equations at one instant.

    Returns ((dN, dQ, dphi) master, (dN, dQ, dphi) slave). The amplitude
    equations use the compressed gain, the phase equations the linear
    gain. The slave's photon/phase lines include the injection terms; the
    master's phase line includes -mu_omega*dT when thermal_on.
    """
    out = []
    for p, st, cur in ((config.master, master, i_m), (config.slave, slave, i_s)):
        gl = (st.n - p.n_tr) / (p.n_th - p.n_tr)
        g = gl * (1.0 - p.chi_q_dimensionless * st.q)
        dn = cur / E_CHARGE - st.n / p.tau_e - st.q * g / (p.gamma * p.tau_ph)
        dq = (g - 1.0) * st.q / p.tau_ph + p.c_sp * st.n / p.tau_e
        dphi = 0.5 * p.alpha / p.tau_ph * (gl - 1.0)
        out.append([dn, dq, dphi])
    if thermal_on:
        if config.thermal is None:
            raise ValueError("thermal coupling requested but no thermal params")
        out[0][2] -= config.thermal.mu_omega * master.d_temp
    kappa = config.coupling.kappa_ex
    if kappa > 0.0:
        psi = slave.phi - master.phi - config.coupling.delta_omega * t
        psi -= TWO_PI * math.floor(psi / TWO_PI + 0.5)
        qm = max(master.q, 0.0)
        qs = max(slave.q, 0.0)
        out[1][1] += 2.0 * kappa * math.sqrt(qm * qs) * math.cos(psi)
        out[1][2] += -kappa * math.sqrt(qm / max(slave.q, Q_FLOOR)) * math.sin(psi)
    return tuple(out[0]), tuple(out[1])


def langevin_increments(state: LaserState, p: LaserParams, dw, dt: float):
    """Spontaneous-emission noise contributions over one step.

    `dw` holds the three Wiener increments (..., 3) already scaled to
    variance dt. The photon and carrier spontaneous parts are exactly
    anti-correlated; the carrier channel adds its own independent shot
    term. Broadcasts over leading axes of `dw`.
    """
    dw = np.asarray(dw, dtype=float)
    n = max(state.n, 0.0)
    q = max(state.q, 0.0)
    c, s = math.cos(state.phi), math.sin(state.phi)
    amp_q = 2.0 * math.sqrt(p.c_sp * n * q / (2.0 * p.tau_e))
    amp_phi = math.sqrt(p.c_sp * n / (2.0 * max(state.q, Q_FLOOR) * p.tau_e))
    amp_n = math.sqrt(2.0 * n / p.tau_e)
    spont = amp_q * (c * dw[..., 0] + s * dw[..., 1])
    dq = spont
    dphi = amp_phi * (c * dw[..., 1] - s * dw[..., 0])
    dn = -spont + amp_n * dw[..., 2]
    return dn, dq, dphi


@njit(cache=True, nogil=True)
def _run_chunk(
    state, seg_ptr, step0, n_chunk, dt,
    pm, ps, kappa, domega,
    thermal_on, mu_omega, exp_dt_tauh, heat_coef, i_bias,
    m_starts, m_curr, s_starts, s_curr,
    noise, noise_on, q_floor, stride, rec,
):
    # state: [N_M, Q_M, phi_M, dT_M, N_S, Q_S, phi_S]; returns -1 or the
    # step index at which a non-finite state was detected.
    tp_m, te_m, ntr_m, nth_m, csp_m, gam_m, al_m, cq_m = (
        pm[0], pm[1], pm[2], pm[3], pm[4], pm[5], pm[6], pm[7])
    tp_s, te_s, ntr_s, nth_s, csp_s, gam_s, al_s, cq_s = (
        ps[0], ps[1], ps[2], ps[3], ps[4], ps[5], ps[6], ps[7])
    inv_e = 1.0 / 1.602176634e-19
    inv_dn_m = 1.0 / (nth_m - ntr_m)
    inv_dn_s = 1.0 / (nth_s - ntr_s)
    two_pi = 6.283185307179586
    sdt = np.sqrt(dt)

    nm, qm, fm, dtm = state[0], state[1], state[2], state[3]
    ns, qs, fs = state[4], state[5], state[6]
    pm_i, ps_i = seg_ptr[0], seg_ptr[1]

    for k in range(n_chunk):
        step = step0 + k
        t = step * dt
        while pm_i + 1 < m_starts.size and t >= m_starts[pm_i + 1]:
            pm_i += 1
        while ps_i + 1 < s_starts.size and t >= s_starts[ps_i + 1]:
            ps_i += 1
        im = m_curr[pm_i]
        i_sl = s_curr[ps_i]

        if step % stride == 0:
            r = step // stride
            rec[r, 0] = nm
            rec[r, 1] = qm
            rec[r, 2] = fm
            rec[r, 3] = dtm
            rec[r, 4] = ns
            rec[r, 5] = qs
            rec[r, 6] = fs
            rec[r, 7] = im
            rec[r, 8] = i_sl

        gl_m = (nm - ntr_m) * inv_dn_m
        g_m = gl_m * (1.0 - cq_m * qm)
        dn_m = (im * inv_e - nm / te_m - qm * g_m / (gam_m * tp_m)) * dt
        dq_m = ((g_m - 1.0) * qm / tp_m + csp_m * nm / te_m) * dt
        df_m = (0.5 * al_m / tp_m) * (gl_m - 1.0) * dt
        if thermal_on:
            df_m -= mu_omega * dtm * dt

        gl_s = (ns - ntr_s) * inv_dn_s
        g_s = gl_s * (1.0 - cq_s * qs)
        dn_s = (i_sl * inv_e - ns / te_s - qs * g_s / (gam_s * tp_s)) * dt
        dq_s = ((g_s - 1.0) * qs / tp_s + csp_s * ns / te_s) * dt
        df_s = (0.5 * al_s / tp_s) * (gl_s - 1.0) * dt

        if kappa > 0.0:
            psi = fs - fm - domega * t
            psi -= two_pi * np.floor(psi / two_pi + 0.5)
            qm_c = qm if qm > 0.0 else 0.0
            qs_c = qs if qs > 0.0 else 0.0
            qs_f = qs if qs > q_floor else q_floor
            dq_s += 2.0 * kappa * np.sqrt(qm_c * qs_c) * np.cos(psi) * dt
            df_s += -kappa * np.sqrt(qm_c / qs_f) * np.sin(psi) * dt

        if noise_on:
            za = noise[k, 0] * sdt
            zb = noise[k, 1] * sdt
            zc = noise[k, 2] * sdt
            cph = np.cos(fm)
            sph = np.sin(fm)
            nm_c = nm if nm > 0.0 else 0.0
            qm_c = qm if qm > 0.0 else 0.0
            qm_f = qm if qm > q_floor else q_floor
            spont = 2.0 * np.sqrt(csp_m * nm_c * qm_c / (2.0 * te_m)) * (cph * za + sph * zb)
            dq_m += spont
            dn_m += -spont + np.sqrt(2.0 * nm_c / te_m) * zc
            df_m += np.sqrt(csp_m * nm_c / (2.0 * qm_f * te_m)) * (cph * zb - sph * za)

            za = noise[k, 3] * sdt
            zb = noise[k, 4] * sdt
            zc = noise[k, 5] * sdt
            cph = np.cos(fs)
            sph = np.sin(fs)
            ns_c = ns if ns > 0.0 else 0.0
            qs_c = qs if qs > 0.0 else 0.0
            qs_f = qs if qs > q_floor else q_floor
            spont = 2.0 * np.sqrt(csp_s * ns_c * qs_c / (2.0 * te_s)) * (cph * za + sph * zb)
            dq_s += spont
            dn_s += -spont + np.sqrt(2.0 * ns_c / te_s) * zc
            df_s += np.sqrt(csp_s * ns_c / (2.0 * qs_f * te_s)) * (cph * zb - sph * za)

        nm += dn_m
        qm += dq_m
        fm += df_m
        ns += dn_s
        qs += dq_s
        fs += df_s
        if qm < 0.0:
            qm = -qm
        if qs < 0.0:
            qs = -qs
        if nm < 0.0:
            nm = 0.0
        if ns < 0.0:
            ns = 0.0
        if thermal_on:
            target = heat_coef * (im - i_bias)
            dtm = target + (dtm - target) * exp_dt_tauh

        if step % 4096 == 0:
            total = nm + qm + fm + ns + qs + fs
            if not np.isfinite(total):
                return step

    state[0], state[1], state[2], state[3] = nm, qm, fm, dtm
    state[4], state[5], state[6] = ns, qs, fs
    seg_ptr[0], seg_ptr[1] = pm_i, ps_i
    return -1


def initial_state(p: LaserParams, i0: float) -> LaserState:
    """Steady state at the drive's initial current, phi = 0, dT = 0."""
    from .steady_state import solve_operating_point

    if i0 <= 0:
        return LaserState(n=0.0, q=0.0, phi=0.0)
    ss = solve_operating_point(p, i0)
    return LaserState(n=ss.n_s, q=ss.q_s, phi=0.0)


def simulate(
    config: SimConfig,
    master_drive: DriveWaveform,
    slave_drive: DriveWaveform,
    dt: float,
    t_end: float,
    *,
    noise: bool = False,
    thermal: bool = False,
    seed: int = 0,
    stream_id: int = 0,
    record_stride: int = 1,
    initial_master: LaserState | None = None,
    initial_slave: LaserState | None = None,
) -> Trajectory:
    """Integrate both lasers from t = 0 to t_end with a fixed step.

    The step must satisfy dt <= 0.1*tau_ph (the stiffest rate is the cavity
    decay). `t_end` must be a multiple of dt, and `record_stride` must
    divide the step count. Identical (config, drives, dt, flags, seed,
    stream_id) reproduce bit-identical trajectories; with noise off the
    run is the deterministic limit of the scheme.
    """
    max_dt = 0.1 * min(config.master.tau_ph, config.slave.tau_ph)
    if dt <= 0 or dt > max_dt * (1 + 1e-12):
        raise ValueError(f"dt must be in (0, {max_dt:.3g}] s for stability")
    n_steps = round(t_end / dt)
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * t_end:
        raise ValueError("t_end must be a positive multiple of dt")
    if record_stride < 1 or n_steps % record_stride != 0:
        raise ValueError("record_stride must divide the number of steps")
    if thermal and config.thermal is None:
        raise ValueError("thermal coupling requested but config.thermal is None")

    m0 = initial_master or initial_state(config.master, master_drive.current_at(0.0))
    s0 = initial_slave or initial_state(config.slave, slave_drive.current_at(0.0))

    state = np.array([m0.n, m0.q, m0.phi, m0.d_temp, s0.n, s0.q, s0.phi], dtype=np.float64)
    seg_ptr = np.zeros(2, dtype=np.int64)

    if thermal:
        tp = config.thermal
        mu_omega = tp.mu_omega
        exp_dt = math.exp(-dt / tp.tau_h)
        heat_coef = tp.heat_coefficient
        i_bias = tp.i_bias
    else:
        mu_omega = exp_dt = heat_coef = i_bias = 0.0

    n_rec = n_steps // record_stride + 1
    rec = np.empty((n_rec, 9), dtype=np.float64)
    pm = _laser_packed(config.master)
    ps = _laser_packed(config.slave)
    stream = NoiseStream(seed, stream_id) if noise else None
    empty = np.empty((0, 6), dtype=np.float64)

    step0 = 0
    while step0 < n_steps:
        n_chunk = min(_CHUNK, n_steps - step0)
        block = stream.normals(n_chunk) if noise else empty
        bad = _run_chunk(
            state, seg_ptr, step0, n_chunk, dt,
            pm, ps, config.coupling.kappa_ex, config.coupling.delta_omega,
            thermal, mu_omega, exp_dt, heat_coef, i_bias,
            master_drive.segment_starts, master_drive.currents,
            slave_drive.segment_starts, slave_drive.currents,
            block, noise, Q_FLOOR, record_stride, rec,
        )
        if bad >= 0:
            raise FloatingPointError(f"non-finite state near step {bad} (t = {bad * dt:.3e} s)")
        step0 += n_chunk

    # close the grid with the state at t_end
    rec[-1, 0:4] = state[0:4]
    rec[-1, 4:7] = state[4:7]
    rec[-1, 7] = master_drive.current_at(n_steps * dt)
    rec[-1, 8] = slave_drive.current_at(n_steps * dt)
    if not np.all(np.isfinite(rec)):
        bad = int(np.argwhere(~np.isfinite(rec).all(axis=1))[0][0])
        raise FloatingPointError(f"non-finite state at sample {bad}")

    return Trajectory(
        t0=0.0,
        dt=dt * record_stride,
        n_m=rec[:, 0].copy(), q_m=rec[:, 1].copy(), phi_m=rec[:, 2].copy(),
        d_temp_m=rec[:, 3].copy(),
        n_s=rec[:, 4].copy(), q_s=rec[:, 5].copy(), phi_s=rec[:, 6].copy(),
        i_m=rec[:, 7].copy(), i_s=rec[:, 8].copy(),
    )


def compute_r(
    traj: Trajectory,
    p_slave: LaserParams,
    coupling: CouplingParams,
    period: float,
    t_start: float | None = None,
) -> float:
    """Injection-to-phase-diffusion ratio averaged over one repetition period.

    Evaluated on a noise-free (mean) trajectory: the phase pull rate
    kappa*sqrt(Q_M/Q) over the diffusion coefficient C_sp*N/(2*Q*tau_e),
    averaged over the Z = period/dt samples starting at t_start (default:
    the last full period). Values well above ~500 mark noise-resistant
    phase coding.
    """
    z = round(period / traj.dt)
    if z < 1:
        raise ValueError("trajectory must cover at least one repetition period")
    if t_start is None:
        k0 = len(traj) - 1 - z
        if k0 < 0:
            raise ValueError("trajectory shorter than one repetition period")
    else:
        k0 = traj.index_at(t_start)
        if k0 + z > len(traj):
            raise ValueError("window extends past the trajectory")
    qm = traj.q_m[k0:k0 + z]
    qs = traj.q_s[k0:k0 + z]
    ns = traj.n_s[k0:k0 + z]
    ratio = np.sqrt(qm * qs) / ns
    return float(coupling.kappa_ex * 2.0 * p_slave.tau_e / p_slave.c_sp * ratio.mean())
