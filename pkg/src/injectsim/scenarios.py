"""Preset studies: steady-state tables, pi-excursion sweeps, encoded pulse
trains with and without thermal drift, and the noise-robustness study.

Every knob the underlying physics does not pin is declared here with an
explicit default. The encoded-train scenarios place the measured pulse
pairs after two throwaway pulses (the train is periodic from then on) and
extract pair phases interferometrically over the settled part of each
pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import analysis, drive, simulator, steady_state, thermal
from .params import ConfigError, SimConfig, load_config

WARMUP_PULSES = analysis.WARMUP_PULSES

DEFAULT_CONFIG = """\
[master]
tau_ph_ps = 1.0
tau_e_ns = 1.0
epsilon = 0.3
N_tr = 4.0e7
N_th = 5.5e7
C_sp = 1.0e-5
Gamma = 0.12
alpha = 5.0
chi_per_W = 30.0
lambda_nm = 1550.0

[slave]
tau_ph_ps = 1.0
tau_e_ns = 1.0
epsilon = 0.3
N_tr = 4.0e7
N_th = 5.5e7
C_sp = 1.0e-5
Gamma = 0.12
alpha = 5.0
chi_per_W = 30.0
lambda_nm = 1550.0

[coupling]
kappa_ex_per_s = 1.0e10
delta_omega_hz = 0.0

[thermal]
r_h_K_per_W = 10.0
tau_h_ns = 10.0
mu_omega_GHz_per_K = 10.0
I_b_mA = 0.0
T0_K = 293.0
"""


@dataclass(frozen=True)
class ScenarioSettings:
    """All drive/timing knobs with their declared defaults."""

    i_s: float = 0.030          # master steady current [A]
    d: float = 0.1e-9           # encoding window duration [s]
    period: float = 2.5e-9      # slave repetition period [s]
    pulse_width: float = 1.0e-9
    i_low: float = 0.004        # slave off-state current [A]
    i_high: float = 0.026       # slave pulse current [A]
    dt: float = 5.0e-14         # integration step [s]
    t_lead: float = 2.0e-9      # settle time before the first pulse [s]
    trace_sample: float = 1.0e-12  # trace CSV sample spacing [s]
    n_pairs: int = 6            # encoded pairs in fig3/fig4 traces
    fig2_chi: tuple = tuple(np.linspace(1.0, 50.0, 50))
    fig2_alpha: tuple = (3.0, 4.0, 5.0, 6.0)
    fig4_t_end: float = 80e-9
    fig4_t_lead: float = 0.5e-9
    # Noise-robustness study. The generic defaults cannot encode cleanly at
    # any coupling: the master's linewidth-enhanced phase walk alone is
    # ~1.1 rad over 2.5 ns. A 1 ns period and a 60 mA master (with the slave
    # pulsing to the same current, which keeps the in-pulse locking stable)
    # cut that walk to ~0.45 rad and let strong cells encode below 0.1%.
    fig5_period: float = 1.0e-9
    fig5_width: float = 0.5e-9
    fig5_i_low: float = 0.007
    fig5_i_high: float = 0.060
    fig5_i_s: float = 0.060
    fig5_kappa: tuple = (0.0, 1.0e9, 3.0e9, 1.0e10)
    fig5_n_pairs: int = 1000
    fig5_members: int = 8
    fig5_dt: float = 1.0e-13
    fig5_gate: tuple = (0.5, 0.95)  # settled fraction of each pulse
    sim_t_end: float = 20e-9
    sim_noise: bool = False
    sim_thermal: bool = False


# --set keys understood at the scenario level: name -> (field, scale to SI)
SETTING_KEYS = {
    "i_s_mA": ("i_s", 1e-3),
    "d_ns": ("d", 1e-9),
    "period_ns": ("period", 1e-9),
    "pulse_width_ns": ("pulse_width", 1e-9),
    "i_low_mA": ("i_low", 1e-3),
    "i_high_mA": ("i_high", 1e-3),
    "dt_ps": ("dt", 1e-12),
    "t_lead_ns": ("t_lead", 1e-9),
    "trace_sample_ps": ("trace_sample", 1e-12),
    "n_pairs": ("n_pairs", 1),
    "fig4_t_end_ns": ("fig4_t_end", 1e-9),
    "fig5_period_ns": ("fig5_period", 1e-9),
    "fig5_width_ns": ("fig5_width", 1e-9),
    "fig5_i_low_mA": ("fig5_i_low", 1e-3),
    "fig5_i_high_mA": ("fig5_i_high", 1e-3),
    "fig5_i_s_mA": ("fig5_i_s", 1e-3),
    "fig5_n_pairs": ("fig5_n_pairs", 1),
    "fig5_members": ("fig5_members", 1),
    "fig5_dt_ps": ("fig5_dt", 1e-12),
    "sim_t_end_ns": ("sim_t_end", 1e-9),
    "sim_noise": ("sim_noise", 1),
    "sim_thermal": ("sim_thermal", 1),
}

SCENARIO_NAMES = ("steady", "dipi", "fig2", "fig3", "fig4", "fig5", "simulate", "thermal")


def apply_setting(settings: ScenarioSettings, key: str, raw: str) -> ScenarioSettings:
    if key not in SETTING_KEYS:
        raise ConfigError(f"unknown scenario key '{key}'")
    attr, scale = SETTING_KEYS[key]
    current = getattr(settings, attr)
    if isinstance(current, bool):
        value = raw.strip().lower() in ("1", "true", "yes", "on")
    elif isinstance(current, int):
        value = int(raw)
    else:
        try:
            value = float(raw) * scale
        except ValueError:
            raise ConfigError(f"non-numeric value for '{key}': {raw!r}") from None
    return replace(settings, **{attr: value})


def _round_t_end(t_end: float, dt: float) -> float:
    return round(t_end / dt) * dt


def _gates(train, lo: float, hi: float):
    out = []
    for j in range(train.n_pulses):
        a, b = train.pulse_window(j)
        w = b - a
        out.append((a + lo * w, a + hi * w))
    return out


def _encoded_train(cfg, st, bits, *, i_s, period, width, i_low, i_high, t_lead,
                   d, dt, noise, thermal_on, seed, stream_id, record_stride=1):
    """Simulate a warm-up + encoded pulse train; bits[j] scales the j-th
    measured gap's excursion by delta_i_pi."""
    dipi = steady_state.delta_i_pi(cfg.master, i_s, d)
    n_pulses = WARMUP_PULSES + len(bits) + 1
    slave = drive.build_slave_drive(period, width, i_low, i_high, n_pulses, t_lead)
    pert = {WARMUP_PULSES + j: bits[j] * dipi for j in range(len(bits))}
    master = drive.build_master_drive(i_s, pert, d, slave)
    t_end = _round_t_end(t_lead + n_pulses * period, dt)
    traj = simulator.simulate(
        cfg, master, slave, dt, t_end,
        noise=noise, thermal=thermal_on, seed=seed, stream_id=stream_id,
        record_stride=record_stride,
    )
    return traj, slave, master, dipi


def _trace_table(traj):
    header = ["t_ns", "I_M_mA", "I_S_mA", "Q_M", "Q_S", "phi_M_rad",
              "phi_S_rad", "N_M", "N_S", "dT_M_K"]
    t = traj.t
    rows = list(zip(
        t * 1e9, traj.i_m * 1e3, traj.i_s * 1e3, traj.q_m, traj.q_s,
        traj.phi_m, traj.phi_s, traj.n_m, traj.n_s, traj.d_temp_m,
    ))
    return header, rows


def run_steady(cfg: SimConfig, st: ScenarioSettings, seed=None):
    rows = []
    for method, fn in (("numerical", steady_state.solve_operating_point),
                       ("first_order", steady_state.approx_operating_point)):
        ss = fn(cfg.master, st.i_s)
        rows.append((method, st.i_s * 1e3, ss.n_s, ss.q_s,
                     ss.omega_shift / (2 * math.pi) / 1e9))
    header = ["method", "I_s_mA", "N_s", "Q_s", "omega_shift_GHz"]
    return {"steady": (header, rows)}


def run_dipi(cfg: SimConfig, st: ScenarioSettings, seed=None):
    p = cfg.master
    row = (
        st.i_s * 1e3,
        st.d * 1e9,
        steady_state.delta_i_pi(p, st.i_s, st.d, method="numerical") * 1e3,
        steady_state.delta_i_pi(p, st.i_s, st.d, method="first_order") * 1e3,
        steady_state.delta_i_pi(p, st.i_s, st.d, method="simple") * 1e3,
    )
    header = ["I_s_mA", "d_ns", "dIpi_numerical_mA", "dIpi_first_order_mA", "dIpi_simple_mA"]
    return {"dipi": (header, [row])}


def run_fig2(cfg: SimConfig, st: ScenarioSettings, seed=None, workers: int = 1):
    rows = steady_state.sweep_delta_i_pi(
        cfg.master, st.fig2_chi, st.fig2_alpha, st.i_s, st.d
    )
    header = ["chi_per_W", "alpha", "dIpi_numerical_mA", "dIpi_simple_mA"]
    table = [(chi, alpha, num * 1e3, simple * 1e3) for chi, alpha, num, simple in rows]
    return {"fig2": (header, table)}


def _pair_tables(traj, slave, period, bits, dipi):
    gates = analysis.default_gates(slave.train)
    phases, weights = analysis.pair_phases_delayed(traj, period, gates)
    # reference: the last warm-up pair (unencoded, past the cold-start pulse)
    bias = float(phases[WARMUP_PULSES - 1])
    trace = analysis.interfere_delayed(traj, period, bias_phase=bias)
    rows = []
    for j, b in enumerate(bits):
        k = WARMUP_PULSES + j
        a, bb = gates[k + 1]
        sel = (trace.t >= a) & (trace.t < bb)
        energy = float(trace.intensity[sel].sum() * traj.dt)
        t_gap = 0.5 * (slave.train.gap_window(k)[0] + slave.train.gap_window(k)[1])
        rows.append((
            j, t_gap * 1e9, b * dipi * 1e3, b * math.pi,
            float(analysis.wrap_phase(phases[k] - bias)), energy,
        ))
    header = ["pair_index", "t_ns", "delta_i_mA", "intended_phase_rad",
              "delta_phi_rad", "pair_energy"]
    inter_header = ["t_ns", "intensity"]
    inter_rows = list(zip(trace.t * 1e9, trace.intensity))
    return (header, rows), (inter_header, inter_rows)


def run_fig3(cfg: SimConfig, st: ScenarioSettings, seed=None, thermal_on=False,
             t_lead=None, n_pairs=None):
    bits = [(j % 2) for j in range(n_pairs or st.n_pairs)]
    stride = max(1, round(st.trace_sample / st.dt))
    traj, slave, master, dipi = _encoded_train(
        cfg, st, bits, i_s=st.i_s, period=st.period, width=st.pulse_width,
        i_low=st.i_low, i_high=st.i_high,
        t_lead=st.t_lead if t_lead is None else t_lead,
        d=st.d, dt=st.dt, noise=False, thermal_on=thermal_on,
        seed=0, stream_id=0, record_stride=stride,
    )
    pairs, interference = _pair_tables(traj, slave, st.period, bits, dipi)
    return {"trace": _trace_table(traj), "interference": interference, "pairs": pairs}


def run_fig4(cfg: SimConfig, st: ScenarioSettings, seed=None):
    """Master switched on cold at t = 0: thermal drift of the encoded pairs.

    Runs the same encoded train with and without the thermal coupling; the
    difference of the pair phases isolates the temperature-induced drift.
    """
    if cfg.thermal is None:
        raise ConfigError("fig4 needs a [thermal] section")
    n_pairs = max(1, int((st.fig4_t_end - st.fig4_t_lead) / st.period) - WARMUP_PULSES - 1)
    bits = [(j % 2) for j in range(n_pairs)]
    stride = max(1, round(st.trace_sample / st.dt))
    kwargs = dict(
        i_s=st.i_s, period=st.period, width=st.pulse_width,
        i_low=st.i_low, i_high=st.i_high, t_lead=st.fig4_t_lead,
        d=st.d, dt=st.dt, noise=False, seed=0, stream_id=0, record_stride=stride,
    )
    traj_on, slave, _, dipi = _encoded_train(cfg, st, bits, thermal_on=True, **kwargs)
    traj_off, _, _, _ = _encoded_train(cfg, st, bits, thermal_on=False, **kwargs)

    gates = analysis.default_gates(slave.train)
    ph_on, _ = analysis.pair_phases_delayed(traj_on, st.period, gates)
    ph_off, _ = analysis.pair_phases_delayed(traj_off, st.period, gates)
    pairs, interference = _pair_tables(traj_on, slave, st.period, bits, dipi)
    header = pairs[0] + ["thermal_shift_rad"]
    rows = []
    for row, j in zip(pairs[1], range(len(bits))):
        k = WARMUP_PULSES + j
        shift = float(analysis.wrap_phase(ph_on[k] - ph_off[k]))
        rows.append(row + (shift,))
    return {
        "trace": _trace_table(traj_on),
        "interference": interference,
        "pairs": (header, rows),
    }


def run_fig5(cfg: SimConfig, st: ScenarioSettings, seed=None, workers: int = 1):
    """Coding-error rate versus the injection/noise ratio R.

    One cell per coupling value: R comes from a noise-free twin over one
    settled repetition period; the error rate from ensembles of encoded
    pairs classified against the twin's unencoded pair phase.
    """
    if seed is None:
        raise ConfigError("fig5 runs with noise on and needs --seed")
    rate_rows = []
    pair_rows = []
    for cell, kappa in enumerate(st.fig5_kappa):
        coupling = replace(cfg.coupling, kappa_ex=float(kappa))
        ccfg = replace(cfg, coupling=coupling)
        R, measured, intended = _fig5_cell(ccfg, st, seed, cell, workers)
        err = analysis.coding_error_rate(measured, intended)
        rate_rows.append((kappa, R, err.n_pairs, err.errors, err.rate,
                          err.ci_low, err.ci_high))
        for k, (m, b) in enumerate(zip(measured, intended)):
            pair_rows.append((kappa, k, int(b), float(m),
                              analysis.classify_bit(float(m))))
    return {
        "rates": (["kappa_ex_per_s", "R", "n_pairs", "errors", "rate",
                   "ci_low", "ci_high"], rate_rows),
        "pairs": (["kappa_ex_per_s", "pair", "intended_bit", "delta_phi_rad",
                   "decoded_bit"], pair_rows),
    }


def _fig5_cell(cfg, st, seed, cell, workers):
    dt = st.fig5_dt
    dipi = steady_state.delta_i_pi(cfg.master, st.fig5_i_s, st.d)
    t_lead = 2e-9

    # noise-free twin: R over the last settled period + classification bias
    n_tw = WARMUP_PULSES + 2
    sl = drive.build_slave_drive(st.fig5_period, st.fig5_width, st.fig5_i_low,
                                 st.fig5_i_high, n_tw, t_lead)
    ma = drive.build_master_drive(st.fig5_i_s, {}, st.d, sl)
    t_end = _round_t_end(t_lead + n_tw * st.fig5_period, dt)
    twin = simulator.simulate(cfg, ma, sl, dt, t_end)
    R = simulator.compute_r(twin, cfg.slave, cfg.coupling, st.fig5_period)
    gates_tw = _gates(sl.train, *st.fig5_gate)
    bias = float(analysis.pair_phases_delayed(twin, st.fig5_period, gates_tw)[0][WARMUP_PULSES])

    members = st.fig5_members
    per_member = st.fig5_n_pairs // members
    extras = st.fig5_n_pairs - per_member * members
    bits = np.array([(j % 2) for j in range(per_member + (1 if extras else 0))])

    def run_member(m):
        n_bits = per_member + (1 if m < extras else 0)
        b = bits[:n_bits]
        n_pulses = WARMUP_PULSES + n_bits + 1
        slave = drive.build_slave_drive(st.fig5_period, st.fig5_width,
                                        st.fig5_i_low, st.fig5_i_high,
                                        n_pulses, t_lead)
        pert = {WARMUP_PULSES + j: int(b[j]) * dipi for j in range(n_bits)}
        master = drive.build_master_drive(st.fig5_i_s, pert, st.d, slave)
        te = _round_t_end(t_lead + n_pulses * st.fig5_period, dt)
        traj = simulator.simulate(cfg, master, slave, dt, te, noise=True,
                                  seed=seed, stream_id=cell * 1000 + m,
                                  record_stride=5)
        gates = _gates(slave.train, *st.fig5_gate)
        ph, _ = analysis.pair_phases_delayed(traj, st.fig5_period, gates,
                                             bias_phase=bias)
        return ph[WARMUP_PULSES:WARMUP_PULSES + n_bits], b

    results = [None] * members
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for m, res in enumerate(pool.map(run_member, range(members))):
                results[m] = res
    else:
        for m in range(members):
            results[m] = run_member(m)
    measured = np.concatenate([r[0] for r in results])
    intended = np.concatenate([r[1] for r in results])
    return R, measured, intended


def run_thermal(cfg: SimConfig, st: ScenarioSettings, seed=None):
    """Step response of the active-layer temperature at the steady current."""
    if cfg.thermal is None:
        raise ConfigError("thermal scenario needs a [thermal] section")
    tp = cfg.thermal
    t_end = 5.0 * tp.tau_h
    grid = np.arange(0.0, t_end, 0.1e-9)
    d = drive.constant_drive(st.i_s)
    dts = thermal.integrate_dt(d, tp, grid)
    header = ["t_ns", "I_mA", "dT_K"]
    rows = list(zip(grid * 1e9, np.full_like(grid, st.i_s * 1e3), dts))
    return {"thermal": (header, rows)}


def run_simulate(cfg: SimConfig, st: ScenarioSettings, seed=None):
    """Generic run: gain-switched slave, quasi-steady master, trace dump."""
    if st.sim_noise and seed is None:
        raise ConfigError("simulate with noise needs --seed")
    n_pulses = max(1, int((st.sim_t_end - st.t_lead) / st.period))
    slave = drive.build_slave_drive(st.period, st.pulse_width, st.i_low,
                                    st.i_high, n_pulses, st.t_lead)
    master = drive.build_master_drive(st.i_s, {}, st.d, slave)
    stride = max(1, round(st.trace_sample / st.dt))
    t_end = _round_t_end(st.sim_t_end, st.dt)
    n_steps = round(t_end / st.dt)
    while n_steps % stride:
        stride -= 1
    traj = simulator.simulate(cfg, master, slave, st.dt, t_end,
                              noise=st.sim_noise, thermal=st.sim_thermal,
                              seed=seed or 0, record_stride=stride)
    return {"trace": _trace_table(traj)}


SCENARIOS = {
    "steady": (run_steady, "steady"),
    "dipi": (run_dipi, "dipi"),
    "fig2": (run_fig2, "fig2"),
    "fig3": (run_fig3, "pairs"),
    "fig4": (run_fig4, "pairs"),
    "fig5": (run_fig5, "rates"),
    "simulate": (run_simulate, "trace"),
    "thermal": (run_thermal, "thermal"),
}


def run_scenario(name: str, cfg: SimConfig, st: ScenarioSettings, seed=None,
                 workers: int = 1):
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario '{name}'")
    fn, _ = SCENARIOS[name]
    if name in ("fig2", "fig5"):
        return fn(cfg, st, seed=seed, workers=workers)
    return fn(cfg, st, seed=seed)


def run_sweep(axis: str, values, base: str, cfg_sections, st: ScenarioSettings,
              seed=None, workers: int = 1):
    """Re-run `base` once per axis value, tagging that scenario's primary
    table rows with the value. Each cell gets its own RNG stream block."""
    if base not in SCENARIOS:
        raise ConfigError(f"unknown base scenario '{base}'")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    _, primary = SCENARIOS[base]
    out_rows = []
    header = None
    for idx, value in enumerate(values):
        sections = {k: dict(v) for k, v in cfg_sections.items()}
        settings = st
        if "." in axis:
            section, key = axis.split(".", 1)
            if section not in sections or key not in sections[section]:
                raise ConfigError(f"unknown config key '{axis}'")
            sections[section][key] = repr(value)
            cfg = config_from_sections(sections)
        elif axis in SETTING_KEYS:
            cfg = config_from_sections(sections)
            settings = apply_setting(st, axis, repr(value))
        else:
            raise ConfigError(f"unknown sweep axis '{axis}'")
        cell_seed = None if seed is None else seed + idx
        tables = run_scenario(base, cfg, settings, seed=cell_seed, workers=workers)
        h, rows = tables[primary]
        header = [axis] + list(h)
        out_rows.extend([(value,) + tuple(r) for r in rows])
    return {"sweep": (header, out_rows)}


def config_from_sections(sections) -> SimConfig:
    text = []
    for name, mapping in sections.items():
        text.append(f"[{name}]")
        for k, v in mapping.items():
            text.append(f"{k} = {v}")
        text.append("")
    return load_config("\n".join(text))


def sections_from_text(text: str):
    import configparser

    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config text does not parse: {exc}") from None
    return {name: dict(cp[name]) for name in cp.sections()}
