"""Simulation and design toolkit for phase modulation of a gain-switched
laser by optical injection from a quasi-steady master laser."""

from .params import (
    ConfigError,
    CouplingParams,
    CurrentPoint,
    LaserParams,
    SimConfig,
    chi_convert,
    load_config,
    load_config_file,
    load_params,
    photon_to_power,
    table1_params,
    threshold_current,
    transparency_current,
)
from .steady_state import (
    PhaseDesign,
    SteadyState,
    approx_operating_point,
    delta_i_pi,
    pair_phase_shift,
    pi_design,
    solve_operating_point,
    spontaneous_scale_estimate,
    sweep_delta_i_pi,
)
from .thermal import (
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
from .drive import (
    DriveWaveform,
    PulseTrainSpec,
    build_master_drive,
    build_slave_drive,
    constant_drive,
)
from .simulator import (
    LaserState,
    NoiseStream,
    Trajectory,
    compute_r,
    deterministic_rhs,
    estimate_kappa,
    langevin_increments,
    simulate,
)
from .analysis import (
    ErrorRate,
    FringePoint,
    InterferenceTrace,
    PulseRecord,
    coding_error_rate,
    cosine_fit_residual,
    default_gates,
    extract_pulse_phases,
    fringe_scan,
    interfere_delayed,
    pair_phase_diffs,
    pair_phases_delayed,
    wrap_phase,
)
from .scenarios import DEFAULT_CONFIG, ScenarioSettings, run_scenario, run_sweep

__version__ = "0.1.0"
