"""Master-laser operating points and phase-modulation design rules.

The steady state couples two algebraic balance equations in the carrier
number N and photon number Q; the emission frequency offset follows from
the linear gain alone. Closed-form expressions (first order in the
spontaneous-coupling and gain-compression parameters) sit next to the
exact numerical solutions so the two routes can be compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.optimize import brentq

from .params import (
    E_CHARGE,
    LaserParams,
    threshold_current,
    transparency_current,
)

_REL_TOL = 1e-13          # carrier-root relative tolerance
_MAX_BRACKET_GROWTH = 60  # doublings of the upper carrier bracket


@dataclass(frozen=True)
class SteadyState:
    """CW operating point of a solitary laser."""

    n_s: float          # carrier number
    q_s: float          # photon number
    omega_shift: float  # emission frequency minus the cold-cavity one [rad/s]


@dataclass(frozen=True)
class PhaseDesign:
    """A pi phase-modulation design point."""

    d: float            # perturbation duration [s]
    delta_phi: float    # achieved pair phase difference [rad]
    delta_i_pi: float   # current excursion for |delta_phi| = pi [A]
    method: str         # 'numerical' | 'first_order' | 'simple'


def _linear_gain(n: float, p: LaserParams) -> float:
    return (n - p.n_tr) / (p.n_th - p.n_tr)


def _photon_balance_root(n: float, p: LaserParams) -> float:
    """Photon number that balances stimulated gain, cavity loss and the
    spontaneous seed at a given carrier number.

    The balance is quadratic in Q when gain compression is on. Of the two
    roots, the physical branch is the one continuous with the
    compression-free limit; the other corresponds to compression driving
    the gain through zero and is discarded. Returns inf when the gain
    meets the loss with no compression to clamp it.
    """
    gl = _linear_gain(n, p)
    chi_q = p.chi_q_dimensionless
    a = gl * chi_q
    b = 1.0 - gl
    c = -p.c_sp * n * p.tau_ph / p.tau_e  # <= 0
    if a == 0.0:
        if b <= 0.0:
            return math.inf
        return -c / b
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return math.inf
    sq = math.sqrt(disc)
    if b > 0.0:
        # below threshold: small spontaneous-fed root (stable vs a -> 0)
        return c / (-(b + sq) / 2.0)
    return ((sq - b) / 2.0) / a


def _carrier_residual(n: float, i_s: float, p: LaserParams) -> float:
    q = _photon_balance_root(n, p)
    if math.isinf(q):
        return -math.inf
    gl = _linear_gain(n, p)
    g = gl * (1.0 - p.chi_q_dimensionless * q)
    return i_s / E_CHARGE - n / p.tau_e - q * g / (p.gamma * p.tau_ph)


def solve_operating_point(p: LaserParams, i_s: float) -> SteadyState:
    """Solve the CW photon/carrier balance exactly.

    Reduces the pair of balance equations to a scalar equation in N by
    eliminating Q through the photon line, then brackets and solves it.
    Residuals of both lines are at machine level (<< 1e-12 relative).
    """
    if i_s <= 0:
        raise ValueError("pump current must be > 0")
    if p.c_sp == 0.0:
        return _solve_without_spontaneous(p, i_s)

    lo = 0.0
    hi = p.n_th * (1.0 + p.gamma)
    f_hi = _carrier_residual(hi, i_s, p)
    for _ in range(_MAX_BRACKET_GROWTH):
        if f_hi < 0.0:
            break
        hi = p.n_th + 2.0 * (hi - p.n_th)
        f_hi = _carrier_residual(hi, i_s, p)
    else:
        raise RuntimeError("no sign change found for the carrier balance")

    n_s = brentq(
        _carrier_residual,
        lo,
        hi,
        args=(i_s, p),
        xtol=1e-300,
        rtol=8.9e-16,
        maxiter=200,
    )
    q_s = _photon_balance_root(n_s, p)
    if q_s < 0 or math.isinf(q_s):
        raise RuntimeError("carrier root produced an unphysical photon number")
    omega = 0.5 * p.alpha / p.tau_ph * (_linear_gain(n_s, p) - 1.0)
    return SteadyState(n_s=n_s, q_s=q_s, omega_shift=omega)


def _solve_without_spontaneous(p: LaserParams, i_s: float) -> SteadyState:
    # With no spontaneous seed the photon line factorizes: either Q = 0
    # (below threshold) or the saturated gain is clamped to the loss.
    i_th = threshold_current(p)
    n_free = i_s * p.tau_e / E_CHARGE
    if n_free <= p.n_th:
        omega = 0.5 * p.alpha / p.tau_ph * (_linear_gain(n_free, p) - 1.0)
        return SteadyState(n_s=n_free, q_s=0.0, omega_shift=omega)
    chi_q = p.chi_q_dimensionless
    if chi_q == 0.0:
        n_s = p.n_th
        q_s = p.gamma * p.tau_ph * (i_s - i_th) / E_CHARGE
        return SteadyState(n_s=n_s, q_s=q_s, omega_shift=0.0)

    def resid(n):
        gl = _linear_gain(n, p)
        q = (1.0 - 1.0 / gl) / chi_q
        return i_s / E_CHARGE - n / p.tau_e - q / (p.gamma * p.tau_ph)

    hi = p.n_th * (1.0 + p.gamma)
    for _ in range(_MAX_BRACKET_GROWTH):
        if resid(hi) < 0.0:
            break
        hi = p.n_th + 2.0 * (hi - p.n_th)
    n_s = brentq(resid, p.n_th * (1.0 + 1e-15), hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)
    q_s = (1.0 - 1.0 / _linear_gain(n_s, p)) / chi_q
    omega = 0.5 * p.alpha / p.tau_ph * (_linear_gain(n_s, p) - 1.0)
    return SteadyState(n_s=n_s, q_s=q_s, omega_shift=omega)


def approx_operating_point(p: LaserParams, i_s: float) -> SteadyState:
    """First-order operating point, valid above threshold.

    Expansion to first order in the spontaneous-coupling factor and the
    photon-number gain compression, with cross terms dropped.
    """
    i_th = threshold_current(p)
    i_tr = transparency_current(p)
    if i_s <= i_th:
        raise ValueError("the first-order expansion requires I_s > I_th")
    chi_q = p.chi_q_dimensionless
    q0 = p.gamma * p.tau_ph * (i_s - i_th) / E_CHARGE
    q_s = q0 * (
        1.0
        + i_th * (i_s - i_tr) / ((i_s - i_th) ** 2 * p.gamma) * p.c_sp
        - p.gamma * p.tau_ph / E_CHARGE * (i_th - i_tr) * chi_q
    )
    n_s = (i_th * p.tau_e / E_CHARGE) * (
        1.0
        - (i_th - i_tr) / ((i_s - i_th) * p.gamma) * p.c_sp
        + p.gamma * p.tau_ph / (E_CHARGE * i_th) * (i_th - i_tr) * (i_s - i_th) * chi_q
    )
    omega = (
        -0.5 * p.alpha / (p.gamma * p.tau_ph) * i_th / (i_s - i_th) * p.c_sp
        + 0.5 * p.alpha / E_CHARGE * p.gamma * (i_s - i_th) * chi_q
    )
    return SteadyState(n_s=n_s, q_s=q_s, omega_shift=omega)


def pair_phase_shift(
    p: LaserParams,
    i_s1: float,
    i_s2: float,
    d: float,
    method: str = "numerical",
) -> float:
    """Phase difference accumulated between a pulse pair when the master
    current is held at i_s2 instead of i_s1 for a window of duration d.

    'numerical' integrates the exact operating-point frequencies,
    d*(omega(i_s1) - omega(i_s2)); 'first_order' evaluates the closed
    first-order formula (which carries the opposite overall sign
    convention; magnitudes agree).
    """
    if d <= 0:
        raise ValueError("perturbation duration must be > 0")
    i_th = threshold_current(p)
    if i_s1 <= i_th or i_s2 <= i_th:
        raise ValueError("both currents must exceed threshold")
    if method == "numerical":
        w1 = solve_operating_point(p, i_s1).omega_shift
        w2 = solve_operating_point(p, i_s2).omega_shift
        return d * (w1 - w2)
    if method == "first_order":
        di = i_s2 - i_s1
        term_sp = (
            0.5 * p.alpha * d / p.tau_ph
            * i_th * di / ((i_s1 - i_th) * (i_s2 - i_th))
            * p.c_sp / p.gamma
        )
        term_chi = (
            0.25 * p.alpha * d / p.tau_ph
            * di * p.epsilon * p.photon_energy / E_CHARGE * p.chi
        )
        return term_sp + term_chi
    raise ValueError(f"unknown method '{method}'")


def delta_i_pi(
    p: LaserParams,
    i_s: float,
    d: float,
    method: str = "numerical",
) -> float:
    """Master current excursion giving a pi pair phase difference [A].

    'simple' is the design rule: inversely proportional to the gain
    compression factor and to the perturbation duration. 'first_order'
    keeps the spontaneous-emission corrections. 'numerical' inverts the
    exact pair phase shift by bracketed root finding.
    """
    if d <= 0:
        raise ValueError("perturbation duration must be > 0")
    if p.alpha <= 0:
        raise ValueError("delta_i_pi requires alpha > 0")
    i_th = threshold_current(p)

    if method == "simple":
        if p.chi == 0:
            raise ZeroDivisionError(
                "the simple rule diverges at chi = 0 (no gain compression)"
            )
        return (
            4.0 * math.pi / p.chi
            * E_CHARGE / (p.epsilon * p.photon_energy)
            * p.tau_ph / (p.alpha * d)
        )

    if method == "first_order":
        if p.chi == 0:
            raise ZeroDivisionError(
                "the first-order rule diverges at chi = 0 (no gain compression)"
            )
        if i_s <= i_th:
            raise ValueError("first_order requires I_s > I_th")
        bracket = (
            2.0 * math.pi * p.tau_ph / (p.alpha * d)
            - p.c_sp / p.gamma * i_th / (i_s - i_th)
        )
        if bracket <= 0:
            raise ValueError(
                "first-order inversion breaks down this close to threshold "
                "(spontaneous term exceeds the modulation term)"
            )
        return (
            2.0 / p.chi * E_CHARGE / (p.epsilon * p.photon_energy) * bracket
            + p.c_sp / p.gamma * p.alpha * d / (2.0 * math.pi * p.tau_ph) * i_th
        )

    if method == "numerical":
        if i_s <= i_th:
            raise ValueError("numerical inversion requires I_s > I_th")
        # the magnitude of the pair shift is monotone in the excursion here
        if p.chi > 0:
            hi = 10.0 * delta_i_pi(p, i_s, d, method="simple")
        else:
            hi = 10.0 * i_th

        def resid(di):
            return abs(pair_phase_shift(p, i_s, i_s + di, d)) - math.pi

        f_hi = resid(hi)
        if f_hi < 0:
            raise ValueError("no pi crossing inside the excursion bracket")
        return brentq(resid, 0.0, hi, xtol=1e-6 * i_th, maxiter=200)

    raise ValueError(f"unknown method '{method}'")


def pi_design(p: LaserParams, i_s: float, d: float, method: str = "numerical") -> PhaseDesign:
    """Bundle a pi-modulation design point with its realized phase shift."""
    di = delta_i_pi(p, i_s, d, method=method)
    if method == "numerical":
        dphi = abs(pair_phase_shift(p, i_s, i_s + di, d))
    else:
        dphi = pair_phase_shift(p, i_s, i_s + di, d, method="first_order")
    return PhaseDesign(d=d, delta_phi=dphi, delta_i_pi=di, method=method)


def spontaneous_scale_estimate(p: LaserParams, d: float) -> float:
    """Power scale of the spontaneous correction to the pi-excursion [W].

    Quadratic in the window duration; of order 0.1 W per ns^2 for typical
    device constants, which is what justifies dropping the correction.
    """
    if d < 0:
        raise ValueError("duration must be >= 0")
    i_th = threshold_current(p)
    return (
        p.c_sp / (8.0 * math.pi**2 * p.gamma)
        * (p.alpha * d / p.tau_ph) ** 2
        * i_th / E_CHARGE
        * p.epsilon * p.photon_energy
    )


def sweep_delta_i_pi(
    p: LaserParams,
    chi_grid,
    alpha_list,
    i_s: float = 0.030,
    d: float = 0.1e-9,
) -> list[tuple[float, float, float, float]]:
    """Tabulate (chi, alpha, dIpi_numerical, dIpi_simple) over a grid."""
    chi_grid = list(chi_grid)
    alpha_list = list(alpha_list)
    if not chi_grid or not alpha_list:
        raise ValueError("chi grid and alpha list must be non-empty")
    if min(chi_grid) <= 0:
        raise ValueError("chi grid values must be > 0")
    rows = []
    for alpha in alpha_list:
        for chi in chi_grid:
            pc = replace(p, chi=float(chi), alpha=float(alpha))
            rows.append(
                (
                    float(chi),
                    float(alpha),
                    delta_i_pi(pc, i_s, d, method="numerical"),
                    delta_i_pi(pc, i_s, d, method="simple"),
                )
            )
    return rows
