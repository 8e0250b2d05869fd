"""Closed-form capacity calculus for a shared single charging station.

Everything here is derived under the conservative assumption that all robots
operate at the average-relative-speed bound V_tilde, so the discharge rate is
``r = k_e + k_v * V_tilde`` and the composite constant ``kappa = 2 + r/k_ch``
appears throughout.  The central quantity is the critical arrival separation

    dt_cr = [(1 + r/k_ch)(e_max - e_lb) - kappa*eps] / (r [1 + kappa (n-1)])

which upper-bounds the separations the fleet can sustain; the lower bound is
half the full recharge time (e_max - e_lb)/(2 k_ch).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .params import EnergyParams, WorldParams


@dataclass(frozen=True)
class CapacityInputs:
    """Inputs of the capacity calculus.

    epsilon is the speed-coupling increment of the neediest robot's setpoint:
    supply it to reproduce given operating points, or leave None to estimate
    it from the mission speed v_n (terminal approach speed v_f defaults to
    v_n/100; smaller v_f is more conservative).
    """

    n: int
    v_tilde: float
    delta_t: float
    energy: EnergyParams
    r0: float
    k_c: float
    epsilon: float | None = None
    v_n: float = 0.0
    v_f: float | None = None
    delta: float | None = None  # charging radius override; defaults to energy.delta

    def validate(self) -> list[str]:
        out: list[str] = []
        if self.n < 2:
            out.append(f"n must be >= 2, got {self.n}")
        if not self.v_tilde > 0:
            out.append(f"v_tilde must be > 0, got {self.v_tilde}")
        if self.epsilon is not None and self.epsilon < 0:
            out.append(f"epsilon must be >= 0, got {self.epsilon}")
        if self.v_n < 0:
            out.append(f"v_n must be >= 0, got {self.v_n}")
        if self.v_f is not None and not 0 < self.v_f < self.v_n:
            out.append(f"need 0 < v_f < v_n, got v_f={self.v_f}, v_n={self.v_n}")
        if not self.delta_t > 0:
            out.append(f"delta_t must be > 0, got {self.delta_t}")
        return out


@dataclass(frozen=True)
class CapacityReport:
    """All intermediate quantities plus the feasibility verdict for (n, delta_t)."""

    n: int
    v_tilde: float
    delta_t: float
    kappa: float
    epsilon_used: float
    delta_t_cr: float
    lower_bound_s: float
    e_m_upper: float
    delta_e_m: float
    e_m_bar: float
    delta_av: float
    k_ch_min: float | None
    max_recharges: int
    feasible: bool
    reason: str


def discharge_rate(energy: EnergyParams, v_tilde: float) -> float:
    """Worst-case discharge rate r = k_e + k_v * V_tilde (V/s)."""
    return energy.k_e + energy.k_v * v_tilde


def kappa(energy: EnergyParams, v_tilde: float) -> float:
    return 2.0 + discharge_rate(energy, v_tilde) / energy.k_ch


def _epsilon(inputs: CapacityInputs) -> float:
    return inputs.epsilon if inputs.epsilon is not None else epsilon_estimate(inputs)


def delta_t_critical(inputs: CapacityInputs) -> float:
    """Critical (maximum feasible) separation between consecutive arrivals.

    A non-positive value means no separation is feasible for these inputs.
    """
    e = inputs.energy
    r = discharge_rate(e, inputs.v_tilde)
    k = kappa(e, inputs.v_tilde)
    num = (1.0 + r / e.k_ch) * (e.e_max - e.e_lb) - k * _epsilon(inputs)
    return num / (r * (1.0 + k * (inputs.n - 1)))


def e_m_upper(inputs: CapacityInputs) -> float:
    """Upper bound on the neediest robot's setpoint during coordination."""
    e = inputs.energy
    r = discharge_rate(e, inputs.v_tilde)
    k = kappa(e, inputs.v_tilde)
    return (
        (1.0 + r / e.k_ch) * e.e_max
        + e.e_lb
        - inputs.delta_t * r
        - k * _epsilon(inputs)
    ) / k


def delta_e_m(inputs: CapacityInputs) -> float:
    """Uniform setpoint increment spreading n robots between e_lb and the E_M bound."""
    e = inputs.energy
    r = discharge_rate(e, inputs.v_tilde)
    k = kappa(e, inputs.v_tilde)
    num = (1.0 + r / e.k_ch) * (e.e_max - e.e_lb) - inputs.delta_t * r - k * _epsilon(inputs)
    return num / (k * (inputs.n - 1))


def epsilon_estimate(inputs: CapacityInputs) -> float:
    """Speed-coupling increment of the neediest setpoint, floored at 0.

    Closed form of integrating eta(t) = Gamma-shaped k_v v_n (1 - e^{-a t})
    over the station approach [T_start, T_end], with
    Gamma = 1 + (v_f/v_n - 1)/log(v_n/v_f) -> 1 as v_f -> 0.
    """
    if inputs.v_n <= 0.0:
        return 0.0
    e = inputs.energy
    v_f = inputs.v_f if inputs.v_f is not None else inputs.v_n / 100.0
    gamma_f = 1.0 + (v_f / inputs.v_n - 1.0) / math.log(inputs.v_n / v_f)
    r = discharge_rate(e, inputs.v_tilde)
    k = kappa(e, inputs.v_tilde)
    m = 1.0 + k * (inputs.n - 1)
    delta = inputs.delta if inputs.delta is not None else e.delta
    t_end = (e.e_max - (e.e_max + e.e_lb) / 2.0) / r
    # epsilon-free part of T_start; the epsilon-dependent part moves to the denominator
    t_start_core = (
        inputs.n * (e.e_max - e.e_lb) - inputs.k_c * m * math.log(inputs.r0 / delta)
    ) / (m * r)
    g = gamma_f * e.k_v * inputs.v_n
    eps = g * (t_end - t_start_core) / (1.0 + g / r * (1.0 - 1.0 / m))
    return eps if eps > 0.0 else 0.0


def t_start_of_epsilon(inputs: CapacityInputs, epsilon: float) -> float:
    """Approach start time implied by a given epsilon (for cross-checks)."""
    e = inputs.energy
    r = discharge_rate(e, inputs.v_tilde)
    k = kappa(e, inputs.v_tilde)
    m = 1.0 + k * (inputs.n - 1)
    delta = inputs.delta if inputs.delta is not None else e.delta
    core = (
        inputs.n * (e.e_max - e.e_lb) - inputs.k_c * m * math.log(inputs.r0 / delta)
    ) / (m * r)
    return epsilon / r * (1.0 - 1.0 / m) + core


def t_end(inputs: CapacityInputs) -> float:
    """Worst-case approach end time: discharge from e_max to (e_max+e_lb)/2."""
    e = inputs.energy
    return (e.e_max - (e.e_max + e.e_lb) / 2.0) / discharge_rate(e, inputs.v_tilde)


@dataclass(frozen=True)
class KcRecommendation:
    heuristic: float
    theorem_floor: float
    recommended: float


def k_c_heuristic(
    k_p: float, k_d_pd: float, world: WorldParams, energy: EnergyParams, delta: float
) -> KcRecommendation:
    """Distance-gain heuristic from an overdamped PD return trip against headwind.

    Models a straight-line PD return from r0 with wind magnitude opposing the
    motion; the peak return speed v* sizes the dynamic discharge term.  The
    recommendation is floored at 1.05 * k_v * r0 because the heuristic alone
    can land below the strict controllability bound.
    """
    c = k_d_pd + world.c_d
    disc = c * c - 4.0 * k_p
    if disc <= 0.0:
        raise ValueError(
            f"PD gains must be overdamped: (k_d + c_d)^2 - 4 k_p = {disc:.6g} <= 0"
        )
    g = math.sqrt(disc)
    l1 = (c - g) / 2.0
    l2 = (c + g) / 2.0
    w_mag = math.hypot(*world.v_w)
    ratio = l2 / l1
    v_star = (
        (-world.r0 * k_p + world.c_d * w_mag)
        / g
        * (ratio ** (-l2 / g) - ratio ** (-l1 / g))
    )
    heuristic = (energy.k_e + energy.k_v * (abs(v_star) + w_mag)) / l1
    floor = energy.k_v * world.r0
    return KcRecommendation(
        heuristic=heuristic,
        theorem_floor=floor,
        recommended=max(heuristic, 1.05 * floor),
    )


def k_ch_min(inputs: CapacityInputs) -> float:
    """Least recharge rate for which the capacity window is non-empty.

    Positive root of equating dt_cr with half the recharge time; for n = 2 and
    epsilon = 0 this reduces to (1 + sqrt(2)) * (k_e + k_v * V_tilde).
    """
    e = inputs.energy
    de = e.e_max - e.e_lb
    eps = _epsilon(inputs)
    if de <= 2.0 * eps:
        raise ValueError(
            f"k_ch minimum undefined: e_max - e_lb = {de:.6g} must exceed 2*epsilon = {2 * eps:.6g}"
        )
    q = 2.0 * (inputs.n - 1) * de + eps
    disc = q * q + 4.0 * (inputs.n - 1) * (de - 2.0 * eps) * de
    root = (q + math.sqrt(disc)) / (2.0 * (de - 2.0 * eps))
    return discharge_rate(e, inputs.v_tilde) * root


def max_recharges(inputs: CapacityInputs) -> int:
    """Most station visits any robot makes within one cycle of the least needy one.

    Uses the arrival-value bound E_M + epsilon, capped at (e_max + e_lb)/2.
    When the cycle ratio is exactly integral (>= 2) the coincident cycle-end
    arrival is counted into the next cycle.
    """
    e = inputs.energy
    e_m_bar = min(e_m_upper(inputs) + _epsilon(inputs), (e.e_max + e.e_lb) / 2.0)
    ratio = (e.e_max - e.e_lb) / (e.e_max - e_m_bar)
    nearest = round(ratio)
    if nearest >= 2 and abs(ratio - nearest) < 1e-9:
        return int(nearest)
    return 1 + math.floor(ratio)


def delta_available(inputs: CapacityInputs) -> float:
    """Average slack between visits if every robot arrived the maximal twice."""
    e = inputs.energy
    r = discharge_rate(e, inputs.v_tilde)
    return (e.e_max - e.e_lb) * (1.0 + r / e.k_ch) / ((2 * inputs.n - 1) * r)


def check_feasibility(inputs: CapacityInputs) -> CapacityReport:
    """Verdict on (n, delta_t) plus every intermediate quantity used to reach it."""
    e = inputs.energy
    eps = _epsilon(inputs)
    pinned = replace(inputs, epsilon=eps)
    dt_cr = delta_t_critical(pinned)
    lower = (e.e_max - e.e_lb) / (2.0 * e.k_ch)
    try:
        kch_min = k_ch_min(pinned)
    except ValueError:
        kch_min = None

    if dt_cr <= 0.0:
        feasible = False
        reason = f"infeasible for any separation: dt_cr = {dt_cr:.4g} s <= 0"
    elif inputs.delta_t < lower:
        feasible = False
        reason = f"delta_t = {inputs.delta_t:.4g} s below recharge bound {lower:.4g} s"
    elif inputs.delta_t > dt_cr:
        feasible = False
        reason = f"delta_t = {inputs.delta_t:.4g} s exceeds dt_cr = {dt_cr:.4g} s"
    else:
        feasible = True
        reason = f"{lower:.4g} s <= delta_t = {inputs.delta_t:.4g} s <= dt_cr = {dt_cr:.4g} s"

    return CapacityReport(
        n=inputs.n,
        v_tilde=inputs.v_tilde,
        delta_t=inputs.delta_t,
        kappa=kappa(e, inputs.v_tilde),
        epsilon_used=eps,
        delta_t_cr=dt_cr,
        lower_bound_s=lower,
        e_m_upper=e_m_upper(pinned),
        delta_e_m=delta_e_m(pinned),
        e_m_bar=e_m_upper(pinned) + eps,
        delta_av=delta_available(inputs),
        k_ch_min=kch_min,
        max_recharges=max_recharges(pinned),
        feasible=feasible,
        reason=reason,
    )


def sweep(
    base: CapacityInputs,
    n_values: list[int],
    v_tilde_values: list[float],
) -> list[CapacityReport]:
    """Feasibility grid over robot count and speed bound.

    A supplied epsilon is reused across the grid (it is an input, not a
    derived quantity); with epsilon=None each point is re-estimated.  An axis
    left empty falls back to the base value; both empty gives an empty table.
    """
    if not n_values and not v_tilde_values:
        return []
    out = []
    for n in n_values or [base.n]:
        for vt in v_tilde_values or [base.v_tilde]:
            out.append(check_feasibility(replace(base, n=n, v_tilde=vt)))
    return out
