"""Barrier constraint rows: energy sufficiency, coordination, lower bound.

Three inequalities over the stacked decision vector (u_x, u_y, eta):

* Energy row (second order, poles p1/p2): keeps
  ``h_e = E - E_min - k_c log(D/delta) >= 0`` while the robot is outside the
  charging region, which forces an (emergent) approach to the station as the
  battery drains.
* Coordination row (relaxed, finite-time): keeps
  ``h_c = log(|T_Li - T_Lj| / delta_t) >= 0``, i.e. estimated arrival times
  separated by at least delta_t, by steering eta.
* Lower-bound row: keeps ``h_L = k_s (E_min - e_lb) >= 0``.

All rows are written as ``a . u >= b`` with the relaxation on the right-hand
side, so an active row integrates as ``h' = -alpha(h)``.  Constraint selection
adapts one thing at a time: each robot coordinates only against the neighbour
with the closest arrival time, and prioritizes E_min >= e_lb over coordination.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .params import (
    BroadcastMsg,
    CbfGains,
    ConstraintRow,
    EnergyParams,
    RobotState,
    VelocityHistory,
    WorldParams,
)

# Unit vector of relative velocity is undefined at v = v_w; the guard bounds
# the drag term of L_g L_f h_e by k_v.
SPEED_GUARD = 1e-6
# |T_Li - T_Lj| floor: transient numerical coincidence must not divide by zero.
GAP_GUARD = 1e-6


@dataclass(frozen=True)
class EnergyCbfTerms:
    """Pieces of the second-order energy barrier at one state."""

    h: float
    h_dot: float
    lf2: float
    lglf: tuple[float, float]


@dataclass(frozen=True)
class CoordinationTerms:
    """Per-robot quantities entering the coordination constraint.

    theta is the eta coefficient of the arrival-time rate and is always
    negative (its denominator k_e + k_v*V_bar is positive).
    """

    theta: float
    beta: float
    T_L: float
    V_bar: float
    V: float


def moving_average(
    history: VelocityHistory | Iterable[tuple[float, float]], w: float, now: float
) -> float:
    """Rectangle-rule mean of relative speed over the half-open window (now-w, now].

    With less than one window of samples, averages whatever is available.
    """
    items = history.items() if isinstance(history, VelocityHistory) else list(history)
    if not items:
        raise ValueError("velocity history is empty")
    cutoff = now - w
    selected = [s for (t, s) in items if cutoff < t <= now]
    if not selected:
        selected = [items[-1][1]]  # window has slid past all samples; use newest
    return math.fsum(selected) / len(selected)


def arrival_time(E: float, E_min: float, V_bar: float, energy: EnergyParams) -> float:
    """Estimated time (s) for the voltage to decay from E to E_min, floored at 0."""
    t = (E - E_min) / (energy.k_e + energy.k_v * V_bar)
    return t if t > 0.0 else 0.0


def coordination_terms(
    E: float,
    E_min: float,
    v_now: float,
    v_then: float,
    V_bar: float,
    span: float,
    energy: EnergyParams,
    gains: CbfGains,
) -> CoordinationTerms:
    """theta, beta and T_L for one robot.

    beta carries the window-difference term (k_v/w)(E-E_min)(V(t)-V(t-w))/den;
    `span` is the actual elapsed window (shorter than w during startup, where
    the term vanishes anyway because V(t-w) falls back to the earliest sample).
    """
    den = energy.k_e + energy.k_v * V_bar
    theta = -1.0 / den
    beta = (-energy.k_e - energy.k_v * v_now) / den
    if span > 0.0 and v_now != v_then:
        beta -= energy.k_v / span * (E - E_min) * (v_now - v_then) / den
    return CoordinationTerms(
        theta=theta,
        beta=beta,
        T_L=arrival_time(E, E_min, V_bar, energy),
        V_bar=V_bar,
        V=v_now,
    )


def energy_terms(
    state: RobotState, energy: EnergyParams, world: WorldParams, gains: CbfGains
) -> EnergyCbfTerms:
    """h_e, its drift derivatives and control direction at the given state.

    Distance is floored at delta/10 (only reachable inside the region, where
    the row is inactive anyway) to keep diagnostics finite.
    """
    dx = state.x[0] - energy.x_c[0]
    dy = state.x[1] - energy.x_c[1]
    d = math.hypot(dx, dy)
    if d < energy.delta / 10.0:
        d = energy.delta / 10.0
    vx, vy = state.v
    rx = vx - world.v_w[0]
    ry = vy - world.v_w[1]
    rel = math.hypot(rx, ry)
    rel_g = rel if rel > SPEED_GUARD else SPEED_GUARD

    k_c = gains.k_c
    d2 = d * d
    radial_v = dx * vx + dy * vy  # (x - x_c) . v

    h = state.E - state.E_min - k_c * math.log(d / energy.delta)
    h_dot = -energy.k_e - energy.k_v * rel - k_c * radial_v / d2
    lglf = (
        -(energy.k_v * rx / rel_g + k_c * dx / d2),
        -(energy.k_v * ry / rel_g + k_c * dy / d2),
    )
    lf2 = energy.k_v * world.c_d * rel + (k_c / d2) * (
        2.0 * radial_v * radial_v / d2 - (vx * vx + vy * vy) + world.c_d * (dx * rx + dy * ry)
    )
    return EnergyCbfTerms(h=h, h_dot=h_dot, lf2=lf2, lglf=lglf)


def energy_row_from_terms(
    terms: EnergyCbfTerms, gains: CbfGains, eta_rate: float = 0.0
) -> ConstraintRow:
    """Assemble the second-order barrier row

        L_f^2 h_e + L_g L_f h_e . u + (p1+p2) (h_e' - eta) + p1 p2 h_e >= 0

    from precomputed terms (only valid outside the charging region).

    The setpoint moves with E_min' = eta, so the barrier's true first
    derivative is the drift value minus the setpoint rate; `eta_rate` (the
    applied eta of the previous step) folds that into the right-hand side.
    Without it a sustained positive eta drags h_e to a steady offset of
    -(p1+p2)/(p1 p2) * eta below zero during approaches.  Putting eta itself
    into the row's coefficients instead would let the minimum-norm filter
    satisfy the energy barrier by dumping the setpoint, fighting the
    coordination constraint.
    """
    b = (
        -terms.lf2
        - (gains.p1 + gains.p2) * (terms.h_dot - eta_rate)
        - gains.p1 * gains.p2 * (terms.h - gains.h_margin)
    )
    return ConstraintRow(a=(terms.lglf[0], terms.lglf[1], 0.0), b=b, kind="energy")


def energy_row(
    state: RobotState,
    energy: EnergyParams,
    world: WorldParams,
    gains: CbfGains,
    eta_rate: float = 0.0,
) -> ConstraintRow:
    """Energy-sufficiency row at the given state.

    Marked inactive inside the charging region, where the barrier is not
    defined to constrain the input.
    """
    dx = state.x[0] - energy.x_c[0]
    dy = state.x[1] - energy.x_c[1]
    if math.hypot(dx, dy) <= energy.delta:
        return ConstraintRow(a=(0.0, 0.0, 0.0), b=0.0, active=False, kind="energy")
    return energy_row_from_terms(energy_terms(state, energy, world, gains), gains, eta_rate)


def alpha_finite_time(h: float, gamma: float, rho: float) -> float:
    """Relaxation gamma * sign(h) * |h|^rho; drives h to zero in finite time."""
    if h > 0.0:
        return gamma * h**rho
    if h < 0.0:
        return -gamma * (-h) ** rho
    return 0.0


def coordination_row(
    own: CoordinationTerms,
    other: BroadcastMsg,
    d_self: float,
    d_other: float,
    gains: CbfGains,
    energy: EnergyParams,
) -> ConstraintRow:
    """Row over eta alone keeping |T_Li - T_Lj| >= delta_t.

    The relaxation gain is zeroed whenever either robot of the pair is inside
    the charging region, freezing the coordination push for that pair.
    """
    gap = own.T_L - other.T_L
    mag = abs(gap)
    if mag < GAP_GUARD:
        mag = GAP_GUARD
    s = gap / (mag * mag)
    h_c = math.log(mag / gains.delta_t)
    gamma = gains.gamma_h if (d_self > energy.delta and d_other > energy.delta) else 0.0
    b = -alpha_finite_time(h_c, gamma, gains.rho) - s * (own.beta - other.beta)
    return ConstraintRow(a=(0.0, 0.0, s * own.theta), b=b, kind=f"coord:{other.robot_id}")


def lower_bound_row(E_min: float, gains: CbfGains, energy: EnergyParams) -> ConstraintRow:
    """Row k_s * eta >= -p_l * k_s * (E_min - e_lb) keeping E_min above e_lb."""
    return ConstraintRow(
        a=(0.0, 0.0, gains.k_s),
        b=-gains.p_l * gains.k_s * (E_min - energy.e_lb),
        kind="lower",
    )


def select_constraint(
    self_id: int,
    msgs: Sequence[BroadcastMsg],
    own: CoordinationTerms,
    own_d: float,
    own_E_min: float,
    gains: CbfGains,
    energy: EnergyParams,
) -> ConstraintRow:
    """One-constraint-at-a-time selection over the broadcast snapshot.

    Scans neighbours outside the charging region for the minimum coordination
    barrier (initialized at h0); emits the coordination row against the argmin
    neighbour unless the lower-bound barrier is worse off, in which case the
    lower-bound row wins.  With no eligible neighbour the lower-bound row is
    returned.
    """
    h_c_min = gains.h0
    best: BroadcastMsg | None = None
    for msg in msgs:
        if msg.robot_id == self_id or msg.D <= energy.delta:
            continue
        mag = abs(own.T_L - msg.T_L)
        if mag < GAP_GUARD:
            mag = GAP_GUARD
        h_c = math.log(mag / gains.delta_t)
        if h_c < h_c_min:
            h_c_min = h_c
            best = msg
    h_l = own_E_min - energy.e_lb
    if best is not None and h_c_min < h_l:
        return coordination_row(own, best, own_d, best.D, gains, energy)
    return lower_bound_row(own_E_min, gains, energy)


def integrate_alpha_law(
    h0: float, gamma: float, rho: float, dt: float, t_final: float
) -> float:
    """Forward-Euler integration of h' = -gamma * sign(h) * |h|^rho.

    Returns h(t_final).  The discrete iteration settles into a period-two
    cycle of amplitude (gamma*dt/2)^(1/(1-rho)) around zero, so callers pick
    dt small enough for their tolerance.
    """
    h = h0
    steps = int(round(t_final / dt))
    for _ in range(steps):
        h -= dt * alpha_finite_time(h, gamma, rho)
    return h
