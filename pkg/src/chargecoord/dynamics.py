"""Fixed-step integration of the robot and switched battery dynamics.

Model:
    x' = v
    v' = u - c_d (v - v_w)
    E' = -k_e - k_v ||v - v_w||   outside the charging region (D > delta)
       = k_ch                     inside, clamped at e_max
    E_min' = eta

Integrator is semi-implicit Euler (velocity first, then position with the new
velocity).  The battery branch is chosen from the pre-step position so the
switch is deterministic and order independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .params import EnergyParams, RobotState, Vec2, WorldParams


@dataclass(frozen=True)
class StepInput:
    """Control acceleration u (m/s^2), E_min rate eta (V/s), and step size dt (s)."""

    u: Vec2
    eta: float
    dt: float


def in_charging_region(x: Vec2, energy: EnergyParams) -> bool:
    """True iff ||x - x_c|| <= delta (boundary belongs to the region)."""
    return math.hypot(x[0] - energy.x_c[0], x[1] - energy.x_c[1]) <= energy.delta


def battery_rate(state: RobotState, energy: EnergyParams, world: WorldParams) -> float:
    """Voltage rate (V/s) for the current position/velocity.

    Returns 0 once a charging robot has reached e_max (voltage is clamped).
    """
    if in_charging_region(state.x, energy):
        return energy.k_ch if state.E < energy.e_max else 0.0
    rel = math.hypot(state.v[0] - world.v_w[0], state.v[1] - world.v_w[1])
    return -energy.k_e - energy.k_v * rel


def step(
    state: RobotState, inp: StepInput, energy: EnergyParams, world: WorldParams
) -> RobotState:
    """Advance one step; returns a new state.

    The velocity ring buffer is carried over (appended, not copied) so that
    stepping is O(1); the previous state object must not be stepped again.
    """
    ux, uy = inp.u
    if not (
        math.isfinite(ux) and math.isfinite(uy) and math.isfinite(inp.eta) and inp.dt > 0.0
    ):
        raise ValueError(f"non-finite step input: u={inp.u}, eta={inp.eta}, dt={inp.dt}")

    dt = inp.dt
    c_d = world.c_d
    wx, wy = world.v_w
    vx, vy = state.v

    nvx = vx + dt * (ux - c_d * (vx - wx))
    nvy = vy + dt * (uy - c_d * (vy - wy))
    nx = state.x[0] + dt * nvx
    ny = state.x[1] + dt * nvy

    new_e = state.E + dt * battery_rate(state, energy, world)
    if new_e > energy.e_max:
        new_e = energy.e_max

    hist = state.vel_history
    hist.append(hist.t_now + dt, math.hypot(nvx - wx, nvy - wy))

    return RobotState(
        x=(nx, ny),
        v=(nvx, nvy),
        E=new_e,
        E_min=state.E_min + dt * inp.eta,
        vel_history=hist,
        mode=state.mode,
    )
