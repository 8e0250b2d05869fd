"""Nominal patrolling controller: blended potential-flow field plus P tracking.

The field direction rotates with distance from the station: radially outward
(source) inside ``delta + delta_tol``, tangential (vortex) on the band from
the patrol radius to the operational boundary r0, convex blends in between
and inward beyond r0, so the flow orbits near the patrol circle, never pushes
into the station region uncommanded, and never lets wind carry a robot out of
the range where the energy barrier keeps control authority.  Magnitude is
exactly v_n everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import in_charging_region
from .params import EnergyParams, RobotState, Vec2, WorldParams


@dataclass(frozen=True)
class MissionParams:
    """Patrol-field shape and tracking gain.

    m_src is the source strength of the underlying potential; it scales both
    branch gradients identically and drops out of the normalized direction,
    so it is accepted for configuration fidelity but has no effect.
    """

    v_n: float
    k_d: float
    patrol_radius: float
    m_src: float = 1.0
    delta_tol: float = 0.3
    ccw: bool = True


def _ramp(s: float) -> float:
    # linear blend weight; a smoothstep here leaves the radial component
    # quadratically small near the patrol circle and stalls convergence
    if s <= 0.0:
        return 0.0
    if s >= 1.0:
        return 1.0
    return s


def nominal_velocity(
    x: Vec2, params: MissionParams, energy: EnergyParams, world: WorldParams
) -> Vec2:
    """Field velocity at x: ||result|| == v_n exactly.

    At the station center the direction degenerates; +x is returned for that
    measure-zero case.
    """
    dx = x[0] - energy.x_c[0]
    dy = x[1] - energy.x_c[1]
    d = math.hypot(dx, dy)
    if d < 1e-12:
        return (params.v_n, 0.0)
    erx, ery = dx / d, dy / d
    if params.ccw:
        etx, ety = -ery, erx
    else:
        etx, ety = ery, -erx

    inner = energy.delta + params.delta_tol
    shell = max(world.r0, params.patrol_radius)  # operational boundary
    if d <= inner:
        ux, uy = erx, ery
    elif d < params.patrol_radius:
        lam = _ramp((d - inner) / (params.patrol_radius - inner))
        ux = (1.0 - lam) * erx + lam * etx
        uy = (1.0 - lam) * ery + lam * ety
    elif d <= shell:
        ux, uy = etx, ety
    else:
        # outside the operational range the framework's assumptions (and the
        # barrier's controllability margin k_c > k_v * D) no longer hold, so
        # the field turns inward to re-enter; wind can push orbits out here
        mu = _ramp((d - shell) / (4.0 * params.delta_tol))
        ux = (1.0 - mu) * etx - mu * erx
        uy = (1.0 - mu) * ety - mu * ery
    norm = math.hypot(ux, uy)
    return (params.v_n * ux / norm, params.v_n * uy / norm)


def nominal_control(
    state: RobotState, params: MissionParams, energy: EnergyParams, world: WorldParams
) -> tuple[Vec2, float]:
    """(u_nom, eta_nom) for the current state; eta_nom is always 0.

    While charging (inside the region, below full voltage) the robot holds
    station: braking plus wind-drag feedforward, which decays the ground
    velocity to exactly zero so wind cannot drift the robot out of the region
    mid-charge.  Once full it resumes tracking the field, whose inner branch
    points outward and carries it off the station.
    """
    vx, vy = state.v
    if in_charging_region(state.x, energy) and state.E < energy.e_max:
        return (
            (-params.k_d * vx - world.c_d * world.v_w[0], -params.k_d * vy - world.c_d * world.v_w[1]),
            0.0,
        )
    vnx, vny = nominal_velocity(state.x, params, energy, world)
    return ((-params.k_d * (vx - vnx), -params.k_d * (vy - vny)), 0.0)
