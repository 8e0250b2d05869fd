"""Shared domain types and parameter validation.

All quantities are plain floats (volts, meters, seconds); 2-vectors are
``(x, y)`` tuples.  Everything here is a value type: copies are cheap and
nothing holds shared mutable state except the velocity ring buffer, which is
owned by exactly one robot.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

Vec2 = tuple[float, float]

ORIGIN: Vec2 = (0.0, 0.0)


class Mode(str, Enum):
    """Bookkeeping label for a robot's current regime.

    CHARGING gates the station-keeping controller; APPROACHING_IMPLICIT is
    derived from the QP active set (the approach is emergent, not commanded).
    """

    MISSION = "MISSION"
    APPROACHING_IMPLICIT = "APPROACHING"
    CHARGING = "CHARGING"


@dataclass(frozen=True)
class EnergyParams:
    """Battery and charging-station constants.

    k_e: static discharge rate (V/s)
    k_v: dynamic discharge coefficient (V/m)
    k_ch: recharge rate (V/s)
    e_max: full voltage (V)
    e_lb: hard lower-bound voltage (V)
    delta: charging-region radius (m)
    x_c: station position (m); origin by default
    """

    k_e: float
    k_v: float
    k_ch: float
    e_max: float
    e_lb: float
    delta: float
    x_c: Vec2 = ORIGIN


@dataclass(frozen=True)
class WorldParams:
    """Environment constants: linear drag, wind vector, operational radius."""

    c_d: float
    v_w: Vec2
    r0: float


@dataclass(frozen=True)
class CbfGains:
    """All barrier-function tuning constants.

    k_c: energy-barrier distance gain (V); must exceed k_v * r0
    p1, p2: pole constants of the second-order energy barrier (1/s), distinct
    gamma_h: coordination relaxation gain
    rho: finite-time exponent in [0, 1)
    k_s: lower-bound barrier scale
    p_l: lower-bound relaxation gain (1/s)
    window: moving-average window w (s)
    h0: argmin initializer for constraint selection (effectively +inf)
    delta_t: required arrival-time separation (s)
    """

    k_c: float
    delta_t: float
    p1: float = 0.08
    p2: float = 0.4
    gamma_h: float = 0.5
    rho: float = 0.5
    k_s: float = 1.0
    p_l: float = 0.5
    window: float = 20.0
    h0: float = 1e9
    # robustness margin (V) on the energy barrier: the row keeps h_e above
    # this instead of zero, absorbing the bounded sag injected by setpoint
    # motion that the second-order row cannot preview
    h_margin: float = 0.02


class VelocityHistory:
    """Time-stamped ring buffer of relative speed ``||v - v_w||``.

    Capacity is ``ceil(w/dt) + 1``: with uniform sampling the newest
    ``capacity - 1`` samples cover the half-open window ``(t - w, t]``, and
    the one extra slot retains the sample at exactly ``t - w`` for the
    window-difference term of the coordination drift.
    """

    __slots__ = ("capacity", "_times", "_speeds", "_head", "count", "_sum", "_appends")

    def __init__(self, capacity: int):
        if capacity < 2:
            raise ValueError(f"history capacity must be >= 2, got {capacity}")
        self.capacity = capacity
        self._times: list[float] = [0.0] * capacity
        self._speeds: list[float] = [0.0] * capacity
        self._head = 0  # next write position == oldest slot when full
        self.count = 0
        self._sum = 0.0  # running sum of all buffered speeds
        self._appends = 0

    def append(self, t: float, speed: float) -> None:
        if speed < 0.0:
            raise ValueError(f"relative speed must be non-negative, got {speed}")
        if self.count == self.capacity:
            self._sum -= self._speeds[self._head]
        else:
            self.count += 1
        self._times[self._head] = t
        self._speeds[self._head] = speed
        self._head = (self._head + 1) % self.capacity
        self._sum += speed
        self._appends += 1
        if self._appends % self.capacity == 0:
            # periodic exact re-sum bounds float drift over long runs
            self._sum = math.fsum(self._speeds[: self.count])

    def _oldest_index(self) -> int:
        return self._head if self.count == self.capacity else 0

    @property
    def t_now(self) -> float:
        return self._times[(self._head - 1) % self.capacity]

    @property
    def v_now(self) -> float:
        return self._speeds[(self._head - 1) % self.capacity]

    @property
    def v_then(self) -> float:
        """Sample at the far edge of the window (earliest available at startup)."""
        return self._speeds[self._oldest_index()]

    @property
    def span(self) -> float:
        """Elapsed time between the window-edge sample and the newest one."""
        return self.t_now - self._times[self._oldest_index()]

    def window_mean(self) -> float:
        """Mean of the samples inside the half-open window (all, at startup)."""
        if self.count == 0:
            raise ValueError("velocity history is empty")
        if self.count == self.capacity:
            return (self._sum - self._speeds[self._head]) / (self.count - 1)
        return self._sum / self.count

    def items(self) -> list[tuple[float, float]]:
        """(t, speed) pairs, oldest first."""
        start = self._oldest_index()
        return [
            (self._times[(start + i) % self.capacity], self._speeds[(start + i) % self.capacity])
            for i in range(self.count)
        ]


@dataclass(slots=True)
class RobotState:
    """Full per-robot simulation state.

    E is clamped at e_max by the integrator; E_min >= e_lb is emergent (kept
    by the lower-bound constraint) and only asserted post hoc with tolerance.
    """

    x: Vec2
    v: Vec2
    E: float
    E_min: float
    vel_history: VelocityHistory
    mode: Mode = Mode.MISSION


@dataclass(frozen=True)
class BroadcastMsg:
    """One robot's per-tick broadcast on the shared bus.

    T_L: estimated arrival time (s); beta: coordination drift term;
    D: distance to the station (m).
    """

    robot_id: int
    T_L: float
    beta: float
    D: float

    def to_json(self) -> str:
        return json.dumps(
            {"robot_id": self.robot_id, "T_L": self.T_L, "beta": self.beta, "D": self.D}
        )

    @staticmethod
    def from_json(text: str) -> "BroadcastMsg":
        d = json.loads(text)
        return BroadcastMsg(int(d["robot_id"]), float(d["T_L"]), float(d["beta"]), float(d["D"]))


@dataclass(frozen=True)
class ConstraintRow:
    """One linear inequality ``a . u >= b`` over the stacked vector (u_x, u_y, eta)."""

    a: tuple[float, float, float]
    b: float
    active: bool = True
    kind: str = ""


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def validate_params(energy: EnergyParams, world: WorldParams, gains: CbfGains) -> list[str]:
    """Aggregate every type invariant; returns one message per failed condition.

    Reports rather than raises so callers can surface all problems at once.
    """
    out: list[str] = []
    if not energy.k_e > 0:
        out.append(f"k_e must be > 0, got {energy.k_e}")
    if not energy.k_v > 0:
        out.append(f"k_v must be > 0, got {energy.k_v}")
    if not energy.k_ch > 0:
        out.append(f"k_ch must be > 0, got {energy.k_ch}")
    if not energy.e_max > energy.e_lb > 0:
        out.append(f"need e_max > e_lb > 0, got e_max={energy.e_max}, e_lb={energy.e_lb}")
    if not energy.delta > 0:
        out.append(f"delta must be > 0, got {energy.delta}")
    if not _finite(*energy.x_c):
        out.append(f"station position must be finite, got {energy.x_c}")
    if not world.c_d > 0:
        out.append(f"c_d must be > 0, got {world.c_d}")
    if not _finite(*world.v_w):
        out.append(f"wind vector must be finite, got {world.v_w}")
    if not world.r0 > energy.delta:
        out.append(f"r0 must exceed delta, got r0={world.r0}, delta={energy.delta}")
    if not gains.k_c > gains_floor(energy, world):
        out.append(
            "Theorem 1 margin: k_c must strictly exceed k_v*r0 "
            f"({gains.k_c} <= {energy.k_v * world.r0})"
        )
    if not (gains.p1 > 0 and gains.p2 > 0 and gains.p1 != gains.p2):
        out.append(
            "p1, p2 must be positive and give distinct real roots, "
            f"got p1={gains.p1}, p2={gains.p2}"
        )
    if not 0.0 <= gains.rho < 1.0:
        out.append(f"rho must lie in [0, 1), got {gains.rho}")
    if not gains.gamma_h > 0:
        out.append(f"gamma_h must be > 0, got {gains.gamma_h}")
    if not gains.k_s > 0:
        out.append(f"k_s must be > 0, got {gains.k_s}")
    if not gains.p_l > 0:
        out.append(f"p_l must be > 0, got {gains.p_l}")
    if not gains.window > 0:
        out.append(f"window must be > 0, got {gains.window}")
    if not gains.delta_t > 0:
        out.append(f"delta_t must be > 0, got {gains.delta_t}")
    return out


def gains_floor(energy: EnergyParams, world: WorldParams) -> float:
    """Strict lower bound on k_c guaranteeing the energy barrier stays controllable."""
    return energy.k_v * world.r0
