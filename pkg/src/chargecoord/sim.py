"""Closed-loop orchestration: broadcast, constraint selection, QP, dynamics.

Each tick is barrier synchronized in a fixed phase order — every robot's
broadcast for tick k is computed from the tick-k state before any robot
builds constraint rows — so runs are bit-identical for identical config and
seed.  Robots are evenly spaced on the patrol circle; a small seeded jitter
on the initial speed magnitude breaks the otherwise exact rotational symmetry
(identical arrival-time estimates give the coordination constraint a zero
gradient, so a perfectly symmetric fleet would never differentiate).
"""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from . import dynamics, qp
from .capacity import CapacityInputs, CapacityReport, check_feasibility, delta_e_m
from .cbf import (
    coordination_terms,
    energy_row_from_terms,
    energy_terms,
    lower_bound_row,
    select_constraint,
)
from .mission import MissionParams, nominal_control, nominal_velocity
from .params import (
    BroadcastMsg,
    CbfGains,
    EnergyParams,
    Mode,
    RobotState,
    VelocityHistory,
    WorldParams,
    validate_params,
)

TELEMETRY_COLUMNS = (
    "t",
    "robot_id",
    "x",
    "y",
    "vx",
    "vy",
    "E",
    "E_min",
    "h_e",
    "T_L",
    "mode",
    "active_constraint",
)

Event = namedtuple("Event", ["t", "kind", "ids", "value"])

ARRIVAL = "ARRIVAL"
DEPART = "DEPART"
EXCLUSION_VIOLATION = "EXCLUSION_VIOLATION"

# ticks ignored by the barrier-floor metric while the constraint stack activates
TRANSIENT_TICKS = 2


class SimulationError(RuntimeError):
    """Aborted run; message carries the offending tick."""


@dataclass(frozen=True)
class ScenarioConfig:
    energy: EnergyParams
    world: WorldParams
    gains: CbfGains
    mission: MissionParams
    n_robots: int
    dt: float = 0.01
    t_final: float = 3000.0
    seed: int = 7
    emin_init: str = "all_at_elb"  # all_at_elb | ladder | explicit
    emin_values: tuple[float, ...] = ()
    decimation: int = 10
    v_tilde: float = 0.15
    epsilon: float | None = None
    v_f: float | None = None
    speed_jitter: float = 0.02

    def validate(self) -> list[str]:
        out = validate_params(self.energy, self.world, self.gains)
        if self.n_robots < 1:
            out.append(f"n_robots must be >= 1, got {self.n_robots}")
        if not self.dt > 0:
            out.append(f"dt must be > 0, got {self.dt}")
        if not self.t_final > self.dt:
            out.append(f"t_final must exceed dt, got {self.t_final}")
        if self.decimation < 1:
            out.append(f"decimation must be >= 1, got {self.decimation}")
        if self.emin_init not in ("all_at_elb", "ladder", "explicit"):
            out.append(f"unknown emin_init policy {self.emin_init!r}")
        if self.emin_init == "explicit" and len(self.emin_values) != self.n_robots:
            out.append(
                f"explicit emin_values needs {self.n_robots} entries, got {len(self.emin_values)}"
            )
        return out

    def capacity_inputs(self) -> CapacityInputs:
        return CapacityInputs(
            n=self.n_robots,
            v_tilde=self.v_tilde,
            delta_t=self.gains.delta_t,
            energy=self.energy,
            r0=self.world.r0,
            k_c=self.gains.k_c,
            epsilon=self.epsilon,
            v_n=self.mission.v_n,
            v_f=self.v_f,
        )


@dataclass
class MetricsSummary:
    min_E: float
    max_E_min: float
    min_h_e_outside: float | None
    exclusion_violation_ticks: int
    arrival_count: int
    min_arrival_gap: float | None
    arrival_tracking_min: float | None
    arrival_tracking_max: float | None
    emin_half_threshold: float
    emin_exceeds_half: bool
    breach: bool
    breach_reason: str


@dataclass
class SimResult:
    config: ScenarioConfig
    telemetry: list[tuple]
    events: list[Event]
    metrics: MetricsSummary
    feasibility: CapacityReport | None


def initial_states(config: ScenarioConfig) -> list[RobotState]:
    """Evenly spaced on the patrol circle, tracking the field, seeded jitter on speed."""
    energy, world, mission = config.energy, config.world, config.mission
    rng = np.random.default_rng(config.seed)
    jitter = rng.uniform(-config.speed_jitter, config.speed_jitter, config.n_robots)
    capacity = math.ceil(config.gains.window / config.dt) + 1

    if config.emin_init == "ladder":
        step = max(delta_e_m(config.capacity_inputs()), 0.0) if config.n_robots >= 2 else 0.0
        emins = [energy.e_lb + i * step for i in range(config.n_robots)]
    elif config.emin_init == "explicit":
        emins = [float(v) for v in config.emin_values]
    else:
        emins = [energy.e_lb] * config.n_robots

    robots = []
    for i in range(config.n_robots):
        ang = 2.0 * math.pi * i / config.n_robots
        x = (
            energy.x_c[0] + mission.patrol_radius * math.cos(ang),
            energy.x_c[1] + mission.patrol_radius * math.sin(ang),
        )
        vn = nominal_velocity(x, mission, energy, world)
        scale = 1.0 + float(jitter[i])
        v = (vn[0] * scale, vn[1] * scale)
        hist = VelocityHistory(capacity)
        hist.append(0.0, math.hypot(v[0] - world.v_w[0], v[1] - world.v_w[1]))
        robots.append(
            RobotState(x=x, v=v, E=energy.e_max, E_min=emins[i], vel_history=hist)
        )
    return robots


def run(config: ScenarioConfig) -> SimResult:
    """Simulate the closed loop; deterministic given (config, seed).

    The feasibility verdict is computed up front and stored; the run proceeds
    regardless so infeasible operating points can be observed.
    """
    violations = config.validate()
    if violations:
        raise ValueError("invalid scenario: " + "; ".join(violations))
    feasibility = (
        check_feasibility(config.capacity_inputs()) if config.n_robots >= 2 else None
    )

    energy, world, gains, mission = config.energy, config.world, config.gains, config.mission
    dt = config.dt
    n = config.n_robots
    n_steps = int(round(config.t_final / dt))
    delta = energy.delta
    e_max = energy.e_max
    xc0, xc1 = energy.x_c
    decimation = config.decimation

    robots = initial_states(config)
    prev_d = [math.hypot(r.x[0] - xc0, r.x[1] - xc1) for r in robots]
    prev_eta = [0.0] * n  # applied setpoint rate, fed back into the energy row

    telemetry: list[tuple] = []
    events: list[Event] = []
    arrivals_t: list[float] = []
    tracking: list[float] = []

    min_E = min(r.E for r in robots)
    max_E_min = max(r.E_min for r in robots)
    min_h_e: float | None = None
    exclusion_ticks = 0

    for k in range(n_steps):
        t = k * dt

        # phase 1: broadcast snapshot for this tick
        msgs: list[BroadcastMsg] = []
        terms = []
        for i in range(n):
            st = robots[i]
            hist = st.vel_history
            ct = coordination_terms(
                st.E, st.E_min, hist.v_now, hist.v_then, hist.window_mean(), hist.span,
                energy, gains,
            )
            terms.append(ct)
            msgs.append(BroadcastMsg(i, ct.T_L, ct.beta, prev_d[i]))

        # phases 2-3: rows and QP per robot, against the frozen snapshot
        controls = []
        sample = k % decimation == 0
        for i in range(n):
            st = robots[i]
            d = prev_d[i]
            charging = d <= delta and st.E < e_max
            st.mode = Mode.CHARGING if charging else Mode.MISSION
            u_nom, eta_nom = nominal_control(st, mission, energy, world)
            et = energy_terms(st, energy, world, gains)
            if charging:
                rows = (lower_bound_row(st.E_min, gains, energy),)
                selected = rows[0]
                e_row_idx = -1
            else:
                selected = select_constraint(i, msgs, terms[i], d, st.E_min, gains, energy)
                if d > delta:
                    rows = (energy_row_from_terms(et, gains, prev_eta[i]), selected)
                    e_row_idx = 0
                else:
                    rows = (selected,)
                    e_row_idx = -1
            try:
                sol = qp.solve(qp.QpProblem((u_nom[0], u_nom[1], eta_nom), rows))
            except Exception as exc:
                raise SimulationError(f"tick {k} (t={t:.3f} s), robot {i}: {exc}") from exc
            if not charging and e_row_idx in sol.active_set:
                st.mode = Mode.APPROACHING_IMPLICIT
            controls.append(sol.u_star)

            if d > delta and k >= TRANSIENT_TICKS and (min_h_e is None or et.h < min_h_e):
                min_h_e = et.h
            if sample:
                telemetry.append(
                    (
                        t, i, st.x[0], st.x[1], st.v[0], st.v[1], st.E, st.E_min,
                        et.h, terms[i].T_L, st.mode.value, selected.kind,
                    )
                )

        # phase 4: step everyone, detect events on the new state
        inside = 0
        inside_ids = []
        for i in range(n):
            ux, uy, eta = controls[i]
            prev_eta[i] = eta
            st = robots[i]
            try:
                new_st = dynamics.step(st, dynamics.StepInput((ux, uy), eta, dt), energy, world)
            except ValueError as exc:
                raise SimulationError(f"tick {k} (t={t:.3f} s), robot {i}: {exc}") from exc
            if not (
                math.isfinite(new_st.x[0]) and math.isfinite(new_st.x[1]) and math.isfinite(new_st.E)
            ):
                raise SimulationError(
                    f"tick {k} (t={t:.3f} s), robot {i}: non-finite state {new_st.x}, E={new_st.E}"
                )
            robots[i] = new_st
            d_new = math.hypot(new_st.x[0] - xc0, new_st.x[1] - xc1)
            t_new = t + dt
            if d_new <= delta < prev_d[i]:
                value = new_st.E - new_st.E_min
                events.append(Event(t_new, ARRIVAL, (i,), value))
                arrivals_t.append(t_new)
                tracking.append(value)
            elif prev_d[i] <= delta < d_new:
                events.append(Event(t_new, DEPART, (i,), None))
            prev_d[i] = d_new
            if d_new <= delta:
                inside += 1
                inside_ids.append(i)
            if new_st.E < min_E:
                min_E = new_st.E
            if new_st.E_min > max_E_min:
                max_E_min = new_st.E_min
        if inside > 1:
            exclusion_ticks += 1
            events.append(Event(t + dt, EXCLUSION_VIOLATION, tuple(inside_ids), None))

    gaps = [b - a for a, b in zip(arrivals_t, arrivals_t[1:])]
    half = (energy.e_max + energy.e_lb) / 2.0
    breach_reasons = []
    if exclusion_ticks > 0:
        breach_reasons.append(f"{exclusion_ticks} mutual-exclusion violation ticks")
    if min_E < energy.e_lb - 0.05:
        breach_reasons.append(f"min voltage {min_E:.4f} V below e_lb - 0.05")
    summary = MetricsSummary(
        min_E=min_E,
        max_E_min=max_E_min,
        min_h_e_outside=min_h_e,
        exclusion_violation_ticks=exclusion_ticks,
        arrival_count=len(arrivals_t),
        min_arrival_gap=min(gaps) if gaps else None,
        arrival_tracking_min=min(tracking) if tracking else None,
        arrival_tracking_max=max(tracking) if tracking else None,
        emin_half_threshold=half,
        emin_exceeds_half=max_E_min > half,
        breach=bool(breach_reasons),
        breach_reason="; ".join(breach_reasons),
    )
    return SimResult(
        config=config,
        telemetry=telemetry,
        events=events,
        metrics=summary,
        feasibility=feasibility,
    )


def metrics(
    telemetry: list[tuple],
    events: list[Event],
    energy: EnergyParams,
    dt: float,
) -> MetricsSummary:
    """Recompute the summary from recorded rows and events.

    Resolution is bounded by the telemetry decimation; run() aggregates at the
    full tick rate, so the two agree exactly only for decimation = 1.
    """
    xc0, xc1 = energy.x_c
    t_transient = TRANSIENT_TICKS * dt
    min_E = math.inf
    max_E_min = -math.inf
    min_h_e: float | None = None
    for row in telemetry:
        t, _, x, y, _, _, e, e_min, h_e = row[:9]
        min_E = min(min_E, e)
        max_E_min = max(max_E_min, e_min)
        outside = math.hypot(x - xc0, y - xc1) > energy.delta
        if outside and t >= t_transient and (min_h_e is None or h_e < min_h_e):
            min_h_e = h_e
    arrivals = [ev for ev in events if ev.kind == ARRIVAL]
    arrivals_t = [ev.t for ev in arrivals]
    tracking = [ev.value for ev in arrivals]
    gaps = [b - a for a, b in zip(arrivals_t, arrivals_t[1:])]
    exclusion_ticks = sum(1 for ev in events if ev.kind == EXCLUSION_VIOLATION)
    half = (energy.e_max + energy.e_lb) / 2.0
    breach_reasons = []
    if exclusion_ticks > 0:
        breach_reasons.append(f"{exclusion_ticks} mutual-exclusion violation ticks")
    if min_E < energy.e_lb - 0.05:
        breach_reasons.append(f"min voltage {min_E:.4f} V below e_lb - 0.05")
    return MetricsSummary(
        min_E=min_E,
        max_E_min=max_E_min,
        min_h_e_outside=min_h_e,
        exclusion_violation_ticks=exclusion_ticks,
        arrival_count=len(arrivals),
        min_arrival_gap=min(gaps) if gaps else None,
        arrival_tracking_min=min(tracking) if tracking else None,
        arrival_tracking_max=max(tracking) if tracking else None,
        emin_half_threshold=half,
        emin_exceeds_half=max_E_min > half,
        breach=bool(breach_reasons),
        breach_reason="; ".join(breach_reasons),
    )


def telemetry_csv(telemetry: list[tuple]) -> str:
    lines = [",".join(TELEMETRY_COLUMNS)]
    for row in telemetry:
        t, rid, x, y, vx, vy, e, e_min, h_e, t_l, mode, active = row
        lines.append(
            f"{t:.10g},{rid},{x:.10g},{y:.10g},{vx:.10g},{vy:.10g},"
            f"{e:.10g},{e_min:.10g},{h_e:.10g},{t_l:.10g},{mode},{active}"
        )
    return "\n".join(lines) + "\n"


def events_text(events: list[Event]) -> str:
    lines = []
    for ev in events:
        ids = ";".join(str(i) for i in ev.ids)
        if ev.value is None:
            lines.append(f"{ev.t:.10g},{ev.kind},{ids}")
        else:
            lines.append(f"{ev.t:.10g},{ev.kind},{ids},{ev.value:.10g}")
    return "\n".join(lines) + ("\n" if lines else "")


def metrics_text(summary: MetricsSummary, feasibility: CapacityReport | None) -> str:
    def fmt(v):
        if v is None:
            return "absent"
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    pairs = [
        ("min_E", summary.min_E),
        ("max_E_min", summary.max_E_min),
        ("min_h_e_outside", summary.min_h_e_outside),
        ("exclusion_violation_ticks", summary.exclusion_violation_ticks),
        ("arrival_count", summary.arrival_count),
        ("min_arrival_gap", summary.min_arrival_gap),
        ("arrival_tracking_min", summary.arrival_tracking_min),
        ("arrival_tracking_max", summary.arrival_tracking_max),
        ("emin_half_threshold", summary.emin_half_threshold),
        ("emin_exceeds_half", summary.emin_exceeds_half),
        ("breach", summary.breach),
        ("breach_reason", summary.breach_reason or "none"),
    ]
    if feasibility is not None:
        pairs += [
            ("capacity_delta_t_cr", feasibility.delta_t_cr),
            ("capacity_lower_bound_s", feasibility.lower_bound_s),
            ("capacity_feasible", feasibility.feasible),
            ("capacity_reason", feasibility.reason),
        ]
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k.ljust(width)}  {fmt(v)}" for k, v in pairs) + "\n"
