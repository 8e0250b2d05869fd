"""HTTP service wrapping the planner and simulator.

Endpoints take a full scenario description (every config key, all optional
with base-scenario defaults) and return JSON bodies; /simulate additionally
carries the CSV/event/metrics artifacts as text so a thin client can write
them to disk unchanged.
"""
from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, capacity as cap, config as cfgmod, sim as simmod
from .params import validate_params


class EnergySection(BaseModel):
    k_e: float = 0.005
    k_v: float = 0.015
    k_ch: float = 0.2
    e_max: float = 14.8
    e_lb: float = 12.0
    delta: float = 0.2
    xc_x: float = 0.0
    xc_y: float = 0.0


class WorldSection(BaseModel):
    c_d: float = 0.5
    wind_x: float = 0.0
    wind_y: float = 0.0
    r0: float = 9.0


class CbfSection(BaseModel):
    k_c: float = 0.15
    p1: float = 0.08
    p2: float = 0.4
    gamma_h: float = 0.5
    rho: float = 0.5
    k_s: float = 1.0
    p_l: float = 0.5
    window: float = 20.0
    h0: float = 1e9
    delta_t: float = 35.0
    h_margin: float = 0.02


class MissionSection(BaseModel):
    v_n: float = 0.15
    k_d: float = 2.0
    patrol_radius: float = 7.2
    m_src: float = 1.0
    delta_tol: float = 0.3
    ccw: bool = True


class CapacitySection(BaseModel):
    n: int = 5
    v_tilde: float = 0.15
    epsilon: float | None = None  # None -> estimate from mission speed
    v_f: float | None = None


class KcSection(BaseModel):
    k_p: float = 1.0
    k_d: float = 3.0


class SimSection(BaseModel):
    dt: float = 0.01
    t_final: float = 3000.0
    seed: int = 7
    emin_init: str = "all_at_elb"
    emin_values: list[float] = Field(default_factory=list)
    decimation: int = 10
    speed_jitter: float = 0.02


class Scenario(BaseModel):
    energy: EnergySection = Field(default_factory=EnergySection)
    world: WorldSection = Field(default_factory=WorldSection)
    cbf: CbfSection = Field(default_factory=CbfSection)
    mission: MissionSection = Field(default_factory=MissionSection)
    capacity: CapacitySection = Field(default_factory=CapacitySection)
    kc: KcSection = Field(default_factory=KcSection)
    sim: SimSection = Field(default_factory=SimSection)

    def to_sections(self) -> dict[str, dict[str, str]]:
        """Flatten into the canonical string-keyed config mapping."""
        out: dict[str, dict[str, str]] = {}
        for section, model in (
            ("energy", self.energy),
            ("world", self.world),
            ("cbf", self.cbf),
            ("mission", self.mission),
            ("capacity", self.capacity),
            ("kc", self.kc),
            ("sim", self.sim),
        ):
            kv = {}
            for key, value in model.model_dump().items():
                if value is None:
                    kv[key] = "auto"
                elif isinstance(value, bool):
                    kv[key] = "true" if value else "false"
                elif isinstance(value, list):
                    kv[key] = ",".join(str(v) for v in value)
                else:
                    kv[key] = str(value)
            out[section] = kv
        return out


class SweepRequest(BaseModel):
    scenario: Scenario = Field(default_factory=Scenario)
    n_values: list[int] = Field(default_factory=list)
    v_tilde_values: list[float] = Field(default_factory=list)


class ValidationResponse(BaseModel):
    violations: list[str]


class CapacityResponse(BaseModel):
    report: dict
    feasible: bool


class KcResponse(BaseModel):
    heuristic: float
    theorem_floor: float
    recommended: float


class SweepResponse(BaseModel):
    rows: list[dict]


class SimulateResponse(BaseModel):
    metrics: dict
    feasibility: dict | None
    breach: bool
    telemetry_csv: str
    events_text: str
    metrics_text: str
    resolved_config: str


app = FastAPI(title="chargecoord", version=__version__)


def _resolved(scenario: Scenario) -> dict[str, dict[str, str]]:
    try:
        return cfgmod.merge_config(scenario.to_sections())
    except cfgmod.ConfigError as exc:  # defensive: model fields mirror the key list
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/validate", response_model=ValidationResponse)
def validate(scenario: Scenario) -> ValidationResponse:
    cfg = _resolved(scenario)
    violations = validate_params(
        cfgmod.build_energy(cfg), cfgmod.build_world(cfg), cfgmod.build_gains(cfg)
    )
    violations += cfgmod.build_capacity_inputs(cfg).validate()
    return ValidationResponse(violations=violations)


def _validated_inputs(cfg) -> cap.CapacityInputs:
    inputs = cfgmod.build_capacity_inputs(cfg)
    problems = validate_params(
        cfgmod.build_energy(cfg), cfgmod.build_world(cfg), cfgmod.build_gains(cfg)
    )
    problems += inputs.validate()
    if problems:
        raise HTTPException(status_code=400, detail="; ".join(problems))
    return inputs


@app.post("/capacity", response_model=CapacityResponse)
def capacity_report(scenario: Scenario) -> CapacityResponse:
    report = cap.check_feasibility(_validated_inputs(_resolved(scenario)))
    return CapacityResponse(report=asdict(report), feasible=report.feasible)


@app.post("/kc", response_model=KcResponse)
def kc_recommend(scenario: Scenario) -> KcResponse:
    cfg = _resolved(scenario)
    try:
        rec = cap.k_c_heuristic(
            scenario.kc.k_p,
            scenario.kc.k_d,
            cfgmod.build_world(cfg),
            cfgmod.build_energy(cfg),
            cfgmod.build_energy(cfg).delta,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return KcResponse(
        heuristic=rec.heuristic,
        theorem_floor=rec.theorem_floor,
        recommended=rec.recommended,
    )


@app.post("/sweep", response_model=SweepResponse)
def sweep_grid(req: SweepRequest) -> SweepResponse:
    inputs = _validated_inputs(_resolved(req.scenario))
    rows = cap.sweep(inputs, req.n_values, req.v_tilde_values)
    return SweepResponse(rows=[asdict(r) for r in rows])


@app.post("/simulate", response_model=SimulateResponse)
def simulate(scenario: Scenario) -> SimulateResponse:
    cfg = _resolved(scenario)
    sc = cfgmod.build_scenario(cfg)
    problems = sc.validate()
    if problems:
        raise HTTPException(status_code=400, detail="; ".join(problems))
    try:
        result = simmod.run(sc)
    except simmod.SimulationError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    return SimulateResponse(
        metrics=asdict(result.metrics),
        feasibility=asdict(result.feasibility) if result.feasibility else None,
        breach=result.metrics.breach,
        telemetry_csv=simmod.telemetry_csv(result.telemetry),
        events_text=simmod.events_text(result.events),
        metrics_text=simmod.metrics_text(result.metrics, result.feasibility),
        resolved_config=cfgmod.render_ini(cfg),
    )
