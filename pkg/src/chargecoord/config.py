"""Sectioned-INI scenario configuration: one canonical key list for every entry point.

Sections/keys (defaults in DEFAULTS):

    [energy]   k_e k_v k_ch e_max e_lb delta xc_x xc_y
    [world]    c_d wind_x wind_y r0
    [cbf]      k_c p1 p2 gamma_h rho k_s p_l window h0 delta_t
    [mission]  v_n k_d patrol_radius m_src delta_tol ccw
    [capacity] n v_tilde epsilon v_f
    [kc]       k_p k_d
    [sim]      dt t_final seed emin_init emin_values decimation speed_jitter

capacity.n doubles as the simulated robot count; capacity.epsilon accepts a
number or "auto" (estimate from mission speed).  Values given as
``--set section.key=value`` behave exactly like editing the file.
"""
from __future__ import annotations

import configparser
import io
from pathlib import Path

from .capacity import CapacityInputs
from .mission import MissionParams
from .params import CbfGains, EnergyParams, WorldParams
from .sim import ScenarioConfig


class ConfigError(ValueError):
    """Unparsable file, unknown key, or uncoercible value."""


DEFAULTS: dict[str, dict[str, str]] = {
    "energy": {
        "k_e": "0.005",
        "k_v": "0.015",
        "k_ch": "0.2",
        "e_max": "14.8",
        "e_lb": "12.0",
        "delta": "0.2",
        "xc_x": "0.0",
        "xc_y": "0.0",
    },
    "world": {"c_d": "0.5", "wind_x": "0.0", "wind_y": "0.0", "r0": "9.0"},
    "cbf": {
        "k_c": "0.15",
        "p1": "0.08",
        "p2": "0.4",
        "gamma_h": "0.5",
        "rho": "0.5",
        "k_s": "1.0",
        "p_l": "0.5",
        "window": "20.0",
        "h0": "1e9",
        "delta_t": "35.0",
        "h_margin": "0.02",
    },
    "mission": {
        "v_n": "0.15",
        "k_d": "2.0",
        "patrol_radius": "7.2",
        "m_src": "1.0",
        "delta_tol": "0.3",
        "ccw": "true",
    },
    "capacity": {"n": "5", "v_tilde": "0.15", "epsilon": "auto", "v_f": "auto"},
    "kc": {"k_p": "1.0", "k_d": "3.0"},
    "sim": {
        "dt": "0.01",
        "t_final": "3000.0",
        "seed": "7",
        "emin_init": "all_at_elb",
        "emin_values": "",
        "decimation": "10",
        "speed_jitter": "0.02",
    },
}


def _parse_ini_text(text: str, origin: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {origin}: {exc}") from exc
    return {s: dict(parser.items(s)) for s in parser.sections()}


def load_config(path: str | Path, overrides: list[str] | None = None) -> dict[str, dict[str, str]]:
    """Read an INI file, merge over DEFAULTS, then apply --set overrides."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return merge_config(_parse_ini_text(p.read_text(), str(p)), overrides)


def merge_config(
    sections: dict[str, dict[str, str]], overrides: list[str] | None = None
) -> dict[str, dict[str, str]]:
    cfg = {s: dict(kv) for s, kv in DEFAULTS.items()}
    for section, kv in sections.items():
        if section not in cfg:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in kv.items():
            if key not in cfg[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            cfg[section][key] = str(value)
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        section, key = dotted.split(".", 1)
        if section not in cfg or key not in cfg[section]:
            raise ConfigError(f"unknown key {section}.{key}")
        cfg[section][key] = value
    return cfg


def render_ini(cfg: dict[str, dict[str, str]]) -> str:
    """Canonical text form of a resolved config (the override-equivalence witness)."""
    parser = configparser.ConfigParser(interpolation=None)
    for section, kv in cfg.items():
        parser[section] = kv
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def _f(cfg, section, key) -> float:
    raw = cfg[section][key]
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key} must be a number, got {raw!r}") from exc


def _i(cfg, section, key) -> int:
    raw = cfg[section][key]
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key} must be an integer, got {raw!r}") from exc


def _b(cfg, section, key) -> bool:
    raw = cfg[section][key].strip().lower()
    if raw in ("true", "1", "yes", "on"):
        return True
    if raw in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{section}.{key} must be a boolean, got {raw!r}")


def _opt_f(cfg, section, key) -> float | None:
    raw = cfg[section][key].strip().lower()
    if raw in ("", "auto", "none"):
        return None
    return _f(cfg, section, key)


def build_energy(cfg) -> EnergyParams:
    return EnergyParams(
        k_e=_f(cfg, "energy", "k_e"),
        k_v=_f(cfg, "energy", "k_v"),
        k_ch=_f(cfg, "energy", "k_ch"),
        e_max=_f(cfg, "energy", "e_max"),
        e_lb=_f(cfg, "energy", "e_lb"),
        delta=_f(cfg, "energy", "delta"),
        x_c=(_f(cfg, "energy", "xc_x"), _f(cfg, "energy", "xc_y")),
    )


def build_world(cfg) -> WorldParams:
    return WorldParams(
        c_d=_f(cfg, "world", "c_d"),
        v_w=(_f(cfg, "world", "wind_x"), _f(cfg, "world", "wind_y")),
        r0=_f(cfg, "world", "r0"),
    )


def build_gains(cfg) -> CbfGains:
    return CbfGains(
        k_c=_f(cfg, "cbf", "k_c"),
        p1=_f(cfg, "cbf", "p1"),
        p2=_f(cfg, "cbf", "p2"),
        gamma_h=_f(cfg, "cbf", "gamma_h"),
        rho=_f(cfg, "cbf", "rho"),
        k_s=_f(cfg, "cbf", "k_s"),
        p_l=_f(cfg, "cbf", "p_l"),
        window=_f(cfg, "cbf", "window"),
        h0=_f(cfg, "cbf", "h0"),
        delta_t=_f(cfg, "cbf", "delta_t"),
        h_margin=_f(cfg, "cbf", "h_margin"),
    )


def build_mission(cfg) -> MissionParams:
    return MissionParams(
        v_n=_f(cfg, "mission", "v_n"),
        k_d=_f(cfg, "mission", "k_d"),
        patrol_radius=_f(cfg, "mission", "patrol_radius"),
        m_src=_f(cfg, "mission", "m_src"),
        delta_tol=_f(cfg, "mission", "delta_tol"),
        ccw=_b(cfg, "mission", "ccw"),
    )


def build_scenario(cfg) -> ScenarioConfig:
    emin_raw = cfg["sim"]["emin_values"].strip()
    emin_values = tuple(float(v) for v in emin_raw.split(",") if v.strip()) if emin_raw else ()
    return ScenarioConfig(
        energy=build_energy(cfg),
        world=build_world(cfg),
        gains=build_gains(cfg),
        mission=build_mission(cfg),
        n_robots=_i(cfg, "capacity", "n"),
        dt=_f(cfg, "sim", "dt"),
        t_final=_f(cfg, "sim", "t_final"),
        seed=_i(cfg, "sim", "seed"),
        emin_init=cfg["sim"]["emin_init"].strip().lower(),
        emin_values=emin_values,
        decimation=_i(cfg, "sim", "decimation"),
        v_tilde=_f(cfg, "capacity", "v_tilde"),
        epsilon=_opt_f(cfg, "capacity", "epsilon"),
        v_f=_opt_f(cfg, "capacity", "v_f"),
        speed_jitter=_f(cfg, "sim", "speed_jitter"),
    )


def build_capacity_inputs(cfg) -> CapacityInputs:
    return CapacityInputs(
        n=_i(cfg, "capacity", "n"),
        v_tilde=_f(cfg, "capacity", "v_tilde"),
        delta_t=_f(cfg, "cbf", "delta_t"),
        energy=build_energy(cfg),
        r0=_f(cfg, "world", "r0"),
        k_c=_f(cfg, "cbf", "k_c"),
        epsilon=_opt_f(cfg, "capacity", "epsilon"),
        v_n=_f(cfg, "mission", "v_n"),
        v_f=_opt_f(cfg, "capacity", "v_f"),
    )
