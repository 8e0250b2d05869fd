"""Config loading, override semantics, CLI subcommands and exit codes."""

from pathlib import Path

import pytest

from chargecoord.capacity import delta_t_critical
from chargecoord.cli import main
from chargecoord.config import (
    ConfigError,
    build_capacity_inputs,
    build_scenario,
    load_config,
    merge_config,
    render_ini,
)

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


_counter = iter(range(10**6))


def write_cfg(tmp_path, text) -> str:
    p = tmp_path / f"test_{next(_counter)}.ini"
    p.write_text(text)
    return str(p)


class TestConfig:
    def test_defaults_reproduce_base_scenario(self):
        cfg = merge_config({"capacity": {"epsilon": "0.24"}})
        inputs = build_capacity_inputs(cfg)
        assert delta_t_critical(inputs) == pytest.approx(36.39, abs=0.05)

    def test_unknown_section_rejected(self, tmp_path):
        path = write_cfg(tmp_path, "[rocket]\nthrust = 12\n")
        with pytest.raises(ConfigError, match=r"unknown config section \[rocket\]"):
            load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = write_cfg(tmp_path, "[energy]\nk_z = 12\n")
        with pytest.raises(ConfigError, match="unknown key energy.k_z"):
            load_config(path)

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/cfg.ini")

    def test_parse_error_has_origin(self, tmp_path):
        path = write_cfg(tmp_path, "energy]\nk_e: nope\n")
        with pytest.raises(ConfigError, match="cannot parse"):
            load_config(path)

    def test_override_equals_editing(self, tmp_path):
        edited = write_cfg(tmp_path, "[sim]\ndt = 0.02\n")
        base = write_cfg(tmp_path, "")
        a = load_config(edited)
        b = load_config(base, overrides=["sim.dt=0.02"])
        assert render_ini(a) == render_ini(b)
        assert build_scenario(a) == build_scenario(b)

    def test_override_unknown_key(self, tmp_path):
        path = write_cfg(tmp_path, "")
        with pytest.raises(ConfigError, match="unknown key"):
            load_config(path, overrides=["sim.dx=1"])

    def test_bad_number_names_key(self, tmp_path):
        path = write_cfg(tmp_path, "[energy]\nk_e = fast\n")
        with pytest.raises(ConfigError, match="energy.k_e"):
            build_scenario(load_config(path))

    def test_auto_epsilon_becomes_none(self):
        cfg = merge_config({})
        assert build_capacity_inputs(cfg).epsilon is None

    def test_shipped_scenarios_parse_and_validate(self):
        for name in ("base", "wind_n5_overload", "wind_n4", "wind_lowkv_n6"):
            sc = build_scenario(load_config(SCENARIOS / f"{name}.ini"))
            assert sc.validate() == []

    def test_six_robot_scenario_smoke(self):
        from chargecoord.sim import run

        sc = build_scenario(
            load_config(SCENARIOS / "wind_lowkv_n6.ini", ["sim.t_final=120"])
        )
        res = run(sc)
        assert res.metrics.exclusion_violation_ticks == 0
        assert res.metrics.min_h_e_outside >= -1e-3
        assert res.feasibility.feasible


class TestCliCapacity:
    def test_base_feasible_exit_zero(self, capsys):
        code = main(["capacity", "--config", str(SCENARIOS / "base.ini")])
        out = capsys.readouterr().out
        assert code == 0
        assert "36.39" in out
        assert "FEASIBLE" in out

    def test_overload_exit_three(self, capsys):
        code = main(["capacity", "--config", str(SCENARIOS / "wind_n5_overload.ini")])
        out = capsys.readouterr().out
        assert code == 3
        assert "INFEASIBLE" in out

    def test_low_kv_six_robots_feasible(self, capsys):
        code = main(["capacity", "--config", str(SCENARIOS / "wind_lowkv_n6.ini")])
        out = capsys.readouterr().out
        assert code == 0
        assert "39.5" in out

    def test_invalid_params_exit_one(self, capsys, tmp_path):
        path = write_cfg(tmp_path, "[cbf]\nk_c = 0.1\n")
        code = main(["capacity", "--config", path, "--set", "capacity.epsilon=0.24"])
        assert code == 1


class TestCliKc:
    def test_worked_example(self, capsys, tmp_path):
        path = write_cfg(tmp_path, "[world]\nc_d = 1e-12\n")
        code = main(["kc", "--config", path])
        out = capsys.readouterr().out
        assert code == 0
        assert "0.110" in out
        assert "0.14175" in out or "0.141750" in out

    def test_underdamped_exit_one(self, capsys, tmp_path):
        path = write_cfg(tmp_path, "[kc]\nk_p = 10\n")
        code = main(["kc", "--config", path])
        err = capsys.readouterr().err
        assert code == 1
        assert "overdamped" in err

    def test_wind_increases_heuristic(self, capsys, tmp_path):
        lo = write_cfg(tmp_path, "[world]\nc_d = 1e-12\n")
        main(["kc", "--config", lo])
        no_wind = float(capsys.readouterr().out.split()[1])
        hi = write_cfg(tmp_path, "[world]\nc_d = 1e-12\nwind_x = 0.08\nwind_y = 0.08\n")
        main(["kc", "--config", hi])
        windy = float(capsys.readouterr().out.split()[1])
        assert windy > no_wind


class TestCliSweep:
    def test_wind_scenario_counts(self, capsys):
        code = main(
            ["sweep", "--config", str(SCENARIOS / "wind_n5_overload.ini"), "--n", "4,5,6"]
        )
        out = capsys.readouterr().out
        assert code == 0
        lines = [l for l in out.strip().split("\n")[1:] if l.strip()]
        verdicts = {int(l.split()[0]): l.split()[-1] for l in lines}
        assert verdicts == {4: "FEASIBLE", 5: "INFEASIBLE", 6: "INFEASIBLE"}

    def test_low_kv_five_and_six_feasible(self, capsys):
        code = main(
            ["sweep", "--config", str(SCENARIOS / "wind_lowkv_n6.ini"), "--n", "5,6"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("FEASIBLE") == 2

    def test_empty_ranges_empty_table(self, capsys):
        code = main(["sweep", "--config", str(SCENARIOS / "base.ini")])
        out = capsys.readouterr().out
        assert code == 0
        assert len(out.strip().split("\n")) == 1  # header only


class TestCliSimulate:
    def test_short_run_writes_artifacts(self, tmp_path, capsys):
        out_dir = tmp_path / "out"
        code = main(
            [
                "simulate",
                "--config", str(SCENARIOS / "base.ini"),
                "--set", "sim.t_final=20",
                "--set", "sim.decimation=50",
                "--out", str(out_dir),
            ]
        )
        assert code == 0
        for name in ("telemetry.csv", "events.log", "metrics.txt", "resolved.ini"):
            assert (out_dir / name).exists()
        head = (out_dir / "telemetry.csv").read_text().splitlines()[0]
        assert head.startswith("t,robot_id,x,y")
        resolved = (out_dir / "resolved.ini").read_text()
        assert "t_final = 20" in resolved

    def test_validation_gate_exit_one(self, tmp_path, capsys):
        path = write_cfg(tmp_path, "[cbf]\nk_c = 0.135\n")
        code = main(["simulate", "--config", path, "--out", str(tmp_path / "o")])
        err = capsys.readouterr().err
        assert code == 1
        assert "Theorem 1" in err

    def test_unparsable_config_exit_one(self, tmp_path, capsys):
        path = tmp_path / "broken.ini"
        path.write_text("[energy\nk_e = .005\n")
        code = main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "config error" in capsys.readouterr().err
