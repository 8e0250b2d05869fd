"""Command-line client for the planner/simulator service.

Runs everything through the HTTP API: against a remote server with
``--server URL``, otherwise through the bundled app in process (no daemon,
same request/response path).  Exit codes are stable contracts:

    0  clean run / feasible
    1  configuration or execution error
    2  simulation invariant breach (mutual exclusion or voltage floor)
    3  capacity verdict infeasible
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx

from .config import ConfigError, load_config

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BREACH = 2
EXIT_INFEASIBLE = 3


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # in-process: drive the ASGI app synchronously through starlette's
    # portal-backed client (plain httpx.ASGITransport is async-only)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # this environment's client emits an import-time notice
        from starlette.testclient import TestClient

    from .service import app

    return TestClient(app)


def _payload(cfg: dict[str, dict[str, str]]) -> dict:
    """Resolved string config -> JSON body (pydantic coerces the strings)."""
    body: dict = {}
    for section, kv in cfg.items():
        out = {}
        for key, value in kv.items():
            v = value.strip()
            if key in ("epsilon", "v_f") and v.lower() in ("", "auto", "none"):
                out[key] = None
            elif key == "emin_values":
                out[key] = [float(x) for x in v.split(",") if x.strip()]
            else:
                out[key] = v
        body[section] = out
    return body


def _load(args) -> dict:
    cfg = load_config(args.config, args.set or [])
    return _payload(cfg)


def _fail(resp: httpx.Response) -> int:
    try:
        detail = resp.json().get("detail", resp.text)
    except ValueError:
        detail = resp.text
    print(f"error ({resp.status_code}): {detail}", file=sys.stderr)
    return EXIT_ERROR


def cmd_simulate(args) -> int:
    body = _load(args)
    with _client(args.server) as client:
        resp = client.post("/simulate", json=body)
        if resp.status_code != 200:
            return _fail(resp)
        data = resp.json()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "telemetry.csv").write_text(data["telemetry_csv"])
    (out / "events.log").write_text(data["events_text"])
    (out / "metrics.txt").write_text(data["metrics_text"])
    (out / "resolved.ini").write_text(data["resolved_config"])
    print(data["metrics_text"], end="")
    print(f"artifacts written to {out}")
    if data["breach"]:
        print(f"invariant breach: {data['metrics']['breach_reason']}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def cmd_capacity(args) -> int:
    body = _load(args)
    with _client(args.server) as client:
        resp = client.post("/capacity", json=body)
        if resp.status_code != 200:
            return _fail(resp)
        data = resp.json()
    report = data["report"]
    order = [
        "n", "v_tilde", "delta_t", "kappa", "epsilon_used", "delta_t_cr",
        "lower_bound_s", "e_m_upper", "delta_e_m", "e_m_bar", "delta_av",
        "k_ch_min", "max_recharges", "feasible", "reason",
    ]
    width = max(len(k) for k in order)
    for key in order:
        value = report.get(key)
        if isinstance(value, float):
            value = f"{value:.6g}"
        print(f"{key.ljust(width)}  {value}")
    print("verdict:", "FEASIBLE" if data["feasible"] else "INFEASIBLE")
    return EXIT_OK if data["feasible"] else EXIT_INFEASIBLE


def cmd_kc(args) -> int:
    body = _load(args)
    with _client(args.server) as client:
        resp = client.post("/kc", json=body)
        if resp.status_code != 200:
            return _fail(resp)
        data = resp.json()
    print(f"heuristic      {data['heuristic']:.6g}")
    print(f"theorem_floor  {data['theorem_floor']:.6g}")
    print(f"recommended    {data['recommended']:.6g}")
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_sweep(args) -> int:
    body = {
        "scenario": _load(args),
        "n_values": _int_list(args.n or ""),
        "v_tilde_values": _float_list(args.v_tilde or ""),
    }
    with _client(args.server) as client:
        resp = client.post("/sweep", json=body)
        if resp.status_code != 200:
            return _fail(resp)
        rows = resp.json()["rows"]
    print(f"{'n':>3} {'v_tilde':>8} {'epsilon':>8} {'dt_cr':>8} {'verdict':>10}")
    for row in rows:
        verdict = "FEASIBLE" if row["feasible"] else "INFEASIBLE"
        print(
            f"{row['n']:>3} {row['v_tilde']:>8.3g} {row['epsilon_used']:>8.3g} "
            f"{row['delta_t_cr']:>8.4g} {verdict:>10}"
        )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chargecoord",
        description="Multi-robot charging coordination: capacity planning and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="scenario INI file")
            p.add_argument(
                "--set",
                action="append",
                metavar="section.key=value",
                help="override a config value (repeatable)",
            )
        p.add_argument("--server", help="remote service URL (default: in-process)")

    p = sub.add_parser("simulate", help="run the closed loop and write artifacts")
    common(p)
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("capacity", help="print the feasibility report")
    common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("kc", help="recommend the energy-barrier distance gain")
    common(p)
    p.set_defaults(func=cmd_kc)

    p = sub.add_parser("sweep", help="feasibility grid over n and/or v_tilde")
    common(p)
    p.add_argument("--n", help="comma-separated robot counts")
    p.add_argument("--v-tilde", dest="v_tilde", help="comma-separated speed bounds")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except httpx.HTTPError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
