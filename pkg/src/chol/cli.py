"""Command-line front end.

Thin client over the service layer: requests are built from files and
flags, executed in-process by default or posted to a running service
with --server, and the responses are written back to disk.

Exit codes: 0 success, 1 failed validation criteria, 2 configuration or
input errors, 3 solver abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from .flow import SolverAbort
from .serialization import config_hash, dumps_canonical
from .service import schemas as sm
from .service.handlers import (
    handle_metric,
    handle_simulate,
    handle_transform,
    handle_validate,
)

_CONFIG_ERROR = 2
_SOLVER_ERROR = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        raise ValueError(f"{path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _post(server: str, endpoint: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + endpoint, json=payload, timeout=None)
    if resp.status_code >= 500:
        raise SolverAbort(resp.text)
    if resp.status_code >= 400:
        raise ValueError(resp.text)
    return resp.json()


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_canonical(payload) + "\n")


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    raw = _load_json(args.config)
    scenarios = raw["scenarios"] if isinstance(raw, dict) and "scenarios" in raw else [raw]
    for sc in scenarios:
        if args.grid_n is not None:
            sc.setdefault("grid", {})["n"] = args.grid_n
        if args.dt is not None:
            sc.setdefault("solver", {})["dt"] = args.dt
        if args.t_end is not None:
            sc.setdefault("solver", {})["t_end"] = args.t_end
    req = sm.SimulateRequest(scenarios=scenarios)
    if args.server:
        resp = sm.SimulateResponse(**_post(args.server, "/simulate", req.model_dump()))
    else:
        resp = handle_simulate(req)

    out = Path(args.out_dir)
    for cfg, result in zip(req.scenarios, resp.results):
        prefix = cfg.outputs.prefix
        _write_json(out / f"{prefix}_manifest.json", result.manifest.model_dump())
        for k, snap in enumerate(result.snapshots):
            payload = {"t": snap.t, "config_sha256": snap.config_sha256}
            if snap.pair is not None:
                payload["pair"] = snap.pair.model_dump()
            if snap.state is not None:
                payload["state"] = snap.state.model_dump()
            _write_json(out / f"{prefix}_t{k}.json", payload)
            if cfg.outputs.csv and snap.pair is not None:
                from .serialization import pair_from_dict, pair_to_csv

                (out / f"{prefix}_t{k}.csv").write_text(
                    pair_to_csv(pair_from_dict(snap.pair.model_dump()))
                )
        drift = result.manifest.energy_drift
        print(f"{cfg.name}: {len(result.snapshots)} snapshots, drift={drift:.3e}")
    return 0


def _cmd_transform(args) -> int:
    payload = _load_json(args.input)
    direction = "to_lagrangian" if args.to_lagrangian else "to_eulerian"
    body = {"direction": direction, "grid_n": args.grid_n, "roundtrip": args.roundtrip}
    if direction == "to_lagrangian":
        body["pair"] = payload.get("pair", payload)
    else:
        body["state"] = payload.get("state", payload)
    req = sm.TransformRequest(**body)
    if args.server:
        resp = sm.TransformResponse(**_post(args.server, "/transform", req.model_dump()))
    else:
        resp = handle_transform(req)
    out = {"config_sha256": config_hash(req.model_dump())}
    if resp.state is not None:
        out["state"] = resp.state.model_dump()
    if resp.pair is not None:
        out["pair"] = resp.pair.model_dump()
    _write_json(Path(args.output), out)
    if args.roundtrip:
        print(f"roundtrip u sup-discrepancy: {resp.roundtrip_u_linf:.6e}")
    return 0


def _cmd_metric(args) -> int:
    pa = _load_json(args.file_a)
    pb = _load_json(args.file_b)
    req = sm.MetricRequest(
        pair_a=pa.get("pair", pa),
        pair_b=pb.get("pair", pb),
        restricted_m=args.restricted,
        n=args.grid_n,
    )
    if args.server:
        resp = sm.MetricResponse(**_post(args.server, "/metric", req.model_dump()))
    else:
        resp = handle_metric(req)
    doc = resp.model_dump()
    print(dumps_canonical(doc))
    if args.out:
        doc["config_sha256"] = config_hash(req.model_dump())
        _write_json(Path(args.out), doc)
    return 0


def _cmd_validate(args) -> int:
    req = sm.ValidateRequest(suite=args.suite, seed=args.seed)
    if args.server:
        resp = sm.ValidateResponse(**_post(args.server, "/validate", req.model_dump()))
    else:
        resp = handle_validate(req)
    for item in resp.report:
        tag = "PASS" if item.passed else "FAIL"
        print(f"[{tag}] criterion {item.cid:2d} {item.name}: {item.details}")
    return 0 if resp.passed else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="chol",
        description="Conservative Camassa-Holm solver: simulate, transform, "
        "metric brackets, validation suites.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario config, write snapshots")
    sim.add_argument("--config", required=True, help="scenario JSON file")
    sim.add_argument("--out-dir", default="out", help="output directory")
    sim.add_argument("--grid-n", type=int, default=None, help="override grid size")
    sim.add_argument("--dt", type=float, default=None, help="override time step")
    sim.add_argument("--t-end", type=float, default=None, help="override final time")
    sim.add_argument("--seed", type=int, default=0, help="unused for simulate; kept for symmetry")
    sim.add_argument("--server", default=None, help="POST to a running service instead")
    sim.set_defaults(fn=_cmd_simulate)

    tr = sub.add_parser("transform", help="map between Eulerian and Lagrangian files")
    dir_group = tr.add_mutually_exclusive_group(required=True)
    dir_group.add_argument("--to-lagrangian", action="store_true")
    dir_group.add_argument("--to-eulerian", action="store_true")
    tr.add_argument("input")
    tr.add_argument("output")
    tr.add_argument("--grid-n", type=int, default=None)
    tr.add_argument("--roundtrip", action="store_true",
                    help="apply both maps and report the discrepancy")
    tr.add_argument("--server", default=None)
    tr.set_defaults(fn=_cmd_transform)

    me = sub.add_parser("metric", help="metric bracket between two pair files")
    me.add_argument("file_a")
    me.add_argument("file_b")
    me.add_argument("--restricted", type=float, default=None,
                    help="bounded-energy variant: both energies must be <= M")
    me.add_argument("--grid-n", type=int, default=None)
    me.add_argument("--out", default=None, help="also write the bracket JSON here")
    me.add_argument("--seed", type=int, default=0)
    me.add_argument("--server", default=None)
    me.set_defaults(fn=_cmd_metric)

    va = sub.add_parser("validate", help="run a named acceptance suite")
    va.add_argument("suite")
    va.add_argument("--seed", type=int, default=0)
    va.add_argument("--server", default=None)
    va.set_defaults(fn=_cmd_validate)

    se = sub.add_parser("serve", help="start the HTTP service")
    se.add_argument("--host", default="127.0.0.1")
    se.add_argument("--port", type=int, default=8000)
    se.set_defaults(fn=_cmd_serve)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValidationError, ValueError, KeyError, FileNotFoundError) as exc:
        return _fail(str(exc), _CONFIG_ERROR)
    except SolverAbort as exc:
        return _fail(f"solver abort: {exc}", _SOLVER_ERROR)


if __name__ == "__main__":
    sys.exit(main())
