"""Service handlers: the CLI calls these in-process, the app over HTTP."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..coords import to_eulerian, to_lagrangian
from ..flow import SolverConfig, evolve, project_Pi
from ..lagrangian import (
    HyperelasticCoeffs,
    ch_coefficients,
    kappa_ch_coefficients,
    rod_coefficients,
)
from ..metric import OptimizerConfig, d_eulerian
from ..oracles import PeakonConfig, multipeakon_pair
from ..serialization import (
    bracket_to_dict,
    config_hash,
    pair_from_dict,
    pair_to_dict,
    state_from_dict,
    state_to_dict,
)
from ..validate import run_suite
from . import schemas as sm

__all__ = [
    "handle_simulate",
    "handle_transform",
    "handle_metric",
    "handle_validate",
    "scenario_threads",
]


def scenario_threads() -> int:
    """Parallel-scenario cap from CHOL_LAG_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("CHOL_LAG_THREADS", "1")))
    except ValueError:
        return 1


def _coefficients(spec: sm.CoefficientsSpec) -> HyperelasticCoeffs | None:
    if spec.kind == "ch":
        return None  # native Camassa-Holm right-hand side
    if spec.kind == "kappa_ch":
        return kappa_ch_coefficients(spec.kappa)
    return rod_coefficients(spec.gamma)


def _initial_state(cfg: sm.ScenarioConfig):
    g = cfg.grid
    x = np.linspace(g.x_min, g.x_max, g.n)
    if cfg.initial.lagrangian is not None:
        return state_from_dict(cfg.initial.lagrangian.model_dump())
    if cfg.initial.peakons is not None:
        pk = cfg.initial.peakons
        if pk.positions and not (
            g.x_min < min(pk.positions) and max(pk.positions) < g.x_max
        ):
            raise ValueError("peakon positions must lie inside the grid window")
        pair = multipeakon_pair(
            PeakonConfig(tuple(pk.amplitudes), tuple(pk.positions)), x
        )
    else:
        pair = pair_from_dict(cfg.initial.pair.model_dump())
    return to_lagrangian(pair, n=g.n)


def _run_scenario(cfg: sm.ScenarioConfig) -> sm.ScenarioResult:
    sha = config_hash(cfg.model_dump())
    X = _initial_state(cfg)
    coeffs = _coefficients(cfg.coefficients)
    solver = SolverConfig(
        dt=cfg.solver.dt,
        t_end=cfg.solver.t_end,
        scheme=cfg.solver.scheme,
        monitor_every=cfg.solver.monitor_every,
        project_threshold=cfg.solver.project_threshold,
    )
    traj = evolve(X, solver, coeffs=coeffs, keep_states=True)
    snapshots = []
    for t, s in zip(traj.times, traj.states):
        snap = sm.SnapshotModel(t=t, config_sha256=sha)
        if cfg.outputs.eulerian:
            snap.pair = sm.PairModel(**pair_to_dict(to_eulerian(project_Pi(s))))
        if cfg.outputs.lagrangian:
            snap.state = sm.StateModel(**state_to_dict(s))
        snapshots.append(snap)
    manifest = sm.ManifestModel(
        name=cfg.name,
        config_sha256=sha,
        times=list(traj.monitor_times),
        energy=list(traj.energy),
        residual=list(traj.residual),
        energy_drift=traj.energy_drift,
        steps=traj.steps,
        rejections=traj.rejections,
        projections=traj.projections,
        dt_final=traj.dt_final,
    )
    return sm.ScenarioResult(manifest=manifest, snapshots=snapshots)


def handle_simulate(req: sm.SimulateRequest) -> sm.SimulateResponse:
    if not req.scenarios:
        raise ValueError("no scenarios given")
    workers = min(scenario_threads(), len(req.scenarios))
    if workers == 1:
        results = [_run_scenario(c) for c in req.scenarios]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_scenario, req.scenarios))
    return sm.SimulateResponse(results=results)


def handle_transform(req: sm.TransformRequest) -> sm.TransformResponse:
    if req.direction == "to_lagrangian":
        pair = pair_from_dict(req.pair.model_dump())
        X = to_lagrangian(pair, n=req.grid_n)
        resp = sm.TransformResponse(state=sm.StateModel(**state_to_dict(X)))
        if req.roundtrip:
            back = to_eulerian(X)
            ui = np.interp(pair.x, back.x, back.u)
            resp.roundtrip_u_linf = float(np.max(np.abs(ui - pair.u)))
        return resp
    X = state_from_dict(req.state.model_dump())
    pair = to_eulerian(X)
    resp = sm.TransformResponse(pair=sm.PairModel(**pair_to_dict(pair)))
    if req.roundtrip:
        back = to_lagrangian(pair, grid=X.grid)
        resp.roundtrip_u_linf = float(np.max(np.abs(back.u - X.u)))
    return resp


def handle_metric(req: sm.MetricRequest) -> sm.MetricResponse:
    opt = OptimizerConfig(
        max_iters=req.optimizer.max_iters,
        rel_tol=req.optimizer.rel_tol,
        n_knots=req.optimizer.n_knots,
        kappa_max=req.optimizer.kappa_max,
    )
    bracket = d_eulerian(
        pair_from_dict(req.pair_a.model_dump()),
        pair_from_dict(req.pair_b.model_dump()),
        opt=opt,
        n=req.n,
        restricted_m=req.restricted_m,
    )
    d = bracket_to_dict(bracket)
    return sm.MetricResponse(
        lower=d["lower"],
        upper=d["upper"],
        iterations=d["iterations"],
        witness_knots=d["witness_knots"],
    )


def handle_validate(req: sm.ValidateRequest) -> sm.ValidateResponse:
    report = run_suite(req.suite, seed=req.seed)
    return sm.ValidateResponse(
        suite=req.suite,
        passed=all(r.passed for r in report),
        report=[
            sm.CriterionModel(cid=r.cid, name=r.name, passed=r.passed, details=r.details)
            for r in report
        ],
    )
