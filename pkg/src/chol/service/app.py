"""FastAPI application exposing the solver operations."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..flow import SolverAbort
from . import schemas as sm
from .handlers import handle_metric, handle_simulate, handle_transform, handle_validate

app = FastAPI(
    title="chol",
    description="Conservative Camassa-Holm solver: simulation, coordinate "
    "transforms, Lipschitz-metric brackets, and validation suites.",
    version=__version__,
)


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/simulate", response_model=sm.SimulateResponse)
def simulate(req: sm.SimulateRequest):
    try:
        return handle_simulate(req)
    except SolverAbort as exc:
        raise HTTPException(status_code=500, detail=f"solver abort: {exc}") from exc
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.post("/transform", response_model=sm.TransformResponse)
def transform(req: sm.TransformRequest):
    try:
        return handle_transform(req)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.post("/metric", response_model=sm.MetricResponse)
def metric(req: sm.MetricRequest):
    try:
        return handle_metric(req)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.post("/validate", response_model=sm.ValidateResponse)
def validate(req: sm.ValidateRequest):
    try:
        return handle_validate(req)
    except KeyError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
