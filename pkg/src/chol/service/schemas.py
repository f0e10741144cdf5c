"""Pydantic request/response models of the solver service."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

__all__ = [
    "GridSpec",
    "SolverSpec",
    "AtomModel",
    "PairModel",
    "StateGridModel",
    "StateModel",
    "PeakonSpec",
    "InitialSpec",
    "CoefficientsSpec",
    "OutputsSpec",
    "ScenarioConfig",
    "SimulateRequest",
    "SnapshotModel",
    "ManifestModel",
    "ScenarioResult",
    "SimulateResponse",
    "TransformRequest",
    "TransformResponse",
    "OptimizerSpec",
    "MetricRequest",
    "MetricResponse",
    "ValidateRequest",
    "CriterionModel",
    "ValidateResponse",
]


class GridSpec(BaseModel):
    x_min: float = -25.0
    x_max: float = 25.0
    n: int = Field(default=2048, ge=3)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.x_min < self.x_max:
            raise ValueError("grid requires x_min < x_max")
        return self


class SolverSpec(BaseModel):
    dt: float = Field(default=1e-3, gt=0)
    t_end: float = Field(default=1.0, ge=0)
    scheme: str = "rk4"
    monitor_every: int = Field(default=50, ge=1)
    project_threshold: float = Field(default=0.0, ge=0.0, lt=1.0)


class AtomModel(BaseModel):
    x: float
    mass: float = Field(gt=0)


class PairModel(BaseModel):
    x: list[float]
    u: list[float]
    density: list[float]
    atoms: list[AtomModel] = []


class StateGridModel(BaseModel):
    xi_min: float
    xi_max: float
    n: int = Field(ge=3)


class StateModel(BaseModel):
    grid: StateGridModel
    zeta: list[float]
    u: list[float]
    h: list[float]


class PeakonSpec(BaseModel):
    amplitudes: list[float]
    positions: list[float]

    @model_validator(mode="after")
    def _consistent(self):
        if len(self.amplitudes) != len(self.positions):
            raise ValueError("amplitudes and positions must have equal length")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("positions must be strictly increasing")
        return self


class InitialSpec(BaseModel):
    """Exactly one of: peakon list, sampled pair, raw Lagrangian state."""

    peakons: PeakonSpec | None = None
    pair: PairModel | None = None
    lagrangian: StateModel | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        given = [v for v in (self.peakons, self.pair, self.lagrangian) if v is not None]
        if len(given) != 1:
            raise ValueError("initial data needs exactly one of peakons|pair|lagrangian")
        return self


class CoefficientsSpec(BaseModel):
    kind: str = "ch"  # ch | kappa_ch | rod
    kappa: float = 0.0
    gamma: float = 1.0

    @model_validator(mode="after")
    def _known(self):
        if self.kind not in ("ch", "kappa_ch", "rod"):
            raise ValueError(f"unknown coefficient preset {self.kind!r}")
        return self


class OutputsSpec(BaseModel):
    eulerian: bool = True
    lagrangian: bool = False
    csv: bool = False
    prefix: str = "run"


class ScenarioConfig(BaseModel):
    name: str = "scenario"
    initial: InitialSpec
    grid: GridSpec = GridSpec()
    solver: SolverSpec = SolverSpec()
    coefficients: CoefficientsSpec = CoefficientsSpec()
    outputs: OutputsSpec = OutputsSpec()


class SimulateRequest(BaseModel):
    scenarios: list[ScenarioConfig]


class SnapshotModel(BaseModel):
    t: float
    config_sha256: str
    pair: PairModel | None = None
    state: StateModel | None = None


class ManifestModel(BaseModel):
    name: str
    config_sha256: str
    times: list[float]
    energy: list[float]
    residual: list[float]
    energy_drift: float
    steps: int
    rejections: int
    projections: int
    dt_final: float


class ScenarioResult(BaseModel):
    manifest: ManifestModel
    snapshots: list[SnapshotModel]


class SimulateResponse(BaseModel):
    results: list[ScenarioResult]


class TransformRequest(BaseModel):
    direction: str  # to_lagrangian | to_eulerian
    pair: PairModel | None = None
    state: StateModel | None = None
    grid_n: int | None = Field(default=None, ge=3)
    roundtrip: bool = False

    @model_validator(mode="after")
    def _consistent(self):
        if self.direction not in ("to_lagrangian", "to_eulerian"):
            raise ValueError("direction must be to_lagrangian or to_eulerian")
        if self.direction == "to_lagrangian" and self.pair is None:
            raise ValueError("to_lagrangian needs a pair")
        if self.direction == "to_eulerian" and self.state is None:
            raise ValueError("to_eulerian needs a state")
        return self


class TransformResponse(BaseModel):
    pair: PairModel | None = None
    state: StateModel | None = None
    roundtrip_u_linf: float | None = None


class OptimizerSpec(BaseModel):
    max_iters: int = Field(default=200, ge=0)
    rel_tol: float = Field(default=1e-6, gt=0)
    n_knots: int = Field(default=33, ge=3)
    kappa_max: float = Field(default=10.0, gt=0)


class MetricRequest(BaseModel):
    pair_a: PairModel
    pair_b: PairModel
    restricted_m: float | None = None
    n: int | None = Field(default=None, ge=3)
    optimizer: OptimizerSpec = OptimizerSpec()


class MetricResponse(BaseModel):
    lower: float
    upper: float
    iterations: int
    witness_knots: dict


class ValidateRequest(BaseModel):
    suite: str
    seed: int = 0


class CriterionModel(BaseModel):
    cid: int
    name: str
    passed: bool
    details: str


class ValidateResponse(BaseModel):
    suite: str
    passed: bool
    report: list[CriterionModel]
