"""Time integration of the semilinear system and the relabeling group.

Evolution uses fixed-step RK4 with halving on constraint collapse; the
relabeling machinery (composition, inversion, projection onto the
normalized section y + hcum = id) is piecewise-linear and monotone by
construction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .lagrangian import (
    Grid,
    HyperelasticCoeffs,
    LagrangianState,
    MonotonicityError,
    _frozen_array,
    _pq_arrays,
    _pq_rod_arrays,
    _flux_antiderivative,
    _require_monotone,
)

__all__ = [
    "Relabeling",
    "SolverConfig",
    "Trajectory",
    "StepCollapseError",
    "SolverAbort",
    "TruncationClampWarning",
    "identity_relabeling",
    "kappa_of",
    "compose",
    "invert",
    "relabel",
    "step",
    "evolve",
    "project_Pi",
    "sbar_t",
    "dt_max",
]


class TruncationClampWarning(RuntimeWarning):
    """A relabeling escapes the truncation window; samples were clamped."""


class StepCollapseError(RuntimeError):
    """y_xi + h_xi lost positivity during a step; retry with smaller dt."""


class SolverAbort(RuntimeError):
    """Unrecoverable integration failure."""


@dataclass(frozen=True, eq=False)
class Relabeling:
    """Strictly increasing sampled reparametrization with f - id bounded."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, self.grid.n))
        if float(np.min(np.diff(self.values))) <= 0.0:
            raise ValueError("relabeling samples must be strictly increasing")


def identity_relabeling(grid: Grid) -> Relabeling:
    return Relabeling(grid, grid.nodes)


def kappa_of(f: Relabeling) -> float:
    """Least kappa compatible with the slope and offset characterization.

    Slopes must lie in [1/(1+kappa), 1+kappa] and both sup-offsets
    |f - id|, |f^{-1} - id| (equal for a homeomorphism) must not exceed
    kappa.
    """
    offsets = f.values - f.grid.nodes
    slopes = 1.0 + np.diff(offsets) / f.grid.h  # exact 1 for the identity
    if float(np.min(slopes)) <= 0.0:
        raise ValueError("not a homeomorphism: nonpositive slope cell")
    kappa_slope = max(float(np.max(slopes)) - 1.0, float(np.max(1.0 / slopes)) - 1.0)
    kappa_offset = float(np.max(np.abs(offsets)))
    return max(kappa_slope, kappa_offset, 0.0)


def _eval_monotone(x, xp, fp):
    """Piecewise-linear evaluation with slope-one extension outside xp."""
    out = np.interp(x, xp, fp)
    left = x < xp[0]
    if np.any(left):
        out = np.where(left, fp[0] + (x - xp[0]), out)
    right = x > xp[-1]
    if np.any(right):
        out = np.where(right, fp[-1] + (x - xp[-1]), out)
    return out


def eval_relabeling(f: Relabeling, x) -> np.ndarray:
    """Evaluate f at arbitrary points (slope-one extension off-window)."""
    return _eval_monotone(np.asarray(x, dtype=float), f.grid.nodes, f.values)


def compose(f: Relabeling, g: Relabeling) -> Relabeling:
    """Sampled composition f(g(.)) on the common grid."""
    if f.grid != g.grid:
        raise ValueError("relabelings live on different grids")
    return Relabeling(f.grid, eval_relabeling(f, g.values))


def invert(f: Relabeling) -> Relabeling:
    """Sampled inverse, exact for pure shifts and exact at the nodes of f."""
    vals = _eval_monotone(f.grid.nodes, f.values, f.grid.nodes)
    return Relabeling(f.grid, vals)


def _relabel_arrays(grid: Grid, zeta, u, hc, pos):
    nodes = grid.nodes
    znew = np.interp(pos, nodes, zeta) + pos - nodes
    unew = np.interp(pos, nodes, u)
    hnew = np.interp(pos, nodes, hc)
    return znew, unew, hnew


def relabel(X: LagrangianState, f: Relabeling) -> LagrangianState:
    """Relabeled state X o f sampled on the grid of X.

    Components are evaluated piecewise-linearly at f(xi_i); beyond the
    truncation window zeta and hcum extend as constants and u clamps to
    its end values, with a warning.
    """
    if X.grid != f.grid:
        raise ValueError("state and relabeling live on different grids")
    nodes = X.grid.nodes
    pos = f.values
    overshoot = max(float(nodes[0] - pos[0]), float(pos[-1] - nodes[-1]))
    if overshoot > X.grid.h:
        warnings.warn(
            f"relabeling leaves the truncation window by {overshoot:.3g}; "
            "clamping to the boundary samples",
            TruncationClampWarning,
            stacklevel=2,
        )
    znew, unew, hnew = _relabel_arrays(X.grid, X.zeta, X.u, X.hcum, pos)
    return LagrangianState(X.grid, znew, unew, hnew)


def _project_raw(grid: Grid, zeta, u, hc):
    g = grid.nodes + zeta + hc
    if float(np.min(np.diff(g))) <= 0.0:
        raise ValueError("y + hcum has a flat cell; state is not projectable")
    ginv = _eval_monotone(grid.nodes, g, grid.nodes)
    return _relabel_arrays(grid, zeta, u, hc, ginv)


def project_Pi(X: LagrangianState) -> LagrangianState:
    """Project onto the normalized section: X o (y + hcum)^{-1}.

    The output satisfies (y + hcum)(xi) = xi up to interpolation error and
    the projection is idempotent on that section.
    """
    znew, unew, hnew = _project_raw(X.grid, X.zeta, X.u, X.hcum)
    return LagrangianState(X.grid, znew, unew, hnew)


# ----------------------------------------------------------------------
# Time stepping
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-step RK4 configuration.

    ``project_threshold`` optionally renormalizes the labeling mid-run:
    whenever the smallest cell value of y_xi + h_xi falls below it, the
    state is reparametrized onto the section y + hcum = id.  This is an
    exact symmetry of the evolution (projection commutes with the flow
    up to relabeling), so it changes nothing at the level of equivalence
    classes; it keeps the cells ahead of traveling crests, which contract
    exponentially in any fixed labeling, resolvable.  Leave at 0 to
    integrate the raw system, e.g. for equivariance studies.
    """

    dt: float
    t_end: float
    scheme: str = "rk4"
    monitor_every: int = 50
    project_threshold: float = 0.0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        if self.scheme != "rk4":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.monitor_every < 1:
            raise ValueError("monitor_every must be at least 1")
        if self.project_threshold < 0.0 or self.project_threshold >= 1.0:
            raise ValueError("project_threshold must lie in [0, 1)")


def dt_max(X: LagrangianState) -> float:
    """Step-size guard 0.5 / max(1, |u|_inf)."""
    return 0.5 / max(1.0, float(np.max(np.abs(X.u))))


def _rhs_raw(nodes, zeta, u, hc, coeffs: HyperelasticCoeffs | None, span):
    y = nodes + zeta
    _require_monotone(y, span)
    if coeffs is None:
        P, Q = _pq_arrays(y, u, hc)
        return u, -Q, u**3 - 2.0 * P * u
    P, Q = _pq_rod_arrays(y, u, hc, coeffs)
    return (
        np.asarray(coeffs.df(u), dtype=float),
        -Q,
        _flux_antiderivative(coeffs, u) - 2.0 * P * u,
    )


def _rk4_raw(nodes, zeta, u, hc, dt, coeffs, span):
    k1 = _rhs_raw(nodes, zeta, u, hc, coeffs, span)
    k2 = _rhs_raw(
        nodes, zeta + 0.5 * dt * k1[0], u + 0.5 * dt * k1[1], hc + 0.5 * dt * k1[2],
        coeffs, span,
    )
    k3 = _rhs_raw(
        nodes, zeta + 0.5 * dt * k2[0], u + 0.5 * dt * k2[1], hc + 0.5 * dt * k2[2],
        coeffs, span,
    )
    k4 = _rhs_raw(
        nodes, zeta + dt * k3[0], u + dt * k3[1], hc + dt * k3[2], coeffs, span,
    )
    w = dt / 6.0
    return (
        zeta + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        hc + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )


def step(
    X: LagrangianState, dt: float, coeffs: HyperelasticCoeffs | None = None
) -> LagrangianState:
    """One RK4 step; raises StepCollapseError if y_xi + h_xi loses positivity."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > dt_max(X) * (1.0 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability guard {dt_max(X)}")
    span = float(X.y[-1] - X.y[0])
    _require_monotone(X.y, span)  # failures of the input itself propagate
    try:
        znew, unew, hnew = _rk4_raw(
            X.grid.nodes, X.zeta, X.u, X.hcum, dt, coeffs, span
        )
    except MonotonicityError as exc:
        raise StepCollapseError(
            f"intermediate stage lost monotonicity: {exc}"
        ) from exc
    y = X.grid.nodes + znew
    if float(np.min(np.diff(y) + np.diff(hnew))) <= 0.0:
        raise StepCollapseError(
            "y_xi + h_xi lost positivity; retry with a smaller step"
        )
    return LagrangianState(X.grid, znew, unew, hnew)


def _compat_residual(nodes, zeta, u, hc, h):
    dy = np.diff(nodes + zeta) / h
    dh = np.diff(hc) / h
    du = np.diff(u) / h
    uc = 0.5 * (u[:-1] + u[1:])
    return float(np.max(np.abs(dy * dh - dy * dy * uc * uc - du * du)))


@dataclass(eq=False)
class Trajectory:
    """Snapshots and conservation diagnostics of one evolution run."""

    times: list[float] = field(default_factory=list)
    states: list[LagrangianState] = field(default_factory=list)
    monitor_times: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    u_sup: list[float] = field(default_factory=list)
    steps: int = 0
    rejections: int = 0
    projections: int = 0
    dt_final: float = 0.0

    @property
    def final(self) -> LagrangianState:
        return self.states[-1]

    @property
    def energy_drift(self) -> float:
        e = np.asarray(self.energy)
        return float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-300))


def evolve(
    X: LagrangianState,
    cfg: SolverConfig,
    coeffs: HyperelasticCoeffs | None = None,
    keep_states: bool = True,
) -> Trajectory:
    """Integrate to cfg.t_end, recording snapshots every monitor interval.

    The step is halved (persistently) whenever positivity of y_xi + h_xi
    collapses; twenty consecutive halvings abort the run.
    """
    nodes = X.grid.nodes
    h = X.grid.h
    span = float(X.y[-1] - X.y[0])
    zeta, u, hc = X.zeta.copy(), X.u.copy(), X.hcum.copy()
    dt_floor = cfg.dt * 2.0**-20

    traj = Trajectory(dt_final=cfg.dt)

    def record(t, snapshot):
        traj.monitor_times.append(t)
        traj.energy.append(float(hc[-1] - hc[0]))
        traj.residual.append(_compat_residual(nodes, zeta, u, hc, h))
        traj.u_sup.append(float(np.max(np.abs(u))))
        if snapshot:
            traj.times.append(t)
            traj.states.append(LagrangianState(X.grid, zeta, u, hc))

    record(0.0, True)
    t = 0.0
    dt_cur = cfg.dt
    since_snapshot = 0
    while t < cfg.t_end - 1e-12 * max(1.0, cfg.t_end):
        guard = 0.5 / max(1.0, float(np.max(np.abs(u))))
        dt_eff = min(dt_cur, guard, cfg.t_end - t)
        try:
            znew, unew, hnew = _rk4_raw(nodes, zeta, u, hc, dt_eff, coeffs, span)
            collapsed = (
                float(np.min(np.diff(nodes + znew) + np.diff(hnew))) <= 0.0
            )
        except MonotonicityError:
            collapsed = True
        if collapsed:
            traj.rejections += 1
            dt_cur = dt_eff / 2.0
            if dt_cur < dt_floor:
                raise SolverAbort(
                    f"constraint collapse at t={t:.6g}: dt fell below {dt_floor:.3g}"
                )
            continue
        zeta, u, hc = znew, unew, hnew
        t += dt_eff
        traj.steps += 1
        since_snapshot += 1
        if cfg.project_threshold > 0.0:
            smin = float(np.min(np.diff(nodes + zeta) + np.diff(hc))) / h
            if smin < cfg.project_threshold:
                zeta, u, hc = _project_raw(X.grid, zeta, u, hc)
                traj.projections += 1
        done = t >= cfg.t_end - 1e-12 * max(1.0, cfg.t_end)
        if since_snapshot >= cfg.monitor_every or done:
            record(t, keep_states or done)
            since_snapshot = 0
    traj.dt_final = dt_cur
    if not traj.states or traj.times[-1] < t - 1e-12:
        traj.times.append(t)
        traj.states.append(LagrangianState(X.grid, zeta, u, hc))
    return traj


def sbar_t(
    X: LagrangianState,
    cfg: SolverConfig,
    coeffs: HyperelasticCoeffs | None = None,
) -> LagrangianState:
    """Normalized-section semigroup: project the evolution endpoint."""
    traj = evolve(X, cfg, coeffs=coeffs, keep_states=False)
    return project_Pi(traj.final)
