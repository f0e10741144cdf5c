"""Eulerian coordinates: velocity plus measure-valued energy density.

The forward map builds the normalized Lagrangian state from the
generalized inverse of x -> mu((-inf, x)) + x, so atoms of the energy
measure open flat segments of the characteristic.  The backward map
pushes the cumulative energy forward through y, collapsing cell runs
with near-zero y-slope into point atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lagrangian import Grid, LagrangianState
from .flow import SolverConfig, sbar_t
from .lagrangian import HyperelasticCoeffs, _frozen_array

__all__ = [
    "Atom",
    "EnergyMeasure",
    "EulerianPair",
    "PairReport",
    "to_lagrangian",
    "to_eulerian",
    "t_t",
    "energy",
    "check_pair",
    "resample_pair",
]


@dataclass(frozen=True)
class Atom:
    """Point mass of the energy measure."""

    x: float
    mass: float

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError("atom mass must be positive")


@dataclass(frozen=True, eq=False)
class EnergyMeasure:
    """Absolutely continuous density samples plus a finite atom list."""

    density: np.ndarray
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "density", _frozen_array(self.density))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        locs = [a.x for a in self.atoms]
        if len(set(locs)) != len(locs):
            raise ValueError("atom locations must be distinct")

    @property
    def atom_mass(self) -> float:
        return float(sum(a.mass for a in self.atoms))


@dataclass(frozen=True, eq=False)
class EulerianPair:
    """Velocity samples and energy measure on a strictly increasing x-grid."""

    x: np.ndarray
    u: np.ndarray
    mu: EnergyMeasure

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen_array(self.x))
        object.__setattr__(self, "u", _frozen_array(self.u, self.x.size))
        if self.mu.density.size != self.x.size:
            raise ValueError("density and x-grid sizes differ")
        if self.x.size < 2 or float(np.min(np.diff(self.x))) <= 0.0:
            raise ValueError("x-grid must be strictly increasing with >= 2 nodes")

    @classmethod
    def zero(cls, x) -> "EulerianPair":
        x = np.asarray(x, dtype=float)
        z = np.zeros_like(x)
        return cls(x, z, EnergyMeasure(z))


def energy(p: EulerianPair) -> float:
    """Total mass of the energy measure."""
    return float(np.trapezoid(p.mu.density, p.x)) + p.mu.atom_mass


@dataclass(frozen=True)
class PairReport:
    passed: bool
    tol: float
    min_density: float
    max_consistency_residual: float
    failures: tuple[str, ...]


def check_pair(p: EulerianPair, tol: float | None = None) -> PairReport:
    """Validate positivity and mu_ac = u^2 + u_x^2 at cell resolution."""
    h = float(np.max(np.diff(p.x)))
    if tol is None:
        umax = float(np.max(np.abs(p.u)), )
        tol = 10.0 * h * (1.0 + umax) ** 2
    du = np.diff(p.u) / np.diff(p.x)
    ucell = 0.5 * (p.u[:-1] + p.u[1:])
    dcell = 0.5 * (p.mu.density[:-1] + p.mu.density[1:])
    res = float(np.max(np.abs(dcell - ucell * ucell - du * du)))
    min_d = float(np.min(p.mu.density))
    failures = []
    if min_d < -tol:
        failures.append("density negative beyond tolerance")
    if res > tol:
        failures.append("density inconsistent with u^2 + u_x^2")
    return PairReport(not failures, float(tol), min_d, res, tuple(failures))


# ----------------------------------------------------------------------
# Forward map: Eulerian pair -> normalized Lagrangian state
# ----------------------------------------------------------------------


def _cumulative_knots(p: EulerianPair):
    """Knots (gx, gv) of the graph of G(x) = mu((-inf, x)) + x.

    Atom jumps contribute vertical segments encoded as duplicated gx
    values, so interpolating gx against gv inverts G with flat pieces of
    width equal to each atom mass.
    """
    x = p.x
    dens = p.mu.density
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x))))
    atoms = sorted(p.mu.atoms, key=lambda a: a.x)
    for a in atoms:
        if not (x[0] < a.x < x[-1]):
            raise ValueError(f"atom at {a.x} outside the open x-window")
    # walk nodes and atoms in order
    gx: list[float] = []
    gv: list[float] = []
    carried = 0.0
    ai = 0
    for k in range(x.size):
        while ai < len(atoms) and atoms[ai].x <= x[k]:
            a = atoms[ai]
            base = float(np.interp(a.x, x, cum)) + carried + a.x
            gx.extend([a.x, a.x])
            gv.extend([base, base + a.mass])
            carried += a.mass
            ai += 1
        gx.append(float(x[k]))
        gv.append(float(cum[k]) + carried + float(x[k]))
    gxa, gva = np.asarray(gx), np.asarray(gv)
    # drop zero-width duplicates (an atom sitting exactly on a node)
    keep = np.concatenate(([True], np.diff(gva) > 0.0))
    return gxa[keep], gva[keep]


def to_lagrangian(
    p: EulerianPair, n: int | None = None, grid: Grid | None = None
) -> LagrangianState:
    """Map a pair onto the normalized section y + hcum = id (map L).

    y(xi) is the generalized inverse of mu((-inf, y)) + y; each atom
    produces a flat y-segment whose xi-length equals the atom mass, and
    hcum(xi_max) returns the total energy exactly.
    """
    gx, gv = _cumulative_knots(p)
    if grid is None:
        n = int(n) if n is not None else p.x.size
        grid = Grid(float(gv[0]), float(gv[-1]), n)
    nodes = grid.nodes
    y = np.interp(nodes, gv, gx)
    # identity-plus-offset extension outside the graph of G
    left = nodes < gv[0]
    if np.any(left):
        y = np.where(left, gx[0] + (nodes - gv[0]), y)
    right = nodes > gv[-1]
    if np.any(right):
        y = np.where(right, gx[-1] + (nodes - gv[-1]), y)
    u = np.interp(y, p.x, p.u)
    return LagrangianState(grid, y - nodes, u, nodes - y)


# ----------------------------------------------------------------------
# Backward map: normalized Lagrangian state -> Eulerian pair
# ----------------------------------------------------------------------


def _f0_defect(X: LagrangianState) -> float:
    return float(np.max(np.abs(X.y + X.hcum - X.grid.nodes)))


def to_eulerian(
    X: LagrangianState,
    f0_tol: float | None = None,
    slope_threshold: float | None = None,
) -> EulerianPair:
    """Push the state back to Eulerian coordinates (map M).

    Runs of cells with y-slope below sqrt(h) are classified as singular
    and each becomes one atom placed at the mean particle position (mass
    resolved to the run boundary, i.e. to O(h)); the absolutely
    continuous density is hcum_xi / y_xi on the surviving image nodes,
    normalized so that the total mass equals the Lagrangian energy
    budget exactly.
    """
    if f0_tol is None:
        f0_tol = 10.0 * X.grid.h
    defect = _f0_defect(X)
    if defect > f0_tol:
        raise ValueError(
            f"state is not on the normalized section: |y+hcum-id| = {defect:.3g}"
        )
    h = X.grid.h
    thr = float(slope_threshold) if slope_threshold is not None else np.sqrt(h)
    y, hc, u = X.y, X.hcum, X.u
    n = X.grid.n
    slopes = np.diff(y) / h
    singular = slopes < thr

    total = float(hc[-1] - hc[0])
    atoms: list[Atom] = []
    keep_x: list[float] = []
    keep_u: list[float] = []
    keep_d: list[float] = []
    ratio = np.diff(hc) / np.maximum(np.diff(y), 1e-300)

    def push_node(i):
        xval = float(y[i])
        if keep_x and xval <= keep_x[-1] + 1e-12 * (1.0 + abs(xval)):
            return
        adj = []
        if i > 0 and not singular[i - 1]:
            adj.append(ratio[i - 1])
        if i < n - 1 and not singular[i]:
            adj.append(ratio[i])
        keep_x.append(xval)
        keep_u.append(float(u[i]))
        keep_d.append(float(np.mean(adj)) if adj else 0.0)

    i = 0
    mass_floor = max(1e-14, 1e-12 * max(total, 1.0))
    while i < n - 1:
        if not singular[i]:
            push_node(i)
            push_node(i + 1)
            i += 1
            continue
        j = i
        while j < n - 1 and singular[j]:
            j += 1
        mass = float(hc[j] - hc[i])
        if mass > mass_floor:
            loc = float(np.mean(y[i : j + 1]))
            atoms.append(Atom(loc, mass))
        i = j
    if len(keep_x) < 2:
        # fully singular state: represent on the two window endpoints
        keep_x = [float(y[0]) - h, float(y[-1]) + h]
        keep_u = [float(u[0]), float(u[-1])]
        keep_d = [0.0, 0.0]

    xs = np.asarray(keep_x)
    us = np.asarray(keep_u)
    ds = np.maximum(np.asarray(keep_d), 0.0)
    target_ac = total - sum(a.mass for a in atoms)
    cur = float(np.trapezoid(ds, xs))
    if cur > 0.0 and target_ac > 0.0:
        ds = ds * (target_ac / cur)
    elif target_ac <= mass_floor:
        ds = np.zeros_like(ds)
    return EulerianPair(xs, us, EnergyMeasure(ds, tuple(atoms)))


def t_t(
    p: EulerianPair,
    cfg: SolverConfig,
    n: int | None = None,
    coeffs: HyperelasticCoeffs | None = None,
) -> EulerianPair:
    """Eulerian solution semigroup: M after Sbar_t after L."""
    X = to_lagrangian(p, n=n)
    return to_eulerian(sbar_t(X, cfg, coeffs=coeffs))


def resample_pair(p: EulerianPair, x) -> EulerianPair:
    """Resample onto a new grid (diagnostic use; mass is re-interpolated)."""
    x = np.asarray(x, dtype=float)
    u = np.interp(x, p.x, p.u, left=p.u[0], right=p.u[-1])
    d = np.interp(x, p.x, p.mu.density, left=0.0, right=0.0)
    atoms = tuple(a for a in p.mu.atoms if x[0] <= a.x <= x[-1])
    return EulerianPair(x, u, EnergyMeasure(d, atoms))
