"""Deterministic random instances for validation suites and tests."""

from __future__ import annotations

import numpy as np

from .coords import Atom, EnergyMeasure, EulerianPair, to_lagrangian
from .flow import Relabeling, kappa_of, relabel
from .lagrangian import Grid, LagrangianState

__all__ = [
    "random_velocity",
    "random_pair",
    "random_f0_state",
    "random_relabeling",
]


def random_velocity(x: np.ndarray, rng: np.random.Generator, n_bumps: int = 3,
                    amplitude: float = 0.6):
    """Sum of Gaussian bumps with analytic derivative, supported well inside."""
    span = x[-1] - x[0]
    u = np.zeros_like(x)
    ux = np.zeros_like(x)
    for _ in range(n_bumps):
        a = rng.uniform(-amplitude, amplitude)
        c = rng.uniform(x[0] + 0.3 * span, x[-1] - 0.3 * span)
        w = rng.uniform(0.06 * span, 0.12 * span)
        e = np.exp(-0.5 * ((x - c) / w) ** 2)
        u += a * e
        ux += -a * (x - c) / (w * w) * e
    return u, ux


def random_pair(
    x: np.ndarray,
    rng: np.random.Generator,
    n_bumps: int = 3,
    with_atoms: bool = False,
) -> EulerianPair:
    """Random admissible pair: density u^2 + u_x^2 plus optional atoms."""
    u, ux = random_velocity(x, rng, n_bumps=n_bumps)
    atoms = ()
    if with_atoms:
        span = x[-1] - x[0]
        k = int(rng.integers(1, 3))
        locs = np.sort(rng.uniform(x[0] + 0.25 * span, x[-1] - 0.25 * span, size=k))
        while np.any(np.diff(locs) < 0.05 * span):
            locs = np.sort(
                rng.uniform(x[0] + 0.25 * span, x[-1] - 0.25 * span, size=k)
            )
        atoms = tuple(Atom(float(l), float(rng.uniform(0.05, 0.3))) for l in locs)
    return EulerianPair(x, u, EnergyMeasure(u * u + ux * ux, atoms))


def random_f0_state(
    rng: np.random.Generator,
    n: int = 512,
    x_min: float = -15.0,
    x_max: float = 15.0,
    n_bumps: int = 3,
    with_atoms: bool = False,
    grid: Grid | None = None,
) -> LagrangianState:
    """Random state on the normalized section, built through the map L.

    Passing ``grid`` samples every draw on that common grid (it should
    cover [x_min, x_max + total energy] to retain the full energy budget).
    """
    x = np.linspace(x_min, x_max, n)
    pair = random_pair(x, rng, n_bumps=n_bumps, with_atoms=with_atoms)
    return to_lagrangian(pair, n=n, grid=grid)


def random_relabeling(
    grid: Grid, rng: np.random.Generator, kappa: float = 1.0
) -> Relabeling:
    """Random element with kappa_of at most the requested value.

    Built as the identity plus Gaussian bumps scaled to keep slopes and
    offsets inside the kappa box, decaying to zero near the window ends.
    """
    xs = grid.nodes
    span = grid.xi_max - grid.xi_min
    g = np.zeros_like(xs)
    gp = np.zeros_like(xs)
    for _ in range(3):
        a = rng.uniform(-1.0, 1.0)
        c = rng.uniform(grid.xi_min + 0.3 * span, grid.xi_max - 0.3 * span)
        w = rng.uniform(0.05 * span, 0.12 * span)
        e = np.exp(-0.5 * ((xs - c) / w) ** 2)
        g += a * e
        gp += -a * (xs - c) / (w * w) * e
    slope_cap = 0.9 * min(kappa / (1.0 + kappa), kappa)
    offset_cap = 0.9 * kappa
    scale = min(
        slope_cap / max(float(np.max(np.abs(gp))), 1e-12),
        offset_cap / max(float(np.max(np.abs(g))), 1e-12),
    )
    f = Relabeling(grid, xs + scale * g)
    assert kappa_of(f) <= kappa
    return f
