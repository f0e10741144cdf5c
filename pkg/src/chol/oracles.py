"""Reference initial data and residual checks used to validate the solver.

Multipeakon profiles are initial data only: they are evolved by the
Lagrangian solver and validated through symmetry, conservation, and the
weak-form residuals below; no peakon ODE system is integrated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coords import EnergyMeasure, EulerianPair, energy

__all__ = [
    "PeakonConfig",
    "CollisionSignature",
    "BumpTestFunction",
    "WeakResiduals",
    "multipeakon_velocity",
    "multipeakon_pair",
    "collision_scenario",
    "weak_residual",
    "eulerian_P",
]


@dataclass(frozen=True)
class PeakonConfig:
    """Amplitudes and strictly increasing positions of a peakon sum."""

    amplitudes: tuple[float, ...]
    positions: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "positions", tuple(float(q) for q in self.positions))
        if len(self.amplitudes) != len(self.positions):
            raise ValueError("amplitudes and positions must have equal length")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("positions must be strictly increasing")


def multipeakon_velocity(cfg: PeakonConfig, x: np.ndarray):
    """Velocity sum p_i e^{-|x - q_i|} and its classical derivative."""
    x = np.asarray(x, dtype=float)
    u = np.zeros_like(x)
    ux = np.zeros_like(x)
    for p, q in zip(cfg.amplitudes, cfg.positions):
        e = np.exp(-np.abs(x - q))
        # right-limit of the derivative at the crest keeps u_x^2 (hence the
        # energy density) continuous when a crest sits exactly on a node
        s = np.where(x == q, 1.0, np.sign(x - q))
        u += p * e
        ux += -p * s * e
    return u, ux


def multipeakon_pair(cfg: PeakonConfig, x) -> EulerianPair:
    """Sampled pair with density u^2 + u_x^2 (derivative taken analytically)."""
    x = np.asarray(x, dtype=float)
    u, ux = multipeakon_velocity(cfg, x)
    return EulerianPair(x, u, EnergyMeasure(u * u + ux * ux))


@dataclass(frozen=True)
class CollisionSignature:
    """Expected post-breaking checks for the antisymmetric pair."""

    initial_energy: float
    atom_location: float = 0.0
    # at the detected collision time the sup norm of u collapses ...
    u_sup_collapses: bool = True
    # ... and the solution re-emerges with odd symmetry: u(2t*-t, x) = -u(t, -x)
    odd_reemergence: bool = True


def collision_scenario(x, amplitude: float = 1.0, offset: float = 5.0):
    """Antisymmetric peakon pair on the grid x, plus its expected signature."""
    cfg = PeakonConfig((amplitude, -amplitude), (-offset, offset))
    pair = multipeakon_pair(cfg, x)
    return pair, CollisionSignature(initial_energy=energy(pair))


# ----------------------------------------------------------------------
# Weak-form residuals
# ----------------------------------------------------------------------


def _bump(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 / (si * si - 1.0))
    return out


def _bump_prime(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    d = si * si - 1.0
    out[inside] = np.exp(1.0 / d) * (-2.0 * si / (d * d))
    return out


@dataclass(frozen=True)
class BumpTestFunction:
    """Tensor product of compactly supported smooth bumps in t and x."""

    t_scale: float
    x_center: float
    x_halfwidth: float

    def phi(self, t, x):
        return _bump(np.asarray(t) / self.t_scale) * _bump(
            (np.asarray(x) - self.x_center) / self.x_halfwidth
        )

    def phi_t(self, t, x):
        return (
            _bump_prime(np.asarray(t) / self.t_scale)
            / self.t_scale
            * _bump((np.asarray(x) - self.x_center) / self.x_halfwidth)
        )

    def phi_x(self, t, x):
        return (
            _bump(np.asarray(t) / self.t_scale)
            * _bump_prime((np.asarray(x) - self.x_center) / self.x_halfwidth)
            / self.x_halfwidth
        )


def eulerian_P(x: np.ndarray, u: np.ndarray, ux: np.ndarray):
    """P and P_x from the explicit kernel formula on an x-grid.

    P(x) = 1/2 int e^{-|x-z|} (u^2 + u_x^2/2)(z) dz, evaluated by direct
    trapezoid quadrature in blocks (independent of the Lagrangian sweeps).
    """
    src = u * u + 0.5 * ux * ux
    w = np.empty_like(x)
    dx = np.diff(x)
    w[0] = dx[0] / 2.0
    w[-1] = dx[-1] / 2.0
    w[1:-1] = (dx[:-1] + dx[1:]) / 2.0
    sw = src * w
    P = np.empty_like(x)
    Px = np.empty_like(x)
    block = 512
    for j0 in range(0, x.size, block):
        xs = x[j0 : j0 + block, None]
        diff = xs - x[None, :]
        ker = np.exp(-np.abs(diff))
        P[j0 : j0 + block] = 0.5 * (ker @ sw)
        Px[j0 : j0 + block] = -0.5 * ((np.sign(diff) * ker) @ sw)
    return P, Px


@dataclass(frozen=True)
class WeakResiduals:
    r1: float
    r2: float


def weak_residual(times, x, u_snapshots, test_fn: BumpTestFunction) -> WeakResiduals:
    """Space-time quadrature of the two weak-form identities.

    ``u_snapshots`` has one row per time; both residuals are computed on
    the common grid with P taken from the explicit convolution formula.
    r1 tests the evolution equation against the test function, r2 the
    elliptic relation defining P.
    """
    times = np.asarray(times, dtype=float)
    x = np.asarray(x, dtype=float)
    U = np.asarray(u_snapshots, dtype=float)
    if U.shape != (times.size, x.size):
        raise ValueError("snapshot array must be (n_times, n_x)")
    lo = test_fn.x_center - test_fn.x_halfwidth
    hi = test_fn.x_center + test_fn.x_halfwidth
    if lo < x[0] or hi > x[-1]:
        raise ValueError("test function support exceeds the spatial window")
    if test_fn.t_scale > times[-1] + 1e-12:
        raise ValueError("test function support exceeds the time window")

    i1 = np.empty(times.size)
    i2 = np.empty(times.size)
    for k, t in enumerate(times):
        u = U[k]
        ux = np.gradient(u, x)
        P, Px = eulerian_P(x, u, ux)
        phi = test_fn.phi(t, x)
        integrand1 = -u * test_fn.phi_t(t, x) + (u * ux + Px) * phi
        integrand2 = (P - u * u - 0.5 * ux * ux) * phi + Px * test_fn.phi_x(t, x)
        i1[k] = np.trapezoid(integrand1, x)
        i2[k] = np.trapezoid(integrand2, x)
    r1 = float(np.trapezoid(i1, times) - np.trapezoid(U[0] * test_fn.phi(0.0, x), x))
    r2 = float(np.trapezoid(i2, times))
    return WeakResiduals(r1, r2)
