"""Acceptance criteria as runnable checks, grouped into named suites.

Each criterion pins its own grid sizes, steps, and tolerances; the pass
conditions are evaluated here so the CLI, the service, and the test
suite all drive the same code.  The direct O(N^2) quadrature below is
the independent reference for the linear-time kernel sweeps and must
stay free of the sweep implementation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .coords import energy, resample_pair, to_eulerian, to_lagrangian
from .flow import SolverConfig, evolve, project_Pi, relabel
from .lagrangian import (
    Grid,
    LagrangianState,
    ch_coefficients,
    e_norm,
    e_norm_diff,
    eval_pq,
    rhs,
    rhs_hyperelastic,
)
from .metric import classical_norms, d_bracket, linf_dist
from .oracles import BumpTestFunction, PeakonConfig, collision_scenario, \
    multipeakon_pair, weak_residual
from .sampling import random_f0_state, random_pair, random_relabeling

__all__ = ["CriterionResult", "SUITES", "run_criterion", "run_suite", "direct_pq"]


@dataclass(frozen=True)
class CriterionResult:
    cid: int
    name: str
    passed: bool
    details: str
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.cid:2d} {self.name}: {self.details}"


def direct_pq(X: LagrangianState):
    """Direct O(N^2) quadrature of the kernel sums (reference route)."""
    y, u, hc = X.y, X.u, X.hcum
    uc = 0.5 * (u[:-1] + u[1:])
    m = uc * uc * np.diff(y) + np.diff(hc)
    yc = 0.5 * (y[:-1] + y[1:])
    n = y.size
    K = np.exp(-np.abs(y[:, None] - yc[None, :]))
    left = np.arange(n - 1)[None, :] < np.arange(n)[:, None]
    P = 0.25 * (K @ m)
    Q = 0.25 * ((np.where(~left, K, 0.0) @ m) - (np.where(left, K, 0.0) @ m))
    return P, Q


def _peakon_state(n, window=25.0, c=1.0, q=0.0):
    x = np.linspace(-window, window, n)
    pair = multipeakon_pair(PeakonConfig((c,), (q,)), x)
    return pair, to_lagrangian(pair, n=n)


# ----------------------------------------------------------------------
# Shared collision run (criteria 5 and 10)
# ----------------------------------------------------------------------

_memo: dict = {}


def _collision_run(n=4096, dt=1e-3, window=25.0):
    """Locate the collision time of the antisymmetric pair; memoized."""
    key = ("collision", n, dt, window)
    if key in _memo:
        return _memo[key]
    x = np.linspace(-window, window, n)
    pair0, _ = collision_scenario(x)
    X0 = to_lagrangian(pair0, n=n)
    coarse = evolve(
        X0,
        SolverConfig(dt=dt, t_end=6.5, monitor_every=20, project_threshold=0.1),
        keep_states=False,
    )
    usup = np.asarray(coarse.u_sup)
    k = int(np.argmin(usup))
    t_lo = max(coarse.monitor_times[k] - 0.05, 0.0)
    lead = evolve(
        X0,
        SolverConfig(dt=dt, t_end=t_lo, monitor_every=10**9, project_threshold=0.1),
        keep_states=False,
    )
    fine = evolve(
        lead.final,
        SolverConfig(dt=dt, t_end=0.1, monitor_every=1, project_threshold=0.1),
        keep_states=True,
    )
    uf = np.asarray([np.max(np.abs(s.u)) for s in fine.states])
    kf = int(np.argmin(uf))
    out = {
        "pair0": pair0,
        "X0": X0,
        "E0": energy(pair0),
        "tstar": t_lo + fine.times[kf],
        "Xstar_raw": fine.states[kf],
        "u_inf_star": float(uf[kf]),
        "drift": max(coarse.energy_drift, fine.energy_drift),
    }
    _memo[key] = out
    return out


# ----------------------------------------------------------------------
# Criteria
# ----------------------------------------------------------------------


def criterion_1_convolution(seed: int = 0) -> CriterionResult:
    """Sweep P, Q equal direct quadrature within 1e-12 on 50 states, < 5 s."""
    rng = np.random.default_rng(1000 + seed)
    t0 = time.time()
    worst = 0.0
    for k in range(50):
        X = random_f0_state(rng, n=1000, with_atoms=(k % 4 == 0))
        if k % 5 == 0:
            X = relabel(X, random_relabeling(X.grid, rng, kappa=1.0))
        Ps, Qs = eval_pq(X)
        Pd, Qd = direct_pq(X)
        worst = max(
            worst,
            float(np.max(np.abs(Ps - Pd))),
            float(np.max(np.abs(Qs - Qd))),
        )
    elapsed = time.time() - t0
    passed = worst <= 1e-12 and elapsed < 5.0
    return CriterionResult(
        1, "convolution sweeps vs direct quadrature", passed,
        f"max |sweep - direct| = {worst:.3e} (tol 1e-12), {elapsed:.2f}s (budget 5s)",
        {"worst": worst, "seconds": elapsed},
    )


def _peakon_error(n, dt, T=1.0):
    _, X = _peakon_state(n)
    traj = evolve(X, SolverConfig(dt=dt, t_end=T, monitor_every=10**9),
                  keep_states=False)
    pf = to_eulerian(project_Pi(traj.final))
    probe = np.linspace(-8.0, 10.0, 30001)
    ui = np.interp(probe, pf.x, pf.u)
    return float(np.max(np.abs(ui - np.exp(-np.abs(probe - T)))))


def criterion_2_traveling_peakon(seed: int = 0) -> CriterionResult:
    """|u_num(1) - exact| <= 0.02 at N=4096, halving (+-20%) under refinement."""
    t0 = time.time()
    e1 = _peakon_error(4096, 1e-3)
    e2 = _peakon_error(8192, 5e-4)
    elapsed = time.time() - t0
    ratio = e1 / e2
    passed = e1 <= 0.02 and 1.6 <= ratio <= 2.4 and elapsed < 60.0
    return CriterionResult(
        2, "traveling peakon accuracy and order", passed,
        f"err(4096)={e1:.5f} (tol 0.02), err(8192)={e2:.5f}, "
        f"ratio={ratio:.2f} (window [1.6, 2.4]), {elapsed:.1f}s (budget 60s)",
        {"err_4096": e1, "err_8192": e2, "ratio": ratio, "seconds": elapsed},
    )


def criterion_3_energy_conservation(seed: int = 0) -> CriterionResult:
    """Relative drift of the total energy <= 1e-6 over [0, 2]."""
    _, Xp = _peakon_state(4096)
    dp = evolve(Xp, SolverConfig(dt=1e-3, t_end=2.0, monitor_every=100),
                keep_states=False).energy_drift
    x = np.linspace(-25, 25, 4096)
    pair, _ = collision_scenario(x)
    Xa = to_lagrangian(pair, n=4096)
    da = evolve(Xa, SolverConfig(dt=1e-3, t_end=2.0, monitor_every=100),
                keep_states=False).energy_drift
    passed = dp <= 1e-6 and da <= 1e-6
    return CriterionResult(
        3, "energy conservation", passed,
        f"peakon drift={dp:.2e}, antisymmetric-pair drift={da:.2e} (tol 1e-6)",
        {"drift_peakon": dp, "drift_pair": da},
    )


def criterion_4_constraint_transport(seed: int = 0) -> CriterionResult:
    """Compatibility residual bounded at T=2 and vanishing under refinement.

    For the kinked peakon the max-cell residual is dominated by the crest
    cell, which probes the derivative jump itself and does not shrink
    with h, so the refinement clause is checked on the residual growth
    for the peakon and on the max-cell residual for a smooth state.
    """
    runs = {}
    for n, dt in ((2048, 2e-3), (4096, 1e-3)):
        _, X = _peakon_state(n)
        tr = evolve(X, SolverConfig(dt=dt, t_end=2.0, monitor_every=10**9),
                    keep_states=False)
        runs[n] = (tr.residual[0], tr.residual[-1])
    r0, rT = runs[4096]
    budget_ok = rT <= 10.0 * r0 + 1e-4
    growth_ok = (runs[4096][1] - runs[4096][0]) < (runs[2048][1] - runs[2048][0])

    smooth = {}
    for n, dt in ((1024, 2e-3), (2048, 1e-3)):
        rng = np.random.default_rng(4000 + seed)
        X = random_f0_state(rng, n=n)
        tr = evolve(X, SolverConfig(dt=dt, t_end=2.0, monitor_every=10**9),
                    keep_states=False)
        smooth[n] = tr.residual[-1]
    smooth_ok = smooth[2048] < smooth[1024]
    passed = budget_ok and growth_ok and smooth_ok
    return CriterionResult(
        4, "constraint transport", passed,
        f"peakon r(2)={rT:.4f} vs 10*r(0)+1e-4={10*r0+1e-4:.4f}; "
        f"growth {runs[2048][1]-runs[2048][0]:.2e} -> {runs[4096][1]-runs[4096][0]:.2e}; "
        f"smooth max-residual {smooth[1024]:.2e} -> {smooth[2048]:.2e}",
        {"r0": r0, "rT": rT},
    )


def criterion_5_collision(seed: int = 0) -> CriterionResult:
    """Antisymmetric collision: u collapses, one atom carries the energy.

    The re-emergence check uses the reversal identity u(2t*, x) = u(0, -x)
    (the system is invariant under t -> -t, U -> -U, and U vanishes at the
    collision, so the peakons pass through each other).  The opposite-sign
    combination is identically 2*sup|u0| for odd data and is reported in
    the details for reference.
    """
    run = _collision_run()
    E0, tstar = run["E0"], run["tstar"]
    ps = to_eulerian(project_Pi(run["Xstar_raw"]))
    atoms = ps.mu.atoms
    atom_ok = (
        len(atoms) == 1
        and abs(atoms[0].x) <= 0.05
        and abs(atoms[0].mass - E0) / E0 <= 0.02
    )
    cont = evolve(
        run["Xstar_raw"],
        SolverConfig(dt=1e-3, t_end=tstar, monitor_every=10**9, project_threshold=0.1),
        keep_states=False,
    )
    p2 = to_eulerian(project_Pi(cont.final))
    probe = np.linspace(-20.0, 20.0, 20001)
    u2 = np.interp(probe, p2.x, p2.u)
    u0m = np.interp(-probe, run["pair0"].x, run["pair0"].u)
    reem = float(np.max(np.abs(u2 - u0m)))
    opposite = float(np.max(np.abs(u2 + u0m)))
    passed = run["u_inf_star"] <= 0.05 and atom_ok and reem <= 0.05
    atom_txt = (
        f"atom x={atoms[0].x:+.4f} mass={atoms[0].mass:.4f}"
        if len(atoms) == 1 else f"{len(atoms)} atoms"
    )
    return CriterionResult(
        5, "conservative collision", passed,
        f"t*={tstar:.3f}, |u(t*)|={run['u_inf_star']:.4f} (tol 0.05); {atom_txt} "
        f"(E0={E0:.4f}, tol 2%); re-emergence err={reem:.4f} (tol 0.05, "
        f"opposite-sign form evaluates to {opposite:.3f})",
        {"tstar": tstar, "u_inf": run["u_inf_star"], "reemergence": reem},
    )


def criterion_6_equivariance(seed: int = 0) -> CriterionResult:
    """Evolution commutes with relabeling within 5*(h + dt^4)*e^T."""
    rng = np.random.default_rng(6000 + seed)
    X = random_f0_state(rng, n=1024)
    dt, T = 1e-3, 1.0
    cfg = SolverConfig(dt=dt, t_end=T, monitor_every=10**9)
    base = evolve(X, cfg, keep_states=False).final
    bound = 5.0 * (X.grid.h + dt**4) * np.exp(T)
    worst = 0.0
    for _ in range(10):
        f = random_relabeling(X.grid, rng, kappa=float(rng.uniform(0.5, 2.0)))
        left = evolve(relabel(X, f), cfg, keep_states=False).final
        right = relabel(base, f)
        worst = max(worst, linf_dist(left, right))
    passed = worst <= bound
    return CriterionResult(
        6, "equivariance", passed,
        f"worst |evolve(Xof) - evolve(X)of| = {worst:.2e} (bound {bound:.3f})",
        {"worst": worst, "bound": bound},
    )


def criterion_7_roundtrips(seed: int = 0) -> CriterionResult:
    """M o L and L o M identities at grid resolution."""
    rng = np.random.default_rng(7000 + seed)
    x = np.linspace(-15.0, 15.0, 1200)
    worst_u = worst_m = worst_e = 0.0
    h = None
    for k in range(20):
        p = random_pair(x, rng, with_atoms=(k % 3 == 0))
        X = to_lagrangian(p, n=1600)
        h = X.grid.h
        q = to_eulerian(X)
        worst_u = max(worst_u, float(np.max(np.abs(np.interp(x, q.x, q.u) - p.u))))
        worst_m = max(worst_m, abs(energy(q) - energy(p)))
    for _ in range(20):
        X = random_f0_state(rng, n=1600)
        X2 = to_lagrangian(to_eulerian(X), grid=X.grid)
        worst_e = max(worst_e, e_norm_diff(X, X2))
    passed = worst_u <= h and worst_m <= 1e-10 and worst_e <= h
    return CriterionResult(
        7, "coordinate roundtrips", passed,
        f"MoL: u err={worst_u:.2e}, mass err={worst_m:.2e} (tol 1e-10); "
        f"LoM: e-norm err={worst_e:.2e} (tol h={h:.4f})",
        {"u_err": worst_u, "mass_err": worst_m, "enorm_err": worst_e, "h": h},
    )


def criterion_8_sandwich(seed: int = 0) -> CriterionResult:
    """Bracket inequalities on 50 random normalized pairs, all exact."""
    rng = np.random.default_rng(8000 + seed)
    grid = Grid(-15.0, 21.0, 512)
    violations = 0
    for _ in range(50):
        Xa = random_f0_state(rng, grid=grid)
        Xb = random_f0_state(rng, grid=grid)
        br = d_bracket(Xa, Xb)
        li = linf_dist(Xa, Xb)
        en = e_norm_diff(Xa, Xb)
        if not (0.5 * li <= br.upper and br.upper <= 2.0 * en
                and br.lower <= br.upper):
            violations += 1
    return CriterionResult(
        8, "metric sandwich", violations == 0,
        f"{violations} violations on 50 pairs of "
        "0.5*linf <= upper <= 2*e-norm and lower <= upper",
        {"violations": violations},
    )


def criterion_9_equivalence(seed: int = 0) -> CriterionResult:
    """Brackets collapse on constructed equivalent pairs."""
    rng = np.random.default_rng(9000 + seed)
    worst = 0.0
    for _ in range(10):
        X = random_f0_state(rng, n=1024)
        f = random_relabeling(X.grid, rng, kappa=float(rng.uniform(0.5, 2.0)))
        Xb = project_Pi(relabel(X, f))
        br = d_bracket(X, Xb)
        worst = max(worst, br.upper / e_norm(X))
    passed = worst <= 0.05
    return CriterionResult(
        9, "metric sees equivalence classes", passed,
        f"worst upper/e_norm = {worst:.4f} (tol 0.05)",
        {"worst_ratio": worst},
    )


def criterion_10_stability_vs_h1(seed: int = 0) -> CriterionResult:
    """H1 distance blows up at the collision while the bracket stays bounded."""
    run = _collision_run()
    tstar, E0 = run["tstar"], run["E0"]
    eps = 0.1 * tstar
    dt = 1e-3
    X0 = run["X0"]
    raw_eps = evolve(
        X0, SolverConfig(dt=dt, t_end=eps, monitor_every=10**9, project_threshold=0.1),
        keep_states=False,
    ).final
    Xeps = project_Pi(raw_eps)
    Xstar = project_Pi(run["Xstar_raw"])
    Xstar_eps = project_Pi(
        evolve(
            run["Xstar_raw"],
            SolverConfig(dt=dt, t_end=eps, monitor_every=10**9, project_threshold=0.1),
            keep_states=False,
        ).final
    )
    br0 = d_bracket(to_lagrangian(run["pair0"], grid=X0.grid), Xeps)
    brT = d_bracket(Xstar, Xstar_eps)
    xs = np.linspace(-24.0, 24.0, 4096)
    cn = classical_norms(
        resample_pair(to_eulerian(Xstar), xs),
        resample_pair(to_eulerian(Xstar_eps), xs),
    )
    u0_h1 = float(np.sqrt(E0))
    ratio = brT.upper / br0.upper
    passed = cn["h1"] >= 0.8 * u0_h1 and ratio <= 20.0
    return CriterionResult(
        10, "H1 discontinuity vs metric stability", passed,
        f"H1 dist at t* = {cn['h1']:.3f} (>= {0.8*u0_h1:.3f}); bracket "
        f"[{br0.upper:.3f} -> {brT.upper:.3f}], ratio {ratio:.2f} (budget 20)",
        {"h1": cn["h1"], "ratio": ratio,
         "upper0": br0.upper, "upperT": brT.upper},
    )


def _weak_residual_level(n, dt, monitor_every):
    _, X = _peakon_state(n)
    tr = evolve(X, SolverConfig(dt=dt, t_end=1.0, monitor_every=monitor_every),
                keep_states=True)
    xs = np.linspace(-20.0, 20.0, n)
    U = np.empty((len(tr.states), xs.size))
    for i, s in enumerate(tr.states):
        ps = to_eulerian(project_Pi(s))
        U[i] = np.interp(xs, ps.x, ps.u)
    tf = BumpTestFunction(t_scale=1.0, x_center=1.0, x_halfwidth=6.0)
    return weak_residual(np.asarray(tr.times), xs, U, tf)


def criterion_11_weak_residuals(seed: int = 0) -> CriterionResult:
    """Both weak-form residuals shrink by >= 1.6x per refinement level."""
    levels = [(1024, 4e-3, 5), (2048, 2e-3, 10), (4096, 1e-3, 20)]
    res = [_weak_residual_level(*lvl) for lvl in levels]
    ratios = [
        (abs(a.r1) / abs(b.r1), abs(a.r2) / abs(b.r2))
        for a, b in zip(res, res[1:])
    ]
    passed = all(r1 >= 1.6 and r2 >= 1.6 for r1, r2 in ratios)
    txt = "; ".join(
        f"N={lvl[0]}: r1={r.r1:+.2e} r2={r.r2:+.2e}" for lvl, r in zip(levels, res)
    )
    return CriterionResult(
        11, "weak-form residual decay", passed,
        txt + "; ratios " + ", ".join(f"({a:.2f},{b:.2f})" for a, b in ratios)
        + " (>= 1.6)",
        {"ratios": ratios},
    )


def criterion_12_hyperelastic_reduction(seed: int = 0) -> CriterionResult:
    """Rod right-hand side with CH coefficients matches rhs to 1e-12."""
    rng = np.random.default_rng(12000 + seed)
    ch = ch_coefficients()
    worst = 0.0
    for k in range(20):
        X = random_f0_state(rng, n=500, with_atoms=(k % 3 == 0))
        if k % 2 == 0:
            X = relabel(X, random_relabeling(X.grid, rng, kappa=1.5))
        ta = rhs(X)
        tb = rhs_hyperelastic(X, ch)
        worst = max(
            worst,
            float(np.max(np.abs(ta.d_zeta - tb.d_zeta))),
            float(np.max(np.abs(ta.d_u - tb.d_u))),
            float(np.max(np.abs(ta.d_hcum - tb.d_hcum))),
        )
    passed = worst <= 1e-12
    return CriterionResult(
        12, "hyperelastic reduction", passed,
        f"max pointwise difference = {worst:.2e} (tol 1e-12)",
        {"worst": worst},
    )


_CRITERIA = {
    1: criterion_1_convolution,
    2: criterion_2_traveling_peakon,
    3: criterion_3_energy_conservation,
    4: criterion_4_constraint_transport,
    5: criterion_5_collision,
    6: criterion_6_equivariance,
    7: criterion_7_roundtrips,
    8: criterion_8_sandwich,
    9: criterion_9_equivalence,
    10: criterion_10_stability_vs_h1,
    11: criterion_11_weak_residuals,
    12: criterion_12_hyperelastic_reduction,
}

SUITES: dict[str, tuple[int, ...]] = {
    "convolution": (1,),
    "peakon": (2,),
    "conservation": (3,),
    "constraint": (4,),
    "collision": (5,),
    "equivariance": (6,),
    "roundtrip": (7,),
    "sandwich": (8,),
    "equivalence": (9,),
    "stability": (10,),
    "weak": (11,),
    "hyperelastic": (12,),
    "all": tuple(range(1, 13)),
}


def run_criterion(cid: int, seed: int = 0) -> CriterionResult:
    return _CRITERIA[cid](seed=seed)


def run_suite(name: str, seed: int = 0) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    return [run_criterion(cid, seed=seed) for cid in SUITES[name]]
