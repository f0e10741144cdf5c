import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chol import (
    Grid,
    LagrangianState,
    PeakonConfig,
    ch_coefficients,
    check_membership,
    e_norm,
    eval_P,
    eval_Q,
    eval_pq,
    multipeakon_pair,
    relabel,
    rhs,
    rhs_hyperelastic,
    rod_coefficients,
    to_lagrangian,
)
from chol.lagrangian import HyperelasticCoeffs, MonotonicityError, e_norm_diff
from chol.sampling import random_f0_state, random_relabeling


def peakon_state(n=4096, c=1.0, window=25.0):
    x = np.linspace(-window, window, n)
    return to_lagrangian(multipeakon_pair(PeakonConfig((c,), (0.0,)), x), n=n)


def pure_python_direct_pq(X):
    """Loop-level reference, independent of any numpy kernel code."""
    y = X.y.tolist()
    u = X.u.tolist()
    hc = X.hcum.tolist()
    n = len(y)
    m = [
        (0.5 * (u[i] + u[i + 1])) ** 2 * (y[i + 1] - y[i]) + hc[i + 1] - hc[i]
        for i in range(n - 1)
    ]
    yc = [0.5 * (y[i] + y[i + 1]) for i in range(n - 1)]
    P, Q = [], []
    from math import exp

    for j in range(n):
        left = sum(exp(-(y[j] - yc[i])) * m[i] for i in range(j))
        right = sum(exp(-(yc[i] - y[j])) * m[i] for i in range(j, n - 1))
        P.append(0.25 * (left + right))
        Q.append(0.25 * (right - left))
    return np.asarray(P), np.asarray(Q)


class TestGridAndState:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            Grid(0.0, 1.0, 2)
        with pytest.raises(ValueError):
            Grid(1.0, 0.0, 10)
        g = Grid(-1.0, 1.0, 11)
        assert g.h == pytest.approx(0.2)
        assert g.nodes[0] == -1.0 and g.nodes[-1] == 1.0

    def test_state_arrays_frozen_and_validated(self):
        g = Grid(0.0, 1.0, 5)
        X = LagrangianState.zero(g)
        with pytest.raises(ValueError):
            X.zeta[0] = 1.0
        with pytest.raises(ValueError):
            LagrangianState(g, np.zeros(4), np.zeros(5), np.zeros(5))
        with pytest.raises(ValueError):
            LagrangianState(g, [np.nan] * 5, np.zeros(5), np.zeros(5))


class TestENorm:
    def test_zero_state(self):
        assert e_norm(LagrangianState.zero(Grid(-5, 5, 64))) == 0.0

    def test_constant_h_only_sup_contributes(self):
        g = Grid(-5, 5, 64)
        c = 1.7
        X = LagrangianState(g, np.zeros(64), np.zeros(64), np.full(64, c))
        assert e_norm(X) == pytest.approx(c, abs=0.0)

    def test_peakon_matches_independent_quadrature(self):
        X = peakon_state()
        h = X.grid.h

        def v_norm(f):
            return max(abs(v) for v in f) + np.sqrt(
                sum((f[i + 1] - f[i]) ** 2 for i in range(len(f) - 1)) / h
            )

        u = X.u
        l2sq = h * (np.sum(u * u) - 0.5 * u[0] ** 2 - 0.5 * u[-1] ** 2)
        h1 = np.sqrt(l2sq + sum((u[i + 1] - u[i]) ** 2 for i in range(len(u) - 1)) / h)
        oracle = v_norm(X.zeta) + h1 + v_norm(X.hcum)
        assert e_norm(X) == pytest.approx(oracle, abs=1e-10)


class TestMembership:
    def test_zero_state_passes_with_zero_residual(self):
        rep = check_membership(LagrangianState.zero(Grid(-5, 5, 128)))
        assert rep.passed and rep.max_compat_residual == 0.0

    def test_negative_h_slope_flagged(self):
        g = Grid(-5, 5, 128)
        hc = np.linspace(0, 1, 128)
        hc[60] = hc[62]  # force a decreasing cell
        rep = check_membership(
            LagrangianState(g, np.zeros(128), np.zeros(128), hc), tol=1e-3
        )
        assert not rep.passed
        assert any("hcum" in f for f in rep.failures)
        assert rep.min_h_slope < 0.0

    def test_peakon_passes(self):
        rep = check_membership(peakon_state())
        assert rep.passed

    def test_peakon_mean_residual_first_order(self):
        # the max-cell residual sits on the crest kink and plateaus, but the
        # cell-mean residual drops linearly with h
        means = []
        for n in (1024, 2048, 4096):
            X = peakon_state(n=n)
            h = X.grid.h
            dy = np.diff(X.y) / h
            dh = np.diff(X.hcum) / h
            du = np.diff(X.u) / h
            uc = 0.5 * (X.u[:-1] + X.u[1:])
            means.append(np.mean(np.abs(dy * dh - dy**2 * uc**2 - du**2)))
        assert means[0] / means[1] == pytest.approx(2.0, rel=0.2)
        assert means[1] / means[2] == pytest.approx(2.0, rel=0.2)

    def test_smooth_state_max_residual_refines(self):
        rng = np.random.default_rng(5)
        r = []
        for n in (1024, 2048):
            X = random_f0_state(np.random.default_rng(5), n=n)
            rep = check_membership(X)
            r.append(rep.max_compat_residual)
        assert r[1] < r[0]


class TestPQ:
    def test_zero_state(self):
        X = LagrangianState.zero(Grid(-10, 10, 200))
        assert np.all(eval_P(X) == 0.0)
        assert np.all(eval_Q(X) == 0.0)

    def test_peakon_crest_values(self):
        X = peakon_state()
        P, Q = eval_pq(X)
        xi_star = np.interp(0.0, X.y, X.grid.nodes)
        assert np.interp(xi_star, X.grid.nodes, P) == pytest.approx(0.5, abs=1e-3)
        assert abs(np.interp(xi_star, X.grid.nodes, Q)) <= 1e-3

    def test_sweep_matches_pure_python_loops(self):
        X = random_f0_state(np.random.default_rng(0), n=80)
        P, Q = eval_pq(X)
        Pd, Qd = pure_python_direct_pq(X)
        assert np.max(np.abs(P - Pd)) <= 1e-13
        assert np.max(np.abs(Q - Qd)) <= 1e-13

    def test_sweep_blocked_path_wide_window(self):
        # y spans ~1000, exercising the block-rescaled accumulation
        x = np.linspace(-500, 500, 900)
        u = 0.3 * np.exp(-0.5 * (x / 3.0) ** 2)
        ux = -x / 9.0 * u
        from chol.coords import EnergyMeasure, EulerianPair

        X = to_lagrangian(EulerianPair(x, u, EnergyMeasure(u * u + ux * ux)), n=900)
        P, Q = eval_pq(X)
        Pd, Qd = pure_python_direct_pq(X)
        assert np.max(np.abs(P - Pd)) <= 1e-12
        assert np.max(np.abs(Q - Qd)) <= 1e-12

    def test_block_carries_match_single_block(self, monkeypatch):
        # shrink the block span so a normal state crosses many block
        # boundaries, and compare against the one-block evaluation
        import chol.lagrangian as lag

        X = random_f0_state(np.random.default_rng(3), n=400, with_atoms=True)
        P1, Q1 = eval_pq(X)
        monkeypatch.setattr(lag, "_BLOCK_SPAN", 3.0)
        P2, Q2 = eval_pq(X)
        assert np.max(np.abs(P1 - P2)) <= 1e-13
        assert np.max(np.abs(Q1 - Q2)) <= 1e-13

    def test_rejects_decreasing_y(self):
        g = Grid(-5, 5, 64)
        zeta = np.zeros(64)
        zeta[30] = -2.0  # destroys monotonicity of y
        X = LagrangianState(g, zeta, np.zeros(64), np.linspace(0, 1, 64))
        with pytest.raises(MonotonicityError):
            eval_P(X)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000))
    def test_positivity_and_domination(self, seed):
        rng = np.random.default_rng(seed)
        X = random_f0_state(rng, n=200, with_atoms=bool(seed % 2))
        P, Q = eval_pq(X)
        assert np.all(P >= 0.0)
        assert np.all(np.abs(Q) <= P + 1e-15)

    def test_derivative_identity_refines(self):
        # forward difference of P approximates Q * y_xi at first order
        errs = []
        for n in (1024, 2048):
            X = peakon_state(n=n)
            P, Q = eval_pq(X)
            h = X.grid.h
            dP = np.diff(P) / h
            qc = 0.5 * (Q[:-1] + Q[1:])
            yx = np.diff(X.y) / h
            errs.append(np.max(np.abs(dP - qc * yx)))
        assert errs[1] <= 0.6 * errs[0]


class TestRhs:
    def test_zero_state(self):
        t = rhs(LagrangianState.zero(Grid(-5, 5, 64)))
        assert np.all(t.d_zeta == 0) and np.all(t.d_u == 0) and np.all(t.d_hcum == 0)

    def test_d_zeta_is_u_bitwise(self):
        X = peakon_state(n=512)
        assert np.array_equal(rhs(X).d_zeta, X.u)

    def test_peakon_crest_energy_flux_cancels(self):
        X = peakon_state(window=15.0)
        t = rhs(X)
        xi_star = np.interp(0.0, X.y, X.grid.nodes)
        assert abs(np.interp(xi_star, X.grid.nodes, t.d_hcum)) <= 1e-2


class TestHyperelastic:
    def test_ch_reduction_exact(self):
        rng = np.random.default_rng(1)
        X = random_f0_state(rng, n=500, with_atoms=True)
        a, b = rhs(X), rhs_hyperelastic(X, ch_coefficients())
        assert np.max(np.abs(a.d_u - b.d_u)) <= 1e-12
        assert np.max(np.abs(a.d_hcum - b.d_hcum)) <= 1e-12
        assert np.array_equal(a.d_zeta, b.d_zeta)

    def test_rod_gamma_one_equals_ch(self):
        X = random_f0_state(np.random.default_rng(2), n=400)
        a, b = rhs(X), rhs_hyperelastic(X, rod_coefficients(1.0))
        for u, v in ((a.d_zeta, b.d_zeta), (a.d_u, b.d_u), (a.d_hcum, b.d_hcum)):
            assert np.max(np.abs(u - v)) <= 1e-12

    def test_zero_state_zero_tangent(self):
        X = LagrangianState.zero(Grid(-5, 5, 64))
        for coeffs in (ch_coefficients(), rod_coefficients(2.0)):
            t = rhs_hyperelastic(X, coeffs)
            assert np.all(t.d_zeta == 0)
            assert np.all(t.d_u == 0)
            assert np.all(t.d_hcum == 0)

    def test_inflecting_f_rejected(self):
        x = np.linspace(-20, 20, 512)
        pair = multipeakon_pair(PeakonConfig((1.0, -1.0), (-5.0, 5.0)), x)
        X = to_lagrangian(pair, n=512)  # velocity range straddles zero
        bad = HyperelasticCoeffs(
            f=lambda u: u**3 / 6.0,
            df=lambda u: 0.5 * u * u,
            d2f=lambda u: u,  # changes sign over the velocity range
            g=lambda u: u * u,
        )
        with pytest.raises(ValueError, match="sign"):
            rhs_hyperelastic(X, bad)

    def test_closed_form_antiderivative_used(self):
        X = peakon_state(n=256)
        ch = ch_coefficients()
        closed = HyperelasticCoeffs(
            f=ch.f, df=ch.df, d2f=ch.d2f, g=ch.g, antideriv=lambda v: v**3
        )
        a = rhs_hyperelastic(X, ch)
        b = rhs_hyperelastic(X, closed)
        assert np.max(np.abs(a.d_hcum - b.d_hcum)) <= 1e-12


class TestRelabelNormBound:
    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10_000))
    def test_composition_contracts_with_kappa_constant(self, seed):
        rng = np.random.default_rng(seed)
        grid = Grid(-15.0, 20.0, 400)
        Xa = random_f0_state(rng, grid=grid)
        Xb = random_f0_state(rng, grid=grid)
        kappa = float(rng.uniform(0.2, 1.5))
        f = random_relabeling(grid, rng, kappa=kappa)
        lhs = e_norm_diff(relabel(Xa, f), relabel(Xb, f))
        maxd = max(
            np.max(np.abs(np.diff(Z.zeta))) + np.max(np.abs(np.diff(Z.u)))
            + np.max(np.abs(np.diff(Z.hcum)))
            for Z in (Xa, Xb)
        ) / grid.h
        C = (1.0 + kappa) + kappa * maxd
        assert lhs <= C * e_norm_diff(Xa, Xb) + 1e-9
