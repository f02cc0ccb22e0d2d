import math

import numpy as np
import pytest

from cavsqueeze import analytic, moments, oat_exact, optimizer
from cavsqueeze.errors import ContrastCollapseError
from cavsqueeze.params import from_reduced, pure_twisting


def test_initial_coherent_state():
    eff = pure_twisting(50, 1.0)
    obs = oat_exact.exact_observables(0.0, eff, 50)
    assert obs.Sz2 == pytest.approx(12.5)
    assert obs.SzSy == 0.0
    assert obs.Sy2 == pytest.approx(12.5)
    assert obs.Sx == pytest.approx(25.0)


def test_zeros_at_quarter_period(monkeypatch):
    eff = pure_twisting(7, 1.0)
    obs = oat_exact.exact_observables(math.pi / 2.0, eff, 7)
    # cos(pi/2) in floats is ~6e-17; the closed forms collapse accordingly
    assert abs(obs.Sx) < 1e-90
    assert abs(obs.SzSy) < 1e-75
    monkeypatch.setattr(oat_exact, "exact_observables",
                        lambda t, e, n: oat_exact.OatExactObservables(
                            n / 4.0, 0.0, n / 4.0, 0.0))
    with pytest.raises(ContrastCollapseError):
        oat_exact.exact_squeezing(0.3, eff, 7)


def test_sz2_conserved():
    eff = from_reduced(100, 2.0, 0.5, 0.0, 3.0, 0.0)
    ts = np.linspace(0.0, 5.0, 50)
    sz2, _, _, _ = oat_exact.exact_observables(ts, eff, 100)
    assert np.allclose(sz2, 25.0)


def test_rejects_measurement_or_flips():
    with pytest.raises(ValueError):
        oat_exact.exact_observables(0.1, from_reduced(10, 1.0, 1.0, 0.0, 1.0, 0.5), 10)
    with pytest.raises(ValueError):
        oat_exact.exact_observables(0.1, from_reduced(10, 1.0, 1.0, 0.2, 1.0, 0.0), 10)


def test_log_space_powers_survive_large_N():
    N = 10**6
    eff = pure_twisting(N, 1.0)
    t = 3.0 ** (1 / 6) * N ** (-2 / 3)
    obs = oat_exact.exact_observables(t, eff, N)
    assert np.isfinite(obs.SzSy) and np.isfinite(obs.Sy2) and np.isfinite(obs.Sx)
    assert obs.Sx > 0


@pytest.mark.parametrize("N", [100, 10**4, 10**6])
def test_kitagawa_ueda_limit(N):
    eff = pure_twisting(N, 1.0)
    t0 = (3 * N**2) ** (1 / 6) / N
    ts = np.linspace(0.2 * t0, 3.0 * t0, 20001)
    xi2, area = oat_exact.exact_xi2_curve(ts, eff, N)
    i = int(np.argmin(xi2))
    assert xi2[i] == pytest.approx(analytic.KU_CONST * N ** (-2 / 3), rel=0.02)


def test_curvature_formula_tracks_exact_over_detuning_sweep():
    # time-optimized values of the closed-form expression and the exact
    # observables agree across the flip-free regimes (agreement holds
    # while xi^2 stays small; both drift together as xi^2 -> O(1))
    N, C = 10**6, 100.0
    for d in np.geomspace(3.0, 3e6, 8):
        eff = from_reduced(N, C, 1.0, 0.0, float(d), 0.0)
        est, _ = analytic.oat_p0_regimes(N, C, float(d))
        window = (0.0, 8.0 * est.t_opt)
        exact = optimizer.optimize_over_time(
            optimizer.OatExactBackend(eff, N), window, n_scan=4000)
        approx = optimizer.optimize_over_time(
            optimizer.AnalyticOatBackend(eff, N), window, n_scan=4000)
        assert exact.xi2_t == pytest.approx(approx.xi2_t, rel=0.05), d


def test_detuning_sweep_shows_three_regimes():
    N, C = 10**6, 100.0
    _, cross = analytic.oat_p0_regimes(N, C, 10.0)
    mid_floor = analytic.KU_CONST * N ** (-2 / 3)

    def optimized(d):
        eff = from_reduced(N, C, 1.0, 0.0, d, 0.0)
        est, _ = analytic.oat_p0_regimes(N, C, d)
        return optimizer.optimize_over_time(
            optimizer.OatExactBackend(eff, N), (0.0, 8.0 * est.t_opt), n_scan=4000)

    # middle region: a shallow bowl dipping to the curvature floor; the
    # residual dephasing tail (~2/(d u_opt)) and the contrast tilt keep
    # the edges above it
    for mult, tol in ((10.0, 0.10), (30.0, 0.10)):
        assert optimized(mult * cross.d_c1).xi2_t == pytest.approx(mid_floor, rel=tol)
    assert optimized(2.0 * cross.d_c1).xi2_t > 1.2 * mid_floor
    # below d_c1: worse than the floor and d-dependent
    low = optimized(cross.d_c1 / 30.0)
    assert low.xi2_t > 2.0 * mid_floor
    # above d_c2: contrast-limited growth
    high = optimized(30.0 * cross.d_c2)
    assert high.xi2_t > 10.0 * mid_floor


def test_linear_solutions_match_integrator():
    # spot grid; the full 27-point grid runs in the acceptance suite
    for chiN, GammaN, p in ((30.0, 10.0, 0.1), (150.0, 400.0, 0.45)):
        N = 1000
        eff = from_reduced(N, (GammaN / N) * (1 + (2 * chiN / GammaN) ** 2),
                           1.0, p, 2 * chiN / GammaN, 0.0)
        assert eff.chiN == pytest.approx(chiN, rel=1e-12)
        rec = moments.simulate(eff, 1.5, dt=2e-3 / (chiN + GammaN + 1.0), n_out=51)
        sol = oat_exact.linear_solutions(rec.times[1:], eff)
        assert np.allclose(rec.v_zy[1:], sol.v_zy, rtol=1e-8)
        assert np.allclose(rec.v_yy[1:], sol.v_yy, rtol=1e-8)


def test_linear_solutions_small_time_expansions():
    eff = from_reduced(10**4, 2.0, 1.0, 0.3, 4.0, 0.0)
    chiN, GammaN, g, p = eff.chiN, eff.GammaN, eff.gamma_sc, eff.p
    t = np.array([1e-5, 3e-5, 1e-4])
    sol = oat_exact.linear_solutions(t, eff)
    assert np.allclose(sol.v_zy, chiN * t, rtol=2e-4)
    assert np.allclose(sol.v_yy, 1.0 + GammaN * t + (chiN * t) ** 2, rtol=2e-3)
    # leading stochastic-area growth: A^2 = 1 + Gamma N t + (2/3)(chi N)^2 gamma_sc p t^3
    a2_model = 1.0 + GammaN * t + (2.0 / 3.0) * chiN**2 * g * p * t**3
    assert np.allclose(sol.A2, a2_model, rtol=2e-3)


def test_linear_solutions_p0_limit_continuous():
    effp = from_reduced(1000, 1.0, 1.0, 1e-9, 2.0, 0.0)
    eff0 = from_reduced(1000, 1.0, 1.0, 0.0, 2.0, 0.0)
    t = np.linspace(0.01, 2.0, 7)
    a = oat_exact.linear_solutions(t, effp)
    b = oat_exact.linear_solutions(t, eff0)
    assert np.allclose(a.v_zy, b.v_zy, rtol=1e-6)
    assert np.allclose(a.v_yy, b.v_yy, rtol=1e-6)
    assert np.allclose(a.A2, b.A2, rtol=1e-6)


def test_exact_squeezing_short_time_is_unity():
    eff = from_reduced(1000, 1.0, 1.0, 0.0, 5.0, 0.0)
    m = oat_exact.exact_squeezing(1e-9, eff, 1000)
    assert m.xi2 == pytest.approx(1.0, rel=1e-5)
