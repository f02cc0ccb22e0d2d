import math
import warnings

import numpy as np
import pytest

from cavsqueeze import analytic, optimizer
from cavsqueeze.params import from_reduced


def test_golden_section_on_quadratic():
    t, f = optimizer.golden_section(lambda x: (x - 0.37) ** 2 + 1.0, 0.0, 1.0)
    assert t == pytest.approx(0.37, abs=1e-6)
    assert f == pytest.approx(1.0, rel=1e-12)


def test_analytic_backend_matches_stationary_point():
    # independent oracle: root of the analytic derivative of the
    # three-term twisting expression
    eff = from_reduced(10**5, 1.0, 1.0, 0.4, 10.0, 0.0)
    u = eff.chiN
    g = eff.Gamma / eff.chi

    def dxi2(t):
        return -2.0 / (u**2 * t**3) - g / (u * t**2) + (2.0 / 3.0) * eff.gamma_sc * eff.p

    lo, hi = 1e-4, 1.0
    for _ in range(200):  # bisection
        mid = 0.5 * (lo + hi)
        if dxi2(mid) < 0:
            lo = mid
        else:
            hi = mid
    t_star = 0.5 * (lo + hi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        opt = optimizer.optimize_over_time(
            optimizer.AnalyticOatBackend(eff), (1e-4, 1.0), n_scan=2000)
    assert opt.t_opt == pytest.approx(t_star, rel=1e-3)


def test_edge_flag_on_monotone_curve():
    # QND variance keeps improving for p = 0: short windows end at the edge
    eff = from_reduced(10**4, 1.0, 1.0, 0.0, 0.0, 0.5)
    opt = optimizer.optimize_over_time(optimizer.MomentsBackend(eff),
                                       (0.0, 0.2 / eff.gamma_sc), n_scan=400)
    assert opt.at_edge
    assert opt.t_opt == pytest.approx(0.2, rel=1e-9)


def test_minimality_on_scan_grid():
    eff = from_reduced(10**4, 1.0, 1.0, 0.5, 0.0, 0.4)
    backend = optimizer.MomentsBackend(eff)
    window = (0.0, eff.time_from_scaled(50.0))
    opt = optimizer.optimize_over_time(backend, window, n_scan=500)
    _, xi2, _ = backend.curve(np.linspace(*window, 500))
    assert opt.xi2_t <= np.min(xi2) * (1 + 1e-12)


def test_qnd_moments_optimum_matches_formula():
    eff = from_reduced(10**4, 1.0, 1.0, 0.5, 0.0, 0.4)
    opt = optimizer.optimize_over_time(optimizer.MomentsBackend(eff),
                                       (0.0, eff.time_from_scaled(50.0)))
    ref = math.sqrt(2.0 * eff.p / (eff.NC * eff.eta))
    assert opt.xi2_t == pytest.approx(ref, rel=0.05)
    assert not opt.at_edge


def test_backend_cross_check_twisting():
    eff = from_reduced(10**5, 1.0, 1.0, 0.4, 10.0, 0.0)
    window = (0.0, eff.time_from_scaled(50.0))
    mom = optimizer.optimize_over_time(optimizer.MomentsBackend(eff), window)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ana = optimizer.optimize_over_time(optimizer.AnalyticOatBackend(eff),
                                           (1e-5 * window[1], window[1]))
    assert mom.xi2_t == pytest.approx(ana.xi2_t, rel=0.10)
    lin = optimizer.optimize_over_time(optimizer.LinearOatBackend(eff), window)
    assert mom.xi2_t == pytest.approx(lin.xi2_t, rel=1e-6)


def test_determinism():
    eff = from_reduced(10**4, 1.0, 1.0, 0.5, 0.0, 0.4)
    window = (0.0, eff.time_from_scaled(50.0))
    a = optimizer.optimize_over_time(optimizer.MomentsBackend(eff), window)
    b = optimizer.optimize_over_time(optimizer.MomentsBackend(eff), window)
    assert (a.t_opt, a.xi2_t, a.area_at_opt) == (b.t_opt, b.xi2_t, b.area_at_opt)


def test_sweep_detuning_efficiency_behaviors():
    # above the critical efficiency the best squeezing sits at d = 0;
    # below it the unitary limit wins and the value forgets eta
    eff = from_reduced(10**5, 1.0, 1.0, 0.4, 0.0, 0.0)
    d_grid = [1e-3, 0.5, 2.0, 10.0, 40.0]
    rows = optimizer.sweep_detuning(eff, d_grid, [0.25, 0.1, 0.0],
                                    window_s=50.0, n_scan=800)
    by_eta = {}
    for r in rows:
        by_eta.setdefault(r.eta, []).append(r)
    high = by_eta[0.25]
    assert min(high, key=lambda r: r.xi2_t).parameter == pytest.approx(1e-3)
    low = by_eta[0.1]
    best_low = min(low, key=lambda r: r.xi2_t)
    assert best_low.parameter >= 2.0
    ref0 = {r.parameter: r.xi2_t for r in by_eta[0.0]}
    assert best_low.xi2_t == pytest.approx(ref0[best_low.parameter], rel=0.10)


def test_parametric_curve_measurement_plateau_then_upturn():
    eff = from_reduced(10**6, 1.0, 1.0, 0.5, 0.0, 0.25)
    t_max = eff.time_from_scaled(12.0)
    ts = np.linspace(0.0, t_max, 600)
    times, xi2, area, marker = optimizer.parametric_area_curve(
        optimizer.MomentsBackend(eff), ts, marker_spacing_s=0.2)
    s = eff.scaled_time(times)
    plateau = (s >= 0.02) & (s <= 0.3)
    assert np.all(np.abs(area[plateau] - 2.0) < 0.2)
    assert marker.sum() == int(s[-1] / 0.2)
    # after the squeezing floor the area grows with nearly constant xi2
    i_min = int(np.argmin(xi2))
    assert area[-1] > 1.5 * area[i_min]
    assert xi2[-1] > xi2[i_min]


def test_parametric_curve_unitary_vertical_section():
    # small-d section of the twisting curve: xi^2 nearly constant while
    # the area changes dramatically
    N, C, p = 10**5, 1.0, 0.4
    xs, areas = [], []
    for d in (2.0, 6.0, 20.0):
        opt = analytic.oat_optimum(N, C, p, d)
        xs.append(opt.xi2_opt)
        areas.append(opt.area_at_opt)
    assert max(xs) / min(xs) < 1.25
    assert max(areas) / min(areas) > 3.0


def test_regime_map_crossings():
    rows = optimizer.regime_map(10**6, 100.0, [analytic.ETA_C], np.geomspace(1e-4, 0.5, 9))
    for r in rows:
        # at the critical efficiency both flip-limited formulas coincide
        if r["xi2_qnd"] < math.inf and r["p"] > 1e-2:
            qnd_raw = math.sqrt(2 * r["p"] / (1e8 * analytic.ETA_C))
            oat_raw = math.sqrt(32 * r["p"] / (3e8))
            assert qnd_raw == pytest.approx(oat_raw, rel=1e-12)
    rows = optimizer.regime_map(10**6, 100.0, [0.1], [0.45, 1e-4])
    assert rows[0]["recommendation"] == "OAT"
    assert rows[1]["recommendation"] == "QND"
