import math

import numpy as np
import pytest

from cavsqueeze import analytic
from cavsqueeze.params import from_reduced


def test_qnd_optimum_fixture_values():
    # pinned experimental working points
    assert abs(analytic.qnd_optimum(4650, 1.0, 0.4, 0.5).xi2_db) == pytest.approx(16.3, abs=0.1)
    assert abs(analytic.qnd_optimum(4650, 1.0, 1.0, 0.5).xi2_db) == pytest.approx(18.3, abs=0.1)
    nc_bao = 3.0 * 70.0 / (2.0 * math.pi)
    assert abs(analytic.qnd_optimum(nc_bao, 1.0, 1.0, 0.5).xi2_db) == pytest.approx(7.6, abs=0.1)


def test_qnd_optimum_rejects_p0_and_warns():
    with pytest.raises(ValueError):
        analytic.qnd_optimum(1e4, 1.0, 0.4, 0.0)
    with pytest.warns(UserWarning):
        analytic.qnd_optimum(10, 1.0, 0.4, 0.5)


def test_oat_xi2_vs_time_terms():
    eff = from_reduced(10**5, 1.0, 1.0, 0.4, 10.0, 0.0)
    # late times: spin-flip term dominates linearly
    t1, t2 = 5.0, 10.0
    x1 = analytic.oat_xi2_vs_time(t1, eff)
    x2 = analytic.oat_xi2_vs_time(t2, eff)
    slope = (x2 - x1) / (t2 - t1)
    assert slope == pytest.approx((2.0 / 3.0) * eff.gamma_sc * eff.p, rel=1e-3)
    with pytest.raises(ValueError):
        analytic.oat_xi2_vs_time(1.0, from_reduced(10, 1.0, 1.0, 0.1, 0.0, 0.0))


def test_oat_optimum_large_d_scaling():
    # numerically minimize the flip-limited expression and compare
    N, C, p, d = 1e6, 0.1, 0.3, 5e3
    eff = from_reduced(int(N), C, 1.0, p, d, 0.0)
    assert d > analytic.crossover_detuning(N, C, p)
    ts = np.geomspace(1e-3, 1e3, 400001)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        xi2 = analytic.oat_xi2_vs_time(ts, eff)
    ref = analytic.oat_optimum(N, C, p, d)
    assert np.min(xi2) == pytest.approx(ref.xi2_opt, rel=0.02)


def test_oat_optimum_first_branch_vs_numeric_min():
    # minimize the full three-term expression at large d, flip-limited branch
    N, C, p, d = 1e6, 1.0, 0.01, 10.0
    eff = from_reduced(int(N), C, 1.0, p, d, 0.0)
    assert d < analytic.crossover_detuning(N, C, p)
    ts = np.geomspace(1e-5, 10.0, 400001)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        xi2 = analytic.oat_xi2_vs_time(ts, eff)
    t_opt = ts[int(np.argmin(xi2))]
    ref = analytic.oat_optimum(N, C, p, d)
    assert eff.gamma_sc * eff.p * t_opt < 0.01  # perturbative regime
    assert np.min(xi2) == pytest.approx(ref.xi2_opt, rel=0.02)


def test_oat_branch_continuity_at_crossover():
    rng = np.random.default_rng(3)
    for _ in range(20):
        N = 10 ** rng.uniform(3, 7)
        C = 10 ** rng.uniform(-1, 2)
        p = rng.uniform(0.05, 0.5)
        d = analytic.crossover_detuning(N, C, p)
        lo = analytic.oat_optimum(N, C, p, d * 0.999)
        hi = analytic.oat_optimum(N, C, p, d * 1.001)
        assert lo.xi2_opt == pytest.approx(hi.xi2_opt, rel=0.30)


def test_oat_optimum_rejections():
    with pytest.raises(ValueError):
        analytic.oat_optimum(1e4, 1.0, 0.0, 10.0)
    with pytest.raises(ValueError):
        analytic.oat_optimum(1e4, 1.0, 0.1, -1.0)


def test_oat_p0_regime_values():
    # curvature-limited point of the flip-free detuning map
    opt, cross = analytic.oat_p0_regimes(10**6, 100.0, 1e4)
    assert opt.regime_label == "curvature limited"
    assert opt.xi2_opt == pytest.approx(analytic.KU_CONST * 1e-4, rel=1e-12)
    assert opt.area_at_opt == pytest.approx(math.sqrt(1.5), rel=1e-12)
    assert cross.d_c1 == pytest.approx(230.0, rel=1e-2)
    assert cross.d_c2 == pytest.approx(4e5, rel=1e-2)
    assert cross.middle_region_exists


def test_oat_p0_xi2_limits():
    from cavsqueeze.params import pure_twisting
    N = 10**4
    eff = pure_twisting(N, 1.0)
    ts = np.geomspace(1e-6, 1e-2, 200001)
    xi2 = analytic.oat_p0_xi2(ts, eff, N)
    i = int(np.argmin(xi2))
    assert xi2[i] == pytest.approx(analytic.KU_CONST * N ** (-2 / 3), rel=1e-3)
    assert eff.chiN * ts[i] == pytest.approx((3 * N**2) ** (1 / 6), rel=1e-2)


def test_oat_p0_dephasing_regime():
    # Gamma-active window: formula vs numeric minimum of the closed form
    N, C, d = 10**6, 100.0, 5.0
    eff = from_reduced(N, C, 1.0, 0.0, d, 0.0)
    ts = np.geomspace(1e-8, 1e-2, 400001)
    xi2 = analytic.oat_p0_xi2(ts, eff, N)
    opt, _ = analytic.oat_p0_regimes(N, C, d)
    assert opt.regime_label == "collective dephasing vs curvature"
    assert np.min(xi2) == pytest.approx(opt.xi2_opt, rel=0.05)
    assert eff.chiN * ts[int(np.argmin(xi2))] == pytest.approx((3 * N**2 / d) ** 0.2, rel=0.10)


def test_oat_p0_contrast_regime():
    N, C = 10**6, 100.0
    d = 1e8  # beyond d_c2 = 4e6
    opt, _ = analytic.oat_p0_regimes(N, C, d)
    assert opt.regime_label == "contrast decay limited"
    assert opt.xi2_opt == pytest.approx((math.e * d / (N * C)) ** 2, rel=1e-12)
    assert opt.t_opt == pytest.approx(1.0)
    assert opt.area_at_opt == pytest.approx(math.sqrt(math.e), rel=1e-12)


def test_middle_region_flag_flip_matches_quoted_constant():
    N = 10**6
    # flag flips where d_c1 = d_c2, i.e. C* = (2.3/0.4) N^(-1/3)
    cs = np.geomspace(1e-3, 1.0, 4001)
    flags = [analytic.oat_p0_regimes(N, c, 10.0)[1].middle_region_exists for c in cs]
    c_star = cs[int(np.argmax(flags))]
    assert c_star == pytest.approx(6.0 * N ** (-1 / 3), rel=0.2)
    for c in cs[::100]:
        _, cross = analytic.oat_p0_regimes(N, c, 10.0)
        assert cross.middle_region_exists == (cross.d_c1 < cross.d_c2)


def test_qnd_p0_optimum_values():
    res = analytic.qnd_p0_optimum(4e5, 0.044, 0.37)
    assert abs(res.xi2_db) == pytest.approx(33.6, abs=0.1)
    big_c = analytic.qnd_p0_optimum(1e4, 1e9, 0.5)
    assert big_c.xi2_opt == pytest.approx(math.e / (1e4 * 0.5), rel=1e-6)
    for C in (0.01, 1.0, 100.0):
        res = analytic.qnd_p0_optimum(1e4, C, 0.5)
        assert C * res.t_opt < 1.0  # Gamma * t_opt = C/(C+1) < 1 always


def test_qnd_p0_matches_numeric_minimum_at_large_N_eta():
    # the closed form is the N*eta -> inf limit of min_t e^((G+g)t)/(1+G N eta t)
    N, C, eta = 1e9, 2.0, 0.6
    eff = from_reduced(int(N), C, 1.0, 0.0, 0.0, eta)
    ts = np.geomspace(1e-3, 2.0, 2000001) / (C + 1.0)
    xi2 = np.exp((eff.Gamma + eff.gamma_sc) * ts) / (1.0 + eff.GetaN * ts)
    ref = analytic.qnd_p0_optimum(N, C, eta)
    assert np.min(xi2) == pytest.approx(ref.xi2_opt, rel=1e-6)


def test_critical_values():
    cv = analytic.critical_values(10**6, 10.0, 0.3)
    assert cv.eta_c == 0.1875
    assert cv.p_c1 == pytest.approx(0.01, rel=1e-12)
    assert cv.p_c2 == pytest.approx(math.e**2 * 121.0 / (2.0 * 1e7 * 0.3), rel=1e-12)
    assert cv.eta_threshold == pytest.approx(2.6 * 1.1 / 100.0, rel=1e-12)


def test_p_c3_matches_numeric_crossing():
    # solve sqrt(2p/(NC eta)) = KU floor for p and compare to 0.54 C eta N^(-1/3)
    rng = np.random.default_rng(11)
    for _ in range(20):
        N = 10 ** rng.uniform(4, 8)
        C = 10 ** rng.uniform(-1, 2)
        eta = rng.uniform(0.02, 0.15)
        floor = analytic.KU_CONST * N ** (-2 / 3)
        p_star = floor**2 * N * C * eta / 2.0
        cv = analytic.critical_values(N, C, eta)
        assert cv.p_c3 == pytest.approx(p_star, rel=0.10)


def test_measurement_equals_twisting_at_critical_efficiency():
    rng = np.random.default_rng(5)
    for _ in range(40):
        N = 10 ** rng.uniform(3, 9)
        C = 10 ** rng.uniform(-2, 3)
        p = rng.uniform(1e-4, 0.5)
        qnd = math.sqrt(2.0 * p / (N * C * analytic.ETA_C))
        oat = math.sqrt(32.0 * p / (3.0 * N * C))
        assert qnd == pytest.approx(oat, rel=1e-12)


def test_classify_examples():
    assert analytic.classify(10**6, 100.0, 0.4, 0.3).recommendation == "QND"
    assert analytic.classify(10**6, 100.0, 0.1, 0.45).recommendation == "OAT"
    rep = analytic.classify(10**6, 100.0, 0.1, 1e-4)
    assert 1e-4 < rep.p_c3 and 0.1 > rep.eta_threshold
    assert rep.recommendation == "QND"


def test_classify_consistent_with_reported_predictions():
    rng = np.random.default_rng(13)
    for _ in range(100):
        rep = analytic.classify(10 ** rng.uniform(3, 8), 10 ** rng.uniform(-2, 2),
                                rng.uniform(0.01, 1.0), rng.uniform(0.0, 0.5))
        if rep.recommendation == "QND":
            assert rep.xi2_qnd <= rep.xi2_oat
        elif rep.recommendation == "OAT":
            assert rep.xi2_oat <= rep.xi2_qnd
        else:
            assert abs(rep.xi2_qnd - rep.xi2_oat) <= 0.10 * min(rep.xi2_qnd, rep.xi2_oat) * (1 + 1e-12)


def test_db_conversions():
    assert analytic.db(1.0) == 0.0
    assert analytic.db(0.1) == pytest.approx(-10.0, rel=1e-14)
    rng = np.random.default_rng(2)
    for x in rng.uniform(0.001, 10.0, 25):
        assert analytic.from_db(analytic.db(x)) == pytest.approx(x, rel=1e-12)
    with pytest.raises(ValueError):
        analytic.db(0.0)
    with pytest.raises(ValueError):
        analytic.db(-1.0)


def test_table_s1_within_half_db():
    rows = analytic.table_s1_predictions()
    assert len(rows) == 6
    quoted = {r["experiment"]: r["quoted_db"] for r in rows}
    assert set(quoted.values()) == {14.5, 18.0, 34.0, 25.0, 7.5, 20.0}
    for r in rows:
        assert abs(r["predicted_db"] - r["quoted_db"]) < 0.5, r
