import math

import numpy as np
import pytest

from cavsqueeze.params import (EffectiveParams, PhysicalParams, derive_effective,
                               from_rates, from_reduced, pure_twisting,
                               validate_adiabatic)


def make_phys(**over):
    base = dict(g1=2e5, g2=1e5, gamma1=4e6, gamma2=1e6, kappa=8e5,
                Delta=5e9, delta=3e5, flux=1e10, N=1000, eta=0.4)
    base.update(over)
    return PhysicalParams(**base)


def test_symmetric_decay_saturates_p():
    phys = make_phys(g2=2e5, gamma2=4e6)
    eff = derive_effective(phys)
    assert eff.p == pytest.approx(0.5, abs=0)


def test_d_zero_gives_pure_measurement():
    eff = from_reduced(100, 3.0, 2.0, 0.1, 0.0, 0.5)
    assert eff.chi == 0.0
    assert eff.Gamma == pytest.approx(3.0 * 2.0, rel=1e-14)


def test_d_one_maximizes_twisting():
    eff = from_reduced(100, 3.0, 2.0, 0.1, 1.0, 0.5)
    assert eff.chi == pytest.approx(3.0 * 2.0 / 4.0, rel=1e-14)
    assert eff.Gamma == pytest.approx(3.0 * 2.0 / 2.0, rel=1e-14)


def test_from_reduced_examples():
    eff = from_reduced(10**4, 10.0, 1.0, 0.5, 0.0, 0.4)
    assert eff.Gamma == pytest.approx(10.0, rel=1e-14)
    assert eff.chi == 0.0
    # limiting behavior at large d: both rates vanish, ratio stays d/2
    big = from_reduced(10**4, 10.0, 1.0, 0.5, 1e10, 0.4)
    assert big.Gamma < 1e-10 and abs(big.chi) < 1e-5
    assert big.chi / big.Gamma == pytest.approx(0.5e10, rel=1e-12)
    with pytest.raises(ValueError):
        from_reduced(10**4, 10.0, 1.0, 0.6, 0.0, 0.4)


def test_chi_gamma_ratio_identity():
    rng = np.random.default_rng(7)
    for _ in range(50):
        C = rng.uniform(0.01, 100)
        g = rng.uniform(0.01, 10)
        d = rng.uniform(-50, 50)
        if d == 0:
            continue
        eff = from_reduced(100, C, g, 0.3, d, 0.2)
        assert eff.chi / eff.Gamma == pytest.approx(d / 2.0, rel=1e-12)


def test_gamma_even_decreasing_chi_odd_peaked():
    ds = np.linspace(0.05, 30, 200)
    gammas = [from_reduced(10, 1.0, 1.0, 0.0, d, 0.0).Gamma for d in ds]
    assert all(a > b for a, b in zip(gammas, gammas[1:]))
    for d in (0.3, 1.7, 9.0):
        plus = from_reduced(10, 1.0, 1.0, 0.0, d, 0.0)
        minus = from_reduced(10, 1.0, 1.0, 0.0, -d, 0.0)
        assert plus.chi == pytest.approx(-minus.chi, rel=1e-14)
        assert plus.Gamma == pytest.approx(minus.Gamma, rel=1e-14)
    chis = [from_reduced(10, 1.0, 1.0, 0.0, d, 0.0).chi for d in ds]
    assert ds[int(np.argmax(chis))] == pytest.approx(1.0, abs=0.2)
    assert max(chis) <= 1.0 / 4.0 + 1e-12


def test_round_trip_physical_reduced():
    eff = derive_effective(make_phys())
    again = from_reduced(eff.N, eff.C, eff.gamma_sc, eff.p, eff.d, eff.eta)
    assert again.chi == pytest.approx(eff.chi, rel=1e-12)
    assert again.Gamma == pytest.approx(eff.Gamma, rel=1e-12)


def test_p_symmetric_under_rate_swap():
    a = derive_effective(make_phys())
    b = derive_effective(make_phys(g1=1e5, g2=2e5, gamma1=1e6, gamma2=4e6))
    assert a.p == pytest.approx(b.p, rel=1e-14)


def test_inconsistent_cooperativity_rejected():
    phys = make_phys(gamma2=2e6)
    with pytest.raises(ValueError, match="cooperativity"):
        derive_effective(phys)
    try:
        derive_effective(phys)
    except ValueError as exc:
        msg = str(exc)
        assert "0.05" in msg or "e" in msg  # both values reported
        assert msg.count("=") >= 2


def test_zero_detuning_rejected():
    with pytest.raises(ValueError, match="Delta"):
        derive_effective(make_phys(Delta=0.0))


def test_invalid_ranges_rejected():
    with pytest.raises(ValueError):
        PhysicalParams(g1=1, g2=1, gamma1=-1, gamma2=1, kappa=1, Delta=1,
                       delta=0, flux=1, N=2, eta=0.5)
    with pytest.raises(ValueError):
        from_reduced(10, 1.0, 1.0, 0.0, 0.0, 1.5)
    with pytest.raises(ValueError):
        EffectiveParams(N=10, C=1.0, gamma_sc=1.0, p=0.0, d=0.0,
                        chi=0.3, Gamma=1.0, eta=0.0)


def test_from_rates_and_pure_twisting():
    eff = from_rates(50, 0.4, 0.2, chi=0.3, Gamma=0.6, eta=0.1)
    assert eff.d == pytest.approx(1.0, rel=1e-14)
    assert eff.chi == pytest.approx(0.3, rel=1e-12)
    ideal = pure_twisting(100, 2.5)
    assert ideal.Gamma == 0.0 and ideal.gamma_sc == 0.0 and ideal.chi == 2.5
    with pytest.raises(ValueError):
        from_rates(50, 0.0, 0.0, chi=0.1, Gamma=0.5, eta=0.0)


def test_adiabatic_all_pass_at_huge_detuning():
    report = validate_adiabatic(make_phys(Delta=5e12))
    assert report.overall
    assert all(c.satisfied for c in report.checks)


def test_adiabatic_excited_state_check_fails():
    phys = make_phys(Delta=4e6)  # Delta = gamma1
    report = validate_adiabatic(phys)
    by_name = {c.name: c for c in report.checks}
    assert not by_name["excited_linewidth_g1"].satisfied
    assert by_name["excited_linewidth_g1"].ratio == pytest.approx(1.0)
    assert not report.overall


def test_adiabatic_zero_flux():
    phys = make_phys(flux=0.0)
    eff = derive_effective(phys)
    assert eff.gamma_sc == 0.0
    report = validate_adiabatic(phys)
    by_name = {c.name: c for c in report.checks}
    assert by_name["photon_coupling_g1"].satisfied
    assert by_name["photon_coupling_g2"].ratio == math.inf


def test_overall_is_conjunction():
    report = validate_adiabatic(make_phys())
    assert report.overall == all(c.satisfied for c in report.checks)


def test_scaled_time():
    eff = from_reduced(10**4, 1.0, 2.0, 0.0, 0.0, 0.0)
    assert eff.scaled_time(0.5) == pytest.approx(2.0 * 0.5 * 100 / 2)
    assert eff.time_from_scaled(eff.scaled_time(0.37)) == pytest.approx(0.37)
    assert pure_twisting(10, 1.0).scaled_time(3.0) == 0.0
