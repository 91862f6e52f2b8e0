import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from monopole_moduli import monopole as mp
from monopole_moduli.modforms import DegenerateCurveError, Tau
from monopole_moduli.monopole import OmegaPoint, SpectralCurve2, SpectralCurveK


@pytest.mark.parametrize("k,expected", [(1, (3, 0, 0)), (2, (7, 4, 1)), (3, (11, 8, 4))])
def test_dimensions(k, expected):
    assert mp.dimensions(k) == expected


def test_dimensions_rejects_k0():
    with pytest.raises(ValueError):
        mp.dimensions(0)


# real structure ------------------------------------------------------------------


def test_real_structure_k2_family():
    ok, res = mp.real_structure_check(SpectralCurve2(1.3, -0.4).to_curve())
    assert ok and max(res) == 0


def test_real_structure_rejects_generic_a1():
    c = SpectralCurveK(2, ((0.3 + 0.7j, 1.1 - 0.2j, 0.5j), (0, 1, 2, -1, 0)))
    assert not mp.real_structure_check(c)[0]


def test_real_structure_rejects_complex_r():
    assert not mp.real_structure_check(SpectralCurveK.from_k2(1 + 1j, 2))[0]


def test_k1_lines_are_swapped_by_the_involution():
    up, down = mp.degenerate_curve(math.pi**2 / 4)
    assert not mp.real_structure_check(up)[0]
    assert mp.components_real([up, down])
    assert mp.real_structure_check(up.product(down))[0]
    assert not mp.components_real([up])


def test_mirror_is_an_involution():
    c = SpectralCurveK(2, ((0.3 + 0.7j, 1.1 - 0.2j, 0.5j), (1, 2j, 3, 4 - 1j, 5)))
    back = c.mirror().mirror()
    assert all(abs(complex(x) - y) < 1e-15 for a, b in zip(c.a, back.a) for x, y in zip(a, b))


def test_curve_degree_bound():
    with pytest.raises(ValueError):
        SpectralCurveK(1, ((0, 1, 0, 1),))


def test_degenerate_curve_slopes():
    up, down = mp.degenerate_curve(math.pi**2 / 4)
    assert abs(up.a[0][1] + 1j * math.pi / 2) < 1e-15
    assert abs(down.a[0][1] - 1j * math.pi / 2) < 1e-15
    up, down = mp.degenerate_curve(1)
    assert up.a[0][1] == -1j
    up, down = mp.degenerate_curve(0)
    assert up.a == down.a
    with pytest.raises(ValueError):
        mp.degenerate_curve(-1)


# Weierstrass data -------------------------------------------------------------------


def test_weierstrass_from_r_examples():
    w = mp.weierstrass_from_r(SpectralCurve2(3, 9))
    assert (w.g2, w.g3, w.discriminant) == (16, 12, 208)
    assert mp.weierstrass_from_r(SpectralCurve2(1, 3)) == w
    w0 = mp.weierstrass_from_r(SpectralCurve2(5, 0))
    assert (w0.g2, w0.g3) == (4, 0)
    with pytest.raises(DegenerateCurveError):
        mp.weierstrass_from_r(SpectralCurve2(0, 1))


def test_I_from_r_examples():
    assert mp.I_from_r(SpectralCurve2(3, 9)) == Fraction(243, 256)
    assert mp.I_from_r(SpectralCurve2(0, 2)) == 1
    assert mp.I_from_r(SpectralCurve2(1e6, 1)) < 1e-11
    assert mp.I_from_r(SpectralCurve2(2, 0)) == 0


pos = st.fractions(min_value=Fraction(1, 40), max_value=50, max_denominator=40)


@settings(max_examples=100, deadline=None)
@given(pos, st.fractions(min_value=-50, max_value=50, max_denominator=40))
def test_I_consistency_exact(r1, r2):
    assume(r2 != 0)
    c = SpectralCurve2(r1, r2)
    assert mp.I_from_r(c) == mp.weierstrass_from_r(c).I


def test_spectral_curve_validation():
    with pytest.raises(ValueError):
        SpectralCurve2(-1, 1)
    assert SpectralCurve2(0, 1).degenerate


def test_tau_from_r_round_trip_and_limits():
    tau = mp.tau_from_r(SpectralCurve2(3, 9))
    assert tau.purely_imaginary and tau.rho >= 1
    from monopole_moduli.modforms import j_and_I
    assert abs(j_and_I(tau)[1].real - 243 / 256) < 1e-9
    assert abs(mp.tau_from_r(SpectralCurve2(1, 1e-6)).rho - 1) < 1e-3
    assert mp.tau_from_r(SpectralCurve2(1e-6, 1)).rho > 5
    with pytest.raises(ValueError):
        mp.tau_from_r(SpectralCurve2(0, 1))


@pytest.mark.parametrize("rho", [1.2, 1.7, 2.5, 4.0, 6.0])
def test_round_trips(rho):
    c = mp.r_params_from_tau(Tau.imag(rho))
    assert abs(mp.tau_from_r(c).rho - rho) < 1e-8
    back = mp.r_params_from_tau(mp.tau_from_r(c))
    assert abs(back.ratio - c.ratio) < 1e-8 * max(1, c.ratio)
    assert abs(back.r2 - c.r2) < 1e-8


def test_scale_relation_g2():
    rho = 1.8
    c = mp.r_params_from_tau(Tau.imag(rho))
    from monopole_moduli.modforms import g_invariants_tau
    g2 = g_invariants_tau(Tau.imag(rho)).g2.real
    # g2(tau) = 16 r1^2 g2(Lambda)
    assert abs(g2 - 16 * c.r1**2 * mp.weierstrass_from_r(c).g2) < 1e-9 * g2


def test_degeneration_limit():
    c = mp.r_params_from_tau(Tau.imag(5))
    q = math.exp(-10 * math.pi)
    assert abs(c.r2 - math.pi**2 / 4) < 1e-3
    assert abs(c.r1 / (math.pi**2 * q**0.25) - 1) < 0.05


def test_r_params_requires_rho_at_least_one():
    with pytest.raises(ValueError):
        mp.r_params_from_tau(Tau.imag(0.9))
    c = mp.r_params_from_tau(Tau.imag(1))
    assert c.ratio > 1e5  # tau = i is the r -> infinity end


# Omega and metric ----------------------------------------------------------------------


def test_omega_scale_fit():
    assert abs(mp.fit_omega_scale() - 2) < 1e-10
    # out-of-sample fit gives the same constant
    assert abs(mp.fit_omega_scale(2.2, 2.8) - 2) < 1e-8


def test_omega_theta_residual():
    for i in range(23):
        assert mp.omega_theta_residual(0.8 + 0.1 * i) < 1e-8


def test_omega_asymptotics_and_signs():
    for rho in (2.0, 4.0, 6.0):
        p = mp.omega_from_theta(rho)
        q = math.exp(-2 * math.pi * rho)
        assert p.O1 < 0 and p.O2 < 0 and p.O3 > 0
        assert abs(p.O1 + math.pi / 2 + 4 * math.pi * q) < 100 * q * q + 1e-15
        assert abs(p.O3 / (4 * math.pi * q**0.5) - 1) < 20 * q**0.5
        assert abs(p.O2 / p.O3 + 1) < 20 * q**0.5
        fr = mp.metric_from_omega(p)
        assert fr.positive


def test_omega_point_validation():
    with pytest.raises(ValueError):
        OmegaPoint(1, 1, 2)
    with pytest.raises(ValueError):
        OmegaPoint(1, 2, 3, rho=0)
    with pytest.raises(ValueError):
        mp.omega_from_theta(0)


def test_metric_examples():
    fr = mp.metric_from_omega((1, 2, 4))
    assert (fr.a2, fr.b2, fr.c2) == (8, 2, Fraction(1, 2))
    assert fr.a2 * fr.b2 * fr.c2 == fr.abc2 == 8
    t = Fraction(3)
    fr = mp.metric_from_omega((-t, -t, t))
    assert (fr.a2, fr.b2, fr.c2) == (t, t, t)


def test_metric_signature_flag():
    fr = mp.metric_from_omega((-1, 2, 4))
    assert not fr.positive and fr.a2 == -8 and fr.selfdual_residuals is None
    with pytest.raises(mp.SignatureError):
        mp.selfdual_residual((-1, 2, 4))
    with pytest.raises(ZeroDivisionError):
        mp.metric_from_omega((0, 1, 2))


def test_selfdual_worked_example():
    assert mp.selfdual_residual((1, 2, 4), "-") == (0, 0, 0)
    assert mp.selfdual_residual((1, 2, 4), "+") == (15, -5, -3)


def test_selfdual_symmetric_case():
    t = Fraction(5, 2)
    assert mp.selfdual_residual((-t, -t, t)) == (0, 0, 0)


nz = st.fractions(min_value=-40, max_value=40, max_denominator=12).filter(lambda x: x != 0)


@settings(max_examples=150, deadline=None)
@given(nz, nz, nz)
def test_selfdual_equivalence_exact(a, b, c):
    O = (a, b, c)
    assume(all(s > 0 for s in mp.metric_coefficients(O)))
    assert mp.selfdual_residual(O, "-") == (0, 0, 0)
    if min(O) > 0:  # all positive: signed and positive roots coincide
        assert mp.selfdual_residual(O, "-", roots="positive") == (0, 0, 0)


def test_positive_roots_fail_in_two_negative_regime():
    res = mp.selfdual_residual((-1, -2, 4), "-", roots="positive")
    assert any(r != 0 for r in res)


def test_asymptotic_report():
    r2 = mp.asymptotic_report(2)
    assert r2["isometry_gauge"] < 0.05
    assert mp.asymptotic_report(4)["isometry_gauge"] < 1e-3
    r1 = mp.asymptotic_report(1)
    assert set(r1) >= {"q", "omega", "a2", "b2", "c2", "b2_over_c2", "displayed_metric",
                       "displayed_omega_substituted", "prefactor_pi_over_r1", "omega_scale"}
    sub = r2["displayed_omega_substituted"]
    q4 = r2["q"] ** 0.25
    assert abs(sub["a2"] - 16 * q4) < 1e-12 and abs(sub["b2"] - q4 / 4) < 1e-12
    assert abs(sub["abc2"] - q4**3) < 1e-15
