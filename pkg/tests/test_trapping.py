import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import HALF_PI, KDS, KERR, KERR_FAST, SCHW, SDS
from kerrtrap import trapping
from kerrtrap.errors import DomainError, NoInteriorCritical, NotNearTrapping
from kerrtrap.phase_space import PhasePoint, p_field, poisson_bracket, project_to_characteristic
from kerrtrap.spacetime import BlackHoleParams, delta_r, exterior

# mpmath findroot on dF/dr at 40 digits
KERR_RC = 2.8832177419263524
KERR_RC_XPHI_03 = 2.9187870781192482
# sqrt(2 F''(r_c) Delta(r_c)) at the same point
KERR_W = 9.8301226034549993
# (r - 3) sqrt(f~/Delta) at r = 3.1 with f~ = (F - 27)/0.01
SCHW_S_31 = 0.15575685307788271

# momentum directions (cos psi, sin psi) away from the xi_t -> 0 edge, where Gamma recedes
momenta = st.floats(-1.0, 1.0).map(lambda psi: (math.cos(psi), math.sin(psi)))


def test_big_f_examples():
    assert trapping.big_f(SCHW, 1.0, 0.0, 3.0) == pytest.approx(27.0, rel=1e-15)
    for r in (2.5, 4.0, 9.0):
        assert trapping.big_f(SCHW, 0.0, 1.0, r) == 0.0
    with pytest.raises(DomainError):
        trapping.big_f(SCHW, 1.0, 0.0, 1.9)


@given(momenta, st.floats(0.3, 4.0), st.floats(2.2, 8.0))
def test_big_f_quadratic(xi, lam, r):
    xt, xph = xi
    base = trapping.big_f(KDS, xt, xph, r)
    assert trapping.big_f(KDS, lam * xt, lam * xph, r) == pytest.approx(lam * lam * base, rel=1e-13)
    assert base >= 0


@given(momenta)
def test_photon_sphere_is_universal_without_spin(xi):
    xt, xph = xi
    assert abs(trapping.critical_radius(SCHW, xt, xph) - 3.0) < 1e-10
    assert abs(trapping.critical_radius(SDS, xt, xph) - 3.0) < 1e-10


def test_kerr_critical_radius_against_frozen_values():
    assert trapping.critical_radius(KERR, 1.0, 0.0) == pytest.approx(KERR_RC, abs=1e-13)
    assert trapping.critical_radius(KERR, 1.0, 0.3) == pytest.approx(KERR_RC_XPHI_03, abs=1e-13)


def test_kerr_critical_radius_dense_grid():
    lo = exterior(KERR)[0]
    r = np.linspace(lo + 1e-3, 10.0, 100_000)
    f = trapping.big_f(KERR, 1.0, 0.0, r)
    grid_rc = r[np.argmin(f)]
    assert abs(grid_rc - trapping.critical_radius(KERR, 1.0, 0.0)) < 2 * (r[1] - r[0])


def test_critical_radius_is_nondegenerate_minimum(params):
    for xt, xph in [(1.0, 0.0), (0.6, 0.8), (0.3, -0.95)]:
        rc = trapping.critical_radius(params, xt, xph)
        prof = trapping.radial_profile(params, xt, xph)
        assert abs(prof.big_f_prime(rc)) < 1e-10 * (xt * xt + xph * xph)
        f2, _, _ = trapping._taylor_f(prof, rc)
        assert f2 > 0


def test_monotone_potential_has_no_critical_point():
    # xi_t = 0 with spin leaves F = a^2 xi_phi^2 / Delta, decreasing on the whole exterior
    with pytest.raises(NoInteriorCritical):
        trapping.critical_radius(KERR, 0.0, 1.0)


def test_f_tilde_at_photon_sphere():
    for method in ("deflate", "switch"):
        assert trapping.f_tilde(SCHW, 1.0, 0.0, 3.0, method=method) == pytest.approx(9.0, rel=1e-12)


@pytest.mark.parametrize("xi", [(0.8, 0.6), (1.0, 0.0), (0.3, -0.9)])
def test_f_tilde_switch_continuity(xi):
    rc = trapping.critical_radius(KERR, *xi)
    eps = trapping.EPS_SWITCH * rc
    for side in (-1, 1):
        r_in = rc + side * eps * (1 - 1e-9)
        r_out = rc + side * eps * (1 + 1e-9)
        inner = trapping.f_tilde(KERR, *xi, r_in, method="switch")
        outer = trapping.f_tilde(KERR, *xi, r_out, method="switch")
        # the Taylor branch is accurate far beyond the seam tolerance
        assert inner == pytest.approx(trapping.f_tilde(KERR, *xi, r_in), rel=1e-10)
        # the raw quotient loses about half the mantissa at the seam, so the jump is
        # pure roundoff of order eps_mach F / (f~ h^2) ~ 1e-8
        assert inner == pytest.approx(outer, rel=2e-8)


@given(momenta, st.floats(-0.3, 0.3))
def test_f_tilde_methods_agree(xi, off):
    xt, xph = xi
    rc = trapping.critical_radius(KDS, xt, xph)
    r = rc * (1 + off)
    a = trapping.f_tilde(KDS, xt, xph, r, method="deflate")
    b = trapping.f_tilde(KDS, xt, xph, r, method="switch")
    assert a == pytest.approx(b, rel=1e-6)


@given(momenta, st.floats(-0.2, 0.2))
def test_f_tilde_bounded_below_near_crit(xi, off):
    xt, xph = xi
    rc = trapping.critical_radius(KERR, xt, xph)
    assert trapping.f_tilde(KERR, xt, xph, rc * (1 + off)) >= 0.05 * (xt * xt + xph * xph)


def test_s_function_examples():
    assert trapping.s_function(SCHW, 1.0, 0.0, 3.0) == 0.0
    s = trapping.s_function(SCHW, 1.0, 0.0, 3.1)
    assert s == pytest.approx(SCHW_S_31, rel=1e-14)
    # the naive signed square root of F - F(r_c) agrees at this distance
    naive = math.sqrt((trapping.big_f(SCHW, 1.0, 0.0, 3.1) - 27.0) / delta_r(SCHW, 3.1))
    assert s == pytest.approx(naive, rel=1e-12)
    assert trapping.s_function(SCHW, 1.0, 0.0, 2.9) < 0


@given(momenta)
def test_s_function_increasing_near_crit(xi):
    xt, xph = xi
    rc = trapping.critical_radius(KDS, xt, xph)
    r = rc * np.linspace(0.8, 1.2, 41)
    s = trapping.s_function(KDS, xt, xph, r)
    assert np.all(np.diff(s) > 0)


@given(momenta, st.floats(-0.01, 0.01))
def test_inverse_s_round_trip(xi, y):
    xt, xph = xi
    prof = trapping.radial_profile(KDS, xt, xph)
    r = prof.inverse_s(y)
    assert abs(prof.s(r) - y) < 1e-14


def test_defining_functions_on_gamma(params):
    d = trapping.trapped_point(params, 0.3, 1.1)
    norm = d.point.momentum_norm()
    assert abs(trapping.phi_u(params, d.point)) < 1e-10 * norm
    assert abs(trapping.phi_s(params, d.point)) < 1e-10 * norm
    bumped = d.point.replace(xi_r=1e-3)
    assert trapping.phi_u(params, bumped) == pytest.approx(1e-3, abs=1e-12)
    assert trapping.phi_s(params, bumped) == pytest.approx(1e-3, abs=1e-12)


@given(st.floats(0.3, 5.0))
def test_defining_function_homogeneity(lam):
    pt = PhasePoint(0, 3.1, 1.0, 0, 0.9, 0.05, 0.6, 0.3)
    f = trapping.phi_u_field(KDS)
    assert float(f(pt.scaled(lam))) == pytest.approx(lam * float(f(pt)), rel=1e-12)


def test_schwarzschild_expansion_rate():
    d = trapping.trapped_point(SCHW, 0.0, HALF_PI)
    wu, ws = trapping.expansion_rate(SCHW, d.point)
    assert wu == pytest.approx(6 * math.sqrt(3), rel=1e-13)
    assert ws == wu


def test_kerr_expansion_rate_against_frozen_value():
    d = trapping.trapped_point(KERR, 0.0, 1.2)
    wu, _ = trapping.expansion_rate(KERR, d.point)
    assert wu == pytest.approx(KERR_W, rel=1e-13)


def test_expansion_rate_refuses_far_points():
    pt = project_to_characteristic(KERR, PhasePoint(0, 6.0, 1.0, 0, 1.0, 0.5, 1.0, 0.1))
    with pytest.raises(NotNearTrapping):
        trapping.expansion_rate(KERR, pt)


def test_rate_identity_on_characteristic_set(params):
    c = 0
    for pt in trapping.sample_neighborhood(params, 15, 11):
        nm = math.hypot(pt.xi_t, pt.xi_phi)
        wu, ws = trapping.expansion_rate(params, pt)
        hu = poisson_bracket(p_field(params), trapping.phi_u_field(params), pt)
        hs = poisson_bracket(p_field(params), trapping.phi_s_field(params), pt)
        scale = pt.momentum_norm() ** 2
        assert abs(hu + wu * nm * trapping.phi_u(params, pt)) < 1e-6 * scale
        assert abs(hs - ws * nm * trapping.phi_s(params, pt)) < 1e-6 * scale
        c += 1
    assert c == 15


def test_product_structure_sign():
    for pt in trapping.sample_neighborhood(KDS, 30, 2, on_characteristic=False):
        rc = trapping.critical_radius(KDS, pt.xi_t, pt.xi_phi)
        prod = trapping.phi_u(KDS, pt) * trapping.phi_s(KDS, pt)
        f = trapping.big_f(KDS, pt.xi_t, pt.xi_phi, pt.r)
        fc = trapping.big_f(KDS, pt.xi_t, pt.xi_phi, rc)
        other = delta_r(KDS, pt.r) * pt.xi_r**2 - KDS.delta0**2 * (f - fc)
        assert np.sign(prod) == np.sign(other)


def test_transversality_on_neighborhood(params):
    u, s = trapping.phi_hat_u_field(params), trapping.phi_hat_s_field(params)
    for pt in trapping.sample_neighborhood(params, 20, 4):
        assert poisson_bracket(u, s, pt) > 0


def test_sample_trapped_set_invariants_and_determinism():
    a = trapping.sample_trapped_set(KDS, 25, seed=9)
    b = trapping.sample_trapped_set(KDS, 25, seed=9)
    assert [d.point for d in a] == [d.point for d in b]
    assert len(a) == 25
    for d in a:
        assert d.xi_t > trapping.XI_FLOOR
        assert d.point.xi_r == 0.0 and d.point.r == d.r_crit
        assert abs(p_field(KDS)(d.point)) < 1e-10 * d.point.momentum_norm() ** 2
        assert d.f_at_crit > 0


def test_sample_seeds_differ():
    a = trapping.sample_trapped_set(KERR, 3, seed=0)
    b = trapping.sample_trapped_set(KERR, 3, seed=1)
    assert a[0].point != b[0].point


@pytest.mark.parametrize("bh", [KERR, KERR_FAST], ids=["a0.5", "a0.9"])
def test_nu_bounds_small_grid(bh):
    # a = 0.9: the minimum sits at the end of the admissible range, where a Newton polish overshoots
    rb = trapping.nu_bounds(bh, (64, 32, 2) if bh is KERR_FAST else (16, 8, 2))
    assert 0 < rb.nu_min <= rb.nu_max
    for d, target in ((rb.argmin, rb.nu_min), (rb.argmax, rb.nu_max)):
        w, _ = trapping.expansion_rate(bh, d.point)
        assert w == pytest.approx(target, rel=1e-9)
        # degree-0 homogeneity: the same direction at a rescaled momentum gives the same rate
        w3, _ = trapping.expansion_rate(bh, d.point.scaled(3.0))
        assert w3 == pytest.approx(w, rel=1e-12)
    # every grid value lies inside the reported bounds
    for d in trapping.sample_trapped_set(bh, 200, 3):
        w, _ = trapping.expansion_rate(bh, d.point)
        assert rb.nu_min - 1e-9 <= w <= rb.nu_max + 1e-9


@given(st.floats(-1.3, 1.3))
def test_schwarzschild_rate_only_sees_xi_t(psi):
    # F = r^4 xi_t^2 / Delta, so the normalised rate is 6 sqrt(3) |cos psi|
    d = trapping.trapped_point(SCHW, psi, HALF_PI)
    wu, _ = trapping.expansion_rate(SCHW, d.point)
    assert wu == pytest.approx(6 * math.sqrt(3) * abs(math.cos(psi)), rel=1e-12)


def test_schwarzschild_rate_bounds():
    rb = trapping.nu_bounds(SCHW, (9, 4, 2))
    assert rb.nu_max == pytest.approx(6 * math.sqrt(3), rel=1e-12)
    assert abs(rb.argmax.xi_phi) < 1e-6
    # the minimum sits where Gamma stops admitting a real xi_theta
    assert 0 < rb.nu_min < rb.nu_max


def test_sampling_skips_are_reported():
    # rapidly spinning: retrograde directions with tiny xi_t lose the interior critical point
    p = BlackHoleParams(1.0, 0.99, 0.0)
    sample = trapping.sample_trapped_set(p, 50, seed=1)
    assert sample.draws == len(sample) + sample.skipped
