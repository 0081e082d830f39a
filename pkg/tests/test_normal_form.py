import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import KDS, KERR
from kerrtrap import flow, normal_form as nf, trapping
from kerrtrap.errors import KerrTrapError, PathEscape
from kerrtrap.phase_space import PhasePoint, project_to_characteristic

TOL = flow.DEFAULT_SPEC.tol


@pytest.fixture(scope="module")
def near_gamma():
    return trapping.sample_neighborhood(KERR, 8, 17)


def _manifold_point(params, d, eps, which):
    """Point off Gamma with phi^{which} = 0 and the other defining function eps |xi|."""
    prof = trapping.radial_profile(params, d.xi_t, d.xi_phi)
    e = eps * d.point.momentum_norm()
    sgn = -1.0 if which == "u" else 1.0  # phi^u = 0 needs c S = xi_r
    r = prof.inverse_s(-sgn * e / (2 * params.delta0))
    return project_to_characteristic(params, d.point.replace(r=r, xi_r=e / 2))


def test_unstable_and_stable_manifolds_straighten():
    for d in trapping.sample_trapped_set(KDS, 6, 1):
        on_u = _manifold_point(KDS, d, 1e-2, "u")
        on_s = _manifold_point(KDS, d, 1e-2, "s")
        assert abs(trapping.phi_u(KDS, on_u)) < 1e-14
        assert abs(nf.sp_core(KDS, on_u).x[0]) < 1e-10
        assert abs(nf.sp_core(KDS, on_s).xi[0]) < 1e-9
        img = nf.sp_core(KDS, d.point)
        assert abs(img.x[0]) < 1e-10 and abs(img.xi[0]) < 1e-10


def test_x3_vanishes_on_base():
    d = trapping.trapped_point(KERR, 0.3, 1.0)
    assert nf.x3_correction(KERR, d.point) == 0.0


def test_x3_path_independence(near_gamma):
    for pt in near_gamma:
        a = nf.x3_correction(KERR, pt, ("u", "v"))
        b = nf.x3_correction(KERR, pt, ("v", "u"))
        assert abs(a - b) < 10 * TOL


def test_x4_path_independence(near_gamma):
    for pt in near_gamma[:3]:
        vals = [nf.x4_correction(KERR, pt, order) for order in nf.leg_orders(3)]
        assert max(vals) - min(vals) < 10 * TOL


def test_quadrature_is_converged(near_gamma):
    fine = nf.Quadrature(16, 4)
    for pt in near_gamma[:3]:
        assert abs(nf.x3_correction(KERR, pt) - nf.x3_correction(KERR, pt, quad=fine)) < 1e-12
        assert abs(nf.x4_correction(KERR, pt) - nf.x4_correction(KERR, pt, quad=fine)) < 1e-12


def test_dilation_invariance(near_gamma):
    for pt in near_gamma:
        assert abs(nf.x3_correction(KERR, pt.scaled(2.0)) - nf.x3_correction(KERR, pt)) < 1e-8


def test_homogeneity_of_all_components(near_gamma):
    for pt in near_gamma[:4]:
        base = nf.sp(KERR, pt).as_tuple()
        for lam in (0.5, 3.0):
            img = nf.sp(KERR, pt.scaled(lam)).as_tuple()
            for k in range(4):
                assert abs(img[k] - base[k]) <= 1e-7 * max(1.0, abs(base[k]))
                assert abs(img[4 + k] - lam * base[4 + k]) <= 1e-7 * max(1.0, abs(lam * base[4 + k]))


def test_named_brackets(near_gamma):
    rep = nf.verify_canonical(KERR, near_gamma[0])
    m = rep.matrix
    i = {n: k for k, n in enumerate(nf.NAMES)}
    assert m[i["xi4"], i["x4"]] == pytest.approx(1.0, abs=1e-10)
    assert m[i["x2"], i["xi3"]] == 0.0
    # H_{phi-hat^u} T^s = 1
    assert m[i["x1"], i["xi1"]] == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(m, -m.T, atol=1e-14)


def test_canonical_residual_dual_and_fd(near_gamma):
    for pt in near_gamma[:4]:
        assert nf.verify_canonical(KERR, pt, "dual").max_residual < 1e-5
    for pt in near_gamma[:2]:
        assert nf.verify_canonical(KERR, pt, "fd", fd_step=1e-5).max_residual < 1e-3


def test_canonical_on_kerr_de_sitter():
    for pt in trapping.sample_neighborhood(KDS, 2, 9):
        assert nf.verify_canonical(KDS, pt).max_residual < 1e-5


def test_report_schema(near_gamma):
    from kerrtrap import schemas

    doc = nf.verify_canonical(KERR, near_gamma[0]).to_dict()
    schemas.validate(doc, schemas.BRACKET_RESIDUAL)
    assert doc["mode"] == "dual-number"


def test_unknown_mode(near_gamma):
    with pytest.raises(ValueError):
        nf.verify_canonical(KERR, near_gamma[0], "symbolic")


def test_base_derivative_oracle():
    # d_{xi_t} X3 on the base: closed form vs the differentiated algorithm
    dw = nf._x4_integrands(KERR, nf.DEFAULT_QUAD, nf.X3_ORDER)["w"]
    for w in (-0.4, 0.0, 0.25, 0.6):
        rc = trapping.critical_radius(KERR, 1.0, w)
        oracle = nf.base_d_xi_t_x3(KERR, rc, 0.0, w)
        assert float(dw(0.0, 0.0, w)) == pytest.approx(oracle, abs=1e-12)


def test_generating_rank(near_gamma):
    for pt in near_gamma:
        assert abs(nf.verify_generating_rank(KERR, pt)) > nf.GENERATING_RANK_FLOOR


def test_injectivity_spot_check():
    pts = trapping.sample_neighborhood(KERR, 40, 23)
    imgs = [nf.sp(KERR, p) for p in pts]
    rng = np.random.default_rng(0)
    for _ in range(100):
        i, j = rng.choice(len(pts), 2, replace=False)
        assert nf.image_separation(imgs[i], imgs[j]) >= 1e-6


def test_x4_offset_is_bounded_and_dilation_invariant(near_gamma):
    bound = nf.x4_offset_bound(KERR, near_gamma)
    assert bound < 10.0
    assert nf.x4_offset_bound(KERR, [p.scaled(4.0) for p in near_gamma]) == pytest.approx(bound, rel=1e-8)


def test_image_keeps_untouched_coordinates(near_gamma):
    pt = near_gamma[0].replace(t=2.0, phi=7.0)
    img = nf.sp(KERR, pt)
    assert img.x[1] == pt.theta
    assert img.xi[1:] == (pt.xi_theta, pt.xi_phi, pt.xi_t)
    assert 0 <= img.x[2] < 2 * math.pi
    assert img.path_report["x3_order"] == ["u", "v"]


def test_refuses_small_xi_t():
    pt = PhasePoint(0, 3.0, 1.0, 0, 1e-4, 0.0, 1.0, 1.0)
    with pytest.raises(KerrTrapError):
        nf.sp_core(KERR, pt)


def test_path_escape():
    with pytest.raises(PathEscape):
        nf.chart_inverse(KERR, 0.0, -5.0, 1.0, 0.0)


@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05))
def test_chart_inverse_round_trip(u, v):
    r, xr = nf.chart_inverse(KERR, u, v, 1.0, 0.2)
    u2, v2, w2 = nf._chart_point(KERR, r, xr, 1.0, 0.2)
    assert float(u2) == pytest.approx(u, abs=1e-13)
    assert float(v2) == pytest.approx(v, abs=1e-12)
