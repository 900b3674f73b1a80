import numpy as np
import pytest

from geosobolev import (Point, TensorValue, christoffel, cmt_check, covariant_derivative,
                        make_ball, pointwise_norm, ricci_eigenvalues, sectional_curvature)
from geosobolev.fields import scalar_bump
from geosobolev.forms import ConstantCoeff, FormField, nabla_values
from geosobolev.geometry import GeometryError, christoffel_batch
from geosobolev.manifold import fd_metric_partials


def brute_force_christoffel(M, coords, chart_id):
    """Independent oracle: the defining formula with finite-difference partials."""
    pts = np.atleast_2d(coords)
    chart = M.chart(chart_id)
    g = chart.metric_at(pts)[0]
    dg = fd_metric_partials(chart.metric, pts, 1e-5)[0]
    ginv = np.linalg.inv(g)
    n = g.shape[0]
    out = np.zeros((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                for l in range(n):
                    out[k, i, j] += 0.5 * ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
    return out


class TestChristoffel:
    def test_euclidean_zero(self, euclid2):
        assert np.all(christoffel(euclid2, Point("main", [0.2, 0.9])) == 0.0)

    def test_cusp_values_and_oracle(self, cusp):
        gam = christoffel(cusp, Point("cusp", [1.0, 0.5]))
        assert gam[0, 1, 1] == pytest.approx(np.exp(-2.0), rel=1e-10)
        assert gam[1, 0, 1] == pytest.approx(-1.0, rel=1e-10)
        oracle = brute_force_christoffel(cusp, [1.0, 0.5], "cusp")
        assert np.allclose(gam, oracle, atol=1e-6)

    def test_poincare_conformal_closed_form(self, poincare):
        # conformal metric e^{2f} delta with f = log(2/(1-|x|^2)):
        # G^k_ij = d_j f delta_ik + d_i f delta_jk - d_k f delta_ij
        x = np.array([0.5, 0.0])
        gam = christoffel(poincare, Point("disk", x))
        df = 2.0 * x / (1.0 - x @ x)
        n = 2
        expect = np.zeros((n, n, n))
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    expect[k, i, j] = (df[j] * (i == k) + df[i] * (j == k) - df[k] * (i == j))
        assert np.allclose(gam, expect, rtol=1e-12)
        assert gam[0, 0, 0] == pytest.approx(4.0 / 3.0, rel=1e-12)

    @pytest.mark.parametrize("kind", ["poincare_ball", "sphere_stereo", "hyperbolic_cusp"])
    def test_symmetry_in_lower_indices(self, kind, all_builtins):
        M = all_builtins[kind]
        rng = np.random.default_rng(3)
        pts = M.window.lo + (M.window.hi - M.window.lo) * rng.uniform(size=(50, 2))
        gam = christoffel_batch(M, pts)
        assert np.allclose(gam, np.swapaxes(gam, 2, 3), atol=1e-12)


class TestCurvature:
    def test_flat(self, euclid2):
        K = sectional_curvature(euclid2, Point("main", [0.7, -0.3]),
                                np.array([1.0, 0.0]), np.array([0.3, 1.0]))
        assert abs(K) <= 1e-6

    def test_poincare_minus_one(self, poincare):
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = rng.uniform(-0.4, 0.4, size=2)
            K = sectional_curvature(poincare, Point("disk", x),
                                    rng.normal(size=2), rng.normal(size=2))
            assert K == pytest.approx(-1.0, abs=1e-4)

    def test_sphere_plus_one(self, sphere):
        K = sectional_curvature(sphere, Point("stereo", [0.3, -0.2]),
                                np.array([1.0, 0.1]), np.array([-0.2, 1.0]))
        assert K == pytest.approx(1.0, abs=1e-4)

    def test_degenerate_plane(self, poincare):
        with pytest.raises(GeometryError):
            sectional_curvature(poincare, Point("disk", [0.1, 0.1]),
                                np.array([1.0, 2.0]), np.array([2.0, 4.0]))

    @pytest.mark.parametrize("kind,K", [("poincare_ball", -1.0), ("sphere_stereo", 1.0),
                                        ("hyperbolic_cusp", -1.0)])
    def test_ricci_matches_sectional(self, kind, K, all_builtins):
        # constant curvature: eigenvalues of g^{-1} Ric / (n-1) equal K
        M = all_builtins[kind]
        mid = 0.5 * (M.window.lo + M.window.hi)
        eig = ricci_eigenvalues(M, Point(M.window.chart_id, mid))
        assert np.allclose(eig, K, atol=1e-3)


class TestCovariantDerivative:
    def test_flat_equals_partials(self, euclid2):
        u = scalar_bump(euclid2.window, [0.2, -0.1], [0.8, 0.7], 1.4, slope=[0.3, -0.2])
        pts = np.array([[0.2, 0.0], [0.5, 0.3]])
        nab = nabla_values(euclid2, u, pts)
        assert np.allclose(nab, u.partials_dense(pts))

    def test_constant_scalar_zero(self, poincare):
        ff = FormField(2, 0, {(): ConstantCoeff(1.0)},
                       poincare.window.lo, poincare.window.hi)
        tv = covariant_derivative(poincare, ff, Point("disk", [0.2, 0.1]))
        assert np.allclose(tv.components, 0.0)

    def test_cusp_basis_one_forms(self, cusp):
        # nabla(d theta) at (1,0): (t,theta)-component +1; nabla(dt): (theta,theta) = -e^{-2}
        lo, hi = cusp.window.lo, cusp.window.hi
        dtheta = FormField(2, 1, {(1,): ConstantCoeff(1.0)}, lo, hi)
        dt = FormField(2, 1, {(0,): ConstantCoeff(1.0)}, lo, hi)
        p = Point("cusp", [1.0, 0.4])
        nab_dtheta = covariant_derivative(cusp, dtheta, p).components
        nab_dt = covariant_derivative(cusp, dt, p).components
        assert nab_dtheta[0, 1] == pytest.approx(1.0, rel=1e-10)
        assert nab_dt[1, 1] == pytest.approx(-np.exp(-2.0), rel=1e-10)

    def test_brute_force_contraction_oracle(self, cusp):
        # (nabla w)_{k j} = d_j w_k - G^l_{kj} w_l, expanded with explicit loops
        p = Point("cusp", [1.5, 2.0])
        u = scalar_bump(cusp.window, [1.5, 2.0], [0.5, 0.6], 2.0, slope=[0.1, 0.2])
        du = u.coeffs[()].grad(p.coords[None, :])[0]
        w = FormField(2, 1, {(0,): ConstantCoeff(du[0]), (1,): ConstantCoeff(du[1])},
                      cusp.window.lo, cusp.window.hi)
        nab = covariant_derivative(cusp, w, p).components
        gam = christoffel(cusp, p)
        expect = np.zeros((2, 2))
        for k in range(2):
            for j in range(2):
                expect[k, j] = -sum(gam[l, k, j] * du[l] for l in range(2))
        assert np.allclose(nab, expect, atol=1e-12)


class TestPointwiseNorm:
    def test_flat_one_form(self, euclid2):
        p = Point("main", [0.0, 0.0])
        tv = TensorValue(p, np.array([3.0, 4.0]), form_rank=1)
        assert pointwise_norm(euclid2, tv) == pytest.approx(5.0)

    def test_poincare_dx_half(self, poincare):
        p = Point("disk", [0.0, 0.0])
        tv = TensorValue(p, np.array([1.0, 0.0]), form_rank=1)
        assert pointwise_norm(poincare, tv) == pytest.approx(0.5)

    def test_zero_tensor(self, cusp):
        p = Point("cusp", [2.0, 1.0])
        tv = TensorValue(p, np.zeros((2, 2)), form_rank=1)
        assert pointwise_norm(cusp, tv) == 0.0


class TestMetricCompatibility:
    def test_product_rule(self, poincare):
        # d(u, v) = (nabla u, v) + (u, nabla v) for bump one-forms, via FD of (u,v)
        from geosobolev.fields import BumpCoeff, form_bump
        from geosobolev.geometry import tensor_inner_batch

        win = poincare.window
        u = form_bump(win, 1, {(0,): BumpCoeff([0.05, 0.0], [0.45, 0.4], 1.2),
                               (1,): BumpCoeff([0.0, 0.1], [0.4, 0.45], 0.7)})
        v = form_bump(win, 1, {(0,): BumpCoeff([-0.1, 0.05], [0.5, 0.4], 0.9),
                               (1,): BumpCoeff([0.1, -0.05], [0.4, 0.5], 1.1)})
        rng = np.random.default_rng(7)
        pts = rng.uniform(-0.15, 0.15, size=(40, 2))
        h = 1e-5
        lhs = np.empty((40, 2))
        for j in range(2):
            dp = np.zeros(2)
            dp[j] = h
            for sgn, tgt in ((1.0, pts + dp), (-1.0, pts - dp)):
                ginv = np.linalg.inv(poincare.metric_on(tgt))
                ip = tensor_inner_batch(ginv, u.values_dense(tgt), v.values_dense(tgt), 1)
                if sgn > 0:
                    plus = ip
                else:
                    lhs[:, j] = (plus - ip) / (2 * h)
        ginv = np.linalg.inv(poincare.metric_on(pts))
        nu = nabla_values(poincare, u, pts)
        nv = nabla_values(poincare, v, pts)
        uv = u.values_dense(pts)
        vv = v.values_dense(pts)
        rhs = np.empty((40, 2))
        for j in range(2):
            rhs[:, j] = (tensor_inner_batch(ginv, nu[..., j], vv, 1)
                         + tensor_inner_batch(ginv, uv, nv[..., j], 1))
        scale = np.max(np.abs(rhs)) + 1e-12
        assert np.max(np.abs(lhs - rhs)) <= 1e-4 * scale


class TestCmt:
    def test_flat_vacuous(self, euclid2):
        ball = make_ball(euclid2, Point("main", [0.0, 0.0]), 1, 0.1)
        rep = cmt_check(euclid2, ball)
        assert rep["vacuous"] and rep["reason"] == "flat"

    def test_poincare_within_paper_factor(self, poincare):
        ball = make_ball(poincare, Point("disk", [0.3, 0.0]), 1, 0.1)
        rep = cmt_check(poincare, ball)
        assert not rep["vacuous"]
        assert rep["max_ratio"] <= 1.65 and not rep["violated"]

    def test_cusp_within_paper_factor(self, cusp):
        ball = make_ball(cusp, Point("cusp", [1.0, np.pi]), 1, 0.1)
        rep = cmt_check(cusp, ball)
        assert rep["max_ratio"] <= 1.65 and not rep["violated"]
