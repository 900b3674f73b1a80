import numpy as np
import pytest

from geosobolev import Point, exterior_derivative, hodge_star_at, inner_product
from geosobolev.fields import BumpCoeff, form_bump, scalar_bump
from geosobolev.forms import (FormError, FormField, PolynomialCoeff, codifferential_values,
                              complement, complement_sign, dense_to_coeff_arrays,
                              hodge_star_values, increasing_indices, wedge_coeff_arrays)


def random_poly_form(rng, n, p, lo, hi, n_terms=4, max_deg=2):
    coeffs = {}
    for J in increasing_indices(n, p):
        terms = {}
        for _ in range(n_terms):
            exps = tuple(rng.integers(0, max_deg + 1, size=n))
            terms[exps] = terms.get(exps, 0.0) + rng.normal()
        coeffs[J] = PolynomialCoeff(n, terms)
    return FormField(n, p, coeffs, lo, hi)


class TestExteriorDerivative:
    def test_x1_dx2(self, euclid2):
        ff = FormField(2, 1, {(1,): PolynomialCoeff(2, {(1, 0): 1.0})},
                       euclid2.window.lo, euclid2.window.hi)
        d = exterior_derivative(ff)
        pts = np.array([[0.3, 0.4], [-1.0, 0.2]])
        assert np.allclose(d.coeff_values(pts)[(0, 1)], 1.0)

    def test_d_of_scalar_is_gradient(self, poincare):
        u = scalar_bump(poincare.window, [0.1, 0.0], [0.4, 0.35], 1.3, slope=[0.2, -0.1])
        du = exterior_derivative(u)
        pts = np.random.default_rng(1).uniform(-0.2, 0.2, size=(30, 2))
        dense = du.values_dense(pts)
        assert np.allclose(dense, u.coeffs[()].grad(pts))

    def test_top_degree_error(self, euclid2):
        ff = FormField(2, 2, {(0, 1): PolynomialCoeff(2, {(0, 0): 1.0})},
                       euclid2.window.lo, euclid2.window.hi)
        with pytest.raises(FormError):
            exterior_derivative(ff)

    def test_hand_expanded_example(self, euclid3):
        # w = x1 x3 dx2 on R^3: dw = x3 dx1^dx2 - x1 dx2^dx3, and d(dw) = 0
        ff = FormField(3, 1, {(1,): PolynomialCoeff(3, {(1, 0, 1): 1.0})},
                       euclid3.window.lo, euclid3.window.hi)
        d = exterior_derivative(ff)
        pts = np.array([[0.5, -0.2, 1.1], [1.0, 0.3, -0.4]])
        cv = d.coeff_values(pts)
        assert np.allclose(cv[(0, 1)], pts[:, 2])
        assert np.allclose(cv[(1, 2)], -pts[:, 0])
        dd = exterior_derivative(d)
        assert np.max(np.abs(dd.values_dense(pts))) <= 1e-14

    def test_dd_zero_on_100_random_polynomial_forms(self, euclid3):
        rng = np.random.default_rng(42)
        pts = rng.uniform(-1.0, 1.0, size=(20, 3))
        for _ in range(100):
            ff = random_poly_form(rng, 3, 1, euclid3.window.lo, euclid3.window.hi)
            dd = exterior_derivative(exterior_derivative(ff))
            second_scale = max(np.max(np.abs(ff.partials_dense(pts))), 1.0)
            assert np.max(np.abs(dd.values_dense(pts))) <= 1e-6 * second_scale


class TestHodgeStar:
    def test_flat_star_r2(self, euclid2):
        g = np.broadcast_to(np.eye(2), (1, 2, 2))
        dx1 = np.zeros((1, 2))
        dx1[0, 0] = 1.0
        assert np.allclose(hodge_star_values(g, dx1, 1, "flat_chart"), [[0.0, 1.0]])
        top = np.zeros((1, 2, 2))
        top[0, 0, 1], top[0, 1, 0] = 1.0, -1.0
        assert hodge_star_values(g, top, 2, "flat_chart")[0] == pytest.approx(1.0)

    def test_metric_star_poincare_middle_degree(self, poincare):
        out = hodge_star_at(poincare, Point("disk", [0.0, 0.0]), [1.0, 0.0], 1, "metric")
        assert np.allclose(out, [0.0, 1.0])

    @pytest.mark.parametrize("flavor", ["metric", "flat_chart"])
    @pytest.mark.parametrize("n,p", [(2, 1), (3, 1), (3, 2), (4, 2)])
    def test_double_star_sign(self, flavor, n, p, poincare):
        rng = np.random.default_rng(n * 10 + p)
        from geosobolev import make_builtin
        M = make_builtin("poincare_ball", n, window=(np.zeros(n), np.full(n, 0.3)))
        pts = rng.uniform(-0.2, 0.2, size=(6, n))
        g = M.metric_on(pts)
        coeffs = {J: rng.normal(size=6) for J in increasing_indices(n, p)}
        from geosobolev.forms import coeff_arrays_to_dense
        vals = coeff_arrays_to_dense(coeffs, 6, n, p)
        out = hodge_star_values(g, hodge_star_values(g, vals, p, flavor), n - p, flavor)
        sign = (-1.0) ** (p * (n - p))
        if flavor == "flat_chart":
            assert np.array_equal(out, sign * vals)
        else:
            assert np.allclose(out, sign * vals, rtol=1e-12)

    def test_wedge_pairing_identity_metric(self, poincare):
        # (w, eta) dv = w ^ *eta, pointwise, random form values
        rng = np.random.default_rng(5)
        from geosobolev.forms import coeff_arrays_to_dense
        from geosobolev.geometry import tensor_inner_batch
        n, p = 2, 1
        pts = rng.uniform(-0.3, 0.3, size=(8, n))
        g = poincare.metric_on(pts)
        w = coeff_arrays_to_dense({J: rng.normal(size=8) for J in increasing_indices(n, p)}, 8, n, p)
        eta = coeff_arrays_to_dense({J: rng.normal(size=8) for J in increasing_indices(n, p)}, 8, n, p)
        star_eta = hodge_star_values(g, eta, p, "metric")
        wedge = wedge_coeff_arrays(dense_to_coeff_arrays(w, n, p), p,
                                   dense_to_coeff_arrays(star_eta, n, n - p), n - p, n)
        top = wedge[tuple(range(n))]
        ginv = np.linalg.inv(g)
        expect = tensor_inner_batch(ginv, w, eta, p) * np.sqrt(np.linalg.det(g))
        assert np.allclose(top, expect, rtol=1e-10)

    def test_flat_star_sum_of_squares_identity(self, euclid2):
        # w ^ *w = sum_J |a_J|^2 dx for the coordinate star
        rng = np.random.default_rng(9)
        n, p = 2, 1
        a = {J: rng.normal(size=4) for J in increasing_indices(n, p)}
        from geosobolev.forms import coeff_arrays_to_dense
        vals = coeff_arrays_to_dense(a, 4, n, p)
        g = np.broadcast_to(np.eye(n), (4, n, n))
        star = hodge_star_values(g, vals, p, "flat_chart")
        wedge = wedge_coeff_arrays(dense_to_coeff_arrays(vals, n, p), p,
                                   dense_to_coeff_arrays(star, n, n - p), n - p, n)
        assert np.allclose(wedge[(0, 1)], sum(v**2 for v in a.values()))

    def test_complement_sign_parity(self):
        assert complement((0,), 2) == (1,)
        assert complement_sign((0,), 2) == 1
        assert complement_sign((1,), 2) == -1


class TestCodifferential:
    def test_flat_divergence_sign(self, euclid2):
        # d*(a dx1 + b dx2) = -(d1 a + d2 b), the sign the adjointness fixes
        a = PolynomialCoeff(2, {(2, 0): 1.0})
        b = PolynomialCoeff(2, {(1, 1): 3.0})
        w = FormField(2, 1, {(0,): a, (1,): b}, euclid2.window.lo, euclid2.window.hi)
        pts = np.array([[0.5, 0.25], [-0.3, 0.8]])
        expect = -(2.0 * pts[:, 0] + 3.0 * pts[:, 0])
        assert np.allclose(codifferential_values(euclid2, w, pts, "metric"), expect)
        assert np.allclose(codifferential_values(euclid2, w, pts, "flat_chart"), expect)

    def test_constant_coefficients_flat(self, euclid2):
        from geosobolev.forms import ConstantCoeff
        w = FormField(2, 1, {(0,): ConstantCoeff(2.0), (1,): ConstantCoeff(-1.0)},
                      euclid2.window.lo, euclid2.window.hi)
        pts = np.array([[0.1, 0.9]])
        assert np.allclose(codifferential_values(euclid2, w, pts, "metric"), 0.0)

    def test_degree_zero_error(self, euclid2):
        u = scalar_bump(euclid2.window, [0.0, 0.0], [0.5, 0.5])
        with pytest.raises(FormError):
            codifferential_values(euclid2, u, np.zeros((1, 2)), "metric")

    def test_adjointness_on_poincare(self, poincare):
        # <d eta, w>_{L^2} = <eta, d* w>_{L^2} for compactly supported bumps
        win = poincare.window
        eta = scalar_bump(win, [0.05, -0.05], [0.4, 0.35], 1.3, slope=[0.4, -0.2])
        w = form_bump(win, 1, {(0,): BumpCoeff([0.0, 0.1], [0.35, 0.4], 0.8),
                               (1,): BumpCoeff([-0.1, 0.0], [0.4, 0.35], 1.1)})
        lhs = inner_product(poincare, exterior_derivative(eta), w, nodes=64)
        rhs = inner_product(poincare, eta, w, nodes=64,
                            order2_values=lambda pts: codifferential_values(poincare, w, pts, "metric"))
        norm_product = abs(lhs) + abs(rhs) + 1e-12
        assert abs(lhs - rhs) <= 1e-4 * norm_product

    def test_flat_flavor_matches_metric_on_euclidean(self, euclid2):
        rng = np.random.default_rng(3)
        w = random_poly_form(rng, 2, 1, euclid2.window.lo, euclid2.window.hi)
        pts = rng.uniform(-1, 1, size=(12, 2))
        assert np.allclose(codifferential_values(euclid2, w, pts, "metric"),
                           codifferential_values(euclid2, w, pts, "flat_chart"), atol=1e-10)
