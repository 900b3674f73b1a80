import numpy as np
import pytest

from geosobolev import Point, admissible_radius, is_admissible, make_builtin, radius_field
from geosobolev.admissible import AdmissibilityError, verify_slow_variation

EPS = 0.1

# closed-form transition radius for the Poincare disk at the origin:
# the normalized-chart metric is (1 - |z|^2/4)^(-2) I, so condition (*) caps
# R' at 2 sqrt(1 - (1+eps)^(-1/2))
POINCARE_R_PRIME_0 = 2.0 * np.sqrt(1.0 - (1.0 + EPS) ** -0.5)


class TestIsAdmissible:
    def test_euclidean_unit_ball_any_class(self, euclid2):
        for cls in (0, 1):
            ok, _ = is_admissible(euclid2, Point("main", [0.7, -0.3]), 1.0, cls, EPS)
            assert ok

    def test_leaves_chart_reason(self, poincare):
        ok, info = is_admissible(poincare, Point("disk", [0.9, 0.0]), 3.0, 0, EPS)
        assert not ok and info["reason"] == "leaves chart"

    def test_cusp_deep_large_ball_rejected(self):
        M = make_builtin("hyperbolic_cusp", 2, {"T": 5.0})
        ok, _ = is_admissible(M, Point("cusp", [4.0, np.pi]), 1.0, 1, EPS)
        assert not ok

    def test_monotone_on_bisection_trace(self, poincare):
        trace = []
        admissible_radius(poincare, Point("disk", [0.25, 0.1]), 0, EPS, trace=trace)
        good = [R for R, ok in trace if ok]
        bad = [R for R, ok in trace if not ok]
        if good and bad:
            assert max(good) <= min(bad)


class TestAdmissibleRadius:
    def test_euclidean_exactly_one(self, euclid2):
        r, rp = admissible_radius(euclid2, Point("main", [1.9, -1.9]), 0, EPS)
        assert r == 1.0 and rp == 4.0

    def test_poincare_origin_vs_dense_oracle(self, poincare):
        r, rp = admissible_radius(poincare, Point("disk", [0.0, 0.0]), 0, EPS)
        assert rp == pytest.approx(POINCARE_R_PRIME_0, rel=0.02)
        # dense-sampling oracle at ~10x resolution confirms the transition
        _, rp_dense = admissible_radius(poincare, Point("disk", [0.0, 0.0]), 0, EPS,
                                        sampler_m=12)
        assert rp == pytest.approx(rp_dense, rel=0.02)

    def test_rotational_symmetry(self, poincare):
        r1, _ = admissible_radius(poincare, Point("disk", [0.3, 0.0]), 0, EPS)
        r2, _ = admissible_radius(poincare, Point("disk", [0.0, 0.3]), 0, EPS)
        r3, _ = admissible_radius(poincare, Point("disk", [0.3 / np.sqrt(2)] * 2), 0, EPS)
        assert r1 == pytest.approx(r2, rel=0.02)
        assert r1 == pytest.approx(r3, rel=0.03)

    def test_cusp_radius_nonincreasing_in_depth(self, cusp):
        rs = [admissible_radius(cusp, Point("cusp", [t, np.pi]), 0, EPS)[0]
              for t in np.linspace(1.0, 6.0, 11)]
        rs = np.array(rs)
        assert np.all(rs[1:] <= rs[:-1] * 1.02)
        assert rs[-1] < 0.5 * rs[0]  # genuine decay by the window's deep end

    def test_sampler_resolution_stability(self, poincare, cusp):
        for M, coords in ((poincare, [0.2, 0.1]), (cusp, [3.0, np.pi])):
            p = Point(M.window.chart_id, np.asarray(coords))
            r9, _ = admissible_radius(M, p, 1, EPS, sampler_m=9)
            r10, _ = admissible_radius(M, p, 1, EPS, sampler_m=10)
            assert r9 == pytest.approx(r10, rel=0.02)

    def test_degenerate_point_error(self):
        M = make_builtin("poincare_ball", 2, window=(np.zeros(2), np.full(2, 0.6)))
        with pytest.raises(AdmissibilityError):
            admissible_radius(M, Point("disk", [0.95 - 1e-9, 0.0]), 0, EPS)


class TestRadiusField:
    def test_euclidean_all_ones(self, euclid2):
        f = radius_field(euclid2, euclid2.window.grid(10), 0, EPS)
        assert np.all(f.values == 1.0)

    def test_class1_below_class0(self, poincare_rfield0, poincare_rfield1):
        assert np.all(poincare_rfield1.values <= poincare_rfield0.values + 1e-12)
        assert np.all(poincare_rfield0.values <= 1.0)
        assert np.all(poincare_rfield0.values > 0.0)

    def test_rotational_symmetry_on_rings(self, poincare_rfield0):
        f = poincare_rfield0
        radii = np.linalg.norm(f.grid, axis=1)
        ring = np.abs(radii - radii[0]) < 1e-9
        if ring.sum() >= 2:
            vals = f.values[ring]
            assert vals.max() / vals.min() <= 1.03

    def test_nearest_lookup(self, poincare_rfield0):
        f = poincare_rfield0
        v = f.nearest_values(f.grid[:5])
        assert np.array_equal(v, f.values[:5])
        assert f.weight(f.grid[:3], 0.0) == pytest.approx([1.0, 1.0, 1.0])


class TestSlowVariation:
    def test_euclidean_trivial(self, euclid2):
        rep = verify_slow_variation(euclid2, 0, EPS, 20, np.random.default_rng(0))
        assert not rep["band_violations"] and not rep["lipschitz_violations"]

    def test_poincare(self, poincare):
        rep = verify_slow_variation(poincare, 0, EPS, 60, np.random.default_rng(1))
        assert rep["pairs"] >= 60
        assert not rep["band_violations"]
        assert not rep["lipschitz_violations"]

    def test_cusp_class1(self, cusp):
        rep = verify_slow_variation(cusp, 1, EPS, 60, np.random.default_rng(2))
        assert rep["pairs"] >= 60
        assert not rep["band_violations"]
        assert not rep["lipschitz_violations"]
