import json

import numpy as np
import pytest
from scipy.stats import qmc

from geosobolev import ManifoldError, Point, load_manifold, make_builtin
from geosobolev.manifold import fd_metric_partials


def window_samples(M, count=1000):
    sob = qmc.Sobol(d=M.dimension, scramble=False)
    u = sob.random_base2(int(np.ceil(np.log2(count))))
    return M.window.lo + (M.window.hi - M.window.lo) * u


class TestBuiltinMetrics:
    def test_euclidean_identity(self, euclid2):
        assert np.array_equal(euclid2.metric_at(Point("main", [0.3, -0.7])), np.eye(2))

    def test_poincare_values(self, poincare):
        assert np.allclose(poincare.metric_at(Point("disk", [0.0, 0.0])), 4.0 * np.eye(2))
        g = poincare.metric_at(Point("disk", [0.5, 0.0]))
        assert np.allclose(g, (64.0 / 9.0) * np.eye(2))

    def test_sphere_unit_circle_factor_one(self, sphere):
        g = sphere.metric_at(Point("stereo", [1.0, 0.0]))
        assert np.allclose(g, np.eye(2))

    def test_cusp_warped_metric(self, cusp):
        g = cusp.metric_at(Point("cusp", [2.0, 0.0]))
        assert np.allclose(g, np.diag([1.0, np.exp(-4.0)]))

    def test_unknown_kind(self):
        with pytest.raises(ManifoldError):
            make_builtin("torus", 2)

    def test_window_touching_singular_locus(self):
        with pytest.raises(ManifoldError):
            make_builtin("poincare_ball", 2, window=(np.zeros(2), np.array([0.9, 0.9])))

    def test_point_outside_domain(self, poincare):
        with pytest.raises(ManifoldError):
            poincare.metric_at(Point("disk", [0.99, 0.0]))


class TestMetricPartials:
    def test_euclidean_zero(self, euclid2):
        dg = euclid2.metric_partials_at(Point("main", [0.1, 0.2]))
        assert np.all(dg == 0.0)

    def test_cusp_single_entry(self, cusp):
        dg = cusp.metric_partials_at(Point("cusp", [1.0, 0.0]))
        expect = np.zeros((2, 2, 2))
        expect[0, 1, 1] = -2.0 * np.exp(-2.0)
        assert np.allclose(dg, expect)

    def test_poincare_partial_value_vs_fd_oracle(self, poincare):
        # d/dx1 [4 / (1 - x1^2)^2] at 0.5 = 16*0.5/0.75^3
        p = Point("disk", [0.5, 0.0])
        dg = poincare.metric_partials_at(p)
        assert dg[0, 0, 0] == pytest.approx(512.0 / 27.0, rel=1e-12)
        chart = poincare.charts[0]
        fd = fd_metric_partials(chart.metric, p.coords[None, :], 1e-5)[0]
        assert np.allclose(dg, fd, rtol=1e-6, atol=1e-8)

    @pytest.mark.parametrize("kind", ["euclidean", "poincare_ball", "sphere_stereo",
                                      "hyperbolic_cusp"])
    def test_analytic_partials_match_fd_on_window(self, kind, all_builtins):
        M = all_builtins[kind]
        pts = window_samples(M, 1000)
        chart = M.window_chart
        dg = chart.partials_at(pts)
        fd = fd_metric_partials(chart.metric, chart.domain.wrap(pts), 1e-5)
        scale = np.max(np.abs(dg)) + 1.0
        assert np.max(np.abs(dg - fd)) <= 1e-6 * scale


class TestMetricInvariants:
    @pytest.mark.parametrize("kind", ["euclidean", "poincare_ball", "sphere_stereo",
                                      "hyperbolic_cusp"])
    def test_symmetric_positive_definite(self, kind, all_builtins):
        M = all_builtins[kind]
        g = M.metric_on(window_samples(M, 1000))
        assert np.allclose(g, np.swapaxes(g, 1, 2), atol=1e-14)
        assert np.min(np.linalg.eigvalsh(g)) > 0.0


class TestVolumeElement:
    def test_values(self, euclid2, poincare, cusp):
        assert euclid2.volume_element(Point("main", [0.4, 0.4])) == 1.0
        assert poincare.volume_element(Point("disk", [0.0, 0.0])) == pytest.approx(4.0)
        assert cusp.volume_element(Point("cusp", [3.0, 1.0])) == pytest.approx(np.exp(-3.0))


class TestManifest:
    def test_round_trip(self, tmp_path):
        spec = {"kind": "poincare_ball", "n": 2, "params": {"margin": 0.05},
                "window": {"center": [0.0, 0.0], "halfwidths": [0.5, 0.5]}}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(spec))
        M = load_manifold(path)
        assert M.kind == "poincare_ball"
        assert np.allclose(M.window.halfwidths, 0.5)
        assert M.spec_dict()["params"]["margin"] == 0.05

    def test_cusp_window_validation(self):
        with pytest.raises(ManifoldError):
            make_builtin("hyperbolic_cusp", 2, {"T": 3.0},
                         window=(np.array([2.0, np.pi]), np.array([1.5, np.pi])))
