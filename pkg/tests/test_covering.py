import numpy as np
import pytest

from geosobolev import Point, make_builtin, radius_field, vitali_cover, weight_at
from geosobolev.covering import (candidate_grid, coverage_gaps, overlap_bound,
                                 overlap_bound_full, overlap_stats)


class TestBounds:
    def test_paper_closed_forms(self):
        assert overlap_bound(2, 0.1) == pytest.approx(12222.222222, rel=1e-9)
        assert overlap_bound_full(2, 0.1) == pytest.approx(48888.888888, rel=1e-9)


class TestEuclideanCover:
    def test_invariants(self, euclid_cover):
        cover = euclid_cover
        s = cover.stats
        assert s["max_overlap_base"] <= 1
        assert s["max_overlap_dilated"] <= 25  # far below T
        assert s["dilated_within_T"] and s["full_within_T1"]

    def test_pairwise_disjointness_exact(self, euclid_cover):
        c = euclid_cover.centers
        r = euclid_cover.base_radii
        d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2)
        need = (1.0 + euclid_cover.epsilon) * (r[:, None] + r[None, :])
        np.fill_diagonal(d, np.inf)
        assert np.all(d >= need * (1 - 1e-12))

    def test_coverage_complete(self, euclid2, euclid_cover):
        rng = np.random.default_rng(0)
        probes = euclid2.window.lo + (euclid2.window.hi - euclid2.window.lo) * rng.uniform(size=(4000, 2))
        assert coverage_gaps(euclid_cover, probes).size == 0

    def test_deterministic_rebuild(self, euclid2):
        rf = radius_field(euclid2, euclid2.window.grid(8), 0, 0.1)
        cands = candidate_grid(euclid2, rf, 0.5)
        c1 = vitali_cover(euclid2, rf, cands, check_coverage=False)
        c2 = vitali_cover(euclid2, rf, cands, check_coverage=False)
        assert np.array_equal(c1.centers, c2.centers)
        assert np.array_equal(c1.radii_eps, c2.radii_eps)

    def test_single_candidate(self, euclid2):
        rf = radius_field(euclid2, np.array([[0.0, 0.0]]), 0, 0.1)
        cover = vitali_cover(euclid2, rf, np.array([[0.0, 0.0]]), check_coverage=False)
        assert cover.centers.shape[0] == 1
        stats = overlap_stats(cover, np.array([[0.0, 0.0], [0.01, 0.0]]))
        assert stats["max_overlap_dilated"] == 1


class TestCuspCover:
    def test_band_invariants(self, band_cover):
        cover, _ = band_cover
        s = cover.stats
        assert s["max_overlap_base"] <= 1
        assert s["dilated_within_T"] and s["full_within_T1"]

    def test_ball_density_tracks_radius_decay(self):
        # straddle the decay onset so R_eps drops across the band
        M = make_builtin("hyperbolic_cusp", 2, {"T": 6.0},
                         window=(np.array([4.6, np.pi]), np.array([0.45, 0.3])))
        rf = radius_field(M, M.window.grid(12), 0, 0.1)
        cands = candidate_grid(M, rf, 0.5)
        cover = vitali_cover(M, rf, cands, check_coverage=False)
        t = cover.centers[:, 0]
        lo, hi = M.window.lo[0], M.window.hi[0]
        edges = np.linspace(lo, hi, 4)
        counts = np.histogram(t, bins=edges)[0]
        assert counts[0] < counts[1] < counts[2]

    def test_wrap_displacement_membership(self, band_cover):
        # probes just across the periodic seam still get wrapped distances
        cover, rf = band_cover
        M = cover.manifold
        probe = np.array([[3.0, 2 * np.pi + (np.pi - 0.2)]])  # wraps to theta = pi - 0.2
        base = np.array([[3.0, np.pi - 0.2]])
        s1 = overlap_stats(cover, probe)["max_overlap_dilated"]
        s2 = overlap_stats(cover, base)["max_overlap_dilated"]
        assert s1 == s2


class TestWeightAt:
    def test_euclidean_power_free(self, euclid2):
        rf = radius_field(euclid2, euclid2.window.grid(6), 0, 0.1)
        for gamma in (-2.0, 0.0, 3.5):
            assert weight_at(np.array([0.3, -0.8]), gamma, rf) == 1.0

    def test_gamma_zero_anywhere(self, poincare_rfield0):
        assert weight_at(np.array([0.4, 0.2]), 0.0, poincare_rfield0) == 1.0

    def test_cusp_weight_below_one(self, cusp_rfield0):
        w = weight_at(np.array([3.0, np.pi]), 2.0, cusp_rfield0)
        assert 0.0 < w < 1.0
