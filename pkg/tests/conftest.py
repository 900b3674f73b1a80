"""Shared fixtures; the expensive artifacts (radius fields, coverings) are
session-scoped so the acceptance suite and unit tests reuse them."""

import numpy as np
import pytest

from geosobolev import make_builtin, radius_field, vitali_cover
from geosobolev.covering import candidate_grid, overlap_stats

CUSP_T = 7.0
CUSP_WINDOW = (np.array([3.5, np.pi]), np.array([3.0, np.pi]))


@pytest.fixture(scope="session")
def euclid2():
    return make_builtin("euclidean", 2)


@pytest.fixture(scope="session")
def euclid3():
    return make_builtin("euclidean", 3, window=(np.zeros(3), np.full(3, 1.5)))


@pytest.fixture(scope="session")
def poincare():
    return make_builtin("poincare_ball", 2)


@pytest.fixture(scope="session")
def sphere():
    return make_builtin("sphere_stereo", 2)


@pytest.fixture(scope="session")
def cusp():
    return make_builtin("hyperbolic_cusp", 2, {"T": CUSP_T}, window=CUSP_WINDOW)


@pytest.fixture(scope="session")
def cusp_band():
    return make_builtin("hyperbolic_cusp", 2, {"T": 4.0},
                        window=(np.array([3.0, np.pi]), np.array([0.2, 0.5])))


@pytest.fixture(scope="session")
def all_builtins(euclid2, poincare, sphere, cusp):
    return {"euclidean": euclid2, "poincare_ball": poincare,
            "sphere_stereo": sphere, "hyperbolic_cusp": cusp}


@pytest.fixture(scope="session")
def poincare_rfield0(poincare):
    return radius_field(poincare, poincare.window.grid(12), 0, 0.1)


@pytest.fixture(scope="session")
def poincare_rfield1(poincare):
    return radius_field(poincare, poincare.window.grid(12), 1, 0.1)


@pytest.fixture(scope="session")
def cusp_rfield0(cusp):
    return radius_field(cusp, cusp.window.grid(20), 0, 0.1)


@pytest.fixture(scope="session")
def cusp_rfield1(cusp):
    return radius_field(cusp, cusp.window.grid(20), 1, 0.1)


@pytest.fixture(scope="session")
def euclid_cover(euclid2):
    rf = radius_field(euclid2, euclid2.window.grid(12), 0, 0.1)
    cands = candidate_grid(euclid2, rf, 0.5)
    cover = vitali_cover(euclid2, rf, cands)
    probes = candidate_grid(euclid2, rf, 0.125)
    overlap_stats(cover, probes)
    return cover


@pytest.fixture(scope="session")
def band_cover(cusp_band):
    rf = radius_field(cusp_band, cusp_band.window.grid(14), 1, 0.1)
    cands = candidate_grid(cusp_band, rf, 0.5)
    cover = vitali_cover(cusp_band, rf, cands)
    probes = candidate_grid(cusp_band, rf, 0.125)
    overlap_stats(cover, probes)
    return cover, rf
