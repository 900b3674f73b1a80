"""Experiment dispatch shared by the HTTP service and the CLI."""

from __future__ import annotations

import time

import numpy as np

from .. import verify
from ..admissible import radius_field
from ..manifold import ChartedManifold, manifold_from_spec
from ..norms import NormError, SobolevParams
from ..reports import radius_csv, sanitize
from .models import (CoverRequest, CurvatureRequest, EmbedRequest, GaffneyRequest,
                     KatoRequest, RadiusRequest, ReportResponse)

DEFAULT_LOCAL_CENTERS = {
    "euclidean": lambda M: np.zeros(M.dimension),
    "sphere_stereo": lambda M: np.full(M.dimension, 0.2),
    "poincare_ball": lambda M: np.array([0.3] + [0.0] * (M.dimension - 1)),
    "hyperbolic_cusp": lambda M: np.array([2.0, np.pi]),
}


def _build(req) -> ChartedManifold:
    return manifold_from_spec(req.manifold.spec_dict())


def _respond(report: verify.ExperimentReport, t0: float, csv: str | None = None) -> ReportResponse:
    return ReportResponse(passed=report.passed, report=sanitize(report.to_dict()),
                          runtime_ms=(time.monotonic() - t0) * 1000.0, csv=csv)


def run_radius(req: RadiusRequest) -> ReportResponse:
    t0 = time.monotonic()
    M = _build(req)
    report, _ = verify.radius_experiment(M, req.epsilon, req.grid_per_axis, req.sampler_m)
    return _respond(report, t0, csv=radius_csv(M.dimension, report.rows))


def run_cover(req: CoverRequest) -> ReportResponse:
    t0 = time.monotonic()
    M = _build(req)
    report, _ = verify.cover_experiment(M, req.cls, req.epsilon,
                                        req.field_grid_per_axis, pitch_factor=req.pitch_factor)
    return _respond(report, t0)


def run_embed(req: EmbedRequest) -> ReportResponse:
    t0 = time.monotonic()
    M = _build(req)
    params = SobolevParams.derive(M.dimension, req.m, req.k, req.r, req.gamma)
    rfield = radius_field(M, M.window.grid(req.field_grid_per_axis), req.cls, req.epsilon)
    report = verify.run_embedding_experiment(M, params, req.epsilon, rfield, req.cls,
                                             req.suite_size, req.seed, req.nodes)
    return _respond(report, t0)


def run_gaffney(req: GaffneyRequest) -> ReportResponse:
    t0 = time.monotonic()
    M = _build(req)
    center = (np.asarray(req.local_center, dtype=float) if req.local_center is not None
              else DEFAULT_LOCAL_CENTERS[M.kind](M))
    local = verify.run_gaffney_local(M, center, req.r, req.epsilon, req.p,
                                     seed=req.seed, nodes=max(16, req.nodes // 2))
    rfield = radius_field(M, M.window.grid(req.field_grid_per_axis), 1, req.epsilon)
    glob = verify.run_gaffney_global(M, req.r, req.epsilon, rfield, req.p,
                                     req.suite_size, req.seed, req.nodes)
    rows = ([dict(part="local", **row) for row in local.rows]
            + [dict(part="global", **row) for row in glob.rows])
    report = verify.ExperimentReport(
        "gaffney", M.spec_dict(),
        {"local": local.params, "global": glob.params},
        rows,
        {"passed": local.passed and glob.passed,
         "local": local.summary, "global": glob.summary},
    )
    return _respond(report, t0)


def run_curvature(req: CurvatureRequest) -> ReportResponse:
    t0 = time.monotonic()
    M = _build(req)
    report = verify.curvature_experiment(M, req.seed, req.n_points, req.tolerance)
    return _respond(report, t0)


def run_kato(req: KatoRequest) -> ReportResponse:
    t0 = time.monotonic()
    M = _build(req)
    parts = [
        ("scalars_m0", verify.check_kato(M, 0, 0, req.suite_size, req.seed, req.points_per_field)),
        ("forms_m0", verify.check_kato(M, 0, 1, req.suite_size, req.seed, req.points_per_field)),
        ("forms_m1", verify.check_kato(M, 1, 1, max(2, req.suite_size // 2), req.seed,
                                       req.points_per_field // 2)),
    ]
    rows = []
    summary = {"passed": all(rep.passed for _, rep in parts)}
    for name, rep in parts:
        rows.extend(dict(part=name, **row) for row in rep.rows)
        summary[name] = rep.summary
    report = verify.ExperimentReport(
        "kato", M.spec_dict(),
        {name: rep.params for name, rep in parts},
        rows, summary,
    )
    return _respond(report, t0)


RUNNERS = {
    "radius": (RadiusRequest, run_radius),
    "cover": (CoverRequest, run_cover),
    "embed": (EmbedRequest, run_embed),
    "gaffney": (GaffneyRequest, run_gaffney),
    "curvature": (CurvatureRequest, run_curvature),
    "kato": (KatoRequest, run_kato),
}
