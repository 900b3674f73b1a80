"""FastAPI service exposing the experiments."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..manifold import BUILTIN_KINDS, ManifoldError
from ..norms import NormError
from .models import (CoverRequest, CurvatureRequest, EmbedRequest, GaffneyRequest,
                     KatoRequest, RadiusRequest, ReportResponse)
from . import runner


def create_app() -> FastAPI:
    app = FastAPI(title="geosobolev", version="0.1.0",
                  description="Admissible radius fields, Vitali coverings and "
                              "weighted Sobolev / Gaffney experiments on charted manifolds")

    def _guard(fn, req):
        try:
            return fn(req)
        except (ManifoldError, NormError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/v1/builtins")
    def builtins() -> dict:
        return {"kinds": list(BUILTIN_KINDS)}

    @app.post("/v1/radius", response_model=ReportResponse)
    def radius(req: RadiusRequest) -> ReportResponse:
        return _guard(runner.run_radius, req)

    @app.post("/v1/cover", response_model=ReportResponse)
    def cover(req: CoverRequest) -> ReportResponse:
        return _guard(runner.run_cover, req)

    @app.post("/v1/embed", response_model=ReportResponse)
    def embed(req: EmbedRequest) -> ReportResponse:
        return _guard(runner.run_embed, req)

    @app.post("/v1/gaffney", response_model=ReportResponse)
    def gaffney(req: GaffneyRequest) -> ReportResponse:
        return _guard(runner.run_gaffney, req)

    @app.post("/v1/curvature", response_model=ReportResponse)
    def curvature(req: CurvatureRequest) -> ReportResponse:
        return _guard(runner.run_curvature, req)

    @app.post("/v1/kato", response_model=ReportResponse)
    def kato(req: KatoRequest) -> ReportResponse:
        return _guard(runner.run_kato, req)

    return app


app = create_app()
