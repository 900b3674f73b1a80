"""Request/response models for the experiment service (the wire format the
CLI speaks as well)."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class WindowModel(BaseModel):
    center: list[float]
    halfwidths: list[float]


class ManifoldModel(BaseModel):
    kind: Literal["euclidean", "sphere_stereo", "poincare_ball", "hyperbolic_cusp"]
    n: int = 2
    params: dict[str, float] = Field(default_factory=dict)
    window: Optional[WindowModel] = None

    def spec_dict(self) -> dict:
        out: dict = {"kind": self.kind, "n": self.n, "params": dict(self.params)}
        if self.window is not None:
            out["window"] = {"center": self.window.center, "halfwidths": self.window.halfwidths}
        return out


class BaseRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    manifold: ManifoldModel
    epsilon: float = 0.1
    seed: int = 0


class RadiusRequest(BaseRequest):
    grid_per_axis: int = 10
    sampler_m: int = 9


class CoverRequest(BaseRequest):
    cls: int = Field(1, alias="class", ge=0, le=1)
    field_grid_per_axis: int = 16
    pitch_factor: float = 0.5


class EmbedRequest(BaseRequest):
    cls: int = Field(0, alias="class", ge=0, le=1)
    r: float = 1.5
    m: int = 1
    k: int = 0
    gamma: float = 0.0
    suite_size: int = 20
    nodes: int = 48
    field_grid_per_axis: int = 20


class GaffneyRequest(BaseRequest):
    r: float = 2.0
    p: int = 1
    suite_size: int = 8
    nodes: int = 36
    local_center: Optional[list[float]] = None
    field_grid_per_axis: int = 16


class CurvatureRequest(BaseRequest):
    n_points: int = 12
    tolerance: float = 1e-3


class KatoRequest(BaseRequest):
    suite_size: int = 5
    points_per_field: int = 250


class ReportResponse(BaseModel):
    passed: bool
    report: dict
    runtime_ms: float
    csv: Optional[str] = None
