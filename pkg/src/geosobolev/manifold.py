"""Coordinate charts with metric evaluators and the builtin test-manifold family.

A manifold is represented by explicit charts: a coordinate domain plus a
(batched) metric evaluator ``g(points) -> (m, n, n)`` and optional analytic
first partials ``(m, n, n, n)`` indexed ``[k, i, j] = d_k g_ij``.  All
experiments run on a single designated window inside one chart, with fields
compactly supported in that window.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

#: central-difference step used when analytic metric partials are absent
FD_METRIC_STEP = 1e-5

BUILTIN_KINDS = ("euclidean", "sphere_stereo", "poincare_ball", "hyperbolic_cusp")


class ManifoldError(ValueError):
    """Bad manifold construction or evaluation outside a chart domain."""


# ---------------------------------------------------------------------------
# chart domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box, optionally periodic along some axes.

    ``periods[i]`` is the period length for a cyclic axis (containment along
    that axis is wrap-around) or None for a hard boundary.
    """

    lo: Array
    hi: Array
    periods: tuple[Optional[float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if not self.periods:
            object.__setattr__(self, "periods", (None,) * self.lo.size)

    @property
    def dim(self) -> int:
        return self.lo.size

    def wrap(self, pts: Array) -> Array:
        """Reduce periodic coordinates into their base period."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float)).copy()
        for i, per in enumerate(self.periods):
            if per is not None:
                pts[:, i] = self.lo[i] + np.mod(pts[:, i] - self.lo[i], per)
        return pts

    def contains(self, pts: Array, tol: float = 1e-12) -> Array:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = np.ones(pts.shape[0], dtype=bool)
        for i, per in enumerate(self.periods):
            if per is None:
                ok &= (pts[:, i] >= self.lo[i] - tol) & (pts[:, i] <= self.hi[i] + tol)
        return ok

    def contains_ellipsoid(self, center: Array, radius: float, axes: Array) -> bool:
        """True if ``center + axes @ B(0, radius)`` stays inside the domain.

        ``axes`` maps normalized-ball coordinates to chart displacements; the
        ellipsoid's extent along chart axis i is ``radius * |axes[i, :]|``.
        Periodic axes cap the extent at half a period (injectivity).
        """
        extent = radius * np.linalg.norm(axes, axis=1)
        for i, per in enumerate(self.periods):
            if per is not None:
                if extent[i] > per / 2.0:
                    return False
            else:
                if center[i] - extent[i] < self.lo[i] or center[i] + extent[i] > self.hi[i]:
                    return False
        return True

    def max_ellipsoid_radius(self, center: Array, axes: Array) -> float:
        """Largest radius whose ellipsoid image stays inside the domain."""
        row = np.linalg.norm(axes, axis=1)
        best = np.inf
        for i, per in enumerate(self.periods):
            if row[i] == 0.0:
                continue
            if per is not None:
                best = min(best, (per / 2.0) / row[i])
            else:
                best = min(best, (self.hi[i] - center[i]) / row[i], (center[i] - self.lo[i]) / row[i])
        return float(best)


@dataclass(frozen=True)
class BallDomain:
    """Round coordinate ball |y - center| < radius."""

    center: Array
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def dim(self) -> int:
        return self.center.size

    def wrap(self, pts: Array) -> Array:
        return np.atleast_2d(np.asarray(pts, dtype=float))

    def contains(self, pts: Array, tol: float = 1e-12) -> Array:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.linalg.norm(pts - self.center, axis=1) <= self.radius + tol

    def contains_ellipsoid(self, center: Array, radius: float, axes: Array) -> bool:
        reach = np.linalg.norm(center - self.center) + radius * np.linalg.norm(axes, ord=2)
        return bool(reach <= self.radius)

    def max_ellipsoid_radius(self, center: Array, axes: Array) -> float:
        slack = self.radius - np.linalg.norm(center - self.center)
        return float(max(slack, 0.0) / np.linalg.norm(axes, ord=2))


Domain = BoxDomain | BallDomain


# ---------------------------------------------------------------------------
# charts, window, manifold
# ---------------------------------------------------------------------------


@dataclass
class Chart:
    """Coordinate chart: domain plus metric tensor evaluators."""

    id: str
    domain: Domain
    metric: Callable[[Array], Array]
    metric_partials: Optional[Callable[[Array], Array]] = None

    def metric_at(self, pts: Array) -> Array:
        return self.metric(self.domain.wrap(pts))

    def partials_at(self, pts: Array) -> Array:
        """Analytic d_k g_ij when available, else central differences."""
        pts = self.domain.wrap(pts)
        if self.metric_partials is not None:
            return self.metric_partials(pts)
        return fd_metric_partials(self.metric, pts, FD_METRIC_STEP)


def fd_metric_partials(metric: Callable[[Array], Array], pts: Array, h: float) -> Array:
    """Central-difference d_k g_ij, shape (m, n, n, n) indexed [k, i, j]."""
    pts = np.atleast_2d(pts)
    m, n = pts.shape
    out = np.empty((m, n, n, n))
    for k in range(n):
        dp = np.zeros(n)
        dp[k] = h
        out[:, k] = (metric(pts + dp) - metric(pts - dp)) / (2.0 * h)
    return out


@dataclass(frozen=True)
class Window:
    """Sub-box of one chart on which all integrations and experiments run."""

    chart_id: str
    center: Array
    halfwidths: Array

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "halfwidths", np.asarray(self.halfwidths, dtype=float))

    @property
    def lo(self) -> Array:
        return self.center - self.halfwidths

    @property
    def hi(self) -> Array:
        return self.center + self.halfwidths

    def grid(self, per_axis: int) -> Array:
        """Regular interior grid, (per_axis**n, n), cell-centered."""
        axes = [
            self.lo[i] + (self.hi[i] - self.lo[i]) * (np.arange(per_axis) + 0.5) / per_axis
            for i in range(self.center.size)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def contains(self, pts: Array, tol: float = 1e-12) -> Array:
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)


@dataclass(frozen=True)
class Point:
    """A point of the manifold: chart id plus chart coordinates."""

    chart: str
    coords: Array

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))


@dataclass
class ChartedManifold:
    dimension: int
    charts: list[Chart]
    window: Window
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    oracles: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [c.id for c in self.charts]
        if len(set(ids)) != len(ids):
            raise ManifoldError("duplicate chart ids")
        wc = self.chart(self.window.chart_id)
        corners = _box_corners(self.window.lo, self.window.hi)
        if not np.all(wc.domain.contains(corners)):
            raise ManifoldError("window is not contained in its chart domain")
        probe = wc.metric_at(self.window.center[None, :])
        if probe.shape[-1] != self.dimension:
            raise ManifoldError("metric dimension does not match manifold dimension")

    def chart(self, chart_id: str) -> Chart:
        for c in self.charts:
            if c.id == chart_id:
                return c
        raise ManifoldError(f"unknown chart {chart_id!r}")

    @property
    def window_chart(self) -> Chart:
        return self.chart(self.window.chart_id)

    # -- point-wise API ------------------------------------------------------

    def _check_in_domain(self, chart: Chart, pts: Array):
        if not np.all(chart.domain.contains(pts)):
            raise ManifoldError("point outside chart domain")

    def metric_at(self, p: Point) -> Array:
        c = self.chart(p.chart)
        pts = np.atleast_2d(p.coords)
        self._check_in_domain(c, pts)
        return c.metric_at(pts)[0]

    def metric_partials_at(self, p: Point) -> Array:
        c = self.chart(p.chart)
        pts = np.atleast_2d(p.coords)
        self._check_in_domain(c, pts)
        if c.metric_partials is None:
            # FD stencil needs room inside a hard boundary
            shrunk = _shrink_domain(c.domain, FD_METRIC_STEP)
            if not np.all(shrunk.contains(pts)):
                raise ManifoldError("point too close to chart boundary for finite differences")
        return c.partials_at(pts)[0]

    def volume_element(self, p: Point) -> float:
        g = self.metric_at(p)
        det = np.linalg.det(g)
        if det <= 0.0:
            raise ManifoldError("metric is not positive definite at point")
        return float(np.sqrt(det))

    # -- batched helpers -----------------------------------------------------

    def metric_on(self, pts: Array, chart_id: Optional[str] = None) -> Array:
        c = self.chart(chart_id or self.window.chart_id)
        return c.metric_at(pts)

    def partials_on(self, pts: Array, chart_id: Optional[str] = None) -> Array:
        c = self.chart(chart_id or self.window.chart_id)
        return c.partials_at(pts)

    def sqrt_det_on(self, pts: Array, chart_id: Optional[str] = None) -> Array:
        return np.sqrt(np.linalg.det(self.metric_on(pts, chart_id)))

    def spec_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.dimension,
            "params": dict(self.params),
            "window": {
                "center": self.window.center.tolist(),
                "halfwidths": self.window.halfwidths.tolist(),
            },
        }


def _box_corners(lo: Array, hi: Array) -> Array:
    n = lo.size
    corners = np.empty((2**n, n))
    for j in range(2**n):
        for i in range(n):
            corners[j, i] = hi[i] if (j >> i) & 1 else lo[i]
    return corners


def _shrink_domain(domain: Domain, margin: float) -> Domain:
    if isinstance(domain, BoxDomain):
        lo = domain.lo.copy()
        hi = domain.hi.copy()
        for i, per in enumerate(domain.periods):
            if per is None:
                lo[i] += margin
                hi[i] -= margin
        return BoxDomain(lo, hi, domain.periods)
    return BallDomain(domain.center, domain.radius - margin)


# ---------------------------------------------------------------------------
# builtin metrics
# ---------------------------------------------------------------------------


def _conformal_metric(factor, factor_grad):
    """g = c(x)·I with analytic partials d_k g_ij = d_k c · δ_ij."""

    def metric(pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        m, n = pts.shape
        c = factor(pts)
        return c[:, None, None] * np.eye(n)[None, :, :]

    def partials(pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        m, n = pts.shape
        dc = factor_grad(pts)  # (m, n)
        return dc[:, :, None, None] * np.eye(n)[None, None, :, :]

    return metric, partials


def _euclidean_charts(n: int, window: Window) -> list[Chart]:
    pad = 5.0  # room for the admissible-radius search cap
    lo, hi = window.lo - pad, window.hi + pad

    def metric(pts):
        pts = np.atleast_2d(pts)
        return np.broadcast_to(np.eye(n), (pts.shape[0], n, n)).copy()

    def partials(pts):
        pts = np.atleast_2d(pts)
        return np.zeros((pts.shape[0], n, n, n))

    return [Chart("main", BoxDomain(lo, hi), metric, partials)]


def _sphere_charts(n: int, window: Window, box_halfwidth: float) -> list[Chart]:
    def factor(pts):
        return 4.0 / (1.0 + np.sum(pts**2, axis=1)) ** 2

    def factor_grad(pts):
        s = 1.0 + np.sum(pts**2, axis=1)
        return (-16.0 / s**3)[:, None] * pts

    metric, partials = _conformal_metric(factor, factor_grad)
    lo = np.full(n, -box_halfwidth)
    hi = np.full(n, box_halfwidth)
    return [Chart("stereo", BoxDomain(lo, hi), metric, partials)]


def _poincare_charts(n: int, margin: float) -> list[Chart]:
    def factor(pts):
        return 4.0 / (1.0 - np.sum(pts**2, axis=1)) ** 2

    def factor_grad(pts):
        s = 1.0 - np.sum(pts**2, axis=1)
        return (16.0 / s**3)[:, None] * pts

    metric, partials = _conformal_metric(factor, factor_grad)
    return [Chart("disk", BallDomain(np.zeros(n), 1.0 - margin), metric, partials)]


def _cusp_charts(T: float) -> list[Chart]:
    def metric(pts):
        pts = np.atleast_2d(pts)
        m = pts.shape[0]
        g = np.zeros((m, 2, 2))
        g[:, 0, 0] = 1.0
        g[:, 1, 1] = np.exp(-2.0 * pts[:, 0])
        return g

    def partials(pts):
        pts = np.atleast_2d(pts)
        m = pts.shape[0]
        dg = np.zeros((m, 2, 2, 2))
        dg[:, 0, 1, 1] = -2.0 * np.exp(-2.0 * pts[:, 0])
        return dg

    domain = BoxDomain(np.array([0.0, 0.0]), np.array([T, 2.0 * np.pi]), (None, 2.0 * np.pi))
    return [Chart("cusp", domain, metric, partials)]


_DEFAULT_WINDOWS = {
    "euclidean": lambda n, params: (np.zeros(n), np.full(n, 2.0)),
    "sphere_stereo": lambda n, params: (np.zeros(n), np.full(n, 1.0)),
    "poincare_ball": lambda n, params: (np.zeros(n), np.full(n, 0.65)),
    "hyperbolic_cusp": lambda n, params: (
        np.array([params.get("T", 5.0) / 2.0, np.pi]),
        np.array([params.get("T", 5.0) / 2.0 - 0.5, np.pi]),
    ),
}


def make_builtin(
    kind: str,
    n: int = 2,
    params: Optional[dict] = None,
    window: Optional[tuple[Array, Array]] = None,
) -> ChartedManifold:
    """Build one of the builtin test manifolds.

    ``window`` is an optional (center, halfwidths) pair in chart coordinates;
    each kind has a sensible default.
    """
    params = dict(params or {})
    if kind not in BUILTIN_KINDS:
        raise ManifoldError(f"unknown builtin kind {kind!r}")
    if n < 1:
        raise ManifoldError("dimension must be positive")
    if kind == "hyperbolic_cusp" and n != 2:
        raise ManifoldError("hyperbolic_cusp is a surface (n = 2)")

    if window is None:
        center, halfwidths = _DEFAULT_WINDOWS[kind](n, params)
    else:
        center = np.asarray(window[0], dtype=float)
        halfwidths = np.asarray(window[1], dtype=float)

    oracles: dict = {}
    if kind == "euclidean":
        win = Window("main", center, halfwidths)
        charts = _euclidean_charts(n, win)
    elif kind == "sphere_stereo":
        box_hw = float(params.get("box_halfwidth", np.max(np.abs(center) + halfwidths) + 2.0))
        win = Window("stereo", center, halfwidths)
        charts = _sphere_charts(n, win, box_hw)
        if np.max(np.abs(center) + halfwidths) > box_hw:
            raise ManifoldError("window exceeds the stereographic chart box")
    elif kind == "poincare_ball":
        margin = float(params.get("margin", 0.05))
        if margin < 0.05:
            raise ManifoldError("poincare margin must keep >= 0.05 from the unit circle")
        win = Window("disk", center, halfwidths)
        reach = np.linalg.norm(np.abs(center) + halfwidths)
        if reach > 1.0 - margin:
            raise ManifoldError("window touches the Poincare singular locus")
        charts = _poincare_charts(n, margin)
        if n == 2:
            oracles["geodesic_ball_area"] = lambda rho: 4.0 * np.pi * np.sinh(rho / 2.0) ** 2
            oracles["geodesic_ball_chart_radius"] = lambda rho: np.tanh(rho / 2.0)
    else:  # hyperbolic_cusp
        T = float(params.get("T", 5.0))
        params["T"] = T
        win = Window("cusp", center, halfwidths)
        if center[0] - halfwidths[0] < 0.0 or center[0] + halfwidths[0] > T:
            raise ManifoldError("cusp window exceeds the t-range [0, T]")
        charts = _cusp_charts(T)

    return ChartedManifold(n, charts, win, kind=kind, params=params, oracles=oracles)


# ---------------------------------------------------------------------------
# manifest files
# ---------------------------------------------------------------------------


def manifold_from_spec(spec: dict) -> ChartedManifold:
    """Build a builtin manifold from its JSON manifest dict."""
    kind = spec.get("kind")
    n = int(spec.get("n", 2))
    params = spec.get("params", {}) or {}
    window = None
    if "window" in spec and spec["window"]:
        w = spec["window"]
        window = (np.asarray(w["center"], dtype=float), np.asarray(w["halfwidths"], dtype=float))
    return make_builtin(kind, n, params, window)


def load_manifold(path: str | Path) -> ChartedManifold:
    with open(path) as f:
        return manifold_from_spec(json.load(f))
