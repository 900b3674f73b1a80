"""Quadrature over windows and balls; weighted L^r and W^{k,r} norms.

Box integrals use tensor-product Gauss-Legendre rules (48 nodes per axis on
windows, 24 on balls, by default).  Ball integrals run in the ball's
normalized coordinates: a segment rule for n = 1, a polar rule for n = 2, and
an indicator-weighted cube rule for n >= 3 (documented as approximate at the
rim; test fields are supported inside).  Box and polar grids integrate
constants exactly.

Norms follow the weighted Sobolev definition: for each derivative order j the
term (integral |nabla^j f|^tau w sqrt(det g) dx)^(1/tau), summed over j <= k.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gamma as gamma_fn, pi
from typing import Callable, Optional, Union

import numpy as np

from .admissible import AdmissibleBall, RadiusField
from .forms import FormField, nabla_j_values
from .geometry import tensor_norm_batch
from .manifold import ChartedManifold

Array = np.ndarray

NODES_WINDOW = 48
NODES_BALL = 24


class NormError(ValueError):
    pass


def unit_ball_volume(n: int) -> float:
    return pi ** (n / 2.0) / gamma_fn(n / 2.0 + 1.0)


@dataclass(frozen=True)
class SobolevParams:
    """Exponent bundle for the weighted embedding W^{m,r}(w) -> W^{k,s}(w').

    Enforces 1/s = 1/r - (m-k)/n > 0 and nu = s(2 + gamma/r).
    """

    n: int
    m: int
    k: int
    r: float
    gamma: float
    s: float
    nu: float

    @classmethod
    def derive(cls, n: int, m: int, k: int, r: float, gamma: float = 0.0) -> "SobolevParams":
        if r < 1.0:
            raise NormError("r must be >= 1")
        if not (m >= k >= 0):
            raise NormError("need m >= k >= 0")
        inv_s = 1.0 / r - (m - k) / n
        if inv_s <= 0.0:
            raise NormError(f"1/s = 1/r - (m-k)/n = {inv_s:.4g} must be positive")
        s = 1.0 / inv_s
        return cls(n, m, k, r, gamma, s, s * (2.0 + gamma / r))

    def __post_init__(self):
        inv_s = 1.0 / self.r - (self.m - self.k) / self.n
        if inv_s <= 0.0 or abs(1.0 / self.s - inv_s) > 1e-9:
            raise NormError("inconsistent s in SobolevParams")
        if abs(self.nu - self.s * (2.0 + self.gamma / self.r)) > 1e-9:
            raise NormError("inconsistent nu in SobolevParams")

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "k": self.k, "r": self.r,
                "gamma": self.gamma, "s": self.s, "nu": self.nu}


# ---------------------------------------------------------------------------
# regions and grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxRegion:
    lo: Array
    hi: Array

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))

    def clipped(self, lo: Array, hi: Array) -> Optional["BoxRegion"]:
        nl = np.maximum(self.lo, lo)
        nh = np.minimum(self.hi, hi)
        if np.any(nl >= nh):
            return None
        return BoxRegion(nl, nh)


@dataclass(frozen=True)
class BallRegion:
    """Euclidean ball of given radius in an admissible ball's normalized chart."""

    ball: AdmissibleBall
    radius: Optional[float] = None

    @property
    def r(self) -> float:
        return self.ball.radius if self.radius is None else float(self.radius)


Region = Union[BoxRegion, BallRegion]


@dataclass
class QuadratureGrid:
    """Nodes in chart coordinates with positive coordinate-measure weights."""

    points: Array
    weights: Array
    resolution: int


@lru_cache(maxsize=None)
def _leggauss(k: int) -> tuple[tuple, tuple]:
    x, w = np.polynomial.legendre.leggauss(k)
    return tuple(x), tuple(w)


def _gl_nodes(a: float, b: float, k: int) -> tuple[Array, Array]:
    x, w = _leggauss(k)
    x = np.asarray(x)
    w = np.asarray(w)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def box_grid(lo: Array, hi: Array, per_axis: int) -> QuadratureGrid:
    axes = [_gl_nodes(lo[i], hi[i], per_axis) for i in range(len(lo))]
    mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    wmesh = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    wts = np.ones(pts.shape[0])
    for wm in wmesh:
        wts = wts * wm.ravel()
    return QuadratureGrid(pts, wts, per_axis)


def ball_grid(region: BallRegion, per_axis: int) -> QuadratureGrid:
    """Grid in chart coordinates for a normalized-chart ball."""
    ball = region.ball
    R = region.r
    n = ball.center.coords.size
    if n == 1:
        z, w = _gl_nodes(-R, R, 2 * per_axis)
        zs = z[:, None]
        wts = w
    elif n == 2:
        r, wr = _gl_nodes(0.0, R, per_axis)
        th, wt = _gl_nodes(0.0, 2.0 * pi, 2 * per_axis)
        rr, tt = np.meshgrid(r, th, indexing="ij")
        zs = np.stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()], axis=1)
        wts = (np.outer(wr * r, wt)).ravel()
    else:
        axes = [_gl_nodes(-R, R, per_axis) for _ in range(n)]
        mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        zs = np.stack([m.ravel() for m in mesh], axis=1)
        wmesh = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        wts = np.ones(zs.shape[0])
        for wm in wmesh:
            wts = wts * wm.ravel()
        inside = np.linalg.norm(zs, axis=1) <= R
        zs, wts = zs[inside], wts[inside]
    pts = ball.chart_points(zs)
    jac = abs(np.linalg.det(ball.inv_normalizer))
    return QuadratureGrid(pts, wts * jac, per_axis)


def region_grid(region: Region, per_axis: int,
                support: Optional[tuple[Array, Array]] = None) -> Optional[QuadratureGrid]:
    if isinstance(region, BoxRegion):
        box = region if support is None else region.clipped(*support)
        if box is None:
            return None
        return box_grid(box.lo, box.hi, per_axis)
    return ball_grid(region, per_axis)


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

Weight = Union[None, tuple[float, RadiusField], Callable[[Array], Array]]


def evaluate_weight(weight: Weight, pts: Array) -> Array:
    if weight is None:
        return np.ones(np.atleast_2d(pts).shape[0])
    if callable(weight):
        return weight(pts)
    gamma, rfield = weight
    return rfield.weight(pts, gamma)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def _default_nodes(region: Region) -> int:
    return NODES_WINDOW if isinstance(region, BoxRegion) else NODES_BALL


def lp_norm(M: ChartedManifold, ff: FormField, region: Region, tau: float,
            weight: Weight = None, nodes: Optional[int] = None,
            order: int = 0) -> float:
    """(integral |nabla^order ff|^tau w dv)^(1/tau) over the region."""
    if tau < 1.0:
        raise NormError("exponent must be >= 1")
    nodes = nodes or _default_nodes(region)
    grid = region_grid(region, nodes, (ff.support_lo, ff.support_hi))
    if grid is None:
        return 0.0
    pts = grid.points
    vals = nabla_j_values(M, ff, pts, order)
    ginv = np.linalg.inv(M.metric_on(pts))
    mags = tensor_norm_batch(ginv, vals, ff.degree)
    w = evaluate_weight(weight, pts)
    dv = M.sqrt_det_on(pts)
    total = np.sum(grid.weights * mags**tau * w * dv)
    return float(total ** (1.0 / tau))


def sobolev_norm(M: ChartedManifold, ff: FormField, region: Region, k: int, r: float,
                 weight: Weight = None, nodes: Optional[int] = None) -> float:
    """Sum over j <= k of the weighted L^r norms of nabla^j ff."""
    if k not in (0, 1, 2):
        raise NormError("sobolev order k must be 0, 1 or 2")
    return sum(lp_norm(M, ff, region, r, weight, nodes, order=j) for j in range(k + 1))


def lp_norm_values(M: ChartedManifold, values_fn, form_rank: int, region: Region,
                   tau: float, weight: Weight = None, nodes: Optional[int] = None,
                   support: Optional[tuple[Array, Array]] = None) -> float:
    """lp_norm for a pointwise dense evaluator (e.g. a codifferential)."""
    nodes = nodes or _default_nodes(region)
    grid = region_grid(region, nodes, support)
    if grid is None:
        return 0.0
    pts = grid.points
    vals = values_fn(pts)
    ginv = np.linalg.inv(M.metric_on(pts))
    mags = tensor_norm_batch(ginv, vals, form_rank)
    w = evaluate_weight(weight, pts)
    dv = M.sqrt_det_on(pts)
    return float(np.sum(grid.weights * mags**tau * w * dv) ** (1.0 / tau))


def inner_product(M: ChartedManifold, f1: FormField, f2: FormField,
                  nodes: int = NODES_WINDOW, order2_values=None) -> float:
    """L^2 pairing <f1, f2> over the intersection of the support boxes.

    ``order2_values`` optionally replaces f2's pointwise values (e.g. a dense
    codifferential evaluator) while keeping f2's support for the clipping.
    """
    from .geometry import tensor_inner_batch

    lo = np.maximum(f1.support_lo, f2.support_lo)
    hi = np.minimum(f1.support_hi, f2.support_hi)
    if np.any(lo >= hi):
        return 0.0
    grid = box_grid(lo, hi, nodes)
    pts = grid.points
    v1 = f1.values_dense(pts)
    v2 = f2.values_dense(pts) if order2_values is None else order2_values(pts)
    ginv = np.linalg.inv(M.metric_on(pts))
    pair = tensor_inner_batch(ginv, v1, v2, f1.degree)
    dv = M.sqrt_det_on(pts)
    return float(np.sum(grid.weights * pair * dv))


# ---------------------------------------------------------------------------
# pullback (flat-side) norms for the chart comparison estimates
# ---------------------------------------------------------------------------


def _pullback_dense(ff: FormField, ball: AdmissibleBall, zs: Array) -> tuple[Array, Array]:
    """Values and partials of the pulled-back form at normalized points."""
    pts = ball.chart_points(zs)
    vals = ff.values_dense(pts)
    parts = ff.partials_dense(pts)
    Binv = ball.inv_normalizer
    for axis in range(1, vals.ndim):
        vals = np.moveaxis(np.einsum("q...i,ia->q...a", np.moveaxis(vals, axis, -1), Binv), -1, axis)
    for axis in range(1, parts.ndim):
        parts = np.moveaxis(np.einsum("q...i,ia->q...a", np.moveaxis(parts, axis, -1), Binv), -1, axis)
    return vals, parts


def flat_ball_norms(ff: FormField, ball: AdmissibleBall, rho: float, r: float,
                    nodes: int = NODES_BALL) -> dict:
    """Euclidean L^r and W^{1,r} norms of the pulled-back field on B_e(0, rho)."""
    n = ball.center.coords.size
    if n == 2:
        rr, wr = _gl_nodes(0.0, rho, nodes)
        th, wt = _gl_nodes(0.0, 2.0 * pi, 2 * nodes)
        r1, t1 = np.meshgrid(rr, th, indexing="ij")
        zs = np.stack([(r1 * np.cos(t1)).ravel(), (r1 * np.sin(t1)).ravel()], axis=1)
        wts = np.outer(wr * rr, wt).ravel()
    elif n == 1:
        z, wts = _gl_nodes(-rho, rho, 2 * nodes)
        zs = z[:, None]
    else:
        axes = [_gl_nodes(-rho, rho, nodes) for _ in range(n)]
        mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        zs = np.stack([m.ravel() for m in mesh], axis=1)
        wmesh = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        wts = np.ones(zs.shape[0])
        for wm in wmesh:
            wts = wts * wm.ravel()
        keep = np.linalg.norm(zs, axis=1) <= rho
        zs, wts = zs[keep], wts[keep]
    vals, parts = _pullback_dense(ff, ball, zs)
    eye = np.broadcast_to(np.eye(n), (zs.shape[0], n, n))
    v_mag = tensor_norm_batch(eye, vals, ff.degree)
    p_mag = tensor_norm_batch(eye, parts, ff.degree)
    lr = float(np.sum(wts * v_mag**r) ** (1.0 / r))
    grad_lr = float(np.sum(wts * p_mag**r) ** (1.0 / r))
    return {"l_r": lr, "grad_l_r": grad_lr, "w1r": lr + grad_lr}


def chart_comparison(M: ChartedManifold, ff: FormField, ball: AdmissibleBall, r: float,
                     nodes: int = NODES_BALL) -> dict:
    """Manifold-side vs flat-side Sobolev norms over an admissible ball.

    In this model the chart image of the ball is exactly B_e(0, R), so the
    outer flat region B_e(0, (1+eps)R) intersected with the image is B_e(0, R).
    """
    region = BallRegion(ball)
    m_lr = lp_norm(M, ff, region, r, nodes=nodes)
    m_w1r = m_lr + lp_norm(M, ff, region, r, nodes=nodes, order=1)
    inner = flat_ball_norms(ff, ball, (1.0 - ball.epsilon) * ball.radius, r, nodes)
    outer = flat_ball_norms(ff, ball, ball.radius, r, nodes)
    rep = {
        "manifold_l_r": m_lr,
        "manifold_w1r": m_w1r,
        "flat_inner_w1r": inner["w1r"],
        "flat_outer_w1r": outer["w1r"],
        "flat_inner_l_r": inner["l_r"],
        "flat_outer_l_r": outer["l_r"],
        "radius": ball.radius,
        "epsilon": ball.epsilon,
    }
    if outer["w1r"] > 0:
        rep["forward_constant"] = m_w1r / outer["w1r"]
    if m_w1r > 0:
        rep["reverse_constant"] = inner["w1r"] / m_w1r
        # shape of the (1 + C eps) R^{-1} comparison for sections
        rep["forward_constant_times_R"] = rep.get("forward_constant", 0.0) * ball.radius
    return rep


# ---------------------------------------------------------------------------
# localization, sequence comparison, Hoelder on balls
# ---------------------------------------------------------------------------


def localization_check(M: ChartedManifold, ff: FormField, cover, tau: float, mu: float,
                       rfield: RadiusField, nodes: int = NODES_BALL,
                       window_nodes: int = NODES_WINDOW) -> dict:
    """Compare the global weighted norm with the covering sum
    sum_x R(x)^mu ||f||^tau_{L^tau(B(x, R(x)))}; the ratio must lie in
    [2^-|mu|, 2^|mu| T] with T the measured overlap of the full-radius family."""
    window = BoxRegion(M.window.lo, M.window.hi)
    global_tau = lp_norm(M, ff, window, tau, weight=(mu, rfield), nodes=window_nodes) ** tau
    total = 0.0
    slo, shi = ff.support_lo, ff.support_hi
    for i in range(cover.centers.shape[0]):
        ball = cover.full_ball(i)
        ext = ball.radius * np.linalg.norm(ball.inv_normalizer, axis=1)
        if np.any(ball.center.coords + ext < slo) or np.any(ball.center.coords - ext > shi):
            continue
        nrm = lp_norm(M, ff, BallRegion(ball), tau, nodes=nodes)
        total += cover.radii_eps[i] ** mu * nrm**tau
    t_meas = cover.stats.get("max_overlap_full") if cover.stats else None
    ratio = total / global_tau if global_tau > 0 else np.inf
    band = [2.0 ** (-abs(mu)), (2.0 ** abs(mu)) * (t_meas if t_meas else np.inf)]
    return {
        "global_tau": global_tau,
        "covering_sum": total,
        "ratio": ratio,
        "band": band,
        "in_band": bool(band[0] <= ratio <= band[1]),
        "measured_overlap": t_meas,
    }


def lp_sequence_compare(values, r: float, s: float) -> bool:
    """Exact ell^r / ell^s comparison: for r >= s, sum a^r <= (sum a^s)^(r/s)
    (reversed for r <= s); a relative 1e-12 guard absorbs float rounding."""
    if r < 1.0 or s < 1.0:
        raise NormError("exponents must be >= 1")
    a = np.asarray(values, dtype=float)
    if np.any(a < 0.0):
        raise NormError("sequence must be nonnegative")
    lhs = float(np.sum(a**r))
    rhs = float(np.sum(a**s) ** (r / s))
    guard = 1e-12 * max(lhs, rhs, 1e-300)
    if r >= s:
        return lhs <= rhs + guard
    return lhs >= rhs - guard


def holder_ball_check(M: ChartedManifold, ff: FormField, ball: AdmissibleBall,
                      r: float, s: float, nodes: int = NODES_BALL,
                      slack: float = 0.10) -> dict:
    """||w||_{L^r(B)} <= c R^{n/r - n/s} ||w||_{L^s(B)} for s >= r, with the
    empirical c checked against the volume-bound envelope."""
    if s < r:
        raise NormError("requires s >= r")
    n = M.dimension
    region = BallRegion(ball)
    lhs = lp_norm(M, ff, region, r, nodes=nodes)
    rhs = lp_norm(M, ff, region, s, nodes=nodes)
    R = ball.radius
    expo = n / r - n / s
    if rhs == 0.0:
        return {"vacuous": True, "passed": True, "lhs": lhs, "rhs": rhs}
    c_emp = lhs / (R**expo * rhs)
    bound = (((1.0 + ball.epsilon) ** (n / 2.0)) * unit_ball_volume(n)) ** (1.0 / r - 1.0 / s)
    return {
        "vacuous": False,
        "lhs": lhs,
        "rhs": rhs,
        "c_empirical": c_emp,
        "c_bound": bound * (1.0 + slack),
        "passed": bool(c_emp <= bound * (1.0 + slack)),
    }
