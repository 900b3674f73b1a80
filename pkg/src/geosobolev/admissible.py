"""Epsilon-admissible balls and radius fields.

A ball around x is modelled as the Euclidean ball of radius R in the
normalized affine chart z = g(x)^{1/2} (y - x), where the metric pulls back to
the identity at the center.  Class 0 requires the pulled-back metric to stay
within [1-eps, 1+eps] as a bilinear form over the ball (condition (*)); class
1 additionally requires R times the summed sup of its first derivatives to be
at most eps (condition (**)).  Sups are estimated over a deterministic
low-discrepancy sample, so computed radii are certified lower bounds at
sampler resolution.

The admissible radius is min(1, R'/2) with R' found by bisection; the search
is capped at 4 and at the largest ball whose chart image stays inside the
chart domain (for periodic axes: inside half a period, which is what keeps
the chart injective on quotients like the cusp).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .manifold import ChartedManifold, Point

Array = np.ndarray

R_SEARCH_CAP = 4.0
BISECTION_REL_TOL = 1e-3
BISECTION_MAX_ITER = 30
MIN_RADIUS = 1e-6
DEFAULT_SAMPLER_M = 9  # 2^m low-discrepancy points per ball


class AdmissibilityError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

_UNIT_SAMPLES: dict[tuple[int, int], Array] = {}


def unit_ball_samples(n: int, m: int = DEFAULT_SAMPLER_M) -> Array:
    """Deterministic samples of the closed unit ball: 2^m Sobol points of the
    cube radially clamped to the sphere, plus the center and 2n axis points."""
    key = (n, m)
    if key not in _UNIT_SAMPLES:
        sob = qmc.Sobol(d=n, scramble=False)
        z = 2.0 * sob.random_base2(m) - 1.0
        norms = np.linalg.norm(z, axis=1)
        scale = np.where(norms > 1.0, 1.0 / np.where(norms == 0, 1.0, norms), 1.0)
        z = z * scale[:, None]
        extra = [np.zeros((1, n))]
        eye = np.eye(n)
        extra.append(eye)
        extra.append(-eye)
        _UNIT_SAMPLES[key] = np.vstack([z] + extra)
    return _UNIT_SAMPLES[key]


def ball_sample_points(radius: float, n: int, count_hint: int = 256) -> Array:
    m = max(4, int(np.ceil(np.log2(max(count_hint, 2)))))
    return radius * unit_ball_samples(n, m)


# ---------------------------------------------------------------------------
# admissibility test
# ---------------------------------------------------------------------------


def _sqrt_and_inv(g: Array) -> tuple[Array, Array]:
    vals, vecs = np.linalg.eigh(g)
    if np.min(vals) <= 0.0:
        raise AdmissibilityError("metric not positive definite at ball center")
    s = np.sqrt(vals)
    B = (vecs * s) @ vecs.T
    Binv = (vecs / s) @ vecs.T
    return B, Binv


def is_admissible(M: ChartedManifold, x: Point, R: float, cls: int, eps: float,
                  sampler_m: int = DEFAULT_SAMPLER_M,
                  normalizer: Optional[tuple[Array, Array]] = None) -> tuple[bool, dict]:
    """Check conditions (*) (and (**) for class 1) on a sampled ball.

    Monotone in R for a fixed normalizer: shrinking the ball shrinks every sup.
    """
    if R <= 0.0:
        raise AdmissibilityError("radius must be positive")
    chart = M.chart(x.chart)
    if normalizer is None:
        g0 = chart.metric_at(x.coords[None, :])[0]
        B, Binv = _sqrt_and_inv(g0)
    else:
        B, Binv = normalizer
    if not chart.domain.contains_ellipsoid(x.coords, R, Binv):
        return False, {"reason": "leaves chart"}

    zs = R * unit_ball_samples(M.dimension, sampler_m)
    pts = x.coords[None, :] + zs @ Binv.T
    g = chart.metric_at(pts)
    gt = np.einsum("ia,qij,jb->qab", Binv, g, Binv)
    lam = np.linalg.eigvalsh(gt)
    lam_min = float(np.min(lam))
    lam_max = float(np.max(lam))
    ok = lam_min >= 1.0 - eps and lam_max <= 1.0 + eps
    info = {"lam_min": lam_min, "lam_max": lam_max, "reason": "" if ok else "eigenvalue bound"}
    if cls == 1 and ok:
        dg = chart.partials_at(pts)
        dgt = np.einsum("qkij,kc,ia,jb->qcab", dg, Binv, Binv, Binv)
        deriv_sum = float(np.sum(np.max(np.abs(dgt), axis=(0, 2, 3))))
        info["deriv_term"] = R * deriv_sum
        ok = R * deriv_sum <= eps
        if not ok:
            info["reason"] = "derivative bound"
    elif cls not in (0, 1):
        raise AdmissibilityError(f"admissibility class must be 0 or 1, got {cls}")
    return ok, info


def admissible_radius(M: ChartedManifold, x: Point, cls: int, eps: float,
                      sampler_m: int = DEFAULT_SAMPLER_M,
                      trace: Optional[list] = None) -> tuple[float, float]:
    """Bisect for R'(x), return (R_eps, R') with R_eps = min(1, R'/2)."""
    chart = M.chart(x.chart)
    g0 = chart.metric_at(x.coords[None, :])[0]
    B, Binv = _sqrt_and_inv(g0)
    norm = (B, Binv)
    r_cap = min(R_SEARCH_CAP, chart.domain.max_ellipsoid_radius(x.coords, Binv))
    if r_cap <= MIN_RADIUS:
        raise AdmissibilityError("degenerate point: no admissible radius above 1e-6")

    def check(R: float) -> bool:
        ok, _ = is_admissible(M, x, R, cls, eps, sampler_m, norm)
        if trace is not None:
            trace.append((R, ok))
        return ok

    if check(r_cap):
        r_prime = r_cap
    else:
        lo = MIN_RADIUS
        if not check(lo):
            raise AdmissibilityError("degenerate point: no admissible radius above 1e-6")
        hi = r_cap
        for _ in range(BISECTION_MAX_ITER):
            if hi - lo <= BISECTION_REL_TOL * lo:
                break
            mid = 0.5 * (lo + hi)
            if check(mid):
                lo = mid
            else:
                hi = mid
        r_prime = lo
    return min(1.0, r_prime / 2.0), r_prime


# ---------------------------------------------------------------------------
# balls and radius fields
# ---------------------------------------------------------------------------


@dataclass
class AdmissibleBall:
    center: Point
    radius: float
    cls: int
    epsilon: float
    normalizer: Array       # maps chart displacements -> normalized coords
    inv_normalizer: Array

    def chart_points(self, zs: Array) -> Array:
        return self.center.coords[None, :] + zs @ self.inv_normalizer.T

    def normalized_of(self, pts: Array) -> Array:
        return (np.atleast_2d(pts) - self.center.coords[None, :]) @ self.normalizer.T


def make_ball(M: ChartedManifold, x: Point, cls: int, eps: float,
              radius: Optional[float] = None,
              sampler_m: int = DEFAULT_SAMPLER_M) -> AdmissibleBall:
    """Admissible ball at x; default radius is the admissible radius R_eps."""
    g0 = M.chart(x.chart).metric_at(x.coords[None, :])[0]
    B, Binv = _sqrt_and_inv(g0)
    if radius is None:
        radius, _ = admissible_radius(M, x, cls, eps, sampler_m)
    else:
        ok, info = is_admissible(M, x, radius, cls, eps, sampler_m, (B, Binv))
        if not ok:
            raise AdmissibilityError(f"ball of radius {radius} not admissible: {info['reason']}")
    return AdmissibleBall(x, float(radius), cls, eps, B, Binv)


@dataclass
class RadiusField:
    """Memoized admissible radii over a grid of window points."""

    manifold: ChartedManifold
    cls: int
    epsilon: float
    sampler_m: int
    grid: Array           # (N, n) chart coordinates
    values: Array         # R_eps
    raw: Array            # R'
    _tree: Optional[cKDTree] = dataclass_field(default=None, repr=False)

    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.grid)
        return self._tree

    def nearest_values(self, pts: Array) -> Array:
        _, idx = self.tree().query(np.atleast_2d(pts))
        return self.values[idx]

    def weight(self, pts: Array, gamma: float) -> Array:
        if gamma == 0.0:
            return np.ones(np.atleast_2d(pts).shape[0])
        return self.nearest_values(pts) ** gamma

    def min_radius(self) -> float:
        return float(np.min(self.values))


def radius_field(M: ChartedManifold, grid: Array, cls: int, eps: float,
                 sampler_m: int = DEFAULT_SAMPLER_M) -> RadiusField:
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    chart_id = M.window.chart_id
    values = np.empty(grid.shape[0])
    raw = np.empty(grid.shape[0])
    for i, coords in enumerate(grid):
        r_eps, r_prime = admissible_radius(M, Point(chart_id, coords), cls, eps, sampler_m)
        values[i] = r_eps
        raw[i] = r_prime
    return RadiusField(M, cls, eps, sampler_m, grid, values, raw)


# ---------------------------------------------------------------------------
# regularity checks
# ---------------------------------------------------------------------------


def verify_slow_variation(M: ChartedManifold, cls: int, eps: float, n_pairs: int,
                          rng: np.random.Generator, slack: float = 0.05,
                          sampler_m: int = DEFAULT_SAMPLER_M) -> dict:
    """Sample pairs y in B(x, R(x)) and check the [R/2, 2R] band plus the
    1-Lipschitz bound on R' (chart distances carry a (1+eps) factor)."""
    chart_id = M.window.chart_id
    chart = M.chart(chart_id)
    lo, hi = M.window.lo, M.window.hi
    band_viol = []
    lip_viol = []
    done = 0
    attempts = 0
    pairs = []
    while done < n_pairs and attempts < 50 * n_pairs:
        attempts += 1
        x = lo + (hi - lo) * rng.uniform(size=M.dimension)
        px = Point(chart_id, x)
        r_x, rp_x = admissible_radius(M, px, cls, eps, sampler_m)
        g0 = chart.metric_at(x[None, :])[0]
        B, Binv = _sqrt_and_inv(g0)
        direction = rng.normal(size=M.dimension)
        direction /= np.linalg.norm(direction)
        d = r_x * rng.uniform(0.05, 0.999)
        y = x + (d * direction) @ Binv.T
        if not np.all(M.window.contains(chart.domain.wrap(y[None, :]))):
            continue
        py = Point(chart_id, y)
        try:
            r_y, rp_y = admissible_radius(M, py, cls, eps, sampler_m)
        except AdmissibilityError:
            continue
        done += 1
        pairs.append((float(d), float(r_x), float(r_y)))
        if not (r_x / 2.0 * (1 - slack) <= r_y <= 2.0 * r_x * (1 + slack)):
            band_viol.append({"x": x.tolist(), "y": y.tolist(), "r_x": r_x, "r_y": r_y})
        lip_bound = (1.0 + eps) * (1.0 + slack) * d + 2e-3 * (rp_x + rp_y)
        if abs(rp_y - rp_x) > lip_bound:
            lip_viol.append({"x": x.tolist(), "y": y.tolist(), "d": d,
                             "rp_x": rp_x, "rp_y": rp_y})
    return {
        "pairs": done,
        "band_violations": band_viol,
        "lipschitz_violations": lip_viol,
        "slack": slack,
    }
