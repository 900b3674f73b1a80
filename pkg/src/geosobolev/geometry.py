"""Levi-Civita connection machinery: Christoffel symbols, curvature,
covariant derivatives and pointwise tensor norms.

Index conventions (batched over a leading point axis ``q``):
  metric          g[q, i, j]
  partials        dg[q, k, i, j] = d_k g_ij
  Christoffel     gamma[q, k, i, j] = G^k_ij   (symmetric in i, j)
  curvature       R[q, l, k, i, j] : R(e_i, e_j) e_k = R^l_kij e_l

Covariant tensors are stored dense, shape (q,) + (n,)*rank, with any
antisymmetric form block occupying the leading index slots.  Pointwise norms
contract every index with g^{-1} and divide by p! over the form block, so a
p-form's norm matches the coordinate identity integral(w ^ *w) = sum |a_J|^2 dv.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Optional

import numpy as np

from .manifold import ChartedManifold, Point

Array = np.ndarray

#: step for finite differences of Christoffel symbols (curvature is diagnostic)
FD_CURVATURE_STEP = 1e-4


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Christoffel symbols
# ---------------------------------------------------------------------------


def christoffel_batch(M: ChartedManifold, pts: Array, chart_id: Optional[str] = None) -> Array:
    """G^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij), shape (q,k,i,j)."""
    pts = np.atleast_2d(pts)
    g = M.metric_on(pts, chart_id)
    dg = M.partials_on(pts, chart_id)
    ginv = np.linalg.inv(g)
    # A[q,l,i,j] = d_i g_jl + d_j g_il - d_l g_ij
    A = np.transpose(dg, (0, 3, 1, 2)) + np.transpose(dg, (0, 3, 2, 1)) - dg
    return 0.5 * np.einsum("qkl,qlij->qkij", ginv, A)


def christoffel(M: ChartedManifold, p: Point) -> Array:
    g = M.metric_at(p)  # raises outside domain, checks evaluability
    if np.min(np.linalg.eigvalsh(g)) <= 0.0:
        raise GeometryError("metric is singular at point")
    return christoffel_batch(M, p.coords[None, :], p.chart)[0]


# ---------------------------------------------------------------------------
# curvature diagnostics
# ---------------------------------------------------------------------------


def riemann_batch(M: ChartedManifold, pts: Array, chart_id: Optional[str] = None) -> Array:
    """Curvature tensor R^l_kij via central differences of the Christoffels."""
    pts = np.atleast_2d(pts)
    m, n = pts.shape
    h = FD_CURVATURE_STEP
    dgamma = np.empty((m, n, n, n, n))  # [q, c, k, i, j] = d_c G^k_ij
    for c in range(n):
        dp = np.zeros(n)
        dp[c] = h
        gp = christoffel_batch(M, pts + dp, chart_id)
        gm = christoffel_batch(M, pts - dp, chart_id)
        dgamma[:, c] = (gp - gm) / (2.0 * h)
    gamma = christoffel_batch(M, pts, chart_id)
    # R^l_kij = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
    term = np.einsum("qiljk->qlkij", dgamma) - np.einsum("qjlik->qlkij", dgamma)
    quad = np.einsum("qlim,qmjk->qlkij", gamma, gamma)
    term += quad - np.einsum("qlkji->qlkij", quad)
    return term


def sectional_curvature(M: ChartedManifold, p: Point, v: Array, w: Array) -> float:
    """Sectional curvature of the plane span(v, w), K = <R(v,w)w, v>."""
    g = M.metric_at(p)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    e1 = v / np.sqrt(v @ g @ v)
    w2 = w - (w @ g @ e1) * e1
    nrm = np.sqrt(w2 @ g @ w2)
    if nrm < 1e-10 * np.sqrt(w @ g @ w):
        raise GeometryError("degenerate plane: vectors are parallel")
    e2 = w2 / nrm
    R = riemann_batch(M, p.coords[None, :], p.chart)[0]
    Rvw_w = np.einsum("lkij,k,i,j->l", R, e2, e1, e2)
    return float(g @ Rvw_w @ e1)


def ricci(M: ChartedManifold, p: Point) -> Array:
    """Ricci tensor Ric_kj = R^i_kij (symmetrised against FD noise)."""
    R = riemann_batch(M, p.coords[None, :], p.chart)[0]
    ric = np.einsum("ikij->kj", R)
    return 0.5 * (ric + ric.T)


def ricci_directional(M: ChartedManifold, p: Point, v: Array) -> float:
    """Mean sectional curvature along v: Ric(v,v) / ((n-1) |v|^4-normalised)."""
    g = M.metric_at(p)
    v = np.asarray(v, dtype=float)
    v = v / np.sqrt(v @ g @ v)
    ric = ricci(M, p)
    return float(v @ ric @ v) / (M.dimension - 1)


def ricci_eigenvalues(M: ChartedManifold, p: Point) -> Array:
    """Eigenvalues of g^{-1} Ric / (n-1); equal K on constant-curvature spaces."""
    g = M.metric_at(p)
    ric = ricci(M, p)
    vals = np.linalg.eigvals(np.linalg.solve(g, ric)) / (M.dimension - 1)
    return np.sort(vals.real)


# ---------------------------------------------------------------------------
# covariant derivative on dense covariant tensors
# ---------------------------------------------------------------------------


def covariant_from_partials(gamma: Array, values: Array, partials: Array) -> Array:
    """Assemble (nabla T)[q, idx.., j] = d_j T_idx - sum_s G^l_{i_s j} T[.., l, ..].

    ``values``  (q,) + (n,)*rank, ``partials`` (q,) + (n,)*rank + (n,) with the
    derivative index last, ``gamma`` (q, l, i, j).
    """
    rank = values.ndim - 1
    out = partials.copy()
    for s in range(rank):
        moved = np.moveaxis(values, 1 + s, -1)  # (q, other.., l)
        contr = np.einsum("q...l,qlij->q...ij", moved, gamma)
        out -= np.moveaxis(contr, -2, 1 + s)
    return out


def tensor_norm2_batch(ginv: Array, values: Array, form_rank: int = 0) -> Array:
    """Squared pointwise norm: raise every index with g^{-1}, contract, /p!."""
    raised = values
    for axis in range(1, values.ndim):
        moved = np.moveaxis(raised, axis, -1)
        moved = np.einsum("q...l,qlk->q...k", moved, ginv)
        raised = np.moveaxis(moved, -1, axis)
    prod = values * raised
    total = prod.reshape(prod.shape[0], -1).sum(axis=1)
    return total / factorial(form_rank)


def tensor_norm_batch(ginv: Array, values: Array, form_rank: int = 0) -> Array:
    return np.sqrt(np.maximum(tensor_norm2_batch(ginv, values, form_rank), 0.0))


def tensor_inner_batch(ginv: Array, a: Array, b: Array, form_rank: int = 0) -> Array:
    """Pointwise scalar product (a, b) with every index raised on one side."""
    raised = b
    for axis in range(1, b.ndim):
        moved = np.moveaxis(raised, axis, -1)
        moved = np.einsum("q...l,qlk->q...k", moved, ginv)
        raised = np.moveaxis(moved, -1, axis)
    prod = a * raised
    return prod.reshape(prod.shape[0], -1).sum(axis=1) / factorial(form_rank)


@dataclass(frozen=True)
class TensorValue:
    """Dense covariant tensor at a point; the leading ``form_rank`` index
    slots are the antisymmetric form block."""

    point: Point
    components: Array
    form_rank: int = 0

    @property
    def rank(self) -> int:
        return self.components.ndim


def pointwise_norm(M: ChartedManifold, value: TensorValue) -> float:
    """Pointwise modulus |T|_g at the tensor's base point."""
    ginv = np.linalg.inv(M.metric_at(value.point))[None]
    return float(tensor_norm_batch(ginv, value.components[None], value.form_rank)[0])


# ---------------------------------------------------------------------------
# control of the connection by metric derivatives
# ---------------------------------------------------------------------------


def cmt_check(M: ChartedManifold, ball, n_samples: int = 256) -> dict:
    """Ratio of |Christoffel| to the summed sup of first metric derivatives.

    Both are evaluated in the ball's normalized chart, where the admissibility
    eigenvalue bounds hold; the comparison factor is (3/2)(1+eps).
    """
    from .admissible import ball_sample_points  # local import avoids a cycle

    zs = ball_sample_points(ball.radius, M.dimension, n_samples)
    pts = ball.center.coords[None, :] + zs @ ball.inv_normalizer.T
    gamma = christoffel_batch(M, pts, ball.center.chart)
    dg = M.partials_on(pts, ball.center.chart)
    B, Binv = ball.normalizer, ball.inv_normalizer
    gamma_t = np.einsum("ck,qkij,ia,jb->qcab", B, gamma, Binv, Binv)
    dg_t = np.einsum("qkij,kc,ia,jb->qcab", dg, Binv, Binv, Binv)

    num = np.max(np.abs(gamma_t), axis=(1, 2, 3))
    den = np.sum(np.max(np.abs(dg_t), axis=(2, 3)), axis=1)
    bound = 1.5 * (1.0 + ball.epsilon)
    if np.max(den) < 1e-14:
        return {"vacuous": True, "reason": "flat", "max_ratio": 0.0, "bound": bound, "violated": False}
    mask = den > 1e-14
    ratios = num[mask] / den[mask]
    max_ratio = float(np.max(ratios))
    return {
        "vacuous": False,
        "max_ratio": max_ratio,
        "bound": bound,
        "violated": bool(max_ratio > bound),
        "samples": int(mask.sum()),
    }
