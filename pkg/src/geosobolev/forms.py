"""Differential p-forms on a chart window and their calculus.

A form is a set of coefficient functions a_J, one per strictly increasing
multi-index J (0-based), with declared compact support.  Coefficients expose
batched ``value``/``grad`` (and usually ``hess``) so exterior and covariant
derivatives stay analytic where possible; derived coefficients fall back to
central differences of the parent's gradient.

Two Hodge star flavors are provided: the ``flat_chart`` coordinate star,
*w = (-1)^{sigma(J)} a_{J^c} dx^{J^c} with sigma the parity of (J, J^c), valid
as an eps-approximation inside admissible charts, and the ``metric`` star,
which satisfies (w, eta) dv = w ^ *eta pointwise and is the ground truth.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial
from typing import Optional

import numpy as np

from .geometry import covariant_from_partials, christoffel_batch, tensor_norm_batch
from .manifold import ChartedManifold

Array = np.ndarray

FD_COEFF_STEP = 1e-4
FD_NABLA2_STEP = 1e-4


class FormError(ValueError):
    pass


# ---------------------------------------------------------------------------
# multi-index utilities
# ---------------------------------------------------------------------------


def increasing_indices(n: int, p: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n), p))


def perm_parity(seq) -> int:
    """Sign of the permutation given as a sequence of distinct integers."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def complement(J: tuple[int, ...], n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if i not in J)


def complement_sign(J: tuple[int, ...], n: int) -> int:
    """Parity of the permutation (J, J^c) of (0..n-1)."""
    return perm_parity(tuple(J) + complement(J, n))


def insertion_sign(j: int, J: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign and target index of dx^j ^ dx^J; (0, ()) if j is in J."""
    if j in J:
        return 0, ()
    pos = sum(1 for i in J if i < j)
    return (-1) ** pos, tuple(sorted((j,) + J))


# ---------------------------------------------------------------------------
# coefficient functions
# ---------------------------------------------------------------------------


class ConstantCoeff:
    def __init__(self, c: float):
        self.c = float(c)

    def value(self, pts: Array) -> Array:
        return np.full(np.atleast_2d(pts).shape[0], self.c)

    def grad(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        return np.zeros_like(pts)

    def hess(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        m, n = pts.shape
        return np.zeros((m, n, n))


class PolynomialCoeff:
    """Multivariate polynomial, exact derivatives. terms: {exponents: coef}."""

    def __init__(self, n: int, terms: dict[tuple[int, ...], float]):
        self.n = n
        self.terms = {tuple(k): float(v) for k, v in terms.items() if v != 0.0}

    def value(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0])
        for exps, c in self.terms.items():
            term = np.full(pts.shape[0], c)
            for i, e in enumerate(exps):
                if e:
                    term = term * pts[:, i] ** e
            out += term
        return out

    def partial(self, i: int) -> "PolynomialCoeff":
        terms: dict[tuple[int, ...], float] = {}
        for exps, c in self.terms.items():
            if exps[i] == 0:
                continue
            new = list(exps)
            new[i] -= 1
            key = tuple(new)
            terms[key] = terms.get(key, 0.0) + c * exps[i]
        return PolynomialCoeff(self.n, terms)

    def grad(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        return np.stack([self.partial(i).value(pts) for i in range(self.n)], axis=1)

    def hess(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        return np.stack([self.partial(i).grad(pts) for i in range(self.n)], axis=1)


class GradComponentCoeff:
    """The function x -> d_j parent(x); gradient comes from the parent hessian."""

    def __init__(self, parent, j: int):
        self.parent = parent
        self.j = j

    def value(self, pts: Array) -> Array:
        return self.parent.grad(np.atleast_2d(pts))[:, self.j]

    def grad(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        if hasattr(self.parent, "hess"):
            return self.parent.hess(pts)[:, self.j, :]
        return _fd_grad(self.value, pts)

    def hess(self, pts: Array) -> Array:
        return _fd_hess_of_grad(self.grad, np.atleast_2d(pts))


class SumCoeff:
    """Weighted sum of coefficient functions."""

    def __init__(self, terms: list[tuple[float, object]]):
        self.terms = [(float(w), c) for w, c in terms]

    def value(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0])
        for w, c in self.terms:
            out += w * c.value(pts)
        return out

    def grad(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        out = np.zeros_like(pts)
        for w, c in self.terms:
            out += w * c.grad(pts)
        return out

    def hess(self, pts: Array) -> Array:
        pts = np.atleast_2d(pts)
        m, n = pts.shape
        out = np.zeros((m, n, n))
        for w, c in self.terms:
            out += w * c.hess(pts)
        return out


class CallableCoeff:
    """Coefficient given by a batched callable; derivatives by differences."""

    def __init__(self, fn):
        self.fn = fn

    def value(self, pts: Array) -> Array:
        return self.fn(np.atleast_2d(pts))

    def grad(self, pts: Array) -> Array:
        return _fd_grad(self.value, np.atleast_2d(pts))


def _fd_grad(fn, pts: Array, h: float = FD_COEFF_STEP) -> Array:
    m, n = pts.shape
    out = np.empty((m, n))
    for i in range(n):
        dp = np.zeros(n)
        dp[i] = h
        out[:, i] = (fn(pts + dp) - fn(pts - dp)) / (2.0 * h)
    return out


def _fd_hess_of_grad(grad_fn, pts: Array, h: float = FD_COEFF_STEP) -> Array:
    m, n = pts.shape
    out = np.empty((m, n, n))
    for i in range(n):
        dp = np.zeros(n)
        dp[i] = h
        out[:, i, :] = (grad_fn(pts + dp) - grad_fn(pts - dp)) / (2.0 * h)
    return out


# ---------------------------------------------------------------------------
# form fields
# ---------------------------------------------------------------------------


@dataclass
class FormField:
    """Degree-p form with per-multi-index coefficients and compact support."""

    n: int
    degree: int
    coeffs: dict[tuple[int, ...], object]
    support_lo: Array
    support_hi: Array
    label: str = ""

    def __post_init__(self):
        self.support_lo = np.asarray(self.support_lo, dtype=float)
        self.support_hi = np.asarray(self.support_hi, dtype=float)
        valid = set(increasing_indices(self.n, self.degree))
        for J in self.coeffs:
            if tuple(J) not in valid:
                raise FormError(f"multi-index {J} is not strictly increasing of length {self.degree}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.degree

    def coeff_values(self, pts: Array) -> dict[tuple[int, ...], Array]:
        pts = np.atleast_2d(pts)
        return {J: c.value(pts) for J, c in self.coeffs.items()}

    def values_dense(self, pts: Array) -> Array:
        """Dense antisymmetric tensor, (m,) + (n,)*p."""
        pts = np.atleast_2d(pts)
        out = np.zeros((pts.shape[0],) + self.shape)
        for J, c in self.coeffs.items():
            val = c.value(pts)
            for perm in itertools.permutations(range(self.degree)):
                idx = tuple(J[k] for k in perm)
                out[(slice(None),) + idx] += perm_parity(perm) * val
        return out

    def partials_dense(self, pts: Array) -> Array:
        """d_j T_idx, derivative index last: (m,) + (n,)*p + (n,)."""
        pts = np.atleast_2d(pts)
        out = np.zeros((pts.shape[0],) + self.shape + (self.n,))
        for J, c in self.coeffs.items():
            gr = c.grad(pts)
            for perm in itertools.permutations(range(self.degree)):
                idx = tuple(J[k] for k in perm)
                out[(slice(None),) + idx + (slice(None),)] += perm_parity(perm) * gr
        return out

    def scaled(self, factor: float) -> "FormField":
        coeffs = {J: SumCoeff([(factor, c)]) for J, c in self.coeffs.items()}
        return FormField(self.n, self.degree, coeffs, self.support_lo, self.support_hi,
                         label=f"{self.label}*{factor:g}")


def scalar_field(n: int, coeff, support_lo, support_hi, label: str = "") -> FormField:
    return FormField(n, 0, {(): coeff}, support_lo, support_hi, label=label)


# ---------------------------------------------------------------------------
# exterior derivative
# ---------------------------------------------------------------------------


def exterior_derivative(ff: FormField) -> FormField:
    """dw = (d_j a_J) dx^j ^ dx^J assembled into increasing multi-indices."""
    if ff.degree >= ff.n:
        raise FormError("cannot take d of a top-degree form")
    terms: dict[tuple[int, ...], list[tuple[float, object]]] = {}
    for J, c in ff.coeffs.items():
        for j in range(ff.n):
            sign, K = insertion_sign(j, J)
            if sign == 0:
                continue
            terms.setdefault(K, []).append((float(sign), GradComponentCoeff(c, j)))
    coeffs = {K: SumCoeff(parts) for K, parts in terms.items()}
    return FormField(ff.n, ff.degree + 1, coeffs, ff.support_lo, ff.support_hi,
                     label=f"d({ff.label})" if ff.label else "")


# ---------------------------------------------------------------------------
# Hodge star
# ---------------------------------------------------------------------------


def _levi_civita(n: int) -> Array:
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        eps[perm] = perm_parity(perm)
    return eps


_EPS_CACHE: dict[int, Array] = {}


def levi_civita(n: int) -> Array:
    if n not in _EPS_CACHE:
        _EPS_CACHE[n] = _levi_civita(n)
    return _EPS_CACHE[n]


def hodge_star_values(g: Array, values: Array, p: int, flavor: str = "metric") -> Array:
    """Star of dense p-form values; (m, ...) in, (m, n-p indices) out.

    metric flavor: (*T)_K = (1/p!) sqrt(det g) T^{J} eps_{J K};
    flat_chart flavor: the coordinate permutation-sign formula (g ignored).
    """
    m = values.shape[0]
    n = g.shape[-1]
    if flavor == "flat_chart":
        coeffs = dense_to_coeff_arrays(values, n, p)
        out = np.zeros((m,) + (n,) * (n - p))
        for J, val in coeffs.items():
            K = complement(J, n)
            sgn = complement_sign(J, n)
            _accumulate_dense(out, K, sgn * val)
        return out
    if flavor != "metric":
        raise FormError(f"unknown hodge flavor {flavor!r}")
    ginv = np.linalg.inv(g)
    sqrtdet = np.sqrt(np.linalg.det(g))
    raised = values
    for axis in range(1, values.ndim):
        moved = np.moveaxis(raised, axis, -1)
        raised = np.moveaxis(np.einsum("q...l,qlk->q...k", moved, ginv), -1, axis)
    eps_flat = levi_civita(n).reshape(n**p, n ** (n - p))
    out_flat = raised.reshape(m, n**p) @ eps_flat
    out = out_flat.reshape((m,) + (n,) * (n - p))
    return out * sqrtdet.reshape((m,) + (1,) * (n - p)) / factorial(p)


def dense_to_coeff_arrays(values: Array, n: int, p: int) -> dict[tuple[int, ...], Array]:
    return {J: values[(slice(None),) + J] for J in increasing_indices(n, p)}


def _accumulate_dense(out: Array, J: tuple[int, ...], val: Array):
    p = len(J)
    for perm in itertools.permutations(range(p)):
        idx = tuple(J[k] for k in perm)
        out[(slice(None),) + idx] += perm_parity(perm) * val


def coeff_arrays_to_dense(coeffs: dict[tuple[int, ...], Array], m: int, n: int, p: int) -> Array:
    out = np.zeros((m,) + (n,) * p)
    for J, val in coeffs.items():
        _accumulate_dense(out, J, val)
    return out


def hodge_star_flat_field(ff: FormField) -> FormField:
    """Field-level coordinate star (keeps coefficients analytic)."""
    coeffs: dict[tuple[int, ...], object] = {}
    for J, c in ff.coeffs.items():
        K = complement(J, ff.n)
        coeffs[K] = SumCoeff([(float(complement_sign(J, ff.n)), c)])
    return FormField(ff.n, ff.n - ff.degree, coeffs, ff.support_lo, ff.support_hi,
                     label=f"*({ff.label})" if ff.label else "")


def wedge_coeff_arrays(c1, p1: int, c2, p2: int, n: int) -> dict[tuple[int, ...], Array]:
    """Coefficient arrays of the wedge of two forms given as coefficient dicts."""
    out: dict[tuple[int, ...], Array] = {}
    for J1, v1 in c1.items():
        for J2, v2 in c2.items():
            if set(J1) & set(J2):
                continue
            merged = tuple(J1) + tuple(J2)
            sgn = perm_parity(np.argsort(merged))
            K = tuple(sorted(merged))
            contrib = sgn * v1 * v2
            out[K] = out.get(K, 0.0) + contrib
    return out


# ---------------------------------------------------------------------------
# covariant derivatives of forms
# ---------------------------------------------------------------------------


def nabla_values(M: ChartedManifold, ff: FormField, pts: Array) -> Array:
    """(nabla w)[q, J.., j]: coefficient partials minus one Christoffel
    contraction per form index."""
    pts = np.atleast_2d(pts)
    gamma = christoffel_batch(M, pts)
    return covariant_from_partials(gamma, ff.values_dense(pts), ff.partials_dense(pts))


def nabla2_values(M: ChartedManifold, ff: FormField, pts: Array,
                  h: float = FD_NABLA2_STEP) -> Array:
    """Second covariant derivative; outer layer by central differences."""
    pts = np.atleast_2d(pts)
    m, n = pts.shape
    first = nabla_values(M, ff, pts)
    partials = np.empty(first.shape + (n,))
    for j in range(n):
        dp = np.zeros(n)
        dp[j] = h
        partials[..., j] = (nabla_values(M, ff, pts + dp) - nabla_values(M, ff, pts - dp)) / (2.0 * h)
    gamma = christoffel_batch(M, pts)
    return covariant_from_partials(gamma, first, partials)


def covariant_derivative(M: ChartedManifold, ff: FormField, p) -> "TensorValue":
    """nabla of a scalar or p-form field at a point, as a TensorValue."""
    from .geometry import TensorValue

    comps = nabla_values(M, ff, p.coords[None, :])[0]
    return TensorValue(p, comps, ff.degree)


def hodge_star_at(M: ChartedManifold, p, values: Array, degree: int,
                  flavor: str = "metric") -> Array:
    """Star of a single dense form value at a point."""
    g = M.metric_at(p)[None]
    return hodge_star_values(g, np.asarray(values, dtype=float)[None], degree, flavor)[0]


def nabla_j_values(M: ChartedManifold, ff: FormField, pts: Array, order: int) -> Array:
    if order == 0:
        return ff.values_dense(pts)
    if order == 1:
        return nabla_values(M, ff, pts)
    if order == 2:
        return nabla2_values(M, ff, pts)
    raise FormError("covariant derivatives supported up to order 2")


def form_norm_values(M: ChartedManifold, ff: FormField, pts: Array, order: int = 0) -> Array:
    """|nabla^order w|_g at each point."""
    pts = np.atleast_2d(pts)
    vals = nabla_j_values(M, ff, pts, order)
    ginv = np.linalg.inv(M.metric_on(pts))
    return tensor_norm_batch(ginv, vals, ff.degree)


# ---------------------------------------------------------------------------
# codifferential
# ---------------------------------------------------------------------------


def codifferential_values(M: ChartedManifold, ff: FormField, pts: Array,
                          flavor: str = "metric") -> Array:
    """d* w as dense (p-1)-form values.

    metric flavor: the metric trace -g^{jk} (nabla_j w)_{k ...}, which equals
    (-1)^p *^{-1} d * for the Levi-Civita connection; flat_chart flavor applies
    the coordinate star / d / inverse coordinate star composition literally.
    """
    if ff.degree == 0:
        raise FormError("codifferential of a 0-form")
    pts = np.atleast_2d(pts)
    if flavor == "metric":
        nab = nabla_values(M, ff, pts)  # (q, k, rest.., j)
        ginv = np.linalg.inv(M.metric_on(pts))
        return -np.einsum("qjk,qk...j->q...", ginv, nab)
    if flavor == "flat_chart":
        return codifferential_flat_field(ff).values_dense(pts)
    raise FormError(f"unknown codifferential flavor {flavor!r}")


def codifferential_flat_field(ff: FormField) -> FormField:
    """(-1)^p *^{-1} d * with the coordinate star; exact on analytic coeffs."""
    p, n = ff.degree, ff.n
    if p == 0:
        raise FormError("codifferential of a 0-form")
    star = hodge_star_flat_field(ff)
    dstar = exterior_derivative(star)
    # inverse of the coordinate star on degree n-p+1: ** = (-1)^{p'(n-p')}
    p2 = n - p + 1
    inv_sign = (-1) ** (p2 * (n - p2))
    back = hodge_star_flat_field(dstar)
    sign = inv_sign * (-1) ** p
    coeffs = {J: SumCoeff([(float(sign), c)]) for J, c in back.coeffs.items()}
    return FormField(n, p - 1, coeffs, ff.support_lo, ff.support_hi,
                     label=f"d*({ff.label})" if ff.label else "")


def codifferential_field(M: ChartedManifold, ff: FormField, flavor: str = "metric") -> FormField:
    """d* as a FormField; metric flavor coefficients are pointwise closures."""
    if flavor == "flat_chart":
        return codifferential_flat_field(ff)
    p, n = ff.degree, ff.n
    coeffs: dict[tuple[int, ...], object] = {}
    for K in increasing_indices(n, p - 1):
        def component(pts, K=K):
            dense = codifferential_values(M, ff, pts, "metric")
            return dense[(slice(None),) + K]

        coeffs[K] = CallableCoeff(component)
    return FormField(n, p - 1, coeffs, ff.support_lo, ff.support_hi,
                     label=f"d*({ff.label})" if ff.label else "")
