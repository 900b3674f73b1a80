"""Compactly supported smooth test fields.

The family is the elliptical bump exp(1 - 1/(1 - s)) with
s = sum_i ((x_i - c_i)/rho_i)^2, truncated at s >= 1, optionally multiplied by
an affine modulation.  Value, gradient and hessian are analytic, so exterior
and covariant derivatives of bump fields stay finite-difference free at first
order.  A width of None makes the bump constant along that axis ("wrap" bumps
on the periodic cusp angle are the intended use).
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .forms import FormField
from .manifold import Window

Array = np.ndarray


class BumpCoeff:
    def __init__(self, center: Sequence[float], widths: Sequence[Optional[float]],
                 amplitude: float = 1.0, slope: Optional[Sequence[float]] = None):
        self.center = np.asarray(center, dtype=float)
        self.widths = tuple(None if w is None else float(w) for w in widths)
        self.amplitude = float(amplitude)
        self.slope = None if slope is None else np.asarray(slope, dtype=float)
        self.active = np.array([w is not None for w in self.widths])
        self._inv_w2 = np.array([0.0 if w is None else 1.0 / w**2 for w in self.widths])

    # -- bump profile e(s) = exp(1 - 1/(1-s)), e' = -e/(1-s)^2 ----------------

    def _s_terms(self, pts: Array):
        pts = np.atleast_2d(pts)
        d = pts - self.center
        s = np.sum(d**2 * self._inv_w2, axis=1)
        inside = s < 1.0 - 1e-12
        return pts, d, s, inside

    @staticmethod
    def _profile(s: Array, inside: Array):
        e = np.zeros_like(s)
        one_m = np.where(inside, 1.0 - s, 1.0)
        e[inside] = np.exp(1.0 - 1.0 / one_m[inside])
        return e, one_m

    def _modulation(self, d: Array):
        if self.slope is None:
            m = np.ones(d.shape[0])
            dm = np.zeros_like(d)
        else:
            m = 1.0 + d @ self.slope
            dm = np.broadcast_to(self.slope, d.shape)
        return m, dm

    def value(self, pts: Array) -> Array:
        pts, d, s, inside = self._s_terms(pts)
        e, _ = self._profile(s, inside)
        m, _ = self._modulation(d)
        return self.amplitude * e * m

    def grad(self, pts: Array) -> Array:
        pts, d, s, inside = self._s_terms(pts)
        e, one_m = self._profile(s, inside)
        m, dm = self._modulation(d)
        eprime = np.where(inside, -e / one_m**2, 0.0)
        ds = 2.0 * d * self._inv_w2
        return self.amplitude * (eprime[:, None] * ds * m[:, None] + e[:, None] * dm)

    def hess(self, pts: Array) -> Array:
        pts, d, s, inside = self._s_terms(pts)
        e, one_m = self._profile(s, inside)
        m, dm = self._modulation(d)
        eprime = np.where(inside, -e / one_m**2, 0.0)
        esecond = np.where(inside, e * (1.0 / one_m**4 - 2.0 / one_m**3), 0.0)
        ds = 2.0 * d * self._inv_w2
        n = pts.shape[1]
        sij = 2.0 * np.diag(self._inv_w2)
        h = esecond[:, None, None] * ds[:, :, None] * ds[:, None, :] * m[:, None, None]
        h += eprime[:, None, None] * (sij[None, :, :] * m[:, None, None]
                                      + ds[:, :, None] * dm[:, None, :]
                                      + ds[:, None, :] * dm[:, :, None])
        return self.amplitude * h

    def support_box(self, window: Window) -> tuple[Array, Array]:
        lo = window.lo.copy()
        hi = window.hi.copy()
        for i, w in enumerate(self.widths):
            if w is not None:
                lo[i] = self.center[i] - w
                hi[i] = self.center[i] + w
        return lo, hi


def scalar_bump(window: Window, center, widths, amplitude: float = 1.0,
                slope=None, label: str = "") -> FormField:
    c = BumpCoeff(center, widths, amplitude, slope)
    lo, hi = c.support_box(window)
    n = window.center.size
    return FormField(n, 0, {(): c}, lo, hi, label=label)


def form_bump(window: Window, degree: int,
              components: dict[tuple[int, ...], BumpCoeff], label: str = "") -> FormField:
    n = window.center.size
    lo = np.full(n, np.inf)
    hi = np.full(n, -np.inf)
    for c in components.values():
        clo, chi = c.support_box(window)
        lo = np.minimum(lo, clo)
        hi = np.maximum(hi, chi)
    return FormField(n, degree, dict(components), lo, hi, label=label)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _random_bump(window: Window, rng: np.random.Generator,
                 width_frac: tuple[float, float], modulated: bool) -> BumpCoeff:
    n = window.center.size
    hw = window.halfwidths
    widths = hw * rng.uniform(width_frac[0], width_frac[1], size=n)
    lo = window.lo + widths
    hi = window.hi - widths
    center = lo + (hi - lo) * rng.uniform(size=n)
    amp = rng.uniform(0.5, 2.0)
    slope = rng.uniform(-0.5, 0.5, size=n) / np.maximum(widths, 1e-12) if modulated else None
    return BumpCoeff(center, widths, amp, slope)


def random_scalar_suite(window: Window, rng: np.random.Generator, count: int,
                        width_frac: tuple[float, float] = (0.1, 0.3),
                        modulated: bool = True) -> list[FormField]:
    out = []
    for i in range(count):
        c = _random_bump(window, rng, width_frac, modulated)
        lo, hi = c.support_box(window)
        out.append(FormField(window.center.size, 0, {(): c}, lo, hi, label=f"bump{i}"))
    return out


def random_form_suite(window: Window, rng: np.random.Generator, count: int, degree: int,
                      width_frac: tuple[float, float] = (0.1, 0.3),
                      modulated: bool = True) -> list[FormField]:
    from .forms import increasing_indices

    n = window.center.size
    multis = increasing_indices(n, degree)
    out = []
    for i in range(count):
        comps = {}
        for J in multis:
            if len(multis) > 1 and rng.uniform() < 0.25:
                continue  # occasionally drop a component
            comps[J] = _random_bump(window, rng, width_frac, modulated)
        if not comps:
            comps[multis[0]] = _random_bump(window, rng, width_frac, modulated)
        out.append(form_bump(window, degree, comps, label=f"form{i}"))
    return out


def ball_bump(ball, degree: int = 0, frac: float = 0.85, amplitude: float = 1.0,
              slope=None, offset=None, component: Optional[tuple[int, ...]] = None,
              label: str = "") -> FormField:
    """Bump supported inside an admissible ball (normalized radius frac*R)."""
    n = ball.center.coords.size
    binv_diag = np.diag(ball.inv_normalizer)
    if not np.allclose(ball.inv_normalizer, np.diag(binv_diag)):
        raise ValueError("ball_bump assumes a diagonal normalizer")
    center = ball.center.coords.copy()
    reach = frac
    if offset is not None:
        center = center + np.asarray(offset, dtype=float) * binv_diag * ball.radius
        reach = min(frac, 0.98 - float(np.linalg.norm(offset)))
    widths = reach * ball.radius * binv_diag
    c = BumpCoeff(center, widths, amplitude, slope)
    lo, hi = center - widths, center + widths
    if degree == 0:
        return FormField(n, 0, {(): c}, lo, hi, label=label)
    J = component if component is not None else tuple(range(degree))
    return FormField(n, degree, {J: c}, lo, hi, label=label)


def wrap_scalar_bump(window: Window, t_center: float, t_width: float,
                     amplitude: float = 1.0, label: str = "") -> FormField:
    """Cusp 'wrap' bump: constant along the periodic angle, bump in depth."""
    n = window.center.size
    center = window.center.copy()
    center[0] = t_center
    widths: list[Optional[float]] = [None] * n
    widths[0] = t_width
    c = BumpCoeff(center, widths, amplitude)
    lo, hi = c.support_box(window)
    return FormField(n, 0, {(): c}, lo, hi, label=label)


def wrap_form_bump(window: Window, t_center: float, t_width: float,
                   component: tuple[int, ...] = (0,), amplitude: float = 1.0,
                   label: str = "") -> FormField:
    n = window.center.size
    center = window.center.copy()
    center[0] = t_center
    widths: list[Optional[float]] = [None] * n
    widths[0] = t_width
    c = BumpCoeff(center, widths, amplitude)
    lo, hi = c.support_box(window)
    return FormField(n, len(component), {component: c}, lo, hi, label=label)
