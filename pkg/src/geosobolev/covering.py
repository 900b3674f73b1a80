"""Vitali-type admissible coverings with measured overlap.

Base balls have radius r(x) = R_eps(x)/10; the greedy selection walks
candidates in decreasing-radius order (ties broken lexicographically) and
accepts a candidate whose base ball is disjoint from every accepted one under
the two-sided normalized-chart distance test with a (1+eps) safety factor.
Dilated balls (factor 5, radius R_eps/2) must cover every probe point; probes
use membership shrunk by (1+eps) so coverage is certified conservatively,
while overlap counts use membership expanded by (1+eps) so the bound
comparison is conservative from the other side.

Candidate radii come from the nearest-grid interpolation of the memoized
radius field, the same interpolation the weights use; slow variation keeps the
drift within a factor 2 and coverage is verified directly by probing anyway.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .admissible import AdmissibleBall, RadiusField, _sqrt_and_inv
from .manifold import BoxDomain, ChartedManifold, Point

Array = np.ndarray

DILATION = 5


class CoveringError(RuntimeError):
    pass


def overlap_bound(n: int, eps: float) -> float:
    """Paper bound on the overlap of the dilated covering."""
    return ((1.0 + eps) / (1.0 - eps)) ** (n / 2.0) * 100.0**n


def overlap_bound_full(n: int, eps: float) -> float:
    """Same for the full-radius ball family (extra factor 2^n)."""
    return overlap_bound(n, eps) * 2.0**n


@dataclass
class Covering:
    manifold: ChartedManifold
    cls: int
    epsilon: float
    centers: Array            # (A, n)
    radii_eps: Array          # R_eps at the accepted centers
    normalizers: Array        # (A, n, n)
    inv_normalizers: Array
    dilation: int = DILATION
    stats: dict = dataclass_field(default_factory=dict)

    @property
    def base_radii(self) -> Array:
        return self.radii_eps / 10.0

    @property
    def dilated_radii(self) -> Array:
        return self.radii_eps / 2.0

    def full_ball(self, i: int) -> AdmissibleBall:
        return AdmissibleBall(
            Point(self.manifold.window.chart_id, self.centers[i]),
            float(self.radii_eps[i]), self.cls, self.epsilon,
            self.normalizers[i], self.inv_normalizers[i],
        )

    def to_dict(self) -> dict:
        return {
            "n_balls": int(self.centers.shape[0]),
            "class": self.cls,
            "epsilon": self.epsilon,
            "dilation": self.dilation,
            "min_radius": float(np.min(self.radii_eps)),
            "max_radius": float(np.max(self.radii_eps)),
            "stats": {k: (float(v) if np.isscalar(v) else v) for k, v in self.stats.items()},
        }


def _wrap_displacement(M: ChartedManifold, disp: Array) -> Array:
    dom = M.window_chart.domain
    if isinstance(dom, BoxDomain):
        disp = disp.copy()
        for i, per in enumerate(dom.periods):
            if per is not None:
                disp[..., i] = (disp[..., i] + per / 2.0) % per - per / 2.0
    return disp


def candidate_grid(M: ChartedManifold, rfield: RadiusField, pitch_factor: float = 0.5) -> Array:
    """Candidate points with local normalized pitch <= pitch_factor * r(x).

    Rows are stratified along axis 0; per-row spacing along the other axes is
    set from the row-local radius and metric so the pitch condition holds
    everywhere even on multiscale windows.
    """
    lo, hi = M.window.lo, M.window.hi
    n = M.dimension
    rows = []
    x0 = lo[0]
    guard = 0
    while x0 < hi[0] and guard < 200000:
        guard += 1
        mid = 0.5 * (lo + hi)
        probe = mid.copy()
        probe[0] = x0
        # row-local scale: conservative minimum over a few cross-row probes
        cross = np.linspace(lo, hi, 5)
        cross[:, 0] = x0
        r_loc = float(np.min(rfield.nearest_values(cross))) / 10.0
        pitch = pitch_factor * r_loc
        g = M.metric_on(cross)
        binv_rows = 1.0 / np.sqrt(np.maximum(np.einsum("qii->qi", g), 1e-300))
        steps = pitch * np.min(binv_rows, axis=0)  # chart-coordinate steps
        x0_next = x0 + steps[0]
        if n == 1:
            rows.append(np.array([[min(x0 + steps[0] / 2, hi[0])]]))
        else:
            axes = []
            for i in range(1, n):
                k = max(1, int(np.ceil((hi[i] - lo[i]) / steps[i])))
                axes.append(lo[i] + (hi[i] - lo[i]) * (np.arange(k) + 0.5) / k)
            mesh = np.meshgrid(*axes, indexing="ij")
            pts = np.stack([np.full(mesh[0].size, min(x0 + steps[0] / 2, hi[0]))]
                           + [m.ravel() for m in mesh], axis=1)
            rows.append(pts)
        x0 = x0_next
    if guard >= 200000:
        raise CoveringError("candidate grid too large; shrink the window")
    return np.vstack(rows)


def vitali_cover(M: ChartedManifold, rfield: RadiusField, candidates: Array,
                 probe_factor: int = 4, check_coverage: bool = True) -> Covering:
    """Greedy Vitali selection over the candidate set, plus probe coverage check."""
    candidates = np.atleast_2d(candidates)
    radii = rfield.nearest_values(candidates)
    base = radii / 10.0
    eps = rfield.epsilon

    g = M.metric_on(candidates)
    vals, vecs = np.linalg.eigh(g)
    s = np.sqrt(vals)
    B_all = np.einsum("qik,qk,qjk->qij", vecs, s, vecs)
    Binv_all = np.einsum("qik,qk,qjk->qij", vecs, 1.0 / s, vecs)

    # decreasing radius, then lexicographic coordinates
    order = np.lexsort(tuple(candidates[:, i] for i in range(M.dimension - 1, -1, -1)) + (-base,))

    A = 0
    acc_centers = np.empty_like(candidates)
    acc_base = np.empty(candidates.shape[0])
    acc_reps = np.empty(candidates.shape[0])
    acc_B = np.empty_like(B_all)
    acc_Binv = np.empty_like(Binv_all)
    safety = 1.0 + eps
    for idx in order:
        c = candidates[idx]
        if A:
            disp = _wrap_displacement(M, c[None, :] - acc_centers[:A])
            d_new = np.linalg.norm(disp @ B_all[idx].T, axis=1)
            d_acc = np.linalg.norm(np.einsum("kij,kj->ki", acc_B[:A], disp), axis=1)
            if np.any(np.minimum(d_new, d_acc) < safety * (base[idx] + acc_base[:A])):
                continue
        acc_centers[A] = c
        acc_base[A] = base[idx]
        acc_reps[A] = radii[idx]
        acc_B[A] = B_all[idx]
        acc_Binv[A] = Binv_all[idx]
        A += 1

    cover = Covering(M, rfield.cls, eps, acc_centers[:A].copy(), acc_reps[:A].copy(),
                     acc_B[:A].copy(), acc_Binv[:A].copy())
    if check_coverage:
        probes = candidate_grid(M, rfield, pitch_factor=0.5 / probe_factor)
        uncovered = coverage_gaps(cover, probes)
        if uncovered.size:
            raise CoveringError(
                f"grid too coarse: probe point {uncovered[0].tolist()} uncovered")
        cover.stats["probes"] = int(probes.shape[0])
    return cover


def _axis0_slices(M: ChartedManifold, probes: Array):
    """Sort probes along chart axis 0 for cheap per-ball prefiltering.

    The normalized distance is bounded below by the axis-0 chart displacement
    scaled by the normalizer row, so probes outside a t-slab can be skipped.
    """
    order = np.argsort(probes[:, 0], kind="stable")
    sorted_probes = probes[order]
    dom = M.window_chart.domain
    period0 = dom.periods[0] if isinstance(dom, BoxDomain) else None
    return order, sorted_probes, period0


def _slab_indices(sorted_vals: Array, center: float, half: float, period0) -> Array:
    if period0 is not None and 2 * half >= period0 / 2:
        return np.arange(sorted_vals.size)
    lo = np.searchsorted(sorted_vals, center - half, side="left")
    hi = np.searchsorted(sorted_vals, center + half, side="right")
    idx = np.arange(lo, hi)
    if period0 is not None:
        # wrap-around slab pieces
        for shift in (-period0, period0):
            l2 = np.searchsorted(sorted_vals, center + shift - half, side="left")
            h2 = np.searchsorted(sorted_vals, center + shift + half, side="right")
            if h2 > l2:
                idx = np.concatenate([idx, np.arange(l2, h2)])
    return idx


def coverage_gaps(cover: Covering, probes: Array) -> Array:
    """Probe points not inside any (1+eps)-shrunk dilated ball."""
    M = cover.manifold
    eps = cover.epsilon
    order, sp, period0 = _axis0_slices(M, probes)
    covered = np.zeros(probes.shape[0], dtype=bool)
    for i in range(cover.centers.shape[0]):
        rad = cover.dilated_radii[i] / (1.0 + eps)
        half = 1.001 * rad * np.linalg.norm(cover.inv_normalizers[i][0])
        idx = _slab_indices(sp[:, 0], cover.centers[i][0], half, period0)
        idx = idx[~covered[order[idx]]]
        if idx.size == 0:
            continue
        disp = _wrap_displacement(M, sp[idx] - cover.centers[i])
        d = np.linalg.norm(disp @ cover.normalizers[i].T, axis=1)
        covered[order[idx[d <= rad]]] = True
    return probes[~covered]


def overlap_stats(cover: Covering, probes: Array) -> dict:
    """Max/mean membership counts for the dilated and full-radius families,
    with (1+eps)-expanded membership, compared to the closed-form bounds."""
    M = cover.manifold
    n = M.dimension
    eps = cover.epsilon
    order, sp, period0 = _axis0_slices(M, probes)
    counts_dil = np.zeros(probes.shape[0], dtype=np.int32)
    counts_full = np.zeros(probes.shape[0], dtype=np.int32)
    counts_base = np.zeros(probes.shape[0], dtype=np.int32)
    for i in range(cover.centers.shape[0]):
        rad_full = cover.radii_eps[i] * (1.0 + eps)
        half = 1.001 * rad_full * np.linalg.norm(cover.inv_normalizers[i][0])
        idx = _slab_indices(sp[:, 0], cover.centers[i][0], half, period0)
        if idx.size == 0:
            continue
        disp = _wrap_displacement(M, sp[idx] - cover.centers[i])
        d = np.linalg.norm(disp @ cover.normalizers[i].T, axis=1)
        gidx = order[idx]
        counts_dil[gidx[d <= cover.dilated_radii[i] * (1.0 + eps)]] += 1
        counts_full[gidx[d <= rad_full]] += 1
        counts_base[gidx[d <= cover.base_radii[i]]] += 1
    T = overlap_bound(n, eps)
    T1 = overlap_bound_full(n, eps)
    hist = np.bincount(counts_dil, minlength=1)
    stats = {
        "max_overlap_dilated": int(counts_dil.max()),
        "mean_overlap_dilated": float(counts_dil.mean()),
        "max_overlap_full": int(counts_full.max()),
        "max_overlap_base": int(counts_base.max()),
        "T": T,
        "T1": T1,
        "dilated_within_T": bool(counts_dil.max() <= T),
        "full_within_T1": bool(counts_full.max() <= T1),
        "histogram": hist.tolist(),
    }
    cover.stats.update(stats)
    return stats


def weight_at(x: Array, gamma: float, rfield: RadiusField) -> float:
    """R_eps(x)^gamma via nearest-grid interpolation of the memoized field."""
    return float(rfield.weight(np.atleast_2d(x), gamma)[0])
