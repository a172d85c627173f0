"""Pointwise curvature of a 4-dimensional metric given in a coordinate chart.

Metric derivatives come from fourth-order central differences.  The
Riemann tensor is expressed in the Gram-Schmidt orthonormal frame of the
coordinate basis (so e1 is parallel to the first coordinate direction), then
packed into a curvature operator on bivectors and decomposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bivector import PAIRS, CurvatureBlocks, decompose

DEFAULT_STEP = 1e-3
PD_TOL = 1e-10

MetricFn = Callable[[np.ndarray], np.ndarray]


class CurvatureError(ValueError):
    pass


class ChartBoundaryError(CurvatureError):
    pass


class NotPositiveDefiniteError(CurvatureError):
    pass


class NumericFailure(CurvatureError):
    pass


@dataclass(frozen=True)
class MetricChart:
    """A box of coordinates with a vectorised metric ``(..., 4) -> (..., 4, 4)``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    metric: MetricFn
    analytic: bool = True
    name: str = "chart"

    def __call__(self, p) -> np.ndarray:
        return self.metric(np.asarray(p, dtype=float))

    def contains(self, pts: np.ndarray, margin: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(pts)
        lo = np.asarray(self.lower) + margin
        hi = np.asarray(self.upper) - margin
        return np.all((pts >= lo) & (pts <= hi), axis=-1)

    def sample(self, rng: np.random.Generator, count: int, margin: float = 0.0) -> np.ndarray:
        lo = np.asarray(self.lower) + margin
        hi = np.asarray(self.upper) - margin
        return lo + (hi - lo) * rng.random((count, 4))


@dataclass(frozen=True)
class PointCurvature:
    """Curvature at one point; ``ricci`` is in the orthonormal frame."""

    point: np.ndarray
    blocks: CurvatureBlocks
    ricci: np.ndarray
    operator: np.ndarray = field(repr=False)


def conformal_chart(base: MetricChart, u: Callable[[np.ndarray], np.ndarray], check_points: int = 64) -> MetricChart:
    """The chart of u^2 g; ``u`` maps (..., 4) points to (...) positive values."""
    rng = np.random.default_rng(0)
    probe = base.sample(rng, check_points)
    if np.any(~(np.asarray(u(probe)) > 0)):
        raise ValueError("conformal factor must be positive")

    def metric(p):
        p = np.asarray(p, dtype=float)
        uu = np.asarray(u(p), dtype=float)
        return uu[..., None, None] ** 2 * base.metric(p)

    return MetricChart(base.lower, base.upper, metric, base.analytic, f"conformal({base.name})")


# first-derivative stencil: offsets and weights (divide by 12 h)
_D1 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))
# second-derivative stencil (divide by 12 h^2)
_D2 = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))
_MIXED = [(k, l) for k in range(4) for l in range(k + 1, 4)]


def _stencil_offsets() -> tuple[np.ndarray, list]:
    """Offsets (in units of h) for every metric evaluation, plus a recipe."""
    offs = [np.zeros(4)]
    index = {(0, 0, 0, 0): 0}

    def slot(v):
        key = tuple(int(x) for x in v)
        if key not in index:
            index[key] = len(offs)
            offs.append(np.array(v, dtype=float))
        return index[key]

    recipe = {"d1": [], "d2": [], "mixed": []}
    for k in range(4):
        e = np.eye(4)[k]
        recipe["d1"].append([(slot(o * e), w) for o, w in _D1])
        recipe["d2"].append([(slot(o * e), w) for o, w in _D2])
    for k, l in _MIXED:
        ek, el = np.eye(4)[k], np.eye(4)[l]
        recipe["mixed"].append([(slot(ok * ek + ol * el), wk * wl) for ok, wk in _D1 for ol, wl in _D1])
    return np.array(offs), recipe


_OFFSETS, _RECIPE = _stencil_offsets()


def _metric_jets(chart: MetricChart, pts: np.ndarray, h: float):
    """Metric, first and second partial derivatives at points (N, 4)."""
    n = pts.shape[0]
    allp = pts[None, :, :] + h * _OFFSETS[:, None, :]
    gs = chart.metric(allp.reshape(-1, 4)).reshape(len(_OFFSETS), n, 4, 4)
    g = gs[0]
    dg = np.empty((n, 4, 4, 4))  # dg[:, k, i, j] = d_k g_ij
    ddg = np.empty((n, 4, 4, 4, 4))  # ddg[:, k, l, i, j]
    for k in range(4):
        dg[:, k] = sum(w * gs[s] for s, w in _RECIPE["d1"][k]) / (12.0 * h)
        ddg[:, k, k] = sum(w * gs[s] for s, w in _RECIPE["d2"][k]) / (12.0 * h * h)
    for (k, l), terms in zip(_MIXED, _RECIPE["mixed"]):
        val = sum(w * gs[s] for s, w in terms) / (144.0 * h * h)
        ddg[:, k, l] = val
        ddg[:, l, k] = val
    return g, dg, ddg


def riemann_lower(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> np.ndarray:
    """R_abcd with the sign fixed so that R_abab is the sectional curvature."""
    ginv = np.linalg.inv(g)
    # Christoffel symbols of the first kind: G[n, c, a, b] = Gamma_{c,ab}
    first = 0.5 * (
        np.einsum("nacb->ncab", dg) + np.einsum("nbca->ncab", dg) - np.einsum("ncab->ncab", dg)
    )
    gamma = np.einsum("ncd,ndab->ncab", ginv, first)  # Gamma^c_ab
    # R_abcd = 1/2(d_b d_c g_ad + d_a d_d g_bc - d_b d_d g_ac - d_a d_c g_bd)
    #          + g_ef (Gamma^e_bc Gamma^f_ad - Gamma^e_bd Gamma^f_ac)
    lin = 0.5 * (
        np.einsum("nbcad->nabcd", ddg)
        + np.einsum("nadbc->nabcd", ddg)
        - np.einsum("nbdac->nabcd", ddg)
        - np.einsum("nacbd->nabcd", ddg)
    )
    quad = np.einsum("nef,nebc,nfad->nabcd", g, gamma, gamma) - np.einsum(
        "nef,nebd,nfac->nabcd", g, gamma, gamma
    )
    return lin + quad


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt frame of the coordinate basis: columns e_a, E^T g E = I."""
    try:
        low = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("metric is not positive definite") from exc
    return np.swapaxes(np.linalg.inv(low), -1, -2)


def frame_operator(g: np.ndarray, riem: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Curvature operator on bivectors (N, 6, 6) and frame Ricci (N, 4, 4)."""
    e = orthonormal_frame(g)
    rf = np.einsum("nia,njb,nkc,nld,nijkl->nabcd", e, e, e, e, riem, optimize=True)
    idx_a = [p[0] for p in PAIRS]
    idx_b = [p[1] for p in PAIRS]
    op = rf[:, idx_a, idx_b][:, :, idx_a, idx_b]
    ricci = np.einsum("nabad->nbd", rf)
    return op, ricci


def curvature_field(chart: MetricChart, pts, h: float = DEFAULT_STEP, chunk: int = 2048):
    """Curvature operators (N, 6, 6), frame Ricci (N, 4, 4) and metric at points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if not np.all(chart.contains(pts, 2.0 * h)):
        raise ChartBoundaryError("point closer than 2h to the chart boundary")
    ops, rics, gs = [], [], []
    for lo in range(0, len(pts), chunk):
        g, dg, ddg = _metric_jets(chart, pts[lo : lo + chunk], h)
        if not np.all(np.isfinite(g)) or not np.all(np.isfinite(ddg)):
            raise NumericFailure("non-finite metric values on the stencil")
        if np.min(np.linalg.eigvalsh(g)) <= PD_TOL:
            raise NotPositiveDefiniteError("metric is not positive definite")
        op, ric = frame_operator(g, riemann_lower(g, dg, ddg))
        if not np.all(np.isfinite(op)):
            raise NumericFailure("non-finite curvature")
        ops.append(op)
        rics.append(ric)
        gs.append(g)
    return np.concatenate(ops), np.concatenate(rics), np.concatenate(gs)


def curvature_at(chart: MetricChart, p, h: float = DEFAULT_STEP) -> PointCurvature:
    p = np.asarray(p, dtype=float)
    op, ric, _ = curvature_field(chart, p[None, :], h)
    op, ric = op[0], ric[0]
    blocks = decompose(0.5 * (op + op.T), tol=1e-8)
    return PointCurvature(p, blocks, 0.5 * (ric + ric.T), op)


def blocks_field(chart: MetricChart, pts, h: float = DEFAULT_STEP) -> list[CurvatureBlocks]:
    ops, _, _ = curvature_field(chart, pts, h)
    return [decompose(0.5 * (op + op.T), tol=1e-8) for op in ops]
