"""Catalog of closed-form model 4-manifolds.

Every model is homogeneous, so its curvature blocks are constant in the
Gram-Schmidt frame of its chart.  Radii are used throughout: ``s2xs2(1, 2)``
is S^2 of curvature 1 times S^2 of curvature 1/4.

CP^2 carries the Fubini-Study metric with sectional curvature in [1, 4]
(holomorphic curvature 4, s = 24), written in U(2)-invariant coordinates
(r, psi, phi, theta) with

    g = dr^2 + sin^2 r cos^2 r sigma3^2 + sin^2 r (sigma1^2 + sigma2^2),

where sigma3 = (dpsi + cos theta dphi)/2 and
sigma1^2 + sigma2^2 = (dtheta^2 + sin^2 theta dphi^2)/4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .bivector import CurvatureBlocks
from .curvature import MetricChart

CHART_MARGIN = 1e-3
DEFAULT_NODES = 24

PI = np.pi


@dataclass(frozen=True)
class ModelManifold:
    name: str
    params: dict
    chart: MetricChart
    box: tuple[tuple[float, float], ...]
    euler_characteristic: int
    volume: float
    blocks: CurvatureBlocks
    description: str = ""
    factors: tuple = field(default=(), repr=False)

    @property
    def charts(self) -> list[MetricChart]:
        return [self.chart]

    def blocks_at(self, point=None) -> CurvatureBlocks:
        return self.blocks

    def quadrature(self, nodes: int | tuple[int, ...] = DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
        """Tensor Gauss-Legendre nodes (M, 4) and weights against dV_g."""
        return box_quadrature(self.chart, self.box, nodes)

    @cached_property
    def label(self) -> str:
        if not self.params:
            return self.name
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({args})"


def box_quadrature(chart: MetricChart, box, nodes=DEFAULT_NODES) -> tuple[np.ndarray, np.ndarray]:
    if np.isscalar(nodes):
        nodes = (int(nodes),) * 4
    axes, wts = [], []
    for (lo, hi), n in zip(box, nodes):
        x, w = np.polynomial.legendre.leggauss(n)
        axes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        wts.append(0.5 * (hi - lo) * w)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    w = wts[0][:, None, None, None] * wts[1][None, :, None, None] * wts[2][None, None, :, None] * wts[3]
    g = chart.metric(grid)
    return grid, w.reshape(-1) * np.sqrt(np.linalg.det(g))


def _diag_metric(fn: Callable[[np.ndarray], list]) -> Callable[[np.ndarray], np.ndarray]:
    def metric(p):
        p = np.asarray(p, dtype=float)
        diag = np.stack(np.broadcast_arrays(*fn(p)), axis=-1)
        out = np.zeros(p.shape[:-1] + (4, 4))
        idx = np.arange(4)
        out[..., idx, idx] = diag
        return out

    return metric


def _shrunk(box, periodic) -> tuple[tuple, tuple]:
    lo = tuple(a if per else a + CHART_MARGIN for (a, _), per in zip(box, periodic))
    hi = tuple(b if per else b - CHART_MARGIN for (_, b), per in zip(box, periodic))
    return lo, hi


def _chart(name, box, periodic, metric) -> MetricChart:
    # periodic coordinates are extended past the box so stencils never clip
    lo, hi = _shrunk(box, periodic)
    lo = tuple(a - 1.0 if per else a for a, per in zip(lo, periodic))
    hi = tuple(b + 1.0 if per else b for b, per in zip(hi, periodic))
    return MetricChart(lo, hi, metric, True, name)


def product_blocks(k1: float, k2: float) -> CurvatureBlocks:
    """Blocks of a product of surfaces with curvatures k1 (e1, e2) and k2 (e3, e4).

    In the L+/L- bases the operator k1 e12 e12^T + k2 e34 e34^T has
    A = C = diag((k1+k2)/2, 0, 0) and B = diag((k1-k2)/2, 0, 0).
    """
    s = 2.0 * (k1 + k2)
    base = s / 12.0
    w = np.diag([(k1 + k2) / 2.0 - base, -base, -base])
    b = np.zeros((3, 3))
    b[0, 0] = (k1 - k2) / 2.0
    return CurvatureBlocks(s, w, w, b)


def s4(r: float = 1.0) -> ModelManifold:
    """Round S^4 of radius r in hyperspherical coordinates."""

    def fn(p):
        s1, s2, s3 = np.sin(p[..., 0]), np.sin(p[..., 1]), np.sin(p[..., 2])
        r2 = r * r
        return [r2, r2 * s1**2, r2 * (s1 * s2) ** 2, r2 * (s1 * s2 * s3) ** 2]

    box = ((0.0, PI), (0.0, PI), (0.0, PI), (0.0, 2 * PI))
    chart = _chart("s4", box, (False, False, False, True), _diag_metric(fn))
    z = np.zeros((3, 3))
    return ModelManifold(
        "s4", {"r": r}, chart, box, 2, 8.0 * PI**2 * r**4 / 3.0, CurvatureBlocks(12.0 / r**2, z, z, z),
        "round 4-sphere",
    )


def s2xs2(a: float = 1.0, b: float = 1.0) -> ModelManifold:
    """S^2(a) x S^2(b), coordinates (theta1, phi1, theta2, phi2)."""

    def fn(p):
        return [a * a, (a * np.sin(p[..., 0])) ** 2, b * b, (b * np.sin(p[..., 2])) ** 2]

    box = ((0.0, PI), (0.0, 2 * PI), (0.0, PI), (0.0, 2 * PI))
    chart = _chart("s2xs2", box, (False, True, False, True), _diag_metric(fn))
    return ModelManifold(
        "s2xs2", {"a": a, "b": b}, chart, box, 4, 16.0 * PI**2 * a * a * b * b,
        product_blocks(1.0 / a**2, 1.0 / b**2), "product of round 2-spheres", ("s2", "s2"),
    )


def s2xt2(a: float = 1.0, L: float = 2 * PI) -> ModelManifold:
    """S^2(a) x flat square torus of side L, coordinates (theta, phi, x, y)."""

    def fn(p):
        return [a * a, (a * np.sin(p[..., 0])) ** 2, 1.0, 1.0]

    box = ((0.0, PI), (0.0, 2 * PI), (0.0, L), (0.0, L))
    chart = _chart("s2xt2", box, (False, True, True, True), _diag_metric(fn))
    return ModelManifold(
        "s2xt2", {"a": a, "L": L}, chart, box, 0, 4.0 * PI * a * a * L * L,
        product_blocks(1.0 / a**2, 0.0), "round 2-sphere times flat torus", ("s2", "t2"),
    )


def t4(L: float = 2 * PI) -> ModelManifold:
    def fn(p):
        return [1.0, 1.0, 1.0, 1.0]

    box = ((0.0, L),) * 4
    chart = _chart("t4", box, (True,) * 4, _diag_metric(fn))
    z = np.zeros((3, 3))
    return ModelManifold(
        "t4", {"L": L}, chart, box, 0, L**4, CurvatureBlocks(0.0, z, z, z), "flat 4-torus", ("t2", "t2")
    )


def s3xs1(r: float = 1.0, L: float = 2 * PI) -> ModelManifold:
    """S^3(r) x S^1 of length L, coordinates (chi1, chi2, phi, t)."""

    def fn(p):
        s1, s2 = np.sin(p[..., 0]), np.sin(p[..., 1])
        return [r * r, (r * s1) ** 2, (r * s1 * s2) ** 2, 1.0]

    box = ((0.0, PI), (0.0, PI), (0.0, 2 * PI), (0.0, L))
    chart = _chart("s3xs1", box, (False, False, True, True), _diag_metric(fn))
    k = 1.0 / r**2
    # e12, e13, e23 each carry curvature k: A = C = k/2 I, B = k/2 diag(1, 1, -1)
    z = np.zeros((3, 3))
    return ModelManifold(
        "s3xs1", {"r": r, "L": L}, chart, box, 0, 2.0 * PI**2 * r**3 * L,
        CurvatureBlocks(6.0 * k, z, z, np.diag([k / 2, k / 2, -k / 2])), "round 3-sphere times circle",
    )


def _cp2_metric(p):
    p = np.asarray(p, dtype=float)
    r, th = p[..., 0], p[..., 3]
    sr2 = np.sin(r) ** 2
    cr2 = np.cos(r) ** 2
    ct = np.cos(th)
    out = np.zeros(p.shape[:-1] + (4, 4))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 0.25 * sr2 * cr2
    out[..., 1, 2] = out[..., 2, 1] = 0.25 * sr2 * cr2 * ct
    out[..., 2, 2] = 0.25 * sr2 * (np.sin(th) ** 2 + cr2 * ct**2)
    out[..., 3, 3] = 0.25 * sr2
    return out


def cp2() -> ModelManifold:
    # (r, psi, phi, theta): e2 = J e1 and e4 = J e3 up to sign, and this
    # ordering makes the Kahler form self-dual
    box = ((0.0, PI / 2), (0.0, 4 * PI), (0.0, 2 * PI), (0.0, PI))
    chart = _chart("cp2", box, (False, True, True, False), _cp2_metric)
    s = 24.0
    w = np.diag([s / 6.0, -s / 12.0, -s / 12.0])
    z = np.zeros((3, 3))
    return ModelManifold(
        "cp2", {}, chart, box, 3, PI**2 / 2.0, CurvatureBlocks(s, w, z, z),
        "complex projective plane, Fubini-Study, 1 <= K <= 4",
    )


MODELS: dict[str, Callable[..., ModelManifold]] = {
    "s4": s4,
    "s2xs2": s2xs2,
    "s2xt2": s2xt2,
    "t4": t4,
    "s3xs1": s3xs1,
    "cp2": cp2,
}


def catalog() -> list[ModelManifold]:
    """Default-parameter members of the catalog plus the B != 0 calibration model."""
    return [s4(), s2xs2(), s2xs2(1.0, 2.0), s2xt2(), t4(), s3xs1(), cp2()]


def get_model(name: str, **params) -> ModelManifold:
    try:
        factory = MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    for key, value in params.items():
        if not (isinstance(value, (int, float)) and np.isfinite(value) and value > 0):
            raise ValueError(f"model parameter {key} must be a positive number, got {value!r}")
    return factory(**params)
