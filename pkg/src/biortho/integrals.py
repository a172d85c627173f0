"""Integrated curvature identities and bounds over catalog models.

Norms follow ``CurvatureBlocks``: |W|^2 is the sum of squared entries of both
Weyl blocks and |B|^2 is four times the squared entries of b.  With these,

    8 pi^2 chi = integral of |W|^2 + s^2/24 - |B|^2/2.

Every residual is a signed or absolute defect, never a bare boolean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import PREDICATE_TOL, kperp_spectral
from .bivector import CurvatureBlocks, decompose
from .curvature import MetricChart, curvature_field
from .models import ModelManifold, box_quadrature

PI2 = np.pi**2
CLOSED_FORM_TOL = 1e-6
CHART_TOL = 1e-3
CHART_NODES = 8
THRESHOLD = 768.0 * PI2 / 5.0


@dataclass
class IntegralReport:
    model: str
    chi: int | None
    integrals: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(abs(self.residuals[k]) <= tol for k, tol in self.tolerances.items())

    def failures(self) -> list[str]:
        return [k for k, tol in self.tolerances.items() if not abs(self.residuals[k]) <= tol]

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "chi": self.chi,
            "integrals": dict(self.integrals),
            "residuals": dict(self.residuals),
            "flags": dict(self.flags),
            "tolerances": dict(self.tolerances),
            "passed": self.passed,
        }


def pointwise_terms(blocks: CurvatureBlocks) -> dict:
    """Integrands at one point."""
    spec = kperp_spectral(blocks)
    return {
        "W2": blocks.w_norm2,
        "s2": blocks.s**2,
        "B2": blocks.b_norm2,
        "k1perp": spec.k1perp,
        "gauss_bonnet": blocks.w_norm2 + blocks.s**2 / 24.0 - 0.5 * blocks.b_norm2,
    }


def _blocks_terms(blocks_list) -> dict:
    terms = [pointwise_terms(b) for b in blocks_list]
    return {k: np.array([t[k] for t in terms]) for k in terms[0]}


def chart_terms(chart: MetricChart, box, nodes=CHART_NODES, h: float = 1e-3) -> tuple[dict, np.ndarray]:
    """Integrands from finite-difference curvature at Gauss nodes, plus weights."""
    pts, w = box_quadrature(chart, box, nodes)
    ops, _, _ = curvature_field(chart, pts, h)
    blocks = [decompose(0.5 * (op + op.T), tol=1e-7) for op in ops]
    return _blocks_terms(blocks), w


def _scale(chi) -> float:
    return 8.0 * PI2 * max(abs(chi), 1)


def gauss_bonnet_check(model: ModelManifold, nodes: int = 24, chart_nodes: int | None = CHART_NODES) -> IntegralReport:
    """Both sides of the Gauss-Bonnet identity three ways.

    closed form (integrand times volume), Gauss quadrature of the closed-form
    integrand, and quadrature of chart finite-difference curvature (skipped
    when ``chart_nodes`` is None).  Residuals are relative to 8 pi^2 max(|chi|, 1).
    """
    chi = model.euler_characteristic
    if chi is None:
        raise ValueError("Euler characteristic unknown")
    lhs = 8.0 * PI2 * chi
    terms = pointwise_terms(model.blocks)
    _, w = model.quadrature(nodes)
    qvol = float(np.sum(w))
    if not np.isfinite(qvol):
        raise FloatingPointError("quadrature produced non-finite weights")
    rep = IntegralReport(model.label, chi)
    rep.integrals.update(
        volume=model.volume,
        quadrature_volume=qvol,
        eight_pi2_chi=lhs,
        int_W2=terms["W2"] * model.volume,
        int_s2=terms["s2"] * model.volume,
        int_B2=terms["B2"] * model.volume,
        int_k1perp=terms["k1perp"] * model.volume,
        gauss_bonnet_closed=terms["gauss_bonnet"] * model.volume,
        gauss_bonnet_quadrature=terms["gauss_bonnet"] * qvol,
    )
    scale = _scale(chi)
    rep.residuals["gauss_bonnet_closed"] = (rep.integrals["gauss_bonnet_closed"] - lhs) / scale
    rep.residuals["gauss_bonnet_quadrature"] = (rep.integrals["gauss_bonnet_quadrature"] - lhs) / scale
    rep.residuals["volume"] = (qvol - model.volume) / model.volume
    rep.tolerances.update(
        gauss_bonnet_closed=CLOSED_FORM_TOL, gauss_bonnet_quadrature=CLOSED_FORM_TOL, volume=CLOSED_FORM_TOL
    )
    if chart_nodes:
        cterms, cw = chart_terms(model.chart, model.box, chart_nodes)
        val = float(np.sum(cw * cterms["gauss_bonnet"]))
        if not np.isfinite(val):
            raise FloatingPointError("chart quadrature produced non-finite values")
        rep.integrals["gauss_bonnet_chart"] = val
        rep.residuals["gauss_bonnet_chart"] = (val - lhs) / scale
        rep.tolerances["gauss_bonnet_chart"] = CHART_TOL
    return rep


def wnorm_inequality_certificate(blocks: CurvatureBlocks) -> tuple[float, float]:
    """(6 (w1+ + w1-)^2 - |W|^2, 6 w1+^2 + 6 w1-^2 - |W|^2)."""
    spec = kperp_spectral(blocks)
    return wnorm_slacks(
        np.array([spec.w1p, spec.w2p, spec.w3p]), np.array([spec.w1m, spec.w2m, spec.w3m])
    )


def wnorm_slacks(plus_eigs: np.ndarray, minus_eigs: np.ndarray):
    """Vectorised slacks from eigenvalue arrays (..., 3) sorted ascending."""
    plus_eigs = np.asarray(plus_eigs, dtype=float)
    minus_eigs = np.asarray(minus_eigs, dtype=float)
    w2 = np.sum(plus_eigs**2, axis=-1) + np.sum(minus_eigs**2, axis=-1)
    p1, m1 = plus_eigs[..., 0], minus_eigs[..., 0]
    chain = 6.0 * (p1 + m1) ** 2 - w2
    middle = 6.0 * p1**2 + 6.0 * m1**2 - w2
    if np.ndim(chain) == 0:
        return float(chain), float(middle)
    return chain, middle


def euler_bound_check(model: ModelManifold, chi: int | None = None, nodes: int = 24) -> IntegralReport:
    """Euler-characteristic bound under s > 0 and k1perp >= 0, both printed variants.

    statement: 8 pi^2 chi < max(int s^2 + 16 pi^2, 5/24 int s^2)
    proof:     8 pi^2 chi < max(int s^2 / 6 + 16 pi^2, 5/24 int s^2)
    """
    chi = model.euler_characteristic if chi is None else chi
    if chi is None:
        raise ValueError("Euler characteristic unknown")
    b = model.blocks
    spec = kperp_spectral(b)
    terms = pointwise_terms(b)
    _, w = model.quadrature(nodes)
    if not np.all(np.isfinite(w)):
        raise FloatingPointError("quadrature produced non-finite weights")
    vol = model.volume
    int_s2 = terms["s2"] * vol
    int_w2 = terms["W2"] * vol
    lhs = 8.0 * PI2 * chi
    rep = IntegralReport(model.label, chi)
    second = 5.0 * int_s2 / 24.0
    rep.integrals.update(
        eight_pi2_chi=lhs,
        int_s2=int_s2,
        int_s2_quadrature=terms["s2"] * float(np.sum(w)),
        int_W2=int_w2,
        statement_branch1=int_s2 + 16.0 * PI2,
        statement_branch2=second,
        statement_bound=max(int_s2 + 16.0 * PI2, second),
        proof_branch1=int_s2 / 6.0 + 16.0 * PI2,
        proof_branch2=second,
        proof_bound=max(int_s2 / 6.0 + 16.0 * PI2, second),
    )
    chain, middle = wnorm_inequality_certificate(b)
    rep.residuals.update(
        wnorm_chain=-chain,  # |W|^2 - 6 (w1+ + w1-)^2, max over (constant) nodes
        wnorm_middle=-middle,
        gap_inequality=8.0 * PI2 * (chi - 2) - int_w2,
        int_s2_quadrature=(rep.integrals["int_s2_quadrature"] - int_s2) / max(int_s2, 1.0),
    )
    rep.tolerances["int_s2_quadrature"] = CLOSED_FORM_TOL
    hyp = bool(b.s > 0 and spec.k1perp >= -PREDICATE_TOL)
    rep.flags.update(
        hypotheses_met=hyp,
        statement_holds=bool(lhs < rep.integrals["statement_bound"]),
        proof_holds=bool(lhs < rep.integrals["proof_bound"]),
        wnorm_certificate=bool(chain >= -1e-9),
    )
    return rep


@dataclass(frozen=True)
class ThresholdReport:
    int_s2: float
    min_k1perp: float
    threshold: float = THRESHOLD

    @property
    def below_threshold(self) -> bool:
        return self.int_s2 <= self.threshold

    @property
    def conflict(self) -> bool:
        """A metric below the threshold with k1perp >= 0 everywhere sampled."""
        return self.below_threshold and self.min_k1perp >= -PREDICATE_TOL

    def as_dict(self) -> dict:
        return {
            "int_s2": self.int_s2,
            "threshold": self.threshold,
            "min_k1perp": self.min_k1perp,
            "below_threshold": self.below_threshold,
            "conflict": self.conflict,
        }


def scalar_square_threshold(model: ModelManifold) -> ThresholdReport:
    """Closed-form integral of s^2 and k1perp for an S^2 x S^2 catalog metric."""
    if model.name != "s2xs2":
        raise ValueError("threshold check applies to metrics on S^2 x S^2")
    t = pointwise_terms(model.blocks)
    return ThresholdReport(t["s2"] * model.volume, t["k1perp"])


def scalar_square_threshold_chart(chart: MetricChart, box, nodes=CHART_NODES) -> ThresholdReport:
    """Same report from finite-difference curvature of an arbitrary chart on S^2 x S^2."""
    terms, w = chart_terms(chart, box, nodes)
    val = float(np.sum(w * terms["s2"]))
    if not np.isfinite(val):
        raise FloatingPointError("chart quadrature produced non-finite values")
    return ThresholdReport(val, float(np.min(terms["k1perp"])))


def scalar_square_threshold_conformal(mesh, u) -> ThresholdReport:
    """Report for u^2 g_can on a spectral S^2 x S^2 mesh (dV~ = u^4 dV)."""
    from .yamabe import _values, conformal_pointwise

    if mesh.model.name != "s2xs2":
        raise ValueError("threshold check applies to metrics on S^2 x S^2")
    v = _values(u)
    s_new, k1_new = conformal_pointwise(mesh, v)
    return ThresholdReport(mesh.integrate(s_new**2 * v**4), float(np.min(k1_new)))
