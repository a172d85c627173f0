"""Conformal-class functionals on spectral meshes.

For g~ = u^2 g in dimension four the scalar curvature transforms as
s~ u^3 = -6 Delta u + s u, and Weyl eigenvalues scale by u^-2, so for a
weight F in {s, 24 k1perp - s, 12 k1perp} the volume-normalised total of
the transformed weight is

    E[u] = sum w (6 |grad u|^2 + F u^2) / sqrt(sum w u^4).

``minimize`` runs a Sobolev-preconditioned gradient descent on E with an
Armijo backtracking line search.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analysis import kperp_spectral
from .bivector import CurvatureBlocks
from .models import ModelManifold

POSITIVITY_FLOOR = 1e-8
ARMIJO_C = 1e-4
DEFAULT_RTOL = 1e-8
DEFAULT_MAX_ITER = 5000


class FunctionalKind(str, enum.Enum):
    Y = "y"
    YPERP = "yperp"
    Y1PERP = "y1perp"

    @classmethod
    def parse(cls, value) -> "FunctionalKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown functional kind {value!r}; choose from y, yperp, y1perp") from None


def weight(blocks: CurvatureBlocks, kind) -> float:
    """The pointwise weight F of a functional kind."""
    kind = FunctionalKind.parse(kind)
    if kind is FunctionalKind.Y:
        return blocks.s
    k1 = kperp_spectral(blocks).k1perp
    if kind is FunctionalKind.YPERP:
        return 24.0 * k1 - blocks.s
    return 12.0 * k1


class InvalidFactor(ValueError):
    pass


@dataclass(frozen=True)
class ConformalFactor:
    """Node values of a positive conformal factor u on a mesh."""

    values: np.ndarray
    eps: float = POSITIVITY_FLOOR

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise InvalidFactor("conformal factor has non-finite values")
        if np.min(v) < self.eps:
            raise InvalidFactor(f"conformal factor below positivity floor {self.eps:g}")
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, mesh, c: float = 1.0) -> "ConformalFactor":
        return cls(np.full(mesh.shape, float(c)))

    @classmethod
    def from_function(cls, mesh, fn: Callable[[np.ndarray], np.ndarray]) -> "ConformalFactor":
        return cls(np.asarray(fn(mesh.points()), dtype=float))


def _values(u) -> np.ndarray:
    if isinstance(u, ConformalFactor):
        return u.values
    return ConformalFactor(u).values


def _model_weight(mesh, kind) -> float:
    return weight(mesh.model.blocks, kind)


def _parts(mesh, u: np.ndarray, F) -> tuple[float, float, np.ndarray]:
    lap = mesh.laplacian(u)
    num = mesh.integrate(-6.0 * u * lap + F * u * u)
    den = mesh.integrate(u**4)
    return num, den, lap


def functional_value(mesh, kind, u, normalized: bool = True) -> float:
    """E[u]; for Y1perp the default divides by 12 so it is the k1perp quotient."""
    kind = FunctionalKind.parse(kind)
    v = _values(u)
    num, den, _ = _parts(mesh, v, _model_weight(mesh, kind))
    value = num / np.sqrt(den)
    if not np.isfinite(value):
        raise FloatingPointError("functional value is not finite")
    if kind is FunctionalKind.Y1PERP and normalized:
        value /= 12.0
    return float(value)


@dataclass
class MinimizeResult:
    u: np.ndarray
    value: float
    start_value: float
    iterations: int
    converged: bool
    clamp_count: int
    trace: list[tuple[int, float, float, int]] = field(repr=False)
    kind: FunctionalKind = FunctionalKind.Y

    @property
    def exhausted(self) -> bool:
        return not self.converged

    @property
    def trusted(self) -> bool:
        return self.clamp_count == 0

    @property
    def monotone(self) -> bool:
        vals = [row[1] for row in self.trace]
        return all(b <= a for a, b in zip(vals, vals[1:]))


def write_trace(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["iteration", "value", "grad_norm", "clamp_count"])
        for it, val, gn, cc in trace:
            out.writerow([it, f"{val:.17g}", f"{gn:.17g}", cc])


def minimize(
    mesh,
    kind,
    start,
    max_iter: int = DEFAULT_MAX_ITER,
    rtol: float = DEFAULT_RTOL,
    eps: float = POSITIVITY_FLOOR,
    trace_path=None,
) -> MinimizeResult:
    """Descend E from ``start``; values are raw (Y1perp not divided by 12).

    The search direction is the L2 gradient preconditioned by
    (kappa - 6 Delta)^-1, kappa = 6 |lambda_1| + max |F|.  Each accepted
    iterate is clamped at ``eps`` and rescaled to sum w u^4 = Vol.
    Stops when an accepted step lowers E by less than rtol * max(|E|, 1).
    """
    kind = FunctionalKind.parse(kind)
    F = _model_weight(mesh, kind)
    vol = mesh.volume
    kappa = -6.0 * mesh.first_eigenvalue + abs(F)
    precond = lambda lam: 1.0 / (kappa - 6.0 * lam)  # noqa: E731

    u = _values(start).copy()
    num, den, lap = _parts(mesh, u, F)
    value = num / np.sqrt(den)
    start_value = value
    u *= (vol / den) ** 0.25
    num, den, lap = num * np.sqrt(vol / den), vol, lap * (vol / den) ** 0.25
    trace = [(0, float(value), float("nan"), 0)]
    clamps = 0
    step = 0.5 * np.sqrt(den)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = (2.0 / np.sqrt(den)) * ((-6.0 * lap + F * u) - (num / den) * u**3)
        direction = -mesh.apply_spectral(grad, precond)
        slope = mesh.integrate(grad * direction)
        if not np.isfinite(slope):
            raise FloatingPointError("non-finite gradient")
        if slope >= 0.0 or -slope <= (1e-3 * rtol * max(abs(value), 1.0)) ** 2:
            converged = True
            break
        t = step
        while True:
            trial = u + t * direction
            low = trial < eps
            n_low = int(np.count_nonzero(low))
            if n_low:
                trial = np.where(low, eps, trial)
            tnum, tden, tlap = _parts(mesh, trial, F)
            tval = tnum / np.sqrt(tden)
            if not np.isfinite(tval):
                raise FloatingPointError("functional diverged")
            if tval <= value + ARMIJO_C * t * slope:
                break
            t *= 0.5
            if t < 1e-14 * step:
                tval = None
                break
        if tval is None:
            converged = True
            break
        clamps += n_low
        scale = (vol / tden) ** 0.25
        u, lap = trial * scale, tlap * scale
        num, den = tnum * scale**2, vol
        drop = value - tval
        value = tval
        trace.append((it, float(value), float(np.sqrt(-slope)), clamps))
        step = min(2.0 * t, 1e6 * np.sqrt(den))
        if drop < rtol * max(abs(value), 1.0):
            converged = True
            break
    if trace_path is not None:
        write_trace(trace_path, trace)
    return MinimizeResult(u, float(value), float(start_value), it, converged, clamps, trace, kind)


def conformal_pointwise(mesh, u, blocks: CurvatureBlocks | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Scalar curvature and k1perp of u^2 g at the mesh nodes."""
    v = _values(u)
    blocks = mesh.model.blocks if blocks is None else blocks
    k1 = kperp_spectral(blocks).k1perp
    lap = mesh.laplacian(v)
    u3 = v**3
    s_new = (-6.0 * lap + blocks.s * v) / u3
    k1_new = (-6.0 * lap + 12.0 * k1 * v) / (12.0 * u3)
    return s_new, k1_new


def weyl_consistency(mesh, u, blocks: CurvatureBlocks | None = None) -> float:
    """max |k1~ - (s~/12 + u^-2 (w1+ + w1-)/2)| over the nodes."""
    v = _values(u)
    blocks = mesh.model.blocks if blocks is None else blocks
    spec = kperp_spectral(blocks)
    s_new, k1_new = conformal_pointwise(mesh, v, blocks)
    other = s_new / 12.0 + (spec.w1p + spec.w1m) / (2.0 * v * v)
    return float(np.max(np.abs(k1_new - other)))


@dataclass(frozen=True)
class MeanK1Report:
    integral: float
    min_k1: float
    max_k1: float
    constant: bool

    @property
    def vanishing(self) -> bool:
        return abs(self.integral) < 1e-6

    @property
    def sign_obstruction(self) -> bool:
        """k1~ cannot be positive everywhere: its u^3-weighted mean vanishes."""
        return self.vanishing and (self.constant or self.min_k1 <= 1e-6)

    def as_dict(self) -> dict:
        return {
            "integral_k1_u3": self.integral,
            "min_k1perp": self.min_k1,
            "max_k1perp": self.max_k1,
            "constant_factor": self.constant,
            "sign_obstruction": self.sign_obstruction,
        }


def mean_k1_certificate(mesh, u) -> MeanK1Report:
    if mesh.model.name != "s2xs2":
        raise ValueError("certificate needs the product metric on S^2 x S^2")
    v = _values(u)
    _, k1 = conformal_pointwise(mesh, v)
    integral = mesh.integrate(k1 * v**3)
    constant = bool(np.ptp(v) <= 1e-12 * np.max(np.abs(v)))
    return MeanK1Report(float(integral), float(np.min(k1)), float(np.max(k1)), constant)


# smooth test factors -------------------------------------------------------


def _sphere(theta, phi):
    st = np.sin(theta)
    return [st * np.cos(phi), st * np.sin(phi), np.cos(theta)]


def _factor_features(kind: str, a, b, length: float = 2 * np.pi) -> list[np.ndarray]:
    """Low-degree smooth functions on one surface factor, bounded by 1."""
    if kind == "s2":
        x = _sphere(a, b)
        feats = list(x) + [x[i] * x[j] for i in range(3) for j in range(i, 3)]
    else:
        k = 2 * np.pi / length
        feats = [f(m * k * c) for c in (a, b) for m in (1, 2) for f in (np.cos, np.sin)]
        feats += [np.cos(k * (a + b)), np.sin(k * (a - b))]
    return [np.ones_like(a)] + feats


def _s4_ambient(p):
    c1, c2, c3 = np.cos(p[..., 0]), np.cos(p[..., 1]), np.cos(p[..., 2])
    s1, s2, s3 = np.sin(p[..., 0]), np.sin(p[..., 1]), np.sin(p[..., 2])
    return [c1, s1 * c2, s1 * s2 * c3, s1 * s2 * s3 * np.cos(p[..., 3]), s1 * s2 * s3 * np.sin(p[..., 3])]


def smooth_factor(model: ModelManifold, rng: np.random.Generator, amplitude: float = 0.3) -> Callable:
    """A random smooth positive function of chart coordinates with |u - 1| <= amplitude.

    Built from products of degree <= 2 harmonics (or low Fourier modes on
    torus factors), so it is exactly band-limited on every mesh used here.
    """
    if not 0.0 < amplitude < 1.0:
        raise ValueError("amplitude must lie in (0, 1)")
    if model.name == "s4":
        nfeat = 5 + 15

        def feats(p):
            x = _s4_ambient(p)
            return list(x) + [x[i] * x[j] for i in range(5) for j in range(i, 5)]

        coef = rng.standard_normal(nfeat)
    elif model.factors:
        f1, f2 = model.factors
        length = model.params.get("L", 2 * np.pi)
        n1 = len(_factor_features(f1, np.zeros(1), np.zeros(1), length))
        n2 = len(_factor_features(f2, np.zeros(1), np.zeros(1), length))
        coef = rng.standard_normal((n1, n2))
        coef[0, 0] = 0.0
        coef = amplitude * coef / np.sum(np.abs(coef))

        def u(p):
            p = np.asarray(p, dtype=float)
            a = np.stack(_factor_features(f1, p[..., 0], p[..., 1], length), axis=-1)
            b = np.stack(_factor_features(f2, p[..., 2], p[..., 3], length), axis=-1)
            # bilinear form a^T C b, one contraction instead of n1*n2 products
            return 1.0 + np.sum((a @ coef) * b, axis=-1)

        return u
    else:
        raise ValueError(f"no smooth factors for model {model.name!r}")
    coef = amplitude * coef / np.sum(np.abs(coef))

    def u(p):
        p = np.asarray(p, dtype=float)
        return 1.0 + sum(c * f for c, f in zip(coef, feats(p)))

    return u


def axis_harmonic(amplitude: float = 0.3) -> Callable:
    """u = 1 + amplitude cos(theta1): the axial l = 1 harmonic on the first factor."""

    def u(p):
        return 1.0 + amplitude * np.cos(np.asarray(p, dtype=float)[..., 0])

    return u


def first_coordinate(amplitude: float = 0.3) -> Callable:
    """u = 1 + amplitude x1 on S^4, x1 = cos(chi1)."""

    def u(p):
        return 1.0 + amplitude * np.cos(np.asarray(p, dtype=float)[..., 0])

    return u
