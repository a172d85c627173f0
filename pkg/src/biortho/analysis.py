"""Sectional and bi-orthogonal sectional curvature of a 4-dimensional curvature operator.

An oriented 2-plane is a unit simple bivector phi = phi+ + phi-, with
|phi+|^2 = |phi-|^2 = 1/2.  Writing phi+ = a/sqrt2, phi- = b/sqrt2 with a, b
unit 3-vectors identifies the oriented Grassmannian with S^2 x S^2, and the
orthogonal complement is phi+ - phi-.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

from .bivector import CurvatureBlocks, SelfDualSplit, assemble, plucker, split, wedge

SIMPLE_TOL = 1e-10
EINSTEIN_TOL = 1e-10
FLAT_TOL = 1e-10
PREDICATE_TOL = 1e-12

DEFAULT_STARTS = 512
DEFAULT_REFINE = 16
MAX_ITER = 200
GRAD_TOL = 1e-9


@dataclass(frozen=True)
class TwoPlane:
    """An oriented 2-plane stored as a unit simple bivector."""

    phi: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        if phi.shape != (6,):
            raise ValueError("a 2-plane needs 6 bivector coefficients")
        if abs(np.linalg.norm(phi) - 1.0) > SIMPLE_TOL:
            raise ValueError(f"bivector is not unit (norm {np.linalg.norm(phi):.12g})")
        if abs(plucker(phi)) > SIMPLE_TOL:
            raise ValueError(f"bivector is not simple (Plucker residual {plucker(phi):.3g})")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_vectors(cls, x, y) -> "TwoPlane":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x = x / np.linalg.norm(x)
        y = y - (x @ y) * x
        y = y / np.linalg.norm(y)
        return cls(wedge(x, y))

    @classmethod
    def from_unit_pair(cls, a, b) -> "TwoPlane":
        """Plane with phi+ = a/sqrt2 and phi- = b/sqrt2 for unit 3-vectors a, b."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        phi = assemble(a / np.linalg.norm(a), b / np.linalg.norm(b)) / np.sqrt(2.0)
        return cls(phi)

    @property
    def split(self) -> SelfDualSplit:
        return split(self.phi)

    def complement(self) -> "TwoPlane":
        sd = self.split
        return TwoPlane(assemble(sd.plus, -sd.minus))


@dataclass(frozen=True)
class SpectralSummary:
    s: float
    w1p: float
    w2p: float
    w3p: float
    w1m: float
    w2m: float
    w3m: float
    k1perp: float
    k2perp: float
    k3perp: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class CurvaturePredicates:
    einstein: bool
    conformally_flat: bool
    positive_isotropic: bool
    nonneg_isotropic: bool
    pinched_quarter_one: bool
    k1perp_nonneg: bool
    k1perp_positive: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def sectional(blocks: CurvatureBlocks, plane: TwoPlane) -> float:
    sd = plane.split
    return float(
        blocks.s / 12.0
        + sd.plus @ blocks.wplus @ sd.plus
        + sd.minus @ blocks.wminus @ sd.minus
        + 2.0 * sd.plus @ blocks.b @ sd.minus
    )


def biortho(blocks: CurvatureBlocks, plane: TwoPlane) -> float:
    """K_perp(P) = (K(P) + K(P_perp))/2; the B term cancels."""
    sd = plane.split
    return float(blocks.s / 12.0 + sd.plus @ blocks.wplus @ sd.plus + sd.minus @ blocks.wminus @ sd.minus)


def kperp_spectral(blocks: CurvatureBlocks) -> SpectralSummary:
    for w in (blocks.wplus, blocks.wminus):
        if abs(np.trace(w)) > 1e-9:
            raise ValueError("W blocks must be traceless")
    wp = np.linalg.eigvalsh(blocks.wplus)
    wm = np.linalg.eigvalsh(blocks.wminus)
    base = blocks.s / 12.0
    k1 = base + (wp[0] + wm[0]) / 2.0
    k3 = base + (wp[2] + wm[2]) / 2.0
    k2 = blocks.s / 4.0 - k1 - k3
    return SpectralSummary(blocks.s, *map(float, wp), *map(float, wm), float(k1), float(k2), float(k3))


# -- brute-force search over the Grassmannian --------------------------------


def _to_sphere(u: np.ndarray) -> np.ndarray:
    """Area-preserving map of the unit square onto S^2."""
    z = 2.0 * u[:, 0] - 1.0
    phi = 2.0 * np.pi * u[:, 1]
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


@lru_cache(maxsize=8)
def grassmann_starts(count: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Scrambled-Sobol points on S^2 x S^2, deterministic for (count, seed)."""
    m = max(0, int(np.ceil(np.log2(count))))
    pts = qmc.Sobol(d=4, scramble=True, seed=seed).random_base2(m)[:count]
    a, b = _to_sphere(pts[:, :2]), _to_sphere(pts[:, 2:])
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _quad(mat: np.ndarray, x: np.ndarray) -> np.ndarray:
    return 0.5 * np.einsum("nsi,nij,nsj->ns", x, mat, x)


def _descend(p: np.ndarray, m: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Minimise (a.Pa + b.Mb)/2 over unit a, b by projected gradient.

    Barzilai-Borwein trial steps with Armijo backtracking; each start runs
    until its Riemannian gradient norm drops below GRAD_TOL or MAX_ITER.
    Shapes: p, m (N, 3, 3); a, b (N, S, 3).
    """
    scale = np.linalg.norm(p, axis=(1, 2)) + np.linalg.norm(m, axis=(1, 2)) + 1e-300
    step = np.broadcast_to((1.0 / scale)[:, None], a.shape[:2]).copy()
    f = _quad(p, a) + _quad(m, b)

    def rgrad(a, b):
        ga = np.einsum("nij,nsj->nsi", p, a)
        gb = np.einsum("nij,nsj->nsi", m, b)
        ga -= np.sum(ga * a, axis=-1, keepdims=True) * a
        gb -= np.sum(gb * b, axis=-1, keepdims=True) * b
        return ga, gb

    ga, gb = rgrad(a, b)
    gn2 = np.sum(ga * ga, axis=-1) + np.sum(gb * gb, axis=-1)
    active = gn2 > GRAD_TOL**2
    for _ in range(MAX_ITER):
        if not active.any():
            break
        # one radian of rotation is the most a retracted step can use
        t = np.minimum(step, 1.0 / np.sqrt(np.maximum(gn2, 1e-300)))
        slack = 8.0 * np.finfo(float).eps * (np.abs(f) + 1.0)
        accepted = ~active
        na, nb, nf = a.copy(), b.copy(), f.copy()
        for _ in range(60):
            todo = ~accepted
            if not todo.any():
                break
            ta = a - t[..., None] * ga
            tb = b - t[..., None] * gb
            ta /= np.linalg.norm(ta, axis=-1, keepdims=True)
            tb /= np.linalg.norm(tb, axis=-1, keepdims=True)
            tf = _quad(p, ta) + _quad(m, tb)
            ok = todo & (tf <= f - 1e-4 * t * gn2 + slack)
            na[ok], nb[ok], nf[ok] = ta[ok], tb[ok], tf[ok]
            accepted |= ok
            t = np.where(todo & ~ok, 0.5 * t, t)
        # starts whose line search failed are at the floating-point floor
        stalled = active & ~accepted
        nga, ngb = rgrad(na, nb)
        da, db = na - a, nb - b
        dga, dgb = nga - ga, ngb - gb
        sy = np.sum(da * dga, axis=-1) + np.sum(db * dgb, axis=-1)
        ss = np.sum(da * da, axis=-1) + np.sum(db * db, axis=-1)
        bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 2.0 * t)
        step = np.where(active, np.clip(bb, 1e-8 / scale[:, None], 1e8 / scale[:, None]), step)
        a, b, f, ga, gb = na, nb, nf, nga, ngb
        gn2 = np.sum(ga * ga, axis=-1) + np.sum(gb * gb, axis=-1)
        active = active & ~stalled & (gn2 > GRAD_TOL**2)
    return a, b, f, np.sqrt(gn2)


@dataclass(frozen=True)
class Extremum:
    value: float
    plane: TwoPlane
    grad_norm: float


def extremize_biortho(
    blocks_list: list[CurvatureBlocks],
    sense: str,
    starts: int = DEFAULT_STARTS,
    refine: int = DEFAULT_REFINE,
    seed: int = 0,
) -> list[Extremum]:
    """Multi-start search for min or max of K_perp over all oriented planes.

    All ``starts`` quasi-random planes are scored; the best ``refine`` of
    them (by value, then start index) are polished by projected gradient
    descent.  The search only evaluates the objective and its gradient and
    knows nothing about the spectra of W+ and W-.  Winner: lowest value,
    ties broken by start index.
    """
    if starts < 1:
        raise ValueError("sample budget must be at least 1")
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    sign = 1.0 if sense == "min" else -1.0
    a0, b0 = grassmann_starts(starts, seed)
    aa = 0.5 * a0[:, :, None] * a0[:, None, :]
    bb = 0.5 * b0[:, :, None] * b0[:, None, :]
    keep = min(refine, starts)
    out: list[Extremum] = []
    chunk = max(1, 100_000 // starts)
    for lo in range(0, len(blocks_list), chunk):
        part = blocks_list[lo : lo + chunk]
        p = sign * np.stack([bl.wplus for bl in part])
        m = sign * np.stack([bl.wminus for bl in part])
        f0 = np.einsum("sij,nij->ns", aa, p) + np.einsum("sij,nij->ns", bb, m)
        order = np.argsort(f0, axis=1, kind="stable")[:, :keep]
        a, b, f, gn = _descend(p, m, a0[order], b0[order])
        best = np.argmin(f, axis=1)
        for i, bl in enumerate(part):
            j = best[i]  # refined starts stay in screening order
            plane = TwoPlane.from_unit_pair(a[i, j], b[i, j])
            out.append(Extremum(bl.s / 12.0 + sign * float(f[i, j]), plane, float(gn[i, j])))
    return out


def kperp_bruteforce(blocks: CurvatureBlocks, budget: int = DEFAULT_STARTS) -> tuple[float, float]:
    """(min, max) of K_perp found by multi-start descent on S^2 x S^2."""
    lo = extremize_biortho([blocks], "min", budget)[0].value
    hi = extremize_biortho([blocks], "max", budget)[0].value
    return lo, hi


def kperp_bruteforce_many(blocks_list: list[CurvatureBlocks], budget: int = DEFAULT_STARTS):
    lo = [e.value for e in extremize_biortho(blocks_list, "min", budget)]
    hi = [e.value for e in extremize_biortho(blocks_list, "max", budget)]
    return np.array(lo), np.array(hi)


def predicates(blocks: CurvatureBlocks) -> CurvaturePredicates:
    sp = kperp_spectral(blocks)
    einstein = bool(np.linalg.norm(blocks.b) < EINSTEIN_TOL)
    flat = bool(max(np.max(np.abs(blocks.wplus)), np.max(np.abs(blocks.wminus))) < FLAT_TOL)
    iso_p = blocks.s / 6.0 - sp.w3p
    iso_m = blocks.s / 6.0 - sp.w3m
    return CurvaturePredicates(
        einstein=einstein,
        conformally_flat=flat,
        positive_isotropic=bool(iso_p > PREDICATE_TOL and iso_m > PREDICATE_TOL),
        nonneg_isotropic=bool(iso_p >= -PREDICATE_TOL and iso_m >= -PREDICATE_TOL),
        pinched_quarter_one=bool(sp.k1perp >= 0.25 - PREDICATE_TOL and sp.k3perp <= 1.0 + PREDICATE_TOL),
        k1perp_nonneg=bool(sp.k1perp >= -PREDICATE_TOL),
        k1perp_positive=bool(sp.k1perp > PREDICATE_TOL),
    )


def random_planes(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform unit pairs (a, b) on S^2 x S^2, shape (count, 3) each."""
    a = rng.standard_normal((count, 3))
    b = rng.standard_normal((count, 3))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return a, b


def sectional_gap_max(blocks: CurvatureBlocks, a: np.ndarray, b: np.ndarray) -> float:
    """max |K(phi) - K(phi_perp)| = max |4 <phi+, B phi->| over sampled planes."""
    # phi+ = a/sqrt2, phi- = b/sqrt2, so 4 <phi+, B phi-> = 2 a.Bb
    return float(np.max(np.abs(2.0 * np.einsum("ni,ij,nj->n", a, blocks.b, b))))
