"""Random algebraic curvature data and bulk property suites.

Samples are drawn vectorised from a seeded generator, so a RandomBlockSpec always
yields the same stream.  Suites return the maximum residual of one identity
or inequality and the failing samples verbatim; feeding those samples back
through ``run_suite(name, samples=...)`` reproduces the failure.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .analysis import (
    EINSTEIN_TOL,
    FLAT_TOL,
    PREDICATE_TOL,
    kperp_bruteforce_many,
    random_planes,
)
from .bivector import HODGE, MINUS_BASIS, PLUS_BASIS, CurvatureBlocks, compose, wedge

REJECTION_BUDGET = 100_000
MAX_COUNTEREXAMPLES = 20


class RejectionBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class RandomBlockSpec:
    seed: int = 0
    count: int = 1000
    s_scale: float = 10.0
    w_scale: float = 1.0
    b_scale: float = 1.0
    einstein: bool = False
    conformally_flat: bool = False
    nonneg_k1: bool = False

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BlockArrays:
    """Stacked blocks: s (N,), wplus/wminus/b (N, 3, 3)."""

    s: np.ndarray
    wplus: np.ndarray
    wminus: np.ndarray
    b: np.ndarray

    def __len__(self) -> int:
        return len(self.s)

    def __getitem__(self, idx) -> "BlockArrays":
        return BlockArrays(self.s[idx], self.wplus[idx], self.wminus[idx], self.b[idx])

    def blocks(self, i: int) -> CurvatureBlocks:
        return CurvatureBlocks(float(self.s[i]), self.wplus[i], self.wminus[i], self.b[i])

    def to_list(self) -> list[CurvatureBlocks]:
        return [self.blocks(i) for i in range(len(self))]

    @classmethod
    def from_list(cls, blocks: list[CurvatureBlocks]) -> "BlockArrays":
        return cls(
            np.array([b.s for b in blocks], dtype=float),
            np.array([b.wplus for b in blocks]),
            np.array([b.wminus for b in blocks]),
            np.array([b.b for b in blocks]),
        )

    @classmethod
    def concat(cls, parts: list["BlockArrays"]) -> "BlockArrays":
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in ("s", "wplus", "wminus", "b")))


def _traceless(g: np.ndarray) -> np.ndarray:
    sym = 0.5 * (g + np.swapaxes(g, -1, -2))
    tr = np.trace(sym, axis1=-2, axis2=-1) / 3.0
    return sym - tr[..., None, None] * np.eye(3)


def _draw(rng: np.random.Generator, spec: RandomBlockSpec, n: int) -> BlockArrays:
    s = rng.uniform(-spec.s_scale, spec.s_scale, n)
    wp = spec.w_scale * _traceless(rng.standard_normal((n, 3, 3)))
    wm = spec.w_scale * _traceless(rng.standard_normal((n, 3, 3)))
    b = spec.b_scale * rng.standard_normal((n, 3, 3))
    if spec.einstein:
        b = np.zeros_like(b)
    if spec.conformally_flat:
        wp = np.zeros_like(wp)
        wm = np.zeros_like(wm)
    return BlockArrays(s, wp, wm, b)


def eigen(arr: BlockArrays) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigvalsh(arr.wplus), np.linalg.eigvalsh(arr.wminus)


def spectral_arrays(arr: BlockArrays) -> dict:
    ep, em = eigen(arr)
    base = arr.s / 12.0
    k1 = base + 0.5 * (ep[:, 0] + em[:, 0])
    k3 = base + 0.5 * (ep[:, 2] + em[:, 2])
    return {"plus": ep, "minus": em, "k1": k1, "k2": arr.s / 4.0 - k1 - k3, "k3": k3}


def generate_arrays(spec: RandomBlockSpec) -> BlockArrays:
    rng = np.random.default_rng(spec.seed)
    if not spec.nonneg_k1:
        return _draw(rng, spec, spec.count)
    kept, have, dry = [], 0, 0
    while have < spec.count:
        need = spec.count - have
        batch = _draw(rng, spec, min(max(4 * need, 256), REJECTION_BUDGET))
        ok = spectral_arrays(batch)["k1"] >= 0.0
        if not np.any(ok):
            dry += len(batch)
            if dry >= REJECTION_BUDGET:
                raise RejectionBudgetExceeded(
                    f"no sample with k1perp >= 0 in {dry} draws; loosen the scales"
                )
            continue
        dry = 0
        idx = np.flatnonzero(ok)[:need]
        kept.append(batch[idx])
        have += len(idx)
    return BlockArrays.concat(kept)


def generate(spec: RandomBlockSpec) -> list[CurvatureBlocks]:
    return generate_arrays(spec).to_list()


@dataclass
class SuiteReport:
    name: str
    count: int
    max_residual: float
    tolerance: float
    counterexamples: list[dict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.counterexamples and self.max_residual <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "count": self.count,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "counterexamples": list(self.counterexamples),
            **{f"extra.{k}": v for k, v in self.extra.items()},
        }


def _counterexamples(arr: BlockArrays, residual: np.ndarray, bad: np.ndarray) -> list[dict]:
    out = []
    for i in np.flatnonzero(bad)[:MAX_COUNTEREXAMPLES]:
        d = arr.blocks(int(i)).as_dict()
        d["index"] = int(i)
        d["residual"] = float(residual[i])
        out.append(d)
    return out


def _threshold_suite(name, tol):
    def wrap(fn):
        def run(arr: BlockArrays, seed: int) -> SuiteReport:
            res = np.asarray(fn(arr, seed), dtype=float)
            bad = ~(res <= tol)
            return SuiteReport(name, len(arr), float(np.max(res)), tol, _counterexamples(arr, res, bad))

        SUITES[name] = run
        return fn

    return wrap


SUITES: dict[str, Callable[[BlockArrays, int], SuiteReport]] = {}


@_threshold_suite("trace-sum", 1e-10)
def _trace_sum(arr, seed):
    sp = spectral_arrays(arr)
    # k2 from the middle eigenvalues, compared with s/4 - k1 - k3
    k2_mid = arr.s / 12.0 + 0.5 * (sp["plus"][:, 1] + sp["minus"][:, 1])
    return np.abs(sp["k1"] + k2_mid + sp["k3"] - arr.s / 4.0)


@_threshold_suite("w-trace", 1e-10)
def _w_trace(arr, seed):
    ep, em = eigen(arr)
    return np.maximum(np.abs(ep[:, 1] + ep[:, 0] + ep[:, 2]), np.abs(em[:, 1] + em[:, 0] + em[:, 2]))


@_threshold_suite("spectral-vs-bruteforce", 1e-6)
def _spectral_vs_bruteforce(arr, seed):
    sp = spectral_arrays(arr)
    lo, hi = kperp_bruteforce_many(arr.to_list())
    return np.maximum(np.abs(lo - sp["k1"]), np.abs(hi - sp["k3"]))


@_threshold_suite("wnorm-chain", 1e-12)
def _wnorm_chain(arr, seed):
    from .integrals import wnorm_slacks

    chain, middle = wnorm_slacks(*eigen(arr))
    # residual is the violation: positive only when a slack is below zero
    return np.maximum(-chain, -middle)


@_threshold_suite("b-cancellation", 1e-12)
def _b_cancellation(arr, seed):
    # K(P), K(P_perp) from the composed operator on x^y and its Hodge dual,
    # against the split-form K_perp with no B term
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 64, 4))
    phi = np.array([wedge(a, b) for a, b in zip(x, y)])
    phi /= np.linalg.norm(phi, axis=1, keepdims=True)
    comp = phi @ HODGE.T
    plus, minus = phi @ PLUS_BASIS, phi @ MINUS_BASIS
    out = np.empty(len(arr))
    for i in range(len(arr)):
        blk = arr.blocks(i)
        op = compose(blk)
        k_plane = np.einsum("pi,ij,pj->p", phi, op, phi)
        k_comp = np.einsum("pi,ij,pj->p", comp, op, comp)
        kperp = (
            blk.s / 12.0
            + np.einsum("pi,ij,pj->p", plus, blk.wplus, plus)
            + np.einsum("pi,ij,pj->p", minus, blk.wminus, minus)
        )
        out[i] = np.max(np.abs(kperp - 0.5 * (k_plane + k_comp))) / (1.0 + abs(blk.s) / 12.0)
    return out


def _classification_suite(name, predicate, observed, tol_label):
    def run(arr: BlockArrays, seed: int) -> SuiteReport:
        pred = predicate(arr)
        obs, resid = observed(arr, seed)
        bad = pred != obs
        rep = SuiteReport(name, len(arr), float(np.count_nonzero(bad)), 0.0, _counterexamples(arr, resid, bad))
        rep.extra.update(positives=int(np.count_nonzero(pred)), threshold=tol_label)
        return rep

    SUITES[name] = run


def _einstein(arr):
    return np.linalg.norm(arr.b, axis=(1, 2)) < EINSTEIN_TOL


def _kperp_equals_k(arr, seed, planes: int = 10_000):
    rng = np.random.default_rng(seed)
    a, b = random_planes(rng, planes)
    gap = np.empty(len(arr))
    for lo in range(0, len(arr), 64):
        cross = np.einsum("pi,nij,pj->np", a, arr.b[lo : lo + 64], b)
        # K - K_perp_avg = 2 <phi+, B phi-> = a.Bb
        gap[lo : lo + 64] = np.max(np.abs(cross), axis=1)
    return gap < EINSTEIN_TOL, gap


def _flat(arr):
    return np.maximum(np.abs(arr.wplus).max(axis=(1, 2)), np.abs(arr.wminus).max(axis=(1, 2))) < FLAT_TOL


def _kperp_all_equal(arr, seed):
    sp = spectral_arrays(arr)
    spread = np.maximum.reduce([np.abs(sp[k] - arr.s / 12.0) for k in ("k1", "k2", "k3")])
    return spread < FLAT_TOL, spread


_classification_suite("einstein-iff-Kperp-eq-K", _einstein, _kperp_equals_k, EINSTEIN_TOL)
_classification_suite("conformally-flat", _flat, _kperp_all_equal, FLAT_TOL)


@_threshold_suite("k1-domination", PREDICATE_TOL)
def _k1_domination(arr, seed):
    # 12 k1perp <= s since w1+ and w1- are never positive
    sp = spectral_arrays(arr)
    return 12.0 * sp["k1"] - arr.s


def suite_names() -> list[str]:
    return list(SUITES)


def run_suite(name: str, spec: RandomBlockSpec | None = None, samples=None) -> SuiteReport:
    """Run a suite on ``generate(spec)`` or on explicit samples (blocks or dicts)."""
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {suite_names()}") from None
    spec = spec or RandomBlockSpec()
    if samples is not None:
        blocks = [b if isinstance(b, CurvatureBlocks) else CurvatureBlocks.from_dict(b) for b in samples]
        arr = BlockArrays.from_list(blocks)
    else:
        arr = generate_arrays(spec)
    rep = fn(arr, spec.seed)
    rep.extra.setdefault("seed", spec.seed)
    return rep
