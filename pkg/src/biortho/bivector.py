"""Linear algebra of 2-forms on an oriented Euclidean 4-space.

Bivectors are length-6 arrays in the coordinate basis

    (e12, e13, e14, e23, e24, e34)

and the orientation is e1^e2^e3^e4.  The self-dual and anti-self-dual
subspaces are given fixed orthonormal bases::

    L+ : (e12 + e34)/sqrt2, (e13 - e24)/sqrt2, (e14 + e23)/sqrt2
    L- : (e12 - e34)/sqrt2, (e13 + e24)/sqrt2, (e14 - e23)/sqrt2

A curvature operator is a symmetric 6x6 matrix in the coordinate basis.  In
the L+ / L- bases it has the block form

    [[W+ + s/12 I,  B          ],
     [B^T,          W- + s/12 I]]

with W+ and W- traceless and B: L- -> L+.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

SYMMETRY_TOL = 1e-9
TRACE_TOL = 1e-9

PAIRS: tuple[tuple[int, int], ...] = tuple(combinations(range(4), 2))
PAIR_INDEX = {p: k for k, p in enumerate(PAIRS)}

_R = 1.0 / np.sqrt(2.0)

# Columns are the L+ basis, then the L- basis, in coordinate components.
PLUS_BASIS = np.array(
    [
        [_R, 0, 0, 0, 0, _R],
        [0, _R, 0, 0, -_R, 0],
        [0, 0, _R, _R, 0, 0],
    ]
).T
MINUS_BASIS = np.array(
    [
        [_R, 0, 0, 0, 0, -_R],
        [0, _R, 0, 0, _R, 0],
        [0, 0, _R, -_R, 0, 0],
    ]
).T
SPLIT_BASIS = np.hstack([PLUS_BASIS, MINUS_BASIS])

# *e12 = e34, *e13 = -e24, *e14 = e23 and the inverse relations.
HODGE = np.zeros((6, 6))
for _src, _dst, _sign in [(0, 5, 1), (1, 4, -1), (2, 3, 1), (3, 2, 1), (4, 1, -1), (5, 0, 1)]:
    HODGE[_dst, _src] = _sign
HODGE.setflags(write=False)
for _a in (PLUS_BASIS, MINUS_BASIS, SPLIT_BASIS):
    _a.setflags(write=False)


def _frozen(a, shape) -> np.ndarray:
    out = np.array(a, dtype=float)
    if out.shape != shape:
        raise ValueError(f"expected shape {shape}, got {out.shape}")
    out.setflags(write=False)
    return out


def wedge(x, y) -> np.ndarray:
    """Coordinates of x^y for two vectors of R^4."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.array([x[i] * y[j] - x[j] * y[i] for i, j in PAIRS])


def hodge_star(phi) -> np.ndarray:
    return HODGE @ np.asarray(phi, dtype=float)


def plucker(phi) -> float:
    """Plucker quadric c12*c34 - c13*c24 + c14*c23; zero iff phi is simple."""
    c = np.asarray(phi, dtype=float)
    return float(c[0] * c[5] - c[1] * c[4] + c[2] * c[3])


@dataclass(frozen=True)
class SelfDualSplit:
    """Coefficients of phi+ and phi- in the fixed L+ and L- bases."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "plus", _frozen(self.plus, (3,)))
        object.__setattr__(self, "minus", _frozen(self.minus, (3,)))

    def bivector(self) -> np.ndarray:
        return PLUS_BASIS @ self.plus + MINUS_BASIS @ self.minus


def split(phi) -> SelfDualSplit:
    phi = np.asarray(phi, dtype=float)
    return SelfDualSplit(PLUS_BASIS.T @ phi, MINUS_BASIS.T @ phi)


def assemble(plus, minus) -> np.ndarray:
    return SelfDualSplit(plus, minus).bivector()


@dataclass(frozen=True)
class CurvatureBlocks:
    """Curvature operator at a point in L+/L- block form.

    ``s`` is the scalar curvature, ``wplus``/``wminus`` the traceless W+/W-
    blocks and ``b`` the mixed block B: L- -> L+.
    """

    s: float
    wplus: np.ndarray
    wminus: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        for name in ("wplus", "wminus", "b"):
            object.__setattr__(self, name, _frozen(getattr(self, name), (3, 3)))

    @property
    def w_norm2(self) -> float:
        """|W|^2 = |W+|^2 + |W-|^2 (sum of squared block entries)."""
        return float(np.sum(self.wplus**2) + np.sum(self.wminus**2))

    @property
    def b_norm2(self) -> float:
        """|B|^2 in the tensor convention, equal to |Ric - s/4 g|^2."""
        return float(4.0 * np.sum(self.b**2))

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "wplus": self.wplus.tolist(),
            "wminus": self.wminus.tolist(),
            "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CurvatureBlocks":
        return cls(d["s"], d["wplus"], d["wminus"], d["b"])


def check_symmetric(mat: np.ndarray, tol: float = SYMMETRY_TOL) -> None:
    asym = float(np.max(np.abs(mat - mat.T)))
    if asym > tol:
        raise ValueError(f"curvature operator is not symmetric (asymmetry {asym:.3g})")


def bianchi_defect(mat) -> float:
    """tr(R *)/2: the first Bianchi defect, zero for curvature operators."""
    mat = np.asarray(mat, dtype=float)
    return 0.5 * float(np.trace(mat @ HODGE))


def decompose(mat, tol: float = SYMMETRY_TOL) -> CurvatureBlocks:
    """Split a symmetric curvature operator on L^2 into (s, W+, W-, B).

    Raises ValueError for asymmetric input, or when the operator violates the
    first Bianchi identity (unequal traces on L+ and L-), since such an
    operator has no traceless W blocks.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (6, 6):
        raise ValueError(f"expected a 6x6 operator, got shape {mat.shape}")
    check_symmetric(mat, tol)
    scale = max(1.0, float(np.max(np.abs(mat))))
    defect = bianchi_defect(mat)
    if abs(defect) > tol * scale:
        raise ValueError(f"operator violates the first Bianchi identity (defect {defect:.3g})")
    m = SPLIT_BASIS.T @ mat @ SPLIT_BASIS
    m = 0.5 * (m + m.T)
    a, b, c = m[:3, :3], m[:3, 3:], m[3:, 3:]
    s = 2.0 * float(np.trace(mat))
    eye = np.eye(3)
    return CurvatureBlocks(s, a - np.trace(a) / 3 * eye, c - np.trace(c) / 3 * eye, b)


def compose(blocks: CurvatureBlocks, tol: float = TRACE_TOL) -> np.ndarray:
    for name in ("wplus", "wminus"):
        w = getattr(blocks, name)
        if abs(np.trace(w)) > tol:
            raise ValueError(f"{name} is not traceless (trace {np.trace(w):.3g})")
        check_symmetric(w, tol)
    eye = np.eye(3) * (blocks.s / 12.0)
    m = np.block([[blocks.wplus + eye, blocks.b], [blocks.b.T, blocks.wminus + eye]])
    out = SPLIT_BASIS @ m @ SPLIT_BASIS.T
    return 0.5 * (out + out.T)


def operator_from_sectional(curvatures: dict[tuple[int, int], float]) -> np.ndarray:
    """Diagonal curvature operator with K(e_i^e_j) given per coordinate plane.

    Only valid as a curvature operator when the Bianchi defect vanishes,
    e.g. for products of space forms in an adapted frame.
    """
    mat = np.zeros((6, 6))
    for pair, k in curvatures.items():
        i = PAIR_INDEX[tuple(sorted(pair))]
        mat[i, i] = k
    return mat
