"""Independent reference constructions used as test oracles.

Nothing here imports the package: bases, operators and curvature values
are written out from their definitions.
"""

import numpy as np

PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
R2 = 1.0 / np.sqrt(2.0)


def e(i, j):
    """Coordinates of e_i ^ e_j (i < j, zero-based) in the ordered pair basis."""
    v = np.zeros(6)
    v[PAIRS.index((i, j))] = 1.0
    return v


# self-dual and anti-self-dual bases written from their definitions
PLUS = np.stack([
    R2 * (e(0, 1) + e(2, 3)),
    R2 * (e(0, 2) - e(1, 3)),
    R2 * (e(0, 3) + e(1, 2)),
], axis=1)
MINUS = np.stack([
    R2 * (e(0, 1) - e(2, 3)),
    R2 * (e(0, 2) + e(1, 3)),
    R2 * (e(0, 3) - e(1, 2)),
], axis=1)


def star(phi):
    """Hodge star from the volume form: <a ^ *b> = <a, b> e1234."""
    out = np.zeros(6)
    for k, (i, j) in enumerate(PAIRS):
        rest = [x for x in range(4) if x not in (i, j)]
        perm = [i, j] + rest
        # parity of the permutation (i, j, rest) of (0, 1, 2, 3)
        sign = 1
        p = list(perm)
        for a in range(4):
            for b in range(a + 1, 4):
                if p[a] > p[b]:
                    sign = -sign
        out[PAIRS.index(tuple(rest))] += sign * phi[k]
    return out


def wedge(x, y):
    return np.array([x[i] * y[j] - x[j] * y[i] for i, j in PAIRS])


def product_operator(k1, k2):
    """Curvature operator of a product of surfaces with curvatures k1 (e1, e2), k2 (e3, e4)."""
    r = np.zeros((6, 6))
    r[0, 0] = k1
    r[5, 5] = k2
    return r


def blocks_of(op):
    """(A, B, C) blocks of an operator in the PLUS/MINUS bases."""
    return PLUS.T @ op @ PLUS, PLUS.T @ op @ MINUS, MINUS.T @ op @ MINUS


def riemann_from_sectional_table(curv):
    """Operator of a diagonal 'sectional table' {(i, j): K}."""
    r = np.zeros((6, 6))
    for (i, j), k in curv.items():
        idx = PAIRS.index((i, j))
        r[idx, idx] = k
    return r


def random_traceless(rng, scale=1.0):
    g = rng.standard_normal((3, 3))
    g = 0.5 * (g + g.T)
    return scale * (g - np.trace(g) / 3.0 * np.eye(3))


def biortho_grid_extrema(wp, wm, s, n=60):
    """min/max of s/12 + a.W+a/2 + b.W-b/2 by dense sampling of each sphere.

    The objective separates, so each sphere factor is scanned independently.
    """
    th = np.linspace(0, np.pi, n)
    ph = np.linspace(0, 2 * np.pi, 2 * n)
    T, P = np.meshgrid(th, ph)
    v = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1).reshape(-1, 3)
    fp = 0.5 * np.einsum("ni,ij,nj->n", v, wp, v)
    fm = 0.5 * np.einsum("ni,ij,nj->n", v, wm, v)
    return s / 12 + fp.min() + fm.min(), s / 12 + fp.max() + fm.max()
