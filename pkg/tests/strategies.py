import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from biortho.bivector import CurvatureBlocks

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
mat3 = arrays(np.float64, (3, 3), elements=finite)
vec4 = arrays(np.float64, (4,), elements=finite)
vec6 = arrays(np.float64, (6,), elements=finite)


def _traceless(m):
    m = 0.5 * (m + m.T)
    return m - np.trace(m) / 3.0 * np.eye(3)


@st.composite
def blocks(draw, einstein=False, flat=False):
    s = draw(st.floats(-10, 10, allow_nan=False))
    wp = np.zeros((3, 3)) if flat else _traceless(draw(mat3))
    wm = np.zeros((3, 3)) if flat else _traceless(draw(mat3))
    b = np.zeros((3, 3)) if einstein else draw(mat3)
    return CurvatureBlocks(s, wp, wm, b)


@st.composite
def independent_pair(draw):
    x = draw(vec4)
    y = draw(vec4)
    if np.linalg.norm(x) < 1e-2 or np.linalg.norm(y - (x @ y) / (x @ x) * x) < 1e-2:
        x, y = np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0])
    return x, y
