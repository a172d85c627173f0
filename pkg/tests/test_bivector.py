import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from biortho.bivector import (
    HODGE,
    MINUS_BASIS,
    PLUS_BASIS,
    CurvatureBlocks,
    assemble,
    bianchi_defect,
    compose,
    decompose,
    hodge_star,
    plucker,
    split,
    wedge,
)
from strategies import blocks, independent_pair, vec6


def test_star_on_coordinate_basis():
    assert np.array_equal(hodge_star(oracles.e(0, 1)), oracles.e(2, 3))
    for k in range(6):
        basis = np.eye(6)[k]
        assert np.allclose(hodge_star(basis), oracles.star(basis), atol=0)


def test_star_fixes_selfdual_generator():
    phi = (oracles.e(0, 1) + oracles.e(2, 3)) / np.sqrt(2)
    assert np.allclose(hodge_star(phi), phi, atol=1e-15)


def test_bases_match_definitions():
    assert np.allclose(PLUS_BASIS, oracles.PLUS, atol=1e-16)
    assert np.allclose(MINUS_BASIS, oracles.MINUS, atol=1e-16)
    assert np.allclose(HODGE @ PLUS_BASIS, PLUS_BASIS)
    assert np.allclose(HODGE @ MINUS_BASIS, -MINUS_BASIS)


def test_star_involution_on_random_bivectors():
    rng = np.random.default_rng(0)
    for phi in rng.standard_normal((100, 6)):
        assert np.allclose(hodge_star(hodge_star(phi)), phi, atol=1e-15)


@given(vec6)
def test_star_is_isometric_involution(phi):
    assert np.allclose(hodge_star(hodge_star(phi)), phi)
    assert np.isclose(np.linalg.norm(hodge_star(phi)), np.linalg.norm(phi))


def test_split_of_e12():
    sd = split(oracles.e(0, 1))
    assert np.allclose(sd.plus, [1 / np.sqrt(2), 0, 0], atol=1e-16)
    assert np.allclose(sd.minus, [1 / np.sqrt(2), 0, 0], atol=1e-16)


def test_split_of_plus_basis_has_no_minus():
    for k in range(3):
        assert np.allclose(split(PLUS_BASIS[:, k]).minus, 0, atol=1e-16)


@given(vec6)
def test_split_reassembles_exactly(phi):
    sd = split(phi)
    assert np.allclose(sd.bivector(), phi, atol=1e-13)
    assert np.allclose(sd.bivector(), (phi + hodge_star(phi)) / 2 + (phi - hodge_star(phi)) / 2)
    assert np.allclose(PLUS_BASIS @ sd.plus, (phi + oracles.star(phi)) / 2, atol=1e-13)


@given(independent_pair())
def test_unit_simple_bivector_halves(pair):
    x, y = pair
    phi = wedge(x, y)
    phi = phi / np.linalg.norm(phi)
    sd = split(phi)
    assert abs(plucker(phi)) < 1e-12
    assert np.isclose(sd.plus @ sd.plus, 0.5, atol=1e-12)
    assert np.isclose(sd.minus @ sd.minus, 0.5, atol=1e-12)


def test_random_simple_bivectors_halves_bulk():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 500, 4))
    for a, b in zip(x, y):
        phi = oracles.wedge(a, b)
        phi /= np.linalg.norm(phi)
        sd = split(phi)
        assert abs(sd.plus @ sd.plus - 0.5) < 1e-12


def test_plucker_detects_nonsimple():
    assert plucker(oracles.e(0, 1) + oracles.e(2, 3)) == 1.0


def test_decompose_identity_is_round_sphere():
    b = decompose(np.eye(6))
    assert b.s == 12.0
    assert np.allclose(b.wplus, 0) and np.allclose(b.wminus, 0) and np.allclose(b.b, 0)


def test_decompose_unit_product():
    # oracle: A, C blocks of the product operator in independently written bases
    op = oracles.product_operator(1.0, 1.0)
    a, bb, c = oracles.blocks_of(op)
    s_oracle = 2 * np.trace(op)
    blk = decompose(op)
    assert blk.s == pytest.approx(s_oracle) == 4.0
    assert np.allclose(np.sort(np.linalg.eigvalsh(blk.wplus)), [-1 / 3, -1 / 3, 2 / 3], atol=1e-15)
    assert np.allclose(blk.wplus, a - s_oracle / 12 * np.eye(3), atol=1e-15)
    assert np.allclose(blk.wminus, c - s_oracle / 12 * np.eye(3), atol=1e-15)
    assert np.allclose(blk.b, 0, atol=1e-16)


def test_decompose_unequal_product_b_entry():
    op = oracles.product_operator(1.0, 0.25)
    blk = decompose(op)
    assert blk.s == pytest.approx(2.5)
    expected = np.zeros((3, 3))
    expected[0, 0] = 3 / 8
    assert np.allclose(blk.b, expected, atol=1e-16)
    assert np.allclose(blk.b, oracles.blocks_of(op)[1], atol=1e-16)


def test_compose_identity_and_product_spectrum():
    z = np.zeros((3, 3))
    assert np.allclose(compose(CurvatureBlocks(12.0, z, z, z)), np.eye(6), atol=1e-15)
    w = np.diag([2 / 3, -1 / 3, -1 / 3])
    ev = np.linalg.eigvalsh(compose(CurvatureBlocks(4.0, w, w, z)))
    assert np.allclose(np.sort(ev), [0, 0, 0, 0, 1, 1], atol=1e-15)


def test_round_trip_random_blocks():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        blk = CurvatureBlocks(
            rng.uniform(-10, 10), oracles.random_traceless(rng), oracles.random_traceless(rng),
            rng.standard_normal((3, 3)),
        )
        back = decompose(compose(blk))
        assert abs(back.s - blk.s) < 1e-13
        for name in ("wplus", "wminus", "b"):
            assert np.max(np.abs(getattr(back, name) - getattr(blk, name))) < 1e-13


@given(blocks())
def test_round_trip_property(blk):
    op = compose(blk)
    assert np.allclose(op, op.T, atol=0)
    assert np.isclose(np.trace(op), blk.s / 2, atol=1e-12)
    assert bianchi_defect(op) < 1e-12
    back = decompose(op)
    assert np.allclose(back.wplus, blk.wplus, atol=1e-12)
    assert np.allclose(back.b, blk.b, atol=1e-12)


def test_decompose_rejects_asymmetric():
    op = np.eye(6)
    op[0, 1] = 1e-6
    with pytest.raises(ValueError):
        decompose(op)


def test_decompose_accepts_tiny_asymmetry():
    op = np.eye(6)
    op[0, 1] = 1e-12
    decompose(op)


def test_decompose_rejects_bianchi_violation():
    op = PLUS_BASIS @ PLUS_BASIS.T  # identity on L+, zero on L-
    with pytest.raises(ValueError):
        decompose(op)


def test_compose_rejects_traced_w():
    with pytest.raises(ValueError):
        compose(CurvatureBlocks(1.0, np.eye(3), np.zeros((3, 3)), np.zeros((3, 3))))


def test_blocks_norm_conventions():
    b = np.zeros((3, 3))
    b[0, 0] = 3 / 8
    w = np.diag([1.0, -0.5, -0.5])
    blk = CurvatureBlocks(1.0, w, w, b)
    assert blk.b_norm2 == pytest.approx(4 * 9 / 64)
    assert blk.w_norm2 == pytest.approx(2 * 1.5)


def test_blocks_dict_round_trip():
    rng = np.random.default_rng(3)
    blk = CurvatureBlocks(1.5, oracles.random_traceless(rng), oracles.random_traceless(rng), rng.standard_normal((3, 3)))
    back = CurvatureBlocks.from_dict(blk.as_dict())
    assert back.s == blk.s and np.array_equal(back.b, blk.b) and np.array_equal(back.wplus, blk.wplus)


@given(st.floats(0.1, 3), st.floats(0.1, 3))
def test_b_norm_equals_traceless_ricci_norm_for_products(k1, k2):
    # product of surfaces: Ric = diag(k1, k1, k2, k2), s = 2(k1 + k2)
    blk = decompose(oracles.product_operator(k1, k2))
    s = 2 * (k1 + k2)
    ric0 = np.diag([k1, k1, k2, k2]) - s / 4 * np.eye(4)
    assert blk.b_norm2 == pytest.approx(np.sum(ric0**2), rel=1e-12, abs=1e-14)
