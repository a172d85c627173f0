from math import factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import lpmv

from biortho.meshes import S2Factor, build_mesh, normalized_legendre
from biortho.models import get_model

SMALL = {
    "s2xs2": dict(nlat=10),
    "s2xt2": dict(nlat=10, ntorus=12),
    "t4": dict(ntorus=12),
    "s4": dict(degree=5),
}


@pytest.fixture(scope="module", params=list(SMALL))
def mesh(request):
    return build_mesh(request.param, **SMALL[request.param])


def _random_field(mesh, seed):
    rng = np.random.default_rng(seed)
    return mesh.project(rng.standard_normal(mesh.shape))


def test_weights_sum_to_volume(mesh):
    assert mesh.volume == pytest.approx(mesh.model.volume, rel=1e-12)


def test_constants_annihilated(mesh):
    lap = mesh.laplacian(np.full(mesh.shape, 3.0))
    assert np.max(np.abs(lap)) < 1e-8 * 3.0


def test_divergence_and_integration_by_parts(mesh):
    for seed in range(3):
        u = _random_field(mesh, seed) + 5.0
        lap = mesh.laplacian(u)
        assert abs(mesh.integrate(lap)) < 1e-6 * mesh.integrate(np.abs(lap))
        lhs = mesh.integrate(-u * lap)
        rhs = mesh.integrate(mesh.gradsq(u))
        assert lhs == pytest.approx(rhs, rel=1e-5)


def test_projection_is_idempotent(mesh):
    u = _random_field(mesh, 7)
    assert np.allclose(mesh.project(u), u, atol=1e-12 * np.max(np.abs(u)))


def test_s2_laplacian_eigenfunctions():
    m = build_mesh("s2xs2", nlat=8, a=1.0, b=2.0)
    p = m.points()
    th1, ph1, th2, ph2 = np.moveaxis(p, -1, 0)
    u = np.cos(th1) + np.sin(th2) * np.cos(ph2) + (3 * np.cos(th2) ** 2 - 1)
    # -l(l+1)/a^2 with a = 1 on factor 1 and b = 2 on factor 2
    expected = -2 * np.cos(th1) - 2 / 4 * np.sin(th2) * np.cos(ph2) - 6 / 4 * (3 * np.cos(th2) ** 2 - 1)
    assert np.max(np.abs(m.laplacian(u) - expected)) < 1e-12
    grad = m.gradsq(np.cos(th1))
    assert np.max(np.abs(grad - np.sin(th1) ** 2)) < 1e-12


def test_torus_laplacian():
    m = build_mesh("t4", ntorus=8, L=3.0)
    x = np.moveaxis(m.points(), -1, 0)
    k = 2 * np.pi / 3.0
    u = np.sin(k * x[0]) * np.cos(k * x[3])
    assert np.max(np.abs(m.laplacian(u) + 2 * k * k * u)) < 1e-11


def test_s4_harmonics():
    m = build_mesh("s4", degree=4)
    x = m.ambient()
    u = x[..., 0] * x[..., 1] + 0.5 * x[..., 2]
    # degree-2 and degree-1 harmonics: -l(l+3) = -10, -4
    expected = -10 * x[..., 0] * x[..., 1] - 4 * 0.5 * x[..., 2]
    assert np.max(np.abs(m.laplacian(u) - expected)) < 1e-11
    assert np.max(np.abs(m.gradsq(x[..., 0]) - (1 - x[..., 0] ** 2))) < 1e-12
    counts = [int(np.sum(np.isclose(m.eigenvalues, -l * (l + 3)))) for l in range(5)]
    assert counts == [(2 * l + 3) * (l + 1) * (l + 2) // 6 for l in range(5)]


def test_s4_radius_scaling():
    m = build_mesh("s4", degree=3, r=2.0)
    assert m.volume == pytest.approx(8 * np.pi**2 / 3 * 16)
    x = m.ambient()[..., 0]
    assert np.max(np.abs(m.laplacian(x) + x)) < 1e-12


def test_legendre_against_scipy():
    x = np.linspace(-0.95, 0.95, 7)
    p = normalized_legendre(x, 6)
    for m in range(7):
        for l in range(m, 7):
            norm = np.sqrt((2 * l + 1) / (4 * np.pi) * factorial(l - m) / factorial(l + m))
            ref = (-1) ** m * norm * lpmv(m, l, x)  # remove the Condon-Shortley phase
            assert np.allclose(p[m, l], ref, atol=1e-12)


def test_s2_transform_round_trip():
    f = S2Factor(1.0, 12)
    rng = np.random.default_rng(0)
    c = rng.standard_normal(f.coeff_shape)
    c[:, np.triu_indices(f.lmax + 1, 1)[0], np.triu_indices(f.lmax + 1, 1)[1]] = 0.0  # l < m
    c[1, :, 0] = 0.0  # m = 0 modes are real
    assert np.allclose(f.forward(f.backward(c)), c, atol=1e-12)


@given(st.integers(0, 1000))
def test_ibp_property_small_sphere_product(seed):
    m = build_mesh("s2xs2", nlat=6)
    u = _random_field(m, seed)
    assert m.integrate(-u * m.laplacian(u)) == pytest.approx(m.integrate(m.gradsq(u)), rel=1e-10)


def test_unsupported_model():
    with pytest.raises(ValueError):
        build_mesh(get_model("cp2"))
