"""Spectral discretisations of catalog models for conformal-factor fields.

A mesh exposes nodal fields with quadrature weights against dV_g and
applies the Laplace-Beltrami operator through an eigenbasis:

* ``ProductMesh`` - product of two surface factors (``S2Factor`` with Gauss
  nodes in colatitude and uniform longitudes, or ``T2Factor`` with a uniform
  periodic grid).  Fields are 4-d arrays, factor 1 on axes (0, 1).  The
  Laplacian is Delta_1 x I + I x Delta_2 in the tensor-product eigenbasis.
* ``S4Mesh`` - round S^4, with harmonics obtained by orthonormalising
  ambient monomials of R^5 on an exact product Gauss rule.

Every field is read through its band-limited interpolant (``project``), so
that sum(w * -u Lu) == sum(w * |grad u|^2) holds to rounding.
"""

from __future__ import annotations

from functools import cached_property
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import roots_jacobi

from .models import ModelManifold, get_model


def normalized_legendre(x: np.ndarray, lmax: int) -> np.ndarray:
    """P[m, l, i]: orthonormal associated Legendre functions at x = cos(theta).

    Normalised so that P_l^m(cos theta) e^{i m phi} has unit L2 norm on the
    unit sphere; zero for l < m.
    """
    x = np.asarray(x, dtype=float)
    sin = np.sqrt(1.0 - x * x)
    out = np.zeros((lmax + 1, lmax + 1, x.size))
    pmm = np.full_like(x, 1.0 / np.sqrt(4.0 * np.pi))
    for m in range(lmax + 1):
        if m > 0:
            pmm = pmm * sin * np.sqrt((2.0 * m + 1.0) / (2.0 * m))
        out[m, m] = pmm
        if m + 1 <= lmax:
            out[m, m + 1] = x * np.sqrt(2.0 * m + 3.0) * pmm
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[m, l] = a * (x * out[m, l - 1] - b * out[m, l - 2])
    return out


def legendre_dtheta(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """d/dtheta of the functions returned by ``normalized_legendre``."""
    lmax = p.shape[1] - 1
    sin = np.sqrt(1.0 - x * x)
    out = np.zeros_like(p)
    for m in range(lmax + 1):
        for l in range(m, lmax + 1):
            term = l * x * p[m, l]
            if l > m:
                term = term - np.sqrt((2.0 * l + 1.0) * (l * l - m * m) / (2.0 * l - 1.0)) * p[m, l - 1]
            out[m, l] = term / sin
    return out


class S2Factor:
    """Round S^2 of radius ``radius`` on an nlat x 2*nlat Gauss grid.

    Coefficients are real arrays (2, L+1, L+1) indexed [re/im, l, m] with
    L = nlat - 1.
    """

    def __init__(self, radius: float = 1.0, nlat: int = 32):
        self.radius = float(radius)
        self.nlat = nlat
        self.nlon = 2 * nlat
        self.lmax = nlat - 1
        x, w = np.polynomial.legendre.leggauss(nlat)
        x = x[::-1]  # colatitude increasing
        w = w[::-1]
        self.theta = np.arccos(x)
        self.phi = 2.0 * np.pi * np.arange(self.nlon) / self.nlon
        self.shape = (self.nlat, self.nlon)
        self.weights = np.outer(w, np.full(self.nlon, 2.0 * np.pi / self.nlon)) * self.radius**2
        p = normalized_legendre(x, self.lmax)
        dp = legendre_dtheta(x, p)
        # (m, i, l) layouts for batched matmul
        self._analysis = np.transpose(p * (2.0 * np.pi * w), (0, 2, 1))
        self._synth = np.transpose(p, (0, 2, 1))
        self._synth_dtheta = np.transpose(dp, (0, 2, 1))
        self._synth_over_sin = np.transpose(p / np.sin(self.theta), (0, 2, 1))
        l = np.arange(self.lmax + 1)
        lam = -(l * (l + 1.0)) / self.radius**2
        self.eigenvalues = np.broadcast_to(lam[None, :, None], (2, self.lmax + 1, self.lmax + 1)).copy()
        self.first_eigenvalue = -2.0 / self.radius**2

    @property
    def coeff_shape(self) -> tuple[int, ...]:
        return (2, self.lmax + 1, self.lmax + 1)

    def forward(self, u: np.ndarray) -> np.ndarray:
        lead = u.shape[:-2]
        f = np.fft.rfft(u, axis=-1)[..., : self.lmax + 1] / self.nlon  # (..., i, m)
        f = np.moveaxis(f.reshape((-1,) + f.shape[-2:]), -1, 0)  # (m, N, i)
        out = np.empty((2, self.lmax + 1) + f.shape[1:2] + (self.lmax + 1,))
        for part, comp in enumerate((f.real, f.imag)):
            out[part] = np.matmul(comp, self._analysis)  # (m, N, l)
        out = np.moveaxis(out, (1, 2, 3), (3, 1, 2))  # (2, N, l, m)
        return np.moveaxis(out, 1, 0).reshape(lead + self.coeff_shape)

    def _synthesize(self, c: np.ndarray, table: np.ndarray, dphi: bool = False) -> np.ndarray:
        lead = c.shape[:-3]
        c = c.reshape((-1,) + self.coeff_shape)
        cm = np.transpose(c, (1, 3, 0, 2))  # (2, m, N, l)
        re = np.matmul(cm[0], np.transpose(table, (0, 2, 1)))  # (m, N, i)
        im = np.matmul(cm[1], np.transpose(table, (0, 2, 1)))
        g = re + 1j * im
        if dphi:
            g = g * (1j * np.arange(self.lmax + 1))[:, None, None]
        g = np.moveaxis(g, 0, -1)  # (N, i, m)
        full = np.zeros(g.shape[:-1] + (self.nlon // 2 + 1,), dtype=complex)
        full[..., : self.lmax + 1] = g * self.nlon
        u = np.fft.irfft(full, n=self.nlon, axis=-1)
        return u.reshape(lead + self.shape)

    def backward(self, c: np.ndarray) -> np.ndarray:
        return self._synthesize(c, self._synth)

    def gradient(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal-frame components (d_theta u, d_phi u / sin theta) / radius."""
        gt = self._synthesize(c, self._synth_dtheta)
        gp = self._synthesize(c, self._synth_over_sin, dphi=True)
        return gt / self.radius, gp / self.radius

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta, self.phi, indexing="ij")


class T2Factor:
    """Flat torus [0, L)^2 on an n x n periodic grid; Nyquist modes are dropped."""

    def __init__(self, length: float = 2 * np.pi, n: int = 32):
        if n % 2:
            raise ValueError("torus grid size must be even")
        self.length = float(length)
        self.n = n
        self.shape = (n, n)
        self.x = self.length * np.arange(n) / n
        self.weights = np.full(self.shape, (self.length / n) ** 2)
        k1 = 2.0 * np.pi * np.fft.fftfreq(n, d=self.length / n)
        k2 = 2.0 * np.pi * np.fft.rfftfreq(n, d=self.length / n)
        keep = np.ones((n, n // 2 + 1), dtype=bool)
        keep[n // 2, :] = False
        keep[:, n // 2] = False
        self._keep = keep
        self._k1 = k1[:, None]
        self._k2 = k2[None, :]
        lam = -(self._k1**2 + self._k2**2)
        self.eigenvalues = np.broadcast_to(lam, (2,) + lam.shape).copy()
        self.first_eigenvalue = -((2.0 * np.pi / self.length) ** 2)

    @property
    def coeff_shape(self) -> tuple[int, ...]:
        return (2, self.n, self.n // 2 + 1)

    def forward(self, u: np.ndarray) -> np.ndarray:
        f = np.fft.rfft2(u, axes=(-2, -1)) * self._keep
        return np.stack([f.real, f.imag], axis=-3)

    def _synth(self, f: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(f * self._keep, s=self.shape, axes=(-2, -1))

    def backward(self, c: np.ndarray) -> np.ndarray:
        return self._synth(c[..., 0, :, :] + 1j * c[..., 1, :, :])

    def gradient(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        f = c[..., 0, :, :] + 1j * c[..., 1, :, :]
        return self._synth(1j * self._k1 * f), self._synth(1j * self._k2 * f)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.x, indexing="ij")


class ProductMesh:
    def __init__(self, model: ModelManifold, f1, f2):
        self.model = model
        self.f1 = f1
        self.f2 = f2
        self.shape = f1.shape + f2.shape
        self.weights = f1.weights[:, :, None, None] * f2.weights[None, None, :, :]
        self.eigenvalues = (
            f1.eigenvalues[:, :, :, None, None, None] + f2.eigenvalues[None, None, None, :, :, :]
        )
        self.first_eigenvalue = max(f1.first_eigenvalue, f2.first_eigenvalue)

    @cached_property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    def forward(self, u: np.ndarray) -> np.ndarray:
        c2 = self.f2.forward(u)  # (n1a, n1b, *c2)
        nc2 = c2.ndim - 2
        moved = np.moveaxis(c2, (0, 1), (-2, -1))
        c = self.f1.forward(moved)  # (*c2, *c1)
        return np.moveaxis(c, tuple(range(nc2)), tuple(range(3, 3 + nc2)))

    def backward(self, c: np.ndarray) -> np.ndarray:
        moved = np.moveaxis(c, (3, 4, 5), (0, 1, 2))  # (*c2, *c1)
        u1 = self.f1.backward(moved)  # (*c2, n1a, n1b)
        u1 = np.moveaxis(u1, (-2, -1), (0, 1))  # (n1a, n1b, *c2)
        return self.f2.backward(u1)

    def apply_spectral(self, u: np.ndarray, multiplier) -> np.ndarray:
        c = self.forward(u)
        return self.backward(c * multiplier(self.eigenvalues))

    def project(self, u):
        return self.backward(self.forward(u))

    def laplacian(self, u):
        return self.apply_spectral(u, lambda lam: lam)

    def gradsq(self, u):
        c = self.forward(u)
        g2 = self.f2.gradient(c)  # factor-1 still in coefficients on axes 0..2
        total = 0.0
        for comp in g2:
            total = total + self._backward_first(comp) ** 2
        c1 = self._backward_second(c)
        moved = np.moveaxis(c1, (0, 1, 2), (-3, -2, -1))
        for comp in self.f1.gradient(moved):
            total = total + np.moveaxis(comp, (-2, -1), (0, 1)) ** 2
        return total

    def _backward_first(self, arr):
        # arr: (*c1, n2a, n2b) -> (n1a, n1b, n2a, n2b)
        moved = np.moveaxis(arr, (0, 1, 2), (-3, -2, -1))
        out = self.f1.backward(moved)
        return np.moveaxis(out, (-2, -1), (0, 1))

    def _backward_second(self, c):
        # c: (*c1, *c2) -> (*c1, n2a, n2b)
        return self.f2.backward(c)

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f))

    def points(self) -> np.ndarray:
        a1, b1 = self.f1.coordinates()
        a2, b2 = self.f2.coordinates()
        return np.stack(
            np.broadcast_arrays(
                a1[:, :, None, None], b1[:, :, None, None], a2[None, None, :, :], b2[None, None, :, :]
            ),
            axis=-1,
        )


def _monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for k in combo:
            e[k] += 1
        out.append(tuple(e))
    return out


class S4Mesh:
    """Round S^4(r) with spherical harmonics up to ``degree``.

    Nodes are a product Gauss rule in (cos chi1, cos chi2, cos chi3, phi),
    exact for polynomials of degree 2 * degree + 3 in the ambient
    coordinates of R^5.
    """

    def __init__(self, model: ModelManifold, degree: int = 6):
        self.model = model
        self.radius = float(model.params.get("r", 1.0))
        self.degree = degree
        n = degree + 2
        t1, w1 = roots_jacobi(n, 1.0, 1.0)
        t2, w2 = roots_jacobi(n, 0.5, 0.5)
        t3, w3 = np.polynomial.legendre.leggauss(n)
        nphi = 2 * degree + 4
        ph = 2.0 * np.pi * np.arange(nphi) / nphi
        wph = np.full(nphi, 2.0 * np.pi / nphi)
        self.shape = (n, n, n, nphi)
        T1, T2, T3, PH = np.meshgrid(t1, t2, t3, ph, indexing="ij")
        s1, s2, s3 = np.sqrt(1 - T1**2), np.sqrt(1 - T2**2), np.sqrt(1 - T3**2)
        self._chis = np.stack([np.arccos(T1), np.arccos(T2), np.arccos(T3), PH], axis=-1)
        x = np.stack([T1, s1 * T2, s1 * s2 * T3, s1 * s2 * s3 * np.cos(PH), s1 * s2 * s3 * np.sin(PH)], axis=-1)
        self._x = x.reshape(-1, 5)
        wu = (w1[:, None, None, None] * w2[None, :, None, None] * w3[None, None, :, None] * wph).reshape(-1)
        self._wu = wu
        self.weights = (wu * self.radius**4).reshape(self.shape)
        self._build_basis()

    def _build_basis(self):
        exps = [e for l in range(self.degree + 1) for e in _monomials(5, l)]
        index = {e: j for j, e in enumerate(exps)}
        x = self._x
        mon = np.ones((x.shape[0], len(exps)))
        for j, e in enumerate(exps):
            for k, p in enumerate(e):
                if p:
                    mon[:, j] *= x[:, k] ** p
        sw = np.sqrt(self._wu)[:, None]
        phi = np.zeros((x.shape[0], 0))
        coef = np.zeros((len(exps), 0))
        lams = []
        for l in range(self.degree + 1):
            cols = [index[e] for e in _monomials(5, l)]
            sel = np.zeros((len(exps), len(cols)))
            sel[cols, range(len(cols))] = 1.0
            block, bcoef = mon[:, cols], sel
            for _ in range(2):  # re-orthogonalise once for stability
                proj = phi.T @ (self._wu[:, None] * block)
                block = block - phi @ proj
                bcoef = bcoef - coef @ proj
            u, sv, vt = np.linalg.svd(sw * block, full_matrices=False)
            rank = int(np.sum(sv > 1e-9 * sv[0]))
            expected = (2 * l + 3) * (l + 1) * (l + 2) // 6
            if rank != expected:
                raise RuntimeError(f"harmonic space of degree {l} has rank {rank}, expected {expected}")
            rot = vt[:rank].T / sv[:rank]
            phi = np.hstack([phi, block @ rot])
            coef = np.hstack([coef, bcoef @ rot])
            lams += [-l * (l + 3.0)] * rank
        self._mon = mon
        self._coef = coef
        self._phi = phi
        self.eigenvalues = np.array(lams) / self.radius**2
        self.first_eigenvalue = -4.0 / self.radius**2
        # d/dx_k on monomial coefficients
        self._deriv = []
        for k in range(5):
            d = np.zeros((len(exps), len(exps)))
            for j, e in enumerate(exps):
                if e[k]:
                    lower = list(e)
                    lower[k] -= 1
                    d[index[tuple(lower)], j] = e[k]
            self._deriv.append(d)

    @cached_property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    def forward(self, u: np.ndarray) -> np.ndarray:
        return self._phi.T @ (self._wu * np.reshape(u, -1))

    def backward(self, c: np.ndarray) -> np.ndarray:
        return (self._phi @ c).reshape(self.shape)

    def apply_spectral(self, u, multiplier):
        return self.backward(multiplier(self.eigenvalues) * self.forward(u))

    def project(self, u):
        return self.backward(self.forward(u))

    def laplacian(self, u):
        return self.apply_spectral(u, lambda lam: lam)

    def gradsq(self, u):
        p = self._coef @ self.forward(u)
        g = np.stack([self._mon @ (d @ p) for d in self._deriv], axis=-1)
        radial = np.sum(g * self._x, axis=-1)
        return ((np.sum(g * g, axis=-1) - radial**2) / self.radius**2).reshape(self.shape)

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f))

    def points(self) -> np.ndarray:
        return self._chis

    def ambient(self) -> np.ndarray:
        """Unit-sphere ambient coordinates (x1..x5) at the nodes."""
        return self._x.reshape(self.shape + (5,))


def build_mesh(model: ModelManifold | str, nlat: int = 32, ntorus: int = 32, degree: int = 6, **params):
    """Spectral mesh for a catalog model (S^4, S^2 x S^2, S^2 x T^2, T^4)."""
    if isinstance(model, str):
        model = get_model(model, **params)
    if model.name == "s4":
        return S4Mesh(model, degree)
    if model.name == "s2xs2":
        return ProductMesh(model, S2Factor(model.params["a"], nlat), S2Factor(model.params["b"], nlat))
    if model.name == "s2xt2":
        return ProductMesh(model, S2Factor(model.params["a"], nlat), T2Factor(model.params["L"], ntorus))
    if model.name == "t4":
        L = model.params["L"]
        return ProductMesh(model, T2Factor(L, ntorus), T2Factor(L, ntorus))
    raise ValueError(f"no conformal mesh for model {model.name!r}")
