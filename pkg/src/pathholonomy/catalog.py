"""Named, parameterized field families and gauge maps.

Everything here is deterministic given its parameters; random families draw
from ``numpy.random.default_rng(seed)`` and nothing else.  Every entry
carries an analytic derivative so that curvature and covariant derivatives
are exact up to floating point.
"""
from __future__ import annotations

import itertools

import numpy as np

from .fields import (AdjointForm, GaugeMap, antisymmetrize, curvature_F,
                     hodge_star, pure_gauge, zero_form)
from .liealg import GroupSpec, LieAlgebraError, exp_map


class CatalogError(ValueError):
    pass


# ------------------------------------------------------------ scalar pieces

class FourierScalar:
    """``f(x) = env(x) * sum_m a_m sin(k_m . x + phi_m)`` with exact derivatives.

    ``env`` is ``exp(-|x - c|^2 / w^2)`` when a width is given, else 1.
    """

    def __init__(self, k, phase, amp, width=None, center=None):
        self.k = np.asarray(k, dtype=float)          # (M, d)
        self.phase = np.asarray(phase, dtype=float)  # (M,)
        self.amp = np.asarray(amp, dtype=float)      # (M,)
        self.width = width
        d = self.k.shape[1]
        self.center = np.zeros(d) if center is None else np.asarray(center, float)

    @classmethod
    def random(cls, rng, d, modes=3, amplitude=1.0, wavenumber=1.5, width=None):
        k = rng.uniform(-wavenumber, wavenumber, size=(modes, d))
        phase = rng.uniform(0, 2 * np.pi, size=modes)
        amp = amplitude * rng.uniform(-1, 1, size=modes) / np.sqrt(modes)
        return cls(k, phase, amp, width)

    def _env(self, x):
        if self.width is None:
            one = np.ones(x.shape[:-1])
            return one, np.zeros(x.shape), np.zeros(x.shape + (x.shape[-1],))
        y = x - self.center
        w2 = self.width ** 2
        e = np.exp(-np.sum(y * y, axis=-1) / w2)
        g = -2 * y / w2 * e[..., None]
        eye = np.eye(x.shape[-1])
        h = (4 * y[..., :, None] * y[..., None, :] / w2 ** 2 - 2 * eye / w2) * e[..., None, None]
        return e, g, h

    def all(self, x):
        """Value, gradient ``(..., d)`` and Hessian ``(..., d, d)``."""
        ph = x @ self.k.T + self.phase
        s, c = np.sin(ph) * self.amp, np.cos(ph) * self.amp
        v = s.sum(-1)
        gv = c @ self.k
        hv = -np.einsum("...m,mj,mk->...jk", s, self.k, self.k)
        e, ge, he = self._env(x)
        val = e * v
        grad = ge * v[..., None] + e[..., None] * gv
        hess = (he * v[..., None, None] + ge[..., :, None] * gv[..., None, :]
                + gv[..., :, None] * ge[..., None, :] + e[..., None, None] * hv)
        return val, grad, hess

    def __call__(self, x):
        return self.all(x)[0]


# ------------------------------------------------------------ coefficient forms

def _basis(spec: GroupSpec, which: str):
    if which == "cartan":
        return spec.cartan
    if which in ("all", None):
        return spec.generators
    raise CatalogError(f"unknown basis selection {which!r}")


def _antisym_coeffs(C, p, d):
    # C: (..., d^p, N, N) arbitrary -> fully antisymmetric
    return antisymmetrize(C, p) if p > 1 else C


def constant_form(spec: GroupSpec, d: int, p: int, coeffs, basis="all", name="const"):
    """Constant-coefficient form; ``coeffs`` has shape ``(d,)*p + (n_basis,)``."""
    B = _basis(spec, basis)
    C = np.einsum("...a,aij->...ij", np.asarray(coeffs, dtype=float), B)
    C = _antisym_coeffs(C, p, d)

    def comp(x):
        return np.broadcast_to(C, x.shape[:-1] + C.shape).copy()

    def deriv(x):
        return np.zeros(x.shape[:-1] + (d,) + C.shape, dtype=complex)

    return AdjointForm(p, d, spec.N, comp, deriv, name=name)


def linear_form(spec: GroupSpec, d: int, p: int, c0, c1, basis="all", name="linear"):
    """``w_I(x) = C0_I + sum_k x_k C1_{k,I}``; c1 has shape ``(d,) + (d,)*p + (n_basis,)``."""
    Bs = _basis(spec, basis)
    C0 = _antisym_coeffs(np.einsum("...a,aij->...ij", np.asarray(c0, float), Bs), p, d)
    C1 = np.einsum("...a,aij->...ij", np.asarray(c1, float), Bs)
    C1 = _antisym_coeffs(C1, p, d)

    def comp(x):
        return C0 + np.tensordot(x, C1, axes=([-1], [0]))

    def deriv(x):
        return np.broadcast_to(C1, x.shape[:-1] + C1.shape).copy()

    return AdjointForm(p, d, spec.N, comp, deriv, name=name)


def random_constant_form(spec, d, p, seed, amplitude=1.0, basis="all"):
    rng = np.random.default_rng(seed)
    nb = len(_basis(spec, basis))
    return constant_form(spec, d, p, amplitude * rng.uniform(-1, 1, (d,) * p + (nb,)),
                         basis, name=f"const[{seed}]")


def random_linear_form(spec, d, p, seed, amplitude=1.0, basis="all"):
    rng = np.random.default_rng(seed)
    nb = len(_basis(spec, basis))
    c0 = amplitude * rng.uniform(-1, 1, (d,) * p + (nb,))
    c1 = amplitude * rng.uniform(-1, 1, (d,) * (p + 1) + (nb,))
    return linear_form(spec, d, p, c0, c1, basis, name=f"linear[{seed}]")


def random_fourier_form(spec: GroupSpec, d: int, p: int, seed: int, modes: int = 3,
                        amplitude: float = 0.5, wavenumber: float = 1.5,
                        width: float | None = None, basis="all"):
    """Truncated random Fourier series with algebra-valued coefficients."""
    rng = np.random.default_rng(seed)
    Bs = _basis(spec, basis)
    k = rng.uniform(-wavenumber, wavenumber, size=(modes, d))
    phase = rng.uniform(0, 2 * np.pi, size=modes)
    raw = rng.uniform(-1, 1, size=(modes,) + (d,) * p + (len(Bs),))
    C = np.einsum("m...a,aij->m...ij", raw, Bs) * (amplitude / np.sqrt(modes))
    C = _antisym_coeffs(C, p, d)
    env = FourierScalar(np.zeros((1, d)), [np.pi / 2], [1.0], width)
    tail = (1,) * p + (1, 1)

    def comp(x):
        ph = x @ k.T + phase
        e = env(x)
        w = np.sin(ph) * e[..., None]
        return np.tensordot(w, C, axes=([-1], [0]))

    def deriv(x):
        ph = x @ k.T + phase
        e, ge, _ = env.all(x)
        s, c = np.sin(ph), np.cos(ph)
        # d/dx_j [e sin] = ge_j sin + e cos k_j
        w = ge[..., :, None] * s[..., None, :] + (e[..., None] * c)[..., None, :] * k.T
        return np.tensordot(w, C, axes=([-1], [0]))

    return AdjointForm(p, d, spec.N, comp, deriv, name=f"fourier[{seed}]")


# ------------------------------------------------------------ named fields

def u1_vortex(spec: GroupSpec, d: int, strength: float = 1.0, width: float | None = None,
              generator: int = 0, axes=(0, 1)):
    """``A = c g(x) (x dy - y dx) T`` with optional Gaussian profile ``g``.

    Without a width this is ``F = 2 c T dx^dy``.
    """
    T = spec.generators[generator]
    i, j = axes
    env = FourierScalar(np.zeros((1, d)), [np.pi / 2], [1.0], width)

    def comp(x):
        e = env(x)
        out = np.zeros(x.shape[:-1] + (d, spec.N, spec.N), dtype=complex)
        out[..., i, :, :] = (-strength * e * x[..., j])[..., None, None] * T
        out[..., j, :, :] = (strength * e * x[..., i])[..., None, None] * T
        return out

    def deriv(x):
        e, ge, _ = env.all(x)
        out = np.zeros(x.shape[:-1] + (d, d, spec.N, spec.N), dtype=complex)
        di = -strength * ge * x[..., j, None]
        di[..., j] -= strength * e
        dj = strength * ge * x[..., i, None]
        dj[..., i] += strength * e
        out[..., :, i, :, :] = di[..., None, None] * T
        out[..., :, j, :, :] = dj[..., None, None] * T
        return out

    return AdjointForm(1, d, spec.N, comp, deriv, name="u1_vortex")


def gaussian_flux(spec: GroupSpec, d: int, strength: float = 1.0, width: float | None = 1.0,
                  axes=(0, 1), generator: int = 0):
    """2-form ``c g(x) T dx^a ^ dx^b``."""
    T = spec.generators[generator]
    a, b = axes
    env = FourierScalar(np.zeros((1, d)), [np.pi / 2], [1.0], width)

    def comp(x):
        e = strength * env(x)
        out = np.zeros(x.shape[:-1] + (d, d, spec.N, spec.N), dtype=complex)
        out[..., a, b, :, :] = e[..., None, None] * T
        out[..., b, a, :, :] = -e[..., None, None] * T
        return out

    def deriv(x):
        ge = strength * env.all(x)[1]
        out = np.zeros(x.shape[:-1] + (d, d, d, spec.N, spec.N), dtype=complex)
        out[..., :, a, b, :, :] = ge[..., None, None] * T
        out[..., :, b, a, :, :] = -ge[..., None, None] * T
        return out

    return AdjointForm(2, d, spec.N, comp, deriv, name="gaussian_flux")


def su2_hedgehog(spec: GroupSpec, d: int, scale: float = 0.4):
    """``A_i = s f(r) eps_{a i j} x_j T_a`` on the first three axes, ``f = 1/(1+r^2)``."""
    if spec.family != "su" or spec.N != 2:
        raise CatalogError("the hedgehog field needs su(2)")
    if d < 3:
        raise CatalogError("the hedgehog field needs d >= 3")
    T = spec.generators
    eps = np.zeros((3, 3, 3))
    for perm in itertools.permutations(range(3)):
        eps[perm] = np.linalg.det(np.eye(3)[list(perm)])
    # M[i, j] = sum_a eps[a, i, j] T_a
    M = np.einsum("aij,abc->ijbc", eps, T)

    def comp(x):
        y = x[..., :3]
        f = 1.0 / (1.0 + np.sum(y * y, -1))
        out = np.zeros(x.shape[:-1] + (d, 2, 2), dtype=complex)
        out[..., :3, :, :] = scale * f[..., None, None, None] * np.einsum("...j,ijbc->...ibc", y, M)
        return out

    def deriv(x):
        y = x[..., :3]
        f = 1.0 / (1.0 + np.sum(y * y, -1))
        df = -2 * y * (f * f)[..., None]
        out = np.zeros(x.shape[:-1] + (d, d, 2, 2), dtype=complex)
        v = np.einsum("...j,ijbc->...ibc", y, M)
        out[..., :3, :3, :, :] = scale * (df[..., :, None, None, None] * v[..., None, :, :, :]
                                          + f[..., None, None, None, None] * np.swapaxes(M, 0, 1))
        return out

    return AdjointForm(1, d, 2, comp, deriv, name="su2_hedgehog")


def exact_cartan_connection(spec: GroupSpec, d: int, seed: int, modes: int = 3,
                            amplitude: float = 0.5, wavenumber: float = 1.5):
    """``A = sum_a d(phi_a) H_a`` with Cartan ``H_a``: flat and reducible by construction."""
    rng = np.random.default_rng(seed)
    H = spec.cartan
    pots = [FourierScalar.random(rng, d, modes, amplitude, wavenumber) for _ in H]

    def comp(x):
        return sum(p.all(x)[1][..., None, None] * h for p, h in zip(pots, H))

    def deriv(x):
        return sum(p.all(x)[2][..., None, None] * h for p, h in zip(pots, H))

    return AdjointForm(1, d, spec.N, comp, deriv, name=f"exact_cartan[{seed}]")


# ------------------------------------------------------------ gauge maps

def product_gauge_map(spec: GroupSpec, d: int, angles, directions) -> GaugeMap:
    """``g(x) = prod_i exp(theta_i(x) X_i)`` with exact first and second derivatives."""
    X = [np.asarray(v, dtype=complex) for v in directions]
    th = list(angles)
    N = spec.N

    def factors(x):
        E, D, S = [], [], []
        for f, Xi in zip(th, X):
            v, g, h = f.all(x)
            Ei = exp_map(v[..., None, None] * Xi, check=False)
            Di = g[..., :, None, None] * (Xi @ Ei)[..., None, :, :]
            Si = (h[..., :, :, None, None] * (Xi @ Ei)[..., None, None, :, :]
                  + (g[..., :, None] * g[..., None, :])[..., None, None]
                  * (Xi @ Xi @ Ei)[..., None, None, :, :])
            E.append(Ei)
            D.append(Di)
            S.append(Si)
        return E, D, S

    def value(x):
        E, _, _ = factors(x)
        out = E[0]
        for e in E[1:]:
            out = out @ e
        return out

    def derivative(x):
        E, D, _ = factors(x)
        n = len(E)
        total = 0
        for i in range(n):
            term = None
            for l in range(n):
                piece = D[l] if l == i else E[l][..., None, :, :]
                term = piece if term is None else term @ piece
            total = total + term
        return total

    def second(x):
        E, D, S = factors(x)
        n = len(E)
        total = 0
        for i in range(n):
            for l in range(n):
                term = None
                for m in range(n):
                    if m == i and m == l:
                        piece = S[m]
                    elif m == i:
                        piece = D[m][..., :, None, :, :]
                    elif m == l:
                        piece = D[m][..., None, :, :, :]
                    else:
                        piece = E[m][..., None, None, :, :]
                    term = piece if term is None else term @ piece
                total = total + term
        return total

    return GaugeMap(d, N, value, derivative, second, name="g")


def random_gauge_map(spec: GroupSpec, d: int, seed: int, factors: int = 3,
                     amplitude: float = 1.0, wavenumber: float = 1.0,
                     basis="all") -> GaugeMap:
    rng = np.random.default_rng(seed)
    Bs = _basis(spec, basis)
    angles, dirs = [], []
    for _ in range(factors):
        angles.append(FourierScalar.random(rng, d, 3, amplitude, wavenumber))
        c = rng.normal(size=len(Bs))
        c /= np.linalg.norm(c)
        dirs.append(np.einsum("a,aij->ij", c, Bs))
    g = product_gauge_map(spec, d, angles, dirs)
    g.name = f"g[{seed}]"
    return g


# ------------------------------------------------------------ registry

def build_connection(entry: dict, spec: GroupSpec, d: int) -> AdjointForm:
    fam = entry.get("family", "zero")
    p = dict(entry)
    p.pop("family", None)
    seed = p.pop("seed", None)
    if fam == "zero":
        return zero_form(1, d, spec.N, name="0")
    if fam == "constant":
        if "coeffs" in p:
            return constant_form(spec, d, 1, p["coeffs"], p.get("basis", "all"))
        return random_constant_form(spec, d, 1, _need(seed, fam), p.get("amplitude", 1.0),
                                    p.get("basis", "all"))
    if fam == "linear":
        return random_linear_form(spec, d, 1, _need(seed, fam), p.get("amplitude", 1.0),
                                  p.get("basis", "all"))
    if fam == "random_fourier":
        return random_fourier_form(spec, d, 1, _need(seed, fam), p.get("modes", 3),
                                   p.get("amplitude", 0.5), p.get("wavenumber", 1.5),
                                   p.get("width"), p.get("basis", "all"))
    if fam == "u1_vortex":
        return u1_vortex(spec, d, p.get("strength", 1.0), p.get("width"))
    if fam == "su2_hedgehog":
        return su2_hedgehog(spec, d, p.get("scale", 0.4))
    if fam == "exact_cartan":
        return exact_cartan_connection(spec, d, _need(seed, fam), p.get("modes", 3),
                                       p.get("amplitude", 0.5))
    if fam == "pure_gauge":
        g = random_gauge_map(spec, d, _need(seed, fam), p.get("factors", 3),
                             p.get("amplitude", 1.0), p.get("wavenumber", 1.0))
        return pure_gauge(g)
    raise CatalogError(f"unknown connection family {fam!r}")


def build_two_form(entry: dict, spec: GroupSpec, d: int, A: AdjointForm) -> AdjointForm:
    fam = entry.get("family", "zero")
    p = dict(entry)
    seed = p.pop("seed", None)
    if fam == "zero":
        return zero_form(2, d, spec.N, name="0")
    if fam == "tautological":
        return -curvature_F(A)
    if fam == "curvature_combo":
        a, b = p.get("alpha", 0.0), p.get("beta", 0.0)
        F = curvature_F(A)
        out = F.scaled(a)
        if b:
            out = out + hodge_star(F).scaled(b)
        return out
    if fam == "constant":
        return random_constant_form(spec, d, 2, _need(seed, fam), p.get("amplitude", 1.0),
                                    p.get("basis", "all"))
    if fam == "linear":
        return random_linear_form(spec, d, 2, _need(seed, fam), p.get("amplitude", 1.0),
                                  p.get("basis", "all"))
    if fam == "random_fourier":
        return random_fourier_form(spec, d, 2, _need(seed, fam), p.get("modes", 3),
                                   p.get("amplitude", 0.5), p.get("wavenumber", 1.5),
                                   p.get("width"), p.get("basis", "all"))
    if fam == "gaussian_flux":
        return gaussian_flux(spec, d, p.get("strength", 1.0), p.get("width", 1.0),
                             tuple(p.get("axes", (0, 1))))
    raise CatalogError(f"unknown 2-form family {fam!r}")


def _need(seed, fam):
    if seed is None:
        raise CatalogError(f"family {fam!r} needs a seed")
    return int(seed)
