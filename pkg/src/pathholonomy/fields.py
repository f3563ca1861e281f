"""Adjoint-valued differential forms on a single chart.

A p-form is stored through a *component sampler*: ``components(x)`` maps
points of shape ``(..., d)`` to the fully antisymmetric coefficient tensor of
shape ``(..., d, ..., d, N, N)`` (p copies of ``d``).  Evaluation on tangent
vectors is full contraction, so ``(dx^1 ^ dx^2)(e_1, e_2) = 1``.

Derivative samplers return ``(..., d, <components>)`` with the derivative
direction first.  When a form has no analytic derivative, central finite
differences with step ``h_fd`` are used.

Graded bracket convention.  For a p-form ``a`` and a q-form ``b``::

    [a ^ b](v_1, ..., v_{p+q}) = sum over (p,q)-shuffles s of
        sign(s) [a(v_s(1), ..., v_s(p)), b(v_s(p+1), ..., v_s(p+q))]

so ``[A ^ A](u, v) = 2 [A(u), A(v)]`` and ``F_A = dA + 1/2 [A ^ A]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .liealg import GroupSpec, adjoint_inv_act, dagger

DEFAULT_H_FD = 1e-4


class ChartError(ValueError):
    """A point or curve left the chart domain."""


@dataclass(frozen=True)
class ChartDomain:
    dim: int
    lower: tuple = None
    upper: tuple = None
    h_fd: float = DEFAULT_H_FD

    def __post_init__(self):
        if self.dim not in (2, 3, 4):
            raise ValueError("chart dimension must be 2, 3 or 4")
        if self.h_fd <= 0:
            raise ValueError("finite-difference step must be positive")
        lo = (-np.inf,) * self.dim if self.lower is None else tuple(self.lower)
        hi = (np.inf,) * self.dim if self.upper is None else tuple(self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= np.asarray(self.lower)) and np.all(x <= np.asarray(self.upper)))

    def require(self, x, what="point"):
        if not self.contains(x):
            raise ChartError(f"{what} leaves the chart domain")


# ----------------------------------------------------------------- tensors

def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def antisymmetrize(T, p: int, offset: int = 0):
    """Alternating projection over ``p`` index axes starting at ``offset``.

    The trailing two axes (the matrix indices) and any leading batch axes are
    left alone; ``offset`` is counted from the first form index, which is
    located ``p + 2`` axes from the end.
    """
    if p <= 1:
        return T
    nd = T.ndim
    first = nd - 2 - p
    out = np.zeros_like(T)
    for perm in itertools.permutations(range(p)):
        axes = list(range(nd))
        for k, pk in enumerate(perm):
            axes[first + k] = first + pk
        out = out + _perm_sign(perm) * np.transpose(T, axes)
    return out / math.factorial(p)


def contract(T, vectors):
    """Contract the form indices of ``T`` with vectors of shape ``(..., d)``."""
    out = T
    p = len(vectors)
    nb = T.ndim - p - 2
    for i, v in enumerate(vectors):
        v = np.asarray(v, dtype=float)
        lead = nb - (v.ndim - 1)
        if lead < 0:
            out = out.reshape((1,) * (-lead) + out.shape)
            nb, lead = nb - lead, 0
        rest = p - i - 1
        vv = v.reshape((1,) * lead + v.shape + (1,) * (rest + 2))
        out = np.sum(out * vv, axis=nb)
    return out


# ----------------------------------------------------------------- forms

class AdjointForm:
    """Degree-p Lie-algebra-valued form on a d-dimensional chart."""

    def __init__(self, degree: int, dim: int, N: int,
                 components: Callable, derivative: Callable | None = None,
                 name: str = "", h_fd: float = DEFAULT_H_FD):
        if degree not in (0, 1, 2, 3, 4):
            raise ValueError("degree must be between 0 and 4")
        self.degree = degree
        self.dim = dim
        self.N = N
        self._components = components
        self._derivative = derivative
        self.name = name
        self.h_fd = h_fd

    def __repr__(self):
        return f"AdjointForm(degree={self.degree}, dim={self.dim}, N={self.N}, name={self.name!r})"

    @property
    def has_analytic_derivative(self) -> bool:
        return self._derivative is not None

    def components(self, x):
        return self._components(np.asarray(x, dtype=float))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self._derivative is not None:
            return self._derivative(x)
        return fd_derivative(self._components, x, self.dim, self.h_fd)

    def __call__(self, x, *vectors):
        if len(vectors) != self.degree:
            raise ValueError(f"{self.degree}-form needs {self.degree} vectors")
        return contract(self.components(x), vectors)

    # -- linear structure
    def _combine(self, other, a, b, name):
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        f, g = self, other
        deriv = None
        if f.has_analytic_derivative and g.has_analytic_derivative:
            deriv = lambda x: a * f.derivative(x) + b * g.derivative(x)
        return AdjointForm(self.degree, self.dim, self.N,
                           lambda x: a * f.components(x) + b * g.components(x),
                           deriv, name=name, h_fd=min(f.h_fd, g.h_fd))

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0, f"({self.name}+{other.name})")

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0, f"({self.name}-{other.name})")

    def scaled(self, c: float, name: str | None = None):
        f = self
        deriv = (lambda x: c * f.derivative(x)) if f.has_analytic_derivative else None
        return AdjointForm(self.degree, self.dim, self.N,
                           lambda x: c * f.components(x), deriv,
                           name=name or f"{c}*{self.name}", h_fd=self.h_fd)

    def __neg__(self):
        return self.scaled(-1.0, name=f"-{self.name}")

    def __rmul__(self, c):
        return self.scaled(float(c))

    def with_fd_derivative(self):
        """Same form with the analytic derivative dropped (for FD studies)."""
        return AdjointForm(self.degree, self.dim, self.N, self._components, None,
                           name=self.name, h_fd=self.h_fd)

    def with_h_fd(self, h):
        return AdjointForm(self.degree, self.dim, self.N, self._components,
                           self._derivative, name=self.name, h_fd=h)


def fd_derivative(components, x, dim, h):
    parts = []
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = h
        parts.append((components(x + e) - components(x - e)) / (2 * h))
    nb = x.ndim - 1
    return np.stack(parts, axis=nb)


def zero_form(degree, dim, N, name="0"):
    def comp(x):
        return np.zeros(x.shape[:-1] + (dim,) * degree + (N, N), dtype=complex)

    def deriv(x):
        return np.zeros(x.shape[:-1] + (dim,) * (degree + 1) + (N, N), dtype=complex)

    return AdjointForm(degree, dim, N, comp, deriv, name=name)


# ----------------------------------------------------------------- calculus

def _d_from_derivative(D, p):
    # D has axes (..., k, i_1..i_p, N, N)
    nb = D.ndim - 2 - (p + 1)
    out = np.zeros_like(D)
    for a in range(p + 1):
        out = out + (-1) ** a * np.moveaxis(D, nb, nb + a)
    return out


def _wedge_bracket_tensor(a, b, p, q):
    # a: (..., d^p, N, N); b: (..., d^q, N, N)
    nb = a.ndim - 2 - p
    ea = a.reshape(a.shape[:nb + p] + (1,) * q + a.shape[-2:])
    eb = b.reshape(b.shape[:nb] + (1,) * p + b.shape[nb:])
    P = ea @ eb - eb @ ea
    if p + q <= 1:
        return P
    return antisymmetrize(P, p + q) * (math.factorial(p + q) / (math.factorial(p) * math.factorial(q)))


def exterior_derivative(w: AdjointForm) -> AdjointForm:
    p = w.degree
    return AdjointForm(p + 1, w.dim, w.N,
                       lambda x: _d_from_derivative(w.derivative(x), p),
                       None, name=f"d{w.name}", h_fd=w.h_fd)


def wedge_bracket(a: AdjointForm, b: AdjointForm) -> AdjointForm:
    """Graded bracket ``[a ^ b]`` with the shuffle convention of this module."""
    p, q = a.degree, b.degree
    deriv = None
    if a.has_analytic_derivative and b.has_analytic_derivative:
        def deriv(x):
            Da, Db = a.derivative(x), b.derivative(x)
            ca, cb = a.components(x), b.components(x)
            nb = x.ndim - 1
            ca_ = np.expand_dims(ca, nb)
            cb_ = np.expand_dims(cb, nb)
            ca_ = np.broadcast_to(ca_, Da.shape)
            cb_ = np.broadcast_to(cb_, Db.shape)
            return (_wedge_bracket_tensor(Da, cb_, p, q)
                    + _wedge_bracket_tensor(ca_, Db, p, q))
    return AdjointForm(p + q, a.dim, a.N,
                       lambda x: _wedge_bracket_tensor(a.components(x), b.components(x), p, q),
                       deriv, name=f"[{a.name}^{b.name}]", h_fd=min(a.h_fd, b.h_fd))


def curvature_F(A: AdjointForm) -> AdjointForm:
    """``F_A = dA + 1/2 [A ^ A]``; analytic when A carries its derivative."""
    if A.degree != 1:
        raise ValueError("curvature needs a connection 1-form")

    def comp(x):
        D = A.derivative(x)
        c = A.components(x)
        return _d_from_derivative(D, 1) + 0.5 * _wedge_bracket_tensor(c, c, 1, 1)

    return AdjointForm(2, A.dim, A.N, comp, None, name=f"F[{A.name}]", h_fd=A.h_fd)


def cov_ext_derivative(A: AdjointForm, w: AdjointForm) -> AdjointForm:
    """``d_A w = dw + [A ^ w]``."""
    if w.degree > 3:
        raise ValueError("covariant derivative of a top form is not supported")
    p = w.degree

    def comp(x):
        return (_d_from_derivative(w.derivative(x), p)
                + _wedge_bracket_tensor(A.components(x), w.components(x), 1, p))

    return AdjointForm(p + 1, w.dim, w.N, comp, None,
                       name=f"d_A{w.name}", h_fd=w.h_fd)


def interior(v: Callable, w: AdjointForm, dv: Callable | None = None) -> AdjointForm:
    """Contraction ``i_v w`` with a vector field ``v(x) -> (..., d)``.

    With ``dv(x) -> (..., d, d)`` (derivative axis first) and an analytic
    derivative of ``w`` the result carries an analytic derivative too.
    """
    if w.degree == 0:
        raise ValueError("cannot contract a 0-form")
    letters = "abcd"[: w.degree]
    spec = "..." + letters + "ij,..." + letters[0] + "->..." + letters[1:] + "ij"

    def comp(x):
        return np.einsum(spec, w.components(x), np.asarray(v(x), dtype=float))

    deriv = None
    if dv is not None and w.derivative is not None:
        dspec = "...k" + letters + "ij,..." + letters[0] + "->...k" + letters[1:] + "ij"
        vspec = "..." + letters + "ij,...k" + letters[0] + "->...k" + letters[1:] + "ij"

        def deriv(x):
            vv = np.asarray(v(x), dtype=float)
            return (np.einsum(dspec, w.derivative(x), vv)
                    + np.einsum(vspec, w.components(x), np.asarray(dv(x), dtype=float)))

    return AdjointForm(w.degree - 1, w.dim, w.N, comp, deriv,
                       name=f"i{w.name}", h_fd=w.h_fd)


_HODGE4 = None


def _hodge_matrix():
    global _HODGE4
    if _HODGE4 is None:
        eps = np.zeros((4,) * 4)
        for perm in itertools.permutations(range(4)):
            eps[perm] = _perm_sign(perm)
        _HODGE4 = eps
    return _HODGE4


def hodge_star(w: AdjointForm, d: int = 4) -> AdjointForm:
    """Euclidean Hodge dual of a 2-form in four dimensions."""
    if d != 4 or w.dim != 4:
        raise NotImplementedError("Hodge star is implemented for 2-forms in d = 4 only")
    if w.degree != 2:
        raise ValueError("hodge_star expects a 2-form")
    eps = _hodge_matrix()

    def comp(x):
        return 0.5 * np.einsum("klij,...ijab->...klab", eps, w.components(x))

    deriv = None
    if w.has_analytic_derivative:
        def deriv(x):
            return 0.5 * np.einsum("klij,...mijab->...mklab", eps, w.derivative(x))

    return AdjointForm(2, 4, w.N, comp, deriv, name=f"*{w.name}", h_fd=w.h_fd)


# ----------------------------------------------------------------- gauge maps

class GaugeMap:
    """Group-valued function on the chart, with optional analytic derivatives.

    ``derivative(x)`` has shape ``(..., d, N, N)`` and ``second(x)`` shape
    ``(..., d, d, N, N)``.
    """

    def __init__(self, dim, N, value, derivative=None, second=None, name="g",
                 h_fd=DEFAULT_H_FD):
        self.dim = dim
        self.N = N
        self._value = value
        self._derivative = derivative
        self._second = second
        self.name = name
        self.h_fd = h_fd

    def __call__(self, x):
        return self._value(np.asarray(x, dtype=float))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self._derivative is not None:
            return self._derivative(x)
        return fd_derivative(self._value, x, self.dim, self.h_fd)

    def second(self, x):
        x = np.asarray(x, dtype=float)
        if self._second is not None:
            return self._second(x)
        return fd_derivative(self.derivative, x, self.dim, self.h_fd)

    def __mul__(self, other: "GaugeMap") -> "GaugeMap":
        f, g = self, other

        def val(x):
            return f(x) @ g(x)

        def der(x):
            nb = x.ndim - 1
            fx, gx = np.expand_dims(f(x), nb), np.expand_dims(g(x), nb)
            return f.derivative(x) @ gx + fx @ g.derivative(x)

        return GaugeMap(self.dim, self.N, val, der, None, name=f"{f.name}*{g.name}")


def identity_gauge(dim, N) -> GaugeMap:
    def val(x):
        return np.broadcast_to(np.eye(N, dtype=complex), x.shape[:-1] + (N, N)).copy()

    def der(x):
        return np.zeros(x.shape[:-1] + (dim, N, N), dtype=complex)

    def sec(x):
        return np.zeros(x.shape[:-1] + (dim, dim, N, N), dtype=complex)

    return GaugeMap(dim, N, val, der, sec, name="I")


def _gauge_pieces(A, g, x):
    gx = g(x)
    gi = dagger(gx)
    dg = g.derivative(x)
    nb = x.ndim - 1
    gxe, gie = np.expand_dims(gx, nb), np.expand_dims(gi, nb)
    return gx, gi, dg, gxe, gie, nb


def gauge_transform_connection(A: AdjointForm, g: GaugeMap) -> AdjointForm:
    """``A^g = Ad_{g^{-1}} A + g^{-1} dg``."""

    def comp(x):
        gx, gi, dg, gxe, gie, nb = _gauge_pieces(A, g, x)
        return gie @ A.components(x) @ gxe + gie @ dg

    deriv = None
    if A.has_analytic_derivative and g._second is not None:
        def deriv(x):
            gx, gi, dg, gxe, gie, nb = _gauge_pieces(A, g, x)
            a = A.components(x)                     # (..., k, N, N)
            Da = A.derivative(x)                    # (..., j, k, N, N)
            d2 = g.second(x)                        # (..., j, k, N, N)
            gi2 = gie[..., None, :, :]
            gx2 = gxe[..., None, :, :]
            dgj = dg[..., :, None, :, :]            # derivative index j
            dgk = dg[..., None, :, :, :]            # component index k
            dgi_j = -gi2 @ dgj @ gi2                # d_j (g^{-1})
            a2 = np.expand_dims(a, nb)
            return (dgi_j @ a2 @ gx2 + gi2 @ Da @ gx2 + gi2 @ a2 @ dgj
                    + dgi_j @ dgk + gi2 @ d2)

    return AdjointForm(1, A.dim, A.N, comp, deriv, name=f"{A.name}^{g.name}", h_fd=A.h_fd)


def adjoint_transform(w: AdjointForm, g: GaugeMap) -> AdjointForm:
    """Pointwise ``Ad_{g^{-1}} w`` for a tensorial form ``w``."""
    p = w.degree

    def comp(x):
        gx = g(x)
        shape = gx.shape[:-2] + (1,) * p + gx.shape[-2:]
        gxe = gx.reshape(shape)
        return dagger(gxe) @ w.components(x) @ gxe

    deriv = None
    if w.has_analytic_derivative and g._derivative is not None:
        def deriv(x):
            gx = g(x)
            nb = x.ndim - 1
            g1 = gx.reshape(gx.shape[:-2] + (1,) * (p + 1) + gx.shape[-2:])
            gi1 = dagger(g1)
            dg = g.derivative(x)
            dg1 = dg.reshape(dg.shape[:-2] + (1,) * p + dg.shape[-2:])
            dgi = -gi1 @ dg1 @ gi1
            c = np.expand_dims(w.components(x), nb)
            return dgi @ c @ g1 + gi1 @ w.derivative(x) @ g1 + gi1 @ c @ dg1

    return AdjointForm(p, w.dim, w.N, comp, deriv, name=f"Ad({g.name}){w.name}", h_fd=w.h_fd)


def act_gauge(A: AdjointForm, B: AdjointForm, g: GaugeMap):
    """Gauge action ``(A, B) g = (A^g, Ad_{g^{-1}} B)``."""
    return gauge_transform_connection(A, g), adjoint_transform(B, g)


def act_first(A, B, g: GaugeMap, eta: AdjointForm):
    """First action: ``(A^g + eta, Ad_{g^{-1}} B - d_{A^g} eta - 1/2 [eta ^ eta])``."""
    Ag = gauge_transform_connection(A, g)
    Bg = adjoint_transform(B, g)
    new_B = Bg - cov_ext_derivative(Ag, eta) - wedge_bracket(eta, eta).scaled(0.5)
    return Ag + eta, new_B


def act_second(A, B, g: GaugeMap, eta: AdjointForm):
    """Second action: ``(A^g, Ad_{g^{-1}} B - d_{A^g} eta)``."""
    Ag = gauge_transform_connection(A, g)
    Bg = adjoint_transform(B, g)
    return Ag, Bg - cov_ext_derivative(Ag, eta)


def pure_gauge(g: GaugeMap, name="pure") -> AdjointForm:
    """Flat connection ``g^{-1} dg`` (the gauge transform of zero)."""
    A0 = zero_form(1, g.dim, g.N)
    A = gauge_transform_connection(A0, g)
    A.name = name
    return A


def pointwise_adjoint(g: GaugeMap, X):
    return adjoint_inv_act(g, X)
