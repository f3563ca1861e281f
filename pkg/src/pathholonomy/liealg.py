"""Matrix Lie group and Lie algebra kernels.

Groups are represented in their defining representation: U(1)^k as diagonal
k x k unitary matrices and SU(N) as N x N special unitary matrices.  Algebra
elements are anti-Hermitian matrices.  All kernels accept stacked arrays of
shape ``(..., N, N)`` so that whole grids can be processed at once.

The invariant inner product is ``<X, Y> = -2 Re Tr(X Y)``, under which the
generators ``i sigma_a / 2`` of su(2) and ``i lambda_a / 2`` of su(3) are
orthonormal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg as sla

ANTIHERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
#: number of group multiplications between polar re-projections
REPROJECT_EVERY = 64

_TAYLOR_ORDER = 18
_SCALE_TARGET = 0.5


class LieAlgebraError(ValueError):
    """Raised when an input violates an algebra or group invariant."""


# ---------------------------------------------------------------- generators

def pauli_generators() -> np.ndarray:
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return 0.5j * np.stack([s1, s2, s3])


@lru_cache(maxsize=None)
def _sun_generators(n: int) -> np.ndarray:
    # generalized Gell-Mann matrices, ordered so that n=2 gives Pauli and
    # n=3 gives the standard lambda_1..lambda_8
    mats = []
    for k in range(1, n):
        for j in range(k):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            mats.append(((j, k, 0), m))
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            mats.append(((j, k, 1), m))
        m = np.zeros((n, n), dtype=complex)
        m[np.arange(k), np.arange(k)] = 1.0
        m[k, k] = -k
        m *= np.sqrt(2.0 / (k * (k + 1)))
        mats.append(((k, k, 2), m))
    if n == 3:
        order = [(0, 1, 0), (0, 1, 1), (1, 1, 2), (0, 2, 0), (0, 2, 1),
                 (1, 2, 0), (1, 2, 1), (2, 2, 2)]
        lookup = dict(mats)
        mats = [(key, lookup[key]) for key in order]
    elif n == 2:
        lookup = dict(mats)
        mats = [(key, lookup[key]) for key in [(0, 1, 0), (0, 1, 1), (1, 1, 2)]]
    return 0.5j * np.stack([m for _, m in mats])


def gellmann_generators(n: int = 3) -> np.ndarray:
    return _sun_generators(n).copy()


def u1_generators(k: int) -> np.ndarray:
    gens = np.zeros((k, k, k), dtype=complex)
    gens[np.arange(k), np.arange(k), np.arange(k)] = 1j
    return gens


# ---------------------------------------------------------------- group spec

@dataclass(frozen=True)
class GroupSpec:
    """A compact matrix group with a chosen maximal-torus (Cartan) basis.

    ``family`` is ``"u1"`` (meaning U(1)^k, ``N = k``) or ``"su"``.
    ``generators`` span the Lie algebra; ``cartan`` holds commuting
    anti-Hermitian matrices spanning Lie(T).
    """

    family: str
    N: int
    generators: np.ndarray = field(repr=False)
    cartan: np.ndarray = field(repr=False)
    inner_norm: float = 2.0

    def __post_init__(self):
        gens = np.asarray(self.generators, dtype=complex)
        cart = np.asarray(self.cartan, dtype=complex).reshape(-1, self.N, self.N)
        for m in np.concatenate([gens, cart]):
            if not is_antihermitian(m):
                raise LieAlgebraError("basis elements must be anti-Hermitian")
        if self.family == "su":
            if np.max(np.abs(np.trace(gens, axis1=-2, axis2=-1)), initial=0) > 1e-12:
                raise LieAlgebraError("su(N) generators must be traceless")
        for a in cart:
            for b in cart:
                if np.max(np.abs(a @ b - b @ a)) > 1e-12:
                    raise LieAlgebraError("Cartan basis elements must commute")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "cartan", cart)

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def abelian(self) -> bool:
        return self.family == "u1"

    def inner(self, X, Y):
        """Invariant inner product ``-(c) Re Tr(X Y)`` with ``c = inner_norm``."""
        return -self.inner_norm * np.real(np.einsum("...ij,...ji->...", X, Y))

    def norm(self, X):
        return np.sqrt(np.maximum(self.inner(X, X), 0.0))

    def element(self, coeffs) -> np.ndarray:
        """Combine real coefficients ``(..., dim)`` with the generator basis."""
        return np.einsum("...a,aij->...ij", np.asarray(coeffs, dtype=float),
                         self.generators)

    def coefficients(self, X) -> np.ndarray:
        gram = self.inner(self.generators[:, None], self.generators[None, :])
        rhs = self.inner(np.asarray(X)[..., None, :, :], self.generators)
        return np.linalg.solve(gram, rhs[..., None])[..., 0]

    def to_config(self) -> dict:
        return {"family": self.family, "N": self.N}


def make_group(family: str, N: int | None = None, cartan=None,
               generator_set: str | None = None) -> GroupSpec:
    """Build a :class:`GroupSpec` from a family string.

    ``family`` accepts ``"u1"`` (with ``N`` copies), ``"su2"``, ``"su3"`` or
    ``"suN"`` with explicit ``N``.  ``cartan`` is a list of indices into the
    named generator set; by default the diagonal generators are used.
    """
    fam = family.lower()
    if fam in ("u1", "u1^k", "u1k"):
        k = 1 if N is None else int(N)
        gens = u1_generators(k)
        idx = list(range(k)) if cartan is None else list(cartan)
        return GroupSpec("u1", k, gens, gens[idx])
    if fam.startswith("su"):
        n = int(fam[2:]) if fam[2:].isdigit() else int(N)
        if N is not None and int(N) != n:
            raise LieAlgebraError(f"family {family} conflicts with N={N}")
        if n < 2:
            raise LieAlgebraError("SU(N) needs N >= 2")
        gens = _sun_generators(n)
        if generator_set not in (None, "pauli", "gellmann"):
            raise LieAlgebraError(f"unknown generator set {generator_set!r}")
        if cartan is None:
            diag = [i for i, g in enumerate(gens)
                    if np.allclose(g, np.diag(np.diag(g)))]
            cartan = diag
        return GroupSpec("su", n, gens, gens[list(cartan)])
    raise LieAlgebraError(f"unknown group family {family!r}")


# ---------------------------------------------------------------- predicates

def dagger(X):
    return np.conj(np.swapaxes(X, -1, -2))


def is_antihermitian(X, tol: float = ANTIHERMITIAN_TOL) -> bool:
    X = np.asarray(X)
    scale = max(1.0, float(np.max(np.abs(X), initial=0.0)))
    return bool(np.max(np.abs(X + dagger(X)), initial=0.0) <= tol * scale)


def unitarity_defect(g) -> float:
    g = np.asarray(g)
    eye = np.eye(g.shape[-1])
    return float(np.max(np.abs(dagger(g) @ g - eye), initial=0.0))


def is_unitary(g, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(g) <= tol


# ---------------------------------------------------------------- kernels

def _expm_raw(X):
    X = np.asarray(X, dtype=complex)
    n = X.shape[-1]
    # per-matrix scaling, so a result never depends on what else is in the batch
    norms = np.max(np.sum(np.abs(X), axis=-1), axis=-1)
    with np.errstate(divide="ignore"):
        sq = np.where(norms > _SCALE_TARGET,
                      np.ceil(np.log2(np.maximum(norms, 1e-300) / _SCALE_TARGET)), 0).astype(int)
    Y = X / (2.0 ** sq)[..., None, None]
    eye = np.broadcast_to(np.eye(n, dtype=complex), X.shape)
    # Horner evaluation of the truncated Taylor series
    E = eye + Y / _TAYLOR_ORDER
    for k in range(_TAYLOR_ORDER - 1, 0, -1):
        E = eye + (Y @ E) / k
    top = int(np.max(sq, initial=0))
    for j in range(top):
        E = np.where((sq > j)[..., None, None], E @ E, E)
    return E


def exp_map(X, check: bool = True):
    """Matrix exponential of (a stack of) anti-Hermitian matrices.

    Scaling and squaring around an 18th-order Taylor core; for ``||X|| <= 1``
    the result is accurate to about 1e-15.
    """
    if check and not is_antihermitian(X, tol=1e-10):
        raise LieAlgebraError("exp_map expects anti-Hermitian input")
    return _expm_raw(X)


def log_map(g, check: bool = True):
    """Principal logarithm of unitary matrices close to the identity."""
    g = np.asarray(g, dtype=complex)
    if check:
        if not is_unitary(g, tol=1e-8):
            raise LieAlgebraError("log_map expects a unitary matrix")
        eye = np.eye(g.shape[-1])
        dist = np.linalg.norm(g - eye, ord=2, axis=(-2, -1))
        if np.any(dist >= 1.0):
            raise LieAlgebraError("log_map: argument outside the injectivity domain ||g - I|| < 1")
    flat = g.reshape(-1, g.shape[-2], g.shape[-1])
    out = np.empty_like(flat)
    for i, m in enumerate(flat):
        T, Z = sla.schur(m, output="complex")
        theta = np.angle(np.diag(T))
        out[i] = (Z * (1j * theta)) @ dagger(Z)
    out = out.reshape(g.shape)
    return 0.5 * (out - dagger(out))


def bracket(X, Y):
    return X @ Y - Y @ X


def adjoint_act(g, X):
    """``Ad_g X = g X g^{-1}`` for unitary ``g``."""
    return g @ X @ dagger(g)


def adjoint_inv_act(g, X):
    """``Ad_{g^{-1}} X = g^{-1} X g`` for unitary ``g``."""
    return dagger(g) @ X @ g


def project_unitary(g):
    """Nearest unitary matrix (polar factor), keeping SU(N) determinants."""
    W, _, Vh = np.linalg.svd(g)
    return W @ Vh


def project_antihermitian(X):
    return 0.5 * (X - dagger(X))


def cartan_projection(X, spec: GroupSpec):
    """Orthogonal projection onto span(Cartan basis) under the invariant product."""
    C = spec.cartan
    if len(C) == 0:
        raise LieAlgebraError("group spec has an empty Cartan basis")
    gram = spec.inner(C[:, None], C[None, :])
    rhs = spec.inner(np.asarray(X)[..., None, :, :], C)
    coef = np.linalg.solve(gram, rhs[..., None])[..., 0]
    return np.einsum("...a,aij->...ij", coef, C)


def cartan_residual(X, spec: GroupSpec):
    """Distance of ``X`` from Lie(T) in the invariant norm."""
    return spec.norm(np.asarray(X) - cartan_projection(X, spec))


def ordered_product(factors, reproject_every: int = REPROJECT_EVERY):
    """Left-ordered product ``f[n-1] ... f[1] f[0]`` with periodic re-projection."""
    factors = np.asarray(factors)
    out = np.broadcast_to(np.eye(factors.shape[-1], dtype=complex),
                          factors.shape[1:]).copy()
    for i, f in enumerate(factors):
        out = f @ out
        if (i + 1) % reproject_every == 0:
            out = project_unitary(out)
    return out
