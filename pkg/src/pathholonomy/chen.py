"""Chen integrals, Chen brackets and the curvature of special connections.

Everything is expressed in the frame at ``sigma(gamma(0))``: a value sampled
at time t is pulled back by ``Ad_{h(t)^{-1}}`` with ``h`` the A-frame along
the path.  Integrals over [0, 1] use the trapezoid rule on the frame nodes,
and the simplex ``0 < t1 < t2 < 1`` is handled by a cumulative trapezoid
integral of the earlier factor.
"""
from __future__ import annotations

import itertools

import numpy as np

from .fields import AdjointForm, _perm_sign, cov_ext_derivative, curvature_F
from .geom import Path, Square
from .liealg import adjoint_inv_act, cartan_residual
from .pathspace import PathTangent, SpecialConnection, hol_AB
from .transport import frame_factor, nodes


def _trapz(vals, N):
    return (vals[1:-1].sum(0) + 0.5 * (vals[0] + vals[-1])) / N


def _cumtrapz(vals, N):
    out = np.zeros_like(vals)
    out[1:] = np.cumsum(0.5 * (vals[1:] + vals[:-1]), axis=0) / N
    return out


def _field_values(tangent, t):
    if isinstance(tangent, PathTangent):
        return tangent.field.point(t)
    if isinstance(tangent, Path):
        return tangent.point(t)
    return np.asarray(tangent(t), dtype=float)


def vector_field(values, velocities, dim, name="X") -> Path:
    """Wrap a vector field along a path (with its t-derivative) as a ``Path``."""
    return Path(values, velocities, dim, loop=False, name=name)


def lift_tangent(A: AdjointForm, gamma: Path, rho: Path, xi0=None, N: int = 128) -> PathTangent:
    """Admissible tangent over ``rho`` with vertical value ``xi0`` at t = 0.

    ``xi(t) = xi0 - int_0^t Ad_{h^{-1}} F_A(rho, gamma') dtau``.
    """
    t = nodes(N)
    h = frame_factor(A, gamma, N)
    F = curvature_F(A)
    src = adjoint_inv_act(h, F(gamma.point(t), rho.point(t), gamma.velocity(t)))
    xi0 = np.zeros((A.N, A.N), dtype=complex) if xi0 is None else np.asarray(xi0, dtype=complex)
    xi = xi0 - _cumtrapz(src, N)
    return PathTangent(gamma, rho, xi, N, h)


def _twisted(w: AdjointForm, gamma: Path, args, N, frames):
    t = nodes(N)
    vecs = [_field_values(a, t) for a in args] + [gamma.velocity(t)]
    return adjoint_inv_act(frames, w(gamma.point(t), *vecs))


def chen_line(w: AdjointForm, gamma: Path, tangents=(), N: int = 128, frames=None, A=None):
    """``int_0^1 Ad_{h^{-1}} w(X_1, ..., X_{p-1}, gamma') dt``.

    Frames come from ``frames`` or, given ``A``, are computed; with neither
    the frame is trivial (useful for abelian checks).
    """
    if w.degree < 1:
        raise ValueError("Chen integral needs a form of degree >= 1")
    if len(tangents) != w.degree - 1:
        raise ValueError(f"a {w.degree}-form takes {w.degree - 1} tangents")
    frames = _frames(gamma, N, frames, A, w.N)
    return _trapz(_twisted(w, gamma, tangents, N, frames), N)


def _frames(gamma, N, frames, A, n):
    if frames is not None:
        return frames
    if A is not None:
        return frame_factor(A, gamma, N)
    return np.broadcast_to(np.eye(n, dtype=complex), (N + 1, n, n))


def _shuffles(p, q):
    for left in itertools.combinations(range(p + q), p):
        right = [i for i in range(p + q) if i not in left]
        yield list(left), right, _perm_sign(list(left) + right)


def chen_bracket(w1: AdjointForm, w2: AdjointForm, gamma: Path, tangents=(), N: int = 128,
                 frames=None, A=None, method: str = "cumulative"):
    """Chen bracket ``int_{t1<t2} [w1(..., gamma'(t1)), w2(..., gamma'(t2))]``.

    The ``deg w1 - 1 + deg w2 - 1`` tangents are distributed by signed
    shuffles.  ``method="cumulative"`` integrates the earlier factor
    cumulatively (O(N)); ``method="simplex"`` sums the midpoint rule over the
    subdivided triangle (O(N^2)) and serves as an independent check.
    """
    p, q = w1.degree - 1, w2.degree - 1
    if p < 0 or q < 0:
        raise ValueError("Chen bracket needs forms of degree >= 1")
    if len(tangents) != p + q:
        raise ValueError(f"expected {p + q} tangents")
    frames = _frames(gamma, N, frames, A, w1.N)
    total = 0
    for left, right, sign in _shuffles(p, q):
        a = _twisted(w1, gamma, [tangents[i] for i in left], N, frames)
        b = _twisted(w2, gamma, [tangents[i] for i in right], N, frames)
        if method == "cumulative":
            acc = _cumtrapz(a, N)
            val = _trapz(acc @ b - b @ acc, N)
        elif method == "simplex":
            am = 0.5 * (a[1:] + a[:-1])
            bm = 0.5 * (b[1:] + b[:-1])
            # strictly earlier cells count fully, the diagonal cell with weight 1/2
            cum = np.cumsum(am, axis=0) - 0.5 * am
            val = np.sum(cum @ bm - bm @ cum, axis=0) / N ** 2
        else:
            raise ValueError(f"unknown method {method!r}")
        total = total + sign * val
    return total


def curvature_terms(A: AdjointForm, B: AdjointForm, gamma: Path, X, Y, N: int = 128,
                    method: str = "cumulative") -> dict:
    """Five curvature contributions on ``(X, Y)``, in the frame at ``sigma(gamma(0))``."""
    t = nodes(N)
    h = frame_factor(A, gamma, N)
    x0, x1 = gamma.point(t[0]), gamma.point(t[-1])
    X0, Y0 = _field_values(X, t[:1])[0], _field_values(Y, t[:1])[0]
    X1, Y1 = _field_values(X, t[-1:])[0], _field_values(Y, t[-1:])[0]
    F = curvature_F(A)
    dAB = cov_ext_derivative(A, B)
    terms = {
        "F0": F(x0, X0, Y0),
        "B1": -adjoint_inv_act(h[-1], B(x1, X1, Y1)),
        "B0": B(x0, X0, Y0),
        "dAB": chen_line(dAB, gamma, (X, Y), N, frames=h),
        "chen": chen_bracket(B + F, B, gamma, (X, Y), N, frames=h, method=method),
    }
    return terms


def curvature_FAB(A: AdjointForm, B: AdjointForm, gamma: Path, X, Y, N: int = 128,
                  method: str = "cumulative"):
    """Curvature of the special connection ``(A, B)`` evaluated on ``(X, Y)``."""
    return sum(curvature_terms(A, B, gamma, X, Y, N, method).values())


def small_square(gamma: Path, X: Path, Y: Path, eps: float) -> Square:
    """Loop of paths ``gamma + a(s) X + b(s) Y`` around the square ``[0, eps]^2``.

    ``(a, b)`` runs (0,0) -> (eps,0) -> (eps,eps) -> (0,eps) -> (0,0).
    """
    d = gamma.dim
    corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float) * eps

    def ab(s):
        s = np.asarray(s, float)
        k = np.clip(np.floor(s * 4).astype(int), 0, 3)
        u = s * 4 - k
        c0, c1 = corners[k], corners[k + 1]
        return c0 + u[..., None] * (c1 - c0), 4 * (c1 - c0)

    def point(s, t):
        c, _ = ab(s)
        return gamma.point(t) + c[..., :1] * X.point(t) + c[..., 1:] * Y.point(t)

    def ds(s, t):
        _, dc = ab(s)
        return dc[..., :1] * X.point(t) + dc[..., 1:] * Y.point(t)

    def dt(s, t):
        c, _ = ab(s)
        return gamma.velocity(t) + c[..., :1] * X.velocity(t) + c[..., 1:] * Y.velocity(t)

    return Square(point, ds, dt, d, loop_s=True, name=f"small_square({eps:g})")


def small_square_oracle(A: AdjointForm, B: AdjointForm, gamma: Path, X: Path, Y: Path,
                        eps_values=(0.1, 0.05, 0.025), Ns: int = 64, Nt: int = 128,
                        N_curv: int = 256):
    """Compare ``-log Hol_(A,B)/eps^2`` around an eps-square with the curvature.

    Returns the errors per eps and observed orders between consecutive eps.
    """
    from .liealg import log_map

    target = curvature_FAB(A, B, gamma, X, Y, N_curv)
    conn = SpecialConnection(A, B)
    errs = []
    for eps in eps_values:
        hol = hol_AB(conn, small_square(gamma, X, Y, eps), Ns, Nt).value
        est = -log_map(hol) / eps ** 2
        errs.append(float(np.linalg.norm(est - target)))
    orders = [float(np.log2(errs[i] / errs[i + 1]) / np.log2(eps_values[i] / eps_values[i + 1]))
              for i in range(len(errs) - 1)]
    return {"curvature": target, "errors": errs, "orders": orders}


def flatness_check(A: AdjointForm, B: AdjointForm, spec, points) -> tuple:
    """Sampled ``(max |F_A|, max |d_A B|, max Cartan residual of A and B)``."""
    x = np.asarray(points, dtype=float)
    F = curvature_F(A).components(x)
    dAB = cov_ext_derivative(A, B).components(x)
    ca = cartan_residual(A.components(x), spec)
    cb = cartan_residual(B.components(x), spec)
    return (float(np.max(np.abs(F), initial=0.0)), float(np.max(np.abs(dAB), initial=0.0)),
            float(max(np.max(ca, initial=0.0), np.max(cb, initial=0.0))))
