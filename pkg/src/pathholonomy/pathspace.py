"""Special connections on the bundle of horizontal paths, and surface transport.

A special connection is the data ``(A, eta, B)``: the base connection ``A``,
an optional 1-form ``eta`` (so that the initial point uses ``A + eta``) and an
adjoint-valued 2-form ``B``.  ``B = 0, eta = 0`` is the trivial connection,
``B = -F_A`` the tautological one.

Surface transport along a path of paths ``Gamma`` solves

    dk/ds k^{-1} = -Ad_{h0(s)^{-1}} [ eta(Gamma'(s,0))
                      + int_0^1 Ad_{h_s(t)^{-1}} B(Gamma'(s,t), Gamma_t(s,t)) dt ],

with ``h0`` the A-frame along ``s -> Gamma(s, 0)`` and ``h_s`` the A-frame
along ``t -> Gamma(s, t)``.  ``H(Gamma) = k(1)``; for a loop of paths the
holonomy is ``Hol_A(Gamma(., 0)) k(1)``.

Numerics: the s-product uses midpoints with ``Ns`` steps, ``h0`` at those
midpoints comes from a ``2 Ns`` step run along the initial-point path, and each
inner integral is a trapezoid rule over ``Nt`` frame nodes.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fields import AdjointForm, GaugeMap, adjoint_transform, curvature_F, gauge_transform_connection
from .geom import Square, boundary_loop
from .liealg import _expm_raw, adjoint_inv_act, dagger
from .transport import (TransportError, TransportResult, cumulative_product, frame_factor,
                        frames_from_samples, holonomy_A, midpoints, nodes)


@dataclass
class SpecialConnection:
    A: AdjointForm
    B: AdjointForm
    eta: AdjointForm | None = None
    name: str = ""

    @classmethod
    def trivial(cls, A):
        from .fields import zero_form
        return cls(A, zero_form(2, A.dim, A.N), None, "trivial")

    @classmethod
    def tautological(cls, A):
        return cls(A, -curvature_F(A), None, "tautological")

    def gauge_transformed(self, g: GaugeMap) -> "SpecialConnection":
        eta = None if self.eta is None else adjoint_transform(self.eta, g)
        return SpecialConnection(gauge_transform_connection(self.A, g),
                                 adjoint_transform(self.B, g), eta, f"{self.name}^g")


@dataclass
class PathTangent:
    """Tangent to the space of horizontal paths at the section lift of ``path``.

    ``field`` is the base vector field ``X(t)`` along the path (a ``Path``
    carrying ``X`` and its t-derivative); ``xi`` holds the connection value
    ``A(q_dot)`` of the tangent at the ``N + 1`` nodes; ``frames`` the
    A-frames along the path at the same nodes.
    """

    path: object
    field: object
    xi: np.ndarray
    N: int
    frames: np.ndarray

    def base_vectors(self):
        return self.field.point(nodes(self.N))


@dataclass
class SurfaceTransport:
    k: np.ndarray              # (Ns + 1, n, n) at s-nodes
    K: np.ndarray              # h0(s) k(s) at s-nodes
    h0: np.ndarray             # A-frame along Gamma(., 0) at s-nodes
    Ns: int
    Nt: int
    meta: dict = field(default_factory=dict)

    @property
    def value(self):
        return self.k[-1]


def _twisted_inner(conn, G: Square, s, Nt, domain=None):
    """``int_0^1 Ad_{h_s(t)^{-1}} B(Gamma', Gamma_t) dt`` for a batch of s values."""
    A, B = conn.A, conn.B
    tm = midpoints(Nt)
    tn = nodes(Nt)
    Sm, Tm = np.meshgrid(s, tm, indexing="ij")
    pm = G.point(Sm, Tm)
    if domain is not None and not domain.contains(pm):
        raise TransportError("square leaves the chart domain")
    # frames along each slice: time index first for the cumulative product
    h = frames_from_samples(A, np.swapaxes(pm, 0, 1), np.swapaxes(G.dt(Sm, Tm), 0, 1), 1.0 / Nt)
    h = np.swapaxes(h, 0, 1)                     # (ns, Nt+1, n, n)
    Sn, Tn = np.meshgrid(s, tn, indexing="ij")
    vals = B(G.point(Sn, Tn), G.ds(Sn, Tn), G.dt(Sn, Tn))
    tw = adjoint_inv_act(h, vals)
    return (tw[:, 1:-1].sum(axis=1) + 0.5 * (tw[:, 0] + tw[:, -1])) / Nt


def surface_integrand(conn, G: Square, Ns: int, Nt: int, domain=None, workers: int = 1):
    """Algebra values ``M(s)`` at the s-midpoints, plus the initial-point frames."""
    A = conn.A
    sm = midpoints(Ns)
    bottom = G.initial_points(0.0)
    h0_all = frame_factor(A, bottom, 2 * Ns, domain)
    h0_mid = h0_all[1::2]
    h0_nodes = h0_all[::2]

    if workers > 1 and Ns > 1:
        chunks = np.array_split(sm, workers)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda c: _twisted_inner(conn, G, c, Nt, domain), chunks))
        inner = np.concatenate(parts, axis=0)
    else:
        inner = _twisted_inner(conn, G, sm, Nt, domain)
    if conn.eta is not None:
        z = np.zeros_like(sm)
        inner = inner + conn.eta(G.point(sm, z), G.ds(sm, z))
    return adjoint_inv_act(h0_mid, inner), h0_nodes


def surface_transport(conn: SpecialConnection, G: Square, Ns: int = 64, Nt: int = 64,
                      base_point=None, domain=None, workers: int = 1) -> SurfaceTransport:
    """Surface transport ``k(s)`` of a path of paths.

    ``base_point`` is a group element ``g0``; the initial point is then
    ``sigma(Gamma(0,0)) g0`` and the computation runs in the translated frame.
    """
    if base_point is not None:
        g0 = np.asarray(base_point, dtype=complex)
        const = GaugeMap(G.dim, conn.A.N,
                         lambda x: np.broadcast_to(g0, x.shape[:-1] + g0.shape).copy(),
                         lambda x: np.zeros(x.shape[:-1] + (G.dim,) + g0.shape, dtype=complex),
                         lambda x: np.zeros(x.shape[:-1] + (G.dim, G.dim) + g0.shape, dtype=complex))
        conn = conn.gauge_transformed(const)
    M, h0 = surface_integrand(conn, G, Ns, Nt, domain, workers)
    k = cumulative_product(_expm_raw(-M / Ns))
    return SurfaceTransport(k, h0 @ k, h0, Ns, Nt)


def H_map(conn: SpecialConnection, G: Square, Ns: int = 64, Nt: int = 64, base_point=None,
          domain=None, richardson: bool = False, workers: int = 1) -> TransportResult:
    val = surface_transport(conn, G, Ns, Nt, base_point, domain, workers).value
    res = TransportResult(val, Ns * Nt, meta={"Ns": Ns, "Nt": Nt})
    if richardson and Ns % 2 == 0 and Nt % 2 == 0:
        coarse = surface_transport(conn, G, Ns // 2, Nt // 2, base_point, domain, workers).value
        res.error_estimate = float(np.linalg.norm(coarse - val)) / 3.0
    return res


def hol_AB(conn: SpecialConnection, G: Square, Ns: int = 64, Nt: int = 64, base_point=None,
           domain=None, workers: int = 1) -> TransportResult:
    """``Hol_A(Gamma(., 0)) H(Gamma)`` for a loop of paths."""
    if not G.loop_s:
        raise TransportError("hol_AB needs a square closed in s")
    st = surface_transport(conn, G, Ns, Nt, base_point, domain, workers)
    return TransportResult(st.K[-1], Ns * Nt, meta={"Ns": Ns, "Nt": Nt})


def tautological_check(A: AdjointForm, G: Square, Ns: int = 64, Nt: int = 64,
                       n_boundary: int | None = None, domain=None, workers: int = 1):
    """Frobenius gap between ``H_(A,-F_A)(Gamma)`` and ``Hol_A`` of the boundary loop."""
    H = surface_transport(SpecialConnection.tautological(A), G, Ns, Nt,
                          domain=domain, workers=workers).value
    nb = n_boundary or max(Ns, Nt)
    W = holonomy_A(A, boundary_loop(G), nb, domain=domain).value
    return float(np.linalg.norm(H - W)), H, W


def eval_special_connection(conn: SpecialConnection, tangent: PathTangent, full: bool = False):
    """Connection value on a path tangent.

    Returns the difference from ``(A, 0)``, i.e.
    ``eta(X(0)) + int_0^1 Ad_{h^{-1}} B(X, gamma_t) dt``, or with ``full`` the
    complete value, which adds the tangent's own ``A``-value ``xi(0)``.
    """
    gamma, N = tangent.path, tangent.N
    t = nodes(N)
    x, v, X = gamma.point(t), gamma.velocity(t), tangent.field.point(t)
    tw = adjoint_inv_act(tangent.frames, conn.B(x, X, v))
    val = (tw[1:-1].sum(0) + 0.5 * (tw[0] + tw[-1])) / N
    if conn.eta is not None:
        val = val + conn.eta(x[0], X[0])
    if full:
        val = val + tangent.xi[0]
    return val


def iterated_connection_eval(A: AdjointForm, B: AdjointForm, C: AdjointForm, Q: Square,
                             X, Ns: int = 64, Nt: int = 64, horizontal_tol: float = 1e-6):
    """Value of the iterated connection ``(A, B, C)`` on a tangent field ``X(s, t)``.

    ``A(X(0,0)) + int B(X(0,t), Q_t(0,t)) dt + int int C(X, Q', Q_t) ds dt``,
    each term twisted into the frame at ``sigma(Q(0,0))`` by the A-frames of
    the lift.  Returns ``(value, warnings)``; a warning is emitted when ``Q``
    is not ``(A, B)``-horizontal to ``horizontal_tol``.
    """
    notes = []
    st = surface_transport(SpecialConnection(A, B), Q, Ns, Nt)
    gap = float(np.linalg.norm(st.value - np.eye(A.N)))
    if gap > horizontal_tol:
        msg = f"square is not (A,B)-horizontal: |k(1) - I| = {gap:.3e}"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    x00 = Q.point(0.0, 0.0)
    val = A(x00, X(np.array(0.0), np.array(0.0)))
    # B term along the initial path Q(0, .)
    t = nodes(Nt)
    first = Q.path_at(0.0)
    h = frame_factor(A, first, Nt)
    z = np.zeros_like(t)
    tw = adjoint_inv_act(h, B(Q.point(z, t), X(z, t), Q.dt(z, t)))
    val = val + (tw[1:-1].sum(0) + 0.5 * (tw[0] + tw[-1])) / Nt
    # C term over the square, frames h_s(t) h0(s) k(s)
    s = nodes(Ns)
    hs = np.stack([frame_factor(A, Q.path_at(si), Nt) for si in s])       # (Ns+1, Nt+1)
    full = hs @ st.K[:, None]
    S, T = np.meshgrid(s, t, indexing="ij")
    tw = adjoint_inv_act(full, C(Q.point(S, T), X(S, T), Q.ds(S, T), Q.dt(S, T)))
    wt = np.ones(Nt + 1)
    wt[[0, -1]] = 0.5
    ws = np.ones(Ns + 1)
    ws[[0, -1]] = 0.5
    val = val + np.einsum("s,t,stij->ij", ws / Ns, wt / Nt, tw)
    return val, notes
