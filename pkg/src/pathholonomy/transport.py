"""Ordered exponentials and ordinary parallel transport.

Convention: the frame factor ``h(gamma, t)`` solves

    dh/dt h^{-1} = -A(gamma'(t)),   h(0) = I,

so that the horizontal lift through ``(gamma(0), e)`` is ``(gamma(t), h(t))``
in the trivialization, the holonomy of a loop is ``h(gamma, 1)`` and
concatenation composes as ``h(g1 * g2) = h(g2) h(g1)``.

The single scheme is the midpoint exponential ``k <- exp(-dt M(t_mid)) k``
(second-order Magnus), with an optional Richardson error estimate from a
half-resolution run.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liealg import REPROJECT_EVERY, _expm_raw, adjoint_inv_act, dagger, project_unitary


class TransportError(ValueError):
    pass


@dataclass
class TransportResult:
    value: np.ndarray
    steps: int
    order: int = 2
    error_estimate: float = float("nan")
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {"steps": self.steps, "order": self.order,
                "error_estimate": self.error_estimate, **self.meta}


def midpoints(N: int, a: float = 0.0, b: float = 1.0):
    return a + (np.arange(N) + 0.5) * (b - a) / N


def nodes(N: int, a: float = 0.0, b: float = 1.0):
    return np.linspace(a, b, N + 1)


def cumulative_product(factors, reproject_every: int = REPROJECT_EVERY):
    """Node values ``k_0 = I, k_{i+1} = f_i k_i`` for stacked step factors ``(N, ..., n, n)``."""
    factors = np.asarray(factors)
    N = factors.shape[0]
    out = np.empty((N + 1,) + factors.shape[1:], dtype=complex)
    out[0] = np.eye(factors.shape[-1])
    k = out[0]
    for i in range(N):
        k = factors[i] @ k
        if (i + 1) % reproject_every == 0:
            k = project_unitary(k)
        out[i + 1] = k
    return out


def ordered_exp(M, N: int, a: float = 0.0, b: float = 1.0,
                richardson: bool = False, return_nodes: bool = False):
    """Solve ``dk/dt k^{-1} = -M(t)``, ``k(a) = I`` by midpoint exponentials.

    ``M`` maps an array of times ``(N,)`` to algebra elements ``(N, ..., n, n)``.
    """
    if N < 1:
        raise TransportError("ordered_exp needs at least one step")
    dt = (b - a) / N
    Mm = np.asarray(M(midpoints(N, a, b)))
    ks = cumulative_product(_expm_raw(-dt * Mm))
    res = TransportResult(ks[-1], N)
    if richardson and N % 2 == 0:
        coarse = ordered_exp(M, N // 2, a, b).value
        res.error_estimate = float(np.max(np.abs(coarse - ks[-1]))) / 3.0
    if return_nodes:
        return res, ks
    return res


# ----------------------------------------------------------------- frames

def _check_domain(domain, pts, what):
    if domain is not None and not domain.contains(pts):
        raise TransportError(f"{what} leaves the chart domain")


def frames_from_samples(A, points_mid, velocities_mid, dt):
    """Frame factors at nodes for stacked midpoint samples ``(N, ..., d)``."""
    Am = A(points_mid, velocities_mid)
    return cumulative_product(_expm_raw(-dt * Am))


def _segment_frames(A, seg, N, domain=None):
    tm = midpoints(N)
    pts = seg.point(tm)
    _check_domain(domain, pts, "path")
    return frames_from_samples(A, pts, seg.velocity(tm), 1.0 / N)


def frame_factor(A, gamma, N: int, domain=None):
    """``h(gamma, t)`` at the nodes; piecewise paths use N steps per segment.

    Returns an array ``(n_nodes, n, n)`` with ``h[0] = I``.
    """
    segs = gamma.segments
    out = [np.eye(A.N, dtype=complex)[None]]
    current = out[0][0]
    for seg in segs:
        h = _segment_frames(A, seg, N, domain)
        out.append(h[1:] @ current)
        current = out[-1][-1]
    return np.concatenate(out, axis=0)


def transport_A(A, gamma, N: int, richardson: bool = False, domain=None) -> TransportResult:
    """Parallel transport ``h(gamma, 1)`` along an open or closed path."""
    h = frame_factor(A, gamma, N, domain)[-1]
    res = TransportResult(h, N * len(gamma.segments), meta={"segments": len(gamma.segments)})
    if richardson and N % 2 == 0:
        coarse = frame_factor(A, gamma, N // 2, domain)[-1]
        res.error_estimate = float(np.max(np.abs(coarse - h))) / 3.0
    return res


def holonomy_A(A, gamma, N: int, richardson: bool = False, domain=None) -> TransportResult:
    """``Hol_A(gamma, sigma(gamma(0))) = h(gamma, 1)`` for a closed path."""
    if not gamma.loop:
        raise TransportError("holonomy needs a closed path")
    return transport_A(A, gamma, N, richardson, domain)


# ----------------------------------------------------------------- horizontality

def horizontality_residual(A, tangent, eps: float = 1e-5) -> float:
    """Max-norm gap between a propagated vertical part and a direct reference.

    The reference differentiates frames along the displaced paths
    ``gamma + e X`` by central differences:
    ``xi_ref(t) = Ad_{h^{-1}} A(X) + h^{-1} dh/de + xi_0 - A(X(0))``.
    """
    from .geom import Path

    gamma, X, N = tangent.path, tangent.field, tangent.N

    def shifted(e):
        return Path(lambda t: gamma.point(t) + e * X.point(t),
                    lambda t: gamma.velocity(t) + e * X.velocity(t), gamma.dim, loop=False)

    hp = frame_factor(A, shifted(eps), N)
    hm = frame_factor(A, shifted(-eps), N)
    h = tangent.frames
    dh = (hp - hm) / (2 * eps)
    t = nodes(N)
    x, v = gamma.point(t), X.point(t)
    ref = adjoint_inv_act(h, A(x, v)) + dagger(h) @ dh
    ref = ref + tangent.xi[0] - A(x[0], v[0])
    return float(np.max(np.abs(ref - tangent.xi)))
