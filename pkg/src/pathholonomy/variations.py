"""First variations of holonomies, each paired with a finite-difference oracle.

Every check returns a :class:`VariationReport`.  The oracle is a centred
difference at two steps ``kappa`` and ``kappa / 2`` combined by Richardson
extrapolation; the spread between the extrapolated and the finer estimate is
kept as the differentiation error.  Optionally both sides are also
extrapolated in the grid (``N`` and ``N / 2``), which removes the leading
quadrature error.

Automorphism fields are pairs ``Z = (v, xi)`` of a base vector field and a
vertical generator.  With ``phi = A(v) + xi`` the Lie derivatives are

    L_Z A = d_A phi + i_v F_A,
    L_Z B = d_A (i_v B) + i_v d_A B + [B, phi],

i.e. the pull-back along the flow of ``v`` followed by the gauge action of
``xi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .chen import chen_bracket, chen_line, curvature_terms
from .fields import (AdjointForm, contract, cov_ext_derivative, curvature_F, interior,
                     wedge_bracket, zero_form)
from .geom import IsotopyFamily, Square
from .liealg import adjoint_inv_act, bracket, dagger
from .pathspace import SpecialConnection, hol_AB, surface_transport
from .transport import frame_factor, nodes

KAPPAS = (1e-3, 5e-4)


class PreconditionError(ValueError):
    """An input violates the stated hypothesis of a variation formula."""


@dataclass
class VariationReport:
    analytic: object
    fd: object
    kappa: tuple
    discrepancy: float
    fd_error: float = float("nan")
    grid_error: float = float("nan")
    expected_order: int = 2
    meta: dict = field(default_factory=dict)

    def passed(self, tol: float) -> bool:
        return bool(self.discrepancy <= tol)

    def to_dict(self):
        def enc(v):
            v = np.asarray(v)
            if v.ndim == 0:
                return {"re": float(np.real(v)), "im": float(np.imag(v))}
            return {"re": np.real(v).tolist(), "im": np.imag(v).tolist()}

        return {"analytic": enc(self.analytic), "fd": enc(self.fd), "kappa": list(self.kappa),
                "discrepancy": self.discrepancy, "fd_error": self.fd_error,
                "grid_error": self.grid_error, "expected_order": self.expected_order,
                **{k: v for k, v in self.meta.items() if isinstance(v, (int, float, str, bool))}}


# ----------------------------------------------------------------- helpers

def richardson_fd(f: Callable, kappas=KAPPAS):
    """Centred difference of ``f`` at 0 with two-step Richardson extrapolation.

    Returns ``(estimate, spread)``; ``kappas[1]`` must be ``kappas[0] / 2``.
    """
    k1, k2 = kappas
    if not np.isclose(k2, k1 / 2):
        raise ValueError("Richardson pair needs kappa_2 = kappa_1 / 2")
    d1 = (f(k1) - f(-k1)) / (2 * k1)
    d2 = (f(k2) - f(-k2)) / (2 * k2)
    est = (4 * d2 - d1) / 3
    return est, float(np.linalg.norm(np.atleast_1d(est - d2)))


def _grid_extrapolate(fine, coarse):
    return (4 * fine - coarse) / 3, float(np.linalg.norm(np.atleast_1d(fine - coarse))) / 3


def _gap(a, b):
    return float(np.linalg.norm(np.atleast_1d(np.asarray(a) - np.asarray(b))))


def _trapz(vals, N):
    return (vals[1:-1].sum(0) + 0.5 * (vals[0] + vals[-1])) / N


def _both_grids(compute, N, grid_richardson):
    """Run ``compute(N)`` (and ``compute(N // 2)``) returning value pairs."""
    fine = compute(N)
    if not grid_richardson:
        return fine, float("nan")
    coarse = compute(N // 2)
    out, err = [], 0.0
    for a, b in zip(fine, coarse):
        v, e = _grid_extrapolate(a, b)
        out.append(v)
        err = max(err, e)
    return tuple(out), err


# ----------------------------------------------------------------- Z = (v, xi)

@dataclass
class AutVectorField:
    """Infinitesimal automorphism in the trivialization.

    ``v(x) -> (..., d)`` with derivative ``dv(x) -> (..., d, d)`` (derivative
    axis first) and an optional vertical generator ``xi`` given as a 0-form.
    """

    dim: int
    v: Callable
    dv: Callable
    xi: AdjointForm | None = None
    name: str = "Z"

    def phi(self, A: AdjointForm) -> AdjointForm:
        """The 0-form ``A(v) + xi`` with its analytic derivative."""
        v, dv, xi = self.v, self.dv, self.xi

        def comp(x):
            out = contract(A.components(x), [v(x)])
            return out if xi is None else out + xi.components(x)

        def deriv(x):
            DA = A.derivative(x)                           # (..., k, i, N, N)
            out = np.einsum("...kiab,...i->...kab", DA, np.asarray(v(x), float))
            out = out + np.einsum("...iab,...ki->...kab", A.components(x), np.asarray(dv(x), float))
            return out if xi is None else out + xi.derivative(x)

        return AdjointForm(0, A.dim, A.N, comp, deriv, name=f"phi[{self.name}]")

    def lie_A(self, A: AdjointForm) -> AdjointForm:
        return cov_ext_derivative(A, self.phi(A)) + interior(self.v, curvature_F(A))

    def lie_B(self, A: AdjointForm, B: AdjointForm) -> AdjointForm:
        iB = interior(self.v, B, self.dv)
        return (cov_ext_derivative(A, iB) + interior(self.v, cov_ext_derivative(A, B))
                + wedge_bracket(B, self.phi(A)))

    def along(self, G: Square, s):
        """Base values ``v(Gamma(s, .))`` as a function of t."""
        return lambda t: self.v(G.point(np.full_like(np.asarray(t, float), s), t))


def linear_field(M, c=None, xi: AdjointForm | None = None, name="linear") -> AutVectorField:
    """``v(x) = M x + c``."""
    M = np.asarray(M, float)
    d = M.shape[0]
    c = np.zeros(d) if c is None else np.asarray(c, float)
    return AutVectorField(d, lambda x: np.asarray(x) @ M.T + c,
                          lambda x: np.broadcast_to(M.T, np.shape(x)[:-1] + (d, d)),
                          xi, name)


def rotation_field(d: int, axes=(0, 1), omega: float = 1.0, center=None,
                   xi: AdjointForm | None = None) -> AutVectorField:
    """Infinitesimal rotation in the plane ``axes`` about ``center``."""
    i, j = axes
    M = np.zeros((d, d))
    M[i, j], M[j, i] = -omega, omega
    c = np.zeros(d) if center is None else np.asarray(center, float)
    return linear_field(M, -M @ c, xi, name=f"rot{axes}")


def random_aut_field(spec, d: int, seed: int, amplitude: float = 0.5,
                     vertical: bool = True) -> AutVectorField:
    from .catalog import random_fourier_form

    rng = np.random.default_rng(seed)
    M = amplitude * rng.uniform(-1, 1, (d, d))
    c = amplitude * rng.uniform(-1, 1, d)
    xi = random_fourier_form(spec, d, 0, seed + 7919, amplitude=amplitude) if vertical else None
    return linear_field(M, c, xi, name=f"Z[{seed}]")


# ----------------------------------------------------------------- connection variations

def _frames_and_twist(A, w, gamma, N, tangents=()):
    h = frame_factor(A, gamma, N)
    t = np.linspace(0, 1, h.shape[0])
    if len(gamma.segments) > 1:
        raise ValueError("variation formulas take smooth paths")
    vals = w(gamma.point(t), *[T(t) for T in tangents], gamma.velocity(t))
    return h, adjoint_inv_act(h, vals)


def dHol_connection(A: AdjointForm, gamma, eta: AdjointForm, N: int = 256, kappas=KAPPAS,
                    grid_richardson: bool = True, cumulative: bool = False) -> VariationReport:
    """``h^{-1} dh`` in direction ``eta`` against the centred difference of transports.

    For a loop this is ``Hol^{-1} delta Hol = -int Ad_{h^{-1}} eta(gamma')``.
    With ``cumulative`` the whole open-path curve ``H(t)`` is compared at the
    nodes instead of its end value.
    """
    def compute(n):
        h, tw = _frames_and_twist(A, eta, gamma, n)
        acc = np.zeros_like(tw)
        acc[1:] = np.cumsum(0.5 * (tw[1:] + tw[:-1]), axis=0) / n
        analytic = -acc
        hinv = dagger(h)
        fd, spread = richardson_fd(lambda k: hinv @ frame_factor(A + eta.scaled(k), gamma, n), kappas)
        if not cumulative:
            analytic, fd = analytic[-1], fd[-1]
        else:
            analytic, fd = analytic[::n // 8 or 1], fd[::n // 8 or 1]
        return analytic, fd, np.array(spread)

    (an, fd, spread), gerr = _both_grids(compute, N, grid_richardson)
    return VariationReport(an, fd, tuple(kappas), _gap(an, fd), float(spread), gerr,
                           meta={"N": N, "operation": "dHol_connection"})


def dTrHol_aut(A: AdjointForm, gamma, Z: AutVectorField, N: int = 256, kappas=KAPPAS,
               grid_richardson: bool = True) -> VariationReport:
    """``delta Tr Hol = -Tr(Hol int Ad_{h^{-1}} F(v, gamma'))`` against ``Tr Hol(A + k L_Z A)``."""
    F = curvature_F(A)
    LA = Z.lie_A(A)

    def compute(n):
        h, tw = _frames_and_twist(A, F, gamma, n, (lambda t: Z.v(gamma.point(t)),))
        hol = h[-1]
        analytic = -np.trace(hol @ _trapz(tw, n))
        fd, spread = richardson_fd(lambda k: np.trace(frame_factor(A + LA.scaled(k), gamma, n)[-1]),
                                   kappas)
        return analytic, fd, np.array(spread)

    (an, fd, spread), gerr = _both_grids(compute, N, grid_richardson)
    return VariationReport(an, fd, tuple(kappas), _gap(an, fd), float(spread), gerr,
                           meta={"N": N, "operation": "dTrHol_aut"})


# ----------------------------------------------------------------- loops of paths

def _slice_values(G: Square, Ns, Nt, per_slice):
    s = nodes(Ns)
    return np.stack([per_slice(si, G.path_at(si)) for si in s])


def _loop_trace_variation(conn: SpecialConnection, G: Square, Ns, Nt, per_slice):
    """``-Tr(Hol int ds Ad_{K(s)^{-1}} C(s))`` for slice values ``C`` in the frame at ``Gamma(s,0)``."""
    st = surface_transport(conn, G, Ns, Nt)
    C = _slice_values(G, Ns, Nt, per_slice)
    hol = st.K[-1]
    return -np.trace(hol @ _trapz(adjoint_inv_act(st.K, C), Ns)), hol


CYLINDER_TERMS = ("F0", "B1", "B0", "dAB", "chen")
FOUR_TERMS = ("F0", "dAB", "chen")


def cylinder_variation(A: AdjointForm, B: AdjointForm, G: Square, Z: AutVectorField,
                       Ns: int = 64, Nt: int = 64, kappas=KAPPAS, terms=CYLINDER_TERMS,
                       grid_richardson: bool = False) -> VariationReport:
    """Variation of ``Tr Hol_(A,B)`` of a loop of paths under the flow of ``Z``.

    The analytic side integrates the path-space curvature on
    ``(v o Gamma(s, .), Gamma'(s, .))`` around the loop; ``terms`` selects which
    curvature contributions enter (``FOUR_TERMS`` drops the two boundary ``B``
    values, and leaving out ``"dAB"`` gives the sensitivity control).
    """
    if not G.loop_s:
        raise PreconditionError("cylinder variation needs a square closed in s")
    bad = set(terms) - set(CYLINDER_TERMS)
    if bad:
        raise ValueError(f"unknown curvature terms {sorted(bad)}")
    LA, LB = Z.lie_A(A), Z.lie_B(A, B)
    conn = SpecialConnection(A, B)

    def per_slice_factory(nt):
        def per_slice(s, path):
            X = Z.along(G, s)
            Y = lambda t: G.ds(np.full_like(np.asarray(t, float), s), t)
            parts = curvature_terms(A, B, path, X, Y, nt)
            return sum(parts[k] for k in terms)
        return per_slice

    def compute(scale):
        ns, nt = Ns // scale, Nt // scale
        an, _ = _loop_trace_variation(conn, G, ns, nt, per_slice_factory(nt))
        fd, spread = richardson_fd(
            lambda k: np.trace(hol_AB(SpecialConnection(A + LA.scaled(k), B + LB.scaled(k)),
                                      G, ns, nt).value), kappas)
        return an, fd, np.array(spread)

    fine = compute(1)
    gerr = float("nan")
    if grid_richardson:
        coarse = compute(2)
        an, e1 = _grid_extrapolate(fine[0], coarse[0])
        fd, e2 = _grid_extrapolate(fine[1], coarse[1])
        gerr = max(e1, e2)
    else:
        an, fd = fine[0], fine[1]
    return VariationReport(an, fd, tuple(kappas), _gap(an, fd), float(fine[2]), gerr,
                           meta={"Ns": Ns, "Nt": Nt, "terms": ",".join(terms),
                                 "operation": "cylinder_variation"})


# ----------------------------------------------------------------- symmetry variations

def symmetry_direction(kind: str, A: AdjointForm, B: AdjointForm, eta: AdjointForm,
                       sign: float = 1.0):
    """Tangent ``(eta, beta)`` and the one-parameter curve ``k -> (A_k, B_k)``.

    ``first``: ``(A + k eta, B - k d_A eta - k^2/2 [eta ^ eta])``, tangent ``(eta, -d_A eta)``.
    ``second``: ``(A, B - sign k d_A eta)``, tangent ``(0, -sign d_A eta)``.
    """
    dAeta = cov_ext_derivative(A, eta)
    if kind == "first":
        ee = wedge_bracket(eta, eta)

        def curve(k):
            return A + eta.scaled(k), B - dAeta.scaled(k) - ee.scaled(0.5 * k * k)
        return (eta, -dAeta), curve
    if kind == "second":
        def curve(k):
            return A, B - dAeta.scaled(sign * k)
        return (zero_form(1, A.dim, A.N), dAeta.scaled(-sign)), curve
    raise ValueError(f"unknown symmetry action {kind!r}")


def _symmetry_slice(A, B, eta, beta, G, Nt):
    def per_slice(s, path):
        Y = lambda t: G.ds(np.full_like(np.asarray(t, float), s), t)
        x0 = G.point(s, 0.0)
        val = eta(x0, G.ds(s, 0.0)) + chen_line(beta, path, (Y,), Nt, A=A)
        return val + chen_bracket(eta, B, path, (Y,), Nt, A=A)
    return per_slice


def symmetry_variation(A: AdjointForm, B: AdjointForm, G: Square, eta: AdjointForm,
                       beta: AdjointForm, Ns: int = 64, Nt: int = 64, kappas=KAPPAS,
                       curve: Callable | None = None) -> VariationReport:
    """``delta Tr Hol_(A,B)`` in the direction ``(eta, beta)``.

    Analytic: ``-Tr(Hol int ds Ad_{K^{-1}} [eta(Gamma'(s,0)) + int Ad_{h^{-1}} beta
    + int dt [int_0^t Ad_{h^{-1}} eta(Gamma_t), Ad_{h^{-1}} B(Gamma', Gamma_t)]])``.
    The oracle differentiates along ``curve`` (default: the straight line).
    """
    if not G.loop_s:
        raise PreconditionError("symmetry variation needs a square closed in s")
    an, _ = _loop_trace_variation(SpecialConnection(A, B), G, Ns, Nt,
                                  _symmetry_slice(A, B, eta, beta, G, Nt))
    if curve is None:
        curve = lambda k: (A + eta.scaled(k), B + beta.scaled(k))

    def tr(k):
        Ak, Bk = curve(k)
        return np.trace(hol_AB(SpecialConnection(Ak, Bk), G, Ns, Nt).value)

    fd, spread = richardson_fd(tr, kappas)
    return VariationReport(an, fd, tuple(kappas), _gap(an, fd), spread,
                           meta={"Ns": Ns, "Nt": Nt, "operation": "symmetry_variation"})


def _end_eta(A, eta, G, s, path, Nt):
    h1 = frame_factor(A, path, Nt)[-1]
    return adjoint_inv_act(h1, eta(G.point(s, 1.0), G.ds(s, 1.0)))


def first_action_formula(A, B, G: Square, eta, Ns=64, Nt=64):
    """Closed form for the first action: ``-Tr(Hol int (ev_1^* eta + {B + F; eta}))``.

    ``{w1; w2}`` is :func:`chen_bracket` (``w1`` at the earlier time).  The
    quadratic ``[eta, eta]`` term is of second order in ``eta`` and left out.
    """
    F = curvature_F(A)

    def per_slice(s, path):
        Y = lambda t: G.ds(np.full_like(np.asarray(t, float), s), t)
        return _end_eta(A, eta, G, s, path, Nt) + chen_bracket(B + F, eta, path, (Y,), Nt, A=A)

    return _loop_trace_variation(SpecialConnection(A, B), G, Ns, Nt, per_slice)[0]


def second_action_formula(A, B, G: Square, eta, Ns=64, Nt=64):
    """Closed form for the second action, written with a leading plus sign.

    ``Tr(Hol int ({F; eta} + [int B, int eta] + ev_1^* eta - ev_0^* eta))``.
    Which sign of ``d_A eta`` it describes is settled numerically by
    :func:`second_action_sign_test`.
    """
    F = curvature_F(A)

    def per_slice(s, path):
        Y = lambda t: G.ds(np.full_like(np.asarray(t, float), s), t)
        ib = chen_line(B, path, (Y,), Nt, A=A)
        ie = chen_line(eta, path, (), Nt, A=A)
        val = chen_bracket(F, eta, path, (Y,), Nt, A=A) + bracket(ib, ie)
        return val + _end_eta(A, eta, G, s, path, Nt) - eta(G.point(s, 0.0), G.ds(s, 0.0))

    return -_loop_trace_variation(SpecialConnection(A, B), G, Ns, Nt, per_slice)[0]


def second_action_sign_test(A, B, G: Square, eta, Ns=64, Nt=64, kappas=KAPPAS) -> dict:
    """Compare the closed form with the oracle along ``(0, +d_A eta)`` and ``(0, -d_A eta)``."""
    formula = second_action_formula(A, B, G, eta, Ns, Nt)
    out = {"formula": formula}
    for label, sgn in (("plus", -1.0), ("minus", 1.0)):
        (e, beta), curve = symmetry_direction("second", A, B, eta, sign=sgn)
        rep = symmetry_variation(A, B, G, e, beta, Ns, Nt, kappas, curve)
        out[label] = {"fd": rep.fd, "analytic": rep.analytic, "gap_formula": _gap(formula, rep.fd),
                      "gap_general": rep.discrepancy}
    out["matches"] = min(("plus", "minus"), key=lambda k: out[k]["gap_formula"])
    return out


# ----------------------------------------------------------------- surface law

def _require_flat(A, G: Square, tol):
    u = np.linspace(0, 1, 7)
    S, T = np.meshgrid(u, u, indexing="ij")
    Fmax = float(np.max(np.abs(curvature_F(A).components(G.point(S, T)))))
    if Fmax > tol:
        raise PreconditionError(f"surface law needs a flat connection, |F_A| = {Fmax:.2e}")
    return Fmax


def surface_law_value(A, eta, B, G: Square, kappa, lam, Ns=64, Nt=64):
    """``H`` of ``Gamma`` for ``(A, kappa eta, -F_{A + kappa eta} + lam B)``, frames from ``A``."""
    Ak = A + eta.scaled(kappa)
    Bk = -curvature_F(Ak) + B.scaled(lam)
    return surface_transport(SpecialConnection(A, Bk, eta.scaled(kappa)), G, Ns, Nt).value


def surface_law_check(A: AdjointForm, eta: AdjointForm, B: AdjointForm, family: IsotopyFamily,
                      mode: str = "two-parameter", Ns: int = 64, Nt: int = 64,
                      steps=(2e-2, 1e-2), r_step: float = 1e-3, flat_tol: float = 1e-8,
                      grid_richardson: bool = True) -> dict:
    """Mixed partial of ``H`` in the perturbation parameter and the isotopy parameter.

    ``two-parameter``: d^2 H / d lam d r at ``kappa = lam = 0``.
    ``one-parameter``: ``lam = kappa``, d^2 H / d kappa d r at 0.
    The perturbation stencil is run at each size in ``steps``; the reported
    estimate is the finest one and ``order`` the observed decay between them.
    """
    _require_flat(A, family.base, flat_tol)
    if mode not in ("two-parameter", "one-parameter"):
        raise ValueError(f"unknown mode {mode!r}")

    def H(p, r, ns, nt):
        kappa, lam = (0.0, p) if mode == "two-parameter" else (p, p)
        return surface_law_value(A, eta, B, family(r), kappa, lam, ns, nt)

    def mixed(hp, ns, nt):
        vals = {(a, b): H(a * hp, b * r_step, ns, nt) for a in (1, -1) for b in (1, -1)}
        return (vals[1, 1] - vals[1, -1] - vals[-1, 1] + vals[-1, -1]) / (4 * hp * r_step)

    def at_grid(ns, nt):
        return [mixed(hp, ns, nt) for hp in steps]

    fine = at_grid(Ns, Nt)
    gerr = float("nan")
    if grid_richardson:
        coarse = at_grid(Ns // 2, Nt // 2)
        ext = [(4 * f - c) / 3 for f, c in zip(fine, coarse)]
        gerr = max(_gap(f, c) / 3 for f, c in zip(fine, coarse))
    else:
        ext = fine
    norms = [float(np.linalg.norm(e)) for e in ext]
    order = float(np.log2(norms[0] / norms[1])) if norms[1] > 0 and len(norms) > 1 else float("nan")
    return {"mode": mode, "family": family.kind, "conditions": sorted(family.conditions),
            "mixed_partial": ext[-1], "norm": norms[-1], "norms": norms, "steps": list(steps),
            "order": order, "grid_error": gerr, "Ns": Ns, "Nt": Nt}
