"""Holonomy observables of loops of paths and the four-dimensional actions.

Traces are taken in the defining representation throughout.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fields import (AdjointForm, act_gauge, act_second, cov_ext_derivative, curvature_F,
                     hodge_star, identity_gauge, zero_form)
from .geom import Square
from .liealg import _expm_raw, dagger, project_antihermitian
from .pathspace import SpecialConnection, H_map, hol_AB
from .transport import TransportError

O_TILDE_STEP = 1e-4


@dataclass(frozen=True)
class ObservableSpec:
    kind: str = "O_alphabeta"          # O_alphabeta | O_tilde | O_hol_ratio
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("O_alphabeta", "O_tilde", "O_hol_ratio"):
            raise ValueError(f"unknown observable {self.kind!r}")
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValueError("observable coefficients must be finite")


def curvature_combo(A: AdjointForm, alpha: float, beta: float) -> AdjointForm:
    """``alpha F_A + beta *F_A``; the dual needs a four-dimensional chart."""
    if beta != 0 and A.dim != 4:
        raise ValueError("beta != 0 needs a four-dimensional chart")
    F = curvature_F(A)
    out = F.scaled(alpha) if alpha != 0 else zero_form(2, A.dim, A.N)
    if beta != 0:
        out = out + hodge_star(F).scaled(beta)
    return out


def O_alphabeta(A: AdjointForm, alpha: float, beta: float, G: Square, base_point=None,
                Ns: int = 64, Nt: int = 64, workers: int = 1) -> complex:
    """``Tr H`` of ``Gamma`` for the special connection ``(A, alpha F + beta *F)``."""
    conn = SpecialConnection(A, curvature_combo(A, alpha, beta))
    return complex(np.trace(H_map(conn, G, Ns, Nt, base_point, workers=workers).value))


def O_tilde(A: AdjointForm, B: AdjointForm, G: Square, base_point=None, Ns: int = 64,
            Nt: int = 64, step: float = O_TILDE_STEP) -> complex:
    """``Tr exp(D)`` with ``D = Hol_A^{-1} d/dt Hol_(A, tB)`` at ``t = 0``.

    ``Hol_(A, 0)`` is the A-holonomy of the loop of initial points, so ``D`` is
    algebra-valued; it is obtained by a centred difference with ``step``.
    """
    if not G.loop_s:
        raise TransportError("O_tilde needs a square closed in s")

    def hol(t):
        return hol_AB(SpecialConnection(A, B.scaled(t)), G, Ns, Nt, base_point).value

    h0 = hol(0.0)
    D = dagger(h0) @ (hol(step) - hol(-step)) / (2 * step)
    return complex(np.trace(_expm_raw(project_antihermitian(D))))


def O_hol_ratio(A: AdjointForm, B: AdjointForm, G: Square, base_point=None,
                Ns: int = 64, Nt: int = 64) -> complex:
    """``Tr(Hol_(A,-F)^{-1} Hol_(A,B))``; equals ``N`` on the solutions ``B = -F_A``."""
    a = hol_AB(SpecialConnection.tautological(A), G, Ns, Nt, base_point).value
    b = hol_AB(SpecialConnection(A, B), G, Ns, Nt, base_point).value
    return complex(np.trace(dagger(a) @ b))


def evaluate(spec: ObservableSpec, A, B, G, base_point=None, Ns=64, Nt=64) -> complex:
    if spec.kind == "O_alphabeta":
        return O_alphabeta(A, spec.alpha, spec.beta, G, base_point, Ns, Nt)
    if spec.kind == "O_tilde":
        return O_tilde(A, B, G, base_point, Ns, Nt)
    return O_hol_ratio(A, B, G, base_point, Ns, Nt)


# ----------------------------------------------------------------- actions

_PAIRS = [((0, 1), (2, 3), 1), ((0, 2), (1, 3), -1), ((0, 3), (1, 2), 1),
          ((1, 2), (0, 3), 1), ((1, 3), (0, 2), -1), ((2, 3), (0, 1), 1)]


def wedge_trace(a, b):
    """``Tr(a ^ b)(e_1, ..., e_4)`` for 2-form component arrays ``(..., 4, 4, N, N)``."""
    out = 0
    for (i, j), (k, l), sgn in _PAIRS:
        out = out + sgn * np.einsum("...ab,...ba->...", a[..., i, j, :, :], b[..., k, l, :, :])
    return out


ACTIONS = ("S_YM", "S_YM_first_order", "S_tYM", "S_BF_BB", "S_BF")


def action_densities(A, B, x, eta=None):
    """The five integrands at points ``x (..., 4)``."""
    F = curvature_F(A)
    Bp = B if eta is None else B - cov_ext_derivative(A, eta)
    f = F.components(x)
    b = Bp.components(x)
    sf = hodge_star(F).components(x)
    sb = hodge_star(Bp).components(x)
    bf = wedge_trace(b, f)
    return {
        "S_YM": -wedge_trace(f, sf),
        "S_YM_first_order": -0.25 * wedge_trace(b, sb) + 1j * bf,
        "S_tYM": wedge_trace(f, f),
        "S_BF_BB": bf + 0.5 * wedge_trace(b, b),
        "S_BF": bf,
    }


def action_values(A: AdjointForm, B: AdjointForm, eta: AdjointForm | None = None,
                  region=((-3.5, 3.5),) * 4, n: int = 24, workers: int = 1) -> dict:
    """Tensor-product midpoint quadrature of the five actions over a box.

    ``eta`` replaces ``B`` by ``B - d_A eta`` (the first-order theory with the
    extra one-form).  Slices along the first axis are summed in a fixed order,
    so the result does not depend on ``workers``.
    """
    if A.dim != 4:
        raise ValueError("actions are defined on four-dimensional charts")
    region = np.asarray(region, float)
    h = (region[:, 1] - region[:, 0]) / n
    axes = [region[k, 0] + (np.arange(n) + 0.5) * h[k] for k in range(4)]
    X2, X3, X4 = np.meshgrid(axes[1], axes[2], axes[3], indexing="ij")
    rest = np.stack([X2, X3, X4], -1)

    def slab(x1):
        pts = np.concatenate([np.full(rest.shape[:-1] + (1,), x1), rest], -1)
        return {k: complex(np.sum(v)) for k, v in action_densities(A, B, pts, eta).items()}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(slab, axes[0]))
    else:
        parts = [slab(x1) for x1 in axes[0]]
    vol = float(np.prod(h))
    return {k: sum(p[k] for p in parts) * vol for k in ACTIONS}


# ----------------------------------------------------------------- invariance

def gauge_invariance_report(A, B, G: Square, transformations, Ns: int = 64, Nt: int = 64,
                            tol: float = 1e-7) -> list:
    """``Tr Hol_(A,B)`` of a loop of paths before and after each transformation.

    ``transformations`` is a list of ``(label, kind, g, eta, expect_invariant)``
    with ``kind`` in ``{"gauge", "second"}``.  Rows where invariance is not
    expected are reported as controls; ``ok`` means the outcome matches the
    expectation.
    """
    before = complex(np.trace(hol_AB(SpecialConnection(A, B), G, Ns, Nt).value))
    rows = []
    for label, kind, g, eta, expect in transformations:
        if kind == "gauge":
            A2, B2 = act_gauge(A, B, g)
        elif kind == "second":
            A2, B2 = act_second(A, B, g or identity_gauge(A.dim, A.N), eta)
        else:
            raise ValueError(f"unknown transformation {kind!r}")
        after = complex(np.trace(hol_AB(SpecialConnection(A2, B2), G, Ns, Nt).value))
        gap = abs(after - before)
        rows.append({"label": label, "kind": kind, "before": before, "after": after,
                     "discrepancy": gap, "expected_invariant": expect,
                     "ok": (gap <= tol) if expect else (gap > tol)})
    return rows
