"""Acceptance suite: one check per criterion, each printed as a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""
import json
import os
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.special import erf

from pathholonomy.catalog import (exact_cartan_connection, gaussian_flux, random_fourier_form,
                                  random_gauge_map, u1_vortex)
from pathholonomy.chen import curvature_FAB, small_square_oracle, vector_field
from pathholonomy.fields import act_second, curvature_F, identity_gauge, pure_gauge, zero_form
from pathholonomy.geom import (Path, circle_path, cylinder_square, lissajous_loop, make_isotopy,
                               planar_square, reparam_square, torus_square, tube_square,
                               warped_square, wobble_reparam)
from pathholonomy.liealg import adjoint_inv_act, dagger, make_group, unitarity_defect
from pathholonomy.pathspace import SpecialConnection, H_map, hol_AB, surface_transport, tautological_check
from pathholonomy.transport import frame_factor, holonomy_A, ordered_exp
from pathholonomy.variations import (cylinder_variation, dHol_connection, dTrHol_aut,
                                     random_aut_field, rotation_field, surface_law_check,
                                     symmetry_variation)

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SU2 = make_group("su2")
SU3 = make_group("su3")
U1 = make_group("u1")
LINES = []


def record(number, title, passed, detail, elapsed, limit=None):
    within = limit is None or elapsed < limit
    ok = bool(passed and within)
    budget = "" if limit is None else f" / {limit:.0f} s"
    line = (f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail} "
            f"[{elapsed:.1f} s{budget}]")
    LINES.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is None:
        return
    tr.write_line("")
    tr.write_line("acceptance summary")
    for line in LINES:
        tr.write_line(line)


def _timer():
    t0 = time.perf_counter()
    return lambda: time.perf_counter() - t0


# ---------------------------------------------------------------- 1

def test_criterion_01_trivial_connection_identity():
    elapsed = _timer()
    squares = [warped_square(3, s) for s in range(5)] + [tube_square(3, s) for s in range(5)]
    worst = 0.0
    for i, G in enumerate(squares):
        A = random_fourier_form(SU2 if i % 2 else SU3, 3, 1, seed=10 + i, amplitude=1.0)
        H = H_map(SpecialConnection.trivial(A), G, 128, 128).value
        worst = max(worst, float(np.linalg.norm(H - np.eye(A.N))))
    ok = record(1, "trivial special connection", worst <= 1e-8,
                f"max |H - I| = {worst:.2e} (tol 1e-8, 10 cases)", elapsed(), 10)
    assert ok


# ---------------------------------------------------------------- 2

def test_criterion_02_nonabelian_stokes():
    elapsed = _timer()
    A = random_fourier_form(SU2, 3, 1, seed=1)
    G = warped_square(3, 2)
    res = [tautological_check(A, G, N, N)[0] for N in (32, 64, 128)]
    ratios = [a / b for a, b in zip(res, res[1:])]
    ok_ratio = all(3.5 <= r <= 4.5 for r in ratios)
    ok = record(2, "non-abelian Stokes", ok_ratio and res[-1] <= 1e-5,
                f"residual@128 = {res[-1]:.2e} (tol 1e-5), ratios = "
                f"{', '.join(f'{r:.3f}' for r in ratios)} (in [3.5, 4.5])", elapsed(), 30)
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_03_abelian_exactness():
    elapsed = _timer()
    gaps = []
    for c, width, center, R in [(0.7, None, [0.0, 0.0], 0.5), (1.3, 1.0, [0.0, 0.0], 0.8),
                                (0.9, None, [0.3, -0.2], 0.6)]:
        A = u1_vortex(U1, 2, c, width)
        env = 1.0 if width is None else np.exp(-R ** 2 / width ** 2)
        flux = c * env * R ** 2 * 2 * np.pi     # vortex flux through the disc
        if width is None:
            flux = 2 * c * np.pi * R ** 2      # constant curvature 2c, any centre
        h = holonomy_A(A, circle_path(np.array(center), R), 512).value[0, 0]
        gaps.append(abs(h - np.exp(-1j * flux)))
    hol_gap = max(gaps)
    b, w = 1.0, 1.0
    A = u1_vortex(U1, 2, 0.8, 1.0)
    B = gaussian_flux(U1, 2, b, w)
    G = planar_square(2, origin=[-0.3, -0.2], u=[0.6, 0.0], v=[0.0, 0.7])
    gx = 0.5 * np.sqrt(np.pi) * w * (erf(0.3 / w) - erf(-0.3 / w))
    gy = 0.5 * np.sqrt(np.pi) * w * (erf(0.5 / w) - erf(-0.2 / w))
    k = surface_transport(SpecialConnection(A, B), G, 256, 256).value[0, 0]
    surf_gap = abs(k - np.exp(-1j * b * gx * gy))
    ok = record(3, "abelian exactness", hol_gap <= 1e-6 and surf_gap <= 1e-6,
                f"|Tr Hol - exp(-flux)| = {hol_gap:.2e}, |k - exp(-int B)| = {surf_gap:.2e} "
                f"(tol 1e-6)", elapsed(), 5)
    assert ok


# ---------------------------------------------------------------- 4

def _curve():
    g = Path(lambda t: np.stack([t, 0.3 * np.sin(3 * t), 0.2 * t ** 2], -1),
             lambda t: np.stack([np.ones_like(t), 0.9 * np.cos(3 * t), 0.4 * t], -1), 3)
    X = vector_field(lambda t: np.stack([np.sin(t), np.cos(2 * t), t], -1),
                     lambda t: np.stack([np.cos(t), -2 * np.sin(2 * t), np.ones_like(t)], -1), 3)
    Y = vector_field(lambda t: np.stack([0.5 + 0 * t, t ** 2, np.cos(t)], -1),
                     lambda t: np.stack([0 * t, 2 * t, -np.sin(t)], -1), 3)
    return g, X, Y


def test_criterion_04_curvature_anchors():
    elapsed = _timer()
    A = random_fourier_form(SU2, 3, 1, seed=1)
    B = random_fourier_form(SU2, 3, 2, seed=5)
    F = curvature_F(A)
    g, X, Y = _curve()
    t0, t1 = np.array(0.0), np.array(1.0)
    N = 256
    start = np.abs(curvature_FAB(A, zero_form(2, 3, 2), g, X, Y, N) - F(g(t0), X(t0), Y(t0))).max()
    h1 = frame_factor(A, g, N)[-1]
    end = np.abs(curvature_FAB(A, -F, g, X, Y, N)
                 - adjoint_inv_act(h1, F(g(t1), X(t1), Y(t1)))).max()
    orders = []
    for Bx in (zero_form(2, 3, 2), -F, B):
        orders += small_square_oracle(A, Bx, g, X, Y, (0.1, 0.05, 0.025))["orders"]
    ok = record(4, "curvature anchors", start <= 1e-6 and end <= 1e-6 and min(orders) >= 0.8,
                f"B=0 gap {start:.1e}, B=-F gap {end:.1e} (tol 1e-6), small-square orders "
                f"min {min(orders):.3f} (>= 0.8)", elapsed(), 60)
    assert ok


# ---------------------------------------------------------------- 5

def test_criterion_05_variation_formulas():
    elapsed = _timer()
    N, Nc = 128, 32
    tol_line = 1e-6 + 10 / N ** 2
    tol_cyl = 1e-6 + 10 / Nc ** 2
    worst = {"connection": 0.0, "aut": 0.0, "cylinder": 0.0, "symmetry": 0.0}
    G = cylinder_square(3)
    for seed in range(5):
        A = random_fourier_form(SU2, 3, 1, seed)
        B = random_fourier_form(SU2, 3, 2, seed + 50)
        eta = random_fourier_form(SU2, 3, 1, seed + 100)
        beta = random_fourier_form(SU2, 3, 2, seed + 150)
        loop = lissajous_loop(3, seed)
        Z = random_aut_field(SU2, 3, seed)
        worst["connection"] = max(worst["connection"],
                                  dHol_connection(A, loop, eta, N=N).discrepancy)
        worst["aut"] = max(worst["aut"], dTrHol_aut(A, loop, Z, N=N).discrepancy)
        worst["cylinder"] = max(worst["cylinder"],
                                cylinder_variation(A, B, G, Z, Nc, Nc).discrepancy)
        worst["symmetry"] = max(worst["symmetry"],
                                symmetry_variation(A, B, G, eta, beta, Nc, Nc).discrepancy)
    rot = dTrHol_aut(random_fourier_form(SU2, 3, 1, 5), circle_path(np.zeros(3), 0.5, 3),
                     rotation_field(3), N=N)
    along = max(abs(rot.analytic), abs(rot.fd))
    ok = (worst["connection"] <= tol_line and worst["aut"] <= tol_line
          and worst["cylinder"] <= tol_cyl and worst["symmetry"] <= tol_cyl and along <= 1e-7)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    ok = record(5, "variation formulas", ok,
                f"{detail} (tol {tol_line:.1e} at N={N}, {tol_cyl:.1e} at N={Nc}); "
                f"Z along the loop |dTr| = {along:.1e} (tol 1e-7)", elapsed(), 120)
    assert ok


# ---------------------------------------------------------------- 6

def _trace(A, B, G, N=64):
    return complex(np.trace(hol_AB(SpecialConnection(A, B), G, N, N).value))


def test_criterion_06_invariance_under_reducibility():
    elapsed = _timer()
    G = torus_square(3)
    rep = reparam_square(G, wobble_reparam(0.3, 1), wobble_reparam(0.2, 1))
    moved = make_isotopy("periodic-flow", G)(0.5)
    A = exact_cartan_connection(SU2, 3, 2)
    B = random_fourier_form(SU2, 3, 2, 4, basis="cartan")
    eta = random_fourier_form(SU2, 3, 1, 5, basis="cartan")
    base = _trace(A, B, G)
    A2, B2 = act_second(A, B, identity_gauge(3, 2), eta)
    changes = {"reparam": abs(_trace(A, B, rep) - base),
               "isotopy": abs(_trace(A, B, moved) - base),
               "second": abs(_trace(A2, B2, G) - base)}
    # generic control: no reduction, so the loop moves and the second action bite
    Ag = random_fourier_form(SU2, 3, 1, 2, amplitude=1.0)
    Bg = random_fourier_form(SU2, 3, 2, 4, amplitude=1.0)
    etag = random_fourier_form(SU2, 3, 1, 5, amplitude=1.0)
    gbase = _trace(Ag, Bg, G)
    Ag2, Bg2 = act_second(Ag, Bg, identity_gauge(3, 2), etag)
    controls = {"isotopy": abs(_trace(Ag, Bg, make_isotopy("periodic-flow", G)(0.9)) - gbase),
                "second": abs(_trace(Ag2, Bg2, G) - gbase)}
    ok = max(changes.values()) <= 1e-6 and min(controls.values()) > 1e-3
    ok = record(6, "invariance under reducibility", ok,
                "reduced " + ", ".join(f"{k} {v:.1e}" for k, v in changes.items())
                + " (tol 1e-6); generic " + ", ".join(f"{k} {v:.1e}" for k, v in controls.items())
                + " (> 1e-3)", elapsed(), 60)
    assert ok


# ---------------------------------------------------------------- 7

def test_criterion_07_surface_law():
    elapsed = _timer()
    A = pure_gauge(random_gauge_map(SU2, 3, 1, amplitude=0.5))
    eta = random_fourier_form(SU2, 3, 1, 3)
    B = random_fourier_form(SU2, 3, 2, 4)
    base = planar_square(3, origin=[-0.3, -0.3, 0], u=[0.6, 0, 0], v=[0, 0.6, 0])
    two = surface_law_check(A, eta, B, make_isotopy("in-surface-flow", base), "two-parameter")
    one = surface_law_check(A, eta, B, make_isotopy("boundary-fixing-flow", base), "one-parameter")
    bad = surface_law_check(A, eta, B, make_isotopy("normal-bump", base), "two-parameter")
    ok = two["norm"] <= 1e-5 and one["norm"] <= 1e-5 and bad["norm"] > 1e-3
    ok = record(7, "surface law", ok,
                f"two-parameter {two['norm']:.1e}, one-parameter {one['norm']:.1e} (tol 1e-5); "
                f"off-surface family {bad['norm']:.1e} (> 1e-3)", elapsed(), 120)
    assert ok


# ---------------------------------------------------------------- 8

def _extrapolated(conn, G, N):
    fine = hol_AB(conn, G, N, N).value
    coarse = hol_AB(conn, G, N // 2, N // 2).value
    return (4 * fine - coarse) / 3


def test_criterion_08_gauge_covariance():
    elapsed = _timer()
    A = random_fourier_form(SU2, 3, 1, 2)
    B = random_fourier_form(SU2, 3, 2, 4)
    G = torus_square(3)
    conn = SpecialConnection(A, B)
    N = 128
    ref = _extrapolated(conn, G, N)
    x0 = G.point(np.array(0.0), np.array(0.0))
    conj, trace = 0.0, 0.0
    for seed in range(10):
        g = random_gauge_map(SU2, 3, seed)
        g0 = g(x0)
        moved = _extrapolated(conn.gauge_transformed(g), G, N)
        conj = max(conj, float(np.abs(moved - dagger(g0) @ ref @ g0).max()))
        trace = max(trace, abs(np.trace(moved) - np.trace(ref)))
    ok = record(8, "gauge covariance", conj <= 1e-7 and trace <= 1e-7,
                f"conjugation {conj:.1e}, trace {trace:.1e} (tol 1e-7, 10 gauge maps, "
                f"grid-extrapolated at {N})", elapsed(), 30)
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_09_integrator_quality():
    elapsed = _timer()
    T = SU3.generators

    def M(t):
        t = np.asarray(t)[:, None, None]
        return np.cos(3 * t) * T[0] + t ** 2 * T[3] + np.sin(5 * t) * T[6] + 0.5 * T[7]

    sol = solve_ivp(lambda t, y: (-M(np.array([t]))[0] @ y.reshape(3, 3)).ravel(), (0, 1),
                    np.eye(3, dtype=complex).ravel(), method="DOP853", rtol=1e-13, atol=1e-13)
    ref = sol.y[:, -1].reshape(3, 3)
    errs = [np.abs(ordered_exp(M, N).value - ref).max() for N in (32, 64, 128, 256)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    A = random_fourier_form(SU3, 3, 1, seed=7, amplitude=1.0)
    drift = unitarity_defect(holonomy_A(A, lissajous_loop(3, 1), 10_000).value)
    ok = all(3.5 <= r <= 4.5 for r in ratios) and drift <= 1e-8
    ok = record(9, "integrator quality", ok,
                f"ratios {', '.join(f'{r:.3f}' for r in ratios)} (in [3.5, 4.5]); "
                f"unitarity drift over 1e4 steps {drift:.1e} (tol 1e-8)", elapsed())
    assert ok


# ---------------------------------------------------------------- 10

def test_criterion_10_determinism():
    elapsed = _timer()
    configs = ["stokes", "surface", "variation", "observe", "wilson"]
    same = []
    with tempfile.TemporaryDirectory() as tmp:
        for name in configs:
            path = os.path.join(ROOT, "configs", f"{name}.json")
            experiment = json.load(open(path))["experiment"]
            blobs = set()
            for w in (1, 2, 4):
                out = os.path.join(tmp, f"{name}-{w}")
                subprocess.run([sys.executable, "-m", "pathholonomy.cli", experiment,
                                "--config", path, "--out", out, "--workers", str(w),
                                "--format", "both", "--steps-s", "32", "--steps-t", "32"],
                               capture_output=True, check=False)
                with open(os.path.join(out, "report.json"), "rb") as a, \
                        open(os.path.join(out, "report.csv"), "rb") as b:
                    blobs.add(a.read() + b.read())
            same.append(len(blobs) == 1)
    ok = record(10, "determinism", all(same),
                f"{sum(same)}/{len(same)} configs byte-identical at workers 1, 2, 4", elapsed())
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
