import numpy as np
import pytest

from pathholonomy.catalog import build_connection, exact_cartan_connection, random_fourier_form
from pathholonomy.chen import (chen_bracket, chen_line, curvature_FAB, flatness_check,
                               small_square_oracle, vector_field)
from pathholonomy.fields import curvature_F, zero_form
from pathholonomy.geom import Path, line_path
from pathholonomy.liealg import adjoint_inv_act, make_group
from pathholonomy.transport import frame_factor


def _gamma():
    return Path(lambda t: np.stack([t, 0.3 * np.sin(3 * t), 0.2 * t ** 2], -1),
                lambda t: np.stack([np.ones_like(t), 0.9 * np.cos(3 * t), 0.4 * t], -1), 3)


def _X():
    return vector_field(lambda t: np.stack([np.sin(t), np.cos(2 * t), t], -1),
                        lambda t: np.stack([np.cos(t), -2 * np.sin(2 * t), np.ones_like(t)], -1), 3)


def _Y():
    return vector_field(lambda t: np.stack([0.5 + 0 * t, t ** 2, np.cos(t)], -1),
                        lambda t: np.stack([0 * t, 2 * t, -np.sin(t)], -1), 3)


@pytest.fixture(scope="module")
def fields():
    su2 = make_group("su2")
    return su2, random_fourier_form(su2, 3, 1, seed=1), random_fourier_form(su2, 3, 2, seed=5)


def test_curvature_with_zero_B_is_F_at_start(fields):
    _, A, _ = fields
    g, X, Y = _gamma(), _X(), _Y()
    t0 = np.array(0.0)
    val = curvature_FAB(A, zero_form(2, 3, 2), g, X, Y, 256)
    assert np.abs(val - curvature_F(A)(g(t0), X(t0), Y(t0))).max() < 1e-12


def test_curvature_of_tautological_connection_is_transported_F(fields):
    _, A, _ = fields
    g, X, Y = _gamma(), _X(), _Y()
    F = curvature_F(A)
    t1 = np.array(1.0)
    N = 256
    h1 = frame_factor(A, g, N)[-1]
    val = curvature_FAB(A, -F, g, X, Y, N)
    assert np.abs(val - adjoint_inv_act(h1, F(g(t1), X(t1), Y(t1)))).max() < 1e-6


def test_curvature_antisymmetric(fields):
    _, A, B = fields
    g, X, Y = _gamma(), _X(), _Y()
    val = curvature_FAB(A, B, g, X, Y, 64) + curvature_FAB(A, B, g, Y, X, 64)
    assert np.abs(val).max() < 1e-12


def test_bracket_methods_agree(fields):
    _, A, B = fields
    g, X, Y = _gamma(), _X(), _Y()
    a = chen_bracket(B, B, g, (X, Y), 512, A=A, method="cumulative")
    b = chen_bracket(B, B, g, (X, Y), 512, A=A, method="simplex")
    assert np.abs(a - b).max() < 1e-5


def test_bracket_converges_second_order(fields):
    _, A, B = fields
    g, X, Y = _gamma(), _X(), _Y()
    vals = [chen_bracket(B, B, g, (X, Y), N, A=A) for N in (64, 128, 256)]
    r = np.abs(vals[0] - vals[1]).max() / np.abs(vals[1] - vals[2]).max()
    assert 3.5 < r < 4.5


def test_abelian_line_integral_exact(u1):
    # constant 1-form, trivial frame: the integral is w(gamma(1) - gamma(0))
    w = build_connection({"family": "constant", "coeffs": [[1.0], [-2.0], [0.5]]}, u1, 3)
    gamma = line_path([0, 0, 0], [1, 2, 3])
    val = chen_line(w, gamma, N=16)
    assert abs(val[0, 0] - 1j * (1 - 4 + 1.5)) < 1e-13


def test_abelian_bracket_vanishes(u1):
    w = random_fourier_form(u1, 3, 1, seed=2)
    assert np.abs(chen_bracket(w, w, _gamma(), (), 64)).max() < 1e-15


def test_degree_checks(fields):
    _, A, B = fields
    with pytest.raises(ValueError):
        chen_line(B, _gamma(), (), 16)
    with pytest.raises(ValueError):
        chen_bracket(B, A, _gamma(), (), 16)


@pytest.mark.parametrize("which", ["zero", "tautological", "generic"])
def test_small_square_holonomy_matches_curvature(fields, which):
    _, A, B = fields
    Bx = {"zero": zero_form(2, 3, 2), "tautological": -curvature_F(A), "generic": B}[which]
    res = small_square_oracle(A, Bx, _gamma(), _X(), _Y())
    assert res["errors"][-1] < 0.05 * np.linalg.norm(res["curvature"]) + 1e-3
    assert all(0.8 < o < 1.3 for o in res["orders"])


def test_flatness_check(su2):
    A = exact_cartan_connection(su2, 3, 5)
    pts = np.random.default_rng(0).normal(size=(20, 3)) * 0.5
    fa, dab, cart = flatness_check(A, zero_form(2, 3, 2), su2, pts)
    assert fa < 1e-12 and dab < 1e-12 and cart < 1e-12
    A2 = random_fourier_form(su2, 3, 1, seed=1)
    assert flatness_check(A2, zero_form(2, 3, 2), su2, pts)[0] > 1e-2
