import numpy as np
import pytest
from scipy.integrate import solve_ivp

from pathholonomy.catalog import build_connection, random_fourier_form, random_gauge_map, u1_vortex
from pathholonomy.chen import lift_tangent
from pathholonomy.fields import gauge_transform_connection
from pathholonomy.geom import circle_path, concatenate, lissajous_loop, line_path, smooth_field
from pathholonomy.liealg import unitarity_defect
from pathholonomy.transport import (TransportError, frame_factor, holonomy_A,
                                    horizontality_residual, ordered_exp, transport_A)


def reference_ode(M, n):
    """High-accuracy solution of dk/dt = -M(t) k from a general-purpose integrator."""
    def rhs(t, y):
        k = y.reshape(n, n)
        return (-M(np.array([t]))[0] @ k).ravel()

    sol = solve_ivp(rhs, (0, 1), np.eye(n, dtype=complex).ravel(), method="DOP853",
                    rtol=1e-13, atol=1e-13)
    return sol.y[:, -1].reshape(n, n)


def test_ordered_exp_matches_ode_at_second_order(su3):
    T = su3.generators

    def M(t):
        t = np.asarray(t)[:, None, None]
        return np.cos(3 * t) * T[0] + t ** 2 * T[3] + np.sin(5 * t) * T[6] + 0.5 * T[7]

    ref = reference_ode(M, 3)
    errs = [np.abs(ordered_exp(M, N).value - ref).max() for N in (32, 64, 128)]
    assert errs[-1] < 1e-4
    for a, b in zip(errs, errs[1:]):
        assert 3.7 < a / b < 4.3


def test_ordered_exp_richardson_estimate(su2):
    def M(t):
        t = np.asarray(t)[:, None, None]
        return np.sin(4 * t) * su2.generators[0] + t * su2.generators[1]

    ref = reference_ode(M, 2)
    res = ordered_exp(M, 64, richardson=True)
    err = np.abs(res.value - ref).max()
    assert 0.5 * err < res.error_estimate < 2.0 * err


def test_ordered_exp_rejects_zero_steps(su2):
    with pytest.raises(TransportError):
        ordered_exp(lambda t: np.zeros((len(t), 2, 2)), 0)


def test_unitarity_drift_long_run(su3):
    A = random_fourier_form(su3, 3, 1, seed=7, amplitude=1.0)
    h = holonomy_A(A, lissajous_loop(3, 1), 10_000).value
    assert unitarity_defect(h) < 1e-12


@pytest.mark.parametrize("c,width,R", [(0.7, None, 0.5), (1.3, 1.0, 0.8), (-0.4, 0.6, 1.1)])
def test_u1_vortex_holonomy_exact(u1, c, width, R):
    A = u1_vortex(u1, 2, c, width)
    env = 1.0 if width is None else np.exp(-R ** 2 / width ** 2)
    flux = c * env * R ** 2 * 2 * np.pi
    h = holonomy_A(A, circle_path(np.zeros(2), R), 256).value
    # on a circle the integrand is constant, so the discretisation is exact
    assert abs(h[0, 0] - np.exp(-1j * flux)) < 1e-12


def test_u1_off_centre_loop_matches_line_integral(u1):
    A = u1_vortex(u1, 2, 1.0)
    # constant curvature 2c: the holonomy depends only on the enclosed area
    h = holonomy_A(A, circle_path(np.array([0.4, -0.3]), 0.5), 512).value
    assert abs(h[0, 0] - np.exp(-1j * 2 * np.pi * 0.25)) < 1e-5


def test_composition_reverses_order(su2):
    A = random_fourier_form(su2, 3, 1, seed=3, amplitude=0.8)
    g1 = line_path([0, 0, 0], [0.5, 0.2, -0.1])
    g2 = line_path([0.5, 0.2, -0.1], [0.1, 0.7, 0.3])
    h1 = transport_A(A, g1, 128).value
    h2 = transport_A(A, g2, 128).value
    h12 = transport_A(A, concatenate(g1, g2), 128).value
    assert np.abs(h12 - h2 @ h1).max() < 1e-13


def test_reversed_path_inverts(su2):
    A = random_fourier_form(su2, 3, 1, seed=3, amplitude=0.8)
    g = smooth_field(3, 4)
    N = 256
    err = np.abs(transport_A(A, g.reversed(), N).value @ transport_A(A, g, N).value - np.eye(2)).max()
    assert err < 1e-4


def test_frames_start_at_identity(su2):
    A = random_fourier_form(su2, 3, 1, seed=3)
    h = frame_factor(A, lissajous_loop(3, 0), 32)
    assert h.shape == (33, 2, 2)
    assert np.allclose(h[0], np.eye(2))


def test_holonomy_needs_loop(su2):
    A = random_fourier_form(su2, 3, 1, seed=3)
    with pytest.raises(TransportError):
        holonomy_A(A, line_path([0, 0, 0], [1, 0, 0]), 16)


def test_gauge_conjugates_holonomy(su2):
    A = random_fourier_form(su2, 3, 1, seed=5, amplitude=0.8)
    g = random_gauge_map(su2, 3, seed=2)
    gamma = lissajous_loop(3, 2)
    x0 = gamma.point(np.array(0.0))
    g0 = g(x0)
    expected = lambda N: g0.conj().T @ holonomy_A(A, gamma, N).value @ g0
    actual = lambda N: holonomy_A(gauge_transform_connection(A, g), gamma, N).value
    gaps = [np.abs(actual(N) - expected(N)).max() for N in (128, 256)]
    # the identity is exact in the limit; the discrete gap shrinks at second order
    assert gaps[1] < 1e-4 and 3.5 < gaps[0] / gaps[1] < 4.5


def test_horizontal_lift_residual_second_order(su2):
    A = random_fourier_form(su2, 3, 1, seed=5, amplitude=0.8)
    res = [horizontality_residual(A, lift_tangent(A, lissajous_loop(3, 2), smooth_field(3, 9), N=N))
           for N in (128, 256)]
    assert 3.7 < res[0] / res[1] < 4.3


def test_horizontal_lift_flat_connection(su2):
    A = build_connection({"family": "pure_gauge", "seed": 2}, su2, 3)
    res = [horizontality_residual(A, lift_tangent(A, lissajous_loop(3, 2), smooth_field(3, 9), N=N))
           for N in (256, 512)]
    # the vertical part is constant; what remains is the frame discretisation
    assert res[1] < 5e-5 and 3.7 < res[0] / res[1] < 4.3
