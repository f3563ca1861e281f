import numpy as np
import pytest
from scipy.special import erf

from pathholonomy.catalog import (gaussian_flux, random_fourier_form, random_gauge_map,
                                  u1_vortex)
from pathholonomy.fields import curvature_F, zero_form
from pathholonomy.geom import boundary_loop, planar_square, torus_square, warped_square
from pathholonomy.liealg import dagger, exp_map, unitarity_defect
from pathholonomy.pathspace import (SpecialConnection, H_map, hol_AB, iterated_connection_eval,
                                    surface_transport, tautological_check)
from pathholonomy.transport import TransportError, holonomy_A


def test_trivial_connection_gives_identity(su2):
    A = random_fourier_form(su2, 3, 1, seed=1)
    H = H_map(SpecialConnection.trivial(A), warped_square(3, 2), 32, 32).value
    assert np.abs(H - np.eye(2)).max() < 1e-14


@pytest.mark.parametrize("b,w", [(1.0, 1.0), (-2.5, 0.4)])
def test_abelian_surface_transport_is_exp_of_flux(u1, b, w):
    A = u1_vortex(u1, 2, 0.8, 1.0)
    B = gaussian_flux(u1, 2, b, w)
    G = planar_square(2, origin=[-0.3, -0.2], u=[0.6, 0.0], v=[0.0, 0.7])
    gx = 0.5 * np.sqrt(np.pi) * w * (erf(0.3 / w) - erf(-0.3 / w))
    gy = 0.5 * np.sqrt(np.pi) * w * (erf(0.5 / w) - erf(-0.2 / w))
    exact = np.exp(-1j * b * gx * gy)

    def val(N):
        return surface_transport(SpecialConnection(A, B), G, N, N).value[0, 0]

    coarse, fine = val(64), val(128)
    assert abs(fine - exact) < 1e-4
    assert abs((4 * fine - coarse) / 3 - exact) < 1e-6


def test_stokes_tautological_connection_second_order(su2):
    A = random_fourier_form(su2, 3, 1, seed=1)
    G = warped_square(3, 2)
    res = [tautological_check(A, G, N, N)[0] for N in (32, 64, 128)]
    assert res[-1] < 1e-4
    assert all(3.6 < a / b < 4.4 for a, b in zip(res, res[1:]))


def test_loop_of_loops_on_torus(su2):
    A = random_fourier_form(su2, 3, 1, seed=1, amplitude=0.8)
    G = torus_square(3)
    H = H_map(SpecialConnection.tautological(A), G, 128, 128).value
    a = holonomy_A(A, G.initial_points(0), 256).value
    c = holonomy_A(A, G.path_at(0), 256).value
    commutator = dagger(a) @ dagger(c) @ a @ c
    assert np.linalg.norm(H - commutator) < 1e-3


def test_surface_transport_unitary(su3):
    A = random_fourier_form(su3, 3, 1, seed=4, amplitude=1.0)
    B = random_fourier_form(su3, 3, 2, seed=6, amplitude=1.0)
    st = surface_transport(SpecialConnection(A, B), warped_square(3, 1), 64, 64)
    assert max(unitarity_defect(k) for k in st.k) < 1e-12
    assert np.abs(st.K - st.h0 @ st.k).max() < 1e-15


def test_base_point_conjugates_exactly(su2):
    A = random_fourier_form(su2, 3, 1, seed=2)
    B = random_fourier_form(su2, 3, 2, seed=3)
    g0 = exp_map(0.7 * su2.generators[0] - 1.1 * su2.generators[2])
    G = warped_square(3, 4)
    conn = SpecialConnection(A, B)
    k = surface_transport(conn, G, 32, 32).value
    k0 = surface_transport(conn, G, 32, 32, base_point=g0).value
    assert np.abs(k0 - dagger(g0) @ k @ g0).max() < 1e-13


def test_gauge_covariance_of_surface_transport(su2):
    A = random_fourier_form(su2, 3, 1, seed=2)
    B = random_fourier_form(su2, 3, 2, seed=3)
    g = random_gauge_map(su2, 3, seed=8)
    G = warped_square(3, 4)
    g0 = g(G.point(np.array(0.0), np.array(0.0)))
    conn = SpecialConnection(A, B)

    def gap(N):
        k = surface_transport(conn, G, N, N).value
        kg = surface_transport(conn.gauge_transformed(g), G, N, N).value
        return np.abs(kg - dagger(g0) @ k @ g0).max()

    a, b = gap(32), gap(64)
    assert b < 1e-4 and 3.5 < a / b < 4.5


def test_workers_are_deterministic(su2):
    A = random_fourier_form(su2, 3, 1, seed=2)
    B = random_fourier_form(su2, 3, 2, seed=3)
    conn = SpecialConnection(A, B)
    G = warped_square(3, 4)
    ref = surface_transport(conn, G, 48, 32).value
    for w in (2, 3, 5):
        assert np.array_equal(surface_transport(conn, G, 48, 32, workers=w).value, ref)


def test_hol_ab_needs_loop(su2):
    A = random_fourier_form(su2, 3, 1, seed=2)
    with pytest.raises(TransportError):
        hol_AB(SpecialConnection.trivial(A), warped_square(3, 1), 8, 8)


def test_hol_ab_of_trivial_connection_is_base_holonomy(su2):
    A = random_fourier_form(su2, 3, 1, seed=2)
    G = torus_square(3)
    val = hol_AB(SpecialConnection.trivial(A), G, 64, 64).value
    ref = holonomy_A(A, G.initial_points(0), 128).value
    # the bottom edge is sampled at 2 Ns steps
    assert np.abs(val - ref).max() < 1e-14


def test_iterated_connection_warns_off_horizontal(su2):
    A = random_fourier_form(su2, 3, 1, seed=2)
    B = random_fourier_form(su2, 3, 2, seed=3)
    C = zero_form(3, 3, 2)
    X = lambda s, t: np.broadcast_to([0.1, 0.0, 0.0], np.shape(s) + (3,))
    with pytest.warns(RuntimeWarning):
        _, notes = iterated_connection_eval(A, B, C, warped_square(3, 1), X, 16, 16)
    assert notes


def test_iterated_connection_on_horizontal_square(su2):
    A = zero_form(1, 3, 2)
    B = zero_form(2, 3, 2)
    C = random_fourier_form(su2, 3, 3, seed=1)
    X = lambda s, t: np.broadcast_to([0.0, 0.0, 1.0], np.shape(s) + (3,))
    G = planar_square(3)
    val, notes = iterated_connection_eval(A, B, C, G, X, 64, 64)
    assert not notes
    # trivial frames: plain trapezoid of C(e3, e1, e2)
    s = np.linspace(0, 1, 65)
    S, T = np.meshgrid(s, s, indexing="ij")
    vals = C(G.point(S, T), X(S, T), G.ds(S, T), G.dt(S, T))
    w = np.ones(65)
    w[[0, -1]] = 0.5
    assert np.abs(val - np.einsum("s,t,stij->ij", w / 64, w / 64, vals)).max() < 1e-14
