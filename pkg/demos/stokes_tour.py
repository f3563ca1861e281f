"""Wilson loops and the non-abelian Stokes identity, step by step.

Run: python demos/stokes_tour.py
"""
import numpy as np

from pathholonomy.catalog import random_fourier_form, u1_vortex
from pathholonomy.geom import boundary_loop, circle_path, torus_square, warped_square
from pathholonomy.liealg import dagger, make_group
from pathholonomy.pathspace import SpecialConnection, H_map, tautological_check
from pathholonomy.transport import holonomy_A

u1, su2 = make_group("u1"), make_group("su2")

print("1. An abelian vortex: the holonomy of a circle is the exponential of the flux.")
A = u1_vortex(u1, 2, strength=0.7)
for R in (0.25, 0.5, 1.0):
    h = holonomy_A(A, circle_path(np.zeros(2), R), 256).value[0, 0]
    print(f"   R = {R:4.2f}   Hol = {h:.6f}   exp(-i 2c pi R^2) = {np.exp(-1.4j * np.pi * R ** 2):.6f}")

print("\n2. A random su(2) connection on a warped square.")
A = random_fourier_form(su2, 3, 1, seed=1)
G = warped_square(3, seed=2)
W = holonomy_A(A, boundary_loop(G), 256).value
print(f"   Wilson loop of the boundary: Tr Hol = {np.trace(W):.6f}")

print("\n3. Sweeping the surface with the tautological two-form B = -F reproduces it.")
prev = None
for N in (16, 32, 64, 128):
    gap = tautological_check(A, G, N, N)[0]
    ratio = "" if prev is None else f"   ratio {prev / gap:.3f}"
    print(f"   N = {N:3d}   |H - Hol(boundary)| = {gap:.3e}{ratio}")
    prev = gap

print("\n4. On a torus the surface sees the commutator of the two generating loops.")
G = torus_square(3)
H = H_map(SpecialConnection.tautological(A), G, 128, 128).value
a = holonomy_A(A, G.initial_points(0), 256).value
c = holonomy_A(A, G.path_at(0), 256).value
print(f"   |H - a^-1 c^-1 a c| = {np.linalg.norm(H - dagger(a) @ dagger(c) @ a @ c):.2e}")
