"""When does a loop-of-paths holonomy only depend on the surface?

Run: python demos/invariance_tour.py
"""
import numpy as np

from pathholonomy.catalog import exact_cartan_connection, random_fourier_form, random_gauge_map
from pathholonomy.fields import act_second, identity_gauge, pure_gauge
from pathholonomy.geom import make_isotopy, planar_square, reparam_square, torus_square, wobble_reparam
from pathholonomy.liealg import make_group
from pathholonomy.pathspace import SpecialConnection, hol_AB
from pathholonomy.variations import surface_law_check

su2 = make_group("su2")
G = torus_square(3)


def trace(A, B, square):
    return complex(np.trace(hol_AB(SpecialConnection(A, B), square, 64, 64).value))


moves = {"reparameterize": reparam_square(G, wobble_reparam(0.3, 1), wobble_reparam(0.2, 1)),
         "slide along the torus": make_isotopy("periodic-flow", G)(0.9)}

for label, A, B in [
    ("flat Cartan data", exact_cartan_connection(su2, 3, 2),
     random_fourier_form(su2, 3, 2, 4, basis="cartan")),
    ("generic su(2) data", random_fourier_form(su2, 3, 1, 2, amplitude=1.0),
     random_fourier_form(su2, 3, 2, 4, amplitude=1.0)),
]:
    base = trace(A, B, G)
    print(f"{label}: Tr Hol = {base:.6f}")
    for name, sq in moves.items():
        print(f"   {name:<22} change {abs(trace(A, B, sq) - base):.2e}")
    eta = random_fourier_form(su2, 3, 1, 5, basis="cartan" if "Cartan" in label else "all",
                              amplitude=1.0)
    A2, B2 = act_second(A, B, identity_gauge(3, 2), eta)
    print(f"   {'shift B by d_A eta':<22} change {abs(trace(A2, B2, G) - base):.2e}")

print("\nSurface law for a flat connection: mixed partial in (perturbation, isotopy).")
A = pure_gauge(random_gauge_map(su2, 3, 1, amplitude=0.5))
eta = random_fourier_form(su2, 3, 1, 3)
B = random_fourier_form(su2, 3, 2, 4)
square = planar_square(3, origin=[-0.3, -0.3, 0], u=[0.6, 0, 0], v=[0, 0.6, 0])
for kind, mode in [("in-surface-flow", "two-parameter"), ("boundary-fixing-flow", "one-parameter"),
                   ("normal-bump", "two-parameter")]:
    r = surface_law_check(A, eta, B, make_isotopy(kind, square), mode, 32, 32)
    print(f"   {kind:<22} {mode:<14} |d2 H| = {r['norm']:.2e}")
