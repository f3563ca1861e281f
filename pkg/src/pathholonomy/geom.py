"""Paths, squares (paths of paths), boundaries, reparameterizations, isotopies.

All geometry carries analytic derivatives.  Samplers are vectorized: a
``Path`` maps an array of times ``(...,)`` to points ``(..., d)``, a
``Square`` maps broadcastable ``s, t`` arrays to ``(..., d)``.

Conventions: ``ds`` is the s-derivative (the direction across paths) and
``dt`` the t-derivative (along each path).  A square is "closed in s" when
``Gamma(0, .) = Gamma(1, .)`` (a loop of paths) and "closed in t" when every
``Gamma(s, .)`` is a loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

CLOSURE_TOL = 1e-12


class GeometryError(ValueError):
    pass


# ----------------------------------------------------------------- paths

class Path:
    """A smooth map ``[0, 1] -> R^d`` with its velocity."""

    def __init__(self, point: Callable, velocity: Callable, dim: int,
                 loop: bool | None = None, name: str = "path"):
        self._point = point
        self._velocity = velocity
        self.dim = dim
        self.name = name
        gap = float(np.max(np.abs(point(np.array(0.0)) - point(np.array(1.0)))))
        if loop is None:
            loop = gap <= CLOSURE_TOL
        elif loop and gap > CLOSURE_TOL:
            raise GeometryError(f"path flagged as a loop does not close (gap {gap:.2e})")
        self.loop = loop

    def point(self, t):
        return self._point(np.asarray(t, dtype=float))

    def velocity(self, t):
        return self._velocity(np.asarray(t, dtype=float))

    __call__ = point

    @property
    def segments(self):
        return [self]

    def reversed(self) -> "Path":
        p, v = self._point, self._velocity
        return Path(lambda t: p(1.0 - t), lambda t: -v(1.0 - t), self.dim,
                    self.loop, name=f"rev({self.name})")

    def reparametrized(self, phi: "Reparam") -> "Path":
        p, v = self._point, self._velocity
        return Path(lambda t: p(phi(t)), lambda t: v(phi(t)) * phi.derivative(t)[..., None],
                    self.dim, self.loop, name=f"{self.name}o{phi.name}")


class PiecewisePath(Path):
    """Concatenation of unit-parameter segments on equal sub-intervals.

    Transport integrates segment by segment so that corners cost nothing.
    """

    def __init__(self, segments, name="piecewise"):
        self._segs = list(segments)
        n = len(self._segs)
        if n == 0:
            raise GeometryError("empty concatenation")
        for a, b in zip(self._segs[:-1], self._segs[1:]):
            if np.max(np.abs(a.point(1.0) - b.point(0.0))) > 1e-10:
                raise GeometryError("concatenated segments do not meet")
        segs = self._segs

        def _split(t):
            t = np.asarray(t, dtype=float)
            k = np.clip(np.floor(t * n).astype(int), 0, n - 1)
            return k, t * n - k

        def point(t):
            k, u = _split(t)
            out = np.zeros(np.shape(t) + (segs[0].dim,))
            for i, sg in enumerate(segs):
                m = k == i
                if np.any(m):
                    out[m] = sg.point(u[m])
            return out

        def velocity(t):
            k, u = _split(t)
            out = np.zeros(np.shape(t) + (segs[0].dim,))
            for i, sg in enumerate(segs):
                m = k == i
                if np.any(m):
                    out[m] = n * sg.velocity(u[m])
            return out

        super().__init__(point, velocity, segs[0].dim, None, name)

    @property
    def segments(self):
        return list(self._segs)

    def reversed(self):
        return PiecewisePath([s.reversed() for s in reversed(self._segs)],
                             name=f"rev({self.name})")


def concatenate(*paths) -> PiecewisePath:
    """``gamma_1 * gamma_2 * ...``: traverse the first path first."""
    segs = []
    for p in paths:
        segs.extend(p.segments)
    return PiecewisePath(segs, name="*".join(p.name for p in paths))


def line_path(a, b) -> Path:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return Path(lambda t: a + t[..., None] * (b - a),
                lambda t: np.broadcast_to(b - a, np.shape(t) + a.shape).copy(),
                len(a), name="line")


def circle_path(center, radius, d=2, axes=(0, 1), turns=1) -> Path:
    """Counterclockwise circle starting at ``center + radius e_{axes[0]}``."""
    c = np.asarray(center, float)
    i, j = axes
    w = 2 * np.pi * turns

    def point(t):
        out = np.broadcast_to(c, np.shape(t) + (d,)).copy()
        out[..., i] += radius * np.cos(w * t)
        out[..., j] += radius * np.sin(w * t)
        return out

    def velocity(t):
        out = np.zeros(np.shape(t) + (d,))
        out[..., i] = -radius * w * np.sin(w * t)
        out[..., j] = radius * w * np.cos(w * t)
        return out

    return Path(point, velocity, d, loop=True, name="circle")


def lissajous_loop(d, seed, amplitude=0.5, modes=2, center=None) -> Path:
    """Random smooth closed curve built from integer harmonics."""
    rng = np.random.default_rng(seed)
    a = amplitude * rng.normal(size=(modes, d)) / np.sqrt(modes)
    b = amplitude * rng.normal(size=(modes, d)) / np.sqrt(modes)
    n = np.arange(1, modes + 1)
    c = np.zeros(d) if center is None else np.asarray(center, float)
    base = c - a.sum(0)

    def point(t):
        w = 2 * np.pi * np.asarray(t)[..., None] * n
        return base + np.cos(w) @ a + np.sin(w) @ b

    def velocity(t):
        w = 2 * np.pi * np.asarray(t)[..., None] * n
        return (-np.sin(w) * 2 * np.pi * n) @ a + (np.cos(w) * 2 * np.pi * n) @ b

    return Path(point, velocity, d, loop=True, name=f"lissajous[{seed}]")


def smooth_field(d, seed, amplitude=0.3, modes=2) -> Path:
    """Random smooth vector field ``X(t)`` along a path, stored as a ``Path``."""
    rng = np.random.default_rng(seed)
    c0 = amplitude * rng.normal(size=d)
    a = amplitude * rng.normal(size=(modes, d)) / np.sqrt(modes)
    b = amplitude * rng.normal(size=(modes, d)) / np.sqrt(modes)
    n = np.arange(1, modes + 1)

    def point(t):
        w = np.pi * np.asarray(t)[..., None] * n
        return c0 + np.cos(w) @ a + np.sin(w) @ b

    def velocity(t):
        w = np.pi * np.asarray(t)[..., None] * n
        return (-np.sin(w) * np.pi * n) @ a + (np.cos(w) * np.pi * n) @ b

    return Path(point, velocity, d, loop=False, name=f"field[{seed}]")


# ----------------------------------------------------------------- reparams

class Reparam:
    """Monotone map of ``[0, 1]`` fixing both endpoints."""

    def __init__(self, value, derivative, name="phi", check=True):
        self._v = value
        self._d = derivative
        self.name = name
        if check:
            self.validate()

    def __call__(self, u):
        return self._v(np.asarray(u, dtype=float))

    def derivative(self, u):
        return self._d(np.asarray(u, dtype=float))

    def validate(self, samples=513):
        u = np.linspace(0, 1, samples)
        v = self(u)
        if abs(v[0]) > 1e-12 or abs(v[-1] - 1) > 1e-12:
            raise GeometryError("reparameterization must fix 0 and 1")
        if np.any(np.diff(v) <= 0) or np.any(self.derivative(u) < 0):
            raise GeometryError("reparameterization must be strictly increasing")


def identity_reparam():
    return Reparam(lambda u: u, lambda u: np.ones_like(u), name="id")


def power_reparam(p=2.0):
    return Reparam(lambda u: u ** p, lambda u: p * u ** (p - 1), name=f"u^{p}")


def wobble_reparam(a=0.3, k=1):
    """``u - a sin(2 pi k u) / (2 pi k)``; periodic derivative, so loops stay smooth."""
    if abs(a) >= 1:
        raise GeometryError("wobble amplitude must be below 1")
    w = 2 * np.pi * k
    return Reparam(lambda u: u - a * np.sin(w * u) / w,
                   lambda u: 1 - a * np.cos(w * u), name=f"wobble({a})")


# ----------------------------------------------------------------- squares

class Square:
    """A smooth map ``I x I -> R^d`` with analytic partials."""

    def __init__(self, point, ds, dt, dim, loop_s=False, loop_t=False, name="square"):
        self._point, self._ds, self._dt = point, ds, dt
        self.dim = dim
        self.name = name
        u = np.linspace(0, 1, 17)
        if loop_s and np.max(np.abs(point(np.zeros_like(u), u) - point(np.ones_like(u), u))) > 1e-10:
            raise GeometryError("square flagged closed in s does not close")
        if loop_t and np.max(np.abs(point(u, np.zeros_like(u)) - point(u, np.ones_like(u)))) > 1e-10:
            raise GeometryError("square flagged closed in t does not close")
        self.loop_s = loop_s
        self.loop_t = loop_t

    def point(self, s, t):
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        return self._point(s, t)

    def ds(self, s, t):
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        return self._ds(s, t)

    def dt(self, s, t):
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        return self._dt(s, t)

    def path_at(self, s) -> Path:
        """The path ``t -> Gamma(s, t)``."""
        s = float(s)
        return Path(lambda t: self.point(s, t), lambda t: self.dt(s, t), self.dim,
                    loop=None, name=f"{self.name}(s={s:g},.)")

    def initial_points(self, t=0.0) -> Path:
        """The path ``s -> Gamma(s, t)``; the loop of initial points for ``t = 0``."""
        t = float(t)
        return Path(lambda s: self.point(s, t), lambda s: self.ds(s, t), self.dim,
                    loop=None, name=f"{self.name}(.,t={t:g})")


def boundary_loop(G: Square) -> PiecewisePath:
    """Four-edge loop: left edge up, top edge across, right edge down, bottom edge back."""
    left = G.path_at(0.0)
    top = G.initial_points(1.0)
    right = G.path_at(1.0).reversed()
    bottom = G.initial_points(0.0).reversed()
    loop = PiecewisePath([left, top, right, bottom], name=f"boundary({G.name})")
    return loop


def reparam_square(G: Square, phi_s: Reparam | None = None,
                   phi_t: Reparam | None = None) -> Square:
    phi_s = phi_s or identity_reparam()
    phi_t = phi_t or identity_reparam()
    for phi in (phi_s, phi_t):
        phi.validate()

    def point(s, t):
        return G.point(phi_s(s), phi_t(t))

    def ds(s, t):
        return G.ds(phi_s(s), phi_t(t)) * phi_s.derivative(s)[..., None]

    def dt(s, t):
        return G.dt(phi_s(s), phi_t(t)) * phi_t.derivative(t)[..., None]

    return Square(point, ds, dt, G.dim, G.loop_s, G.loop_t,
                  name=f"{G.name}o({phi_s.name},{phi_t.name})")


def path_square(gamma: Path) -> Square:
    """``Gamma(s, t) = gamma(t)`` for all s (zero s-derivative)."""

    def point(s, t):
        return gamma.point(t)

    def ds(s, t):
        return np.zeros(np.shape(t) + (gamma.dim,))

    def dt(s, t):
        return gamma.velocity(t)

    return Square(point, ds, dt, gamma.dim, loop_s=True, loop_t=gamma.loop, name="const_s")


# ----------------------------------------------------------------- catalog

def _vec(d, v):
    out = np.zeros(d)
    v = np.asarray(v, float)
    out[: len(v)] = v
    return out


def planar_square(d=2, origin=None, u=None, v=None, name="planar") -> Square:
    """Affine square ``origin + s u + t v``."""
    o = np.zeros(d) if origin is None else _vec(d, origin)
    u = _vec(d, [1.0, 0.0] if u is None else u)
    v = _vec(d, [0.0, 1.0] if v is None else v)

    def point(s, t):
        return o + s[..., None] * u + t[..., None] * v

    def ds(s, t):
        return np.broadcast_to(u, s.shape + (d,)).copy()

    def dt(s, t):
        return np.broadcast_to(v, s.shape + (d,)).copy()

    return Square(point, ds, dt, d, name=name)


def warped_square(d, seed, amplitude=0.2, modes=2, origin=None, u=None, v=None) -> Square:
    """Affine square plus a random smooth warp (Lissajous-type harmonics)."""
    rng = np.random.default_rng(seed)
    base = planar_square(d, origin, u, v)
    c = amplitude * rng.normal(size=(modes, d)) / np.sqrt(modes)
    ws = rng.uniform(0.5, 2.0, size=modes) * np.pi
    wt = rng.uniform(0.5, 2.0, size=modes) * np.pi
    ps = rng.uniform(0, 2 * np.pi, size=modes)
    pt = rng.uniform(0, 2 * np.pi, size=modes)

    def _w(s, t):
        a = ws * s[..., None] + ps
        b = wt * t[..., None] + pt
        return a, b

    def point(s, t):
        a, b = _w(s, t)
        return base.point(s, t) + (np.sin(a) * np.sin(b)) @ c

    def ds(s, t):
        a, b = _w(s, t)
        return base.ds(s, t) + (ws * np.cos(a) * np.sin(b)) @ c

    def dt(s, t):
        a, b = _w(s, t)
        return base.dt(s, t) + (wt * np.sin(a) * np.cos(b)) @ c

    return Square(point, ds, dt, d, name=f"warped[{seed}]")


def cylinder_square(d=3, radius=0.5, length=0.6, lift=0.3, center=None) -> Square:
    """Loop of paths: radial paths of an annulus (lifted along e_3 when d >= 3).

    ``Gamma(s, .)`` runs outward at angle ``2 pi s``; ``Gamma(., 0)`` is a circle.
    """
    c = np.zeros(d) if center is None else _vec(d, center)
    w = 2 * np.pi

    def point(s, t):
        r = radius + length * t
        out = np.broadcast_to(c, s.shape + (d,)).copy()
        out[..., 0] += r * np.cos(w * s)
        out[..., 1] += r * np.sin(w * s)
        if d >= 3:
            out[..., 2] += lift * t
        return out

    def ds(s, t):
        r = radius + length * t
        out = np.zeros(s.shape + (d,))
        out[..., 0] = -w * r * np.sin(w * s)
        out[..., 1] = w * r * np.cos(w * s)
        return out

    def dt(s, t):
        out = np.zeros(s.shape + (d,))
        out[..., 0] = length * np.cos(w * s)
        out[..., 1] = length * np.sin(w * s)
        if d >= 3:
            out[..., 2] = lift
        return out

    return Square(point, ds, dt, d, loop_s=True, name="cylinder")


def torus_square(d=3, major=0.8, minor=0.3, center=None) -> Square:
    """Loop of loops on a standard torus: s runs along the long circle."""
    if d < 3:
        raise GeometryError("torus needs d >= 3")
    c = np.zeros(d) if center is None else _vec(d, center)
    w = 2 * np.pi

    def point(s, t):
        rho = major + minor * np.cos(w * t)
        out = np.broadcast_to(c, s.shape + (d,)).copy()
        out[..., 0] += rho * np.cos(w * s)
        out[..., 1] += rho * np.sin(w * s)
        out[..., 2] += minor * np.sin(w * t)
        return out

    def ds(s, t):
        rho = major + minor * np.cos(w * t)
        out = np.zeros(s.shape + (d,))
        out[..., 0] = -w * rho * np.sin(w * s)
        out[..., 1] = w * rho * np.cos(w * s)
        return out

    def dt(s, t):
        drho = -w * minor * np.sin(w * t)
        out = np.zeros(s.shape + (d,))
        out[..., 0] = drho * np.cos(w * s)
        out[..., 1] = drho * np.sin(w * s)
        out[..., 2] = w * minor * np.cos(w * t)
        return out

    return Square(point, ds, dt, d, loop_s=True, loop_t=True, name="torus")


def tube_square(d=3, seed=0, radius=0.3, amplitude=0.2) -> Square:
    """Loop of loops on a warped torus, used for generic su(2) checks."""
    rng = np.random.default_rng(seed)
    base = torus_square(d, 0.7, radius)
    c = amplitude * rng.normal(size=d)
    w = 2 * np.pi

    def point(s, t):
        return base.point(s, t) + (np.sin(w * s) * np.sin(w * t))[..., None] * c

    def ds(s, t):
        return base.ds(s, t) + (w * np.cos(w * s) * np.sin(w * t))[..., None] * c

    def dt(s, t):
        return base.dt(s, t) + (w * np.sin(w * s) * np.cos(w * t))[..., None] * c

    return Square(point, ds, dt, d, loop_s=True, loop_t=True, name=f"tube[{seed}]")


def build_square(entry: dict, d: int) -> Square:
    kind = entry.get("kind", "planar")
    if kind == "planar":
        return planar_square(d, entry.get("origin"), entry.get("u"), entry.get("v"))
    if kind == "warped":
        return warped_square(d, int(entry.get("seed", 0)), entry.get("amplitude", 0.2),
                             entry.get("modes", 2), entry.get("origin"), entry.get("u"),
                             entry.get("v"))
    if kind == "cylinder":
        return cylinder_square(d, entry.get("radius", 0.5), entry.get("length", 0.6),
                               entry.get("lift", 0.3))
    if kind == "torus":
        return torus_square(d, entry.get("major", 0.8), entry.get("minor", 0.3))
    if kind == "tube":
        return tube_square(d, int(entry.get("seed", 0)), entry.get("radius", 0.3),
                           entry.get("amplitude", 0.2))
    raise GeometryError(f"unknown geometry kind {kind!r}")


# ----------------------------------------------------------------- isotopies

@dataclass
class IsotopyFamily:
    """``Gamma_r = Gamma_0 o phi_r`` (or a displaced family) with ``Z_r = d Gamma_r / dr``."""

    base: Square
    surface: Callable          # r -> Square
    velocity: Callable         # (r, s, t) -> Z_r(s, t)
    conditions: frozenset = field(default_factory=frozenset)
    kind: str = ""
    flow: Callable | None = None   # (r, s, t) -> (s', t') for in-surface families

    def __call__(self, r) -> Square:
        return self.surface(float(r))

    def z_residuals(self, r, samples=9):
        """Residuals of the Z-conditions: ``|Z(0,0)|``, normal part of Z, ``|Z(1,0)|``."""
        u = np.linspace(0, 1, samples)
        S, T = np.meshgrid(u, u, indexing="ij")
        Gr = self(r)
        Z = self.velocity(r, S, T)
        a, b = Gr.ds(S, T), Gr.dt(S, T)
        J = np.stack([a, b], axis=-1)
        proj = _tangent_projection(J, Z)
        normal = float(np.max(np.linalg.norm(Z - proj, axis=-1)))
        z00 = float(np.linalg.norm(self.velocity(r, np.array(0.0), np.array(0.0))))
        z10 = float(np.linalg.norm(self.velocity(r, np.array(1.0), np.array(0.0))))
        return z00, normal, z10


def _tangent_projection(J, Z):
    # J: (..., d, 2), Z: (..., d)
    G = np.swapaxes(J, -1, -2) @ J
    rhs = np.swapaxes(J, -1, -2) @ Z[..., None]
    c = np.linalg.solve(G, rhs)
    return (J @ c)[..., 0]


def make_isotopy(kind: str, base: Square, a: float = 0.15, b: float = 0.15,
                 c: float = 0.2, normal=None) -> IsotopyFamily:
    """Isotopy families used by the surface-law and invariance checks.

    ``in-surface-flow``: ``phi_r(s,t) = (s + r a sin(pi s) cos(pi t),
    t + r b sin(pi t) cos(pi s))``; keeps the image, fixes all four corners.
    ``periodic-flow``: the same shape with frequency ``2 pi``, so loops of
    paths and loops of loops stay closed.
    ``boundary-fixing-flow``: as the first with an extra ``sin(pi s) sin(pi t)``
    factor on both components, so ``Z`` vanishes on the whole boundary.
    ``normal-bump``: pushes the interior off the surface along ``normal``;
    breaks the image condition and serves as a negative control.
    """
    pi = np.pi

    if kind in ("in-surface-flow", "boundary-fixing-flow", "periodic-flow"):
        fix = kind == "boundary-fixing-flow"
        periodic = kind == "periodic-flow"
        w0 = 2 * pi if periodic else pi

        def parts(s, t):
            ss, cs = np.sin(w0 * s), np.cos(w0 * s)
            st, ct = np.sin(w0 * t), np.cos(w0 * t)
            if fix:
                w = ss * st
                dws_s, dws_t = pi * cs * st, pi * ss * ct
                f1, f1s, f1t = a * w * ss * ct, a * (dws_s * ss * ct + w * pi * cs * ct), a * (dws_t * ss * ct - w * ss * pi * st)
                f2, f2s, f2t = b * w * st * cs, b * (dws_s * st * cs - w * st * pi * ss), b * (dws_t * st * cs + w * pi * ct * cs)
            else:
                f1, f1s, f1t = a * ss * ct, a * w0 * cs * ct, -a * w0 * ss * st
                f2, f2s, f2t = b * st * cs, -b * w0 * st * ss, b * w0 * ct * cs
            return f1, f1s, f1t, f2, f2s, f2t

        def flow(r, s, t):
            f1, _, _, f2, _, _ = parts(s, t)
            return s + r * f1, t + r * f2

        def surface(r):
            def point(s, t):
                u, v = flow(r, s, t)
                return base.point(u, v)

            def ds(s, t):
                f1, f1s, f1t, f2, f2s, f2t = parts(s, t)
                u, v = s + r * f1, t + r * f2
                return (base.ds(u, v) * (1 + r * f1s)[..., None]
                        + base.dt(u, v) * (r * f2s)[..., None])

            def dt(s, t):
                f1, f1s, f1t, f2, f2s, f2t = parts(s, t)
                u, v = s + r * f1, t + r * f2
                return (base.ds(u, v) * (r * f1t)[..., None]
                        + base.dt(u, v) * (1 + r * f2t)[..., None])

            keep = fix or periodic
            return Square(point, ds, dt, base.dim, base.loop_s and keep, base.loop_t and keep,
                          name=f"{base.name}|{kind}(r={r:g})")

        def velocity(r, s, t):
            s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
            f1, _, _, f2, _, _ = parts(s, t)
            u, v = s + r * f1, t + r * f2
            return base.ds(u, v) * f1[..., None] + base.dt(u, v) * f2[..., None]

        # monotonicity of the flow in each variable keeps it a diffeomorphism
        if max(abs(a), abs(b)) * w0 * (2 if fix else 1) >= 1:
            raise GeometryError("flow amplitude too large for a diffeomorphism")
        return IsotopyFamily(base, surface, velocity, frozenset({"G1", "G2", "G3"}), kind, flow)

    if kind == "normal-bump":
        d = base.dim
        n = _vec(d, [0, 0, 1] if normal is None else normal)

        def surface(r):
            def point(s, t):
                return base.point(s, t) + (r * c * np.sin(pi * s) * np.sin(pi * t))[..., None] * n

            def ds(s, t):
                return base.ds(s, t) + (r * c * pi * np.cos(pi * s) * np.sin(pi * t))[..., None] * n

            def dt(s, t):
                return base.dt(s, t) + (r * c * pi * np.sin(pi * s) * np.cos(pi * t))[..., None] * n

            return Square(point, ds, dt, d, name=f"{base.name}|bump(r={r:g})")

        def velocity(r, s, t):
            s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
            return (c * np.sin(pi * s) * np.sin(pi * t))[..., None] * n

        return IsotopyFamily(base, surface, velocity, frozenset({"G1", "G3"}), kind)

    raise GeometryError(f"unknown isotopy kind {kind!r}")


def invert_flow(family: IsotopyFamily, r, s, t, iters=50):
    """Newton inversion of an in-surface flow: find ``(s0, t0)`` with ``phi_r(s0,t0) = (s,t)``."""
    if family.flow is None:
        raise GeometryError("family has no in-surface flow")
    s0, t0 = np.array(s, float), np.array(t, float)
    h = 1e-7
    for _ in range(iters):
        u, v = family.flow(r, s0, t0)
        ru, rv = u - s, v - t
        us, vs = [(a - b) / (2 * h) for a, b in zip(family.flow(r, s0 + h, t0), family.flow(r, s0 - h, t0))]
        ut, vt = [(a - b) / (2 * h) for a, b in zip(family.flow(r, s0, t0 + h), family.flow(r, s0, t0 - h))]
        det = us * vt - ut * vs
        s0 = s0 - (vt * ru - ut * rv) / det
        t0 = t0 - (-vs * ru + us * rv) / det
        if max(np.max(np.abs(ru)), np.max(np.abs(rv))) < 1e-15:
            break
    return s0, t0
