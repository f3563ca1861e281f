"""Experiment dispatch: one handler per subcommand, run over the grid schedule."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .catalog import random_gauge_map
from .chen import curvature_terms, flatness_check, small_square_oracle
from .config import ConfigError, Setup, build, config_hash
from .geom import make_isotopy, smooth_field
from .liealg import unitarity_defect
from .observables import ObservableSpec, action_values, evaluate
from .fields import act_gauge, zero_form
from .pathspace import H_map, SpecialConnection, hol_AB, tautological_check
from .report import Check, Report, add_ratios
from .transport import frame_factor, transport_A
from .variations import (dHol_connection, dTrHol_aut, cylinder_variation, random_aut_field,
                         rotation_field, surface_law_check, symmetry_direction,
                         symmetry_variation)

HANDLERS = {}


def handler(name):
    def deco(fn):
        HANDLERS[name] = fn
        return fn
    return deco


def _map(fn, items, workers):
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def _need(obj, what, kind):
    if obj is None:
        raise ConfigError(f"{kind} needs a {what}")
    return obj


def run_experiment(config: dict, workers: int = 1) -> Report:
    """Run the configured experiment; deterministic for a given config."""
    setup = build(config)
    kind = setup.config["experiment"]
    t0 = time.perf_counter()
    rows, checks, meta = HANDLERS[kind](setup, max(1, int(workers)))
    rep = Report(kind, config_hash(setup.config), __version__, rows, checks, meta)
    rep.wall_clock = time.perf_counter() - t0
    return rep


def _row(Ns, Nt, value, residual, error_estimate, **extra):
    return {"Ns": int(Ns), "Nt": int(Nt), "value": complex(value),
            "residual": None if residual is None else float(residual),
            "error_estimate": None if error_estimate is None else float(error_estimate), **extra}


# ----------------------------------------------------------------- handlers

@handler("wilson")
def _wilson(s: Setup, workers):
    path = _need(s.path, "path", "wilson")

    def level(g):
        res = transport_A(s.A, path, g[0], richardson=True)
        return _row(g[0], g[1], np.trace(res.value), res.error_estimate, res.error_estimate)

    rows = add_ratios(_map(level, s.grids, workers))
    checks = [Check("error_estimate", rows[-1]["error_estimate"], s.tol("error_estimate", 1e-6))]
    return rows, checks, {"residual": "Richardson estimate of the transport error",
                          "closed": bool(path.loop)}


@handler("surface")
def _surface(s: Setup, workers):
    G = _need(s.square, "square", "surface")
    conn = SpecialConnection(s.A, s.B, s.eta)
    loop = bool(s.options.get("holonomy", False))

    def level(g):
        if loop:
            val = hol_AB(conn, G, g[0], g[1], workers=1).value
            coarse = hol_AB(conn, G, g[0] // 2, g[1] // 2).value
            err = float(np.linalg.norm(coarse - val)) / 3
        else:
            res = H_map(conn, G, g[0], g[1], richardson=True)
            val, err = res.value, res.error_estimate
        return _row(g[0], g[1], np.trace(val), err, err, matrix=val)

    rows = add_ratios(_map(level, s.grids, workers))
    checks = [Check("error_estimate", rows[-1]["error_estimate"], s.tol("error_estimate", 1e-5))]
    return rows, checks, {"residual": "Richardson estimate", "holonomy": loop}


@handler("stokes-check")
def _stokes(s: Setup, workers):
    G = _need(s.square, "square", "stokes-check")

    def level(g):
        gap, H, W = tautological_check(s.A, G, g[0], g[1])
        return _row(g[0], g[1], np.trace(H), gap, gap / 3, boundary_trace=complex(np.trace(W)))

    rows = add_ratios(_map(level, s.grids, workers))
    checks = [Check("residual", rows[-1]["residual"], s.tol("residual", 1e-5))]
    lo, hi = s.tol("ratio_low", 3.5), s.tol("ratio_high", 4.5)
    for i, row in enumerate(rows[1:], 1):
        if row["ratio"] is not None:
            checks.append(Check(f"ratio[{i}]", row["ratio"], lo, "in", hi))
    return rows, checks, {"residual": "|H_(A,-F) - Hol_A(boundary)|"}


@handler("curvature")
def _curvature(s: Setup, workers):
    gamma = _need(s.path, "path", "curvature")
    ts = int(s.options.get("tangent_seed", s.seed))
    X = smooth_field(s.dim, ts, s.options.get("tangent_amplitude", 0.3))
    Y = smooth_field(s.dim, ts + 1, s.options.get("tangent_amplitude", 0.3))

    def level(g):
        terms = curvature_terms(s.A, s.B, gamma, X, Y, g[1])
        total = sum(terms.values())
        return _row(g[0], g[1], np.trace(total @ total.conj().T), None, None,
                    terms=terms, total=total)

    rows = _map(level, s.grids, workers)
    for prev, row in zip([None] + rows, rows):
        if prev is not None:
            d = float(np.linalg.norm(row["total"] - prev["total"]))
            row["residual"], row["error_estimate"] = d, d / 3
    add_ratios(rows)
    checks = []
    if len(rows) > 1:
        checks.append(Check("error_estimate", rows[-1]["error_estimate"], s.tol("error_estimate", 1e-6)))
    meta = {"tangent_seed": ts, "value": "Tr(Omega Omega^dagger)",
            "residual": "change of the curvature from the previous grid"}
    if s.options.get("small_square", False):
        eps = tuple(s.options.get("eps", (0.1, 0.05, 0.025)))
        orc = small_square_oracle(s.A, s.B, gamma, X, Y, eps)
        meta["small_square"] = {"eps": list(eps), "errors": orc["errors"], "orders": orc["orders"]}
        checks.append(Check("small_square_order", min(orc["orders"]), s.tol("min_order", 0.8), ">="))
    return rows, checks, meta


@handler("variation")
def _variation(s: Setup, workers):
    kind = s.options.get("kind", "connection")
    seed = s.seed

    def level(g):
        Ns, Nt = g
        if kind == "connection":
            rep = dHol_connection(s.A, _need(s.path, "path", kind), _need(s.eta, "eta", kind), Ns)
        elif kind == "aut":
            Z = (rotation_field(s.dim, tuple(s.options.get("axes", (0, 1))))
                 if s.options.get("field") == "rotation" else random_aut_field(s.spec, s.dim, seed))
            rep = dTrHol_aut(s.A, _need(s.path, "path", kind), Z, Ns)
        elif kind == "cylinder":
            Z = random_aut_field(s.spec, s.dim, seed)
            rep = cylinder_variation(s.A, s.B, _need(s.square, "square", kind), Z, Ns, Nt)
        elif kind == "symmetry":
            G = _need(s.square, "square", kind)
            eta = _need(s.eta, "eta", kind)
            action = s.options.get("action")
            if action:
                (e, b), curve = symmetry_direction(action, s.A, s.B, eta)
                rep = symmetry_variation(s.A, s.B, G, e, b, Ns, Nt, curve=curve)
            else:
                beta = s.beta if s.beta is not None else zero_form(2, s.dim, s.spec.N)
                rep = symmetry_variation(s.A, s.B, G, eta, beta, Ns, Nt)
        elif kind == "surface-law":
            fam = make_isotopy(s.options.get("isotopy", "in-surface-flow"),
                               _need(s.square, "square", kind))
            res = surface_law_check(s.A, _need(s.eta, "eta", kind), s.B, fam,
                                    s.options.get("mode", "two-parameter"), Ns, Nt)
            return _row(Ns, Nt, res["norm"], res["norm"], res["grid_error"],
                        order=res["order"], mixed_partial=res["mixed_partial"])
        else:
            raise ConfigError(f"unknown variation kind {kind!r}")
        errs = [v for v in (rep.fd_error, rep.grid_error) if np.isfinite(v)]
        value = rep.analytic if np.ndim(rep.analytic) == 0 else np.linalg.norm(rep.analytic)
        return _row(Ns, Nt, value, rep.discrepancy, max(errs) if errs else None,
                    analytic=rep.analytic, fd=rep.fd)

    rows = add_ratios(_map(level, s.grids, workers))
    Ns = rows[-1]["Ns"]
    default = 1e-5 if kind == "surface-law" else 1e-6 + 10.0 / Ns ** 2
    checks = [Check("discrepancy" if kind != "surface-law" else "mixed_partial",
                    rows[-1]["residual"], s.tol("discrepancy", default),
                    "<=" if not s.options.get("expect_nonzero") else ">=")]
    return rows, checks, {"kind": kind, "residual": "analytic vs Richardson FD"}


@handler("observe")
def _observe(s: Setup, workers):
    G = _need(s.square, "square", "observe")
    specs = [ObservableSpec(o.get("kind", "O_alphabeta"), o.get("alpha", 0.0), o.get("beta", 0.0))
             for o in s.options.get("observables", [{"kind": "O_alphabeta", "alpha": -1.0}])]
    samples = int(s.options.get("gauge_samples", 2))
    gauges = [random_gauge_map(s.spec, s.dim, s.seed + i) for i in range(samples)]

    rich = bool(s.options.get("richardson", False))

    def value(spec, A, B, Ns, Nt):
        v = evaluate(spec, A, B, G, None, Ns, Nt)
        if rich:
            v = (4 * v - evaluate(spec, A, B, G, None, Ns // 2, Nt // 2)) / 3
        return v

    def level(item):
        (Ns, Nt), spec = item
        val = value(spec, s.A, s.B, Ns, Nt)
        gap = 0.0
        for g in gauges:
            A2, B2 = act_gauge(s.A, s.B, g)
            gap = max(gap, abs(value(spec, A2, B2, Ns, Nt) - val))
        return _row(Ns, Nt, val, gap, gap, observable=spec.kind, alpha=spec.alpha, beta=spec.beta)

    rows = _map(level, [(g, sp) for sp in specs for g in s.grids], workers)
    for r in rows:
        r["ratio"] = None
    checks = [Check("gauge_residual", max(r["residual"] for r in rows), s.tol("gauge_residual", 1e-7))]
    meta = {"residual": "max change under random gauge maps", "gauge_samples": samples,
            "richardson": rich}
    if s.options.get("actions", False):
        meta["actions"] = action_values(s.A, s.B, s.eta, n=int(s.options.get("quadrature_n", 16)),
                                        workers=workers)
    return rows, checks, meta


@handler("flatness")
def _flatness(s: Setup, workers):
    rng = np.random.default_rng(s.seed)

    def level(g):
        if s.square is not None:
            u = np.linspace(0, 1, g[0] + 1)
            S, T = np.meshgrid(u, np.linspace(0, 1, g[1] + 1), indexing="ij")
            pts = s.square.point(S, T).reshape(-1, s.dim)
        elif s.path is not None:
            pts = s.path.point(np.linspace(0, 1, g[0] + 1))
        else:
            pts = rng.uniform(-1, 1, (g[0], s.dim))
        f, dab, cart = flatness_check(s.A, s.B, s.spec, pts)
        return _row(g[0], g[1], f, max(f, dab), None, curvature=f, dAB=dab, cartan=cart)

    rows = _map(level, s.grids, workers)
    for r in rows:
        r["ratio"] = None
    checks = [Check("flatness", max(r["curvature"] for r in rows), s.tol("flatness", 1e-8))]
    if "dAB" in s.config.get("tolerances", {}):
        checks.append(Check("dAB", max(r["dAB"] for r in rows), s.tol("dAB", 0)))
    if "cartan" in s.config.get("tolerances", {}):
        checks.append(Check("cartan", max(r["cartan"] for r in rows), s.tol("cartan", 0)))
    return rows, checks, {"residual": "max(|F_A|, |d_A B|) over samples"}


@handler("converge")
def _converge(s: Setup, workers):
    path = _need(s.path, "path", "converge")
    ref_N = int(s.options.get("reference_steps", 4 * max(g[0] for g in s.grids)))
    ref = transport_A(s.A, path, ref_N).value

    def level(g):
        val = transport_A(s.A, path, g[0]).value
        err = float(np.linalg.norm(val - ref))
        return _row(g[0], g[1], np.trace(val), err, err / 3)

    rows = add_ratios(_map(level, s.grids, workers))
    checks = []
    lo, hi = s.tol("ratio_low", 3.5), s.tol("ratio_high", 4.5)
    for i, row in enumerate(rows[1:], 1):
        if row["ratio"] is not None:
            checks.append(Check(f"ratio[{i}]", row["ratio"], lo, "in", hi))
    long_steps = int(s.options.get("long_steps", 10000))
    drift = unitarity_defect(frame_factor(s.A, path, long_steps)[-1])
    checks.append(Check("unitarity_drift", drift, s.tol("unitarity", 1e-8)))
    return rows, checks, {"residual": f"|Hol_N - Hol_{ref_N}|", "long_steps": long_steps,
                          "unitarity_drift": drift}
