"""Command-line harness: gen, energy, project, lattice, corona, capacity, verify, plot.

Exit codes: 0 success, 1 a checked assertion failed, 2 usage or input error.
Every JSON output carries the fully resolved config under "config".
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import _parallel
from .measures import DiscreteMeasure, min_pairwise_distance

SCHEMA = 1


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- helpers

def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}")
    if not isinstance(obj, dict):
        raise UsageError("config must be a JSON object")
    return obj


def resolve(command, defaults, args):
    """defaults < config file < explicit flags; unknown config keys are rejected."""
    cfg = dict(defaults)
    file_cfg = _load_config(getattr(args, "config", None))
    unknown = sorted(set(file_cfg) - set(defaults))
    if unknown:
        raise UsageError(f"unknown config fields for {command}: {unknown}")
    cfg.update(file_cfg)
    for key in defaults:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg["command"] = command
    cfg["schema"] = SCHEMA
    return cfg


def _measure(path):
    if path is None:
        raise UsageError("--measure is required")
    if not os.path.exists(path):
        raise UsageError(f"measure file not found: {path}")
    return DiscreteMeasure.from_csv(path)


def _pair(text):
    try:
        lo, hi = (float(t) for t in str(text).split(","))
    except ValueError:
        raise UsageError(f"expected 'lo,hi', got {text!r}")
    return [lo, hi]


def _interval(v):
    from .grassmann import AngularInterval

    lo, hi = _pair(v) if isinstance(v, str) else v
    return AngularInterval(lo, hi)


def _cone(v):
    from .grassmann import Cone

    if v is None:
        raise UsageError("--cone is required")
    obj = json.loads(v) if isinstance(v, str) else v
    return Cone.from_json(obj)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_gen(args):
    from . import measures as m

    cfg = resolve("gen", {"kind": None, "k": 3, "num_atoms": 100, "d": 2, "slope": 1.0,
                          "seed": 0, "endpoints": [[0.0, 0.0], [1.0, 0.0]]}, args)
    kind = cfg["kind"]
    if kind == "cantor":
        mu = m.generate_cantor4(int(cfg["k"]))
    elif kind == "segment":
        mu = m.generate_segment(cfg["endpoints"], int(cfg["num_atoms"]))
    elif kind == "box":
        mu = m.generate_random_box(int(cfg["num_atoms"]), int(cfg["d"]), int(cfg["seed"]))
    elif kind == "mixture":
        mu = m.generate_gaussian_mixture(int(cfg["num_atoms"]), int(cfg["seed"]), d=int(cfg["d"]))
    elif kind == "graph":
        mu = m.generate_lipschitz_graph(int(cfg["num_atoms"]), slope_bound=float(cfg["slope"]),
                                        seed=int(cfg["seed"]), dim=int(cfg["d"]))
    elif kind == "grid":
        mu = m.generate_plane_grid(int(cfg["num_atoms"]), d=int(cfg["d"]))
    else:
        raise UsageError(f"unknown generator {kind!r}")
    if args.out:
        mu.to_csv(args.out)
        _emit({"config": cfg, "result": {"atoms": len(mu), "mass": float(mu.weights.sum()),
                                         "path": args.out}})
    else:
        sys.stdout.write(mu.to_csv())
    return 0


def cmd_energy(args):
    from . import energies as e
    from .measures import Ball

    cfg = resolve("energy", {"kind": None, "measure": None, "eps": 0.01, "n": 1, "cone": None,
                             "lower": None, "upper": None, "window": None}, args)
    mu = _measure(cfg["measure"])
    kind, eps, n = cfg["kind"], float(cfg["eps"]), int(cfg["n"])
    if kind == "curvature":
        rep = e.curvature(mu, eps)
    elif kind == "cauchy":
        rep = e.cauchy_energy(mu, eps)
    elif kind == "riesz":
        rep = e.riesz_energy(mu, n, eps)
    elif kind == "conical":
        rep = e.conical_energy(mu, _cone(cfg["cone"]), n, eps)
    elif kind == "banded":
        lower = float(cfg["lower"] if cfg["lower"] is not None else eps)
        upper = float(cfg["upper"] if cfg["upper"] is not None else math.inf)
        win = None
        if cfg["window"] is not None:
            w = json.loads(cfg["window"]) if isinstance(cfg["window"], str) else cfg["window"]
            win = Ball(np.asarray(w["center"], dtype=float), float(w["radius"]))
        rep = e.banded_conical_energy(mu, _cone(cfg["cone"]), n, lower, upper, win)
    elif kind == "melnikov":
        r = e.melnikov_residual(mu, eps)
        _emit({"config": cfg, "method": "melnikov",
               "result": {"residual": r.residual, "cauchy": r.cauchy, "curvature": r.curvature,
                          "growth_constant": r.growth_constant, "mass": r.mass,
                          "normalized": r.normalized}})
        return 0
    else:
        raise UsageError(f"unknown energy {kind!r}")
    _emit({"config": cfg, "method": kind, "result": rep.to_json()})
    return 0


def cmd_project(args):
    from . import projection as p
    from .grassmann import GrassmannBall, Subspace

    cfg = resolve("project", {"kind": None, "measure": None, "interval": [0.0, math.pi / 2],
                              "eps": 0.01, "nodes": p.DEFAULT_THETA_NODES,
                              "radial_nodes": p.DEFAULT_RADIAL_NODES,
                              "angular_nodes": p.DEFAULT_ANGULAR_NODES, "center": None,
                              "radius": 0.3, "samples": 2000, "seed": 0, "lambda": 2.0}, args)
    mu = _measure(cfg["measure"])
    moll = p.MollifierSpec(float(cfg["eps"]))
    kind = cfg["kind"]
    rng = np.random.default_rng(int(cfg["seed"]))
    if kind in ("interval", "fourier", "kernel", "profile"):
        I = _interval(cfg["interval"])
        cfg["interval"] = [I.lo, I.hi]
    if kind == "interval":
        res = p.directional_energy_interval(mu, I, moll, int(cfg["nodes"])).to_json()
    elif kind == "fourier":
        res = p.fourier_cone_energy(mu, I, moll, int(cfg["radial_nodes"]),
                                    int(cfg["angular_nodes"])).to_json()
    elif kind == "kernel":
        res = p.cone_kernel_energy_smoothed(mu, I, moll, int(cfg["radial_nodes"]),
                                            int(cfg["angular_nodes"])).to_json()
    elif kind == "profile":
        pe = p.directional_energy_interval(mu, I, moll, int(cfg["nodes"]))
        _write_text(p.profile_csv(pe.nodes, pe.node_values), args.out)
        return 0
    elif kind in ("ball", "reverse"):
        center = cfg["center"]
        if center is None:
            V0 = Subspace.coordinate(mu.dim, [0])
        else:
            V0 = Subspace.from_json(json.loads(center) if isinstance(center, str) else center)
        cfg["center"] = V0.to_json()
        if kind == "ball":
            res = p.grassmann_ball_energy(mu, GrassmannBall(V0, float(cfg["radius"])), moll,
                                          int(cfg["samples"]), rng).to_json()
        else:
            res = p.reverse_inequality_report(mu, V0, float(cfg["radius"]), moll,
                                              float(cfg["lambda"]), int(cfg["samples"]),
                                              rng).to_json()
    else:
        raise UsageError(f"unknown projection command {kind!r}")
    _emit({"config": cfg, "result": res}, args.out)
    return 0


def cmd_lattice(args):
    from .lattice import build_lattice, invariant_report, level_stats_csv

    cfg = resolve("lattice", {"action": None, "measure": None, "A0": 8.0, "C0": 2.0,
                              "k_max": 12}, args)
    mu = _measure(cfg["measure"])
    lat = build_lattice(mu, float(cfg["A0"]), float(cfg["C0"]), int(cfg["k_max"]))
    if cfg["action"] == "stats":
        _write_text(level_stats_csv(lat), args.out)
        return 0
    if cfg["action"] != "build":
        raise UsageError(f"unknown lattice action {cfg['action']!r}")
    rep = invariant_report(lat)
    _emit({"config": cfg, "invariants": rep, "lattice": lat.to_json()}, args.out)
    exact = rep["partition"] and rep["nesting"] and rep["ball28"] and rep["disjoint5B"]
    return 0 if exact else 1


CORONA_DEFAULTS = {"A": 20.0, "tau": 0.05, "eps_stop": 0.002, "eta": 0.05, "M": 8.0, "t": 40.0,
                   "Lambda0": 60.0}


def cmd_corona(args):
    from .corona import (CoronaParams, build_forest, packing_report, tree_checks,
                         verify_corona_properties)
    from .lattice import build_lattice
    from .plot import corona_svg

    cfg = resolve("corona", {"action": None, "measure": None, "cone": None, "params": None,
                             "A0": 8.0, "C0": 2.0, "k_max": 12, "packing_eps": None,
                             "tol": 1e-9, "out_dir": None}, args)
    if cfg["action"] != "run":
        raise UsageError(f"unknown corona action {cfg['action']!r}")
    mu = _measure(cfg["measure"])
    cone = _cone(cfg["cone"])
    cfg["cone"] = cone.to_json()
    pvals = dict(CORONA_DEFAULTS)
    if cfg["params"] is not None:
        extra = cfg["params"] if isinstance(cfg["params"], dict) else _load_config(cfg["params"])
        unknown = sorted(set(extra) - set(CORONA_DEFAULTS))
        if unknown:
            raise UsageError(f"unknown corona parameters: {unknown}")
        pvals.update(extra)
    cfg["params"] = pvals
    params = CoronaParams(cone=cone, **{k: float(v) for k, v in pvals.items()})
    lat = build_lattice(mu, float(cfg["A0"]), float(cfg["C0"]), int(cfg["k_max"]))
    forest = build_forest(lat, params)
    eps = cfg["packing_eps"]
    if eps is None:
        gap = min_pairwise_distance(mu)
        eps = 0.5 * gap if math.isfinite(gap) else 1.0
    cfg["packing_eps"] = float(eps)
    pr = packing_report(forest, cone, float(eps))
    checks = [tree_checks(forest, r) for r in forest.roots]
    items = verify_corona_properties(forest, float(cfg["tol"]))
    ok = all(c["stop_disjoint"] and c["bce_ok"] and c["slope_ratio"] <= 1.0 for c in checks)
    summary = {"config": cfg, "packing": pr.to_json(), "layers": [len(l) for l in forest.top],
               "exact_checks_passed": ok}
    out_dir = cfg["out_dir"] or args.out
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _emit({"config": cfg, "forest": forest.to_json()}, os.path.join(out_dir, "forest.json"))
        _emit(pr.to_json(), os.path.join(out_dir, "packing.json"))
        with open(os.path.join(out_dir, "verification.csv"), "w", encoding="utf-8") as fh:
            keys = ["root", "a_fraction", "b_max_ratio", "c_max_ratio", "ld_mass", "ld_bound",
                    "bce_mass", "bce_bound", "slope_ratio", "id"]
            fh.write(",".join(keys) + "\n")
            for c, v in zip(checks, items):
                row = {**c, **v}
                fh.write(",".join(repr(row[k]) if isinstance(row[k], float) else str(row[k])
                                  for k in keys) + "\n")
        with open(os.path.join(out_dir, "corona.svg"), "w", encoding="utf-8") as fh:
            fh.write(corona_svg(forest))
    _emit(summary)
    return 0 if ok else 1


def cmd_capacity(args):
    from .capacity import favard_table_csv, theorem1_certificate
    from .projection import MollifierSpec

    cfg = resolve("capacity", {"action": None, "measure": None, "interval": [0.9, 1.2],
                               "eps": 0.005, "r_min": None, "delta": 1e-3, "num_theta": 720,
                               "nodes": 64}, args)
    mu = _measure(cfg["measure"])
    if cfg["action"] == "favard":
        _write_text(favard_table_csv(mu, float(cfg["delta"]), int(cfg["num_theta"])), args.out)
        return 0
    if cfg["action"] != "bound":
        raise UsageError(f"unknown capacity action {cfg['action']!r}")
    I = _interval(cfg["interval"])
    cfg["interval"] = [I.lo, I.hi]
    r_min = cfg["r_min"]
    if r_min is None:
        gap = min_pairwise_distance(mu)
        r_min = gap if math.isfinite(gap) else 1.0
    cfg["r_min"] = float(r_min)
    cert = theorem1_certificate(mu, I, MollifierSpec(float(cfg["eps"])), float(r_min),
                                num_theta_nodes=int(cfg["nodes"]))
    _emit({"config": cfg, "certificate": cert.to_json()}, args.out)
    sys.stderr.write(
        f"lower bound {cert.lower_bound:.6g} (absolute constant set to 1)\n"
        f"retained mass {cert.retained_mass:.6g} of {cert.mass:.6g}, "
        f"{cert.doublings} threshold doubling(s)\n"
        f"sigma growth {cert.sigma_growth:.6g}, energy/mass {cert.energy_over_mass:.6g}\n"
        f"{'success' if cert.success else 'FAILED: sigma growth or retained mass out of range'}\n")
    return 0 if cert.success else 1


def cmd_verify(args):
    from . import verify

    name = args.suite
    if name != "all" and name not in verify.SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from all, {', '.join(verify.SUITES)}")
    results = verify.run(name, int(args.seed or 0))
    text = verify.report_json(results) + "\n"
    _write_text(text, args.out)
    return 0 if all(r.passed for r in results) else 1


def cmd_plot(args):
    from . import plot
    from .projection import MollifierSpec, directional_energy_interval

    cfg = resolve("plot", {"kind": None, "measure": None, "input": None,
                           "interval": [0.0, math.pi], "eps": 0.01, "nodes": 64,
                           "levels": [2, 3, 4, 5]}, args)
    kind = cfg["kind"]
    if args.out is None:
        raise UsageError("--out is required for plot")
    if kind == "profile":
        if cfg["input"] is not None:
            if not os.path.exists(cfg["input"]):
                raise UsageError(f"input not found: {cfg['input']}")
            data = np.loadtxt(cfg["input"], delimiter=",", skiprows=1, ndmin=2)
            svg = plot.profile_svg(data[:, 0], data[:, 1]) if data.size else plot.empty_svg()
        else:
            mu = _measure(cfg["measure"])
            if len(mu.support) == 0:
                svg = plot.empty_svg("projection energy profile")
            else:
                pe = directional_energy_interval(mu, _interval(cfg["interval"]),
                                                 MollifierSpec(float(cfg["eps"])), int(cfg["nodes"]))
                svg = plot.profile_svg(pe.nodes, pe.node_values)
    elif kind == "corona":
        from .corona import CoronaParams, build_forest
        from .grassmann import Cone, Subspace
        from .lattice import build_lattice

        mu = _measure(cfg["measure"])
        if len(mu.support) == 0:
            svg = plot.empty_svg("corona layers")
        else:
            from . import calibration as cal

            lat = build_lattice(mu, cal.CORONA_A0, cal.CORONA_C0)
            cone = Cone(Subspace.line(math.pi / 4), cal.CORONA_APERTURE)
            svg = plot.corona_svg(build_forest(lat, CoronaParams(cone)))
    elif kind == "packing":
        from .verify import corona_values

        vals = corona_values()
        ks = [k for k in cfg["levels"] if k in vals]
        svg = plot.packing_svg(ks, [vals[k]["packing"] for k in ks])
    else:
        raise UsageError(f"unknown plot kind {kind!r}")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    return 0


# ------------------------------------------------------------------ parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, help="kernel threads (default $GMTKIT_THREADS or 1)")
    common.add_argument("--seed", type=int, help="seed for every random stream")
    common.add_argument("--config", help="JSON file of parameters")
    common.add_argument("--out", help="output path (stdout if omitted)")

    parser = argparse.ArgumentParser(prog="gmtkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a measure CSV")
    p.add_argument("kind", choices=["cantor", "segment", "box", "mixture", "graph", "grid"])
    p.add_argument("--k", type=int)
    p.add_argument("--num-atoms", dest="num_atoms", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--slope", type=float)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("energy", parents=[common], help="kernel energies of a measure")
    p.add_argument("kind", choices=["curvature", "cauchy", "riesz", "conical", "banded",
                                    "melnikov"])
    p.add_argument("--measure")
    p.add_argument("--eps", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--cone", help='JSON, e.g. {"subspace": [[1, 0]], "aperture": 0.3}')
    p.add_argument("--lower", type=float)
    p.add_argument("--upper", type=float)
    p.add_argument("--window", help='JSON {"center": [...], "radius": r}')
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("project", parents=[common], help="projection energies")
    p.add_argument("kind", choices=["interval", "fourier", "kernel", "profile", "ball", "reverse"])
    p.add_argument("--measure")
    p.add_argument("--interval", help="lo,hi in radians")
    p.add_argument("--eps", type=float)
    p.add_argument("--nodes", type=int)
    p.add_argument("--radial-nodes", dest="radial_nodes", type=int)
    p.add_argument("--angular-nodes", dest="angular_nodes", type=int)
    p.add_argument("--center", help="JSON list of basis columns of V0")
    p.add_argument("--radius", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--lambda", dest="lambda", type=float)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("lattice", parents=[common], help="cube lattice")
    p.add_argument("action", choices=["build", "stats"])
    p.add_argument("--measure")
    p.add_argument("--A0", dest="A0", type=float)
    p.add_argument("--C0", dest="C0", type=float)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("corona", parents=[common], help="corona decomposition")
    p.add_argument("action", choices=["run"])
    p.add_argument("--measure")
    p.add_argument("--cone")
    p.add_argument("--params", help="JSON file of corona parameters")
    p.add_argument("--A0", dest="A0", type=float)
    p.add_argument("--C0", dest="C0", type=float)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--packing-eps", dest="packing_eps", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_corona)

    p = sub.add_parser("capacity", parents=[common], help="capacity certificate, Favard table")
    p.add_argument("action", choices=["bound", "favard"])
    p.add_argument("--measure")
    p.add_argument("--interval")
    p.add_argument("--eps", type=float)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--num-theta", dest="num_theta", type=int)
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", parents=[common], help="SVG figures")
    p.add_argument("kind", choices=["profile", "corona", "packing"])
    p.add_argument("--measure")
    p.add_argument("--input", help="profile CSV (theta,energy)")
    p.add_argument("--interval")
    p.add_argument("--eps", type=float)
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _parallel.set_threads(args.threads)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"gmtkit: {exc}\n")
        return 2
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"gmtkit: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
