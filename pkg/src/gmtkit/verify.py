"""Named verification suites with machine-readable reports.

Every suite is deterministic given its seed. Suites that compare against
frozen calibration constants use fixed corpora and ignore the seed.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import calibration as cal
from . import naive
from .capacity import (favard_estimate, favard_inequality_check, theorem1_certificate,
                       theorem2_certificate)
from .corona import (CoronaParams, build_forest, packing_report, tree_checks,
                     verify_corona_properties)
from .energies import (banded_conical_energy, cauchy_energy, conical_energy, curvature,
                       melnikov_residual, riesz_energy)
from .grassmann import (AngularInterval, Cone, GrassmannBall, Subspace,
                        grassmann_ball_volume_chart, grassmann_metric, lift_isometry,
                        random_rotation, rotation_2d, sample_uniform_subspace)
from .lattice import build_lattice, invariant_report
from .measures import (Ball, DiscreteMeasure, generate_cantor4, generate_gaussian_mixture,
                       generate_lipschitz_graph, generate_random_box, generate_segment,
                       min_pairwise_distance, total_mass)
from .projection import (MollifierSpec, cone_kernel_energy_smoothed, directional_energy_interval,
                         fourier_cone_energy, projection_l2_energy, reverse_inequality_report)


@dataclass
class Check:
    name: str
    value: float | None
    bound: float | None
    passed: bool

    def to_json(self):
        return {"name": self.name, "value": self.value, "bound": self.bound,
                "passed": bool(self.passed)}


@dataclass
class SuiteResult:
    name: str
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, value, bound, passed):
        v = None if value is None else float(value)
        b = None if bound is None else float(bound)
        self.checks.append(Check(name, v, b, bool(passed)))

    def to_json(self):
        return {"suite": self.name, "seed": self.seed, "passed": self.passed,
                "checks": [c.to_json() for c in self.checks]}


def _rel(a, b):
    den = max(abs(a), abs(b))
    return abs(a - b) / den if den > 0 else 0.0


# ------------------------------------------------------------------ corpora

def melnikov_corpus():
    """The 20 fixed measures used to calibrate the Melnikov constant."""
    out = []
    for k in range(1, 5):
        out.append((f"cantor{k}", generate_cantor4(k), 4.0 ** -k))
    for s in range(8):
        out.append((f"box{s}", generate_random_box(30 + 5 * s, 2, 100 + s), 0.02))
    for s in range(4):
        out.append((f"mixture{s}", generate_gaussian_mixture(40, 200 + s), 0.02))
    for s in range(4):
        out.append((f"graph{s}", generate_lipschitz_graph(60, slope_bound=0.5 + 0.5 * s,
                                                          seed=300 + s), 0.01))
    return out


def corona_fixture(k):
    mu = generate_cantor4(k)
    lat = build_lattice(mu, A0=cal.CORONA_A0, C0=cal.CORONA_C0)
    cone = Cone(Subspace.line(math.pi / 4), cal.CORONA_APERTURE)
    params = CoronaParams(cone)
    return lat, params, build_forest(lat, params)


def segment_fixture(num_atoms=100):
    return generate_segment([[0.0, 0.0], [1.0, 0.0]], num_atoms)


def reverse_fixture():
    seg = segment_fixture(100)
    return reverse_inequality_report(seg, Subspace.line(0.0), cal.REVERSE_S,
                                     MollifierSpec(cal.REVERSE_EPS), cal.REVERSE_LAMBDA,
                                     num_samples=cal.REVERSE_SAMPLES,
                                     rng=np.random.default_rng(cal.REVERSE_SEED))


# ------------------------------------------------------------------- suites

FOURIER_INTERVALS = [(0.2, 0.7), (1.0, 1.9), (2.5, 3.3)]


def suite_fourier_identity(seed=0):
    res = SuiteResult("fourier-identity", seed)
    t0 = time.perf_counter()
    moll = MollifierSpec(0.05)
    worst_dir = worst_ker = 0.0
    for i, n_atoms in enumerate([8, 12, 16, 20, 20]):
        mu = generate_gaussian_mixture(n_atoms, seed * 1000 + i)
        for lo, hi in FOURIER_INTERVALS:
            I = AngularInterval(lo, hi)
            a = directional_energy_interval(mu, I.perp(), moll).value
            b = fourier_cone_energy(mu, I, moll).value
            c = cone_kernel_energy_smoothed(mu, I, moll).value
            worst_dir = max(worst_dir, _rel(a, b))
            worst_ker = max(worst_ker, _rel(b, c))
    res.add("directional_vs_fourier_max_rel", worst_dir, 0.01, worst_dir < 0.01)
    res.add("kernel_vs_fourier_max_rel", worst_ker, 1e-10, worst_ker < 1e-10)
    res.add("runtime_under_60s", None, 60.0, time.perf_counter() - t0 < 60.0)
    return res


def cone_case(seed, i):
    rng = np.random.default_rng([seed, i])
    N = int(rng.integers(3, 51))
    mu = generate_random_box(N, 2, [seed, i, 1])
    lo = rng.uniform(0.0, math.pi)
    I = AngularInterval(lo, lo + rng.uniform(0.2, 1.5))
    return mu, I


def suite_cone_inequality(seed=0):
    res = SuiteResult("cone-inequality", seed)
    ok = 0
    worst = 0.0
    for i in range(100):
        mu, I = cone_case(seed, i)
        eps = min_pairwise_distance(mu)
        lhs = conical_energy(mu, Cone.from_interval(I), 1, eps).value
        rhs = directional_energy_interval(mu, I.perp(), MollifierSpec(eps / 10.0)).value
        ok += lhs <= rhs * (1 + 1e-6)
        worst = max(worst, lhs / rhs)
    res.add("cases_passing", ok, 100, ok == 100)
    res.add("max_conical_over_directional", worst, 1 + 1e-6, worst <= 1 + 1e-6)
    return res


def melnikov_values():
    vals = []
    for label, mu, eps in melnikov_corpus():
        r = melnikov_residual(mu, eps)
        vals.append((label, r.residual / r.mass if r.mass else 0.0, r.growth_constant, r.normalized))
    return vals


def suite_melnikov(seed=0):
    res = SuiteResult("melnikov", seed)
    worst = 0.0
    for label, _, _, norm in melnikov_values():
        worst = max(worst, norm)
        res.add(f"{label}_normalized_residual", norm, cal.MELNIKOV_K, norm <= cal.MELNIKOV_K)
    res.add("max_normalized_residual", worst, cal.MELNIKOV_K, worst <= cal.MELNIKOV_K)
    return res


def oracle_inputs(seed):
    """20 seeded (measure, cone) pairs; triples stay small for the loop oracle."""
    out = []
    for i in range(20):
        rng = np.random.default_rng([seed, 40, i])
        d = 2 if i < 14 else 3
        N = int(rng.integers(5, 41))
        mu = generate_random_box(N, d, [seed, 41, i]) if i % 2 else \
            generate_gaussian_mixture(N, [seed, 42, i], d=d)
        V = sample_uniform_subspace(d, 1 if d == 2 else int(rng.integers(1, d)), rng)
        out.append((mu, Cone(V, float(rng.uniform(0.1, 0.9))), float(rng.uniform(0.0, 0.1))))
    return out


def suite_energy_oracles(seed=0):
    res = SuiteResult("energy-oracles", seed)
    worst = {"conical": 0.0, "banded": 0.0, "curvature": 0.0, "riesz": 0.0, "cauchy": 0.0}
    for mu, cone, eps in oracle_inputs(seed):
        d = mu.dim
        n = d - cone.subspace.n
        eps = max(eps, 1e-9)
        worst["conical"] = max(worst["conical"], _rel(
            conical_energy(mu, cone, n, eps).value, naive.conical(mu, cone, n, eps)))
        win = Ball(np.full(d, 0.5), 0.4)
        worst["banded"] = max(worst["banded"], _rel(
            banded_conical_energy(mu, cone, n, eps, 0.6, win).value,
            naive.conical(mu, cone, n, eps, 0.6, closed=True, window=win)))
        worst["riesz"] = max(worst["riesz"], _rel(riesz_energy(mu, n, eps).value,
                                                  naive.riesz(mu, n, eps)))
        if d == 2:
            worst["curvature"] = max(worst["curvature"], _rel(curvature(mu, eps).value,
                                                              naive.curvature(mu, eps)))
            worst["cauchy"] = max(worst["cauchy"], _rel(cauchy_energy(mu, eps).value,
                                                        naive.cauchy(mu, eps)))
    for key, v in worst.items():
        res.add(f"{key}_max_rel", v, 1e-12, v <= 1e-12)
    return res


def scaling_checks(seed):
    """(name, lhs, rhs) pairs that must agree to 1e-10 relative."""
    rng = np.random.default_rng([seed, 50])
    lam = 2.7
    phi = float(rng.uniform(0, 2 * math.pi))
    R = rotation_2d(phi)
    shift = rng.normal(size=2)
    mu = generate_random_box(25, 2, [seed, 51])
    eps = 0.05
    moll = MollifierSpec(0.03)
    I = AngularInterval(0.4, 1.3)
    I_rot = AngularInterval(0.4 + phi, 1.3 + phi)
    cone = Cone.from_interval(I)
    big = mu.transformed(scale=lam)
    rot = mu.transformed(R)
    mov = mu.transformed(shift=shift)
    out = []
    c = curvature(mu, eps).value
    out.append(("curvature_dilation", curvature(big, lam * eps).value, lam ** -2 * c))
    out.append(("curvature_rotation", curvature(rot, eps).value, c))
    out.append(("curvature_translation", curvature(mov, eps).value, c))
    k = conical_energy(mu, cone, 1, eps).value
    out.append(("conical_dilation", conical_energy(big, cone, 1, lam * eps).value, k / lam))
    out.append(("conical_rotation", conical_energy(rot, cone.rotated(R), 1, eps).value, k))
    out.append(("conical_translation", conical_energy(mov, cone, 1, eps).value, k))
    r = riesz_energy(mu, 1, eps).value
    out.append(("riesz_dilation", riesz_energy(big, 1, lam * eps).value, r / lam ** 2))
    out.append(("riesz_rotation", riesz_energy(rot, 1, eps).value, r))
    p = directional_energy_interval(mu, I, moll).value
    out.append(("projection_dilation",
                directional_energy_interval(big, I, moll.scaled(lam)).value, p / lam))
    out.append(("projection_rotation", directional_energy_interval(rot, I_rot, moll).value, p))
    out.append(("projection_translation", directional_energy_interval(mov, I, moll).value, p))
    V = sample_uniform_subspace(3, 2, rng)
    mu3 = generate_random_box(20, 3, [seed, 52])
    Q = random_rotation(3, rng)
    e3 = projection_l2_energy(mu3, V, moll)
    out.append(("projection_plane_dilation",
                projection_l2_energy(mu3.transformed(scale=lam), V, moll.scaled(lam)), e3 / lam ** 2))
    out.append(("projection_plane_rotation",
                projection_l2_energy(mu3.transformed(Q), V.rotated(Q), moll), e3))
    f = favard_estimate(mu, 0.01, 360)
    out.append(("favard_dilation", favard_estimate(big, lam * 0.01, 360), lam * f))
    out.append(("favard_translation", favard_estimate(mov, 0.01, 360), f))
    seg = segment_fixture(60)
    Iseg = AngularInterval(-0.15, 0.15)
    cert = theorem1_certificate(seg, Iseg, moll, r_min=1.0 / 60)
    cert_big = theorem1_certificate(seg.transformed(scale=lam), Iseg, moll.scaled(lam),
                                    r_min=lam / 60)
    out.append(("certificate_dilation", cert_big.lower_bound, lam * cert.lower_bound))
    Rs = rotation_2d(0.7)
    cert_rot = theorem1_certificate(seg.transformed(Rs, shift=shift),
                                    AngularInterval(-0.15 + 0.7, 0.15 + 0.7), moll, r_min=1.0 / 60)
    out.append(("certificate_rigid_motion", cert_rot.lower_bound, cert.lower_bound))
    return out


def suite_scaling(seed=0):
    res = SuiteResult("scaling", seed)
    for name, a, b in scaling_checks(seed):
        e = _rel(a, b)
        res.add(name, e, 1e-10, e <= 1e-10)
    return res


def ball_slope(d, n, seed, num_samples=100_000, deltas=(0.1, 0.2, 0.4)):
    rng = np.random.default_rng([seed, 60, d, n])
    V0 = sample_uniform_subspace(d, n, rng)
    vols = [grassmann_ball_volume_chart(V0, dl, num_samples, rng) for dl in deltas]
    return float(np.polyfit(np.log(deltas), np.log(vols), 1)[0])


def suite_grassmann_exponent(seed=0):
    res = SuiteResult("grassmann-exponent", seed)
    for d, n in [(3, 1), (4, 2)]:
        slope = ball_slope(d, n, seed)
        target = n * (d - n)
        res.add(f"slope_d{d}_n{n}", slope, target, abs(slope - target) <= 0.1 * target)
    rng = np.random.default_rng([seed, 61])
    worst = 0.0
    for _ in range(100):
        x = rng.normal(size=4)
        V, W = sample_uniform_subspace(3, 1, rng), sample_uniform_subspace(3, 1, rng)
        worst = max(worst, abs(grassmann_metric(lift_isometry(x, V), lift_isometry(x, W))
                               - grassmann_metric(V, W)))
    res.add("lift_isometry_max_error", worst, 1e-10, worst < 1e-10)
    return res


def lattice_corpus(seed):
    out = [(f"cantor{k}", generate_cantor4(k), 4.0) for k in range(1, 6)]
    out += [(f"box{s}", generate_random_box(300, 2, [seed, 70, s]), 8.0) for s in range(5)]
    out += [("box3d", generate_random_box(300, 3, [seed, 71]), 8.0),
            ("segment", segment_fixture(200), 8.0),
            ("mixture", generate_gaussian_mixture(200, [seed, 72]), 8.0),
            ("graph", generate_lipschitz_graph(200, slope_bound=1.0, seed=seed), 8.0)]
    return out


def suite_lattice(seed=0):
    res = SuiteResult("lattice", seed)
    for label, mu, A0 in lattice_corpus(seed):
        rep = invariant_report(build_lattice(mu, A0=A0, C0=2.0))
        exact = rep["partition"] and rep["nesting"] and rep["ball28"] and rep["disjoint5B"]
        res.add(f"{label}_exact_invariants", None, None, exact)
        v = rep["containment_violation_fraction"]
        res.add(f"{label}_containment_violations", v, 0.01, v < 0.01)
    counts = [len(lv) for lv in build_lattice(generate_cantor4(3), A0=4.0).levels]
    res.add("cantor3_level_counts", None, None, counts == [1, 4, 16, 64])
    return res


def corona_values():
    """Per-k diagnostics of the Cantor corona corpus."""
    out = {}
    for k in range(2, 6):
        lat, params, forest = corona_fixture(k)
        pr = packing_report(forest, params.cone, 0.5 * 4.0 ** -k)
        checks = [tree_checks(forest, r) for r in forest.roots]
        items = verify_corona_properties(forest)
        out[k] = {
            "packing": pr.ratio,
            "bce_ok": all(c["bce_ok"] for c in checks),
            "disjoint": all(c["stop_disjoint"] for c in checks),
            "slope": max(c["slope_ratio"] for c in checks),
            "item_c": max(v["c_max_ratio"] for v in items),
            "layers": len(forest.top),
        }
    return out


def suite_corona(seed=0):
    res = SuiteResult("corona", seed)
    for k, v in corona_values().items():
        res.add(f"cantor{k}_bce_fubini", None, None, v["bce_ok"])
        res.add(f"cantor{k}_stop_disjoint", None, None, v["disjoint"])
        res.add(f"cantor{k}_slope_ratio", v["slope"], 1.0, v["slope"] <= 1.0)
        ref = cal.PACKING_RATIO[k]
        dev = abs(v["packing"] - ref) / ref
        res.add(f"cantor{k}_packing_ratio", v["packing"], ref,
                dev <= cal.PACKING_TOLERANCE)
        res.add(f"cantor{k}_item_c", v["item_c"], cal.ITEM_C_BOUND,
                v["item_c"] <= cal.ITEM_C_BOUND)
    return res


def suite_capacity(seed=0):
    res = SuiteResult("capacity", seed)
    seg = segment_fixture(200)
    I = AngularInterval(-0.15, 0.15)
    moll = MollifierSpec(5e-3)
    cert = theorem1_certificate(seg, I, moll, r_min=1.0 / 200)
    res.add("segment_retained_mass", cert.retained_mass, 0.25, cert.retained_mass >= 0.25)
    res.add("segment_sigma_growth", cert.sigma_growth, 1 + 1e-6, cert.sigma_growth <= 1 + 1e-6)
    res.add("segment_lower_bound", cert.lower_bound, 0.0, cert.lower_bound > 0)
    ok = 0
    worst = math.inf
    for i in range(100):
        rng = np.random.default_rng([seed, 90, i])
        mu = generate_random_box(50, 2, [seed, 91, i])
        lo = rng.uniform(0.0, math.pi)
        J = AngularInterval(lo, lo + rng.uniform(0.1, 1.0))
        r = favard_inequality_check(mu, J, MollifierSpec(0.01))
        ok += r >= 0.95
        worst = min(worst, r)
    res.add("favard_cases_passing", ok, 100, ok == 100)
    res.add("favard_min_ratio", worst, 0.95, worst >= 0.95)
    ball = GrassmannBall(Subspace.line(0.0), math.sin(0.15))
    t2 = theorem2_certificate(seg, ball, moll, 1.0 / 200, 4000, np.random.default_rng([seed, 92]))
    # Haar probability on lines is dtheta / pi, so the planar bound is pi times larger
    gap = abs(t2.lower_bound - math.pi * cert.lower_bound)
    res.add("theorem2_reduction_gap_in_se", gap / t2.standard_error, 3.0,
            gap <= 3.0 * t2.standard_error)
    return res


def suite_reverse(seed=0):
    res = SuiteResult("reverse", seed)
    rep = reverse_fixture()
    mass = total_mass(segment_fixture(100))
    res.add("t1", rep.t1, 1e-12, rep.t1 < 1e-12)
    e = abs(rep.t2 - 2 * mass) / (2 * mass)
    res.add("t2_rel_to_twice_mass", e, 0.05, e <= 0.05)
    res.add("measured_c", rep.measured_c, cal.REVERSE_C, rep.lhs <= cal.REVERSE_C * (rep.t1 + rep.t2))
    return res


SUITES = {
    "fourier-identity": suite_fourier_identity,
    "cone-inequality": suite_cone_inequality,
    "melnikov": suite_melnikov,
    "energy-oracles": suite_energy_oracles,
    "scaling": suite_scaling,
    "grassmann-exponent": suite_grassmann_exponent,
    "lattice": suite_lattice,
    "corona": suite_corona,
    "capacity": suite_capacity,
    "reverse": suite_reverse,
}


def run(name, seed=0) -> list:
    if name == "all":
        return [f(seed) for f in SUITES.values()]
    if name not in SUITES:
        raise KeyError(name)
    return [SUITES[name](seed)]


def report_json(results) -> str:
    return json.dumps({"passed": all(r.passed for r in results),
                       "suites": [r.to_json() for r in results]}, indent=2, sort_keys=True)


def key_cone_fixture():
    """Key-cone mass ratio mu(shadows) / (eps_stop mu(R)) on a graph transverse to the cone."""
    from .corona import key_cone_mass, stopping_decomposition

    mu = generate_lipschitz_graph(300, slope_bound=0.5, seed=5)
    lat = build_lattice(mu, A0=cal.CORONA_A0, C0=cal.CORONA_C0)
    params = CoronaParams(Cone(Subspace.line(math.pi / 2), cal.CORONA_APERTURE))
    dec = stopping_decomposition(lat, lat.root, params)
    stops = {q for q, _ in dec.stop}
    J = [q for q in dec.tree if q in stops or not lat.cubes[q].children]
    m = key_cone_mass(lat, dec, J, params)
    return m / (params.eps_stop * lat.mass(lat.root))
