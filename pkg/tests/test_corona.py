import math

import numpy as np
import pytest

from gmtkit import calibration as cal
from gmtkit.corona import (CoronaParams, TreeDecomposition, build_forest, cell_energy,
                           fit_lipschitz_graph, key_cone_mass, packing_report,
                           stopping_decomposition, tree_checks, verify_corona_properties)
from gmtkit.grassmann import Cone, Subspace, grassmann_metric, random_rotation
from gmtkit.lattice import Cube, CubeLattice, build_lattice
from gmtkit.measures import DiscreteMeasure, generate_lipschitz_graph, generate_segment
from gmtkit.verify import corona_fixture, key_cone_fixture

VERTICAL = Cone(Subspace.line(math.pi / 2), 0.3)
QUIET = dict(A=1e9, tau=0.0, eps_stop=math.inf)  # no stopping at all


def line_lattice(n=200):
    return build_lattice(generate_segment([[0, 0], [1, 0]], n), A0=4.0, C0=128.0)


def blob_lattice(blob_mass=0.6):
    line = generate_segment([[0, 0], [1, 0]], 200)
    blob = np.random.default_rng(0).normal(scale=0.002, size=(50, 2)) + [0.5, 0.0]
    mu = DiscreteMeasure(np.vstack([line.points, blob]),
                         np.concatenate([line.weights, np.full(50, blob_mass / 50)]))
    return build_lattice(mu, A0=4.0, C0=128.0)


def two_atom_lattice(w, r, C0=2.0):
    ell = 2 * 28 * C0 * r
    mu = DiscreteMeasure(np.array([[0.0, 0.0], [ell, 0.0]]), np.array([w, w]))
    Q = Cube(0, 0, 0, mu.points[0], r, np.array([0]), None, doubling=True)
    return CubeLattice(mu, 8.0, C0, 1.0, [Q], [[0]], np.array([[0, -1]])), ell


def test_params_validation():
    with pytest.raises(ValueError):
        CoronaParams(VERTICAL, tau=1.0)
    with pytest.raises(ValueError):
        CoronaParams(VERTICAL, tau=0.05, eps_stop=0.1)
    with pytest.raises(ValueError):
        CoronaParams(VERTICAL, M=50.0, t=40.0)
    with pytest.raises(ValueError):
        CoronaParams(Cone(Subspace.line(0), 2.5))
    CoronaParams(VERTICAL, tau=0.0, eps_stop=math.inf)
    p = CoronaParams(VERTICAL)
    back = CoronaParams.from_json(p.to_json())
    assert grassmann_metric(back.cone.subspace, p.cone.subspace) < 1e-15
    assert {k: v for k, v in back.to_json().items() if k != "cone"} == \
        {k: v for k, v in p.to_json().items() if k != "cone"}
    with pytest.raises(ValueError):
        CoronaParams.from_json({**p.to_json(), "bogus": 1})


def test_cell_energy_examples():
    lat = line_lattice()
    assert all(cell_energy(lat, q, VERTICAL, 0.05) == 0 for q in lat.levels[2])
    w, r = 0.3, 0.01
    lat2, ell = two_atom_lattice(w, r)
    # x sits in 2B_Q, y at distance l(Q) along the cone axis: one ordered pair counts
    assert cell_energy(lat2, 0, Cone(Subspace.line(0), 0.1), 0.5) == pytest.approx(w / ell)


def test_cell_energy_rotation_invariance(rng):
    lat = corona_fixture(3)[0]
    R = random_rotation(2, rng)
    rot = build_lattice(lat.mu.transformed(matrix=R), A0=lat.A0, C0=lat.C0)
    cone = Cone(Subspace.line(math.pi / 4), 0.3)
    for q in lat.levels[2]:
        # same greedy order, so cube ids match after rotation
        a = cell_energy(lat, q, cone, 0.05)
        b = cell_energy(rot, q, cone.rotated(R), 0.05)
        assert b == pytest.approx(a, rel=1e-9, abs=1e-300)


def test_line_with_transverse_cone_has_no_stops():
    lat = line_lattice()
    dec = stopping_decomposition(lat, lat.root, CoronaParams(VERTICAL, **QUIET))
    assert dec.stop == []
    assert sorted(dec.tree) == sorted(c.id for c in lat.cubes)
    forest = build_forest(lat, CoronaParams(VERTICAL, **QUIET))
    assert len(forest.top) == 1


def test_massive_atom_enters_hd():
    line = generate_segment([[0, 0], [1, 0]], 200)
    pts = np.vstack([line.points, [[0.5, 0.0025]]])
    mu = DiscreteMeasure(pts, np.append(line.weights, 0.5))
    lat = build_lattice(mu, A0=4.0, C0=128.0)
    dec = stopping_decomposition(lat, lat.root, CoronaParams(VERTICAL, A=5.0))
    heavy = len(mu) - 1
    hd = [q for q in dec.labelled("HD") if heavy in lat.cubes[q].members]
    assert hd and all(lat.cubes[q].doubling for q in hd)


def test_degenerate_thresholds_leave_hd_only():
    lat = blob_lattice()
    dec = stopping_decomposition(lat, lat.root, CoronaParams(VERTICAL, tau=0.0, eps_stop=math.inf))
    assert dec.stop and {lab for _, lab in dec.stop} == {"HD"}


def test_key_cone_mass():
    lat = line_lattice()
    dec = stopping_decomposition(lat, lat.root, CoronaParams(VERTICAL, **QUIET))
    params = CoronaParams(VERTICAL, **QUIET)
    assert key_cone_mass(lat, dec, [], params) == 0
    assert key_cone_mass(lat, dec, [lat.root.id], params) == 0
    assert key_cone_fixture() <= cal.KEY_CONE_C + 1e-12
    with pytest.raises(ValueError):
        q = lat.levels[1][0]
        key_cone_mass(lat, dec, [q, lat.cubes[q].children[0]], params)


def test_graph_fit_on_graph_measure():
    mu = generate_lipschitz_graph(120, Subspace.line(0), slope_bound=0.5, seed=3)
    lat = build_lattice(mu, A0=4.0, C0=128.0)
    params = CoronaParams(VERTICAL, **QUIET)
    dec = stopping_decomposition(lat, lat.root, params)
    assert dec.stop == []
    g = fit_lipschitz_graph(lat, dec, params)
    assert sorted(g.anchor_atoms) == list(range(len(mu))) and g.excluded == []
    np.testing.assert_allclose(g.vertical_distance(mu.points), 0, atol=1e-12)
    assert g.max_slope_ratio() <= 1.0


def test_graph_fit_excludes_cone_conflict():
    mu = DiscreteMeasure(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]), np.ones(3))
    lat = build_lattice(mu, A0=4.0)
    dec = TreeDecomposition(0, 1.0, [], [0], [], np.array([0, 1, 2]), 3.0, {}, {})
    g = fit_lipschitz_graph(lat, dec, CoronaParams(VERTICAL))
    assert g.anchor_atoms == [0, 2] and g.excluded == [1]


def test_cantor_graph_slope_bound():
    lat, params, forest = corona_fixture(3)
    dec = forest.trees[lat.root.id]
    assert dec.graph is not None and dec.graph.anchor_atoms
    assert dec.graph.max_slope_ratio() <= 1.0


def test_single_atom_forest():
    mu = DiscreteMeasure(np.array([[0.3, 0.4]]), np.array([2.0]))
    forest = build_forest(build_lattice(mu), CoronaParams(VERTICAL))
    assert forest.top == [[0]] and forest.trees[0].stop == []


def test_layered_blob_forest():
    lat = blob_lattice()
    forest = build_forest(lat, CoronaParams(VERTICAL))
    assert len(forest.top) >= 2
    blob = set(range(200, 250))
    assert any(blob & set(lat.cubes[r].members.tolist()) for r in forest.top[1])
    for r in forest.roots:
        dec = forest.trees[r]
        hd = sum(lat.mass(q) for q in dec.labelled("HD"))
        assert dec.is_id == (hd >= lat.mass(r) / 2)
    for c in (tree_checks(forest, r) for r in forest.roots):
        assert c["stop_disjoint"] and c["bce_ok"] and c["ld_ok"] and c["slope_ratio"] <= 1.0
    for rep in verify_corona_properties(forest):
        assert math.isfinite(rep["b_max_ratio"])


def test_packing_single_layer():
    lat = line_lattice()
    forest = build_forest(lat, CoronaParams(VERTICAL, **QUIET))
    pr = packing_report(forest, VERTICAL, 0.001)
    R = lat.root.id
    assert pr.numerator == pytest.approx(lat.theta_2BQ(R, 1) * lat.mass(R))
    assert pr.ratio <= lat.theta_2BQ(R, 1) + 1e-15


def test_packing_ratio_falls_for_line_inside_cone():
    # single-layer forest: the conical term grows like log(1/eps) while the numerator is fixed
    along = Cone(Subspace.line(0), 0.3)
    ratios = []
    for n in (50, 200, 800):
        lat = line_lattice(n)
        forest = build_forest(lat, CoronaParams(along, **QUIET))
        assert len(forest.roots) == 1
        ratios.append(packing_report(forest, along, 0.5 / n).ratio)
    assert ratios[0] > ratios[1] > ratios[2]


def test_graph_measure_item_a():
    mu = generate_lipschitz_graph(100, Subspace.line(0), slope_bound=0.5, seed=8)
    forest = build_forest(build_lattice(mu, A0=4.0, C0=128.0), CoronaParams(VERTICAL, **QUIET))
    assert verify_corona_properties(forest, tol=1e-12)[0]["a_fraction"] == 1.0


@pytest.mark.parametrize("k", [2, 3, 4])
def test_cantor_corpus_exact_checks(k):
    lat, params, forest = corona_fixture(k)
    for c in (tree_checks(forest, r) for r in forest.roots):
        assert c["stop_disjoint"] and c["bce_ok"] and c["slope_ratio"] <= 1.0
    assert max(v["c_max_ratio"] for v in verify_corona_properties(forest)) <= cal.ITEM_C_BOUND
