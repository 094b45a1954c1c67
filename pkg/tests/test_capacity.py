import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmtkit.capacity import (favard_estimate, favard_inequality_check, favard_table_csv,
                             projected_lengths, theorem1_certificate, theorem2_certificate)
from gmtkit.grassmann import AngularInterval, GrassmannBall, Subspace, rotation_2d
from gmtkit.measures import (DiscreteMeasure, generate_cantor4, generate_plane_grid,
                             generate_random_box, generate_segment, min_pairwise_distance)
from gmtkit.projection import MollifierSpec

SEG = generate_segment([[0, 0], [1, 0]], 200)
SEG_I = AngularInterval(-0.15, 0.15)
MOLL = MollifierSpec(5e-3)


def test_segment_certificate():
    cert = theorem1_certificate(SEG, SEG_I, MOLL, 1 / 200)
    assert cert.retained_mass >= 0.25
    assert cert.sigma_growth <= 1 + 1e-6
    assert cert.lower_bound > 0 and cert.success
    assert len(cert.F_indices) > 0


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_certificate_dilation(lam):
    a = theorem1_certificate(SEG, SEG_I, MOLL, 1 / 200)
    b = theorem1_certificate(SEG.transformed(scale=lam), SEG_I, MOLL.scaled(lam), lam / 200)
    assert b.lower_bound == pytest.approx(lam * a.lower_bound, rel=1e-10)


def test_single_atom_certificate():
    one = DiscreteMeasure(np.array([[0.2, 0.3]]), np.array([0.5]))
    cert = theorem1_certificate(one, AngularInterval(0.0, 1.0), MOLL, 1.0)
    assert math.isfinite(cert.integrated_energy) and list(cert.F_indices) == [0]
    assert cert.lower_bound > 0


def test_restriction_to_subset():
    cert = theorem1_certificate(SEG, SEG_I, MOLL, 1 / 200, E=np.arange(100))
    assert cert.mass == pytest.approx(0.5)
    assert set(cert.F_indices.tolist()) <= set(range(100))


def test_theorem2_planar_reduction():
    ball = GrassmannBall(Subspace.line(0.0), math.sin(0.15))
    t1 = theorem1_certificate(SEG, SEG_I, MOLL, 1 / 200)
    t2 = theorem2_certificate(SEG, ball, MOLL, 1 / 200, 4000, np.random.default_rng(0))
    # unnormalised ball integral: Haar measure is dtheta / pi in the plane
    assert abs(t2.lower_bound - math.pi * t1.lower_bound) < 3 * t2.standard_error


def test_theorem2_dilation_exact():
    ball = GrassmannBall(Subspace.line(0.0), 0.3)
    a = theorem2_certificate(SEG, ball, MOLL, 1 / 200, 500, np.random.default_rng(4))
    b = theorem2_certificate(SEG.transformed(scale=2.0), ball, MOLL.scaled(2.0), 2 / 200, 500,
                             np.random.default_rng(4))
    assert b.lower_bound == pytest.approx(2 * a.lower_bound, rel=1e-10)


def test_theorem2_plane_in_space():
    grid = generate_plane_grid(12, d=3)
    ball = GrassmannBall(Subspace.coordinate(3, [0, 1]), 0.3)
    cert = theorem2_certificate(grid, ball, MollifierSpec(0.02), min_pairwise_distance(grid), 400,
                                np.random.default_rng(1))
    assert cert.lower_bound > 0 and cert.sigma_growth <= 1 + 1e-6


def test_favard_segment_and_atom():
    dense = generate_segment([[0, 0], [1, 0]], 20_000)
    assert favard_estimate(dense, 1e-4, 2000) == pytest.approx(2.0, rel=2e-3)
    one = DiscreteMeasure(np.array([[0.4, 0.4]]), np.array([1.0]))
    assert favard_estimate(one, 0.01, 90) == pytest.approx(0.02 * math.pi)


def test_favard_cantor_decreases():
    vals = [favard_estimate(generate_cantor4(k), 4.0 ** -k, 720) for k in range(1, 6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_projected_lengths_union():
    pts = DiscreteMeasure(np.array([[0.0, 0.0], [1.0, 0.0], [1.05, 0.0]]), np.ones(3))
    # intervals [-0.1,0.1], [0.9,1.1], [0.95,1.15] along the x-axis
    assert projected_lengths(pts, 0.1, [0.0])[0] == pytest.approx(0.2 + 0.25)
    with pytest.raises(ValueError):
        projected_lengths(pts, 0.0, [0.0])


def test_favard_inequality_segment():
    I = AngularInterval(math.pi / 2 - 0.15, math.pi / 2 + 0.15)
    assert favard_inequality_check(SEG, I, MOLL) >= 0.95


def test_favard_inequality_rotation():
    mu = generate_random_box(30, 2, 7)
    I = AngularInterval(0.3, 0.9)
    a = favard_inequality_check(mu, I, MollifierSpec(0.01), num_theta=4000)
    R = rotation_2d(0.4)
    b = favard_inequality_check(mu.transformed(matrix=R), AngularInterval(0.7, 1.3),
                                MollifierSpec(0.01), num_theta=4000)
    assert b == pytest.approx(a, rel=2e-3)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 100_000))
def test_favard_inequality_random(seed):
    rng = np.random.default_rng(seed)
    mu = generate_random_box(50, 2, seed)
    lo = float(rng.uniform(0, math.pi))
    I = AngularInterval(lo, lo + float(rng.uniform(0.1, 1.0)))
    assert favard_inequality_check(mu, I, MollifierSpec(0.01)) >= 0.95


def test_favard_table():
    rows = favard_table_csv(SEG, 1e-3, 8).strip().splitlines()
    assert rows[0] == "theta,length" and len(rows) == 9
