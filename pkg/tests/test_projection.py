import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmtkit.energies import conical_energy
from gmtkit.grassmann import AngularInterval, Cone, GrassmannBall, Subspace
from gmtkit.measures import (DiscreteMeasure, generate_gaussian_mixture, generate_random_box,
                             generate_segment, min_pairwise_distance)
from gmtkit.projection import (MollifierSpec, cone_kernel, cone_kernel_energy_smoothed,
                               directional_energy_interval, fourier_cone_energy,
                               grassmann_ball_energy, maximal_function, projection_l2_energy,
                               reverse_inequality_report, upper_density_profile)

EPS = 0.05
MOLL = MollifierSpec(EPS)


def peak(n, eps=EPS):
    return (4 * math.pi * eps * eps) ** (-n / 2)


def atoms(pts, w=None):
    pts = np.asarray(pts, float)
    return DiscreteMeasure(pts, np.ones(len(pts)) if w is None else np.asarray(w, float))


def test_projection_energy_closed_forms():
    assert projection_l2_energy(atoms([[0.3, 0.1]], [0.7]), Subspace.line(1.0), MOLL) == \
        pytest.approx(0.49 * peak(1))
    perp = atoms([[0, 0], [0, 1]])
    assert projection_l2_energy(perp, Subspace.line(0), MOLL) == pytest.approx(4 * peak(1))
    far = atoms([[0, 0, 0], [50, 0, 7]])
    V = Subspace.coordinate(3, [0, 1])
    assert projection_l2_energy(far, V, MOLL) == pytest.approx(2 * peak(2), abs=1e-8)


def test_directional_interval_basic():
    I = AngularInterval(0.2, 1.1)
    assert directional_energy_interval(DiscreteMeasure.empty(2), I, MOLL).value == 0
    # four atoms on a circle at right angles: the profile has period pi/2
    sym = atoms([[math.cos(a), math.sin(a)] for a in (0, math.pi / 2, math.pi, 3 * math.pi / 2)])
    full = directional_energy_interval(sym, AngularInterval(0, math.pi), MOLL, 256).value
    quarter = directional_energy_interval(sym, AngularInterval(0, math.pi / 2), MOLL, 256).value
    assert quarter == pytest.approx(full / 2, rel=1e-6)


def test_segment_directional_matches_fourier():
    mu = generate_segment([[0, 0], [1, 0]], 100)
    moll = MollifierSpec(0.01)
    J = AngularInterval(-0.1, 0.1)
    direct = directional_energy_interval(mu, J.perp(), moll, 64).value
    fourier = fourier_cone_energy(mu, J, moll, 96, 96).value
    assert direct == pytest.approx(fourier, rel=0.01)


@pytest.mark.parametrize("seed", range(3))
def test_mixture_three_paths_agree(seed):
    mu = generate_gaussian_mixture(15, seed)
    I = AngularInterval(0.3, 1.2)
    direct = directional_energy_interval(mu, I.perp(), MOLL, 64).value
    fourier = fourier_cone_energy(mu, I, MOLL, 64, 64).value
    kernel = cone_kernel_energy_smoothed(mu, I, MOLL, 64, 64).value
    assert direct == pytest.approx(fourier, rel=0.01)
    assert kernel == pytest.approx(fourier, rel=1e-10)


def test_single_atom_fourier_and_kernel():
    w = 0.6
    I = AngularInterval(0.4, 0.9)
    one = atoms([[0.2, -0.3]], [w])
    f = fourier_cone_energy(one, I, MOLL, 64, 64).value
    assert f == pytest.approx(w * w * I.length * peak(1), rel=1e-6)
    k0 = cone_kernel(np.zeros((1, 2)), I, MOLL, 64, 64)
    assert float(np.ravel(k0)[0]) == pytest.approx(f / (w * w), rel=1e-12)


def test_fourier_translation_invariance():
    mu = generate_gaussian_mixture(10, 3)
    I = AngularInterval(0.1, 0.8)
    a = fourier_cone_energy(mu, I, MOLL, 48, 48).value
    b = fourier_cone_energy(mu.transformed(shift=[3.0, -1.5]), I, MOLL, 48, 48).value
    assert b == pytest.approx(a, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_conical_below_directional(seed):
    rng = np.random.default_rng(seed)
    mu = generate_random_box(int(rng.integers(5, 40)), 2, seed)
    eps = min_pairwise_distance(mu)
    lo = float(rng.uniform(0, math.pi))
    I = AngularInterval(lo, lo + float(rng.uniform(0.1, 1.0)))
    cone_val = conical_energy(mu, Cone.from_interval(I), 1, eps).value
    moll = MollifierSpec(eps / 10)
    assert cone_val <= directional_energy_interval(mu, I.perp(), moll).value * (1 + 1e-6)


def test_ball_energy_whole_grassmannian_single_atom():
    one = atoms([[0.1, 0.2, 0.3]], [2.0])
    pe = grassmann_ball_energy(one, GrassmannBall(Subspace.coordinate(3, [0]), 1.0), MOLL, 50,
                               np.random.default_rng(0))
    assert pe.value == pytest.approx(4 * peak(1), rel=1e-12)


def test_ball_energy_matches_interval_in_plane():
    mu = generate_gaussian_mixture(12, 5)
    s = 0.3
    ball = GrassmannBall(Subspace.line(0.7), s)
    pe = grassmann_ball_energy(mu, ball, MOLL, 6000, np.random.default_rng(1))
    half = math.asin(s)
    ref = directional_energy_interval(mu, AngularInterval(0.7 - half, 0.7 + half), MOLL, 128).value
    assert abs(pe.value - ref / math.pi) < 3 * pe.standard_error


def test_ball_energy_variance_shrinks():
    mu = generate_gaussian_mixture(8, 2)
    ball = GrassmannBall(Subspace.line(0.2), 0.5)
    se_small = grassmann_ball_energy(mu, ball, MOLL, 500, np.random.default_rng(0)).standard_error
    se_big = grassmann_ball_energy(mu, ball, MOLL, 8000, np.random.default_rng(0)).standard_error
    assert se_big / se_small == pytest.approx(0.25, rel=0.25)


def test_maximal_function_and_profiles():
    assert maximal_function(atoms([[0, 0]], [0.4]), [0, 0], 1, 1.0) == pytest.approx(0.4)
    seg = generate_segment([[0, 0], [1, 0]], 1000)
    prof = upper_density_profile(seg, [0.5, 0], 1, [0.2, 0.1, 0.05, 0.01])
    np.testing.assert_allclose(prof.values, 2.0, rtol=0.01)
    far = upper_density_profile(seg, [0.5, 5.0], 1, [40.0, 20.0, 10.0])
    np.testing.assert_allclose(far.values, [1 / 40, 1 / 20, 1 / 10])
    with pytest.raises(ValueError):
        upper_density_profile(seg, [0, 0], 1, [0.1, 0.2])


def test_reverse_report():
    zero = reverse_inequality_report(DiscreteMeasure.empty(2), Subspace.line(0), 0.3, MOLL, 2.0)
    assert (zero.lhs, zero.t1, zero.t2) == (0.0, 0.0, 0.0)
    seg = generate_segment([[0, 0], [1, 0]], 100)
    rep = reverse_inequality_report(seg, Subspace.line(0.0), 0.3, MollifierSpec(0.01),
                                    2.0, 1000, np.random.default_rng(0))
    assert rep.t1 < 1e-12
    assert rep.t2 == pytest.approx(2.0, rel=0.05)
    assert math.isfinite(rep.lhs) and rep.holds_with(rep.measured_c)


def test_mollifier_validation():
    with pytest.raises(ValueError):
        MollifierSpec(0.0)
    with pytest.raises(ValueError):
        MollifierSpec(0.1, kind="box")
