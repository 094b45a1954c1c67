import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gmtkit.grassmann import (AngularInterval, Cone, GrassmannBall, Subspace, cone_contains,
                              grassmann_ball_volume_chart, grassmann_ball_volume_mc,
                              grassmann_metric, lift_isometry, project_point, random_rotation,
                              sample_uniform_subspace)


def test_project_point():
    np.testing.assert_allclose(project_point(Subspace.line(0), [3, 4]), [3, 0], atol=1e-15)
    np.testing.assert_allclose(project_point(Subspace.line(0.4), [math.cos(0.4), math.sin(0.4)]),
                               [math.cos(0.4), math.sin(0.4)])
    np.testing.assert_allclose(project_point(Subspace.line(math.pi / 4), [1, 0]), [0.5, 0.5])


@settings(max_examples=50, deadline=None)
@given(st.floats(0, math.pi), st.floats(0, math.pi))
def test_metric_of_lines_is_abs_sine(a, b):
    assert grassmann_metric(Subspace.line(a), Subspace.line(b)) == pytest.approx(
        abs(math.sin(a - b)), abs=1e-12)


def test_metric_examples():
    V = Subspace.line(0.2)
    assert grassmann_metric(V, V) == pytest.approx(0, abs=1e-15)
    assert grassmann_metric(Subspace.line(0), Subspace.line(math.pi / 2)) == pytest.approx(1)


def test_cone_contains():
    x_axis, y_axis = Subspace.line(0), Subspace.line(math.pi / 2)
    assert cone_contains(Cone(x_axis, 0.1), [1, 0])
    assert not cone_contains(Cone(y_axis, 0.1), [1, 0])
    assert not cone_contains(Cone(x_axis, 0.1), [0, 0])


def test_uniform_sampling(rng):
    V = sample_uniform_subspace(5, 2, rng)
    np.testing.assert_allclose(V.basis.T @ V.basis, np.eye(2), atol=1e-10)
    th = [math.atan2(*sample_uniform_subspace(2, 1, rng).basis[::-1, 0]) % math.pi
          for _ in range(10_000)]
    assert stats.kstest(np.array(th) / math.pi, "uniform").statistic < 0.02
    a = sample_uniform_subspace(4, 2, np.random.default_rng(3))
    b = sample_uniform_subspace(4, 2, np.random.default_rng(3))
    assert np.array_equal(a.basis, b.basis)


def test_ball_volume_mc():
    rng = np.random.default_rng(0)
    assert grassmann_ball_volume_mc(Subspace.line(0.3), 1.0, 100, rng) == 1.0
    est, se = grassmann_ball_volume_mc(Subspace.line(0.3), math.sin(0.3), 40_000, rng,
                                       return_se=True)
    assert abs(est - 0.6 / math.pi) < 3 * se


@pytest.mark.parametrize("d,n", [(3, 1), (4, 2)])
def test_ball_volume_exponent(d, n):
    rng = np.random.default_rng(1)
    center = Subspace.coordinate(d, list(range(n)))
    deltas = np.array([0.1, 0.2, 0.4])
    vols = [grassmann_ball_volume_chart(center, t, 100_000, rng) for t in deltas]
    slope = np.polyfit(np.log(deltas), np.log(vols), 1)[0]
    assert slope == pytest.approx(n * (d - n), rel=0.1)


def test_chart_and_rejection_estimators_agree():
    center = Subspace.coordinate(3, [0])
    a, sa = grassmann_ball_volume_mc(center, 0.4, 100_000, np.random.default_rng(2), True)
    b, sb = grassmann_ball_volume_chart(center, 0.4, 100_000, np.random.default_rng(3), True)
    assert abs(a - b) < 4 * math.hypot(sa, sb)


def test_lift_isometry_example():
    e3 = np.array([0.0, 0.0, 1.0])
    W = lift_isometry(e3, Subspace.coordinate(2, [0]))
    assert grassmann_metric(W, Subspace.coordinate(3, [0, 2])) < 1e-12


def test_lift_isometry_preserves_metric(rng):
    for _ in range(100):
        x = rng.normal(size=4)
        V, W = sample_uniform_subspace(3, 1, rng), sample_uniform_subspace(3, 1, rng)
        PV, PW = lift_isometry(x, V), lift_isometry(x, W)
        assert abs(grassmann_metric(PV, PW) - grassmann_metric(V, W)) < 1e-10
        assert PV.contains(x / np.linalg.norm(x))


def test_rotation_covariance(rng):
    R = random_rotation(3, rng)
    V, U = sample_uniform_subspace(3, 2, rng), sample_uniform_subspace(3, 2, rng)
    assert grassmann_metric(V.rotated(R), U.rotated(R)) == pytest.approx(grassmann_metric(V, U))


def test_interval_and_ball_json_round_trip():
    I = AngularInterval(0.2, 0.9)
    assert I.length == pytest.approx(0.7)
    assert I.perp().length == pytest.approx(0.7)
    K = Cone(Subspace.line(0.3), 0.2)
    back = Cone.from_json(K.to_json())
    assert grassmann_metric(back.subspace, K.subspace) < 1e-15 and back.aperture == 0.2
    B = GrassmannBall(Subspace.line(0.1), 0.3)
    assert B.contains(Subspace.line(0.2)) and not B.contains(Subspace.line(1.2))
