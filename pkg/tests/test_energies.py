import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmtkit import _parallel, naive
from gmtkit.energies import (banded_conical_energy, cauchy_energy, conical_energy, curvature,
                             inverse_circumradius, melnikov_residual, riesz_energy)
from gmtkit.grassmann import Cone, Subspace
from gmtkit.measures import Ball, DiscreteMeasure, generate_cantor4, generate_random_box

EQUILATERAL = [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]
DIAGONAL = Cone(Subspace.line(math.pi / 4), 0.3)


def atoms(pts, w=None):
    pts = np.asarray(pts, float)
    return DiscreteMeasure(pts, np.ones(len(pts)) if w is None else np.asarray(w, float))


def test_inverse_circumradius():
    assert inverse_circumradius([0, 0], [1, 0], [2, 0]) == 0
    assert inverse_circumradius(*EQUILATERAL) == pytest.approx(math.sqrt(3))
    assert inverse_circumradius([0, 0], [3, 0], [0, 4]) == pytest.approx(0.4)


def test_curvature_examples():
    assert curvature(atoms([[0, 0], [1, 0]]), 0.1).value == 0
    assert curvature(atoms(EQUILATERAL), 0.5).value == pytest.approx(18)
    line = atoms([[t, 2 * t + 1] for t in np.linspace(0, 1, 9)])
    assert curvature(line, 1e-3).value == pytest.approx(0, abs=1e-20)


def test_cauchy_examples():
    assert cauchy_energy(atoms([[0, 0]]), 0.1).value == 0
    assert cauchy_energy(atoms([[0, 0], [1, 0]]), 0.5).value == pytest.approx(2)
    # the centre atom's inner sum cancels: the total is the two outer atoms' terms
    sym = atoms([[-1, 0], [0, 0], [1, 0]])
    outer = abs(1 / -1 + 1 / -2) ** 2
    assert cauchy_energy(sym, 0.5).value == pytest.approx(2 * outer)


def test_riesz_examples():
    assert riesz_energy(atoms([[0, 0, 0]]), 1, 0.1).value == 0
    assert riesz_energy(atoms([[0, 0, 0], [1, 0, 0]]), 1, 0.5).value == pytest.approx(2)
    sym = atoms([[-1, 0, 0], [0, 0, 0], [1, 0, 0]])
    assert riesz_energy(sym, 1, 0.5).value == pytest.approx(2 * 1.5 ** 2)


def test_melnikov_examples():
    assert melnikov_residual(atoms([[0, 0]]), 0.1).residual == 0
    two = atoms([[0, 0], [0.7, 0.2]], [0.3, 0.5])
    assert melnikov_residual(two, 0.1).residual == pytest.approx(cauchy_energy(two, 0.1).value)


def test_conical_examples():
    two = atoms([[0, 0], [1, 0]])
    assert conical_energy(two, Cone(Subspace.line(0), 0.1), 1, 0.5).value == pytest.approx(2)
    assert conical_energy(two, Cone(Subspace.line(math.pi / 2), 0.1), 1, 0.5).value == 0
    c2 = generate_cantor4(2)
    assert conical_energy(c2, DIAGONAL, 1, 1e-3).value == pytest.approx(
        naive.conical(c2, DIAGONAL, 1, 1e-3), rel=1e-12)


def test_banded_examples():
    c2 = generate_cantor4(2)
    assert banded_conical_energy(c2, DIAGONAL, 1, 5.0, 10.0, None).value == 0
    everything = Ball(np.array([0.5, 0.5]), 10.0)
    assert banded_conical_energy(c2, DIAGONAL, 1, 0.01, math.inf, everything).value == \
        pytest.approx(conical_energy(c2, DIAGONAL, 1, 0.01).value, rel=1e-14)
    lo, hi = 4.0 ** -2, 4.0 ** -1
    assert banded_conical_energy(c2, DIAGONAL, 1, lo, hi, None).value == pytest.approx(
        naive.conical(c2, DIAGONAL, 1, lo, hi, closed=True), rel=1e-12)
    win = Ball(np.array([0.2, 0.2]), 0.3)
    assert banded_conical_energy(c2, DIAGONAL, 1, lo, hi, win).value == pytest.approx(
        naive.conical(c2, DIAGONAL, 1, lo, hi, closed=True, window=win), rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_fast_kernels_match_loops(seed):
    mu = generate_random_box(25, 2, seed)
    eps = 0.02
    assert curvature(mu, eps).value == pytest.approx(naive.curvature(mu, eps), rel=1e-12)
    assert cauchy_energy(mu, eps).value == pytest.approx(naive.cauchy(mu, eps), rel=1e-12)
    assert riesz_energy(mu, 1, eps).value == pytest.approx(naive.riesz(mu, 1, eps), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.5, 4.0))
def test_dilation_laws(seed, lam):
    mu = generate_random_box(15, 2, seed)
    big = mu.transformed(scale=lam)
    assert curvature(big, 0.01 * lam).value == pytest.approx(
        curvature(mu, 0.01).value / lam ** 2, rel=1e-10)
    assert conical_energy(big, DIAGONAL, 1, 0.01 * lam).value == pytest.approx(
        conical_energy(mu, DIAGONAL, 1, 0.01).value / lam, rel=1e-10)


def test_rotation_invariance_of_conical_energy(rng):
    mu = generate_random_box(30, 2, 4)
    phi = 0.7
    R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    a = conical_energy(mu, DIAGONAL, 1, 0.01).value
    b = conical_energy(mu.transformed(matrix=R), DIAGONAL.rotated(R), 1, 0.01).value
    assert b == pytest.approx(a, rel=1e-10)


def test_thread_count_does_not_change_bits():
    mu = generate_random_box(400, 2, 9)
    values = []
    for t in (1, 3, 8):
        _parallel.set_threads(t)
        values.append((cauchy_energy(mu, 0.001).value, conical_energy(mu, DIAGONAL, 1, 0.001).value,
                       riesz_energy(mu, 1, 0.001).value))
    assert values[0] == values[1] == values[2]


def test_invalid_inputs():
    with pytest.raises(ValueError):
        curvature(atoms([[0, 0, 0]]), 0.1)
    with pytest.raises(ValueError):
        conical_energy(atoms([[0, 0]]), DIAGONAL, 1, -1.0)
