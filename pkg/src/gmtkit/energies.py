"""Curvature, Cauchy/Riesz transform energies and conical Riesz energies.

All sums are epsilon-truncated and evaluated exactly over the atoms. Row
partial sums are computed chunk by chunk (see ``_parallel``) and reduced in
a fixed order, so results do not depend on the thread count.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from ._parallel import map_rows, tree_sum
from .grassmann import Cone, contains_vectors
from .measures import Ball, DiscreteMeasure, growth_constant, total_mass

MAX_TRIPLE_ATOMS = 3000


@dataclass
class EnergyReport:
    value: float
    truncation_eps: float
    pair_or_triple_count: int
    elapsed: float

    def to_json(self, timing=True):
        out = {"value": self.value, "eps": self.truncation_eps, "count": self.pair_or_triple_count}
        if timing:
            out["seconds"] = self.elapsed
        return out

    def dumps(self, timing=True):
        return json.dumps(self.to_json(timing), sort_keys=True)


def _support(mu):
    idx = mu.support
    return mu.points[idx], mu.weights[idx]


def inverse_circumradius(x, y, z) -> float:
    """1/R(x,y,z) = 4 Area / (|x-y| |y-z| |x-z|); zero for degenerate triangles."""
    x, y, z = (np.asarray(p, dtype=float) for p in (x, y, z))
    u, v = y - x, z - x
    area = 0.5 * abs(u[0] * v[1] - u[1] * v[0])
    a, b, c = np.linalg.norm(u), np.linalg.norm(z - y), np.linalg.norm(v)
    if area < 1e-300 or a == 0 or b == 0 or c == 0:
        return 0.0
    return float(4.0 * area / (a * b * c))


def curvature(mu: DiscreteMeasure, eps: float, allow_large=False) -> EnergyReport:
    """Truncated Menger curvature c^2_eps(mu) over ordered triples.

    Uses 1/R^2 = 4 cross(y-x, z-x)^2 / (|x-y|^2 |x-z|^2 |y-z|^2) and sums
    unordered triples times six.
    """
    if mu.dim != 2:
        raise ValueError("curvature is defined for planar measures")
    if not eps > 0:
        raise ValueError("eps must be positive")
    t0 = time.perf_counter()
    P, w = _support(mu)
    N = len(P)
    if N > MAX_TRIPLE_ATOMS and not allow_large:
        raise ValueError(f"{N} atoms exceeds the triple-sum cap {MAX_TRIPLE_ATOMS}")
    if N < 3:
        return EnergyReport(0.0, eps, 0, time.perf_counter() - t0)
    diff = P[:, None, :] - P[None, :, :]
    D2 = np.einsum("ijk,ijk->ij", diff, diff)
    far = D2 > eps * eps
    counts = np.zeros(N)

    def rows(a, b):
        out = np.zeros(b - a)
        for i in range(a, b):
            j = np.arange(i + 1, N)
            j = j[far[i, j]]
            if j.size < 2:
                continue
            u = P[j] - P[i]
            cross = u[:, 0][:, None] * u[None, :, 1] - u[:, 1][:, None] * u[None, :, 0]
            mask = np.triu(far[np.ix_(j, j)], 1)
            den = D2[i, j][:, None] * D2[i, j][None, :] * D2[np.ix_(j, j)]
            with np.errstate(divide="ignore", invalid="ignore"):
                term = np.where(mask, 4.0 * cross * cross / np.where(mask, den, 1.0), 0.0)
            term = np.where(np.abs(cross) * 0.5 < 1e-300, 0.0, term)
            out[i - a] = tree_sum((w[j][:, None] * w[j][None, :] * term).ravel()) * w[i]
            counts[i] = np.count_nonzero(mask)
        return out

    per_row = map_rows(rows, N, chunk=16)
    value = 6.0 * tree_sum(per_row)
    return EnergyReport(value, eps, int(6 * counts.sum()), time.perf_counter() - t0)


def _pair_rows(P, eps, kernel, width):
    """Evaluate ``kernel(diff, dist, mask)`` on row chunks; returns (N, width) sums."""
    N = len(P)
    out = np.zeros((N, width))
    counts = np.zeros(N)

    def rows(a, b):
        diff = P[a:b, None, :] - P[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        mask = dist > eps
        out[a:b] = kernel(diff, dist, mask)
        counts[a:b] = mask.sum(axis=1)
        return np.zeros(b - a)

    map_rows(rows, N)
    return out, int(counts.sum())


def cauchy_energy(mu: DiscreteMeasure, eps: float) -> EnergyReport:
    """||C_eps mu||^2 in L^2(mu), with 1/(z - w) as a complex kernel."""
    if mu.dim != 2:
        raise ValueError("Cauchy energy is defined for planar measures")
    t0 = time.perf_counter()
    P, w = _support(mu)
    if len(P) < 2:
        return EnergyReport(0.0, eps, 0, time.perf_counter() - t0)

    def kernel(diff, dist, mask):
        z = diff[..., 0] + 1j * diff[..., 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(mask, 1.0 / np.where(mask, z, 1.0), 0.0)
        s = k @ w
        return np.column_stack([s.real, s.imag])

    inner, count = _pair_rows(P, eps, kernel, 2)
    value = tree_sum(w * (inner[:, 0] ** 2 + inner[:, 1] ** 2))
    return EnergyReport(value, eps, count, time.perf_counter() - t0)


@dataclass
class MelnikovResidual:
    residual: float
    cauchy: float
    curvature: float
    growth_constant: float
    mass: float

    @property
    def normalized(self):
        """|residual| / (||mu|| c0^2)."""
        den = self.mass * self.growth_constant ** 2
        return abs(self.residual) / den if den > 0 else 0.0


def melnikov_residual(mu: DiscreteMeasure, eps: float) -> MelnikovResidual:
    """||C_eps mu||^2 - c^2_eps(mu)/6, with the eps-floored growth constant."""
    ce = cauchy_energy(mu, eps).value
    cu = curvature(mu, eps).value
    c0 = growth_constant(mu, 1, eps) if len(mu.support) else 0.0
    return MelnikovResidual(ce - cu / 6.0, ce, cu, c0, total_mass(mu))


def riesz_energy(mu: DiscreteMeasure, n: int, eps: float) -> EnergyReport:
    """||R^n_eps mu||^2 in L^2(mu) for the vector kernel (x-y)/|x-y|^(n+1)."""
    if not 0 < n < mu.dim:
        raise ValueError("need 0 < n < d")
    t0 = time.perf_counter()
    P, w = _support(mu)
    d = mu.dim
    if len(P) < 2:
        return EnergyReport(0.0, eps, 0, time.perf_counter() - t0)

    def kernel(diff, dist, mask):
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(mask, 1.0 / np.where(mask, dist, 1.0) ** (n + 1), 0.0)
        return np.einsum("ijk,ij,j->ik", diff, scale, w)

    inner, count = _pair_rows(P, eps, kernel, d)
    value = tree_sum(w * np.sum(inner * inner, axis=1))
    return EnergyReport(value, eps, count, time.perf_counter() - t0)


def _conical_rows(P, w, cone: Cone, n, lower, upper, closed_band, rows=None):
    """Sum of w_i w_j |x_i - x_j|^-n over rows i (default all) and all j."""
    rows = np.arange(len(P)) if rows is None else np.asarray(rows)
    R, wr = P[rows], w[rows]
    counts = np.zeros(len(rows))
    V, s = cone.subspace, cone.aperture

    def block(a, b):
        diff = R[a:b, None, :] - P[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        if closed_band:
            band = (dist >= lower) & (dist <= upper)
        else:
            band = (dist > lower) & (dist <= upper)
        mask = band & contains_vectors(V, s, diff)
        counts[a:b] = mask.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(mask, 1.0 / np.where(mask, dist, 1.0) ** n, 0.0)
        return wr[a:b] * (k @ w)

    per_row = map_rows(block, len(rows))
    return tree_sum(per_row), int(counts.sum())


def conical_energy(mu: DiscreteMeasure, cone: Cone, n: int, eps: float) -> EnergyReport:
    """Sum over ordered pairs with x_i - x_j in the (linear) cone and |x_i - x_j| > eps
    of w_i w_j |x_i - x_j|^-n.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    t0 = time.perf_counter()
    P, w = _support(mu)
    value, count = _conical_rows(P, w, cone.at(np.zeros(mu.dim)), n, eps, np.inf, False)
    return EnergyReport(value, eps, count, time.perf_counter() - t0)


def banded_conical_energy(mu: DiscreteMeasure, cone: Cone, n: int, lower: float, upper: float,
                          window: Ball | None = None) -> EnergyReport:
    """Conical energy with x in the open window ball and lower <= |x - y| <= upper."""
    if not 0 < lower:
        raise ValueError("lower must be positive")
    if lower > upper:
        raise ValueError("lower > upper")
    t0 = time.perf_counter()
    P, w = _support(mu)
    rows = None
    if window is not None:
        rows = np.flatnonzero(np.linalg.norm(P - window.center, axis=1) < window.radius)
    value, count = _conical_rows(P, w, cone.at(np.zeros(mu.dim)), n, lower, upper, True, rows)
    return EnergyReport(value, lower, count, time.perf_counter() - t0)


def full_truncated_energy(mu: DiscreteMeasure, n: int, eps: float) -> float:
    """Sum over ordered pairs with |x_i - x_j| > eps of w_i w_j |x_i - x_j|^-n."""
    P, w = _support(mu)

    def kernel(diff, dist, mask):
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(mask, 1.0 / np.where(mask, dist, 1.0) ** n, 0.0)
        return (k @ w)[:, None]

    inner, _ = _pair_rows(P, eps, kernel, 1)
    return tree_sum(w * inner[:, 0])
