"""Discrete measures: weighted point clouds, generators and density statistics.

Ball membership is strict (open balls) everywhere except in
:func:`growth_constant` and the maximal function, which use closed balls so
that the supremum over radii is attained on a finite candidate set.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """A finite sum of weighted Dirac masses in R^d."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        w = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if w.size != 1 else pts.reshape(1, -1)
        if pts.ndim != 2:
            raise ValueError("points must be an (N, d) array")
        if pts.shape[0] != w.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {w.shape[0]} weights")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if not np.all(np.isfinite(pts)):
            raise ValueError("coordinates must be finite")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def empty(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    @property
    def support(self) -> np.ndarray:
        """Indices of atoms with positive weight."""
        return np.flatnonzero(self.weights > 0)

    def restrict(self, idx) -> "DiscreteMeasure":
        idx = np.asarray(idx)
        return DiscreteMeasure(self.points[idx], self.weights[idx])

    def scaled(self, factor) -> "DiscreteMeasure":
        """Same atoms, weights multiplied by ``factor``."""
        return DiscreteMeasure(self.points, self.weights * factor)

    def transformed(self, matrix=None, shift=None, scale=1.0) -> "DiscreteMeasure":
        """Image under ``x -> scale * matrix @ x + shift`` with unchanged weights."""
        pts = self.points
        if matrix is not None:
            pts = pts @ np.asarray(matrix, dtype=float).T
        pts = scale * pts
        if shift is not None:
            pts = pts + np.asarray(shift, dtype=float)
        return DiscreteMeasure(pts, self.weights)

    def mass_in_ball(self, center, radius, closed=False) -> float:
        d = np.linalg.norm(self.points - np.asarray(center, dtype=float), axis=1)
        inside = d <= radius if closed else d < radius
        return float(np.sum(self.weights[inside]))

    # CSV: header x1,...,xd,w
    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(self.dim)] + ["w"])
        for p, w in zip(self.points, self.weights):
            writer.writerow([repr(float(c)) for c in p] + [repr(float(w))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text) -> "DiscreteMeasure":
        if "\n" in str(path_or_text):
            text = str(path_or_text)
        else:
            with open(path_or_text, encoding="utf-8") as fh:
                text = fh.read()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty measure file")
        header = [h.strip() for h in rows[0]]
        d = len(header) - 1
        if d < 1 or header[-1] != "w" or header[:-1] != [f"x{i + 1}" for i in range(d)]:
            raise ValueError(f"bad header {header!r}; expected x1,...,xd,w")
        body = [r for r in rows[1:] if r]
        if not body:
            return cls.empty(d)
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
        if data.shape[1] != d + 1:
            raise ValueError("row length does not match header")
        return cls(data[:, :d], data[:, d])


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def diam(self):
        return 2.0 * self.radius

    def dilate(self, factor) -> "Ball":
        return Ball(self.center, factor * self.radius)


@dataclass(frozen=True)
class DensityStats:
    theta: float
    growth_constant: float
    r_min: float


def total_mass(mu: DiscreteMeasure) -> float:
    return float(np.sum(mu.weights))


def theta_density(mu: DiscreteMeasure, ball: Ball, n: int) -> float:
    """n-dimensional density mu(B) / diam(B)^n of an open ball."""
    if not 0 < n:
        raise ValueError("n must be positive")
    return mu.mass_in_ball(ball.center, ball.radius) / ball.diam ** n


def _closed_ball_sup(dists, weights, n, r_min):
    """max over r in {r_min} U {dists >= r_min} of mass(dists <= r) / r^n."""
    order = np.argsort(dists, kind="stable")
    ds = dists[order]
    cum = np.cumsum(weights[order])
    best = 0.0
    k = np.searchsorted(ds, r_min, side="right")
    if k > 0:
        best = cum[k - 1] / r_min ** n
    cand = ds[ds >= r_min]
    if cand.size:
        pos = np.searchsorted(ds, cand, side="right")
        best = max(best, float(np.max(cum[pos - 1] / cand ** n)))
    return float(best)


def growth_constant(mu: DiscreteMeasure, n: int, r_min: float) -> float:
    """Resolution-floored growth constant sup mu(closed B(x,r)) / r^n.

    The sup runs over support points x and radii r >= r_min taken from
    {r_min} and the distances from x to other support points.
    """
    if not r_min > 0:
        raise ValueError("r_min must be positive")
    sup = mu.support
    if sup.size == 0:
        return 0.0
    pts = mu.points[sup]
    w = mu.weights[sup]
    best = 0.0
    for i in range(pts.shape[0]):
        d = np.linalg.norm(pts - pts[i], axis=1)
        best = max(best, _closed_ball_sup(d, w, n, r_min))
    return best


def density_stats(mu: DiscreteMeasure, ball: Ball, n: int, r_min: float) -> DensityStats:
    return DensityStats(theta_density(mu, ball, n), growth_constant(mu, n, r_min), r_min)


# ---------------------------------------------------------------- generators

def generate_cantor4(k: int) -> DiscreteMeasure:
    """Generation-k centers of the four-corner Cantor construction in [0,1]^2."""
    if k < 0:
        raise ValueError("k must be >= 0")
    corners = np.array([[0.0, 0.0], [0.75, 0.0], [0.0, 0.75], [0.75, 0.75]])
    origins = np.zeros((1, 2))
    side = 1.0
    for _ in range(k):
        origins = (origins[:, None, :] + side * corners[None, :, :]).reshape(-1, 2)
        side /= 4.0
    pts = origins + side / 2.0
    return DiscreteMeasure(pts, np.full(len(pts), 4.0 ** -k))


def generate_segment(endpoints, num_atoms: int) -> DiscreteMeasure:
    """Midpoint-rule discretisation of length measure on a segment."""
    if num_atoms < 1:
        raise ValueError("num_atoms must be >= 1")
    a, b = (np.asarray(e, dtype=float) for e in endpoints)
    length = float(np.linalg.norm(b - a))
    t = (np.arange(num_atoms) + 0.5) / num_atoms
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    return DiscreteMeasure(pts, np.full(num_atoms, length / num_atoms))


def generate_random_box(n_atoms: int, d: int, seed) -> DiscreteMeasure:
    """Uniform atoms in [0,1]^d with equal weights summing to 1."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    rng = np.random.default_rng(seed)
    return DiscreteMeasure(rng.random((n_atoms, d)), np.full(n_atoms, 1.0 / n_atoms))


def generate_gaussian_mixture(n_atoms: int, seed, d: int = 2, spread=1.0) -> DiscreteMeasure:
    """Random atoms with random positive weights of total mass 1.

    Convolved with a Gaussian mollifier these are Gaussian mixtures.
    """
    rng = np.random.default_rng(seed)
    pts = spread * rng.random((n_atoms, d))
    w = rng.uniform(0.2, 1.0, n_atoms)
    return DiscreteMeasure(pts, w / w.sum())


def generate_lipschitz_graph(num_points: int, base_subspace=None, slope_bound=1.0,
                             seed=0, dim=None) -> DiscreteMeasure:
    """Atoms on the graph of a random piecewise-linear map over a subspace.

    The map sends base coordinates u in [0,1]^n to the orthogonal complement;
    it is a sum of scaled folds ``a * |<b, u> - c|`` whose Lipschitz constant
    is bounded by ``slope_bound`` (Euclidean norm over fiber components).
    ``base_subspace`` defaults to the x-axis of R^2 (``dim`` selects R^dim).
    """
    from .grassmann import Subspace

    if slope_bound < 0:
        raise ValueError("slope_bound must be >= 0")
    if base_subspace is None:
        base_subspace = Subspace.coordinate(dim or 2, [0])
    d, n = base_subspace.d, base_subspace.n
    fiber = base_subspace.complement()
    rng = np.random.default_rng(seed)
    u = rng.random((num_points, n))
    m = d - n
    n_folds = 6
    vals = np.zeros((num_points, m))
    for j in range(m):
        b = rng.normal(size=(n_folds, n))
        b /= np.linalg.norm(b, axis=1, keepdims=True)
        c = rng.random(n_folds)
        a = rng.uniform(-1.0, 1.0, n_folds)
        a *= (slope_bound / np.sqrt(m)) / max(np.sum(np.abs(a)), 1e-300)
        vals[:, j] = np.abs(u @ b.T - c[None, :]) @ a
    pts = u @ base_subspace.basis.T + vals @ fiber.basis.T
    return DiscreteMeasure(pts, np.full(num_points, 1.0 / num_points))


def generate_plane_grid(n_side: int, d: int = 3) -> DiscreteMeasure:
    """Cell-centre grid on the unit square of the x1x2-plane, mass = area."""
    if n_side < 1:
        raise ValueError("n_side must be >= 1")
    t = (np.arange(n_side) + 0.5) / n_side
    xx, yy = np.meshgrid(t, t, indexing="ij")
    pts = np.zeros((n_side * n_side, d))
    pts[:, 0] = xx.ravel()
    pts[:, 1] = yy.ravel()
    return DiscreteMeasure(pts, np.full(n_side * n_side, 1.0 / n_side ** 2))


def pairwise_distances(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def min_pairwise_distance(mu: DiscreteMeasure) -> float:
    """Smallest positive distance between distinct support atoms."""
    pts = mu.points[mu.support]
    if len(pts) < 2:
        return np.inf
    D = pairwise_distances(pts)
    D = D[np.triu_indices(len(pts), 1)]
    D = D[D > 0]
    return float(D.min()) if D.size else np.inf
