"""Subspaces, projections, the operator-norm metric on G(d, n), cones and
direction sets.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import multigammaln


@dataclass(frozen=True, eq=False)
class Subspace:
    """An n-plane through the origin of R^d, stored by an orthonormal basis (d x n)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.array(self.basis, dtype=float, copy=True)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        d, n = B.shape
        if not 0 < n < d:
            raise ValueError(f"need 0 < n < d, got n={n}, d={d}")
        if not np.allclose(B.T @ B, np.eye(n), atol=1e-10, rtol=0):
            raise ValueError("basis columns are not orthonormal")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def from_vectors(cls, vectors):
        """Span of the given columns (orthonormalised)."""
        A = np.asarray(vectors, dtype=float)
        if A.ndim == 1:
            A = A.reshape(-1, 1)
        Q, R = np.linalg.qr(A)
        if np.min(np.abs(np.diag(R))) < 1e-12 * max(1.0, np.max(np.abs(R))):
            raise ValueError("vectors are linearly dependent")
        return cls(Q * np.sign(np.diag(R))[None, :])

    @classmethod
    def coordinate(cls, d, axes):
        return cls(np.eye(d)[:, list(axes)])

    @classmethod
    def line(cls, theta):
        """The line L_theta = {r e^{i theta}} in the plane."""
        return cls(np.array([[math.cos(theta)], [math.sin(theta)]]))

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def project(self, x) -> np.ndarray:
        """Orthogonal projection of point(s) in ambient coordinates."""
        x = np.asarray(x, dtype=float)
        return (x @ self.basis) @ self.basis.T

    def coords(self, x) -> np.ndarray:
        """Coordinates of the projection in the stored basis."""
        return np.asarray(x, dtype=float) @ self.basis

    def dist(self, x) -> np.ndarray:
        """Euclidean distance from point(s) to the subspace."""
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - self.project(x), axis=-1)

    def complement(self) -> "Subspace":
        # last d - n left singular vectors span the orthogonal complement
        U, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        C = U[:, self.n:]
        return Subspace(_canonical_signs(C))

    def contains(self, x, tol=1e-10) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(self.dist(x) <= tol * max(1.0, np.linalg.norm(x)))

    def rotated(self, R) -> "Subspace":
        return Subspace(np.asarray(R, dtype=float) @ self.basis)

    def to_json(self):
        return [list(map(float, col)) for col in self.basis.T]

    @classmethod
    def from_json(cls, cols):
        return cls.from_vectors(np.asarray(cols, dtype=float).T)


def _canonical_signs(C):
    C = np.array(C, dtype=float)
    for j in range(C.shape[1]):
        k = np.argmax(np.abs(C[:, j]))
        if C[k, j] < 0:
            C[:, j] = -C[:, j]
    return C


def project_point(V: Subspace, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != V.d:
        raise ValueError("dimension mismatch")
    return V.project(x)


def grassmann_metric(V: Subspace, W: Subspace) -> float:
    """Operator norm of P_V - P_W."""
    if V.d != W.d or V.n != W.n:
        raise ValueError("subspaces must share d and n")
    return float(np.linalg.norm(V.projector() - W.projector(), 2))


@dataclass(frozen=True, eq=False)
class Cone:
    """Open cone K(apex, V, s) = {z : dist(z - apex, V) < s |z - apex|}, apex excluded."""

    subspace: Subspace
    aperture: float
    apex: np.ndarray | None = None

    def __post_init__(self):
        if not self.aperture > 0:
            raise ValueError("aperture must be positive")
        apex = np.zeros(self.subspace.d) if self.apex is None else np.asarray(self.apex, dtype=float)
        object.__setattr__(self, "apex", apex)

    @property
    def d(self):
        return self.subspace.d

    def contains(self, z) -> np.ndarray | bool:
        w = np.asarray(z, dtype=float) - self.apex
        return contains_vectors(self.subspace, self.aperture, w)

    def with_aperture(self, s) -> "Cone":
        return Cone(self.subspace, s, self.apex)

    def at(self, apex) -> "Cone":
        return Cone(self.subspace, self.aperture, apex)

    def rotated(self, R) -> "Cone":
        return Cone(self.subspace.rotated(R), self.aperture, np.asarray(R) @ self.apex)

    @classmethod
    def from_interval(cls, interval: "AngularInterval") -> "Cone":
        """Planar cone K_I: bisector line with aperture sin(|I|/2)."""
        mid = 0.5 * (interval.lo + interval.hi)
        return cls(Subspace.line(mid), math.sin(0.5 * interval.length))

    def to_json(self):
        return {"subspace": self.subspace.to_json(), "aperture": float(self.aperture),
                "apex": list(map(float, self.apex))}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        if obj.get("type") == "interval":
            return cls.from_interval(AngularInterval(obj["lo"], obj["hi"]))
        unknown = set(obj) - {"subspace", "aperture", "apex", "type"}
        if unknown:
            raise ValueError(f"unknown cone fields: {sorted(unknown)}")
        return cls(Subspace.from_json(obj["subspace"]), float(obj["aperture"]), obj.get("apex"))


def contains_vectors(V: Subspace, s, w) -> np.ndarray | bool:
    """Vectorised test |w - P_V w| < s |w| and w != 0 over the last axis."""
    w = np.asarray(w, dtype=float)
    norm = np.linalg.norm(w, axis=-1)
    dist = np.linalg.norm(w - V.project(w), axis=-1)
    out = (dist < s * norm) & (norm > 0)
    return bool(out) if out.ndim == 0 else out


def cone_contains(K: Cone, z) -> bool:
    return K.contains(z)


# ----------------------------------------------------------- direction sets

@dataclass(frozen=True)
class AngularInterval:
    """Angles [lo, hi] in radians, 0 <= lo < pi, 0 < hi - lo <= pi (may wrap past pi)."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not hi > lo:
            raise ValueError("empty angular interval")
        if hi - lo > math.pi + 1e-12:
            raise ValueError("interval longer than pi")
        shift = math.floor(lo / math.pi) * math.pi
        object.__setattr__(self, "lo", lo - shift)
        object.__setattr__(self, "hi", hi - shift)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def perp(self) -> "AngularInterval":
        return AngularInterval(self.lo + math.pi / 2, self.hi + math.pi / 2)

    def contains_angle(self, alpha) -> np.ndarray:
        a = np.mod(np.asarray(alpha, dtype=float) - self.lo, math.pi)
        return (a > 0) & (a < self.length)

    def to_json(self):
        return {"type": "interval", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True, eq=False)
class GrassmannBall:
    center: Subspace
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def contains(self, V: Subspace) -> bool:
        return self.radius >= 1.0 or grassmann_metric(V, self.center) < self.radius

    def to_json(self):
        return {"type": "ball", "center": self.center.to_json(), "radius": float(self.radius)}


def direction_set_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("type")
    if kind == "interval":
        return AngularInterval(obj["lo"], obj["hi"])
    if kind == "ball":
        return GrassmannBall(Subspace.from_json(obj["center"]), float(obj["radius"]))
    raise ValueError(f"unknown direction set type {kind!r}")


# ------------------------------------------------------------------ sampling

def sample_uniform_subspace(d, n, rng) -> Subspace:
    """Haar-distributed n-plane: orthonormalised Gaussian d x n matrix."""
    if not 0 < n < d:
        raise ValueError("need 0 < n < d")
    G = rng.standard_normal((d, n))
    Q, R = np.linalg.qr(G)
    return Subspace(Q * np.sign(np.diag(R))[None, :])


def _sample_projectors(d, n, num, rng):
    G = rng.standard_normal((num, d, n))
    Q, _ = np.linalg.qr(G)
    return Q


def grassmann_ball_volume_mc(center: Subspace, delta, num_samples, rng, return_se=False):
    """Fraction of Haar samples within operator-norm distance delta of ``center``."""
    if num_samples <= 0:
        raise ValueError("num_samples must be positive")
    if delta >= 1:
        return (1.0, 0.0) if return_se else 1.0
    d, n = center.d, center.n
    P0 = center.projector()
    hits = 0
    done = 0
    block = 4096
    while done < num_samples:
        m = min(block, num_samples - done)
        Q = _sample_projectors(d, n, m, rng)
        P = Q @ np.swapaxes(Q, 1, 2)
        dist = np.linalg.norm(P - P0[None], ord=2, axis=(1, 2))
        hits += int(np.count_nonzero(dist < delta))
        done += m
    p = hits / num_samples
    se = math.sqrt(p * (1 - p) / num_samples)
    return (p, se) if return_se else p


def _chart_log_normaliser(d, n):
    # log of the integral of det(I + X^T X)^(-d/2) over (d-n) x n matrices
    k = d - n
    return 0.5 * n * k * math.log(math.pi) + multigammaln(n / 2, n) - multigammaln(d / 2, n)


def grassmann_ball_volume_chart(center: Subspace, delta, num_samples, rng, return_se=False):
    """Haar volume of B(center, delta) by importance sampling in the graph chart.

    Subspaces near ``center`` are graphs {v + X v} of (d-n) x n matrices X;
    the invariant measure there has density proportional to
    det(I + X^T X)^(-d/2), with known total mass. The distance to ``center``
    is the sine of the largest principal angle, i.e. ||X|| < tan(arcsin delta).
    X is drawn uniformly from the enclosing entrywise box, so the estimator
    stays accurate for balls far too small for rejection sampling.
    """
    if num_samples <= 0:
        raise ValueError("num_samples must be positive")
    if delta >= 1:
        return (1.0, 0.0) if return_se else 1.0
    d, n = center.d, center.n
    k = d - n
    t = math.tan(math.asin(delta))
    X = rng.uniform(-t, t, size=(num_samples, k, n))
    sig = np.linalg.norm(X, ord=2, axis=(1, 2))
    gram = np.eye(n)[None] + np.swapaxes(X, 1, 2) @ X
    _, logdet = np.linalg.slogdet(gram)
    dens = np.exp(-0.5 * d * logdet - _chart_log_normaliser(d, n))
    box = (2 * t) ** (k * n)
    vals = np.where(sig < t, dens, 0.0) * box
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(num_samples)) if num_samples > 1 else 0.0
    return (est, se) if return_se else est


def subspace_near(center: Subspace, X) -> Subspace:
    """The graph of X : center -> center^perp as a subspace."""
    C = center.complement()
    return Subspace.from_vectors(center.basis + C.basis @ np.asarray(X, dtype=float))


def householder_embedding(x) -> np.ndarray:
    """Isometric embedding A : R^(d-1) -> x^perp with A^T A = I.

    Built from the reflection that swaps e_d and x/|x|, so A is the identity
    on the first d-1 axes when x is a positive multiple of e_d.
    """
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm == 0:
        raise ValueError("x must be nonzero")
    d = x.size
    xhat = x / norm
    e = np.zeros(d)
    e[-1] = 1.0
    v = xhat - e
    vv = v @ v
    H = np.eye(d) if vv < 1e-30 else np.eye(d) - 2.0 * np.outer(v, v) / vv
    return H[:, : d - 1]


def lift_isometry(x, V_small: Subspace, A=None) -> Subspace:
    """V -> span(A V, x), an isometry from G(d-1, n-1) onto {W in G(d, n) : x in W}."""
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) == 0:
        raise ValueError("x must be nonzero")
    A = householder_embedding(x) if A is None else np.asarray(A, dtype=float)
    if A.shape != (x.size, x.size - 1) or V_small.d != x.size - 1:
        raise ValueError("dimension mismatch")
    cols = np.column_stack([A @ V_small.basis, x / np.linalg.norm(x)])
    return Subspace.from_vectors(cols)


def rotation_2d(phi) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def random_rotation(d, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    Q = Q * np.sign(np.diag(R))[None, :]
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
