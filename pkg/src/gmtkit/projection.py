"""Projection L^2 energies of mollified measures and their Fourier-side twins.

The mollifier is a Gaussian of standard deviation eps in every coordinate,

    phi_eps(x) = (2 pi eps^2)^(-d/2) exp(-|x|^2 / (2 eps^2)),
    phi_eps^(xi) = exp(-2 pi^2 eps^2 |xi|^2),

so that for an n-plane V

    ||P_V(mu * phi_eps)||_2^2 = sum_ij w_i w_j (4 pi eps^2)^(-n/2)
                                exp(-|P_V(x_i - x_j)|^2 / (4 eps^2)).

Fourier transforms use the e^{-2 pi i x.xi} convention throughout.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_rows, tree_sum
from .energies import conical_energy
from .grassmann import (AngularInterval, Cone, GrassmannBall, Subspace, _sample_projectors,
                        grassmann_metric)
from .measures import DiscreteMeasure, _closed_ball_sup, min_pairwise_distance, pairwise_distances

DEFAULT_THETA_NODES = 64
DEFAULT_RADIAL_NODES = 256
DEFAULT_ANGULAR_NODES = 128
RADIAL_CUTOFF = 6.0


@dataclass(frozen=True)
class MollifierSpec:
    epsilon: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError("only the gaussian mollifier is supported")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def autocorrelation_peak(self, n):
        """(phi_eps * phi_eps)(0) restricted to an n-plane: (4 pi eps^2)^(-n/2)."""
        return (4.0 * math.pi * self.epsilon ** 2) ** (-n / 2)

    def ft_sq(self, r):
        """|phi_eps^(xi)|^2 at |xi| = r."""
        return np.exp(-4.0 * math.pi ** 2 * self.epsilon ** 2 * np.asarray(r) ** 2)

    def radial_cutoff(self):
        return RADIAL_CUTOFF / (2.0 * math.pi * self.epsilon)

    def scaled(self, lam):
        return MollifierSpec(self.epsilon * lam, self.kind)


@dataclass
class ProjectionEnergy:
    value: float
    direction_set: object
    epsilon: float
    method: str
    quadrature_nodes: int
    standard_error: float = 0.0
    nodes: list = field(default_factory=list, repr=False)
    node_values: np.ndarray | None = field(default=None, repr=False)
    accepted_fraction: float | None = None

    def to_json(self):
        ds = self.direction_set
        out = {
            "value": self.value,
            "epsilon": self.epsilon,
            "method": self.method,
            "quadrature_nodes": self.quadrature_nodes,
            "standard_error": self.standard_error,
            "direction_set": ds.to_json() if hasattr(ds, "to_json") else ds,
        }
        if self.accepted_fraction is not None:
            out["accepted_fraction"] = self.accepted_fraction
        return out


def gauss_legendre(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _gauss_pair_sum(coords, w, eps):
    """sum_ij w_i w_j exp(-|c_i - c_j|^2 / (4 eps^2)) over projected coordinates."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    N = len(w)
    if N == 0:
        return 0.0
    inv = 1.0 / (4.0 * eps * eps)

    def rows(a, b):
        diff = coords[a:b, None, :] - coords[None, :, :]
        q = np.einsum("ijk,ijk->ij", diff, diff)
        return w[a:b] * (np.exp(-q * inv) @ w)

    return tree_sum(map_rows(rows, N))


def projection_l2_energy(mu: DiscreteMeasure, V: Subspace, moll: MollifierSpec) -> float:
    """||P_V(mu * phi_eps)||_2^2 in closed form."""
    if V.d != mu.dim:
        raise ValueError("dimension mismatch")
    idx = mu.support
    coords = mu.points[idx] @ V.basis
    return moll.autocorrelation_peak(V.n) * _gauss_pair_sum(coords, mu.weights[idx], moll.epsilon)


def line_energy(mu: DiscreteMeasure, theta: float, moll: MollifierSpec) -> float:
    """||P_theta(mu * phi_eps)||_2^2 for the planar line at angle theta."""
    return projection_l2_energy(mu, Subspace.line(theta), moll)


def theta_profile(mu: DiscreteMeasure, thetas, moll: MollifierSpec) -> np.ndarray:
    return np.array([line_energy(mu, float(t), moll) for t in thetas])


def directional_energy_interval(mu: DiscreteMeasure, I: AngularInterval, moll: MollifierSpec,
                                num_theta_nodes=DEFAULT_THETA_NODES) -> ProjectionEnergy:
    """int_I ||P_theta mu_eps||_2^2 dtheta by Gauss-Legendre quadrature in theta."""
    if mu.dim != 2:
        raise ValueError("directional energies over angle intervals need d = 2")
    if not I.length > 0:
        raise ValueError("empty interval")
    th, wt = gauss_legendre(I.lo, I.hi, num_theta_nodes)
    vals = theta_profile(mu, th, moll)
    return ProjectionEnergy(tree_sum(wt * vals), I, moll.epsilon, "pairwise", num_theta_nodes,
                            nodes=list(th), node_values=vals)


def grassmann_ball_energy(mu: DiscreteMeasure, ball: GrassmannBall, moll: MollifierSpec,
                          num_samples, rng) -> ProjectionEnergy:
    """Monte Carlo estimate of the unnormalised integral over B(V0, s) against the
    Haar probability on G(d, n): (accepted fraction) x (mean energy of accepted).

    In the plane the Haar probability is dtheta / pi.
    """
    V0 = ball.center
    d, n = V0.d, V0.n
    if num_samples <= 0:
        raise ValueError("num_samples must be positive")
    Q = _sample_projectors(d, n, num_samples, rng)
    if ball.radius >= 1.0:
        accepted = np.arange(num_samples)
    else:
        P = Q @ np.swapaxes(Q, 1, 2)
        dist = np.linalg.norm(P - V0.projector()[None], ord=2, axis=(1, 2))
        accepted = np.flatnonzero(dist < ball.radius)
    if accepted.size == 0:
        raise ValueError("no Monte Carlo sample fell inside the Grassmannian ball")
    subspaces = [Subspace(_orthonormal(Q[k])) for k in accepted]
    energies = np.array([projection_l2_energy(mu, V, moll) for V in subspaces])
    y = np.zeros(num_samples)
    y[accepted] = energies
    value = tree_sum(y) / num_samples
    se = float(np.std(y, ddof=1) / math.sqrt(num_samples)) if num_samples > 1 else 0.0
    return ProjectionEnergy(value, ball, moll.epsilon, "pairwise-mc", num_samples, se,
                            nodes=subspaces, node_values=energies,
                            accepted_fraction=accepted.size / num_samples)


def _orthonormal(B):
    # QR output is orthonormal to machine precision; re-orthonormalise defensively
    Qm, R = np.linalg.qr(B)
    return Qm * np.sign(np.diag(R))[None, :]


# ------------------------------------------------------------ Fourier side

def _polar_nodes(J: AngularInterval, moll: MollifierSpec, radial_nodes, angular_nodes):
    """Frequencies and weights of the polar rule over the double cone K_J.

    |xi|^-1 dxi = dr dtheta with r over the whole line; the integrand is even
    in r, so only r > 0 is sampled and weights are doubled.
    """
    th, wt = gauss_legendre(J.lo, J.hi, angular_nodes)
    r, wr = gauss_legendre(0.0, moll.radial_cutoff(), radial_nodes)
    xi = np.stack([np.outer(np.cos(th), r), np.outer(np.sin(th), r)], axis=-1).reshape(-1, 2)
    W = (2.0 * np.outer(wt, wr * moll.ft_sq(r))).reshape(-1)
    return xi, W


def fourier_transform(mu: DiscreteMeasure, xi) -> np.ndarray:
    """mu^(xi) = sum_j w_j exp(-2 pi i x_j . xi)."""
    phase = -2.0 * math.pi * (np.asarray(xi) @ mu.points.T)
    return np.exp(1j * phase) @ mu.weights


def fourier_cone_energy(mu: DiscreteMeasure, I: AngularInterval, moll: MollifierSpec,
                        radial_nodes=DEFAULT_RADIAL_NODES,
                        angular_nodes=DEFAULT_ANGULAR_NODES) -> ProjectionEnergy:
    """int over K_{I^perp} of |xi|^-1 |mu^(xi)|^2 |phi_eps^(xi)|^2 dxi."""
    if mu.dim != 2:
        raise ValueError("need d = 2")
    xi, W = _polar_nodes(I.perp(), moll, radial_nodes, angular_nodes)
    F = fourier_transform(mu, xi) if len(mu) else np.zeros(len(W))
    value = tree_sum(W * (F.real ** 2 + F.imag ** 2))
    return ProjectionEnergy(value, I, moll.epsilon, "fourier", radial_nodes * angular_nodes)


def cone_kernel(z, I: AngularInterval, moll: MollifierSpec,
                radial_nodes=DEFAULT_RADIAL_NODES, angular_nodes=DEFAULT_ANGULAR_NODES):
    """Smoothed cone kernel kappa_eps(z), the inverse transform of
    chi_{K_{I^perp}} |xi|^-1 |phi_eps^|^2, on the same polar rule.
    """
    xi, W = _polar_nodes(I.perp(), moll, radial_nodes, angular_nodes)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return np.cos(2.0 * math.pi * (z @ xi.T)) @ W


def cone_kernel_energy_smoothed(mu: DiscreteMeasure, I: AngularInterval, moll: MollifierSpec,
                                radial_nodes=DEFAULT_RADIAL_NODES,
                                angular_nodes=DEFAULT_ANGULAR_NODES) -> ProjectionEnergy:
    """sum_ij w_i w_j kappa_eps(x_i - x_j): the pair-sum form of the cone energy."""
    if mu.dim != 2:
        raise ValueError("need d = 2")
    xi, W = _polar_nodes(I.perp(), moll, radial_nodes, angular_nodes)
    P, w = mu.points, mu.weights

    def rows(a, b):
        out = np.zeros(b - a)
        for i in range(a, b):
            phase = 2.0 * math.pi * ((P[i] - P) @ xi.T)
            out[i - a] = w[i] * (w @ (np.cos(phase) @ W))
        return out

    value = tree_sum(map_rows(rows, len(P), chunk=8)) if len(P) else 0.0
    return ProjectionEnergy(value, I, moll.epsilon, "cone-kernel", radial_nodes * angular_nodes)


# ------------------------------------------------- maximal function, densities

def maximal_function(mu: DiscreteMeasure, x, n, r_min) -> float:
    """M_n mu(x) = sup_{r >= r_min} mu(closed B(x, r)) / r^n, attained on candidate radii."""
    if not r_min > 0:
        raise ValueError("r_min must be positive")
    idx = mu.support
    if idx.size == 0:
        return 0.0
    d = np.linalg.norm(mu.points[idx] - np.asarray(x, dtype=float), axis=1)
    return _closed_ball_sup(d, mu.weights[idx], n, r_min)


@dataclass
class DensityProfile:
    scales: np.ndarray
    values: np.ndarray

    @property
    def limsup_proxy(self):
        """Value at the smallest scale; a finite-resolution stand-in, not a limit."""
        return float(self.values[-1])


def upper_density_profile(mu: DiscreteMeasure, x, n, scales) -> DensityProfile:
    """mu(B(x, r)) / r^n (open balls) along a decreasing list of scales."""
    scales = np.asarray(scales, dtype=float)
    if scales.size == 0:
        raise ValueError("scales must be nonempty")
    if np.any(scales <= 0) or np.any(np.diff(scales) > 0):
        raise ValueError("scales must be positive and decreasing")
    d = np.linalg.norm(mu.points - np.asarray(x, dtype=float), axis=1)
    vals = np.array([np.sum(mu.weights[d < r]) / r ** n for r in scales])
    return DensityProfile(scales, vals)


def default_density_scale(mu: DiscreteMeasure) -> float:
    """2.5 x the median nearest-neighbour distance of the support."""
    pts = mu.points[mu.support]
    if len(pts) < 2:
        return 1.0
    D = pairwise_distances(pts)
    np.fill_diagonal(D, np.inf)
    nn = D.min(axis=1)
    nn = nn[np.isfinite(nn) & (nn > 0)]
    return 2.5 * float(np.median(nn)) if nn.size else 1.0


@dataclass
class ReverseInequalityReport:
    lhs: float
    lhs_standard_error: float
    t1: float
    t2: float
    lambda_guess: float
    density_scale: float

    @property
    def measured_c(self):
        den = self.t1 + self.t2
        return self.lhs / den if den > 0 else (0.0 if self.lhs == 0 else math.inf)

    def holds_with(self, c):
        return self.lhs <= c * (self.t1 + self.t2)

    def to_json(self):
        return {"lhs": self.lhs, "lhs_se": self.lhs_standard_error, "t1": self.t1, "t2": self.t2,
                "lambda": self.lambda_guess, "density_scale": self.density_scale,
                "measured_c": self.measured_c}


def reverse_inequality_report(mu: DiscreteMeasure, V0: Subspace, s, moll: MollifierSpec,
                              lambda_guess, num_samples=2000, rng=None, density_scale=None,
                              eps=None) -> ReverseInequalityReport:
    """The three quantities of the reverse projection inequality.

    lhs: ball projection energy over B(V0, s); t1: conical energy over
    K(V0^perp, lambda s) (truncated at ``eps``, default half the smallest atom
    gap); t2: sum_i w_i mu(B(x_i, r)) / r^n at the smallest resolved scale r.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    n = V0.n
    if len(mu.support) == 0:
        return ReverseInequalityReport(0.0, 0.0, 0.0, 0.0, lambda_guess, density_scale or 0.0)
    lhs = grassmann_ball_energy(mu, GrassmannBall(V0, s), moll, num_samples, rng)
    if eps is None:
        gap = min_pairwise_distance(mu)
        eps = 0.5 * gap if np.isfinite(gap) else 1.0
    t1 = conical_energy(mu, Cone(V0.complement(), lambda_guess * s), n, eps).value
    r = default_density_scale(mu) if density_scale is None else density_scale
    idx = mu.support
    P, w = mu.points[idx], mu.weights[idx]
    D = pairwise_distances(P)
    local = (D < r) @ w / r ** n
    t2 = tree_sum(w * local)
    return ReverseInequalityReport(lhs.value, lhs.standard_error, t1, t2, lambda_guess, r)


def profile_csv(thetas, values) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "energy"])
    for t, v in zip(thetas, values):
        writer.writerow([repr(float(t)), repr(float(v))])
    return buf.getvalue()


def interval_of_ball(ball: GrassmannBall) -> AngularInterval:
    """Angle interval of a planar Grassmannian ball: |sin(theta - theta0)| < s."""
    V0 = ball.center
    if V0.d != 2:
        raise ValueError("only planar balls map to angle intervals")
    theta0 = math.atan2(V0.basis[1, 0], V0.basis[0, 0])
    half = math.asin(min(ball.radius, 1.0)) if ball.radius < 1 else math.pi / 2
    return AngularInterval(theta0 - half, theta0 + half)


__all__ = [
    "MollifierSpec", "ProjectionEnergy", "projection_l2_energy", "line_energy", "theta_profile",
    "directional_energy_interval", "grassmann_ball_energy", "fourier_transform",
    "fourier_cone_energy", "cone_kernel", "cone_kernel_energy_smoothed", "maximal_function",
    "upper_density_profile", "DensityProfile", "reverse_inequality_report",
    "ReverseInequalityReport", "default_density_scale", "profile_csv", "interval_of_ball",
    "grassmann_metric",
]
