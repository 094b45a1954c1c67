"""Plain-loop reference implementations of the kernel sums.

Deliberately written without vectorisation or shared helpers so they can
serve as an independent oracle for the fast kernels.
"""
import math


def _pts(mu):
    return [tuple(float(c) for c in p) for p in mu.points], [float(w) for w in mu.weights]


def _dist(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def curvature(mu, eps):
    P, W = _pts(mu)
    total = 0.0
    N = len(P)
    for i in range(N):
        for j in range(N):
            if j == i or W[i] * W[j] == 0:
                continue
            for k in range(N):
                if k == i or k == j:
                    continue
                a, b, c = _dist(P[i], P[j]), _dist(P[j], P[k]), _dist(P[i], P[k])
                if a <= eps or b <= eps or c <= eps:
                    continue
                ux, uy = P[j][0] - P[i][0], P[j][1] - P[i][1]
                vx, vy = P[k][0] - P[i][0], P[k][1] - P[i][1]
                area2 = abs(ux * vy - uy * vx)
                inv_r = 2.0 * area2 / (a * b * c)
                total += W[i] * W[j] * W[k] * inv_r * inv_r
    return total


def _in_cone(basis, s, w):
    # basis: list of orthonormal column vectors of V
    norm = math.sqrt(sum(c * c for c in w))
    if norm == 0:
        return False
    proj = [0.0] * len(w)
    for col in basis:
        dot = sum(a * b for a, b in zip(col, w))
        proj = [p + dot * c for p, c in zip(proj, col)]
    off = math.sqrt(sum((a - b) ** 2 for a, b in zip(w, proj)))
    return off < s * norm


def conical(mu, cone, n, lower, upper=math.inf, closed=False, window=None):
    P, W = _pts(mu)
    basis = [list(map(float, cone.subspace.basis[:, j])) for j in range(cone.subspace.n)]
    total = 0.0
    for i in range(len(P)):
        if window is not None and _dist(P[i], window.center) >= window.radius:
            continue
        for j in range(len(P)):
            if i == j:
                continue
            r = _dist(P[i], P[j])
            inside = (lower <= r <= upper) if closed else (lower < r <= upper)
            if not inside:
                continue
            w = [a - b for a, b in zip(P[i], P[j])]
            if _in_cone(basis, cone.aperture, w):
                total += W[i] * W[j] / r ** n
    return total


def riesz(mu, n, eps):
    P, W = _pts(mu)
    total = 0.0
    for i in range(len(P)):
        acc = [0.0] * len(P[i])
        for j in range(len(P)):
            r = _dist(P[i], P[j])
            if j == i or r <= eps:
                continue
            acc = [a + W[j] * (x - y) / r ** (n + 1) for a, x, y in zip(acc, P[i], P[j])]
        total += W[i] * sum(a * a for a in acc)
    return total


def cauchy(mu, eps):
    P, W = _pts(mu)
    total = 0.0
    for i in range(len(P)):
        acc = 0j
        zi = complex(*P[i])
        for j in range(len(P)):
            zj = complex(*P[j])
            if j == i or abs(zi - zj) <= eps:
                continue
            acc += W[j] / (zi - zj)
        total += W[i] * abs(acc) ** 2
    return total
