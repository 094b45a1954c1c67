"""Nested net-tree cube lattice on the support of a discrete measure.

Level k uses radius r_k = unit * A0^-k, where ``unit`` is a tenth of the
support diameter. Its centres form a greedy maximal 11 r_k-separated net
that contains the level k-1 centres (scan in point-index order). A level-k
centre hangs below its nearest level k-1 centre. Every point joins the cube
of its nearest finest-level centre and then inherits that cube's ancestors,
so cubes nest and partition the support at each level.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .measures import DiscreteMeasure, pairwise_distances

SEPARATION = 11.0
BALL_FACTOR = 28.0


@dataclass
class Cube:
    id: int
    level: int
    center_index: int
    center: np.ndarray
    radius: float
    members: np.ndarray
    parent: int | None
    children: list = field(default_factory=list)
    doubling: bool = False


@dataclass
class CubeLattice:
    mu: DiscreteMeasure
    A0: float
    C0: float
    unit: float
    cubes: list
    levels: list
    point_cube: np.ndarray  # (num levels, N) cube id of every atom per level

    @property
    def root(self) -> Cube:
        return self.cubes[self.levels[0][0]]

    @property
    def k_max(self):
        return len(self.levels) - 1

    def __getitem__(self, cid) -> Cube:
        return self.cubes[cid]

    def _cube(self, Q) -> Cube:
        return Q if isinstance(Q, Cube) else self.cubes[Q]

    def mass(self, Q) -> float:
        Q = self._cube(Q)
        return float(np.sum(self.mu.weights[Q.members]))

    def ball_mass(self, Q, factor=1.0) -> float:
        Q = self._cube(Q)
        return self.mu.mass_in_ball(Q.center, factor * Q.radius)

    def side(self, Q) -> float:
        """l(Q) = 56 C0 r_Q."""
        return 2.0 * BALL_FACTOR * self.C0 * self._cube(Q).radius

    def theta(self, Q, factor, n) -> float:
        """Density mu(factor B(Q)) / diam^n."""
        Q = self._cube(Q)
        return self.ball_mass(Q, factor) / (2.0 * factor * Q.radius) ** n

    def theta_2BQ(self, Q, n) -> float:
        """Theta of 2B_Q = B(x_Q, 56 r_Q)."""
        return self.theta(Q, 2.0 * BALL_FACTOR, n)

    def contains(self, Q, S) -> bool:
        """Q subset of S."""
        Q, S = self._cube(Q), self._cube(S)
        return Q.level >= S.level and int(self.point_cube[S.level, Q.center_index]) == S.id

    def ancestors(self, Q, include_self=True):
        Q = self._cube(Q)
        out = [Q] if include_self else []
        while Q.parent is not None:
            Q = self.cubes[Q.parent]
            out.append(Q)
        return out

    def descendants(self, Q, include_self=True):
        Q = self._cube(Q)
        out, stack = [], [Q]
        while stack:
            c = stack.pop()
            out.append(c)
            stack.extend(self.cubes[i] for i in reversed(c.children))
        return out if include_self else out[1:]

    def level_cubes(self, k):
        return [self.cubes[i] for i in self.levels[k]]

    def is_singleton(self, Q) -> bool:
        Q = self._cube(Q)
        pts = self.mu.points[Q.members]
        return bool(np.all(pts == Q.center))

    def to_json(self):
        return {
            "A0": self.A0, "C0": self.C0, "unit": self.unit,
            "levels": [list(map(int, lv)) for lv in self.levels],
            "cubes": [{
                "id": c.id, "level": c.level, "center_index": c.center_index,
                "center": [float(v) for v in c.center], "radius": c.radius,
                "members": [int(m) for m in c.members], "parent": c.parent,
                "children": list(c.children), "doubling": c.doubling,
            } for c in self.cubes],
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def _greedy_net(P, order, centres, sep):
    """Extend ``centres`` to a maximal sep-separated net, scanning ``order``."""
    centres = list(centres)
    if centres:
        mind = np.min(np.linalg.norm(P[:, None, :] - P[centres][None, :, :], axis=2), axis=1)
    else:
        mind = np.full(len(P), np.inf)
    for i in order:
        if mind[i] >= sep:
            centres.append(int(i))
            mind = np.minimum(mind, np.linalg.norm(P - P[i], axis=1))
    return centres


def build_lattice(mu: DiscreteMeasure, A0=8.0, C0=2.0, k_max=12) -> CubeLattice:
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if A0 < 4:
        raise ValueError(f"A0 must be >= 4, got {A0!r}")
    if C0 < 1:
        raise ValueError("C0 must be >= 1")
    sup = mu.support
    if sup.size == 0:
        raise ValueError("measure has empty support")
    P = mu.points[sup]
    N = len(P)
    diam = float(pairwise_distances(P).max()) if N > 1 else 0.0
    unit = diam / 10.0 if diam > 0 else 1.0
    order = np.arange(N)

    nets = [[0]]
    for k in range(1, k_max + 1):
        r = unit * A0 ** -k
        nets.append(_greedy_net(P, order, nets[-1], SEPARATION * r))
        if len(nets[-1]) == len(nets[-2]) and _all_resolved(P, nets[-1]):
            nets.pop()
            break
        if _all_resolved(P, nets[-1]):
            break

    # parents of centres: nearest coarser centre, lowest index on ties
    parent_centre = [None]
    for k in range(1, len(nets)):
        prev = np.asarray(nets[k - 1])
        cur = np.asarray(nets[k])
        D = np.linalg.norm(P[cur][:, None, :] - P[prev][None, :, :], axis=2)
        parent_centre.append(prev[np.argmin(D, axis=1)])

    cubes = []
    levels = []
    cid_of = []
    for k, net in enumerate(nets):
        ids = {}
        for c in net:
            ids[c] = len(cubes)
            radius = unit * A0 ** -k
            cubes.append(Cube(len(cubes), k, int(sup[c]), P[c].copy(), radius, None, None))
        levels.append([ids[c] for c in net])
        cid_of.append(ids)
        if k > 0:
            for c, pc in zip(net, parent_centre[k]):
                q = cubes[ids[c]]
                q.parent = cid_of[k - 1][int(pc)]
                cubes[q.parent].children.append(q.id)

    # every point follows its nearest finest centre up the tree
    K = len(nets) - 1
    fine = np.asarray(nets[K])
    D = np.linalg.norm(P[:, None, :] - P[fine][None, :, :], axis=2)
    nearest = fine[np.argmin(D, axis=1)]
    point_cube = np.zeros((K + 1, N), dtype=int)
    point_cube[K] = [cid_of[K][int(c)] for c in nearest]
    for k in range(K, 0, -1):
        point_cube[k - 1] = [cubes[q].parent for q in point_cube[k]]
    for k in range(K + 1):
        for q in levels[k]:
            cubes[q].members = sup[np.flatnonzero(point_cube[k] == q)]

    full = np.full((K + 1, len(mu)), -1, dtype=int)
    full[:, sup] = point_cube
    lat = CubeLattice(mu, float(A0), float(C0), unit, cubes, levels, full)
    root = cubes[levels[0][0]]
    if not doubling_flag(lat, root):
        # enlarge the root ball until B(R0) carries the whole measure
        far = float(np.max(np.linalg.norm(P - root.center, axis=1)))
        root.radius = max(root.radius, far * (1.0 + 1e-9) + 1e-300)
    for c in cubes:
        c.doubling = doubling_flag(lat, c)
    return lat


def _all_resolved(P, net):
    # every point coincides with a centre
    if len(net) == len(P):
        return True
    D = np.linalg.norm(P[:, None, :] - P[np.asarray(net)][None, :, :], axis=2)
    return bool(np.all(D.min(axis=1) == 0))


def doubling_flag(lattice: CubeLattice, Q) -> bool:
    """mu(100 B(Q)) <= C0 mu(B(Q))."""
    return lattice.ball_mass(Q, 100.0) <= lattice.C0 * lattice.ball_mass(Q, 1.0)


def delta_mu(lattice: CubeLattice, Q, S, n) -> float:
    """sum over atoms y in 2B_S minus 2B_Q of w(y) / |y - x_Q|^n."""
    Q, S = lattice._cube(Q), lattice._cube(S)
    if not lattice.contains(Q, S):
        raise ValueError("Q is not contained in S")
    mu = lattice.mu
    rq = 2.0 * BALL_FACTOR * Q.radius
    rs = 2.0 * BALL_FACTOR * S.radius
    dq = np.linalg.norm(mu.points - Q.center, axis=1)
    ds = np.linalg.norm(mu.points - S.center, axis=1)
    sel = (ds < rs) & ~(dq < rq) & (mu.weights > 0)
    return float(np.sum(mu.weights[sel] / dq[sel] ** n))


def maximal_doubling_descendants(lattice: CubeLattice, Q) -> list:
    """Maximal doubling cubes strictly inside Q."""
    Q = lattice._cube(Q)
    out, stack = [], [lattice.cubes[i] for i in reversed(Q.children)]
    while stack:
        c = stack.pop()
        if c.doubling:
            out.append(c)
        else:
            stack.extend(lattice.cubes[i] for i in reversed(c.children))
    return out


def md_mass_fraction(lattice: CubeLattice, Q) -> float:
    m = lattice.mass(Q)
    if m == 0:
        return 0.0
    return sum(lattice.mass(c) for c in maximal_doubling_descendants(lattice, Q)) / m


def doubling_ancestor_density_check(lattice: CubeLattice, Q, R, n) -> float:
    """sum_{Q <= S < R} Theta(100 B(S)) / Theta(100 B(R)); cubes strictly
    between Q and R must be non-doubling.
    """
    Q, R = lattice._cube(Q), lattice._cube(R)
    if not lattice.contains(Q, R) or Q.id == R.id:
        raise ValueError("Q must be strictly contained in R")
    chain = []
    c = Q
    while c.id != R.id:
        chain.append(c)
        c = lattice.cubes[c.parent]
    if any(s.doubling for s in chain[1:]):
        raise ValueError("an intermediate cube is doubling")
    top = lattice.theta(R, 100.0, n)
    total = sum(lattice.theta(s, 100.0, n) for s in chain)
    return total / top if top > 0 else np.inf


# ----------------------------------------------------------- diagnostics

def invariant_report(lattice: CubeLattice) -> dict:
    """Exact structural checks plus the measured ball-containment violations."""
    mu = lattice.mu
    sup = mu.support
    ok_partition = True
    ok_nesting = True
    ok_ball = True
    ok_disjoint = True
    for k, ids in enumerate(lattice.levels):
        allm = np.sort(np.concatenate([lattice.cubes[q].members for q in ids]))
        ok_partition &= np.array_equal(allm, sup)
        for q in ids:
            c = lattice.cubes[q]
            if c.children:
                ch = np.sort(np.concatenate([lattice.cubes[i].members for i in c.children]))
                ok_nesting &= np.array_equal(ch, np.sort(c.members))
            if c.parent is not None:
                d = np.linalg.norm(mu.points[c.members] - c.center, axis=1)
                ok_ball &= bool(np.all(d <= BALL_FACTOR * c.radius))
        if len(ids) > 1:
            C = np.array([lattice.cubes[q].center for q in ids])
            r = np.array([lattice.cubes[q].radius for q in ids])
            D = pairwise_distances(C)
            R = 10.0 * np.maximum(r[:, None], r[None, :])
            iu = np.triu_indices(len(ids), 1)
            ok_disjoint &= bool(np.all(D[iu] > R[iu]))
    bad = np.zeros(len(mu), dtype=bool)
    for c in lattice.cubes:
        if c.parent is None:
            continue
        inside = np.linalg.norm(mu.points - c.center, axis=1) < c.radius
        inside &= mu.weights > 0
        inside[c.members] = False
        bad |= inside
    return {
        "partition": bool(ok_partition),
        "nesting": bool(ok_nesting),
        "ball28": bool(ok_ball),
        "disjoint5B": bool(ok_disjoint),
        "containment_violation_fraction": float(bad.sum() / max(sup.size, 1)),
    }


def boundary_mass_profile(lattice: CubeLattice, k, depths=(1, 2, 3)) -> list:
    """Fraction of mass of level-k cubes lying within A0^-l r_k of another
    level-k cube, for each depth l.
    """
    mu = lattice.mu
    sup = mu.support
    P, w = mu.points[sup], mu.weights[sup]
    lab = lattice.point_cube[k, sup]
    D = pairwise_distances(P)
    D[lab[:, None] == lab[None, :]] = np.inf
    dist_out = D.min(axis=1) if len(P) else np.zeros(0)
    r = lattice.unit * lattice.A0 ** -k
    total = w.sum()
    return [float(w[dist_out < lattice.A0 ** -l * r].sum() / total) for l in depths]


def level_stats(lattice: CubeLattice) -> list:
    rows = []
    for k, ids in enumerate(lattice.levels):
        cubes = [lattice.cubes[q] for q in ids]
        frac = sum(c.doubling for c in cubes) / len(cubes)
        rows.append([k, len(cubes), frac] + boundary_mass_profile(lattice, k))
    return rows


def level_stats_csv(lattice: CubeLattice) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["level", "cubes", "doubling_fraction", "boundary_l1", "boundary_l2",
                     "boundary_l3"])
    for row in level_stats(lattice):
        writer.writerow([row[0], row[1]] + [repr(float(v)) for v in row[2:]])
    return buf.getvalue()
