"""Stopping-time corona decomposition over a cube lattice.

Each tree root R is scanned depth first. A cube stops as HD (doubling and
dense), LD (sparse) or BCE (accumulated conical energy), first hit wins on
every branch. The good atoms and one centre per well separated stop cube are
then fitted by a Lipschitz graph over V0^perp.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energies import banded_conical_energy, conical_energy
from .grassmann import Cone, Subspace, contains_vectors
from .lattice import (BALL_FACTOR, CubeLattice, delta_mu, maximal_doubling_descendants)
from .measures import Ball


@dataclass(frozen=True)
class CoronaParams:
    cone: Cone
    A: float = 20.0
    tau: float = 0.05
    eps_stop: float = 0.002
    eta: float = 0.05
    M: float = 8.0
    t: float = 40.0
    Lambda0: float = 60.0

    def __post_init__(self):
        if not self.A > 1:
            raise ValueError("A must exceed 1")
        if not 0 <= self.tau < 1:
            raise ValueError("tau must lie in [0, 1)")
        if not self.eps_stop > 0:
            raise ValueError("eps_stop must be positive")
        if self.tau > 0 and not self.eps_stop < self.tau:
            raise ValueError("need eps_stop < tau")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if not self.t > self.M > 1:
            raise ValueError("need t > M > 1")
        if self.cone.aperture >= 2:
            raise ValueError("cone aperture must be < 2 so that the graph slope is finite")

    @property
    def n(self) -> int:
        """Dimension of the graphs: d minus dim V0."""
        return self.cone.d - self.cone.subspace.n

    @property
    def slope(self) -> float:
        h = self.cone.aperture / 2.0
        return math.sqrt(max(1.0 - h * h, 0.0)) / h

    def to_json(self):
        return {"A": self.A, "tau": self.tau, "eps_stop": self.eps_stop, "eta": self.eta,
                "M": self.M, "t": self.t, "Lambda0": self.Lambda0, "cone": self.cone.to_json()}

    @classmethod
    def from_json(cls, obj, cone=None):
        obj = dict(obj)
        known = {"A", "tau", "eps_stop", "eta", "M", "t", "Lambda0", "cone"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown corona parameters: {sorted(unknown)}")
        c = obj.pop("cone", None)
        if cone is None:
            if c is None:
                raise ValueError("a cone is required")
            cone = Cone.from_json(c)
        return cls(cone=cone, **{k: float(v) for k, v in obj.items()})


@dataclass
class LipschitzGraphModel:
    base: Subspace
    fiber: Subspace
    base_coords: np.ndarray
    fiber_values: np.ndarray
    slope: float
    anchor_atoms: list = field(default_factory=list)
    excluded: list = field(default_factory=list)

    def evaluate(self, u) -> np.ndarray:
        """Componentwise McShane extension min_i (f_i + L |u - u_i|)."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        D = np.linalg.norm(u[:, None, :] - self.base_coords[None, :, :], axis=2)
        return np.min(self.fiber_values[None, :, :] + self.slope * D[:, :, None], axis=1)

    def lift(self, u) -> np.ndarray:
        """Ambient points of the graph over base coordinates u."""
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return u @ self.base.basis.T + self.evaluate(u) @ self.fiber.basis.T

    def vertical_distance(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.linalg.norm(x @ self.fiber.basis - self.evaluate(x @ self.base.basis), axis=1)

    def max_slope_ratio(self) -> float:
        """max |f_i - f_j| / (L |u_i - u_j|) over anchor pairs; <= 1 means the bound holds."""
        if len(self.base_coords) < 2:
            return 0.0
        du = np.linalg.norm(self.base_coords[:, None] - self.base_coords[None], axis=2)
        df = np.linalg.norm(self.fiber_values[:, None] - self.fiber_values[None], axis=2)
        iu = np.triu_indices(len(du), 1)
        du, df = du[iu], df[iu]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(df > 0, df / (self.slope * du), 0.0)
        return float(np.max(r)) if r.size else 0.0

    def to_json(self):
        return {"base": self.base.to_json(), "slope": self.slope,
                "anchors": [int(a) for a in self.anchor_atoms],
                "excluded": [int(a) for a in self.excluded]}


@dataclass
class TreeDecomposition:
    root: int
    theta_root: float
    stop: list          # [(cube id, "HD" | "LD" | "BCE")]
    tree: list          # cube ids of Tree(R), stop cubes included
    next: list          # cube ids of Next(R)
    good_atoms: np.ndarray
    good_mass: float
    energies: dict      # cube id -> E_mu(Q)
    cumulative: dict    # cube id -> sum of E_mu over Q <= S <= R
    graph: LipschitzGraphModel | None = None
    is_id: bool = False

    def labelled(self, label):
        return [q for q, lab in self.stop if lab == label]

    def to_json(self):
        return {"root": self.root, "theta_root": self.theta_root,
                "stop": [[int(q), lab] for q, lab in self.stop],
                "tree": [int(q) for q in self.tree], "next": [int(q) for q in self.next],
                "good_mass": self.good_mass, "id": self.is_id,
                "graph": self.graph.to_json() if self.graph is not None else None}


@dataclass
class CoronaForest:
    lattice: CubeLattice
    params: CoronaParams
    top: list                       # layers of root ids
    trees: dict = field(default_factory=dict)

    @property
    def roots(self):
        return [r for layer in self.top for r in layer]

    def packing_numerator(self) -> float:
        lat, n = self.lattice, self.params.n
        return float(sum(lat.theta_2BQ(r, n) * lat.mass(r) for r in self.roots))

    def to_json(self):
        return {"params": self.params.to_json(), "layers": [list(map(int, l)) for l in self.top],
                "trees": [self.trees[r].to_json() for r in self.roots]}


def _two_b(lattice, Q):
    Q = lattice._cube(Q)
    return Ball(Q.center, 2.0 * BALL_FACTOR * Q.radius)


def cell_energy(lattice: CubeLattice, Q, cone: Cone, eta, n=None) -> float:
    """E_mu(Q): banded conical energy with x in 2B_Q and eta l(Q) <= |x-y| <= l(Q)/eta,
    divided by mu(Q).
    """
    n = cone.d - cone.subspace.n if n is None else n
    m = lattice.mass(Q)
    if m <= 0:
        raise ValueError("cube has zero mass")
    ell = lattice.side(Q)
    rep = banded_conical_energy(lattice.mu, cone, n, eta * ell, ell / eta, _two_b(lattice, Q))
    return rep.value / m


def stopping_decomposition(lattice: CubeLattice, R, params: CoronaParams) -> TreeDecomposition:
    R = lattice._cube(R)
    if not R.doubling:
        raise ValueError("tree roots must be doubling cubes")
    n = params.n
    theta_R = lattice.theta_2BQ(R, n)
    stop, tree, energies, cumulative = [], [], {}, {}
    stack = [(R, 0.0)]
    while stack:
        Q, above = stack.pop()
        tree.append(Q.id)
        e = cell_energy(lattice, Q, params.cone, params.eta, n)
        energies[Q.id] = e
        cum = above + e
        cumulative[Q.id] = cum
        label = None
        if Q.id != R.id:
            th = lattice.theta_2BQ(Q, n)
            if Q.doubling and th >= params.A * theta_R:
                label = "HD"
            elif th <= params.tau * theta_R:
                label = "LD"
        if label is None and cum >= params.eps_stop * theta_R:
            label = "BCE"
        if label is not None:
            stop.append((Q.id, label))
            continue
        stack.extend((lattice.cubes[c], cum) for c in reversed(Q.children))

    stopped = np.zeros(len(lattice.mu), dtype=bool)
    for q, _ in stop:
        stopped[lattice.cubes[q].members] = True
    good = np.array([i for i in R.members if not stopped[i]], dtype=int)
    nxt = []
    for q, _ in stop:
        nxt.extend(c.id for c in maximal_doubling_descendants(lattice, q))
    hd_mass = sum(lattice.mass(q) for q, lab in stop if lab == "HD")
    dec = TreeDecomposition(R.id, theta_R, stop, tree, nxt, good,
                            float(np.sum(lattice.mu.weights[good])) if good.size else 0.0,
                            energies, cumulative)
    dec.is_id = hd_mass >= lattice.mass(R) / 2.0
    return dec


def _shadow_hits(lattice, Q, cone: Cone, half_aperture, targets):
    """Boolean mask over ``targets`` (atom indices) lying in K_Q^{1/2}."""
    mu = lattice.mu
    B = _two_b(lattice, Q)
    src = np.flatnonzero((np.linalg.norm(mu.points - B.center, axis=1) < B.radius)
                         & (mu.weights > 0))
    hit = np.zeros(len(targets), dtype=bool)
    Y = mu.points[targets]
    for x in src:
        todo = ~hit
        if not todo.any():
            break
        hit[todo] = contains_vectors(cone.subspace, half_aperture, Y[todo] - mu.points[x])
    return hit


def key_cone_mass(lattice: CubeLattice, decomposition: TreeDecomposition, J,
                  params: CoronaParams) -> float:
    """mu of the union over Q in J of K_Q^{1/2} minus M B_Q, inside R."""
    J = [lattice._cube(q) for q in J]
    seen = np.zeros(len(lattice.mu), dtype=bool)
    tree = set(decomposition.tree)
    for Q in J:
        if Q.id not in tree:
            raise ValueError(f"cube {Q.id} is not in Tree(R)")
        if seen[Q.members].any():
            raise ValueError("J is not pairwise disjoint")
        seen[Q.members] = True
    R = lattice.cubes[decomposition.root]
    targets = np.asarray(R.members)
    covered = np.zeros(len(targets), dtype=bool)
    s2 = params.cone.aperture / 2.0
    for Q in J:
        outside = np.linalg.norm(lattice.mu.points[targets] - Q.center, axis=1) \
            >= params.M * BALL_FACTOR * Q.radius
        cand = outside & ~covered
        if cand.any():
            idx = np.flatnonzero(cand)
            covered[idx[_shadow_hits(lattice, Q, params.cone, s2, targets[idx])]] = True
    return float(np.sum(lattice.mu.weights[targets[covered]]))


def _t_neighbors(lattice, Q, P, t):
    lq, lp = lattice.side(Q), lattice.side(P)
    if not (lp / t <= lq <= t * lp):
        return False
    pts = lattice.mu.points
    D = np.linalg.norm(pts[Q.members][:, None] - pts[P.members][None], axis=2)
    return float(D.min()) <= t * (lq + lp)


def separated_stop_family(lattice, decomposition, params):
    """Sep(R): greedy maximal t-separated subfamily of Stop(R), in stop order."""
    sep = []
    for q, _ in decomposition.stop:
        Q = lattice.cubes[q]
        if all(not _t_neighbors(lattice, Q, P, params.t) for P in sep):
            sep.append(Q)
    return sep


def filtered_separated_family(lattice, decomposition, params, sep=None):
    """~Sep(R): Sep cubes whose 2M B_Q misses the good atoms and contains no other
    Sep cube's 2M B.
    """
    sep = separated_stop_family(lattice, decomposition, params) if sep is None else sep
    pts = lattice.mu.points
    good = pts[decomposition.good_atoms]
    out = []
    rad = {Q.id: 2.0 * params.M * BALL_FACTOR * Q.radius for Q in sep}
    for Q in sep:
        if good.size and np.any(np.linalg.norm(good - Q.center, axis=1) < rad[Q.id]):
            continue
        nested = any(P.id != Q.id and np.linalg.norm(P.center - Q.center) + rad[P.id] <= rad[Q.id]
                     for P in sep)
        if not nested:
            out.append(Q)
    return out


def fit_lipschitz_graph(lattice: CubeLattice, decomposition: TreeDecomposition,
                        params: CoronaParams) -> LipschitzGraphModel:
    """McShane graph over V0^perp through the cone-avoiding anchors.

    Anchors are the good atoms followed by the centres of ~Sep(R); an anchor
    is dropped when its difference with an earlier kept anchor lies in
    K(V0, s/2) or breaks the slope bound.
    """
    mu = lattice.mu
    V0 = params.cone.subspace
    base = V0.complement()
    L = params.slope
    s2 = params.cone.aperture / 2.0
    cand = [int(i) for i in decomposition.good_atoms]
    cand += [Q.center_index for Q in filtered_separated_family(lattice, decomposition, params)]
    if not cand:
        raise ValueError("no anchors")
    kept, excluded = [], []
    U, F = [], []
    for i in cand:
        x = mu.points[i]
        u, f = x @ base.basis, x @ V0.basis
        if kept:
            diff = x - mu.points[kept]
            bad = contains_vectors(V0, s2, diff)
            du = np.linalg.norm(np.asarray(U) - u, axis=1)
            df = np.linalg.norm(np.asarray(F) - f, axis=1)
            bad |= df > L * du
            if np.any(bad):
                excluded.append(i)
                continue
        kept.append(i)
        U.append(u)
        F.append(f)
    return LipschitzGraphModel(base, V0, np.asarray(U), np.asarray(F), L, kept, excluded)


def build_forest(lattice: CubeLattice, params: CoronaParams, max_layers=64) -> CoronaForest:
    R0 = lattice.root
    forest = CoronaForest(lattice, params, [])
    layer = [R0.id]
    while layer and len(forest.top) < max_layers:
        forest.top.append(layer)
        nxt = []
        for r in layer:
            R = lattice.cubes[r]
            if lattice.is_singleton(R) or not R.children:
                dec = TreeDecomposition(R.id, lattice.theta_2BQ(R, params.n), [], [R.id], [],
                                        np.asarray(R.members), lattice.mass(R), {}, {})
            else:
                dec = stopping_decomposition(lattice, R, params)
            try:
                dec.graph = fit_lipschitz_graph(lattice, dec, params)
            except ValueError:
                dec.graph = None
            forest.trees[r] = dec
            nxt.extend(dec.next)
        layer = nxt
    return forest


# ---------------------------------------------------------------- diagnostics

@dataclass
class PackingReport:
    numerator: float
    mass: float
    conical: float

    @property
    def denominator(self):
        return self.mass + self.conical

    @property
    def ratio(self):
        return self.numerator / self.denominator if self.denominator > 0 else 0.0

    def to_json(self):
        return {"numerator": self.numerator, "mass": self.mass, "conical": self.conical,
                "denominator": self.denominator, "ratio": self.ratio}


def packing_report(forest: CoronaForest, cone: Cone, eps) -> PackingReport:
    lat = forest.lattice
    conical = conical_energy(lat.mu, cone, forest.params.n, eps).value
    return PackingReport(forest.packing_numerator(), lat.mass(lat.root), conical)


def tree_checks(forest: CoronaForest, r) -> dict:
    """Per-root inequalities that hold exactly or are monitored."""
    lat, p = forest.lattice, forest.params
    dec = forest.trees[r]
    mR = lat.mass(r)
    stop_ids = [q for q, _ in dec.stop]
    owner = np.full(len(lat.mu), -1)
    disjoint = True
    for q in stop_ids:
        m = lat.cubes[q].members
        disjoint &= bool(np.all(owner[m] == -1))
        owner[m] = q
    ld = sum(lat.mass(q) for q in dec.labelled("LD"))
    bce = sum(lat.mass(q) for q in dec.labelled("BCE"))
    fubini = sum(dec.energies[s] * lat.mass(s) for s in dec.tree if s in dec.energies)
    if math.isinf(p.eps_stop) or dec.theta_root == 0:
        bce_bound = math.inf
    else:
        bce_bound = fubini / (p.eps_stop * dec.theta_root)
    out = {
        "root": int(r), "mass": mR, "stop_disjoint": disjoint,
        "ld_mass": ld, "ld_bound": math.sqrt(p.tau) * mR, "ld_ok": ld <= math.sqrt(p.tau) * mR,
        "bce_mass": bce, "bce_bound": bce_bound, "bce_ok": bce <= bce_bound,
        "slope_ratio": dec.graph.max_slope_ratio() if dec.graph is not None else 0.0,
        "id": dec.is_id,
    }
    if dec.is_id:
        rhs = 0.5 * sum(lat.theta_2BQ(q, p.n) * lat.mass(q) for q in dec.next)
        out["id_ok"] = lat.theta_2BQ(r, p.n) * mR <= rhs
    return out


def _finest_cube(lat, i):
    k = lat.k_max
    return lat.cubes[lat.point_cube[k, i]]


def verify_corona_properties(forest: CoronaForest, tol=1e-9) -> list:
    """Per root: (a) good mass on the graph, (b) worst delta_mu ratio over Next,
    (c) worst density ratio over Tr(R).
    """
    lat, p = forest.lattice, forest.params
    n = p.n
    mu = lat.mu
    reports = []
    for r in forest.roots:
        dec = forest.trees[r]
        g = dec.graph
        thR = dec.theta_root
        # (a) good mass close to the graph
        if g is None or dec.good_mass == 0:
            frac_a = 1.0 if dec.good_mass == 0 else 0.0
        else:
            ga = dec.good_atoms
            vd = g.vertical_distance(mu.points[ga])
            ell = np.array([lat.side(_finest_cube(lat, i)) for i in ga])
            close = vd <= tol * ell
            frac_a = float(mu.weights[ga][close].sum() / dec.good_mass)
        # (b) delta_mu to the first ancestor whose 2B meets the graph
        worst_b = 0.0
        for q in dec.next:
            found = math.inf
            for S in lat.ancestors(q):
                if g is not None and _meets_graph(lat, S, g):
                    found = delta_mu(lat, q, S, n) / thR if thR > 0 else math.inf
                    break
                if S.id == r:
                    break
            worst_b = max(worst_b, found)
        # (c) density ratio over Tr(R)
        tr = tr_family(lat, dec)
        worst_c = max((lat.theta_2BQ(q, n) / thR for q in tr), default=0.0) if thR > 0 else 0.0
        reports.append({"root": int(r), "a_fraction": frac_a, "b_max_ratio": worst_b,
                        "c_max_ratio": worst_c})
    return reports


def tr_family(lat: CubeLattice, dec: TreeDecomposition) -> list:
    """Tr(R): cubes of R not contained in any cube of Next(R)."""
    nxt = set(dec.next)
    out, stack = [], [lat.cubes[dec.root]]
    while stack:
        c = stack.pop()
        if c.id in nxt:
            continue
        out.append(c.id)
        stack.extend(lat.cubes[i] for i in reversed(c.children))
    return out


def _meets_graph(lat, S, g: LipschitzGraphModel) -> bool:
    B = _two_b(lat, S)
    anchors = lat.mu.points[g.anchor_atoms] if g.anchor_atoms else np.zeros((0, lat.mu.dim))
    if anchors.size and np.any(np.linalg.norm(anchors - B.center, axis=1) < B.radius):
        return True
    foot = g.lift(B.center @ g.base.basis)[0]
    return bool(np.linalg.norm(foot - B.center) < B.radius)
