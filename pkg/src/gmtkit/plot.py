"""Deterministic hand-written SVG figures.

Numbers are printed with fixed precision so identical inputs give identical
bytes.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = 56
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
           "#17becf"]


def _f(v):
    return f"{v:.3f}"


class Axes:
    def __init__(self, xs, ys, title="", xlabel="", ylabel=""):
        xs = np.asarray(xs, dtype=float).ravel()
        ys = np.asarray(ys, dtype=float).ravel()
        self.x0, self.x1 = _range(xs)
        self.y0, self.y1 = _range(ys)
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.items = []

    def px(self, x):
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def py(self, y):
        return HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)

    def polyline(self, xs, ys, color="#1f77b4", width=1.5):
        if len(xs) == 0:
            return
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        self.items.append(f'<polyline class="curve" fill="none" stroke="{color}" '
                          f'stroke-width="{width}" points="{pts}"/>')

    def markers(self, xs, ys, color="#1f77b4", r=2.0, cls="node"):
        for x, y in zip(xs, ys):
            self.items.append(f'<circle class="{cls}" cx="{_f(self.px(x))}" '
                              f'cy="{_f(self.py(y))}" r="{r}" fill="{color}"/>')

    def render(self) -> str:
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}">',
               f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
        left, right = MARGIN, WIDTH - MARGIN
        top, bottom = MARGIN, HEIGHT - MARGIN
        out.append(f'<rect class="frame" x="{left}" y="{top}" width="{right - left}" '
                   f'height="{bottom - top}" fill="none" stroke="black"/>')
        for i in range(5):
            fx = self.x0 + (self.x1 - self.x0) * i / 4
            fy = self.y0 + (self.y1 - self.y0) * i / 4
            out.append(f'<text x="{_f(self.px(fx))}" y="{bottom + 16}" font-size="10" '
                       f'text-anchor="middle">{fx:.3g}</text>')
            out.append(f'<text x="{left - 6}" y="{_f(self.py(fy) + 3)}" font-size="10" '
                       f'text-anchor="end">{fy:.3g}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{top - 18}" font-size="14" '
                   f'text-anchor="middle">{escape(self.title)}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="12" '
                   f'text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="14" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(self.ylabel)}</text>')
        out.extend(self.items)
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _range(v):
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        pad = max(abs(hi), 1.0) * 0.5
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def profile_svg(thetas, values, title="projection energy profile") -> str:
    ax = Axes(thetas, values, title, "theta", "||P_theta mu_eps||^2")
    ax.polyline(thetas, values)
    ax.markers(thetas, values)
    return ax.render()


def corona_svg(forest) -> str:
    lat = forest.lattice
    mu = lat.mu
    pts = mu.points[mu.support] if len(mu) else np.zeros((0, 2))
    xs = pts[:, 0] if len(pts) else []
    ys = pts[:, 1] if len(pts) and mu.dim > 1 else np.zeros(len(pts))
    ax = Axes(xs, ys, "corona layers", "x1", "x2")
    layer_of = np.zeros(len(mu), dtype=int)
    for depth, layer in enumerate(forest.top):
        for r in layer:
            layer_of[lat.cubes[r].members] = depth
    for i in mu.support:
        c = PALETTE[layer_of[i] % len(PALETTE)]
        ax.markers([mu.points[i, 0]], [mu.points[i, 1] if mu.dim > 1 else 0.0], c, 1.6, "atom")
    for depth, layer in enumerate(forest.top):
        for r in layer:
            g = forest.trees[r].graph
            if g is None or g.base.n != 1 or mu.dim != 2 or len(g.base_coords) == 0:
                continue
            u = np.linspace(g.base_coords.min(), g.base_coords.max(), 64)[:, None]
            curve = g.lift(u)
            ax.polyline(curve[:, 0], curve[:, 1], PALETTE[depth % len(PALETTE)], 0.8)
    return ax.render()


def packing_svg(levels, ratios) -> str:
    ax = Axes(levels, ratios, "packing ratio by Cantor generation", "k", "ratio")
    ax.polyline(levels, ratios)
    ax.markers(levels, ratios)
    return ax.render()


def empty_svg(title="") -> str:
    return Axes([], [], title).render()


__all__ = ["profile_svg", "corona_svg", "packing_svg", "empty_svg", "Axes"]
