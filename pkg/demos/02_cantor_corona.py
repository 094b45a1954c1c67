"""
Corona decomposition of the four-corner Cantor set
==================================================

Build the cube lattice of the generation-k Cantor measure, run the stopping
time construction with a cone around the diagonal, and look at the packing
ratio as k grows. The SVG of the last forest is written next to this file.
"""

import math
from pathlib import Path

from gmtkit import (Cone, CoronaParams, Subspace, build_forest, build_lattice,
                    generate_cantor4, packing_report, tree_checks)
from gmtkit.plot import corona_svg

cone = Cone(Subspace.line(math.pi / 4), 0.3)
params = CoronaParams(cone)

for k in range(2, 6):
    mu = generate_cantor4(k)
    lat = build_lattice(mu, A0=4.0, C0=128.0)
    forest = build_forest(lat, params)
    pr = packing_report(forest, cone, 0.5 * 4.0 ** -k)
    checks = [tree_checks(forest, r) for r in forest.roots]
    stops = sum(len(forest.trees[r].stop) for r in forest.roots)
    exact = all(c["stop_disjoint"] and c["bce_ok"] for c in checks)
    print(f"k={k}  levels={len(lat.levels)}  roots={len(forest.roots)}  stops={stops}  "
          f"packing={pr.ratio:.4f}  exact checks {'ok' if exact else 'FAILED'}")

out = Path(__file__).with_name("cantor_corona.svg")
out.write_text(corona_svg(forest))
print("wrote", out)
