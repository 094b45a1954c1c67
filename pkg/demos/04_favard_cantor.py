"""
Favard length of Cantor generations
===================================

The fattened Cantor generation at scale 4^-k has a Favard length that
decays slowly with k. A single atom shows the pure fattening artifact 2 delta pi.
"""

import math

import numpy as np

from gmtkit import DiscreteMeasure, favard_estimate, generate_cantor4

for k in range(1, 7):
    print(f"k={k}  Fav ~ {favard_estimate(generate_cantor4(k), 4.0 ** -k, 720):.5f}")

atom = DiscreteMeasure(np.array([[0.5, 0.5]]), np.array([1.0]))
print(f"single atom, delta=0.01: {favard_estimate(atom, 0.01, 90):.6f}  vs  {0.02 * math.pi:.6f}")
