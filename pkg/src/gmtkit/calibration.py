"""Frozen regression constants, recorded from the first calibration run.

Run ``python -m gmtkit.calibrate`` to recompute the raw values. Bounds are
the measured maxima rounded up in the twelfth significant digit.
"""

# max over the 20-measure corpus of |residual| / (mass * c0^2)
MELNIKOV_K = 0.356726204683

CORONA_A0 = 4.0
CORONA_C0 = 128.0
CORONA_APERTURE = 0.3
# packing ratio of the Cantor corona corpus by generation k
PACKING_RATIO = {
    2: 0.0544550210971,
    3: 0.0473133040573,
    4: 0.128987958799,
    5: 0.238075658035,
}
PACKING_TOLERANCE = 0.2
# c * A for corona item (c) with A = 20
ITEM_C_BOUND = 4.00000000001

REVERSE_S = 0.3
REVERSE_EPS = 0.01
REVERSE_LAMBDA = 2.0
REVERSE_SAMPLES = 2000
REVERSE_SEED = 10
REVERSE_C = 0.105606904243

# key-cone shadow mass / (eps_stop * mu(R)) on a transverse graph
KEY_CONE_C = 0.0
