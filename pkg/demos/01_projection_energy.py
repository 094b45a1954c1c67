"""
Projection energy three ways
============================

The mollified projection energy of a discrete measure, integrated over a
set of directions, can be computed directly on the lines, on the Fourier
side over a cone of frequencies, or as a pair sum against a cone kernel.
This script runs all three on a small Gaussian mixture.
"""

import numpy as np

from gmtkit import (AngularInterval, MollifierSpec, cone_kernel_energy_smoothed,
                    directional_energy_interval, fourier_cone_energy,
                    generate_gaussian_mixture)

mu = generate_gaussian_mixture(15, seed=0)
moll = MollifierSpec(0.05)
I = AngularInterval(0.3, 1.2)

# directions of the lines we project onto are perpendicular to I
direct = directional_energy_interval(mu, I.perp(), moll, 64).value
fourier = fourier_cone_energy(mu, I, moll, 64, 64).value
kernel = cone_kernel_energy_smoothed(mu, I, moll, 64, 64).value

print(f"on the lines      {direct:.10f}")
print(f"Fourier cone      {fourier:.10f}")
print(f"cone kernel       {kernel:.10f}")
print(f"relative gaps     {abs(direct - fourier) / fourier:.2e}  {abs(kernel - fourier) / fourier:.2e}")

# the profile over all directions shows where the measure looks thin
thetas = np.linspace(0, np.pi, 9)
for th in thetas:
    prof = directional_energy_interval(mu, AngularInterval(th, th + np.pi / 8), moll, 16)
    print(f"theta {th:5.3f}   {prof.value:9.4f}")
