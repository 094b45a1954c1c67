"""Geometric measure theory toolkit: energies, projections, cube lattices and
corona decompositions of discrete measures.
"""
from .capacity import (CapacityCertificate, favard_estimate, favard_inequality_check,
                       theorem1_certificate, theorem2_certificate)
from .corona import (CoronaParams, build_forest, cell_energy, fit_lipschitz_graph,
                     key_cone_mass, packing_report, stopping_decomposition, tree_checks,
                     verify_corona_properties)
from .energies import (EnergyReport, banded_conical_energy, cauchy_energy, conical_energy,
                       curvature, inverse_circumradius, melnikov_residual, riesz_energy)
from .grassmann import (AngularInterval, Cone, GrassmannBall, Subspace, cone_contains,
                        grassmann_ball_volume_mc, grassmann_metric, lift_isometry,
                        project_point, sample_uniform_subspace)
from .lattice import (CubeLattice, build_lattice, delta_mu, doubling_ancestor_density_check,
                      doubling_flag, maximal_doubling_descendants)
from .measures import (Ball, DiscreteMeasure, generate_cantor4, generate_gaussian_mixture,
                       generate_lipschitz_graph, generate_plane_grid, generate_random_box,
                       generate_segment, growth_constant, theta_density,
                       total_mass)
from .projection import (MollifierSpec, cone_kernel_energy_smoothed, directional_energy_interval,
                         fourier_cone_energy, grassmann_ball_energy, maximal_function,
                         projection_l2_energy, reverse_inequality_report, upper_density_profile)
from ._parallel import get_threads, set_threads

__version__ = "0.1.0"
