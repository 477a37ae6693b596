"""Feasibility numbers for optical clocks on large trapped-ion crystals.

Solve crystal equilibria in a linear Paul trap, evaluate the per-ion
frequency shifts that limit a many-ion optical clock (driven-motion shifts,
neighbour quadrupole fields, tensor Stark with beam compensation) and
aggregate them into clock-level metrics: line broadening, Ramsey contrast,
stability and a systematic budget.
"""

from .constants import CONSTANTS, PhysicalConstants, au_to_si_polarisability
from .crystal import (IonCrystal, SolverParams, anneal, apply_jitter,
                      bcc_seed, crystal_moment, crystal_radius,
                      mackay_icosahedron_seed, read_crystal, scaled_force,
                      solve_crystal, total_energy, write_crystal)
from .distributions import ShiftDistribution
from .metrics import (BudgetEntry, RamseyResult, averaging_time_to_target,
                      bbr_shift, gaussian_contrast,
                      projection_noise_stability, quadratic_zeeman_shift,
                      ramsey_contrast, secular_doppler_shift, shift_budget)
from .micromotion import (FourierAmplitudes, coulomb_pair_kernels,
                          full_shift_linear_trap, linear_trap_shift_terms,
                          lowest_order_shift, micromotion_amplitudes,
                          modulation_index, space_charge_vectors,
                          spherical_shift)
from .multipole import (BeamProfile, FieldOrientation, QuadrupoleTensor,
                        compensated_tensor_distribution, hyperfine_average,
                        lg_doughnut_intensity, optimize_compensation_power,
                        quadrupole_geometric_factor,
                        quadrupole_shift_distribution,
                        quadrupole_tensor, rf_quadratic_field_average,
                        tensor_shift_distribution)
from .oracle import TrajectoryRecord, integrate_full_eom, oracle_time_dilation
from .species import ClockSpecies, lu176_species, make_species
from .trap import (MagicCorrections, ScaledUnits, TrapConfig, TrapMatrices,
                   characteristic_length, corrected_magic_factors,
                   corrected_magic_frequency, magic_rf_frequency,
                   penning_fractional_shift, penning_min_field, scaled_units,
                   trap_matrices)

__version__ = "0.1.0"
