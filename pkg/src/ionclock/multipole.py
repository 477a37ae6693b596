"""Rank-2 shifts from neighbour fields: quadrupole and tensor Stark.

Neighbouring ions produce electric-field gradients (coupling to the state's
quadrupole moment) and the RF drive produces an oscillating field (coupling
to the tensor polarisability). Both carry the same state-dependent scale
factor; an unweighted average over the hyperfine levels used in operation
nulls them exactly because those factors sum to zero, so only their spread
across the crystal matters. Distributions here omit the state factor (it is
applied, if at all, by the caller).

The tensor Stark broadening can be compensated with a doughnut-mode beam at
the wavelength where the scalar differential polarisability vanishes: its
near-axis intensity grows quadratically off axis, matching the RF field
squared, and an opposite-sign tensor polarisability at that wavelength lets
a single beam power cancel the quadratic part of the shift profile.

Field conventions, fixed here and exercised by the single-ion cancellation
test: the RF shift uses the cycle average <E^2> = |amplitude|^2 / 2; the
beam is linearly polarised transverse to the z quantisation axis and its
time-averaged squared field is <E^2> = I / (eps0 c).
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .constants import CONSTANTS
from .crystal import IonCrystal
from .distributions import ShiftDistribution
from .errors import CompensationSignError, ValidationError
from .micromotion import space_charge_vectors
from .species import ClockSpecies
from .trap import TrapConfig, characteristic_length


@dataclass(frozen=True)
class QuadrupoleTensor:
    """Scaled field-gradient tensor seen by one ion (symmetric, traceless)."""

    q_matrix: np.ndarray
    ion_index: int


@dataclass(frozen=True)
class FieldOrientation:
    """Euler angles (alpha, beta) of the quantisation axis relative to the
    trap frame; the third angle is irrelevant for rank-2 averages."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.beta <= math.pi:
            raise ValidationError("beta must be in [0, pi]")


@dataclass(frozen=True)
class BeamProfile:
    """Doughnut (Laguerre-Gauss, radial 0 / azimuthal 1) compensation beam."""

    waist: float  # m
    power: float  # W
    wavelength: float  # m
    alpha2_at_wavelength: float  # SI tensor polarisability at that wavelength
    mode: str = "LG01"

    def __post_init__(self):
        if self.waist <= 0:
            raise ValidationError("waist must be positive")
        if self.power < 0:
            raise ValidationError("power must be non-negative")


def all_quadrupole_tensors(crystal: IonCrystal) -> np.ndarray:
    """Scaled gradient tensors for every ion, shape (N, 3, 3)."""
    return kernels.quadrupole_tensors(crystal.positions)


def quadrupole_tensor(crystal: IonCrystal, i: int) -> QuadrupoleTensor:
    """Scaled field-gradient tensor at ion i from all other ions.

    The SI gradient is (m omega_z^2 / q) times this matrix.
    """
    pos = crystal.positions
    d = pos[i] - pos
    r2 = np.einsum("ij,ij->i", d, d)
    r2[i] = np.inf
    inv5 = r2 ** -2.5
    r2[i] = 0.0
    outer = np.einsum("ij,ik->ijk", d, d)
    eye = np.eye(3)[None, :, :] * r2[:, None, None]
    q = -np.einsum("i,ijk->jk", inv5, 3.0 * outer - eye)
    return QuadrupoleTensor(q_matrix=q, ion_index=i)


def quadrupole_geometric_factor(q: QuadrupoleTensor,
                                orient: FieldOrientation) -> float:
    """Orientation factor of the quadrupole shift for gradient tensor q."""
    m = q.q_matrix
    a, b = orient.alpha, orient.beta
    return float(
        m[2, 2] / 4.0 * (3.0 * math.cos(b) ** 2 - 1.0)
        + 0.5 * math.sin(2.0 * b) * (m[0, 2] * math.cos(a)
                                     + m[1, 2] * math.sin(a))
        + 0.25 * math.sin(b) ** 2 * ((m[0, 0] - m[1, 1]) * math.cos(2.0 * a)
                                     + 2.0 * m[0, 1] * math.sin(2.0 * a))
    )


def _geometric_factors(tensors: np.ndarray, orient: FieldOrientation) -> np.ndarray:
    a, b = orient.alpha, orient.beta
    return (tensors[:, 2, 2] / 4.0 * (3.0 * math.cos(b) ** 2 - 1.0)
            + 0.5 * math.sin(2.0 * b) * (tensors[:, 0, 2] * math.cos(a)
                                         + tensors[:, 1, 2] * math.sin(a))
            + 0.25 * math.sin(b) ** 2
            * ((tensors[:, 0, 0] - tensors[:, 1, 1]) * math.cos(2.0 * a)
               + 2.0 * tensors[:, 0, 1] * math.sin(2.0 * a)))


def quadrupole_shift_distribution(crystal: IonCrystal, species: ClockSpecies,
                                  trap: TrapConfig = None,
                                  orient: FieldOrientation = FieldOrientation(),
                                  ) -> ShiftDistribution:
    """Per-ion quadrupole shifts (Hz) from neighbour fields.

    The state factor is omitted (hyperfine averaging removes the mean shift
    anyway; only the width matters). The overall scale is
    quadrupole_moment * m * omega_z^2 / (q h).
    """
    trap = trap or crystal.trap
    scale = (species.quadrupole_moment * species.mass * trap.omega_z**2
             / (species.charge * CONSTANTS.h))
    factors = _geometric_factors(all_quadrupole_tensors(crystal), orient)
    return ShiftDistribution.from_samples(scale * factors,
                                          "quadrupole", unit="Hz")


def hyperfine_average(per_level_shifts) -> float:
    """Unweighted mean over hyperfine levels of (state factor * raw shift).

    With factors summing to zero (e.g. -2/5, 1, -3/5) a level-independent
    raw shift averages to exactly zero.
    """
    pairs = list(per_level_shifts)
    if not pairs:
        raise ValidationError("need at least one (factor, shift) pair")
    return sum(c * s for c, s in pairs) / len(pairs)


def rf_field_amplitudes(crystal: IonCrystal, species: ClockSpecies,
                        trap: TrapConfig = None) -> np.ndarray:
    """Net RF electric-field amplitude vector per ion (V/m), including the
    space-charge correction: -(m omega_z Omega l / q)(rf r0 - (eps^2/4) w)."""
    trap = trap or crystal.trap
    length = characteristic_length(species, trap.omega_z)
    m = trap.matrices()
    w = space_charge_vectors(crystal, trap)
    field_scale = species.mass * trap.omega_z * trap.omega_rf * length / species.charge
    return -field_scale * (crystal.positions @ m.rf.T
                           - (trap.epsilon**2 / 4.0) * w)


def rf_quadratic_field_average(crystal: IonCrystal, species: ClockSpecies,
                               trap: TrapConfig = None,
                               quantisation_axis=(0.0, 0.0, 1.0)):
    """Cycle-averaged <3 E_z^2 - E^2> and <E^2> per ion (V^2/m^2).

    E_z is the field component along the quantisation axis; the cycle
    average of the squared oscillating field is half the squared amplitude.
    """
    axis = np.asarray(quantisation_axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    amp = rf_field_amplitudes(crystal, species, trap)
    e2 = 0.5 * np.einsum("ij,ij->i", amp, amp)
    ez2 = 0.5 * (amp @ axis) ** 2
    return 3.0 * ez2 - e2, e2


def tensor_shift_distribution(crystal: IonCrystal, species: ClockSpecies,
                              trap: TrapConfig = None) -> ShiftDistribution:
    """Fractional tensor-polarisability shift from the RF field, per ion.

    Quantisation axis along the trap z axis (the RF field is then purely
    transverse); state factor omitted. Uses the DC tensor polarisability
    since the drive is far below any optical resonance.
    """
    avg, _ = rf_quadratic_field_average(crystal, species, trap)
    values = -(species.alpha2_dc
               / (4.0 * CONSTANTS.h * species.clock_frequency)) * avg
    return ShiftDistribution.from_samples(values, "tensor_rf")


def lg_doughnut_intensity(rho: float, beam: BeamProfile):
    """Intensity (W/m^2) of the doughnut mode at distance rho from the axis:
    I = (4 P / pi w^4) rho^2 exp(-2 rho^2 / w^2); integrates to P."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0):
        raise ValidationError("rho must be non-negative")
    w = beam.waist
    return (4.0 * beam.power / (math.pi * w**4)) * rho**2 \
        * np.exp(-2.0 * rho**2 / w**2)


def _beam_shift_per_ion(crystal: IonCrystal, species: ClockSpecies,
                        trap: TrapConfig, beam: BeamProfile) -> np.ndarray:
    """Fractional tensor shift from the beam at each ion position.

    Linear polarisation transverse to z gives <3 E_z^2 - E^2> = -<E^2> with
    <E^2> = I/(eps0 c).
    """
    trap = trap or crystal.trap
    length = characteristic_length(species, trap.omega_z)
    rho = length * np.hypot(crystal.positions[:, 0], crystal.positions[:, 1])
    e2 = lg_doughnut_intensity(rho, beam) / (CONSTANTS.epsilon_0 * CONSTANTS.c)
    return -(beam.alpha2_at_wavelength
             / (4.0 * CONSTANTS.h * species.clock_frequency)) * (-e2)


def compensated_tensor_distribution(crystal: IonCrystal, species: ClockSpecies,
                                    trap: TrapConfig = None,
                                    beam: BeamProfile = None) -> ShiftDistribution:
    """RF tensor shift plus compensation-beam tensor shift, per ion."""
    if beam is None:
        raise ValidationError("a BeamProfile is required")
    if np.sign(beam.alpha2_at_wavelength) == np.sign(species.alpha2_dc):
        raise CompensationSignError(
            "beam tensor polarisability has the same sign as the DC value; "
            "a doughnut beam can then only add to the shift")
    rf = tensor_shift_distribution(crystal, species, trap)
    values = rf.per_ion + _beam_shift_per_ion(crystal, species,
                                              trap or crystal.trap, beam)
    return ShiftDistribution.from_samples(values, "tensor_compensated")


def optimize_compensation_power(crystal: IonCrystal, species: ClockSpecies,
                                trap: TrapConfig = None,
                                beam_template: BeamProfile = None,
                                p_max: float = None) -> BeamProfile:
    """Beam power minimising the spread of the compensated distribution.

    The compensated shift is linear in the power, so its variance is an
    exact quadratic in P; the minimiser is computed in closed form, clamped
    to [0, p_max], and cross-checked with a bounded scalar minimisation.
    """
    if beam_template is None:
        raise ValidationError("a template BeamProfile is required")
    if crystal.n_ions < 2:
        raise ValidationError("need at least two ions to optimise broadening")
    trap = trap or crystal.trap
    rf = tensor_shift_distribution(crystal, species, trap).per_ion
    unit_beam = replace(beam_template, power=1.0)
    per_watt = _beam_shift_per_ion(crystal, species, trap, unit_beam)
    var_b = per_watt.var()
    if var_b == 0.0:
        return replace(beam_template, power=0.0)
    p_star = -np.cov(rf, per_watt, bias=True)[0, 1] / var_b
    if p_max is None:
        p_max = max(10.0 * abs(p_star), 1.0)
    p_star = float(np.clip(p_star, 0.0, p_max))

    def spread(p):
        return (rf + p * per_watt).std()

    bracket = sorted((0.5 * p_star, max(1.5 * p_star, 1e-12)))
    result = minimize_scalar(spread, bounds=(bracket[0], bracket[1]),
                             method="bounded",
                             options={"xatol": 1e-4 * max(p_star, 1e-12)})
    if result.fun < spread(p_star):
        p_star = float(np.clip(result.x, 0.0, p_max))
    return replace(beam_template, power=p_star)
