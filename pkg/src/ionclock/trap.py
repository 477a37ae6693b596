"""Linear Paul trap model: geometry matrices, scaling, magic RF drive.

The trap is described by the axial pseudo-potential frequency omega_z, the
RF drive frequency Omega, the relative RF confinement strength ``a`` and the
transverse asymmetry ``delta``. The curvature matrices of the RF and static
potentials are

    rf     = diag(a, -a, 0)
    static = diag(-1/2 + delta, -1/2 - delta, 1)

and the pseudo-potential curvature is static + rf^2 / 2, in units of
m omega_z^2. The trap is spherically symmetric for a = sqrt(3), delta = 0.

Scaled (dimensionless) coordinates divide lengths by the characteristic
length l = (q^2 / (4 pi eps0 m omega_z^2))^(1/3) and times by 2/Omega; the
small parameter organising all drive-frequency corrections is
epsilon = 2 omega_z / Omega.

Everything here is a pure function of immutable inputs.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .errors import NoMagicFrequencyError, ValidationError
from .species import ClockSpecies

SPHERICAL_A = math.sqrt(3.0)

# perturbative-regime guard; larger drives need a treatment beyond this model
EPSILON_MAX = 0.2


@dataclass(frozen=True)
class TrapConfig:
    """Operating point of a linear Paul trap.

    omega_z and omega_rf are angular frequencies (rad/s); ``a`` and ``delta``
    are dimensionless. The perturbative treatment requires
    epsilon = 2 omega_z / omega_rf < 0.2; Mathieu stability beyond that guard
    is the caller's responsibility.
    """

    omega_z: float
    omega_rf: float
    a: float = SPHERICAL_A
    delta: float = 0.0

    def __post_init__(self):
        if self.omega_z <= 0 or self.omega_rf <= 0:
            raise ValidationError("omega_z and omega_rf must be positive")
        if self.epsilon >= EPSILON_MAX:
            raise ValidationError(
                f"epsilon = {self.epsilon:.3g} >= {EPSILON_MAX}: outside the "
                "perturbative drive regime"
            )

    @property
    def epsilon(self) -> float:
        return 2.0 * self.omega_z / self.omega_rf

    @property
    def is_spherical(self) -> bool:
        return abs(self.a - SPHERICAL_A) < 1e-9 and abs(self.delta) < 1e-12

    def matrices(self) -> "TrapMatrices":
        return trap_matrices(self.a, self.delta)


@dataclass(frozen=True)
class ScaledUnits:
    """Length and time scales mapping SI to the dimensionless solver units."""

    length_scale: float  # m
    time_scale: float  # s
    epsilon: float


@dataclass(frozen=True)
class TrapMatrices:
    """Curvature matrices of the RF and static potentials (dimensionless).

    ``rf_unit`` is rf/a, the shape of the RF curvature with the strength
    factored out; shift formulas are written in terms of it.
    """

    rf: np.ndarray
    static: np.ndarray
    rf_unit: np.ndarray

    @property
    def pseudo(self) -> np.ndarray:
        """Pseudo-potential curvature, in units of m omega_z^2."""
        return self.static + 0.5 * self.rf @ self.rf


def trap_matrices(a: float, delta: float = 0.0) -> TrapMatrices:
    """Curvature matrices for RF strength ``a`` and transverse asymmetry
    ``delta``. Both are traceless, as any vacuum potential requires."""
    rf = np.diag([a, -a, 0.0])
    static = np.diag([-0.5 + delta, -0.5 - delta, 1.0])
    rf_unit = np.diag([1.0, -1.0, 0.0]) if a != 0 else np.zeros((3, 3))
    return TrapMatrices(rf=rf, static=static, rf_unit=rf_unit)


def characteristic_length(species: ClockSpecies, omega_z: float) -> float:
    """Length scale l = (q^2 / (4 pi eps0 m omega_z^2))^(1/3), in metres."""
    if omega_z <= 0:
        raise ValidationError("omega_z must be positive")
    k = CONSTANTS
    return (species.charge**2
            / (4.0 * np.pi * k.epsilon_0 * species.mass * omega_z**2)) ** (1.0 / 3.0)


def scaled_units(species: ClockSpecies, trap: TrapConfig) -> ScaledUnits:
    """Solver units for a species in a trap."""
    return ScaledUnits(
        length_scale=characteristic_length(species, trap.omega_z),
        time_scale=2.0 / trap.omega_rf,
        epsilon=trap.epsilon,
    )


def magic_rf_frequency(species: ClockSpecies) -> float:
    """RF drive frequency (rad/s) at which the second-order Doppler and
    scalar Stark shifts of the driven micromotion cancel, to lowest order.

    Exists only for a negative differential static polarisability.
    """
    if species.delta_alpha_static >= 0:
        raise NoMagicFrequencyError(
            f"{species.name}: delta_alpha_static >= 0, micromotion shifts "
            "cannot cancel"
        )
    k = CONSTANTS
    return (species.charge / (species.mass * k.c)) * math.sqrt(
        k.h * species.clock_frequency / (-species.delta_alpha_static)
    )


@dataclass(frozen=True)
class MagicCorrections:
    """Drive-frequency corrections of order epsilon^2.

    ``zero_*`` is the value of (Omega/Omega0)^2 at which the leading bracket
    of the per-ion shift vanishes; ``gain_*`` multiplies that bracket. The
    ``_general`` pair keeps the space-charge coupling term separate (any a,
    delta); the ``_spherical`` pair folds in its continuum value and applies
    to the a = sqrt(3), delta = 0 trap.
    """

    zero_general: float
    gain_general: float
    zero_spherical: float
    gain_spherical: float


def corrected_magic_factors(epsilon: float, a: float) -> MagicCorrections:
    """Second-order correction factors to the magic drive frequency."""
    if epsilon >= EPSILON_MAX:
        raise ValidationError("epsilon outside the perturbative regime")
    eps2 = epsilon * epsilon
    gain_general = 1.0 + a * a * eps2 / 8.0
    zero_general = 1.0 - (16.0 + 5.0 * a * a) / 32.0 * eps2 / (2.0 * gain_general)
    gain_spherical = 1.0 + (19.0 / 40.0) * eps2
    zero_spherical = 1.0 - (31.0 / 64.0) * eps2 / gain_spherical
    return MagicCorrections(zero_general, gain_general,
                            zero_spherical, gain_spherical)


def corrected_magic_frequency(species: ClockSpecies, trap: TrapConfig) -> float:
    """Drive frequency (rad/s) at which the mean shift of a spherical crystal
    vanishes, including the epsilon^2 corrections evaluated at the trap's
    operating epsilon."""
    omega0 = magic_rf_frequency(species)
    factors = corrected_magic_factors(trap.epsilon, trap.a)
    return omega0 * math.sqrt(factors.zero_spherical)


def penning_fractional_shift(species: ClockSpecies, omega_r: float,
                             rho: float) -> float:
    """Combined second-order Doppler + Stark fractional shift of an ion at
    cylindrical radius ``rho`` in a crystal rotating at ``omega_r`` in a
    Penning trap.

    Written in terms of the magic rotation frequency so the cancellation at
    that argument is exact in floating point.
    """
    if rho < 0:
        raise ValidationError("rho must be non-negative")
    k = CONSTANTS
    if species.delta_alpha_static < 0:
        bracket = 1.0 - (omega_r / magic_rf_frequency(species)) ** 2
    else:
        # no magic rotation exists; evaluate the bracket directly
        bracket = 1.0 + (species.delta_alpha_static
                         / (k.h * species.clock_frequency)) \
            * (species.mass * omega_r * k.c / species.charge) ** 2
    return -0.5 * (omega_r / k.c) ** 2 * bracket * rho**2


def penning_min_field(nu: float, delta_alpha: float) -> float:
    """Minimum magnetic field (T) allowing the magic rotation frequency in a
    Penning trap: the field at which the magic rotation equals the cyclotron
    frequency."""
    if delta_alpha >= 0:
        raise NoMagicFrequencyError("requires delta_alpha < 0")
    k = CONSTANTS
    return math.sqrt(k.h * nu / (-delta_alpha)) / k.c
