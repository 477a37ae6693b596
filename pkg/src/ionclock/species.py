"""Clock-species data: atomic constants of a clock candidate.

All atomic-structure quantities (polarisabilities, quadrupole moment,
hyperfine scale factors) are inputs taken from published calculations; this
module only stores them in SI and validates basic consistency. Records are
immutable and safe to share between threads.
"""

import math
from dataclasses import dataclass

from .constants import CONSTANTS, au_to_si_polarisability
from .errors import ValidationError


@dataclass(frozen=True)
class ClockSpecies:
    """Atomic constants of one clock candidate, in SI units.

    Attributes
    ----------
    mass : float
        Ion mass (kg).
    charge : float
        Ion charge (C).
    clock_frequency : float
        Clock transition frequency (Hz).
    clock_wavelength : float
        Clock transition vacuum wavelength (m).
    delta_alpha_static : float
        Differential static scalar polarisability of the clock transition
        (C^2 m^2 / J); negative for the candidates of interest here.
    alpha2_dc : float
        DC tensor polarisability of the upper clock state (SI).
    quadrupole_moment : float
        Electric quadrupole moment of the upper clock state (C m^2, signed).
    alpha2_magic : float
        Tensor polarisability at the compensation-beam wavelength (SI).
    magic_compensation_wavelength : float
        Wavelength at which the differential scalar polarisability of the
        clock transition vanishes (m), used for the compensation beam.
    cooling_linewidth : float
        Natural linewidth of the cooling transition, angular units (rad/s).
    quadratic_zeeman_coefficient : float
        Residual quadratic Zeeman coefficient (Hz/T^2); the clock shift is
        -coefficient * B^2.
    hyperfine_factors : tuple
        Rank-2 state factors, one per hyperfine level entering the averaging
        scheme (dimensionless).
    name : str
        Identifier used in file headers and reports.
    """

    mass: float
    charge: float
    clock_frequency: float
    clock_wavelength: float
    delta_alpha_static: float
    alpha2_dc: float
    quadrupole_moment: float
    alpha2_magic: float
    magic_compensation_wavelength: float
    cooling_linewidth: float
    quadratic_zeeman_coefficient: float
    hyperfine_factors: tuple = ()
    name: str = "custom"

    def __post_init__(self):
        if self.mass <= 0 or self.charge <= 0:
            raise ValidationError("species mass and charge must be positive")
        nu = CONSTANTS.c / self.clock_wavelength
        if abs(nu - self.clock_frequency) > 1e-9 * self.clock_frequency:
            raise ValidationError(
                "clock_frequency and clock_wavelength disagree by more than "
                "1e-9 relative"
            )


def make_species(*, name, mass_u, charge_e, clock_wavelength_nm,
                 delta_alpha_au, alpha2_dc_au, quadrupole_moment_ea02,
                 alpha2_magic_au, magic_compensation_wavelength_nm,
                 cooling_linewidth_hz, quadratic_zeeman_hz_per_mt2,
                 hyperfine_c_factors):
    """Build a ClockSpecies from the tabulation units used in config files.

    Frequencies are given as ordinary (not angular) Hz; the cooling linewidth
    is Gamma/2pi. Polarisabilities are atomic units, the quadrupole moment is
    in units of e*a0^2, the Zeeman coefficient in Hz/mT^2. Conversion to SI
    happens here, once.
    """
    wavelength = clock_wavelength_nm * 1e-9
    return ClockSpecies(
        mass=mass_u * CONSTANTS.u,
        charge=charge_e * CONSTANTS.e,
        clock_frequency=CONSTANTS.c / wavelength,
        clock_wavelength=wavelength,
        delta_alpha_static=au_to_si_polarisability(delta_alpha_au),
        alpha2_dc=au_to_si_polarisability(alpha2_dc_au),
        quadrupole_moment=quadrupole_moment_ea02 * CONSTANTS.e * CONSTANTS.a_0**2,
        alpha2_magic=au_to_si_polarisability(alpha2_magic_au),
        magic_compensation_wavelength=magic_compensation_wavelength_nm * 1e-9,
        cooling_linewidth=2.0 * math.pi * cooling_linewidth_hz,
        quadratic_zeeman_coefficient=quadratic_zeeman_hz_per_mt2 * 1e6,
        hyperfine_factors=tuple(hyperfine_c_factors),
        name=name,
    )


def lu176_species() -> ClockSpecies:
    """The built-in 176Lu+ record (1S0 -> 3D1 clock line at 848 nm).

    Isotopic mass, not the element standard weight: the derived trap scales
    only reproduce the reference values with the 176 isotope mass.
    """
    return make_species(
        name="176Lu+",
        mass_u=175.9426897,
        charge_e=1.0,
        clock_wavelength_nm=848.0,
        delta_alpha_au=-2.19,
        alpha2_dc_au=-5.0,
        quadrupole_moment_ea02=-1.3,
        alpha2_magic_au=100.0,
        magic_compensation_wavelength_nm=615.0,
        cooling_linewidth_hz=2.45e6,
        quadratic_zeeman_hz_per_mt2=5.0,
        hyperfine_c_factors=(-2.0 / 5.0, 1.0, -3.0 / 5.0),
    )
