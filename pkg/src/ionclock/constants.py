"""Physical constants (CODATA, via scipy) and unit conversions.

Everything downstream works in SI. Polarisabilities are tabulated in atomic
units in the literature and in config files; they are converted exactly once,
here, with ``au_to_si_polarisability``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA values used throughout, bundled so they are testable and
    mockable as one unit."""

    c: float  # speed of light, m/s
    h: float  # Planck constant, J s
    e: float  # elementary charge, C
    epsilon_0: float  # vacuum permittivity, F/m
    a_0: float  # Bohr radius, m
    u: float  # atomic mass unit, kg
    k_B: float  # Boltzmann constant, J/K
    hbar: float  # reduced Planck constant, J s


CONSTANTS = PhysicalConstants(
    c=_sc.c,
    h=_sc.h,
    e=_sc.e,
    epsilon_0=_sc.epsilon_0,
    a_0=_sc.physical_constants["Bohr radius"][0],
    u=_sc.physical_constants["atomic mass constant"][0],
    k_B=_sc.k,
    hbar=_sc.hbar,
)

# SI polarisability per atomic unit: 4 pi eps0 a0^3
AU_POLARISABILITY = 4.0 * np.pi * CONSTANTS.epsilon_0 * CONSTANTS.a_0**3


def au_to_si_polarisability(alpha_au: float) -> float:
    """Convert a polarisability from atomic units to SI (C^2 m^2 / J)."""
    return alpha_au * AU_POLARISABILITY
