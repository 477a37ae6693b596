import math

import pytest

from ionclock import (CONSTANTS, au_to_si_polarisability, lu176_species,
                      make_species)
from ionclock.errors import ValidationError

# polarisability atomic unit evaluated independently from CODATA-2018
# values: 4*pi*eps0*a0^3 with eps0 = 8.8541878128e-12 F/m and
# a0 = 5.29177210903e-11 m
AU_POLARISABILITY_REF = 1.64877727212e-41


def test_au_conversion_zero():
    assert au_to_si_polarisability(0.0) == 0.0


def test_au_conversion_unit_value():
    assert au_to_si_polarisability(1.0) == pytest.approx(
        AU_POLARISABILITY_REF, rel=1e-9)


def test_au_conversion_lu_value():
    assert au_to_si_polarisability(-2.19) == pytest.approx(
        -3.6108e-41, rel=1e-4)


@pytest.mark.parametrize("x", [1.0, -1.0, 2.19, -2.19, 100.0, -100.0])
def test_au_conversion_round_trip(x):
    ratio = au_to_si_polarisability(x) / au_to_si_polarisability(1.0)
    assert ratio == pytest.approx(x, rel=1e-12)


def test_constants_hbar_consistency():
    assert CONSTANTS.hbar == pytest.approx(
        CONSTANTS.h / (2.0 * math.pi), rel=1e-15)


def test_lu_record_values():
    lu = lu176_species()
    assert lu.delta_alpha_static == pytest.approx(
        -2.19 * AU_POLARISABILITY_REF, rel=1e-9)
    assert lu.cooling_linewidth == pytest.approx(2 * math.pi * 2.45e6)
    assert lu.quadrupole_moment == pytest.approx(
        -1.3 * CONSTANTS.e * CONSTANTS.a_0**2, rel=1e-12)
    assert lu.hyperfine_factors == (-0.4, 1.0, -0.6)
    assert lu.quadratic_zeeman_coefficient == pytest.approx(5e6)
    assert lu.mass == pytest.approx(175.9426897 * CONSTANTS.u, rel=1e-12)


def test_lu_record_frequency_wavelength_consistent():
    lu = lu176_species()
    assert lu.clock_frequency == pytest.approx(
        CONSTANTS.c / lu.clock_wavelength, rel=1e-9)
    assert lu.delta_alpha_static < 0


def test_species_rejects_inconsistent_frequency():
    from dataclasses import replace
    lu = lu176_species()
    with pytest.raises(ValidationError):
        replace(lu, clock_frequency=lu.clock_frequency * 1.001)


def test_make_species_unit_chain():
    sp = make_species(
        name="test", mass_u=40.0, charge_e=1.0, clock_wavelength_nm=500.0,
        delta_alpha_au=-1.0, alpha2_dc_au=0.0, quadrupole_moment_ea02=0.0,
        alpha2_magic_au=0.0, magic_compensation_wavelength_nm=600.0,
        cooling_linewidth_hz=1e6, quadratic_zeeman_hz_per_mt2=1.0,
        hyperfine_c_factors=(1.0,))
    assert sp.mass == pytest.approx(40.0 * CONSTANTS.u)
    assert sp.clock_wavelength == pytest.approx(500e-9)
    assert sp.quadratic_zeeman_coefficient == pytest.approx(1e6)
    assert sp.cooling_linewidth == pytest.approx(2 * math.pi * 1e6)
