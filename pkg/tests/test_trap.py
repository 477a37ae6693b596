import math
from dataclasses import replace

import numpy as np
import pytest

from ionclock import (CONSTANTS, TrapConfig, characteristic_length,
                      corrected_magic_factors, corrected_magic_frequency,
                      lu176_species, magic_rf_frequency,
                      penning_fractional_shift, penning_min_field,
                      scaled_units, trap_matrices)
from ionclock.constants import au_to_si_polarisability
from ionclock.errors import NoMagicFrequencyError, ValidationError

SQRT3 = math.sqrt(3.0)


@pytest.fixture(scope="module")
def lu():
    return lu176_species()


# --- characteristic length ---------------------------------------------


def test_length_lu_paper_value(lu):
    length = characteristic_length(lu, 2 * math.pi * 200e3)
    assert length == pytest.approx(7.94e-6, rel=5e-3)


def test_length_frequency_scaling(lu):
    w = 2 * math.pi * 200e3
    assert characteristic_length(lu, 8 * w) == pytest.approx(
        characteristic_length(lu, w) / 4.0, rel=1e-12)


def test_length_calcium_like_direct_formula():
    from ionclock import make_species
    sp = make_species(
        name="ca-like", mass_u=40.0, charge_e=1.0, clock_wavelength_nm=500.0,
        delta_alpha_au=-1.0, alpha2_dc_au=0.0, quadrupole_moment_ea02=0.0,
        alpha2_magic_au=0.0, magic_compensation_wavelength_nm=600.0,
        cooling_linewidth_hz=1e6, quadratic_zeeman_hz_per_mt2=0.0,
        hyperfine_c_factors=(1.0,))
    w = 2 * math.pi * 200e3
    expected = (CONSTANTS.e**2 / (4 * math.pi * CONSTANTS.epsilon_0
                                  * 40.0 * CONSTANTS.u * w**2)) ** (1 / 3)
    assert characteristic_length(sp, w) == pytest.approx(expected, rel=1e-14)
    assert characteristic_length(sp, w) == pytest.approx(1.3005e-5, rel=1e-4)


def test_length_rejects_bad_frequency(lu):
    with pytest.raises(ValidationError):
        characteristic_length(lu, 0.0)


def test_scaled_units_fields(lu):
    trap = TrapConfig(2 * math.pi * 200e3, 2 * math.pi * 23.2e6)
    units = scaled_units(lu, trap)
    assert units.time_scale == pytest.approx(2.0 / trap.omega_rf)
    assert units.epsilon == pytest.approx(trap.epsilon)
    assert units.length_scale == pytest.approx(7.937e-6, rel=1e-3)


# --- trap matrices ------------------------------------------------------


def test_matrices_spherical_pseudo_identity():
    m = trap_matrices(SQRT3, 0.0)
    assert np.allclose(m.pseudo, np.eye(3), atol=1e-15)


def test_matrices_traceless():
    m = trap_matrices(1.3, 0.07)
    assert abs(np.trace(m.rf)) < 1e-15
    assert abs(np.trace(m.static)) < 1e-15


def test_matrices_asymmetric_case():
    m = trap_matrices(1.0, 0.1)
    assert np.allclose(np.diag(m.static), [-0.4, -0.6, 1.0])
    assert np.allclose(np.diag(m.rf), [1.0, -1.0, 0.0])


def test_pseudo_eigenvalues_are_squared_secular_frequencies():
    m = trap_matrices(SQRT3, 0.0)
    assert np.allclose(np.linalg.eigvalsh(m.pseudo), [1.0, 1.0, 1.0])
    m2 = trap_matrices(1.2, 0.05)
    expected = np.sort([1.2**2 / 2 - 0.5 + 0.05, 1.2**2 / 2 - 0.5 - 0.05, 1.0])
    assert np.allclose(np.sort(np.linalg.eigvalsh(m2.pseudo)), expected)


def test_trap_config_guards():
    with pytest.raises(ValidationError):
        TrapConfig(omega_z=-1.0, omega_rf=1.0)
    with pytest.raises(ValidationError):
        # epsilon = 0.4: outside the perturbative regime
        TrapConfig(omega_z=2e5, omega_rf=1e6)


# --- magic drive frequency ----------------------------------------------


def test_magic_frequency_formula_value(lu):
    # direct evaluation of (q/mc) sqrt(h nu / -dalpha)
    expected = lu.charge / (lu.mass * CONSTANTS.c) * math.sqrt(
        CONSTANTS.h * lu.clock_frequency / (-lu.delta_alpha_static))
    assert magic_rf_frequency(lu) == pytest.approx(expected, rel=1e-14)
    assert magic_rf_frequency(lu) / (2 * math.pi) == pytest.approx(
        23.449e6, rel=1e-3)


def test_magic_frequency_unity_case(lu):
    # h nu numerically equal to -delta_alpha -> Omega0 = q/(m c)
    sp = replace(lu, delta_alpha_static=-CONSTANTS.h * lu.clock_frequency)
    assert magic_rf_frequency(sp) == pytest.approx(
        sp.charge / (sp.mass * CONSTANTS.c), rel=1e-14)


def test_magic_frequency_polarisability_scaling(lu):
    sp = replace(lu, delta_alpha_static=4.0 * lu.delta_alpha_static)
    assert magic_rf_frequency(sp) == pytest.approx(
        magic_rf_frequency(lu) / 2.0, rel=1e-14)


def test_magic_frequency_requires_negative_polarisability(lu):
    sp = replace(lu, delta_alpha_static=1e-41)
    with pytest.raises(NoMagicFrequencyError):
        magic_rf_frequency(sp)


# --- epsilon^2 correction factors ----------------------------------------


def test_corrected_factors_vanish_at_zero_epsilon():
    f = corrected_magic_factors(0.0, SQRT3)
    assert (f.zero_general, f.gain_general) == (1.0, 1.0)
    assert (f.zero_spherical, f.gain_spherical) == (1.0, 1.0)


def test_corrected_factors_seven_e_minus_five():
    f = corrected_magic_factors(math.sqrt(3.0e-4), SQRT3)
    assert 1.0 - math.sqrt(f.zero_spherical) == pytest.approx(7e-5, rel=0.08)


def test_corrected_factors_general_vs_spherical_difference():
    # difference of the two zero points scales as epsilon^4 for a = sqrt(3)
    diffs = []
    for eps2 in (1e-4, 4e-4):
        f = corrected_magic_factors(math.sqrt(eps2), SQRT3)
        diffs.append(abs(f.zero_general - f.zero_spherical))
    assert diffs[1] / diffs[0] == pytest.approx(16.0, rel=0.05)
    assert diffs[0] == pytest.approx((31.0 / 640.0) * (1e-4) ** 2, rel=0.05)


def test_corrected_factors_monotone_in_epsilon():
    grid = [corrected_magic_factors(e, SQRT3)
            for e in np.sqrt(np.linspace(1e-6, 3e-2, 20))]
    zeros_general = [f.zero_general for f in grid]
    zeros_spherical = [f.zero_spherical for f in grid]
    assert all(a > b for a, b in zip(zeros_general, zeros_general[1:]))
    assert all(a > b for a, b in zip(zeros_spherical, zeros_spherical[1:]))


def test_corrected_magic_frequency_close_to_uncorrected(lu):
    trap = TrapConfig(2 * math.pi * 200e3, magic_rf_frequency(lu))
    corrected = corrected_magic_frequency(lu, trap)
    shift = 1.0 - corrected / magic_rf_frequency(lu)
    assert shift == pytest.approx(7e-5, rel=0.1)


# --- rotating-crystal (Penning) analogue ---------------------------------


def test_penning_shift_zero_radius(lu):
    assert penning_fractional_shift(lu, 1e6, 0.0) == 0.0


def test_penning_shift_exact_zero_at_magic_rotation(lu):
    magic = magic_rf_frequency(lu)
    for rho in (1e-6, 1e-4, 1e-2):
        assert penning_fractional_shift(lu, magic, rho) == 0.0


def test_penning_shift_half_magic_value(lu):
    # frozen by direct evaluation of -(1/2)(w/c)^2 (1 - 1/4) rho^2
    omega = 0.5 * magic_rf_frequency(lu)
    rho = 100e-6
    expected = -0.5 * (omega / CONSTANTS.c) ** 2 * 0.75 * rho**2
    assert penning_fractional_shift(lu, omega, rho) == pytest.approx(
        expected, rel=1e-12)
    assert penning_fractional_shift(lu, omega, rho) == pytest.approx(
        -2.2643e-10, rel=1e-3)


def test_penning_min_field_reference_case():
    b = penning_min_field(1e14, au_to_si_polarisability(-100.0))
    assert b == pytest.approx(22.0, rel=0.05)


def test_penning_min_field_scaling():
    b1 = penning_min_field(1e14, au_to_si_polarisability(-100.0))
    b4 = penning_min_field(1e14, au_to_si_polarisability(-400.0))
    assert b4 == pytest.approx(b1 / 2.0, rel=1e-12)


def test_penning_min_field_rejects_positive_polarisability():
    with pytest.raises(NoMagicFrequencyError):
        penning_min_field(1e14, 1e-41)
