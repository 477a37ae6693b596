import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from ionclock import (CONSTANTS, BeamProfile, FieldOrientation, IonCrystal,
                      characteristic_length, compensated_tensor_distribution,
                      hyperfine_average, lg_doughnut_intensity,
                      optimize_compensation_power, quadrupole_geometric_factor,
                      quadrupole_shift_distribution, quadrupole_tensor,
                      rf_quadratic_field_average, tensor_shift_distribution)
from ionclock.crystal import bcc_seed
from ionclock.errors import CompensationSignError, ValidationError
from ionclock.multipole import all_quadrupole_tensors

CUBE_ROOT_2 = 2.0 ** (1.0 / 3.0)


def single_ion(positions, trap):
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    return IonCrystal(pos, len(pos), "external", 0, 0.0, trap)


# --- quadrupole tensors -------------------------------------------------------


def test_quadrupole_tensor_single_ion(paper_trap):
    q = quadrupole_tensor(single_ion([[0, 0, 0]], paper_trap), 0)
    assert np.allclose(q.q_matrix, 0.0)


def test_quadrupole_tensor_axial_pair(paper_trap):
    d = 1.7
    crystal = single_ion([[0, 0, d / 2], [0, 0, -d / 2]], paper_trap)
    for i in (0, 1):
        q = quadrupole_tensor(crystal, i).q_matrix
        assert np.allclose(q, np.diag([1.0, 1.0, -2.0]) / d**3, rtol=1e-12)


def test_quadrupole_tensors_traceless_symmetric(crystal100):
    tensors = all_quadrupole_tensors(crystal100)
    assert np.abs(np.trace(tensors, axis1=1, axis2=2)).max() < 1e-12
    assert np.allclose(tensors, np.transpose(tensors, (0, 2, 1)))
    # batch path matches the single-ion path
    q5 = quadrupole_tensor(crystal100, 5).q_matrix
    assert np.allclose(tensors[5], q5, rtol=1e-12)


def test_quadrupole_bcc_interior_vanishes(paper_trap):
    # cubic symmetry nulls the gradient at the central site; crops of
    # complete shells (59, 259 sites) realise it exactly, while a ragged
    # boundary leaves only a small residue
    for n in (59, 259):
        crystal = single_ion(bcc_seed(n), paper_trap)
        q = quadrupole_tensor(crystal, 0).q_matrix
        assert np.abs(q).max() < 1e-12
    ragged = single_ion(bcc_seed(4000), paper_trap)
    assert np.abs(quadrupole_tensor(ragged, 0).q_matrix).max() < 0.01


# --- geometric factor ----------------------------------------------------------


def test_geometric_factor_axis_aligned():
    q = quadrupole_tensor(
        single_ion([[0, 0, 1], [0, 0, -1]],
                   __import__("ionclock").TrapConfig(1e6, 1e8)), 0)
    g = quadrupole_geometric_factor(q, FieldOrientation(0.0, 0.0))
    assert g == pytest.approx(q.q_matrix[2, 2] / 2.0, rel=1e-12)
    # pair tensor: q_zz = -2/d^3 with d = 2
    assert g == pytest.approx(-1.0 / 2.0**3, rel=1e-12)


def test_geometric_factor_zero_tensor(paper_trap):
    from ionclock.multipole import QuadrupoleTensor
    q = QuadrupoleTensor(np.zeros((3, 3)), 0)
    for alpha, beta in ((0, 0), (1.0, 0.5), (2.0, 3.0)):
        assert quadrupole_geometric_factor(
            q, FieldOrientation(alpha, beta)) == 0.0


def test_geometric_factor_periodic_in_alpha(crystal100):
    q = quadrupole_tensor(crystal100, 3)
    g1 = quadrupole_geometric_factor(q, FieldOrientation(0.7, 1.1))
    g2 = quadrupole_geometric_factor(q, FieldOrientation(0.7 + 2 * math.pi, 1.1))
    assert g1 == pytest.approx(g2, rel=1e-12)


def test_orientation_beta_validated():
    with pytest.raises(ValidationError):
        FieldOrientation(0.0, -0.1)


# --- quadrupole shift distribution ----------------------------------------------


def test_quadrupole_scale(lu, paper_trap):
    # overall scale: |quadrupole moment| m omega_z^2 / (e h) for the pair
    # geometry reduces to the documented ~2.5 Hz bracket
    scale = abs(lu.quadrupole_moment) * lu.mass * paper_trap.omega_z**2 \
        / (lu.charge * CONSTANTS.h)
    assert scale == pytest.approx(2.5, rel=0.02)


def test_quadrupole_distribution_linear_in_moment(crystal100, lu, paper_trap):
    doubled = replace(lu, quadrupole_moment=2 * lu.quadrupole_moment)
    d1 = quadrupole_shift_distribution(crystal100, lu, paper_trap)
    d2 = quadrupole_shift_distribution(crystal100, doubled, paper_trap)
    assert np.allclose(d2.per_ion, 2.0 * d1.per_ion, rtol=1e-12)
    assert d1.unit == "Hz"


def test_quadrupole_orientation_isotropy(crystal1000, lu):
    rng = np.random.default_rng(7)
    stds = []
    for _ in range(10):
        orient = FieldOrientation(float(rng.uniform(0, 2 * math.pi)),
                                  float(math.acos(rng.uniform(-1, 1))))
        stds.append(quadrupole_shift_distribution(
            crystal1000, lu, orient=orient).std)
    assert (max(stds) - min(stds)) / np.mean(stds) < 0.10


# --- hyperfine averaging ----------------------------------------------------------


def test_hyperfine_average_nulls_common_shift(lu):
    for shift in (1.0, -3.7, 1e-17):
        avg = hyperfine_average([(c, shift) for c in lu.hyperfine_factors])
        assert abs(avg) < 1e-15 * max(abs(shift), 1.0)


def test_hyperfine_average_single_level():
    assert hyperfine_average([(1.0, 0.42)]) == pytest.approx(0.42)


def test_hyperfine_average_distinct_shifts():
    shifts = (0.3, -1.1, 4.0)
    avg = hyperfine_average(zip((-0.4, 1.0, -0.6), shifts))
    expected = (-0.4 * 0.3 + 1.0 * (-1.1) - 0.6 * 4.0) / 3.0
    assert avg == pytest.approx(expected, rel=1e-12)


def test_hyperfine_average_empty_rejected():
    with pytest.raises(ValidationError):
        hyperfine_average([])


# --- RF field averages --------------------------------------------------------------


def test_rf_field_average_axis_z_relation(crystal100, lu):
    avg, e2 = rf_quadratic_field_average(crystal100, lu)
    # transverse RF field: <3Ez^2 - E^2> = -<E^2> up to the tiny
    # space-charge z component
    assert np.allclose(avg, -e2, rtol=1e-8)
    assert np.all(e2 >= 0.0)


def test_rf_field_average_origin_ion(paper_trap, lu):
    crystal = single_ion([[0, 0, 0]], paper_trap)
    avg, e2 = rf_quadratic_field_average(crystal, lu)
    assert avg[0] == 0.0 and e2[0] == 0.0


def test_rf_field_average_pair_hand_value(paper_trap, lu):
    # transverse pair: field amplitude (m wz Omega l / q)(a d/2 + eps^2/4
    # * 2 a/d^2) on each ion, cycle-averaged square is half the amplitude
    # squared
    crystal = single_ion([[CUBE_ROOT_2 / 2, 0, 0], [-CUBE_ROOT_2 / 2, 0, 0]],
                         paper_trap)
    _, e2 = rf_quadratic_field_average(crystal, lu)
    t = paper_trap
    length = characteristic_length(lu, t.omega_z)
    scale = lu.mass * t.omega_z * t.omega_rf * length / lu.charge
    amplitude = scale * (t.a * CUBE_ROOT_2 / 2
                         + t.epsilon**2 / 4.0 * 2.0 * t.a / CUBE_ROOT_2**2)
    assert e2[0] == pytest.approx(amplitude**2 / 2.0, rel=1e-12)
    assert e2[1] == pytest.approx(e2[0], rel=1e-12)


# --- tensor shifts -------------------------------------------------------------------


def test_tensor_shift_zero_on_axis(paper_trap, lu):
    crystal = single_ion([[0, 0, 2.0]], paper_trap)
    assert tensor_shift_distribution(crystal, lu).per_ion[0] == 0.0


def test_tensor_shift_sign(crystal100, lu):
    # negative tensor polarisability, axis along z: shifts are negative
    dist = tensor_shift_distribution(crystal100, lu)
    off_axis = np.hypot(crystal100.positions[:, 0],
                        crystal100.positions[:, 1]) > 0.5
    assert np.all(dist.per_ion[off_axis] < 0.0)


# --- compensation beam ----------------------------------------------------------------


def test_beam_intensity_zero_on_axis():
    beam = BeamProfile(waist=1e-4, power=2.0, wavelength=615e-9,
                       alpha2_at_wavelength=1e-39)
    assert lg_doughnut_intensity(0.0, beam) == 0.0


def test_beam_power_integral():
    beam = BeamProfile(waist=8e-4, power=3.0, wavelength=615e-9,
                       alpha2_at_wavelength=1e-39)
    total, _ = quad(lambda r: lg_doughnut_intensity(r, beam) * 2 * math.pi * r,
                    0.0, 20 * beam.waist)
    assert total == pytest.approx(beam.power, rel=1e-9)


def test_beam_small_radius_quadratic():
    beam = BeamProfile(waist=1e-3, power=5.0, wavelength=615e-9,
                       alpha2_at_wavelength=1e-39)
    rho = 1e-6
    expected = 4.0 * beam.power / (math.pi * beam.waist**4) * rho**2
    assert lg_doughnut_intensity(rho, beam) == pytest.approx(expected, rel=1e-5)


def test_compensation_zero_power_identity(crystal100, lu):
    beam = BeamProfile(waist=1e-4, power=0.0, wavelength=615e-9,
                       alpha2_at_wavelength=lu.alpha2_magic)
    raw = tensor_shift_distribution(crystal100, lu)
    comp = compensated_tensor_distribution(crystal100, lu, beam=beam)
    assert np.array_equal(raw.per_ion, comp.per_ion)


def test_compensation_sign_guard(crystal100, lu):
    beam = BeamProfile(waist=1e-4, power=1.0, wavelength=615e-9,
                       alpha2_at_wavelength=lu.alpha2_dc)
    with pytest.raises(CompensationSignError):
        compensated_tensor_distribution(crystal100, lu, beam=beam)


def test_single_ion_quadratic_regime_cancellation(paper_trap, lu):
    # one off-axis ion well inside the waist: the power that cancels the
    # quadratic profiles exactly leaves a residual bounded by the beam's
    # quartic term, here <1e-3 of the raw shift
    length = characteristic_length(lu, paper_trap.omega_z)
    waist = 5000.0 * length
    x = 0.02 * waist / length  # scaled coordinate
    crystal = single_ion([[x, 0, 0]], paper_trap)
    raw = tensor_shift_distribution(crystal, lu).per_ion[0]
    t = paper_trap
    field_scale = (lu.mass * t.omega_z * t.omega_rf * length / lu.charge)**2 \
        * t.a**2 / 2.0
    # equate the quadratic coefficients of <E^2>: the RF side is per scaled
    # radius squared, the beam per SI radius squared
    power = (-lu.alpha2_dc / lu.alpha2_magic) * field_scale \
        * math.pi * waist**4 * CONSTANTS.epsilon_0 * CONSTANTS.c \
        / (4.0 * length**2)
    beam = BeamProfile(waist=waist, power=power, wavelength=615e-9,
                       alpha2_at_wavelength=lu.alpha2_magic)
    comp = compensated_tensor_distribution(crystal, lu, beam=beam)
    assert abs(comp.per_ion[0]) < 1e-3 * abs(raw)


def test_optimizer_on_axis_crystal(paper_trap, lu):
    crystal = single_ion([[0, 0, 1.0], [0, 0, -1.0]], paper_trap)
    template = BeamProfile(waist=1e-4, power=1.0, wavelength=615e-9,
                           alpha2_at_wavelength=lu.alpha2_magic)
    beam = optimize_compensation_power(crystal, lu, beam_template=template)
    assert beam.power == 0.0


def test_optimizer_quadratic_regime(paper_trap, lu):
    # ions all well inside the waist: optimised residual is < 1e-3 of the
    # uncompensated spread
    length = characteristic_length(lu, paper_trap.omega_z)
    rng = np.random.default_rng(4)
    pos = rng.normal(size=(40, 3)) * 3.0
    crystal = IonCrystal(pos, 40, "external", 0, 0.0, paper_trap)
    template = BeamProfile(waist=2000.0 * length, power=1.0,
                           wavelength=615e-9,
                           alpha2_at_wavelength=lu.alpha2_magic)
    beam = optimize_compensation_power(crystal, lu, beam_template=template)
    raw = tensor_shift_distribution(crystal, lu)
    comp = compensated_tensor_distribution(crystal, lu, beam=beam)
    assert comp.std < 1e-3 * raw.std


def test_optimizer_matches_closed_form(crystal100, lu):
    from ionclock.multipole import _beam_shift_per_ion
    template = BeamProfile(
        waist=100.0 * characteristic_length(lu, crystal100.trap.omega_z),
        power=1.0, wavelength=615e-9, alpha2_at_wavelength=lu.alpha2_magic)
    beam = optimize_compensation_power(crystal100, lu, beam_template=template)
    rf = tensor_shift_distribution(crystal100, lu).per_ion
    per_watt = _beam_shift_per_ion(crystal100, lu, crystal100.trap,
                                   replace(template, power=1.0))
    expected = -np.cov(rf, per_watt, bias=True)[0, 1] / per_watt.var()
    assert beam.power == pytest.approx(expected, rel=1e-6)


def test_optimizer_never_increases_spread(crystal100, lu):
    template = BeamProfile(
        waist=100.0 * characteristic_length(lu, crystal100.trap.omega_z),
        power=1.0, wavelength=615e-9, alpha2_at_wavelength=lu.alpha2_magic)
    beam = optimize_compensation_power(crystal100, lu, beam_template=template)
    raw = tensor_shift_distribution(crystal100, lu)
    comp = compensated_tensor_distribution(crystal100, lu, beam=beam)
    assert comp.std <= raw.std
