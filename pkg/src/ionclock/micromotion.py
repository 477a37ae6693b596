"""Driven-motion amplitudes and the fractional clock shifts they cause.

The crystal's periodic steady state is expanded in harmonics of the drive:
r_i(t) = r0_i + 2 r2_i cos(2t) + 2 r4_i cos(4t) + ... in scaled time. The
fast oscillation produces a second-order Doppler shift and, through the RF
field driving it, a scalar Stark shift; to leading order they cancel at the
magic drive frequency, and at order epsilon^2 the cancellation point moves
by the factors in trap.corrected_magic_factors. Space charge couples the
per-ion amplitudes; its sums enter both the amplitudes and the shifts.

Scaled equilibria do not depend on the drive frequency, so every function
here accepts an optional trap override: drive-frequency scans re-evaluate
shifts on a fixed crystal. The frequency ratio to the magic point is always
recomputed at call time, never cached. All shift formulas are per-ion,
fractional, and implemented term by term so individual contributions can be
inspected.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from . import kernels
from .constants import CONSTANTS
from .crystal import IonCrystal
from .distributions import ShiftDistribution
from .errors import CoincidentIonsError, GeometryError, ValidationError
from .species import ClockSpecies
from .trap import (TrapConfig, characteristic_length, corrected_magic_factors,
                   magic_rf_frequency)


@dataclass(frozen=True)
class FourierAmplitudes:
    """First (r2) and second (r4) micromotion harmonics, scaled units."""

    r2: np.ndarray
    r4: np.ndarray
    order: str  # "first" | "second"


def coulomb_pair_kernels(crystal: IonCrystal, i: int, j: int):
    """Pair force vector and field-gradient tensor between ions i and j.

    f_ij = u/|u|^3 and g_ij = -(3 u u^T - |u|^2 I)/|u|^5 with
    u = r_i - r_j (scaled). g is symmetric and traceless.
    """
    if i == j:
        raise ValueError("need two distinct ions")
    u = crystal.positions[i] - crystal.positions[j]
    r2 = float(u @ u)
    if r2 < kernels.COINCIDENCE_R2:
        raise CoincidentIonsError(f"ions {i} and {j} coincide")
    r = math.sqrt(r2)
    f = u / r**3
    g = -(3.0 * np.outer(u, u) - r2 * np.eye(3)) / r**5
    return f, g


def space_charge_vectors(crystal: IonCrystal, trap: TrapConfig = None) -> np.ndarray:
    """Per-ion space-charge RF coupling sums sum_j g_ij rf (r_i - r_j).

    In the bulk of a large spherical crystal these approach
    -(1/5) rf r_i (continuum limit).
    """
    trap = trap or crystal.trap
    return kernels.space_charge_vectors(crystal.positions, trap.a)


def micromotion_amplitudes(crystal: IonCrystal, order: str = "first",
                           trap: TrapConfig = None) -> FourierAmplitudes:
    """Micromotion harmonics of the periodic steady state.

    First order: r2 = (eps/4) rf r0, r4 = (eps/16) rf r2. Second order
    multiplies r2 by (I + (eps^2/4)(static + rf^2/16)) and subtracts the
    space-charge coupling term (eps^3/16) w.
    """
    trap = trap or crystal.trap
    eps = trap.epsilon
    m = trap.matrices()
    pos = crystal.positions
    r2 = (eps / 4.0) * pos @ m.rf.T
    if order == "second":
        correction = np.eye(3) + (eps**2 / 4.0) * (m.static + m.rf @ m.rf / 16.0)
        r2 = r2 @ correction.T \
            - (eps**3 / 16.0) * space_charge_vectors(crystal, trap)
    elif order != "first":
        raise ValueError("order must be 'first' or 'second'")
    r4 = (eps / 16.0) * r2 @ m.rf.T
    return FourierAmplitudes(r2=r2, r4=r4, order=order)


def _prefactor(species: ClockSpecies, trap: TrapConfig) -> float:
    """(a omega_z l / 2c)^2, the overall fractional-shift scale."""
    length = characteristic_length(species, trap.omega_z)
    return (trap.a * trap.omega_z * length / (2.0 * CONSTANTS.c)) ** 2


def _moments(crystal: IonCrystal, trap: TrapConfig):
    """Per-ion r^T M^2 r and r^T M r with M the unit RF curvature."""
    m = trap.matrices().rf_unit
    pos = crystal.positions
    mm = pos @ m.T
    return np.einsum("ij,ij->i", mm, mm), np.einsum("ij,ij->i", pos, mm)


def lowest_order_shift(crystal: IonCrystal, species: ClockSpecies,
                       trap: TrapConfig = None) -> ShiftDistribution:
    """Leading-order micromotion shift (no epsilon^2 corrections).

    Per ion: -(omega_z l / 2c)^2 [1 - (Omega/Omega0)^2] r^T rf^2 r. Exactly
    zero at the magic drive frequency.
    """
    trap = trap or crystal.trap
    length = characteristic_length(species, trap.omega_z)
    omega0 = magic_rf_frequency(species)
    u = (trap.omega_rf / omega0) ** 2
    quad, _ = _moments(crystal, trap)
    pref = (trap.omega_z * length / (2.0 * CONSTANTS.c)) ** 2 * trap.a**2
    values = -pref * (1.0 - u) * quad
    return ShiftDistribution.from_samples(values, "micromotion_lowest_order")


def linear_trap_shift_terms(crystal: IonCrystal, species: ClockSpecies,
                            trap: TrapConfig = None) -> dict:
    """The three contributions to the order-epsilon^2 shift, separately.

    Returns per-ion arrays: "bracket" (the tunable leading term),
    "asymmetry" (transverse-asymmetry term, proportional to delta) and
    "space_charge" (induced-RF term), all including the overall prefactor,
    plus their sum under "total".
    """
    trap = trap or crystal.trap
    eps = trap.epsilon
    eps2 = eps * eps
    omega0 = magic_rf_frequency(species)
    u = (trap.omega_rf / omega0) ** 2
    factors = corrected_magic_factors(eps, trap.a)
    pref = _prefactor(species, trap)
    quad, lin = _moments(crystal, trap)
    m = trap.matrices().rf_unit
    w = space_charge_vectors(crystal, trap)
    lw = np.einsum("ij,ij->i", crystal.positions @ m.T, w)
    bracket = (factors.zero_general - u) * factors.gain_general * quad
    asym = (trap.delta * eps2 / 2.0) * lin
    space = -(eps2 / (2.0 * trap.a)) * (1.0 - u) * lw
    return {
        "bracket": -pref * bracket,
        "asymmetry": -pref * asym,
        "space_charge": -pref * space,
        "total": -pref * (bracket + asym + space),
    }


def full_shift_linear_trap(crystal: IonCrystal, species: ClockSpecies,
                           trap: TrapConfig = None) -> ShiftDistribution:
    """Total micromotion-induced shift to order epsilon^2, exact space
    charge, any linear-trap geometry."""
    terms = linear_trap_shift_terms(crystal, species, trap)
    return ShiftDistribution.from_samples(terms["total"], "micromotion_full")


def spherical_shift(crystal: IonCrystal, species: ClockSpecies,
                    trap: TrapConfig = None) -> ShiftDistribution:
    """Order-epsilon^2 shift for the spherical trap, continuum space charge.

    Per ion: -(a omega_z l/2c)^2 [zero_sph - (Omega/Omega0)^2] gain_sph
    r^T M^2 r; all shifts vanish identically at
    Omega = Omega0 sqrt(zero_sph).
    """
    trap = trap or crystal.trap
    if not trap.is_spherical:
        raise GeometryError("spherical_shift requires a = sqrt(3), delta = 0")
    omega0 = magic_rf_frequency(species)
    u = (trap.omega_rf / omega0) ** 2
    factors = corrected_magic_factors(trap.epsilon, trap.a)
    quad, _ = _moments(crystal, trap)
    values = -_prefactor(species, trap) * (factors.zero_spherical - u) \
        * factors.gain_spherical * quad
    return ShiftDistribution.from_samples(values, "micromotion_spherical")


def magic_scan(crystals: dict, species: ClockSpecies, trap: TrapConfig,
               rel_span: float = 5e-4, points: int = 13):
    """Scan the drive frequency and locate where the mean shift stops
    depending on the crystal size.

    ``crystals`` maps N -> IonCrystal (all solved in the same geometry). For
    each drive frequency on a grid of ``points`` spanning
    trap.omega_rf * (1 +/- rel_span), the slope of mean shift versus N^(2/3)
    is fitted; the returned crossing is the linearly interpolated zero of
    that slope. Raises ScanRangeError if the grid does not bracket it.

    Returns (crossing_rad_s, rows) with rows of
    (omega_rad_s, [mean shift per N], slope).
    """
    from dataclasses import replace as _replace

    from .errors import ScanRangeError

    if len(crystals) < 2:
        raise ValidationError("magic scan needs at least two distinct N")
    n_arr = np.array(sorted(crystals))
    n23 = n_arr.astype(float) ** (2.0 / 3.0)
    grid = trap.omega_rf * np.linspace(1.0 - rel_span, 1.0 + rel_span, points)
    rows = []
    slopes = []
    for omega in grid:
        trap_at = _replace(trap, omega_rf=float(omega))
        means = [spherical_shift(crystals[n], species, trap_at).mean
                 if trap.is_spherical else
                 full_shift_linear_trap(crystals[n], species, trap_at).mean
                 for n in n_arr]
        slope = float(np.polyfit(n23, np.asarray(means), 1)[0])
        rows.append((float(omega), means, slope))
        slopes.append(slope)
    slopes = np.array(slopes)
    change = np.nonzero(np.diff(np.sign(slopes)) != 0)[0]
    if len(change) == 0:
        raise ScanRangeError(
            "mean-shift slope does not change sign on the grid; move the "
            "scan centre or widen the span")
    k = int(change[0])
    w0, w1 = grid[k], grid[k + 1]
    s0, s1 = slopes[k], slopes[k + 1]
    crossing = float(w0 - s0 * (w1 - w0) / (s1 - s0))
    return crossing, rows


def modulation_index(crystal: IonCrystal, probe_wavevector,
                     species: ClockSpecies, trap: TrapConfig = None):
    """Probe modulation depth per ion and the resulting coupling reduction.

    beta_i = 2 l k . r2_i (k in rad/m); the carrier Rabi coupling scales as
    J0(beta_i). Probing along the RF null axis makes beta vanish.
    """
    trap = trap or crystal.trap
    length = characteristic_length(species, trap.omega_z)
    amps = micromotion_amplitudes(crystal, order="first", trap=trap)
    k = np.asarray(probe_wavevector, dtype=np.float64)
    beta = 2.0 * length * amps.r2 @ k
    return beta, j0(beta)
