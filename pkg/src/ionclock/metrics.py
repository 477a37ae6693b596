"""Clock-level observables: Ramsey contrast, stability, systematic budget.

A distribution of per-ion shifts dephases the ensemble during free
precession; the fringe contrast is the magnitude of the mean phasor and the
line-centre pull is its argument. Stability is the standard projection-noise
limit (preparation/detection overhead is neglected: it is a percent-level
fraction of the cycle here, so the duty-cycle noise penalty is immaterial).
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .errors import ValidationError
from .species import ClockSpecies


@dataclass(frozen=True)
class RamseyResult:
    free_precession_time: float  # s
    contrast: float  # in [0, 1]
    center_shift: float  # Hz


@dataclass(frozen=True)
class BudgetEntry:
    """One systematic effect: name, fractional shift, inputs used.

    ``fractional_shift`` is None for effects only bounded, not evaluated;
    ``note`` then carries the bound.
    """

    effect: str
    fractional_shift: float
    inputs: dict
    note: str = ""


def ramsey_contrast(shifts_hz, free_precession_time: float) -> RamseyResult:
    """Fringe contrast and centre shift of a dephasing ensemble.

    contrast = |mean exp(2 pi i delta_i T)|; the centre shift is the phase
    of the same mean divided by 2 pi T.
    """
    shifts = np.asarray(shifts_hz, dtype=np.float64)
    if shifts.size < 1:
        raise ValidationError("need at least one ion")
    if free_precession_time <= 0:
        raise ValidationError("free precession time must be positive")
    phasor = np.exp(2j * np.pi * shifts * free_precession_time).mean()
    return RamseyResult(
        free_precession_time=free_precession_time,
        contrast=float(np.abs(phasor)),
        center_shift=float(np.angle(phasor) / (2.0 * np.pi * free_precession_time)),
    )


def gaussian_contrast(sigma_hz: float, free_precession_time: float) -> float:
    """Analytic contrast of a Gaussian shift distribution:
    exp(-2 pi^2 sigma^2 T^2)."""
    return math.exp(-2.0 * math.pi**2 * (sigma_hz * free_precession_time) ** 2)


def projection_noise_stability(nu0: float, n_ions: int,
                               free_precession_time: float, tau: float) -> float:
    """Projection-noise-limited Allan deviation at averaging time tau:
    sigma(tau) = 1 / (2 pi nu0 sqrt(N T tau))."""
    if min(nu0, n_ions, free_precession_time, tau) <= 0:
        raise ValidationError("all arguments must be positive")
    return 1.0 / (2.0 * math.pi * nu0
                  * math.sqrt(n_ions * free_precession_time * tau))


def averaging_time_to_target(nu0: float, n_ions: int,
                             free_precession_time: float,
                             target_sigma: float) -> float:
    """Averaging time (s) needed to reach a target Allan deviation."""
    if target_sigma <= 0:
        raise ValidationError("target must be positive")
    return (1.0 / (2.0 * math.pi * nu0
                   * math.sqrt(n_ions * free_precession_time) * target_sigma)) ** 2


# mean squared blackbody field at 300 K, (V/m)^2
BBR_FIELD_300K = 831.9**2


def bbr_shift(species: ClockSpecies, temperature: float) -> float:
    """Blackbody-radiation Stark shift, fractional.

    Uses the static differential polarisability with the standard
    <E^2> = (831.9 V/m)^2 (T/300 K)^4 blackbody field.
    """
    if temperature < 0:
        raise ValidationError("temperature must be non-negative")
    e2 = BBR_FIELD_300K * (temperature / 300.0) ** 4
    return -species.delta_alpha_static * e2 \
        / (2.0 * CONSTANTS.h * species.clock_frequency)


def doppler_cooling_temperature(species: ClockSpecies) -> float:
    """Doppler limit of the cooling transition, K."""
    if species.cooling_linewidth < 0:
        raise ValidationError("cooling linewidth must be non-negative")
    return CONSTANTS.hbar * species.cooling_linewidth / (2.0 * CONSTANTS.k_B)


def secular_doppler_shift(species: ClockSpecies, n_modes: int = 3) -> float:
    """Second-order Doppler shift of Doppler-limited secular motion,
    fractional: -(n_modes k_B T / 2) / (m c^2)."""
    t = doppler_cooling_temperature(species)
    return -n_modes * CONSTANTS.k_B * t \
        / (2.0 * species.mass * CONSTANTS.c**2)


def quadratic_zeeman_shift(species: ClockSpecies, field: float) -> float:
    """Residual quadratic Zeeman shift, fractional:
    -coefficient * B^2 / nu."""
    return -species.quadratic_zeeman_coefficient * field**2 \
        / species.clock_frequency


def shift_budget(species: ClockSpecies, trap, crystal, environment: dict,
                 micromotion_mean: float = None,
                 quadrupole_dist=None) -> list:
    """Systematic budget rows for the configured operating point.

    environment keys: temperature (K), magnetic_field (T). The micromotion
    row takes the mean of the spherical-trap shift at the configured drive;
    the quadrupole row is zero after hyperfine averaging, with the
    pre-averaging distribution width attached as a note. The probe Stark
    row is an unevaluated bound: its size depends on the interrogation
    intensity model, which is out of scope here.
    """
    from .micromotion import full_shift_linear_trap, spherical_shift
    from .multipole import hyperfine_average, quadrupole_shift_distribution

    temperature = environment.get("temperature", 300.0)
    field = environment.get("magnetic_field", 10e-6)
    if micromotion_mean is None:
        dist = spherical_shift(crystal, species, trap) if trap.is_spherical \
            else full_shift_linear_trap(crystal, species, trap)
        micromotion_mean = dist.mean
    if quadrupole_dist is None:
        quadrupole_dist = quadrupole_shift_distribution(crystal, species, trap)
    quad_mean_fractional = quadrupole_dist.mean / species.clock_frequency
    quad_after_averaging = hyperfine_average(
        [(c, quad_mean_fractional) for c in species.hyperfine_factors])
    rows = [
        BudgetEntry("blackbody_radiation", bbr_shift(species, temperature),
                    {"temperature_K": temperature}),
        BudgetEntry("secular_doppler", secular_doppler_shift(species),
                    {"cooling_linewidth_rad_s": species.cooling_linewidth}),
        BudgetEntry("micromotion", micromotion_mean,
                    {"omega_rf_rad_s": trap.omega_rf, "n_ions": crystal.n_ions}),
        BudgetEntry("quadrupole", quad_after_averaging,
                    {"n_ions": crystal.n_ions},
                    note=f"pre-averaging std {quadrupole_dist.std:.3g} Hz; "
                         "nulled by hyperfine averaging"),
        BudgetEntry("quadratic_zeeman", quadratic_zeeman_shift(species, field),
                    {"magnetic_field_T": field}),
        BudgetEntry("probe_ac_stark", None, {},
                    note="bound < 50e-18 for a 200 ms pi pulse; not "
                         "evaluated (depends on probe intensity model)"),
    ]
    return rows


def format_budget(rows) -> str:
    """Aligned text table of budget rows, shifts in 1e-18 units."""
    lines = [f"{'effect':<22}{'shift (1e-18)':>16}  note"]
    for row in rows:
        if row.fractional_shift is None:
            shown = "--"
        else:
            shown = f"{row.fractional_shift / 1e-18:.3f}"
        lines.append(f"{row.effect:<22}{shown:>16}  {row.note}")
    return "\n".join(lines)
