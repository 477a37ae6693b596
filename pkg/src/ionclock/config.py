"""Scenario configuration: INI files plus command-line overrides.

Sections: [species], [trap], [solver], [beam], [scan]. Unit conventions in
files: trap and scan frequencies are ordinary Hz (converted to rad/s at
load), species fields carry explicit unit suffixes (delta_alpha_au,
clock_wavelength_nm, ...), beam sizes are either metres or multiples of the
characteristic length.
"""

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .crystal import SolverParams
from .errors import ValidationError
from .multipole import BeamProfile, FieldOrientation
from .species import ClockSpecies, lu176_species, make_species
from .trap import (SPHERICAL_A, TrapConfig, characteristic_length,
                   corrected_magic_frequency, magic_rf_frequency)

FORMAT_VERSION = "1"

BUILTIN_SPECIES = {"lu176": lu176_species}

OMEGA_MODES = ("absolute", "magic", "magic-corrected")

_SPECIES_FIELDS = (
    "mass_u", "charge_e", "clock_wavelength_nm", "delta_alpha_au",
    "alpha2_dc_au", "quadrupole_moment_ea02", "alpha2_magic_au",
    "magic_compensation_wavelength_nm", "cooling_linewidth_hz",
    "quadratic_zeeman_hz_per_mt2",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a CLI command needs, fully resolved to SI."""

    species: ClockSpecies
    omega_z: float  # rad/s
    a: float
    delta: float
    omega_mode: str
    omega_value: float  # Hz for absolute, multiplier of the magic drive else
    solver: SolverParams
    n_list: tuple
    rng_seed: int
    seed_family: str
    beam_waist_over_l: float
    beam_power: float  # W; negative means "optimise"
    beam_wavelength: float  # m
    beam_alpha2: float  # SI
    orientation: FieldOrientation
    orientation_count: int
    ramsey_time: float  # s
    temperature: float  # K
    magnetic_field: float  # T
    scan_rel_span: float
    scan_points: int
    out_dir: Path
    resolved: dict = field(default_factory=dict, compare=False)

    def trap(self) -> TrapConfig:
        """TrapConfig with the drive frequency resolved per omega_mode."""
        if self.omega_mode == "absolute":
            omega_rf = 2.0 * math.pi * self.omega_value
        elif self.omega_mode == "magic":
            omega_rf = self.omega_value * magic_rf_frequency(self.species)
        elif self.omega_mode == "magic-corrected":
            base = TrapConfig(self.omega_z, magic_rf_frequency(self.species),
                              self.a, self.delta)
            omega_rf = self.omega_value * corrected_magic_frequency(
                self.species, base)
        else:
            raise ValidationError(f"unknown omega mode {self.omega_mode!r}")
        return TrapConfig(self.omega_z, omega_rf, self.a, self.delta)

    def beam(self) -> BeamProfile:
        """Compensation beam; power < 0 is replaced after optimisation."""
        length = characteristic_length(self.species, self.omega_z)
        return BeamProfile(
            waist=self.beam_waist_over_l * length,
            power=max(self.beam_power, 0.0),
            wavelength=self.beam_wavelength,
            alpha2_at_wavelength=self.beam_alpha2,
        )


def _species_from_section(section) -> ClockSpecies:
    if "name" in section:
        name = section["name"]
        if name not in BUILTIN_SPECIES:
            raise ValidationError(
                f"unknown species {name!r}; built-ins: "
                f"{sorted(BUILTIN_SPECIES)}")
        return BUILTIN_SPECIES[name]()
    missing = [k for k in _SPECIES_FIELDS if k not in section]
    if missing:
        raise ValidationError(f"[species] is missing {missing}")
    factors = tuple(float(tok) for tok in
                    section.get("hyperfine_c_factors", "1.0").split(","))
    return make_species(
        name=section.get("label", "custom"),
        mass_u=float(section["mass_u"]),
        charge_e=float(section["charge_e"]),
        clock_wavelength_nm=float(section["clock_wavelength_nm"]),
        delta_alpha_au=float(section["delta_alpha_au"]),
        alpha2_dc_au=float(section["alpha2_dc_au"]),
        quadrupole_moment_ea02=float(section["quadrupole_moment_ea02"]),
        alpha2_magic_au=float(section["alpha2_magic_au"]),
        magic_compensation_wavelength_nm=float(
            section["magic_compensation_wavelength_nm"]),
        cooling_linewidth_hz=float(section["cooling_linewidth_hz"]),
        quadratic_zeeman_hz_per_mt2=float(
            section["quadratic_zeeman_hz_per_mt2"]),
        hyperfine_c_factors=factors,
    )


def load_scenario(path=None, *, n_list=None, rng_seed=None, omega_mode=None,
                  omega_value=None, out_dir=None) -> ScenarioConfig:
    """Parse an INI file (optional) and apply command-line overrides.

    Every value has a default matching the built-in Lu+ example scenario, so
    the CLI is runnable with no config file at all.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"config file {path} does not exist")
        parser.read(path)

    def get(section, key, default, cast=float):
        if parser.has_option(section, key):
            return cast(parser.get(section, key))
        return default

    species = _species_from_section(parser["species"]) \
        if parser.has_section("species") else lu176_species()

    omega_z = 2.0 * math.pi * get("trap", "omega_z_hz", 200e3)
    a = get("trap", "a", SPHERICAL_A)
    delta = get("trap", "delta", 0.0)
    mode = omega_mode or get("trap", "omega_mode", "absolute", str)
    if mode not in OMEGA_MODES:
        raise ValidationError(f"omega mode must be one of {OMEGA_MODES}")
    if omega_value is None:
        default_value = 23.2e6 if mode == "absolute" else 1.0
        omega_value = get("trap", "omega_value_hz", default_value) \
            if mode == "absolute" else get("trap", "omega_multiplier", default_value)

    solver = SolverParams(
        time_step=get("solver", "time_step", 0.05),
        damping_coefficient=get("solver", "damping", 1.0),
        force_tolerance=get("solver", "force_tolerance", 1e-9),
        max_steps=get("solver", "max_steps", 200_000, int),
        jitter_fraction=get("solver", "jitter_fraction", 0.1),
    )
    if n_list is None:
        n_list = tuple(int(tok) for tok in
                       str(get("solver", "n_list", "100", str)).split(","))
    else:
        n_list = tuple(int(n) for n in n_list)
    if any(n < 1 for n in n_list):
        raise ValidationError("every N must be >= 1")
    if rng_seed is None:
        rng_seed = get("solver", "seed", 1, int)
    seed_family = get("solver", "seed_family", "icosahedral", str)

    beam_wavelength = get("beam", "wavelength_nm",
                          species.magic_compensation_wavelength * 1e9) * 1e-9
    beam_alpha2 = get("beam", "alpha2_au", None)
    if beam_alpha2 is None:
        beam_alpha2 = species.alpha2_magic
    else:
        from .constants import au_to_si_polarisability
        beam_alpha2 = au_to_si_polarisability(beam_alpha2)

    config = ScenarioConfig(
        species=species,
        omega_z=omega_z,
        a=a,
        delta=delta,
        omega_mode=mode,
        omega_value=float(omega_value),
        solver=solver,
        n_list=n_list,
        rng_seed=int(rng_seed),
        seed_family=seed_family,
        beam_waist_over_l=get("beam", "waist_over_l", 100.0),
        beam_power=get("beam", "power_w", -1.0),
        beam_wavelength=beam_wavelength,
        beam_alpha2=beam_alpha2,
        orientation=FieldOrientation(
            alpha=get("scan", "orientation_alpha_rad", 0.0),
            beta=get("scan", "orientation_beta_rad", 0.0)),
        orientation_count=get("scan", "orientation_count", 10, int),
        ramsey_time=get("scan", "ramsey_time_s", 1.0),
        temperature=get("scan", "temperature_k", 300.0),
        magnetic_field=get("scan", "magnetic_field_t", 10e-6),
        scan_rel_span=get("scan", "omega_rel_span", 5e-4),
        scan_points=get("scan", "omega_points", 13, int),
        out_dir=Path(out_dir) if out_dir is not None
        else Path(get("scan", "out_dir", "ionclock_out", str)),
    )
    object.__setattr__(config, "resolved", _resolved_dict(config))
    return config


def _resolved_dict(config: ScenarioConfig) -> dict:
    """Flat, JSON-ready echo of every resolved setting (SI units)."""
    s = config.species
    return {
        "format_version": FORMAT_VERSION,
        "species": {
            "name": s.name,
            "mass_kg": s.mass,
            "charge_C": s.charge,
            "clock_frequency_hz": s.clock_frequency,
            "delta_alpha_si": s.delta_alpha_static,
            "alpha2_dc_si": s.alpha2_dc,
            "quadrupole_moment_si": s.quadrupole_moment,
            "alpha2_magic_si": s.alpha2_magic,
            "magic_compensation_wavelength_m": s.magic_compensation_wavelength,
            "cooling_linewidth_rad_s": s.cooling_linewidth,
            "quadratic_zeeman_hz_per_t2": s.quadratic_zeeman_coefficient,
            "hyperfine_c_factors": list(s.hyperfine_factors),
        },
        "trap": {
            "omega_z_rad_s": config.omega_z,
            "a": config.a,
            "delta": config.delta,
            "omega_mode": config.omega_mode,
            "omega_value": config.omega_value,
        },
        "solver": {
            "time_step": config.solver.time_step,
            "damping": config.solver.damping_coefficient,
            "force_tolerance": config.solver.force_tolerance,
            "max_steps": config.solver.max_steps,
            "jitter_fraction": config.solver.jitter_fraction,
            "n_list": list(config.n_list),
            "seed": config.rng_seed,
            "seed_family": config.seed_family,
        },
        "beam": {
            "waist_over_l": config.beam_waist_over_l,
            "power_w": config.beam_power,
            "wavelength_m": config.beam_wavelength,
            "alpha2_si": config.beam_alpha2,
        },
        "scan": {
            "orientation_alpha_rad": config.orientation.alpha,
            "orientation_beta_rad": config.orientation.beta,
            "orientation_count": config.orientation_count,
            "ramsey_time_s": config.ramsey_time,
            "temperature_k": config.temperature,
            "magnetic_field_t": config.magnetic_field,
            "omega_rel_span": config.scan_rel_span,
            "omega_points": config.scan_points,
        },
    }
