"""Independent time-domain integration of the full RF-driven dynamics.

Everything else in the package rests on the harmonic expansion of the
periodic steady state; this module never uses that expansion. It integrates
the driven equations of motion directly for small crystals, locates the
periodic orbit, and extracts the harmonic content and the exact
time-dilation + Stark shift from the sampled trajectory. Agreement between
the two routes, at the order the expansion promises, is the package's
deepest correctness check.

Scaled units throughout: the drive term is cos(2t), so the period is pi.

Procedure: a short damped transient pulls the state toward the orbit, a
Newton iteration on the period map polishes it to integrator precision
(plain damping alone leaves a quadrature contamination of order the damping
rate in the harmonics), and a free undamped segment of integer periods is
projected onto harmonics 0, 2, 4.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import CONSTANTS
from .crystal import IonCrystal
from .errors import OracleInstabilityError, ValidationError
from .species import ClockSpecies
from .trap import TrapConfig

ORACLE_MAX_IONS = 16
MIN_STEPS_PER_CYCLE = 200
MIN_CYCLES = 64
_PERIOD = math.pi
_DIVERGENCE_RADIUS = 1e4


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled steady-state trajectory plus extracted harmonics.

    positions/velocities/field_accelerations have shape (samples, N, 3) in
    scaled units; r0 is the time-averaged position, r2/r4 the complex
    amplitudes of the e^{2it}/e^{4it} components (physically real up to
    integrator precision). residual_power_fraction is the spectral power
    outside harmonics {0, 2, 4, 6} relative to the total.
    """

    positions: np.ndarray
    velocities: np.ndarray
    field_accelerations: np.ndarray
    steps_per_cycle: int
    n_cycles: int
    times: np.ndarray
    r0: np.ndarray
    r2: np.ndarray
    r4: np.ndarray
    residual_power_fraction: float


def _check_state(q):
    if not np.all(np.isfinite(q)) or np.abs(q).max() > _DIVERGENCE_RADIUS:
        raise OracleInstabilityError(
            "trajectory diverged; drive parameters are outside the stable "
            "region or the step is too coarse")


def _period_map(state, trap, steps, dt, fext):
    n = state.size // 6
    q = state[:3 * n].reshape(n, 3).copy()
    v = state[3 * n:].reshape(n, 3).copy()
    m = trap.matrices()
    sdiag = np.ascontiguousarray(np.diag(m.static))
    rfdiag = np.ascontiguousarray(np.diag(m.rf))
    q, v, _ = kernels.rf_period_map(q, v, 0.0, steps, dt, trap.epsilon,
                                    sdiag, rfdiag, fext)
    _check_state(q)
    return np.concatenate([q.ravel(), v.ravel()])


def _newton_polish(state, trap, steps, dt, fext, tol=1e-12, max_iter=12):
    """Newton iteration for the fixed point of the one-period map."""
    scale = 1.0 + np.abs(state).max()
    for _ in range(max_iter):
        f = _period_map(state, trap, steps, dt, fext) - state
        if np.abs(f).max() < tol * scale:
            return state
        dim = state.size
        jac = np.empty((dim, dim))
        base = f + state
        for k in range(dim):
            h = 1e-7 * (1.0 + abs(state[k]))
            pert = state.copy()
            pert[k] += h
            jac[:, k] = (_period_map(pert, trap, steps, dt, fext) - base) / h
        jac -= np.eye(dim)
        state = state - np.linalg.solve(jac, f)
    f = _period_map(state, trap, steps, dt, fext) - state
    if np.abs(f).max() > 100.0 * tol * scale:
        raise OracleInstabilityError(
            "no periodic orbit found: period-map residual "
            f"{np.abs(f).max():.3e}")
    return state


def _extract_harmonics(samples, times):
    """Complex amplitude of e^{2int} per ion/coordinate for n = 0, 1, 2."""
    total = samples.shape[0]
    out = []
    for n in range(3):
        phase = np.exp(-2j * n * times)
        out.append(np.tensordot(phase, samples, axes=(0, 0)) / total)
    return out


def _residual_power_fraction(samples, n_cycles):
    """Spectral power outside harmonics {0, 2, 4, 6} over total power."""
    spec = np.fft.rfft(samples, axis=0) / samples.shape[0]
    power = np.abs(spec) ** 2
    # rfft bins double except DC/Nyquist; fine for a fraction of totals
    power[1:] *= 2.0
    total = power.sum()
    if total == 0.0:  # trajectory identically zero (ion at the RF null)
        return 0.0
    allowed_bins = [0, n_cycles, 2 * n_cycles, 3 * n_cycles]
    kept = sum(power[b].sum() for b in allowed_bins if b < power.shape[0])
    return float((total - kept) / total)


def integrate_full_eom(crystal: IonCrystal, trap: TrapConfig = None,
                       cycles: int = MIN_CYCLES,
                       steps_per_cycle: int = 400,
                       static_force=None,
                       damping_cycles: int = 32) -> TrajectoryRecord:
    """Integrate the RF-driven equations of motion to the periodic steady
    state and record it.

    ``static_force`` is an optional uniform force (scaled, same units as the
    other potential terms) used to hold ions away from the RF null, e.g. for
    single-ion displacement checks.
    """
    trap = trap or crystal.trap
    n = crystal.n_ions
    if n > ORACLE_MAX_IONS:
        raise ValidationError(f"oracle is for N <= {ORACLE_MAX_IONS}")
    if steps_per_cycle < MIN_STEPS_PER_CYCLE:
        raise ValidationError(
            f"need >= {MIN_STEPS_PER_CYCLE} steps per drive cycle")
    if cycles < MIN_CYCLES:
        raise ValidationError(f"need >= {MIN_CYCLES} recorded cycles")
    fext = np.zeros(3) if static_force is None else \
        np.ascontiguousarray(static_force, dtype=np.float64)
    m = trap.matrices()
    sdiag = np.ascontiguousarray(np.diag(m.static))
    rfdiag = np.ascontiguousarray(np.diag(m.rf))
    dt = _PERIOD / steps_per_cycle

    # damped transient toward the orbit
    q = crystal.positions.copy()
    v = np.zeros_like(q)
    gamma = 2.0 * trap.epsilon
    q, v, _ = kernels.rf_damped_steps(q, v, 0.0, damping_cycles * steps_per_cycle,
                                      dt, gamma, trap.epsilon, sdiag, rfdiag,
                                      fext)
    _check_state(q)

    # Newton polish of the periodic orbit
    state = np.concatenate([q.ravel(), v.ravel()])
    state = _newton_polish(state, trap, steps_per_cycle, dt, fext)
    q = state[:3 * n].reshape(n, 3)
    v = state[3 * n:].reshape(n, 3)

    # free projection segment
    qs, vs, accs = kernels.rf_record_cycles(q, v, 0.0, cycles,
                                            steps_per_cycle, dt, trap.epsilon,
                                            sdiag, rfdiag, fext)
    _check_state(qs)
    times = dt * np.arange(cycles * steps_per_cycle)
    c0, c1, c2 = _extract_harmonics(qs, times)
    return TrajectoryRecord(
        positions=qs, velocities=vs, field_accelerations=accs,
        steps_per_cycle=steps_per_cycle, n_cycles=cycles, times=times,
        r0=c0.real, r2=c1, r4=c2,
        residual_power_fraction=_residual_power_fraction(qs, cycles),
    )


def oracle_time_dilation(record: TrajectoryRecord, species: ClockSpecies,
                         trap: TrapConfig) -> np.ndarray:
    """Per-ion fractional shift straight from the sampled trajectory.

    Time dilation uses the sampled velocity, the Stark term uses the sampled
    field (every force in the model is electric, so the field is just
    mass/charge times the acceleration). No harmonic expansion enters.
    """
    from .trap import characteristic_length

    length = characteristic_length(species, trap.omega_z)
    k = CONSTANTS
    v_si_sq = (length * trap.omega_rf / 2.0) ** 2 \
        * np.einsum("tij,tij->i", record.velocities, record.velocities) \
        / record.velocities.shape[0]
    e_scale = species.mass * length * trap.omega_rf**2 \
        / (4.0 * species.charge)
    e_sq = e_scale**2 \
        * np.einsum("tij,tij->i", record.field_accelerations,
                    record.field_accelerations) \
        / record.field_accelerations.shape[0]
    time_dilation = -v_si_sq / (2.0 * k.c**2)
    stark = -species.delta_alpha_static * e_sq \
        / (2.0 * k.h * species.clock_frequency)
    return time_dilation + stark


def pseudo_equilibrium_positions(trap: TrapConfig, static_force) -> np.ndarray:
    """Single-ion rest position under a uniform static force (scaled)."""
    m = trap.matrices()
    return np.linalg.solve(m.pseudo, np.asarray(static_force, float)).reshape(1, 3)
