"""Shared fixtures: species, traps and annealed crystals.

Crystal solves are session-scoped because several test modules (and the
acceptance suite) share them; the N = 5000 pair only builds when a test
marked slow actually runs.
"""

import math
import time

import pytest

from ionclock import SolverParams, TrapConfig, lu176_species, solve_crystal

# paper-scale operating point: nu_z = 200 kHz, drive 23.2 MHz, spherical
OMEGA_Z = 2.0 * math.pi * 200e3
OMEGA_RF = 2.0 * math.pi * 23.2e6

# dt = 0.2 is comfortably inside the Verlet stability bound (max mode
# frequency ~2 in scaled units) and cuts solve times 4x vs the 0.05 default
FAST_STEP = 0.2


@pytest.fixture(scope="session")
def lu():
    return lu176_species()


@pytest.fixture(scope="session")
def paper_trap():
    return TrapConfig(omega_z=OMEGA_Z, omega_rf=OMEGA_RF)


@pytest.fixture(scope="session")
def tight_params():
    return SolverParams(time_step=FAST_STEP, force_tolerance=1e-9,
                        max_steps=200_000)


@pytest.fixture(scope="session")
def loose_params():
    # statistics-grade equilibria; 1e-6 residual moves no distribution
    # beyond ~1e-6 relative
    return SolverParams(time_step=FAST_STEP, force_tolerance=1e-6,
                        max_steps=200_000)


@pytest.fixture(scope="session")
def solve_times():
    """Wall-clock seconds per fixture solve, for the runtime-budget check."""
    return {}


def _timed_solve(n, trap, params, times, **kw):
    start = time.perf_counter()
    crystal = solve_crystal(n, trap, params, **kw)
    times[n] = time.perf_counter() - start
    return crystal


@pytest.fixture(scope="session")
def crystal2(paper_trap, tight_params, solve_times):
    return _timed_solve(2, paper_trap, tight_params, solve_times)


@pytest.fixture(scope="session")
def crystal100(paper_trap, tight_params, solve_times):
    return _timed_solve(100, paper_trap, tight_params, solve_times)


@pytest.fixture(scope="session")
def crystal300(paper_trap, tight_params, solve_times):
    return _timed_solve(300, paper_trap, tight_params, solve_times)


@pytest.fixture(scope="session")
def crystal1000(paper_trap, tight_params, solve_times):
    return _timed_solve(1000, paper_trap, tight_params, solve_times)


@pytest.fixture(scope="session")
def crystal5000_icosahedral(paper_trap, loose_params):
    return solve_crystal(5000, paper_trap, loose_params,
                         seed_family="icosahedral")


@pytest.fixture(scope="session")
def crystal5000_bcc(paper_trap, loose_params):
    return solve_crystal(5000, paper_trap, loose_params, seed_family="bcc")
