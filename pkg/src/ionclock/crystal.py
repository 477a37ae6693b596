"""Equilibrium ion configurations by damped pseudo-potential dynamics.

Positions are in scaled units (lengths divided by the characteristic length
l); in these units the pseudo-potential force on ion i is

    f_i = -(static + rf^2/2) r_i + sum_j (r_i - r_j)/|r_i - r_j|^3

and equilibria do not depend on the drive frequency at all. Initial
conditions come from one of two seed families: concentric icosahedral shells
(good for up to a few thousand ions) or a body-centered-cubic crop (the
large-N long-range-ordered limit). Final configurations depend on the seed
family at large N, so every crystal records its provenance.
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (CoincidentIonsError, ConvergenceError, ValidationError)
from .trap import TrapConfig, TrapMatrices

SEED_FAMILIES = ("icosahedral", "bcc", "external")

# bcc cube edge giving the continuum scaled density 3/(4 pi): 2 sites/cell
BCC_LATTICE_CONSTANT = (8.0 * math.pi / 3.0) ** (1.0 / 3.0)

# mean nearest-neighbour spacing the seeds are normalised to
SEED_SPACING = 1.5


@dataclass(frozen=True)
class SolverParams:
    """Damped-descent settings, all in scaled units."""

    time_step: float = 0.05
    damping_coefficient: float = 1.0
    force_tolerance: float = 1e-9
    max_steps: int = 200_000
    jitter_fraction: float = 0.1
    energy_stride: int = 100

    def __post_init__(self):
        if self.time_step <= 0:
            raise ValidationError("time_step must be positive")
        if self.force_tolerance <= 0:
            raise ValidationError("force_tolerance must be positive")
        if not 0.0 <= self.jitter_fraction <= 0.5:
            raise ValidationError("jitter_fraction must be in [0, 0.5]")


@dataclass(frozen=True)
class IonCrystal:
    """Converged configuration plus solver provenance.

    ``positions`` is (N, 3) in scaled units and is marked read-only;
    ``energy_trace`` is the sampled total energy during the anneal (or None
    for imported crystals).
    """

    positions: np.ndarray
    n_ions: int
    seed_family: str
    rng_seed: int
    residual: float
    trap: TrapConfig
    energy_trace: np.ndarray = None
    n_steps: int = 0

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.float64)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if pos.shape != (self.n_ions, 3):
            raise ValidationError("positions must have shape (n_ions, 3)")


def _icosahedron_vertices():
    """Vertices of a regular icosahedron with unit circumradius."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    raw = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            raw.append((0.0, s1, s2 * phi))
            raw.append((s1, s2 * phi, 0.0))
            raw.append((s2 * phi, 0.0, s1))
    v = np.array(raw)
    return v / np.linalg.norm(v[0])


def _icosahedron_edges_faces(verts):
    """Edge and face index lists, in a fixed deterministic order."""
    n = len(verts)
    edge_len = np.inf
    d = np.linalg.norm(verts[:, None, :] - verts[None, :, :], axis=-1)
    edge_len = d[d > 1e-9].min()
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if abs(d[i, j] - edge_len) < 1e-9]
    faces = []
    adj = {i: {j for i2, j in edges if i2 == i} | {i2 for i2, j in edges if j == i}
           for i in range(n)}
    for i in range(n):
        for j in sorted(adj[i]):
            if j <= i:
                continue
            for k in sorted(adj[i] & adj[j]):
                if k > j:
                    faces.append((i, j, k))
    return edges, faces


def _mackay_shell(k, verts, edges, faces):
    """Sites of icosahedral shell k, listed vertex, then edge, then face."""
    sites = [k * verts[i] for i in range(12)]
    for i, j in edges:
        for step in range(1, k):
            sites.append((k - step) * verts[i] + step * verts[j])
    for i, j, m in faces:
        for p in range(1, k):
            for q in range(1, k - p):
                r = k - p - q
                sites.append(r * verts[i] + p * verts[j] + q * verts[m])
    return sites


def _mean_nearest_neighbour(pos):
    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1).mean()


def mackay_icosahedron_seed(n: int) -> np.ndarray:
    """First n sites of a multi-shell icosahedral packing, scaled so the
    mean nearest-neighbour spacing is 1.5.

    Shell k carries 10 k^2 + 2 sites around a central one; a partial
    outermost shell is filled in vertex, edge, face order, which makes the
    construction deterministic for every n.
    """
    if n < 1:
        raise ValidationError("need at least one ion")
    if n == 1:
        return np.zeros((1, 3))
    verts = _icosahedron_vertices()
    edges, faces = _icosahedron_edges_faces(verts)
    sites = [np.zeros(3)]
    k = 1
    while len(sites) < n:
        sites.extend(_mackay_shell(k, verts, edges, faces))
        k += 1
    pos = np.array(sites[:n])
    return pos * (SEED_SPACING / _mean_nearest_neighbour(pos))


def bcc_seed(n: int, lattice_constant: float = BCC_LATTICE_CONSTANT) -> np.ndarray:
    """The n body-centered-cubic sites nearest the origin, cube axes along
    the coordinate (trap) axes.

    The default cube edge makes the site density equal to the continuum
    equilibrium density, which minimises annealing distortion of the bulk.
    Crops are deterministic: stable sort by (radius, x, y, z).
    """
    if n < 1:
        raise ValidationError("need at least one ion")
    # generous bounding box: sphere of the target volume plus one cell
    radius = (3.0 * n / (8.0 * math.pi)) ** (1.0 / 3.0) * lattice_constant + \
        2.0 * lattice_constant
    kmax = int(math.ceil(radius / lattice_constant)) + 1
    idx = np.arange(-kmax, kmax + 1, dtype=np.float64)
    ii, jj, kk = np.meshgrid(idx, idx, idx, indexing="ij")
    corner = np.stack([ii, jj, kk], axis=-1).reshape(-1, 3)
    center = corner + 0.5
    sites = np.vstack([corner, center]) * lattice_constant
    r2 = np.einsum("ij,ij->i", sites, sites)
    keep = r2 <= (radius + lattice_constant) ** 2
    sites = sites[keep]
    r2 = r2[keep]
    order = np.lexsort((sites[:, 2], sites[:, 1], sites[:, 0], r2))
    if len(order) < n:
        raise ValidationError("internal: bcc bounding box too small")
    return sites[order[:n]].copy()


def apply_jitter(positions: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Add independent uniform offsets of up to ``fraction`` of the minimum
    pair spacing to every coordinate; deterministic for a fixed seed."""
    if fraction < 0:
        raise ValidationError("fraction must be non-negative")
    if fraction == 0.0 or len(positions) < 2:
        return positions.copy()
    d_min = kernels.min_pair_distance(np.ascontiguousarray(positions))
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-fraction * d_min, fraction * d_min,
                          size=positions.shape)
    return positions + offsets


def scaled_force(positions: np.ndarray, trap: TrapMatrices) -> np.ndarray:
    """Pseudo-potential + Coulomb force per ion, scaled units."""
    pos = np.ascontiguousarray(positions, dtype=np.float64)
    forces, _, min_r2 = kernels.force_energy(pos, trap.pseudo)
    if pos.shape[0] > 1 and min_r2 < kernels.COINCIDENCE_R2:
        raise CoincidentIonsError("coincident ions in force evaluation")
    return forces


def total_energy(positions: np.ndarray, trap: TrapMatrices) -> float:
    """Total scaled potential energy (trap + Coulomb)."""
    pos = np.ascontiguousarray(positions, dtype=np.float64)
    _, energies, _ = kernels.force_energy(pos, trap.pseudo)
    return float(energies.sum())


_STALL_CHUNK = 2000  # steps between damping-schedule decisions
_STALL_RATIO = 0.5  # residual must drop below this per chunk to keep gamma
_GAMMA_MIN = 0.02


def anneal(initial_positions: np.ndarray, trap: TrapConfig,
           params: SolverParams = SolverParams(),
           seed_family: str = "external", rng_seed: int = 0) -> IonCrystal:
    """Relax a configuration to force balance by damped velocity-Verlet
    integration of the pseudo-potential dynamics.

    The damping coefficient starts at params.damping_coefficient and is
    stepped down geometrically whenever a chunk of steps fails to shrink the
    residual: the softest collective modes (inter-shell rotations) are far
    below the trap frequency and are overdamped at the starting value.

    Raises ConvergenceError (carrying the best state seen) if the force
    tolerance is not met within max_steps.
    """
    pos = np.ascontiguousarray(initial_positions, dtype=np.float64)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ValidationError("positions must be (N, 3)")
    if pos.shape[0] > 1 and \
            kernels.min_pair_distance(pos) ** 2 < kernels.COINCIDENCE_R2:
        raise CoincidentIonsError("coincident ions in the initial state")
    pseudo = trap.matrices().pseudo
    gamma = params.damping_coefficient
    q = pos
    steps_total = 0
    best_res = np.inf
    best_pos = pos
    residual = np.inf
    prev_residual = np.inf
    traces = []
    while steps_total < params.max_steps:
        chunk = min(_STALL_CHUNK, params.max_steps - steps_total)
        q, steps, residual, chunk_best, chunk_best_res, trace = \
            kernels.anneal_loop(q, pseudo, params.time_step, gamma,
                                params.force_tolerance, chunk,
                                params.energy_stride)
        steps_total += steps
        traces.append(trace if not traces else trace[1:])
        if chunk_best_res < best_res:
            best_res = chunk_best_res
            best_pos = chunk_best
        if residual <= params.force_tolerance:
            break
        if residual > _STALL_RATIO * prev_residual:
            gamma = max(gamma / 4.0, _GAMMA_MIN)
        prev_residual = residual
    energy_trace = np.concatenate(traces) if traces else np.empty(0)
    if residual > params.force_tolerance:
        best = IonCrystal(best_pos, pos.shape[0], seed_family, rng_seed,
                          best_res, trap, energy_trace, steps_total)
        raise ConvergenceError(
            f"no convergence after {steps_total} steps "
            f"(best residual {best_res:.3e})", best=best)
    return IonCrystal(q, pos.shape[0], seed_family, rng_seed, residual,
                      trap, energy_trace, steps_total)


def solve_crystal(n: int, trap: TrapConfig, params: SolverParams = SolverParams(),
                  seed_family: str = "icosahedral", rng_seed: int = 1) -> IonCrystal:
    """Seed, jitter and anneal in one call."""
    if seed_family == "icosahedral":
        seed_pos = mackay_icosahedron_seed(n)
    elif seed_family == "bcc":
        seed_pos = bcc_seed(n)
    else:
        raise ValidationError(f"unknown seed family {seed_family!r}")
    jittered = apply_jitter(seed_pos, params.jitter_fraction, rng_seed)
    return anneal(jittered, trap, params, seed_family=seed_family,
                  rng_seed=rng_seed)


def crystal_moment(crystal: IonCrystal, rf_unit: np.ndarray = None) -> float:
    """Mean over ions of r^T M^2 r with M the unit RF curvature; for the
    linear trap this is the mean squared distance from the RF null axis."""
    if rf_unit is None:
        rf_unit = crystal.trap.matrices().rf_unit
    m2 = rf_unit @ rf_unit
    return float(np.einsum("ij,jk,ik->i", crystal.positions, m2,
                           crystal.positions).mean())


def crystal_radius(crystal: IonCrystal) -> float:
    """Largest ion distance from the trap centre (scaled)."""
    return float(np.linalg.norm(crystal.positions, axis=1).max())


def min_distance(crystal: IonCrystal) -> float:
    return kernels.min_pair_distance(crystal.positions)


# ---------------------------------------------------------------------------
# plain-text import/export
# ---------------------------------------------------------------------------

FORMAT_VERSION = "1"


def write_crystal(crystal: IonCrystal, path, extra_header: dict = None):
    """Plain-text table, one ion per row, bit-exact round-trip (17
    significant digits), header comments carrying the provenance.

    ``extra_header`` lines (e.g. the resolved solver settings) are embedded
    as additional comments and ignored on read.
    """
    t = crystal.trap
    lines = [
        f"# ionclock crystal format {FORMAT_VERSION}",
        f"# n_ions = {crystal.n_ions}",
        f"# seed_family = {crystal.seed_family}",
        f"# rng_seed = {crystal.rng_seed}",
        f"# residual = {crystal.residual:.17g}",
        f"# omega_z_rad_s = {t.omega_z:.17g}",
        f"# omega_rf_rad_s = {t.omega_rf:.17g}",
        f"# a = {t.a:.17g}",
        f"# delta = {t.delta:.17g}",
    ]
    for key, value in (extra_header or {}).items():
        lines.append(f"# {key} = {value}")
    lines += [
        "# columns: x y z (scaled units)",
    ]
    for row in crystal.positions:
        lines.append(f"{row[0]:.17g} {row[1]:.17g} {row[2]:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_crystal(path) -> IonCrystal:
    """Inverse of write_crystal."""
    if not os.path.exists(path):
        raise ValidationError(f"crystal file {path} does not exist")
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    key, _, value = line[1:].partition("=")
                    meta[key.strip()] = value.strip()
                continue
            rows.append([float(tok) for tok in line.split()])
    try:
        trap = TrapConfig(
            omega_z=float(meta["omega_z_rad_s"]),
            omega_rf=float(meta["omega_rf_rad_s"]),
            a=float(meta["a"]),
            delta=float(meta["delta"]),
        )
        crystal = IonCrystal(
            positions=np.array(rows, dtype=np.float64),
            n_ions=int(meta["n_ions"]),
            seed_family=meta["seed_family"],
            rng_seed=int(meta["rng_seed"]),
            residual=float(meta["residual"]),
            trap=trap,
        )
    except KeyError as exc:
        raise ValidationError(f"crystal file {path} is missing {exc}") from exc
    return crystal
