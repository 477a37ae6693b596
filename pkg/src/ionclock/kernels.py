"""Hot numeric kernels: O(N^2) pair sums and time-domain integration loops.

Every kernel exists twice: a numba ``@njit`` build (default) and a pure-numpy
build. The env flag ``IONCLOCK_DISABLE_NUMBA=1`` selects the numpy path, as
does numba simply being absent. Both paths implement identical arithmetic;
per-ion pair sums always run over j in index order, so results are
deterministic for a fixed platform and the two paths agree to ~1e-15
relative (they differ only in summation associativity).

``benchmarks/kernel_benchmark.py`` times the two paths against each other.
"""

import math
import os

import numpy as np

NUMBA_DISABLED = os.environ.get("IONCLOCK_DISABLE_NUMBA", "0") == "1"

try:
    import numba
    from numba import njit, prange

    # skip the TBB probe; old system TBBs only trigger a noisy warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

NUMBA_ENABLED = HAVE_NUMBA and not NUMBA_DISABLED

# guard against coincident ions: pair distances below this are singular
COINCIDENCE_R2 = 1e-18

# Composition coefficients for the 6th-order symmetric integrator
# (Yoshida-type, 7 leapfrog substeps). High order keeps the extracted
# oscillation amplitudes stable to <1e-8 under step halving at 400
# steps per drive cycle.
_W1 = -1.17767998417887
_W2 = 0.235573213359357
_W3 = 0.784513610477560
_W0 = 1.0 - 2.0 * (_W1 + _W2 + _W3)
YOSHIDA6 = np.array([_W3, _W2, _W1, _W0, _W1, _W2, _W3], dtype=np.float64)


def set_threads(n: int):
    """Limit kernel parallelism; no-op on the numpy path."""
    if NUMBA_ENABLED and n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

_BLOCK = 512  # chunk size bounding temporary (block, N, 3) arrays


def min_pair_distance_numpy(pos):
    """Smallest pairwise distance; inf for a single ion."""
    n = pos.shape[0]
    if n < 2:
        return np.inf
    best = np.inf
    for i0 in range(0, n, _BLOCK):
        d = pos[i0:i0 + _BLOCK, None, :] - pos[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        for row, i in enumerate(range(i0, min(i0 + _BLOCK, n))):
            r2[row, i] = np.inf
        best = min(best, float(np.sqrt(r2.min())))
    return best


def force_energy_numpy(pos, curvature):
    """Pseudo-potential force and per-ion energy in scaled units.

    force_i = -curvature @ r_i + sum_j r_ij / |r_ij|^3
    energy_i = r_i.curvature.r_i / 2 + sum_j (1/|r_ij|) / 2

    Returns (forces (N,3), energies (N,), min_r2).
    """
    n = pos.shape[0]
    forces = -pos @ curvature.T
    energies = 0.5 * np.einsum("ij,ij->i", pos, pos @ curvature.T)
    min_r2 = np.inf
    for i0 in range(0, n, _BLOCK):
        d = pos[i0:i0 + _BLOCK, None, :] - pos[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        for row, i in enumerate(range(i0, min(i0 + _BLOCK, n))):
            r2[row, i] = np.inf
        if n > 1:
            min_r2 = min(min_r2, float(r2.min()))
        inv_r = 1.0 / np.sqrt(r2)
        forces[i0:i0 + _BLOCK] += np.einsum("ijk,ij->ik", d, inv_r**3)
        energies[i0:i0 + _BLOCK] += 0.5 * inv_r.sum(axis=1)
    return forces, energies, min_r2


def anneal_loop_numpy(pos, curvature, dt, gamma, tol, max_steps,
                      energy_stride):
    """Damped velocity-Verlet descent to a force-balanced configuration.

    Runs until max per-ion force norm < tol or max_steps. Returns
    (pos, steps_used, residual, best_pos, best_residual, energy_trace).
    """
    q = pos.copy()
    v = np.zeros_like(q)
    f, e, _ = force_energy_numpy(q, curvature)
    residual = float(np.sqrt((f * f).sum(axis=1).max()))
    best_res = residual
    best_q = q.copy()
    trace = [float(e.sum())]
    denom = 1.0 + 0.5 * dt * gamma
    steps = 0
    while residual > tol and steps < max_steps:
        v = v + 0.5 * dt * (f - gamma * v)
        q = q + dt * v
        f, e, _ = force_energy_numpy(q, curvature)
        v = (v + 0.5 * dt * f) / denom
        steps += 1
        residual = float(np.sqrt((f * f).sum(axis=1).max()))
        if residual < best_res:
            best_res = residual
            best_q = q.copy()
        if steps % energy_stride == 0:
            trace.append(float(e.sum()))
    return q, steps, residual, best_q, best_res, np.array(trace)


def space_charge_vectors_numpy(pos, a):
    """Per-ion RF space-charge coupling sums.

    w_i = sum_j G_ij rf (r_i - r_j), with rf = diag(a, -a, 0) and
    G_ij = -(3 u u^T - |u|^2 I)/|u|^5 the pair field-gradient kernel.
    """
    n = pos.shape[0]
    rf = np.array([a, -a, 0.0])
    out = np.zeros_like(pos)
    for i0 in range(0, n, _BLOCK):
        d = pos[i0:i0 + _BLOCK, None, :] - pos[None, :, :]  # r_i - r_j
        r2 = np.einsum("ijk,ijk->ij", d, d)
        for row, i in enumerate(range(i0, min(i0 + _BLOCK, n))):
            r2[row, i] = np.inf
        inv5 = r2 ** -2.5
        inv3 = r2 ** -1.5
        s = d * rf[None, None, :]  # rf (r_i - r_j)
        du = np.einsum("ijk,ijk->ij", d, s)  # (r_i - r_j) . rf (r_i - r_j)
        out[i0:i0 + _BLOCK] = -(3.0 * np.einsum("ij,ijk->ik", du * inv5, d)
                                - np.einsum("ij,ijk->ik", inv3, s))
    return out


def quadrupole_tensors_numpy(pos):
    """Per-ion field-gradient tensors Q_i = sum_j G_ij (scaled, traceless)."""
    n = pos.shape[0]
    out = np.zeros((n, 3, 3))
    for i0 in range(0, n, _BLOCK):
        d = pos[i0:i0 + _BLOCK, None, :] - pos[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        for row, i in enumerate(range(i0, min(i0 + _BLOCK, n))):
            r2[row, i] = np.inf
        inv5 = r2 ** -2.5
        for row, i in enumerate(range(i0, min(i0 + _BLOCK, n))):
            r2[row, i] = 0.0  # inv5 is already 0 there; keep eye term finite
        outer = np.einsum("ijk,ijl->ijkl", d, d)
        eye = np.eye(3)[None, None, :, :] * r2[:, :, None, None]
        out[i0:i0 + _BLOCK] = -np.einsum(
            "ij,ijkl->ikl", inv5, 3.0 * outer - eye)
    return out


def _rf_accel_numpy(q, t, eps, sdiag, rfdiag, fext):
    """Acceleration of the full RF-driven equations of motion (scaled).

    q'' = -(eps^2 sdiag + 2 eps rfdiag cos 2t) q
          + eps^2 (sum_j r_ij/|r_ij|^3 + fext)
    """
    eps2 = eps * eps
    kdiag = eps2 * sdiag + (2.0 * eps * math.cos(2.0 * t)) * rfdiag
    acc = -q * kdiag[None, :] + eps2 * fext[None, :]
    n = q.shape[0]
    if n > 1:
        d = q[:, None, :] - q[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        np.fill_diagonal(r2, np.inf)
        acc += eps2 * np.einsum("ijk,ij->ik", d, r2 ** -1.5)
    return acc


def rf_damped_steps_numpy(q, v, t, n_steps, dt, gamma, eps, sdiag, rfdiag,
                          fext):
    """Velocity-Verlet with viscous damping for the transient stage."""
    q = q.copy()
    v = v.copy()
    denom = 1.0 + 0.5 * dt * gamma
    a = _rf_accel_numpy(q, t, eps, sdiag, rfdiag, fext)
    for _ in range(n_steps):
        v = v + 0.5 * dt * (a - gamma * v)
        q = q + dt * v
        t += dt
        a = _rf_accel_numpy(q, t, eps, sdiag, rfdiag, fext)
        v = (v + 0.5 * dt * a) / denom
    return q, v, t


def rf_period_map_numpy(q, v, t, steps, dt, eps, sdiag, rfdiag, fext):
    """Advance one drive period (steps*dt) with the 6th-order composition."""
    q = q.copy()
    v = v.copy()
    a = _rf_accel_numpy(q, t, eps, sdiag, rfdiag, fext)
    for _ in range(steps):
        for w in YOSHIDA6:
            h = w * dt
            v = v + 0.5 * h * a
            q = q + h * v
            t += h
            a = _rf_accel_numpy(q, t, eps, sdiag, rfdiag, fext)
            v = v + 0.5 * h * a
    return q, v, t


def rf_record_cycles_numpy(q, v, t, cycles, steps, dt, eps, sdiag, rfdiag,
                           fext):
    """Integrate ``cycles`` drive periods, sampling every step.

    Returns (qs, vs, accs) with shape (cycles*steps, N, 3); samples are taken
    at the start of each step, accelerations evaluated from the force law.
    """
    n = q.shape[0]
    total = cycles * steps
    qs = np.empty((total, n, 3))
    vs = np.empty((total, n, 3))
    accs = np.empty((total, n, 3))
    q = q.copy()
    v = v.copy()
    a = _rf_accel_numpy(q, t, eps, sdiag, rfdiag, fext)
    for k in range(total):
        qs[k] = q
        vs[k] = v
        accs[k] = a
        for w in YOSHIDA6:
            h = w * dt
            v = v + 0.5 * h * a
            q = q + h * v
            t += h
            a = _rf_accel_numpy(q, t, eps, sdiag, rfdiag, fext)
            v = v + 0.5 * h * a
    return qs, vs, accs


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _min_pair_distance_nb(pos):
        n = pos.shape[0]
        best = np.inf
        for i in range(n):
            for j in range(i + 1, n):
                dx = pos[i, 0] - pos[j, 0]
                dy = pos[i, 1] - pos[j, 1]
                dz = pos[i, 2] - pos[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                if r2 < best:
                    best = r2
        return math.sqrt(best)

    @njit(cache=True, parallel=True)
    def _force_energy_nb(pos, curvature, forces, energies):
        n = pos.shape[0]
        min_r2 = np.inf
        for i in prange(n):
            xi = pos[i, 0]
            yi = pos[i, 1]
            zi = pos[i, 2]
            tx = curvature[0, 0] * xi + curvature[0, 1] * yi + curvature[0, 2] * zi
            ty = curvature[1, 0] * xi + curvature[1, 1] * yi + curvature[1, 2] * zi
            tz = curvature[2, 0] * xi + curvature[2, 1] * yi + curvature[2, 2] * zi
            fx = -tx
            fy = -ty
            fz = -tz
            pot = 0.5 * (xi * tx + yi * ty + zi * tz)
            local_min = np.inf
            for j in range(n):
                if j == i:
                    continue
                dx = xi - pos[j, 0]
                dy = yi - pos[j, 1]
                dz = zi - pos[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                if r2 < local_min:
                    local_min = r2
                inv_r = 1.0 / math.sqrt(r2)
                inv3 = inv_r * inv_r * inv_r
                fx += dx * inv3
                fy += dy * inv3
                fz += dz * inv3
                pot += 0.5 * inv_r
            forces[i, 0] = fx
            forces[i, 1] = fy
            forces[i, 2] = fz
            energies[i] = pot
            min_r2 = min(min_r2, local_min)  # prange min-reduction
        return min_r2

    def force_energy_numba(pos, curvature):
        n = pos.shape[0]
        forces = np.empty((n, 3))
        energies = np.empty(n)
        min_r2 = _force_energy_nb(pos, curvature, forces, energies)
        return forces, energies, min_r2

    @njit(cache=True)
    def _anneal_loop_nb(pos, curvature, dt, gamma, tol, max_steps,
                        energy_stride):
        n = pos.shape[0]
        q = pos.copy()
        v = np.zeros((n, 3))
        f = np.empty((n, 3))
        e = np.empty(n)
        _force_energy_nb(q, curvature, f, e)
        res2 = 0.0
        for i in range(n):
            r2 = f[i, 0] ** 2 + f[i, 1] ** 2 + f[i, 2] ** 2
            if r2 > res2:
                res2 = r2
        residual = math.sqrt(res2)
        best_res = residual
        best_q = q.copy()
        n_trace = max_steps // energy_stride + 2
        trace = np.empty(n_trace)
        trace[0] = e.sum()
        n_rec = 1
        denom = 1.0 + 0.5 * dt * gamma
        steps = 0
        tol2 = tol * tol
        while res2 > tol2 and steps < max_steps:
            for i in range(n):
                for k in range(3):
                    v[i, k] = v[i, k] + 0.5 * dt * (f[i, k] - gamma * v[i, k])
                    q[i, k] = q[i, k] + dt * v[i, k]
            _force_energy_nb(q, curvature, f, e)
            res2 = 0.0
            for i in range(n):
                r2 = 0.0
                for k in range(3):
                    v[i, k] = (v[i, k] + 0.5 * dt * f[i, k]) / denom
                    r2 += f[i, k] * f[i, k]
                if r2 > res2:
                    res2 = r2
            steps += 1
            residual = math.sqrt(res2)
            if residual < best_res:
                best_res = residual
                best_q[:] = q
            if steps % energy_stride == 0:
                trace[n_rec] = e.sum()
                n_rec += 1
        return q, steps, residual, best_q, best_res, trace[:n_rec].copy()

    def anneal_loop_numba(pos, curvature, dt, gamma, tol, max_steps,
                          energy_stride):
        return _anneal_loop_nb(pos, curvature, float(dt), float(gamma),
                               float(tol), max_steps, energy_stride)

    @njit(cache=True, parallel=True)
    def _space_charge_nb(pos, a, out):
        n = pos.shape[0]
        for i in prange(n):
            wx = 0.0
            wy = 0.0
            wz = 0.0
            for j in range(n):
                if j == i:
                    continue
                dx = pos[i, 0] - pos[j, 0]
                dy = pos[i, 1] - pos[j, 1]
                dz = pos[i, 2] - pos[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                inv_r = 1.0 / math.sqrt(r2)
                inv5 = inv_r * inv_r * inv_r * inv_r * inv_r
                sx = a * dx
                sy = -a * dy
                du = dx * sx + dy * sy
                wx += -(3.0 * du * dx - r2 * sx) * inv5
                wy += -(3.0 * du * dy - r2 * sy) * inv5
                wz += -(3.0 * du * dz) * inv5
            out[i, 0] = wx
            out[i, 1] = wy
            out[i, 2] = wz

    def space_charge_vectors_numba(pos, a):
        out = np.empty_like(pos)
        _space_charge_nb(pos, float(a), out)
        return out

    @njit(cache=True, parallel=True)
    def _quad_tensors_nb(pos, out):
        n = pos.shape[0]
        for i in prange(n):
            for r in range(3):
                for s in range(3):
                    out[i, r, s] = 0.0
            for j in range(n):
                if j == i:
                    continue
                dx = pos[i, 0] - pos[j, 0]
                dy = pos[i, 1] - pos[j, 1]
                dz = pos[i, 2] - pos[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                inv_r = 1.0 / math.sqrt(r2)
                inv5 = inv_r * inv_r * inv_r * inv_r * inv_r
                out[i, 0, 0] += -(3.0 * dx * dx - r2) * inv5
                out[i, 1, 1] += -(3.0 * dy * dy - r2) * inv5
                out[i, 2, 2] += -(3.0 * dz * dz - r2) * inv5
                out[i, 0, 1] += -3.0 * dx * dy * inv5
                out[i, 0, 2] += -3.0 * dx * dz * inv5
                out[i, 1, 2] += -3.0 * dy * dz * inv5
            out[i, 1, 0] = out[i, 0, 1]
            out[i, 2, 0] = out[i, 0, 2]
            out[i, 2, 1] = out[i, 1, 2]

    def quadrupole_tensors_numba(pos):
        out = np.empty((pos.shape[0], 3, 3))
        _quad_tensors_nb(pos, out)
        return out

    @njit(cache=True)
    def _rf_accel_nb(q, t, eps, sdiag, rfdiag, fext, out):
        n = q.shape[0]
        eps2 = eps * eps
        c = 2.0 * eps * math.cos(2.0 * t)
        for k in range(3):
            kd = eps2 * sdiag[k] + c * rfdiag[k]
            for i in range(n):
                out[i, k] = -kd * q[i, k] + eps2 * fext[k]
        for i in range(n):
            for j in range(n):
                if j == i:
                    continue
                dx = q[i, 0] - q[j, 0]
                dy = q[i, 1] - q[j, 1]
                dz = q[i, 2] - q[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                inv_r = 1.0 / math.sqrt(r2)
                inv3 = inv_r * inv_r * inv_r
                out[i, 0] += eps2 * dx * inv3
                out[i, 1] += eps2 * dy * inv3
                out[i, 2] += eps2 * dz * inv3

    @njit(cache=True)
    def _rf_damped_steps_nb(q, v, t, n_steps, dt, gamma, eps, sdiag, rfdiag,
                            fext):
        n = q.shape[0]
        a = np.empty((n, 3))
        _rf_accel_nb(q, t, eps, sdiag, rfdiag, fext, a)
        denom = 1.0 + 0.5 * dt * gamma
        for _ in range(n_steps):
            for i in range(n):
                for k in range(3):
                    v[i, k] = v[i, k] + 0.5 * dt * (a[i, k] - gamma * v[i, k])
                    q[i, k] = q[i, k] + dt * v[i, k]
            t += dt
            _rf_accel_nb(q, t, eps, sdiag, rfdiag, fext, a)
            for i in range(n):
                for k in range(3):
                    v[i, k] = (v[i, k] + 0.5 * dt * a[i, k]) / denom
        return t

    def rf_damped_steps_numba(q, v, t, n_steps, dt, gamma, eps, sdiag,
                              rfdiag, fext):
        q = q.copy()
        v = v.copy()
        t = _rf_damped_steps_nb(q, v, float(t), n_steps, float(dt),
                                float(gamma), float(eps), sdiag, rfdiag, fext)
        return q, v, t

    @njit(cache=True)
    def _rf_yoshida_steps_nb(q, v, t, n_steps, dt, ws, eps, sdiag, rfdiag,
                             fext):
        n = q.shape[0]
        a = np.empty((n, 3))
        _rf_accel_nb(q, t, eps, sdiag, rfdiag, fext, a)
        for _ in range(n_steps):
            for m in range(ws.shape[0]):
                h = ws[m] * dt
                for i in range(n):
                    for k in range(3):
                        v[i, k] = v[i, k] + 0.5 * h * a[i, k]
                        q[i, k] = q[i, k] + h * v[i, k]
                t += h
                _rf_accel_nb(q, t, eps, sdiag, rfdiag, fext, a)
                for i in range(n):
                    for k in range(3):
                        v[i, k] = v[i, k] + 0.5 * h * a[i, k]
        return t

    def rf_period_map_numba(q, v, t, steps, dt, eps, sdiag, rfdiag, fext):
        q = q.copy()
        v = v.copy()
        t = _rf_yoshida_steps_nb(q, v, float(t), steps, float(dt), YOSHIDA6,
                                 float(eps), sdiag, rfdiag, fext)
        return q, v, t

    @njit(cache=True)
    def _rf_record_nb(q, v, t, cycles, steps, dt, ws, eps, sdiag, rfdiag,
                      fext, qs, vs, accs):
        n = q.shape[0]
        a = np.empty((n, 3))
        _rf_accel_nb(q, t, eps, sdiag, rfdiag, fext, a)
        total = cycles * steps
        for rec in range(total):
            for i in range(n):
                for k in range(3):
                    qs[rec, i, k] = q[i, k]
                    vs[rec, i, k] = v[i, k]
                    accs[rec, i, k] = a[i, k]
            for m in range(ws.shape[0]):
                h = ws[m] * dt
                for i in range(n):
                    for k in range(3):
                        v[i, k] = v[i, k] + 0.5 * h * a[i, k]
                        q[i, k] = q[i, k] + h * v[i, k]
                t += h
                _rf_accel_nb(q, t, eps, sdiag, rfdiag, fext, a)
                for i in range(n):
                    for k in range(3):
                        v[i, k] = v[i, k] + 0.5 * h * a[i, k]
        return t

    def rf_record_cycles_numba(q, v, t, cycles, steps, dt, eps, sdiag,
                               rfdiag, fext):
        n = q.shape[0]
        total = cycles * steps
        qs = np.empty((total, n, 3))
        vs = np.empty((total, n, 3))
        accs = np.empty((total, n, 3))
        _rf_record_nb(q.copy(), v.copy(), float(t), cycles, steps, float(dt),
                      YOSHIDA6, float(eps), sdiag, rfdiag, fext, qs, vs, accs)
        return qs, vs, accs


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:
    min_pair_distance = _min_pair_distance_nb
    force_energy = force_energy_numba
    anneal_loop = anneal_loop_numba
    space_charge_vectors = space_charge_vectors_numba
    quadrupole_tensors = quadrupole_tensors_numba
    rf_damped_steps = rf_damped_steps_numba
    rf_period_map = rf_period_map_numba
    rf_record_cycles = rf_record_cycles_numba
else:
    min_pair_distance = min_pair_distance_numpy
    force_energy = force_energy_numpy
    anneal_loop = anneal_loop_numpy
    space_charge_vectors = space_charge_vectors_numpy
    quadrupole_tensors = quadrupole_tensors_numpy
    rf_damped_steps = rf_damped_steps_numpy
    rf_period_map = rf_period_map_numpy
    rf_record_cycles = rf_record_cycles_numpy
