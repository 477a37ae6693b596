"""Cross-checks between the numba kernels and their pure-numpy twins.

Both paths must agree to summation-order rounding (~1e-13 relative). With
numba unavailable or disabled the numba side is skipped.
"""

import math

import numpy as np
import pytest

from ionclock import kernels

needs_numba = pytest.mark.skipif(
    not kernels.HAVE_NUMBA, reason="numba not importable")


@pytest.fixture(scope="module")
def cloud():
    rng = np.random.default_rng(11)
    return np.ascontiguousarray(rng.normal(size=(80, 3)) * 4.0)


@pytest.fixture(scope="module")
def curvature():
    return np.diag([1.0, 1.0, 1.0])


@needs_numba
def test_min_pair_distance_paths_agree(cloud):
    a = kernels.min_pair_distance_numpy(cloud)
    b = kernels._min_pair_distance_nb(cloud)
    assert a == pytest.approx(b, rel=1e-14)


@needs_numba
def test_force_energy_paths_agree(cloud, curvature):
    f_np, e_np, r_np = kernels.force_energy_numpy(cloud, curvature)
    f_nb, e_nb, r_nb = kernels.force_energy_numba(cloud, curvature)
    assert np.allclose(f_np, f_nb, rtol=1e-12, atol=1e-13)
    assert np.allclose(e_np, e_nb, rtol=1e-12)
    assert r_np == pytest.approx(r_nb, rel=1e-12)


@needs_numba
def test_space_charge_paths_agree(cloud):
    a = kernels.space_charge_vectors_numpy(cloud, math.sqrt(3.0))
    b = kernels.space_charge_vectors_numba(cloud, math.sqrt(3.0))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_numba
def test_quadrupole_paths_agree(cloud):
    a = kernels.quadrupole_tensors_numpy(cloud)
    b = kernels.quadrupole_tensors_numba(cloud)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_numba
def test_anneal_paths_agree(curvature):
    rng = np.random.default_rng(3)
    pos = np.ascontiguousarray(rng.normal(size=(12, 3)) * 2.0)
    out_np = kernels.anneal_loop_numpy(pos, curvature, 0.1, 1.0, 1e-8,
                                       20000, 100)
    out_nb = kernels.anneal_loop_numba(pos, curvature, 0.1, 1.0, 1e-8,
                                       20000, 100)
    assert out_np[1] == out_nb[1]  # same step count
    assert np.allclose(out_np[0], out_nb[0], rtol=1e-9, atol=1e-11)
    assert np.allclose(out_np[5], out_nb[5], rtol=1e-9)


@needs_numba
def test_rf_integrators_agree():
    rng = np.random.default_rng(8)
    q = np.ascontiguousarray(rng.normal(size=(3, 3)))
    v = np.ascontiguousarray(rng.normal(size=(3, 3)) * 0.01)
    sdiag = np.array([-0.5, -0.5, 1.0])
    rfdiag = np.array([math.sqrt(3), -math.sqrt(3), 0.0])
    fext = np.zeros(3)
    args = (0.05, np.array([0.3, 0.1, 0.0]))
    eps, f = args
    q1, v1, t1 = kernels.rf_damped_steps_numpy(q, v, 0.0, 500, math.pi / 300,
                                               0.1, eps, sdiag, rfdiag, f)
    q2, v2, t2 = kernels.rf_damped_steps_numba(q, v, 0.0, 500, math.pi / 300,
                                               0.1, eps, sdiag, rfdiag, f)
    assert np.allclose(q1, q2, rtol=1e-11, atol=1e-13)
    assert np.allclose(v1, v2, rtol=1e-11, atol=1e-13)

    q3, v3, _ = kernels.rf_period_map_numpy(q1, v1, t1, 300, math.pi / 300,
                                            eps, sdiag, rfdiag, f)
    q4, v4, _ = kernels.rf_period_map_numba(q1, v1, t1, 300, math.pi / 300,
                                            eps, sdiag, rfdiag, f)
    assert np.allclose(q3, q4, rtol=1e-11, atol=1e-13)

    r_np = kernels.rf_record_cycles_numpy(q1, v1, 0.0, 2, 300, math.pi / 300,
                                          eps, sdiag, rfdiag, f)
    r_nb = kernels.rf_record_cycles_numba(q1, v1, 0.0, 2, 300, math.pi / 300,
                                          eps, sdiag, rfdiag, f)
    for a, b in zip(r_np, r_nb):
        assert np.allclose(a, b, rtol=1e-11, atol=1e-13)


def test_dispatch_respects_env_flag():
    if kernels.NUMBA_ENABLED:
        assert kernels.force_energy is kernels.force_energy_numba
    else:
        assert kernels.force_energy is kernels.force_energy_numpy
