"""Equivalence of the numba-compiled kernels and the numpy fallback.

Outputs are compared to 1e-12, not bitwise: the two backends may use
different libm trig code, so results can differ by a few ulps.
"""

import os

import numpy as np
import pytest

from tripodsim import kernels
from tripodsim.profiles import Profile, Segment

needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA,
                                 reason="numba not installed")


@pytest.fixture(scope="module")
def backends():
    return kernels.load_kernels("numpy"), kernels.load_kernels("numba")


def test_backend_flag_selects_implementation():
    assert kernels.BACKEND in ("numba", "numpy")
    before = os.environ.get(kernels.ENV_VAR)
    mod = kernels.load_kernels("numpy")
    assert mod.BACKEND == "numpy"
    assert mod.USE_NUMBA is False
    # loading must not leak the forced flag into the environment
    assert os.environ.get(kernels.ENV_VAR) == before
    if kernels.HAS_NUMBA:
        assert kernels.load_kernels("numba").BACKEND == "numba"


@needs_numba
def test_nu_slice_agrees(backends):
    np_mod, nb_mod = backends
    rng = np.random.default_rng(61)
    for _ in range(10):
        theta = rng.normal(0.5, 0.3, 200)
        phi = rng.uniform(0.2, 1.2, 200)
        a = np_mod.nu_slice(theta, phi)
        b = nb_mod.nu_slice(theta, phi)
        assert a[0] == 0.0 and b[0] == 0.0
        assert np.max(np.abs(a - b)) <= 1e-13


@needs_numba
def test_atom_traj_agrees(backends):
    np_mod, nb_mod = backends
    rng = np.random.default_rng(62)
    tau = np.linspace(0.0, 8.0, 300)
    omega = np.empty((tau.size, 3), dtype=np.complex128)
    omega[:, 0] = np.sin(0.7 * tau) + 0.2
    omega[:, 1] = 0.8 * np.cos(0.4 * tau)
    omega[:, 2] = 0.5
    a_init = rng.normal(size=4) + 1j * rng.normal(size=4)
    a_init /= np.linalg.norm(a_init)
    a = np_mod.atom_traj(omega, a_init, tau[1] - tau[0])
    b = nb_mod.atom_traj(omega, a_init, tau[1] - tau[0])
    assert a.shape == b.shape == (tau.size, 4)
    assert np.max(np.abs(a - b)) <= 1e-12


def _ramp_arrays(n_w=201, dw=0.05):
    w = np.arange(n_w) * dw
    theta0 = Profile(0.3, (Segment("ramp", 2.0, 1.0, 0.4),))(w)
    phi0 = Profile(0.5, (Segment("bump", 6.0, 1.5, 0.3),))(w)
    return theta0, phi0


@needs_numba
def test_reduced_march_agrees(backends):
    np_mod, nb_mod = backends
    theta0, phi0 = _ramp_arrays()
    args = (theta0, phi0, 0.4, 0.05, 0.05, 40, 10, 1e-3)
    a = np_mod.reduced_march(*args)
    b = nb_mod.reduced_march(*args)
    for x, y in zip(a[:3], b[:3]):
        assert np.max(np.abs(x - y)) <= 1e-12
    assert np.array_equal(a[3], b[3])          # stored step indices
    assert a[4:] == b[4:] == (0, -1, -1)       # status, bad_step, bad_index


@needs_numba
def test_reduced_march_singular_path_agrees(backends):
    # entrance passes the node check, the dynamics then hit the floor;
    # both backends must stop at the identical step and w index
    np_mod, nb_mod = backends
    w = np.arange(201) * 0.05
    theta0 = np.full_like(w, 0.2)
    phi0 = Profile(0.3, (Segment("ramp", 5.0, 2.0, 1.30),))(w)
    assert np.min(np.abs(np.cos(phi0))) >= 1e-3
    args = (theta0, phi0, 0.5, 0.05, 0.05, 60, 20, 1e-3)
    a = np_mod.reduced_march(*args)
    b = nb_mod.reduced_march(*args)
    assert a[4] == b[4] == 1
    assert a[5] == b[5] and a[5] >= 0
    assert a[6] == b[6] and a[6] >= 0
    assert a[0].shape == b[0].shape
    assert np.max(np.abs(a[0] - b[0])) <= 1e-12


@needs_numba
def test_oracle_march_agrees(backends):
    np_mod, nb_mod = backends
    tau = np.linspace(0.0, 10.0, 201)
    theta = Profile(0.3, (Segment("ramp", 5.0, 4.0, 0.4),))(tau)
    omega0 = np.empty((tau.size, 3), dtype=np.complex128)
    omega0[:, 0] = np.sin(theta) * np.cos(0.5)
    omega0[:, 1] = np.cos(theta) * np.cos(0.5)
    omega0[:, 2] = np.sin(0.5)
    a_init = np.array([0.0, np.cos(theta[0]), -np.sin(theta[0]), 0.0],
                      dtype=np.complex128)
    args = (omega0, a_init, 1.0, 0.05, 12, tau[1] - tau[0], 5)
    a = np_mod.oracle_march(*args)
    b = nb_mod.oracle_march(*args)
    assert np.max(np.abs(a[0] - b[0])) <= 1e-12   # field history
    assert np.max(np.abs(a[1] - b[1])) <= 1e-12   # excited population
    assert np.array_equal(a[2], b[2])
    assert abs(a[3] - b[3]) <= 1e-12
    assert abs(a[4] - b[4]) <= 1e-12
