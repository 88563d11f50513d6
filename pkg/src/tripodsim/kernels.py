"""Hot numeric kernels.

Everything here is written in the numba-compilable numpy subset.  At
import time the functions are compiled with numba.njit unless the
environment variable TRIPODSIM_BACKEND is set to "numpy" (or numba is
not installed), in which case the same source runs as plain numpy.
Kernels return status codes instead of raising; wrappers in reduced.py
and oracle.py turn those into exceptions with located coordinates.

reduced_march   upwind characteristic marcher for the angle advection
                system (vectorized over the w axis per zeta step)
atom_traj       RK4 trajectory of one atom under sampled fields
oracle_march    Heun field stepper coupled to per-slice RK4 atoms
"""

from __future__ import annotations

import os

import numpy as np

ENV_VAR = "TRIPODSIM_BACKEND"

try:
    import numba
    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get(ENV_VAR, "numba").lower() != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def _jit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True, fastmath=False)(fn)
    return fn


def load_kernels(backend):
    """Load an independent instance of this module with a forced backend.

    Used by the backend-equivalence tests and the benchmark script so
    both paths can coexist in one process.
    """
    import importlib.util

    old = os.environ.get(ENV_VAR)
    os.environ[ENV_VAR] = backend
    try:
        spec = importlib.util.spec_from_file_location(
            f"tripodsim._kernels_{backend}", __file__)
        mod = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(mod)
    finally:
        if old is None:
            os.environ.pop(ENV_VAR, None)
        else:
            os.environ[ENV_VAR] = old
    return mod


@_jit
def nu_slice(theta, phi):
    """Basis rotation nu on one slice: nu = int sin(phi) d theta.

    Trapezoid in Stieltjes form, nu[0] = 0.
    """
    n = theta.shape[0]
    nu = np.empty(n)
    nu[0] = 0.0
    s = np.sin(phi)
    incr = 0.5 * (s[1:] + s[:-1]) * (theta[1:] - theta[:-1])
    nu[1:] = np.cumsum(incr)
    return nu


@_jit
def reduced_march(theta0, phi0, beta, dw, dzeta, n_steps, store_stride,
                  cos_floor):
    """March the quasilinear angle system in zeta.

    Backward (upwind) w-differences, both characteristic speeds are in
    {0, 1}.  Each step takes a half Euler predictor, re-evaluates nu and
    the advection coefficients there, then applies those midpoint
    coefficients to the differences of the current slice; at CFL = 1
    (dzeta = dw) plain translation is reproduced exactly.

    Returns (theta_hist, phi_hist, nu_hist, stored_steps, status,
    bad_step, bad_index); status 1 flags |cos phi| under cos_floor.
    """
    n_w = theta0.shape[0]
    n_keep = n_steps // store_stride + 1
    if n_steps % store_stride != 0:
        n_keep += 1
    th_hist = np.zeros((n_keep, n_w))
    ph_hist = np.zeros((n_keep, n_w))
    nu_hist = np.zeros((n_keep, n_w))
    stored = np.zeros(n_keep, dtype=np.int64)

    th = theta0.copy()
    ph = phi0.copy()
    nu = nu_slice(th, ph)
    th_hist[0] = th
    ph_hist[0] = ph
    nu_hist[0] = nu
    stored[0] = 0
    k = 1

    status = 0
    bad_step = -1
    bad_index = -1
    dth = np.zeros(n_w)
    dph = np.zeros(n_w)

    for n in range(1, n_steps + 1):
        dth[1:] = (th[1:] - th[:-1]) / dw
        dph[1:] = (ph[1:] - ph[:-1]) / dw

        cosph = np.cos(ph)
        j = np.argmin(np.abs(cosph))
        if np.abs(cosph[j]) < cos_floor:
            status = 1
            bad_step = n - 1
            bad_index = j
            break

        # predictor: half step for the coefficient state
        mu = beta - nu
        s = np.sin(mu)
        c = np.cos(mu)
        tz = (s * c / cosph) * dph - s * s * dth
        pz = -c * c * dph + s * c * cosph * dth
        th_h = th + 0.5 * dzeta * tz
        ph_h = ph + 0.5 * dzeta * pz
        th_h[0] = theta0[0]
        ph_h[0] = phi0[0]

        cosph_h = np.cos(ph_h)
        j = np.argmin(np.abs(cosph_h))
        if np.abs(cosph_h[j]) < cos_floor:
            status = 1
            bad_step = n - 1
            bad_index = j
            break

        # corrector: midpoint coefficients on current-slice differences
        nu_h = nu_slice(th_h, ph_h)
        mu_h = beta - nu_h
        s = np.sin(mu_h)
        c = np.cos(mu_h)
        tz = (s * c / cosph_h) * dph - s * s * dth
        pz = -c * c * dph + s * c * cosph_h * dth
        th = th + dzeta * tz
        ph = ph + dzeta * pz
        th[0] = theta0[0]
        ph[0] = phi0[0]
        nu = nu_slice(th, ph)

        if n % store_stride == 0 or n == n_steps:
            th_hist[k] = th
            ph_hist[k] = ph
            nu_hist[k] = nu
            stored[k] = n
            k += 1

    return th_hist[:k], ph_hist[:k], nu_hist[:k], stored[:k], status, \
        bad_step, bad_index


@_jit
def atom_traj(omega, a_init, dtau):
    """RK4 trajectory of one atom driven by sampled fields.

    omega   : (n_tau, 3) complex field samples on the tau grid
    a_init  : (a0, a1, a2, a3) complex at tau = 0
    Midpoint field values are linear interpolants of the samples.
    Returns the (n_tau, 4) complex trajectory.
    """
    n = omega.shape[0]
    traj = np.zeros((n, 4), dtype=np.complex128)
    a0 = a_init[0]
    a1 = a_init[1]
    a2 = a_init[2]
    a3 = a_init[3]
    traj[0, 0] = a0
    traj[0, 1] = a1
    traj[0, 2] = a2
    traj[0, 3] = a3
    half = 0.5 * dtau
    sixth = dtau / 6.0
    for i in range(n - 1):
        oa1 = omega[i, 0]
        oa2 = omega[i, 1]
        oa3 = omega[i, 2]
        ob1 = omega[i + 1, 0]
        ob2 = omega[i + 1, 1]
        ob3 = omega[i + 1, 2]
        om1 = 0.5 * (oa1 + ob1)
        om2 = 0.5 * (oa2 + ob2)
        om3 = 0.5 * (oa3 + ob3)

        # i da/dtau = -(H/(-hbar)) a  =>  da/dtau = i (sum om_j a_j, conj(om_j) a0)
        k10 = 1j * (oa1 * a1 + oa2 * a2 + oa3 * a3)
        k11 = 1j * oa1.conjugate() * a0
        k12 = 1j * oa2.conjugate() * a0
        k13 = 1j * oa3.conjugate() * a0

        b0 = a0 + half * k10
        b1 = a1 + half * k11
        b2 = a2 + half * k12
        b3 = a3 + half * k13
        k20 = 1j * (om1 * b1 + om2 * b2 + om3 * b3)
        k21 = 1j * om1.conjugate() * b0
        k22 = 1j * om2.conjugate() * b0
        k23 = 1j * om3.conjugate() * b0

        b0 = a0 + half * k20
        b1 = a1 + half * k21
        b2 = a2 + half * k22
        b3 = a3 + half * k23
        k30 = 1j * (om1 * b1 + om2 * b2 + om3 * b3)
        k31 = 1j * om1.conjugate() * b0
        k32 = 1j * om2.conjugate() * b0
        k33 = 1j * om3.conjugate() * b0

        b0 = a0 + dtau * k30
        b1 = a1 + dtau * k31
        b2 = a2 + dtau * k32
        b3 = a3 + dtau * k33
        k40 = 1j * (ob1 * b1 + ob2 * b2 + ob3 * b3)
        k41 = 1j * ob1.conjugate() * b0
        k42 = 1j * ob2.conjugate() * b0
        k43 = 1j * ob3.conjugate() * b0

        a0 = a0 + sixth * (k10 + 2.0 * (k20 + k30) + k40)
        a1 = a1 + sixth * (k11 + 2.0 * (k21 + k31) + k41)
        a2 = a2 + sixth * (k12 + 2.0 * (k22 + k32) + k42)
        a3 = a3 + sixth * (k13 + 2.0 * (k23 + k33) + k43)
        traj[i + 1, 0] = a0
        traj[i + 1, 1] = a1
        traj[i + 1, 2] = a2
        traj[i + 1, 3] = a3
    return traj


@_jit
def _slice_sources(omega, a_init, dtau, coupling, src, a0sq):
    """Evolve atoms through one slice and fill the Maxwell sources.

    src[i, j] = i G a0 conj(a_j) on the tau grid; a0sq[i] = |a0|^2.
    Returns (max |a0|^2, max |norm - 1|) along the trajectory.
    """
    n = omega.shape[0]
    a0 = a_init[0]
    a1 = a_init[1]
    a2 = a_init[2]
    a3 = a_init[3]
    half = 0.5 * dtau
    sixth = dtau / 6.0
    ig = 1j * coupling
    max_a0sq = a0.real**2 + a0.imag**2
    max_norm_err = 0.0
    src[0, 0] = ig * a0 * a1.conjugate()
    src[0, 1] = ig * a0 * a2.conjugate()
    src[0, 2] = ig * a0 * a3.conjugate()
    a0sq[0] = a0.real**2 + a0.imag**2
    for i in range(n - 1):
        oa1 = omega[i, 0]
        oa2 = omega[i, 1]
        oa3 = omega[i, 2]
        ob1 = omega[i + 1, 0]
        ob2 = omega[i + 1, 1]
        ob3 = omega[i + 1, 2]
        om1 = 0.5 * (oa1 + ob1)
        om2 = 0.5 * (oa2 + ob2)
        om3 = 0.5 * (oa3 + ob3)

        k10 = 1j * (oa1 * a1 + oa2 * a2 + oa3 * a3)
        k11 = 1j * oa1.conjugate() * a0
        k12 = 1j * oa2.conjugate() * a0
        k13 = 1j * oa3.conjugate() * a0

        b0 = a0 + half * k10
        b1 = a1 + half * k11
        b2 = a2 + half * k12
        b3 = a3 + half * k13
        k20 = 1j * (om1 * b1 + om2 * b2 + om3 * b3)
        k21 = 1j * om1.conjugate() * b0
        k22 = 1j * om2.conjugate() * b0
        k23 = 1j * om3.conjugate() * b0

        b0 = a0 + half * k20
        b1 = a1 + half * k21
        b2 = a2 + half * k22
        b3 = a3 + half * k23
        k30 = 1j * (om1 * b1 + om2 * b2 + om3 * b3)
        k31 = 1j * om1.conjugate() * b0
        k32 = 1j * om2.conjugate() * b0
        k33 = 1j * om3.conjugate() * b0

        b0 = a0 + dtau * k30
        b1 = a1 + dtau * k31
        b2 = a2 + dtau * k32
        b3 = a3 + dtau * k33
        k40 = 1j * (ob1 * b1 + ob2 * b2 + ob3 * b3)
        k41 = 1j * ob1.conjugate() * b0
        k42 = 1j * ob2.conjugate() * b0
        k43 = 1j * ob3.conjugate() * b0

        a0 = a0 + sixth * (k10 + 2.0 * (k20 + k30) + k40)
        a1 = a1 + sixth * (k11 + 2.0 * (k21 + k31) + k41)
        a2 = a2 + sixth * (k12 + 2.0 * (k22 + k32) + k42)
        a3 = a3 + sixth * (k13 + 2.0 * (k23 + k33) + k43)

        src[i + 1, 0] = ig * a0 * a1.conjugate()
        src[i + 1, 1] = ig * a0 * a2.conjugate()
        src[i + 1, 2] = ig * a0 * a3.conjugate()
        p0 = a0.real**2 + a0.imag**2
        a0sq[i + 1] = p0
        if p0 > max_a0sq:
            max_a0sq = p0
        norm = p0 + a1.real**2 + a1.imag**2 + a2.real**2 + a2.imag**2 \
            + a3.real**2 + a3.imag**2
        err = abs(norm - 1.0)
        if err > max_norm_err:
            max_norm_err = err
    return max_a0sq, max_norm_err


@_jit
def oracle_march(omega0, a_init, coupling, dzeta, n_steps, dtau,
                 store_stride):
    """Couple the field envelope equations to per-slice atom evolution.

    omega0 : (n_tau, 3) complex entrance fields
    Heun (predictor-corrector) in zeta; every slice's atoms restart from
    a_init at tau = 0.  Returns (omega_hist, a0sq_hist, stored_steps,
    max_a0sq, max_norm_err).
    """
    n_tau = omega0.shape[0]
    n_keep = n_steps // store_stride + 1
    if n_steps % store_stride != 0:
        n_keep += 1
    om_hist = np.zeros((n_keep, n_tau, 3), dtype=np.complex128)
    a0sq_hist = np.zeros((n_keep, n_tau))
    stored = np.zeros(n_keep, dtype=np.int64)

    om = omega0.copy()
    s1 = np.zeros((n_tau, 3), dtype=np.complex128)
    s2 = np.zeros((n_tau, 3), dtype=np.complex128)
    a0sq = np.zeros(n_tau)
    a0sq_p = np.zeros(n_tau)
    max_a0sq = 0.0
    max_norm_err = 0.0
    k = 0

    for n in range(n_steps):
        pa, ne = _slice_sources(om, a_init, dtau, coupling, s1, a0sq)
        if pa > max_a0sq:
            max_a0sq = pa
        if ne > max_norm_err:
            max_norm_err = ne
        if n % store_stride == 0:
            om_hist[k] = om
            a0sq_hist[k] = a0sq
            stored[k] = n
            k += 1
        om_p = om + dzeta * s1
        pa, ne = _slice_sources(om_p, a_init, dtau, coupling, s2, a0sq_p)
        if ne > max_norm_err:
            max_norm_err = ne
        om = om + 0.5 * dzeta * (s1 + s2)

    pa, ne = _slice_sources(om, a_init, dtau, coupling, s1, a0sq)
    if pa > max_a0sq:
        max_a0sq = pa
    if ne > max_norm_err:
        max_norm_err = ne
    om_hist[k] = om
    a0sq_hist[k] = a0sq
    stored[k] = n_steps
    k += 1

    return om_hist[:k], a0sq_hist[:k], stored[:k], max_a0sq, max_norm_err
