"""Angle-variable solver checks.

The closed-form pulse families and exactly solvable limits act as the
independent references; nothing here compares the solver to itself.
"""

import numpy as np
import pytest

from tripodsim.families import FamilyAngleProfile, FamilyParams
from tripodsim.profiles import BoundaryProfile, Grid, Profile, Segment
from tripodsim.reduced import (SingularityError, invert_nonlinear_time,
                               mixed_state_propagate, nonlinear_time,
                               propagate, quasilinear_rhs,
                               solvability_residual, update_nu)


def slow_boundary(c_amp=0.5, c_shift=0.3, amp=0.35):
    params = FamilyParams("slow", c_amp, c_shift)
    mu = Profile(base=0.5 * np.pi,
                 segments=(Segment("ramp", 2.0, 1.0, amp),))
    return BoundaryProfile(theta0=FamilyAngleProfile(params, mu, "theta"),
                           phi0=FamilyAngleProfile(params, mu, "phi"),
                           beta=float(mu(0.0)))


def fast_boundary(c_amp=0.5, c_shift=0.0, amp=0.4):
    params = FamilyParams("fast", c_amp, c_shift)
    mu = Profile(base=2.2, segments=(Segment("ramp", 3.0, 1.0, amp),))
    return BoundaryProfile(theta0=FamilyAngleProfile(params, mu, "theta"),
                           phi0=FamilyAngleProfile(params, mu, "phi"),
                           beta=float(mu(0.0)))


def test_nonlinear_time_constant_drive():
    tau = np.linspace(0.0, 10.0, 201)
    omega0 = np.full_like(tau, 2.0)
    w = nonlinear_time(tau, omega0, coupling=8.0)
    # w = Omega0^2 tau / G, exact for the trapezoid rule
    assert np.max(np.abs(w - 0.5 * tau)) <= 1e-14
    back = invert_nonlinear_time(w, tau, w)
    assert np.max(np.abs(back - tau)) <= 1e-12


def test_nonlinear_time_linear_intensity():
    # Omega0^2 = tau integrates to tau^2/2 exactly under the trapezoid
    tau = np.linspace(0.0, 4.0, 81)
    w = nonlinear_time(tau, np.sqrt(tau), coupling=1.0)
    assert np.max(np.abs(w - 0.5 * tau ** 2)) <= 1e-13
    with pytest.raises(ValueError):
        nonlinear_time(tau, np.ones(3), coupling=1.0)


def test_invert_nonlinear_time_midpoints():
    tau = np.linspace(0.0, 10.0, 11)
    w = nonlinear_time(tau, np.ones_like(tau), coupling=2.0)
    got = invert_nonlinear_time(np.array([0.25, 2.4]), tau, w)
    assert np.max(np.abs(got - np.array([0.5, 4.8]))) <= 1e-12


def test_update_nu_exact_cases():
    w = np.linspace(0.0, 6.0, 301)
    # constant theta accumulates nothing
    nu = update_nu(np.full_like(w, 0.7), 0.2 + 0.1 * np.sin(w))
    assert np.max(np.abs(nu)) == 0.0
    # vanishing phi accumulates nothing
    nu = update_nu(0.3 * w, np.zeros_like(w))
    assert np.max(np.abs(nu)) == 0.0
    # phi = pi/2: nu equals the accumulated theta change exactly
    theta = Profile(0.1, (Segment("ramp", 3.0, 2.0, 0.8),))(w)
    nu = update_nu(theta, np.full_like(w, 0.5 * np.pi))
    assert np.max(np.abs(nu - (theta - theta[0]))) <= 1e-14
    assert nu[0] == 0.0


def test_quasilinear_rhs_limits():
    w = np.linspace(0.0, 1.0, 11)
    theta_w = np.cos(w)
    phi_w = np.sin(w) + 0.2
    phi = 0.3 + 0.1 * w
    # mu = 0: theta frozen, phi advected at unit speed
    tz, pz = quasilinear_rhs(theta_w, phi_w, None, phi, np.zeros_like(w))
    assert np.max(np.abs(tz)) == 0.0
    assert np.max(np.abs(pz + phi_w)) <= 1e-15
    # mu = pi/2: theta advected, phi frozen
    tz, pz = quasilinear_rhs(theta_w, phi_w, None, phi,
                             np.full_like(w, 0.5 * np.pi))
    assert np.max(np.abs(tz + theta_w)) <= 1e-12
    assert np.max(np.abs(pz)) <= 1e-12


def test_quasilinear_rhs_singularity():
    with pytest.raises(SingularityError):
        quasilinear_rhs(np.ones(3), np.ones(3), None,
                        np.array([0.3, 0.5 * np.pi, 0.4]), np.ones(3))


def test_advection_speeds_are_zero_and_one():
    # probe the rhs with unit derivative vectors to assemble the
    # advection matrix; its eigenvalues are {0, 1} for any state
    rng = np.random.default_rng(21)
    one = np.ones(1)
    zero = np.zeros(1)
    for _ in range(100):
        phi = rng.uniform(-1.3, 1.3, 1)
        mu = rng.uniform(-np.pi, np.pi, 1)
        c1t, c1p = quasilinear_rhs(one, zero, None, phi, mu)
        c2t, c2p = quasilinear_rhs(zero, one, None, phi, mu)
        matrix = -np.array([[c1t[0], c2t[0]], [c1p[0], c2p[0]]])
        assert abs(np.trace(matrix) - 1.0) <= 1e-12
        assert abs(np.linalg.det(matrix)) <= 1e-12


def test_constant_boundary_is_stationary():
    boundary = BoundaryProfile(theta0=Profile(0.4), phi0=Profile(0.7),
                               beta=0.9)
    fld = propagate(boundary, Grid(0.1, 0.1, 5, 3))
    assert np.max(np.abs(fld.theta - 0.4)) == 0.0
    assert np.max(np.abs(fld.phi - 0.7)) == 0.0
    assert np.max(np.abs(fld.nu)) == 0.0


def test_nu_vanishes_on_the_leading_edge():
    boundary = BoundaryProfile(
        theta0=Profile(0.1, (Segment("bump", 3.0, 1.0, 0.5),)),
        phi0=Profile(0.4), beta=0.8)
    fld = propagate(boundary, Grid(0.1, 0.1, 10, 4))
    assert np.max(np.abs(fld.nu[:, 0])) == 0.0
    assert fld.zeta[0] == 0.0 and fld.zeta[-1] == 4.0


def test_slow_family_translates_at_unit_speed():
    boundary = slow_boundary()
    grid = Grid(dw=0.02, dzeta=0.02, w_max=8, zeta_max=4)
    fld = propagate(boundary, grid)
    th_ref, ph_ref = boundary.sample(fld.w - 4.0)
    assert np.max(np.abs(fld.theta[-1] - th_ref)) <= 1e-6
    assert np.max(np.abs(fld.phi[-1] - ph_ref)) <= 1e-6
    # the accumulated basis rotation reproduces the member's own mu
    mu_ref = boundary.theta0.mu_profile(fld.w - 4.0)
    assert np.max(np.abs(fld.mu()[-1] - mu_ref)) <= 1e-5


def test_fast_family_is_frozen():
    boundary = fast_boundary()
    grid = Grid(dw=0.02, dzeta=0.02, w_max=6, zeta_max=4, store_every=10)
    fld = propagate(boundary, grid)
    th0, ph0 = boundary.sample(fld.w)
    assert np.max(np.abs(fld.theta - th0)) <= 5e-3
    assert np.max(np.abs(fld.phi - ph0)) <= 5e-3


def test_disturbances_respect_the_characteristic_cone():
    # speeds are 0 and 1: nothing moves left, nothing outruns dw/dzeta
    boundary = BoundaryProfile(
        theta0=Profile(0.1, (Segment("bump", 2.5, 0.5, 0.4),)),
        phi0=Profile(0.4), beta=0.8)
    fld = propagate(boundary, Grid(0.1, 0.1, 20, 5))
    left = fld.w < 1.95
    right = fld.w > 8.05
    assert np.max(np.abs(fld.theta[:, left] - 0.1)) == 0.0
    assert np.max(np.abs(fld.phi[:, left] - 0.4)) == 0.0
    assert np.max(np.abs(fld.theta[:, right] - 0.1)) == 0.0
    assert np.max(np.abs(fld.phi[:, right] - 0.4)) == 0.0


def test_mixed_state_translates_exactly():
    boundary = BoundaryProfile(
        theta0=Profile(0.2, (Segment("bump", 4.0, 1.0, 0.5),)),
        phi0=Profile(0.5, (Segment("ramp", 6.0, 1.0, 0.3),)),
        beta=0.25 * np.pi)
    fld = mixed_state_propagate(boundary, Grid(0.25, 0.25, 10, 2))
    th_ref, ph_ref = boundary.sample(fld.w - 1.0)
    assert np.array_equal(fld.theta[-1], th_ref)
    assert np.array_equal(fld.phi[-1], ph_ref)
    assert fld.nu is None
    with pytest.raises(ValueError):
        fld.mu()


def test_singularity_is_located():
    # the entrance ramp crosses the degenerate plane between grid
    # nodes, so the failure only surfaces once the dynamics move a node
    # into the singular band
    boundary = BoundaryProfile(
        theta0=Profile(0.2),
        phi0=Profile(0.3, (Segment("ramp", 5.0, 2.0, 1.30),)), beta=0.5)
    with pytest.raises(SingularityError) as err:
        propagate(boundary, Grid(0.05, 0.05, 10, 3))
    assert 0.0 <= err.value.zeta <= 3.0
    assert 4.0 <= err.value.w <= 8.0


def test_cfl_violation_raises():
    boundary = BoundaryProfile(theta0=Profile(0.1), phi0=Profile(0.4))
    with pytest.raises(ValueError, match="CFL"):
        propagate(boundary, Grid(dw=0.1, dzeta=0.2, w_max=5, zeta_max=1))


def test_solvability_residual_small_on_family_run():
    fld = propagate(slow_boundary(), Grid(0.02, 0.02, 8, 4))
    res = solvability_residual(fld)
    assert res.shape == (fld.zeta.size - 2, fld.w.size - 2)
    assert np.max(np.abs(res)) <= 1e-7


def test_solvability_residual_needs_three_slices():
    fld = propagate(slow_boundary(), Grid(0.1, 0.1, 8, 2, store_every=20))
    assert fld.zeta.size == 2
    with pytest.raises(ValueError, match="3 stored"):
        solvability_residual(fld)
