"""Angle-variable solver for adiabatic pulse propagation.

After the adiabatic reduction the three field envelopes are carried by
two angles theta(zeta, w) and phi(zeta, w) on the nonlinear time axis
w = (1/G) int Omega0^2 dtau'.  They obey a quasilinear hyperbolic
system whose coefficient matrix is a rank-one projector built from the
superposition angle mu = beta - nu, so every disturbance locally splits
into a frozen part and a part advected at unit speed.

propagate                march a BoundaryProfile through the medium
mixed_state_propagate    closed-form marcher for the equal-weight case
solvability_residual     cross-derivative consistency check on a field
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .profiles import BoundaryProfile, Grid

COS_PHI_FLOOR = 1e-3


class SingularityError(RuntimeError):
    """Raised when |cos phi| collapses and the angle system degenerates."""

    def __init__(self, zeta, w):
        self.zeta = zeta
        self.w = w
        super().__init__(
            f"|cos phi| fell below {COS_PHI_FLOOR:g} at "
            f"zeta={zeta:.6g}, w={w:.6g}; the angle parameterization "
            "breaks down there")


def nonlinear_time(tau, omega0, coupling):
    """Map lab-frame retarded time to the stretched coordinate w.

    tau     : increasing sample times
    omega0  : total Rabi frequency samples Omega0(tau) (same shape)
    w(tau) = (1/G) int_0^tau Omega0^2 dtau', trapezoid rule.
    """
    tau = np.asarray(tau, dtype=float)
    omega0 = np.asarray(omega0, dtype=float)
    if tau.shape != omega0.shape:
        raise ValueError("tau and omega0 must have matching shapes")
    w = np.empty_like(tau)
    w[0] = 0.0
    sq = omega0 * omega0
    np.cumsum(0.5 * (sq[1:] + sq[:-1]) * np.diff(tau), out=w[1:])
    return w / coupling


def invert_nonlinear_time(w_target, tau, w):
    """Return tau values at given w by monotone linear interpolation."""
    w_target = np.asarray(w_target, dtype=float)
    return np.interp(w_target, w, tau)


def update_nu(theta, phi):
    """Accumulate the dark-basis rotation nu = int sin(phi) d theta.

    Trapezoid in theta along the w axis of one slice; nu[0] = 0 at the
    quiescent front edge.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return kernels.nu_slice(theta, phi)


def quasilinear_rhs(theta_w, phi_w, theta, phi, mu):
    """Right-hand side of the angle advection system.

    d theta / d zeta = (sin mu cos mu / cos phi) phi_w - sin^2 mu theta_w
    d phi   / d zeta = -cos^2 mu phi_w + sin mu cos mu cos phi theta_w

    theta enters only through its w derivative; it is accepted to keep
    the signature uniform for residual checks.
    """
    theta_w = np.asarray(theta_w, dtype=float)
    phi_w = np.asarray(phi_w, dtype=float)
    phi = np.asarray(phi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    cosph = np.cos(phi)
    if np.min(np.abs(cosph)) < COS_PHI_FLOOR:
        raise SingularityError(np.nan, np.nan)
    s = np.sin(mu)
    c = np.cos(mu)
    theta_zeta = (s * c / cosph) * phi_w - s * s * theta_w
    phi_zeta = -c * c * phi_w + s * c * cosph * theta_w
    return theta_zeta, phi_zeta


@dataclass
class ReducedField:
    """Stored history of an angle-variable propagation run.

    zeta   : (S,) stored depths
    w      : (n_w,) stretched-time axis
    theta, phi : (S, n_w) angle fields
    nu     : (S, n_w) accumulated basis rotation, or None when the run
             never needed it (equal-weight superposition runs)
    beta   : entrance superposition angle
    """

    zeta: np.ndarray
    w: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    nu: np.ndarray | None
    beta: float
    grid: Grid = field(repr=False, default=None)

    def mu(self):
        """Superposition angle mu = beta - nu on the stored slices."""
        if self.nu is None:
            raise ValueError("nu was not tracked for this run")
        return self.beta - self.nu

    def slice_at(self, zeta):
        """Index of the stored slice closest to a requested depth."""
        return int(np.argmin(np.abs(self.zeta - zeta)))


def propagate(boundary, grid):
    """March entrance angle profiles through the medium.

    boundary : BoundaryProfile giving theta, phi at zeta = 0 and beta
    grid     : Grid; requires dzeta <= dw (unit characteristic speed)
    Returns a ReducedField; raises SingularityError if |cos phi| falls
    below COS_PHI_FLOOR anywhere.
    """
    grid.check_cfl()
    w = grid.w_axis()
    theta0, phi0 = boundary.sample(w)
    th, ph, nu, stored, status, bad_step, bad_index = kernels.reduced_march(
        theta0, phi0, float(boundary.beta), grid.dw, grid.dzeta,
        grid.n_zeta, grid.store_every, COS_PHI_FLOOR)
    if status == 1:
        raise SingularityError(bad_step * grid.dzeta, bad_index * grid.dw)
    return ReducedField(zeta=stored * grid.dzeta, w=w, theta=th, phi=ph,
                        nu=nu, beta=float(boundary.beta), grid=grid)


def mixed_state_propagate(boundary, grid):
    """Propagate the equal-weight superposition exactly.

    When the entrance state weights the two uncoupled superpositions
    equally, both angles ride a single characteristic at half speed:
    theta(zeta, w) = theta0(w - zeta/2), same for phi.  Evaluated from
    the boundary callables directly, so the result carries no stepping
    error.  nu is not defined for this family and is returned as None.
    """
    grid.check_cfl()
    w = grid.w_axis()
    steps = grid.stored_steps()
    zeta = steps * grid.dzeta
    theta = np.empty((len(steps), w.size))
    phi = np.empty((len(steps), w.size))
    for i, z in enumerate(zeta):
        theta[i], phi[i] = boundary.sample(w - 0.5 * z)
    return ReducedField(zeta=zeta, w=w, theta=theta, phi=phi, nu=None,
                        beta=float(boundary.beta), grid=grid)


def solvability_residual(fld):
    """Cross-derivative consistency of a propagated field.

    In the characteristic coordinates u1 = zeta - w (frozen direction)
    and u2 = w (advected direction) the angle system turns into a pair
    of equations that are linear homogeneous in (cos mu, sin mu), so
    every solution must kill their determinant:

        theta_u1 theta_u2 + (1 / cos^2 phi) phi_u1 phi_u2 = 0.

    Directional derivatives are formed from centered differences on the
    stored grid (d/du1 = d/dzeta at fixed w, d/du2 = d/dzeta + d/dw);
    the cancellation along a characteristic is exact when the stored
    zeta spacing equals dw, otherwise second-order accurate.  Returns
    the (S-2, n_w-2) residual array on interior points.
    """
    th = np.asarray(fld.theta, dtype=float)
    ph = np.asarray(fld.phi, dtype=float)
    if th.shape[0] < 3 or th.shape[1] < 3:
        raise ValueError(
            "need at least 3 stored depth slices and 3 w nodes for the "
            "centered-difference diagnostic")
    th_z = np.gradient(th, fld.zeta, axis=0)[1:-1, 1:-1]
    ph_z = np.gradient(ph, fld.zeta, axis=0)[1:-1, 1:-1]
    th_w = np.gradient(th, fld.w, axis=1)[1:-1, 1:-1]
    ph_w = np.gradient(ph, fld.w, axis=1)[1:-1, 1:-1]
    cos2 = np.cos(ph[1:-1, 1:-1]) ** 2
    return th_z * (th_z + th_w) + ph_z * (ph_z + ph_w) / cos2
