"""First-principles integrator for the coupled atom-field system.

Independent of the angle-variable reduction: atoms evolve under the
time-dependent four-level Hamiltonian (RK4 per slice) and the three
field envelopes advance in depth with Heun steps driven by the atomic
coherences.  Works in the retarded frame, scaled units.  Used to
adjudicate the reduced solver and to quantify nonadiabaticity.

propagate_full       march entrance fields through the medium
conservation_check   norm and field-energy exchange diagnostics
compare_to_reduced   angle-level error report against a ReducedField
adiabaticity_report  boundary rate margins plus post-run leakage
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import angles_to_rabi, state_from_mixing
from .reduced import nonlinear_time

RATE_LIMIT = 0.2
# resolve the Rabi oscillation: dtau * Omega_max <= TAU_STEP_LIMIT
TAU_STEP_LIMIT = 0.05
# the resonant atomic response grows secularly in tau (no decay in the
# model), so the explicit depth stepper is stable only while
# dzeta * G * tau_max stays below roughly 40; beyond ~60 the Heun update
# amplifies round-trip error into runaway excited-state leakage
DEPTH_STEP_PRODUCT = 60.0


@dataclass(frozen=True)
class OracleGrid:
    """Retarded-time / depth grid for the full integrator.

    dtau must resolve the Rabi oscillation: dtau * Omega_max <=
    TAU_STEP_LIMIT keeps the per-step RK4 norm defect near machine
    level.  dzeta must respect the secular growth of the resonant
    response: keep dzeta * G * tau_max under about 40 (hard failures
    appear above ~60, independent of dtau).
    """

    dtau: float
    tau_max: float
    dzeta: float
    zeta_max: float
    store_every: int = 1

    def __post_init__(self):
        for name in ("dtau", "tau_max", "dzeta", "zeta_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")

    @property
    def n_tau(self):
        return int(round(self.tau_max / self.dtau)) + 1

    @property
    def n_zeta(self):
        return int(round(self.zeta_max / self.dzeta))

    def tau_axis(self):
        return np.arange(self.n_tau) * self.dtau

    def stored_steps(self):
        steps = list(range(0, self.n_zeta + 1, self.store_every))
        if steps[-1] != self.n_zeta:
            steps.append(self.n_zeta)
        return np.asarray(steps, dtype=np.int64)


@dataclass
class AtomTrajectory:
    """Single-atom evolution under prescribed fields."""

    tau: np.ndarray
    amps: np.ndarray
    norm_drift: float
    max_excited: float


def atom_evolve(omega, a_init, dtau):
    """Evolve one atom under sampled fields; RK4 with midpoint fields.

    omega : (n_tau, 3) complex Rabi samples, a_init : (4,) complex.
    The step must satisfy dtau * max|Omega| <= TAU_STEP_LIMIT; a larger
    step is a configuration error, not a silently degraded run.
    """
    omega = np.ascontiguousarray(omega, dtype=np.complex128)
    a_init = np.ascontiguousarray(a_init, dtype=np.complex128)
    if a_init.shape != (4,):
        raise ValueError("a_init must hold the four amplitudes "
                         "(a0, a1, a2, a3)")
    om_max = float(np.sqrt(np.max(np.sum(np.abs(omega) ** 2, axis=1))))
    if float(dtau) * om_max > TAU_STEP_LIMIT * (1.0 + 1e-9):
        raise ValueError(
            f"configuration error: dtau = {dtau:g} too large for fields "
            f"of magnitude {om_max:g}; need dtau * Omega_max <= "
            f"{TAU_STEP_LIMIT:g}")
    amps = kernels.atom_traj(omega, a_init, float(dtau))
    norms = np.sum(np.abs(amps) ** 2, axis=1)
    return AtomTrajectory(
        tau=np.arange(omega.shape[0]) * dtau,
        amps=amps,
        norm_drift=float(np.max(np.abs(norms - 1.0))),
        max_excited=float(np.max(np.abs(amps[:, 0]) ** 2)),
    )


def entrance_fields(boundary, tau, coupling):
    """Sample the boundary pulse set on a tau grid.

    Returns (omega (n_tau, 3) complex, w (n_tau,)): the total Rabi
    profile is a function of tau, the angle profiles are functions of
    the stretched time w accumulated from it.
    """
    tau = np.asarray(tau, dtype=float)
    om0 = np.asarray(boundary.omega0(tau), dtype=float)
    if om0.shape != tau.shape:
        om0 = np.full_like(tau, float(boundary.omega0(0.0)))
    w = nonlinear_time(tau, om0, coupling)
    theta, phi = boundary.sample(w)
    o1, o2, o3 = angles_to_rabi(om0, theta, phi)
    omega = np.stack([o1, o2, o3], axis=-1).astype(np.complex128)
    return omega, w


@dataclass
class FullField:
    """Stored history of a full atom-field propagation run.

    omega  : (S, n_tau, 3) complex field envelopes at stored depths
    a0sq   : (S, n_tau) excited-state population under those fields
    w      : stretched time of each tau node (entrance profile)
    """

    zeta: np.ndarray
    tau: np.ndarray
    w: np.ndarray
    omega: np.ndarray
    a0sq: np.ndarray
    coupling: float
    beta: float
    a_init: np.ndarray
    max_excited: float
    norm_drift: float

    def angles(self):
        """Reconstruct (theta, phi) from the stored envelopes.

        Valid for real entrance pulses: the stepper then keeps the
        envelopes exactly real, so signed angles follow from atan2 and
        stay continuous across zero crossings of individual fields.
        """
        o1 = self.omega[..., 0].real
        o2 = self.omega[..., 1].real
        o3 = self.omega[..., 2].real
        theta = np.arctan2(o1, o2)
        phi = np.arctan2(o3, np.hypot(o1, o2))
        return theta, phi

    def total_intensity(self):
        """Sum of |Omega_j|^2 on the stored grid."""
        return np.sum(np.abs(self.omega) ** 2, axis=-1)


def propagate_full(boundary, grid, coupling=1.0):
    """March the coupled atom-field system through the medium.

    Atoms at every depth start from the dark superposition set by
    boundary.beta before the pulses arrive; the fields then evolve them
    through the passage.  Returns a FullField with stored slices.

    Step sizes are preconditions, not tunables: dtau * Omega_max <=
    TAU_STEP_LIMIT (enforced here), and dzeta * coupling * tau_max
    should stay under about 40 to keep the explicit depth stepper from
    amplifying the secular resonant response (see OracleGrid).
    """
    tau = grid.tau_axis()
    omega0, w = entrance_fields(boundary, tau, coupling)
    om_max = float(np.sqrt(np.max(np.sum(np.abs(omega0) ** 2, axis=1))))
    if grid.dtau * om_max > TAU_STEP_LIMIT * (1.0 + 1e-9):
        raise ValueError(
            f"configuration error: dtau = {grid.dtau:g} too large for "
            f"entrance fields of magnitude {om_max:g}; need dtau * "
            f"Omega_max <= {TAU_STEP_LIMIT:g}")
    if grid.stored_steps().size * grid.n_tau * 3 > 2 ** 27:
        raise ValueError(
            "configuration error: stored field history would exceed "
            "2 GiB; increase store_every or shrink the grid")
    th0, ph0 = boundary.sample(np.zeros(1))
    ground = np.asarray(
        state_from_mixing(float(th0[0]), float(ph0[0]), boundary.beta),
        dtype=np.complex128)
    a_init = np.zeros(4, dtype=np.complex128)
    a_init[1:] = ground
    om_hist, a0sq_hist, stored, max_a0sq, norm_err = kernels.oracle_march(
        omega0, a_init, float(coupling), grid.dzeta, grid.n_zeta,
        grid.dtau, grid.store_every)
    return FullField(
        zeta=stored * grid.dzeta,
        tau=tau,
        w=w,
        omega=om_hist,
        a0sq=a0sq_hist,
        coupling=float(coupling),
        beta=float(boundary.beta),
        a_init=a_init,
        max_excited=float(max_a0sq),
        norm_drift=float(norm_err),
    )


def field_step(omega, a_init, coupling, dzeta, dtau):
    """Advance one depth step (Heun) from a single field slice."""
    omega = np.ascontiguousarray(omega, dtype=np.complex128)
    a_init = np.ascontiguousarray(a_init, dtype=np.complex128)
    if a_init.shape != (4,):
        raise ValueError("a_init must hold the four amplitudes "
                         "(a0, a1, a2, a3)")
    om_hist, _, _, _, _ = kernels.oracle_march(
        omega, a_init, float(coupling), float(dzeta), 1, float(dtau), 1)
    return om_hist[-1]


@dataclass
class ConservationReport:
    """Invariant diagnostics of a full run."""

    norm_drift: float
    exchange_max: float
    exchange: np.ndarray

    def __str__(self):
        return (f"norm drift {self.norm_drift:.3e}, "
                f"exchange residual {self.exchange_max:.3e}")


def conservation_check(run):
    """Check norm preservation and the field-atom exchange law.

    The envelope equations imply d/dzeta sum|Omega_j|^2 =
    -G d/dtau |a0|^2 pointwise.  The residual is formed with centered
    differences on the stored grid, so it shrinks with the step sizes
    of a well-resolved run.
    """
    total = run.total_intensity()
    lhs = np.gradient(total, run.zeta, axis=0)
    rhs = run.coupling * np.gradient(run.a0sq, run.tau, axis=1)
    exchange = lhs + rhs
    return ConservationReport(
        norm_drift=run.norm_drift,
        exchange_max=float(np.max(np.abs(exchange))),
        exchange=exchange,
    )


@dataclass
class CompareReport:
    """Angle-level deviation between a full run and a reduced run."""

    theta_max: float
    phi_max: float
    theta_rms: float
    phi_rms: float
    max_excited: float
    norm_drift: float
    n_slices: int

    @property
    def max_error(self):
        return max(self.theta_max, self.phi_max)

    def __str__(self):
        return (f"max |d theta| {self.theta_max:.3e}, "
                f"max |d phi| {self.phi_max:.3e} over "
                f"{self.n_slices} shared slices; "
                f"excited population <= {self.max_excited:.3e}")


def compare_to_reduced(run, fld, w_min=None, w_max=None):
    """Compare reconstructed oracle angles against a ReducedField.

    Slices are matched by depth; reduced angles are interpolated from
    the uniform w grid onto the oracle's stretched-time nodes.  The
    optional [w_min, w_max] window restricts the comparison.
    """
    th_full, ph_full = run.angles()
    th_err = 0.0
    ph_err = 0.0
    th_sq = 0.0
    ph_sq = 0.0
    count = 0
    n_slices = 0
    mask = np.ones(run.w.size, dtype=bool)
    if w_min is not None:
        mask &= run.w >= w_min
    if w_max is not None:
        mask &= run.w <= w_max
    w_nodes = run.w[mask]
    tol = 1e-9 * max(1.0, float(np.max(np.abs(fld.zeta))))
    for i, z in enumerate(run.zeta):
        j = int(np.argmin(np.abs(fld.zeta - z)))
        if abs(float(fld.zeta[j]) - float(z)) > tol:
            continue
        th_red = np.interp(w_nodes, fld.w, fld.theta[j])
        ph_red = np.interp(w_nodes, fld.w, fld.phi[j])
        dth = th_full[i][mask] - th_red
        dph = ph_full[i][mask] - ph_red
        th_err = max(th_err, float(np.max(np.abs(dth))))
        ph_err = max(ph_err, float(np.max(np.abs(dph))))
        th_sq += float(np.sum(dth * dth))
        ph_sq += float(np.sum(dph * dph))
        count += dth.size
        n_slices += 1
    if n_slices == 0:
        raise ValueError("runs share no stored depths to compare")
    return CompareReport(
        theta_max=th_err,
        phi_max=ph_err,
        theta_rms=float(np.sqrt(th_sq / count)),
        phi_rms=float(np.sqrt(ph_sq / count)),
        max_excited=run.max_excited,
        norm_drift=run.norm_drift,
        n_slices=n_slices,
    )


@dataclass
class AdiabaticityReport:
    """How safely a boundary profile sits inside the adiabatic regime.

    Rates are measured in stretched-time units, where the validity
    condition is rate << 1 (slow compared to the local Rabi cycling).
    The leakage fields are filled in when a completed run is supplied.
    """

    max_theta_rate: float
    max_phi_rate: float
    rate_limit: float
    max_excited: float | None = None
    norm_drift: float | None = None

    @property
    def max_rate(self):
        return max(self.max_theta_rate, self.max_phi_rate)

    @property
    def adiabatic(self):
        return self.max_rate <= self.rate_limit

    def __str__(self):
        verdict = "inside" if self.adiabatic else "OUTSIDE"
        s = (f"max angle rate {self.max_rate:.3e} "
             f"({verdict} the limit {self.rate_limit:g})")
        if self.max_excited is not None:
            s += f"; run leakage {self.max_excited:.3e}"
        return s


def adiabaticity_report(boundary, w, run=None, rate_limit=RATE_LIMIT):
    """Rate margins of a boundary profile, sampled on a w grid."""
    th_rate, ph_rate = boundary.max_rates(np.asarray(w, dtype=float))
    rep = AdiabaticityReport(
        max_theta_rate=float(th_rate),
        max_phi_rate=float(ph_rate),
        rate_limit=float(rate_limit),
    )
    if run is not None:
        rep.max_excited = run.max_excited
        rep.norm_drift = run.norm_drift
    return rep
