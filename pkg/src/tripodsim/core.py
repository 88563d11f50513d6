"""Dark-basis algebra and unit conversions for the tripod level scheme.

Four levels: one excited state |0> coupled by three resonant field
components to lower states |1>, |2>, |3>.  The three complex Rabi
frequencies are parameterized by a generalized Rabi frequency Omega and
two real angles (theta, phi):

    Omega_1 = sin(theta) cos(phi) e^{i chi_1} Omega
    Omega_2 = cos(theta) cos(phi) e^{i chi_2} Omega
    Omega_3 = sin(phi)            e^{i chi_3} Omega

The interaction Hamiltonian has a two-dimensional null space spanned by
the dark states

    Phi1 = ( cos(theta) e^{-i chi_1}, -sin(theta) e^{-i chi_2}, 0 )
    Phi2 = ( sin(theta) sin(phi) e^{-i chi_1},
             cos(theta) sin(phi) e^{-i chi_2},
            -cos(phi)            e^{-i chi_3} )

An adiabatically following atom stays inside this null space.  The
superposition is tracked by a single mixing angle mu,

    a_j = sin(mu) <j|Phi1> + cos(mu) <j|Phi2>,

where mu = beta - nu: beta is set by the state preparation before the
pulses arrive and nu is the accumulated non-Abelian rotation of the dark
basis, d nu = sin(phi) d theta.  (The transport equation for the dark
amplitudes gives d mu = -sin(phi) d theta, hence the minus sign.)

All dimensional helpers use CGS units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# CGS constants
HBAR = 1.0546e-27      # erg s
C_LIGHT = 2.9979e10    # cm / s

DEGENERACY_FLOOR = 1e-12   # |cos phi| below this: theta undefined


class DegenerateAnglesError(ValueError):
    """Raised when a field triple has no well defined theta (cos phi ~ 0)."""


@dataclass(frozen=True)
class MediumParams:
    """Atomic medium constants, CGS.

    dipole   : transition dipole moment d, esu cm
    wavenumber : resonant wavenumber k, 1/cm
    density  : atomic number density n, 1/cm^3
    """

    dipole: float
    wavenumber: float
    density: float

    def __post_init__(self):
        if self.dipole < 0 or self.wavenumber <= 0 or self.density < 0:
            raise ValueError("medium parameters must be non-negative (k > 0)")


def coupling_constant(m: MediumParams) -> float:
    """Propagation coupling G = 2 pi k n d^2 / hbar, in 1/(s cm).

    G sets the slow group velocity through v_g ~ Omega^2 / G.
    """
    return 2.0 * np.pi * m.wavenumber * m.density * m.dipole**2 / HBAR


def rabi_from_intensity(intensity: float, dipole: float) -> float:
    """Rabi frequency for a running wave of given intensity.

    intensity in erg/(s cm^2) (1 mW/cm^2 = 1e4 erg/(s cm^2)),
    dipole in esu cm.  Field amplitude E = sqrt(2 pi I / c),
    Omega = d E / hbar, returned in 1/s.
    """
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    field = np.sqrt(2.0 * np.pi * intensity / C_LIGHT)
    return dipole * field / HBAR


def intensity_from_rabi(omega: float, dipole: float) -> float:
    """Inverse of rabi_from_intensity, erg/(s cm^2)."""
    field = omega * HBAR / dipole
    return field**2 * C_LIGHT / (2.0 * np.pi)


def angles_to_rabi(omega, theta, phi, chi=(0.0, 0.0, 0.0)):
    """Three complex Rabi components from (Omega, theta, phi, chi).

    Accepts scalars or broadcastable arrays; returns a tuple of three
    complex values/arrays ordered by lower state index.
    """
    e1 = np.sin(theta) * np.cos(phi)
    e2 = np.cos(theta) * np.cos(phi)
    e3 = np.sin(phi)
    return (omega * e1 * np.exp(1j * chi[0]),
            omega * e2 * np.exp(1j * chi[1]),
            omega * e3 * np.exp(1j * chi[2]))


def rabi_to_angles(omega1, omega2, omega3):
    """Invert angles_to_rabi on the principal branch.

    Returns (omega, theta, phi, (chi1, chi2, chi3)) with omega >= 0,
    theta in [0, pi/2], phi in [0, pi/2] and phases in (-pi, pi].
    Signed/continuous branches live in the field phases.  Raises
    DegenerateAnglesError when both in-plane components vanish
    (phi = pi/2: theta is not defined by the fields).
    """
    m1, m2, m3 = np.abs(omega1), np.abs(omega2), np.abs(omega3)
    omega = np.sqrt(m1**2 + m2**2 + m3**2)
    if np.any(omega == 0.0):
        raise DegenerateAnglesError("all field components vanish")
    plane = np.hypot(m1, m2)
    if np.any(plane < DEGENERACY_FLOOR * omega):
        raise DegenerateAnglesError(
            "cos(phi) ~ 0: theta undefined for this field triple")
    phi = np.arctan2(m3, plane)
    theta = np.arctan2(m1, m2)
    chi = (np.angle(omega1), np.angle(omega2), np.angle(omega3))
    return omega, theta, phi, chi


def dark_states(theta, phi, chi=(0.0, 0.0, 0.0)):
    """The two dark states as rows of a (2, 3) complex array.

    Both are annihilated by the interaction Hamiltonian and mutually
    orthonormal for any angles.
    """
    p1 = np.exp(-1j * chi[0])
    p2 = np.exp(-1j * chi[1])
    p3 = np.exp(-1j * chi[2])
    phi1 = np.array([np.cos(theta) * p1, -np.sin(theta) * p2, 0.0 * p3])
    phi2 = np.array([np.sin(theta) * np.sin(phi) * p1,
                     np.cos(theta) * np.sin(phi) * p2,
                     -np.cos(phi) * p3])
    return np.stack([phi1, phi2])


def hamiltonian_apply(rabi, state):
    """Apply H/(-hbar) to a bare-basis amplitude vector.

    rabi  : (omega1, omega2, omega3) complex
    state : (a0, a1, a2, a3) complex
    Returns (sum_j omega_j a_j, conj(omega_1) a0, conj(omega_2) a0,
    conj(omega_3) a0).  The Schroedinger equation then reads
    i da/dt = -result, i.e. da/dt = i * result.
    """
    o1, o2, o3 = rabi
    a0, a1, a2, a3 = state
    return (o1 * a1 + o2 * a2 + o3 * a3,
            np.conj(o1) * a0, np.conj(o2) * a0, np.conj(o3) * a0)


def mixing_matrix(nu):
    """Rotation of the dark pair accumulated by basis transport.

    Columns act on (Phi1, Phi2) coefficients; det = 1 for any nu.
    """
    c, s = np.cos(nu), np.sin(nu)
    return np.array([[c, s], [-s, c]])


def superposition_angle(beta, nu):
    """Instantaneous mixing angle of the dark superposition.

    beta is the preparation angle (mixing before the pulses arrive),
    nu the accumulated basis rotation.  Transport of the dark
    amplitudes rotates the superposition the opposite way to the basis,
    so mu = beta - nu.
    """
    return beta - nu


def state_from_mixing(theta, phi, mu, chi=(0.0, 0.0, 0.0)):
    """Lower-state amplitudes of the dark superposition.

    a_j = sin(mu) <j|Phi1> + cos(mu) <j|Phi2>; unit norm for any input.
    Returns a length-3 complex array.
    """
    basis = dark_states(theta, phi, chi)
    return np.sin(mu) * basis[0] + np.cos(mu) * basis[1]


def group_velocity(omega, coupling, family):
    """Group velocity of a pulse family, cm/s.

    family 'slow'  : v = (1/c + G/Omega^2)^-1  (single dark pulse)
    family 'fast'  : v = c                     (decoupled component)
    family 'mixed' : v = (1/c + G/(2 Omega^2))^-1 (two-frequency regime)
    """
    if family == "fast":
        return C_LIGHT
    if family == "slow":
        return 1.0 / (1.0 / C_LIGHT + coupling / omega**2)
    if family == "mixed":
        return 1.0 / (1.0 / C_LIGHT + coupling / (2.0 * omega**2))
    raise ValueError(f"unknown family {family!r}")


def group_delay(length, omega, coupling, family):
    """Arrival delay relative to vacuum light over a cell of given length, s."""
    v = group_velocity(omega, coupling, family)
    return length * (1.0 / v - 1.0 / C_LIGHT)
