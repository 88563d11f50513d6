"""Shape-preserving pulse families and their classification.

The angle advection matrix is a rank-one projector, so special pulse
shapes exist that refuse to deform: a slow family (advected at unit
speed in the stretched frame) and a fast family (frozen there, i.e.
moving at the vacuum speed in the lab).  Each is a one-parameter curve
on the (theta, phi) sphere indexed by the superposition angle mu and
pinned by two constants,

    slow : |cos phi| |sin mu| = c_amp,
           |sin(theta - c_shift)| = |cos mu| / sqrt(1 - c_amp^2)
    fast : |cos phi| |cos mu| = c_amp,
           |sin(theta - c_shift)| = |sin mu| / sqrt(1 - c_amp^2)

generate_family   closed-form (theta, phi) samples from a mu profile
classify          label a windowed pulse by which relations it obeys
fit_constants     recover (c_amp, c_shift) and the residual from data
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

FAMILIES = ("slow", "fast")


class FamilyError(ValueError):
    """Raised when a requested family member does not exist.

    When raised by fit_constants on a mixed window, the offending
    classification is attached as .classification.
    """

    def __init__(self, message, classification=None):
        super().__init__(message)
        self.classification = classification


@dataclass(frozen=True)
class FamilyParams:
    """Constants pinning one member of a shape-preserving family."""

    family: str
    c_amp: float
    c_shift: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise FamilyError(f"unknown family {self.family!r}")
        if not 0.0 < self.c_amp < 1.0:
            raise FamilyError(
                f"c_amp must lie in (0, 1), got {self.c_amp}")


def _weight(params, mu):
    """|sin mu| for the slow family, |cos mu| for the fast one."""
    if params.family == "slow":
        return np.abs(np.sin(mu))
    return np.abs(np.cos(mu))


def generate_family(params, mu):
    """Evaluate a family member's (theta, phi) at given mu values.

    Branch choice: sin phi > 0 throughout, and theta picked so the
    curve is smooth in mu.  The member exists only while the family
    weight stays at or above c_amp; outside that range the pulse
    amplitude would have to exceed the total and FamilyError is raised.
    """
    mu = np.asarray(mu, dtype=float)
    weight = _weight(params, mu)
    short = weight - params.c_amp
    if np.min(short) < -1e-12:
        j = int(np.argmin(short))
        raise FamilyError(
            f"{params.family} family with c_amp={params.c_amp:g} does "
            f"not exist at mu={float(np.atleast_1d(mu)[j]):.6g} "
            f"(weight {float(np.atleast_1d(weight)[j]):.6g})")
    root = np.sqrt(1.0 - params.c_amp ** 2)
    phi = np.arccos(np.clip(params.c_amp / np.maximum(weight,
                                                      params.c_amp), -1, 1))
    if params.family == "slow":
        arg = np.clip(np.cos(mu) / root, -1.0, 1.0)
        theta = params.c_shift + np.sign(np.sin(mu)) * np.arcsin(arg)
    else:
        arg = np.clip(np.sin(mu) / root, -1.0, 1.0)
        theta = params.c_shift - np.sign(np.cos(mu)) * np.arcsin(arg)
    return theta, phi


@dataclass(frozen=True)
class FamilyAngleProfile:
    """Boundary profile callable for one angle of a family pulse.

    Wraps a mu(w) profile and evaluates the family's closed form, so a
    BoundaryProfile built from two of these satisfies the family
    relations exactly at every sample.  Picklable for use in sweeps.
    """

    params: FamilyParams
    mu_profile: object
    component: str

    def __post_init__(self):
        if self.component not in ("theta", "phi"):
            raise ValueError(f"unknown component {self.component!r}")

    def __call__(self, w):
        theta, phi = generate_family(self.params, self.mu_profile(w))
        return theta if self.component == "theta" else phi

    def deriv(self, w, h=1e-6):
        # centered difference of the closed form; used only for rate
        # reporting, never inside the solver
        return (self(np.asarray(w, dtype=float) + h) - self(
            np.asarray(w, dtype=float) - h)) / (2.0 * h)


@dataclass(frozen=True)
class SuperposedProfile:
    """Sum of angle profiles that share one quiescent background.

    Each part equals the background outside its own disturbance, so as
    long as the disturbances do not overlap the sum reproduces every
    part exactly inside its window.  Used to launch one slow and one
    fast pulse from the same entrance.
    """

    parts: tuple
    background: float

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        total = np.full_like(w, -self.background * (len(self.parts) - 1))
        for part in self.parts:
            total = total + part(w)
        return total

    def deriv(self, w):
        w = np.asarray(w, dtype=float)
        total = np.zeros_like(w)
        for part in self.parts:
            total = total + part.deriv(w)
        return total


@dataclass
class FitResult:
    """Best-fit family constants and the relative misfit."""

    family: str
    c_amp: float
    c_shift: float
    rel_rms: float

    def params(self):
        return FamilyParams(self.family, self.c_amp, self.c_shift)


def _shift_residual(theta, target, shift):
    return np.abs(np.sin(theta - shift)) - target


def fit_constants(theta, phi, mu, family, check=True):
    """Recover (c_amp, c_shift) of one family from sampled angles.

    c_amp is the mean of the amplitude product; c_shift minimizes the
    second relation's rms over its pi-periodic range (coarse scan plus
    a bounded refinement).  rel_rms is the combined residual of both
    relations normalized by the scale of their target values; a pulse
    that belongs to the family scores near zero.

    A window classified as mixed is refused (the family relations do
    not apply there); pass check=False to fit anyway.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if check:
        cls = classify(theta, phi, mu)
        if cls.label == "mixed":
            raise FamilyError(
                f"window is not a pure {family} pulse: {cls}", cls)
    weight = np.abs(np.sin(mu)) if family == "slow" else np.abs(np.cos(mu))
    prod = np.abs(np.cos(phi)) * weight
    c_amp = float(np.mean(prod))
    c_amp = min(max(c_amp, 1e-9), 1.0 - 1e-9)
    root = np.sqrt(1.0 - c_amp ** 2)
    other = np.abs(np.cos(mu)) if family == "slow" else np.abs(np.sin(mu))
    target = np.clip(other / root, 0.0, 1.0)

    def cost(s):
        r = _shift_residual(theta, target, s)
        return float(np.mean(r * r))

    scan = np.linspace(-0.5 * np.pi, 0.5 * np.pi, 181, endpoint=False)
    best = scan[int(np.argmin([cost(s) for s in scan]))]
    span = np.pi / 180.0
    res = minimize_scalar(cost, bracket=None,
                          bounds=(best - span, best + span),
                          method="bounded",
                          options={"xatol": 1e-12})
    c_shift = float(res.x)
    r1 = prod - c_amp
    r2 = _shift_residual(theta, target, c_shift)
    num = np.sqrt(np.mean(r1 * r1 + r2 * r2))
    den = np.sqrt(np.mean(c_amp ** 2 + target * target))
    return FitResult(family=family, c_amp=c_amp, c_shift=c_shift,
                     rel_rms=float(num / den))


@dataclass
class PulseClassification:
    """Which family, if any, a windowed pulse belongs to.

    Each family conserves one product along the pulse (cos phi sin mu
    for slow, cos phi cos mu for fast); the spreads record the relative
    variation (max - min over mean of absolute values) of each product
    across the window.
    """

    label: str
    slow_spread: float
    fast_spread: float
    tol: float

    def __str__(self):
        return (f"{self.label} (slow spread {self.slow_spread:.2%}, "
                f"fast spread {self.fast_spread:.2%})")


def _spread(values):
    mean = float(np.mean(np.abs(values)))
    if mean == 0.0:
        return 0.0
    return float((np.max(values) - np.min(values)) / mean)


def classify(theta, phi, mu, tol=0.02):
    """Label a pulse window as slow, fast, mixed or indeterminate.

    A window is slow when only the slow product is constant to within
    tol, fast when only the fast one is; anything non-constant that
    conserves both or neither is mixed.  A window with no angular
    structure at all cannot be told apart and comes back indeterminate.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    slow_spread = _spread(np.abs(np.cos(phi)) * np.abs(np.sin(mu)))
    fast_spread = _spread(np.abs(np.cos(phi)) * np.abs(np.cos(mu)))
    structure = np.ptp(theta) + np.ptp(phi)
    if structure < 1e-4:
        label = "indeterminate"
    elif slow_spread <= tol < fast_spread:
        label = "slow"
    elif fast_spread <= tol < slow_spread:
        label = "fast"
    else:
        label = "mixed"
    return PulseClassification(label=label, slow_spread=slow_spread,
                               fast_spread=fast_spread, tol=tol)
