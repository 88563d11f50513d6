"""Boundary profiles and grids for the propagation solvers.

Angle profiles at the medium entrance are built from a quiescent base
value plus smoothstep segments (ramps and bumps).  Profiles are plain
callables of the nonlinear time w, constant outside their support, so
exact shifted evaluation (needed by the two-frequency mixed regime and
by translation tests) never goes through grid interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def smoothstep(x):
    """Cubic smoothstep s(x) = x^2 (3 - 2x), clamped to [0, 1]."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def smoothstep_deriv(x):
    """ds/dx for the cubic smoothstep (0 outside [0, 1])."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, 6.0 * xc * (1.0 - xc), 0.0)


@dataclass(frozen=True)
class Segment:
    """One additive profile feature.

    shape     : 'ramp' rises 0 -> amplitude over [center - width/2,
                center + width/2] and stays up; 'bump' rises over
                [center - width, center] and returns over
                [center, center + width].
    center    : w position of the feature midpoint
    width     : transition scale (ramp full width, bump half width)
    amplitude : value added after a ramp / at the bump peak, radians
    """

    shape: str
    center: float
    width: float
    amplitude: float

    def __post_init__(self):
        if self.shape not in ("ramp", "bump"):
            raise ValueError(f"unknown segment shape {self.shape!r}")
        if self.width <= 0:
            raise ValueError("segment width must be positive")

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.shape == "ramp":
            x = (w - self.center + 0.5 * self.width) / self.width
            return self.amplitude * smoothstep(x)
        up = smoothstep((w - self.center + self.width) / self.width)
        down = smoothstep((w - self.center) / self.width)
        return self.amplitude * (up - down)

    def deriv(self, w):
        w = np.asarray(w, dtype=float)
        if self.shape == "ramp":
            x = (w - self.center + 0.5 * self.width) / self.width
            return self.amplitude * smoothstep_deriv(x) / self.width
        up = smoothstep_deriv((w - self.center + self.width) / self.width)
        down = smoothstep_deriv((w - self.center) / self.width)
        return self.amplitude * (up - down) / self.width

    def support(self):
        if self.shape == "ramp":
            return (self.center - 0.5 * self.width,
                    self.center + 0.5 * self.width)
        return (self.center - self.width, self.center + self.width)


@dataclass(frozen=True)
class Profile:
    """Base value plus a sum of segments; constant outside all supports."""

    base: float = 0.0
    segments: tuple = ()

    def __call__(self, w):
        out = np.full_like(np.asarray(w, dtype=float), self.base)
        for seg in self.segments:
            out = out + seg(w)
        return out

    def deriv(self, w):
        out = np.zeros_like(np.asarray(w, dtype=float))
        for seg in self.segments:
            out = out + seg.deriv(w)
        return out


@dataclass(frozen=True)
class ConstantProfile:
    value: float = 1.0

    def __call__(self, w):
        return np.full_like(np.asarray(w, dtype=float), self.value)

    def deriv(self, w):
        return np.zeros_like(np.asarray(w, dtype=float))


@dataclass(frozen=True)
class BoundaryProfile:
    """Entrance data for a run.

    theta0, phi0 : angle profiles versus nonlinear time w
    beta         : preparation mixing angle of the medium
    omega0       : generalized Rabi frequency profile (dimensionless
                   solvers use the constant 1)
    """

    theta0: object
    phi0: object
    beta: float = 0.0
    omega0: object = field(default_factory=ConstantProfile)

    def sample(self, w):
        return self.theta0(w), self.phi0(w)

    def max_rates(self, w):
        """Largest |d theta0/dw|, |d phi0/dw| on the sampled points."""
        return (float(np.max(np.abs(self.theta0.deriv(w)))),
                float(np.max(np.abs(self.phi0.deriv(w)))))


@dataclass(frozen=True)
class Grid:
    """Uniform (zeta, w) grid.

    store_every keeps every k-th zeta slice in the returned history
    (the first and last slices are always kept).
    """

    dw: float
    dzeta: float
    w_max: float
    zeta_max: float
    store_every: int = 1

    def __post_init__(self):
        if self.dw <= 0 or self.dzeta <= 0:
            raise ValueError("grid steps must be positive")
        if self.w_max <= 0 or self.zeta_max < 0:
            raise ValueError("grid extents must be positive")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")

    @property
    def n_w(self) -> int:
        return int(round(self.w_max / self.dw)) + 1

    @property
    def n_zeta(self) -> int:
        return int(round(self.zeta_max / self.dzeta))

    def w_axis(self):
        return np.arange(self.n_w) * self.dw

    def stored_steps(self):
        steps = list(range(0, self.n_zeta + 1, self.store_every))
        if steps[-1] != self.n_zeta:
            steps.append(self.n_zeta)
        return np.asarray(steps)

    def zeta_stored(self):
        return self.stored_steps() * self.dzeta

    def check_cfl(self):
        # upwind characteristics have speeds in {0, 1}: need dzeta <= dw
        if self.dzeta > self.dw * (1.0 + 1e-12):
            raise ValueError(
                f"CFL violation: dzeta = {self.dzeta} exceeds dw = {self.dw}")
