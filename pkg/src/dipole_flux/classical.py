"""Retarded electric-dipole fields for prescribed classical trajectories.

The source field splits into near (1/x^3), intermediate (1/x^2) and far
(1/x) zones.  The far zone is the radiation field, which depends only on
the dipole acceleration at the retarded time ``t_r = t - x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .geometry import SphericalGrid, sphere_grid, unit

FOUR_PI = 4.0 * math.pi


class HarmonicTrajectory:
    """``d(t) = d0 cos(omega t + phase)`` with closed-form derivatives."""

    kind = "harmonic"

    def __init__(self, d0, omega: float, phase: float = 0.0):
        self.d0 = np.asarray(d0, dtype=float)
        if self.d0.shape != (3,):
            raise ValueError("d0 must be a 3-vector")
        self.omega = float(omega)
        self.phase = float(phase)

    def d(self, t):
        return self.d0 * math.cos(self.omega * t + self.phase)

    def ddot(self, t):
        return -self.omega * self.d0 * math.sin(self.omega * t + self.phase)

    def dddot(self, t):
        return -self.omega**2 * self.d0 * math.cos(self.omega * t + self.phase)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega if self.omega else math.inf


def static_trajectory(d0) -> HarmonicTrajectory:
    return HarmonicTrajectory(d0, 0.0, 0.0)


def _d1_stencil(f, h):
    n = len(f)
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    # one-sided fourth-order stencils at the ends, mirrored on the right
    c0 = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    c1 = np.array([-3, -10, 18, -6, 1]) / (12 * h)
    rev = f[::-1]
    out[0] = np.tensordot(c0, f[:5], axes=1)
    out[1] = np.tensordot(c1, f[:5], axes=1)
    out[n - 1] = -np.tensordot(c0, rev[:5], axes=1)
    out[n - 2] = -np.tensordot(c1, rev[:5], axes=1)
    return out


def _d2_stencil(f, h):
    n = len(f)
    out = np.empty_like(f)
    out[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    c0 = np.array([45, -154, 214, -156, 61, -10]) / (12 * h * h)
    c1 = np.array([10, -15, -4, 14, -6, 1]) / (12 * h * h)
    out[0] = np.tensordot(c0, f[:6], axes=1)
    out[1] = np.tensordot(c1, f[:6], axes=1)
    rev = f[::-1]
    out[n - 1] = np.tensordot(c0, rev[:6], axes=1)
    out[n - 2] = np.tensordot(c1, rev[:6], axes=1)
    return out


class TabulatedTrajectory:
    """Uniformly sampled ``d(t_k) = samples[k]`` at ``t_k = t0 + k dt``.

    Derivatives come from fourth-order finite differences on the sample grid;
    values between samples use cubic splines through the sampled ``d``,
    ``ddot`` and ``dddot``.
    """

    kind = "tabulated"

    def __init__(self, dt: float, samples, t0: float = 0.0):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise ValueError("samples must have shape (n, 3)")
        if len(samples) < 6:
            raise ValueError("need at least 6 samples")
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.dt = float(dt)
        self.t0 = float(t0)
        self.samples = samples
        t = self.t0 + self.dt * np.arange(len(samples))
        self._lo, self._hi = t[0], t[-1]
        self._spl = [
            CubicSpline(t, arr, axis=0)
            for arr in (samples, _d1_stencil(samples, dt), _d2_stencil(samples, dt))
        ]

    def _eval(self, k, t):
        if not (self._lo <= t <= self._hi):
            raise ValueError(f"t={t} outside tabulated window [{self._lo}, {self._hi}]")
        return self._spl[k](t)

    def d(self, t):
        return self._eval(0, t)

    def ddot(self, t):
        return self._eval(1, t)

    def dddot(self, t):
        return self._eval(2, t)


def trajectory_from_dict(cfg: dict):
    kind = cfg.get("type")
    if kind == "harmonic":
        return HarmonicTrajectory(cfg["d0"], cfg["omega"], cfg.get("phase", 0.0))
    if kind == "tabulated":
        return TabulatedTrajectory(cfg["dt"], cfg["samples"], cfg.get("t0", 0.0))
    raise ValueError(f"unknown trajectory type {kind!r}")


@dataclass(frozen=True)
class FieldPoint:
    xhat: np.ndarray
    x: float
    t: float

    def __post_init__(self):
        if not self.x > 0:
            raise ValueError("field point radius must be > 0 (the origin is singular)")
        object.__setattr__(self, "xhat", unit(self.xhat))

    @property
    def t_r(self) -> float:
        return self.t - self.x


@dataclass(frozen=True)
class ZoneFields:
    near: np.ndarray
    intermediate: np.ndarray
    far: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.near + self.intermediate + self.far


def _transverse(n, v):
    return np.cross(n, np.cross(n, v))


def electric_source_field(traj, p: FieldPoint) -> ZoneFields:
    n, x, tr = p.xhat, p.x, p.t_r
    d, dd, ddd = traj.d(tr), traj.ddot(tr), traj.dddot(tr)
    near = (3 * n * np.dot(n, d) - d) / (FOUR_PI * x**3)
    inter = (3 * n * np.dot(n, dd) - dd) / (FOUR_PI * x**2)
    far = _transverse(n, ddd) / (FOUR_PI * x)
    return ZoneFields(near, inter, far)


def radiation_source_fields(traj, p: FieldPoint):
    """``(E_rad, B_rad)`` with ``B_rad = xhat x E_rad``."""
    e = _transverse(p.xhat, traj.dddot(p.t_r)) / (FOUR_PI * p.x)
    return e, np.cross(p.xhat, e)


def radiation_source_potential(traj, p: FieldPoint) -> np.ndarray:
    return -_transverse(p.xhat, traj.ddot(p.t_r)) / (FOUR_PI * p.x)


def classical_radiated_power(traj, x: float, t: float, grid: SphericalGrid | None = None) -> float:
    """Instantaneous power through the sphere of radius ``x`` at lab time ``t``."""
    if not x > 0:
        raise ValueError("radius must be > 0")
    grid = grid or sphere_grid()
    acc = traj.dddot(t - x)
    n = grid.directions
    e = np.cross(n, np.cross(n, acc)) / (FOUR_PI * x)
    b = np.cross(n, e)
    flux = np.einsum("ij,ij->i", n, np.cross(e, b))
    return float(np.sum(grid.weights * x * x * flux))


def time_averaged_radiated_power(traj, x: float, period: float | None = None,
                                 n_samples: int = 64, grid: SphericalGrid | None = None,
                                 t0: float | None = None) -> float:
    """Average of :func:`classical_radiated_power` over one period.

    Uses the periodic trapezoid rule, exact for the trigonometric
    polynomials produced by harmonic motion.
    """
    period = period if period is not None else getattr(traj, "period", None)
    if period is None or not math.isfinite(period):
        # static source: nothing to average
        return classical_radiated_power(traj, x, x if t0 is None else t0, grid)
    t0 = x if t0 is None else t0
    ts = t0 + period * np.arange(n_samples) / n_samples
    return float(np.mean([classical_radiated_power(traj, x, t, grid) for t in ts]))


def larmor_power(d0_norm: float, omega: float) -> float:
    """Cycle-averaged Larmor power ``omega^4 d0^2 / (12 pi)``."""
    return omega**4 * d0_norm**2 / (12.0 * math.pi)
