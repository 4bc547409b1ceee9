"""Self-checks of the analytic identities the pipeline relies on."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import flux as fx
from .classical import HarmonicTrajectory, larmor_power, time_averaged_radiated_power
from .geometry import polarization_sum, polarization_sums, sphere_grid, transverse_norm2
from .quadrature import QuadratureSpec, delta_tau_moment, pv_delta_integral
from .spectrum import real_flux

_SEED = 20240611


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    value: float
    expected: float
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)


def _rel(value, expected):
    return abs(value - expected) / abs(expected) if expected else abs(value)


def check_spontaneous_emission(s, grid):
    v = fx.total_real_flux(s, grid).total
    ref = real_flux(s).total
    return IdentityCheck("spontaneous_emission", v, ref, _rel(v, ref), 1e-8)


def check_upward_cancellation(s, grid):
    res = fx.total_real_flux(s, grid)
    up = [r for r in res.transitions if r.omega < 0]
    leftover = math.fsum(abs(r.power) for r in up)
    scale = math.fsum(abs(r.first_order) for r in up) or 1.0
    return IdentityCheck("upward_cancellation", leftover, 0.0, leftover / scale, 1e-15)


def check_pv_delta_limit():
    r = pv_delta_integral(1.0, lambda w: w**4, QuadratureSpec(cutoff=100.0))
    return IdentityCheck("pv_delta_limit", r.value, 2 * math.pi, abs(r.value - 2 * math.pi), 1e-4)


def check_polarization_completeness(n=1000):
    rng = np.random.default_rng(_SEED)
    worst = 0.0
    for _ in range(n):
        d = rng.normal(size=3) + 1j * rng.normal(size=3)
        x = rng.normal(size=3)
        a, b = polarization_sum(d, x), transverse_norm2(d, x)
        worst = max(worst, abs(a - b) / float(np.vdot(d, d).real))
    return IdentityCheck("polarization_completeness", worst, 0.0, worst, 1e-12)


def check_sphere_polarization(s, grid):
    worst = 0.0
    for tr in s.from_excited():
        n2 = tr.dipole_norm2
        if n2 == 0:
            continue
        v = float(np.sum(grid.weights * polarization_sums(tr.dipole, grid.directions)))
        worst = max(worst, _rel(v, 8 * math.pi / 3 * n2))
    return IdentityCheck("sphere_polarization_integral", worst, 0.0, worst, 1e-8)


def check_delta_tau(tau=200.0):
    v = delta_tau_moment(lambda w: np.exp(-w * w), tau)
    return IdentityCheck("delta_tau_normalization", v, 1.0, abs(v - 1.0), 5e-3)


def check_integrand_split(n=1000):
    rng = np.random.default_rng(_SEED)
    w = rng.uniform(0.05, 20, n)
    a = rng.uniform(-5, 5, n)
    t = rng.uniform(0, 50, n)
    full = fx.second_order_integrand(w, a, t)
    i, o = fx.integrand_split(w, a, t)
    err = np.abs(full - (i + o)) / np.maximum(np.maximum(np.abs(full), np.abs(i + o)), 1.0)
    return IdentityCheck("integrand_split", float(err.max()), 0.0, float(err.max()), 1e-10)


def check_larmor(grid):
    traj = HarmonicTrajectory([0, 0, 1.0], 1.0)
    v = time_averaged_radiated_power(traj, 10.0, grid=grid)
    ref = larmor_power(1.0, 1.0)
    return IdentityCheck("larmor", v, ref, _rel(v, ref), 1e-6)


def check_virtual_reality(s, grid, spec):
    worst = 0.0
    for t in (1.5, 3.0, 11.0):
        z = fx.virtual_flux_complex(s, t, grid, spec)
        worst = max(worst, abs(z.imag))
    return IdentityCheck("virtual_flux_real", worst, 0.0, worst, 1e-12)


def run_identity_checks(s, spec=None, sphere_order=(32, 64)) -> list[IdentityCheck]:
    grid = sphere_grid(*sphere_order)
    spec = spec or fx.default_spec(s)
    return [
        check_spontaneous_emission(s, grid),
        check_upward_cancellation(s, grid),
        check_pv_delta_limit(),
        check_polarization_completeness(),
        check_sphere_polarization(s, grid),
        check_delta_tau(),
        check_integrand_split(),
        check_larmor(grid),
        check_virtual_reality(s, grid, spec),
    ]
