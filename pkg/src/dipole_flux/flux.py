"""Second-order perturbative radiated energy flux of an excited dipole.

All densities here are flux densities ``<E_rad^2>`` through a sphere of
radius ``x``.  They scale as ``1/x^2``; the ``*_density`` functions return
the ``x^2``-scaled value unless stated otherwise.

The second-order term is split into a time-independent part, evaluated
with the ``+i eps`` prescription, and an oscillatory part that depends on
the retarded time.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import SphericalGrid, integrate_sphere, polarization_sum, polarization_sums, sphere_grid
from .quadrature import (
    QuadratureSpec,
    averaged_sinc_pair_integral,
    f_kernel,
    pole_integral,
    pv_delta_integral,
    sinc_pair_integral,
)
from .spectrum import DipoleSpectrum, Transition, real_flux

PI = math.pi
FIRST_ORDER_PREFACTOR = 1.0 / (16.0 * PI**2)
SECOND_ORDER_PREFACTOR = 1.0 / (4.0 * (2.0 * PI) ** 3)


def sgn(x: float) -> float:
    """Sign with ``sgn(0) = 0``."""
    return float((x > 0) - (x < 0))


def thread_count() -> int:
    raw = os.environ.get("DIPOLE_FLUX_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items, threads: int | None = None) -> list:
    """Order-preserving map; each item is computed independently."""
    items = list(items)
    threads = thread_count() if threads is None else max(1, threads)
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def default_spec(s: DipoleSpectrum, **overrides) -> QuadratureSpec:
    return QuadratureSpec.for_frequencies([t.omega for t in s.from_excited()], **overrides)


# ---------------------------------------------------------------------------
# integrand level


def second_order_bracket(omega, omega_em, t):
    """``f*(omega_em - omega, t) e^{i omega_em t} - f(omega_em + omega, t) e^{-i omega_em t}``."""
    a = np.asarray(omega_em, float)
    ph = np.exp(1j * a * np.asarray(t, float))
    return np.conj(f_kernel(a - omega, t)) * ph - f_kernel(a + omega, t) / ph


def second_order_bracket_dtt(omega, omega_em, t):
    """Second time derivative of :func:`second_order_bracket`, in closed form.

    Uses ``df/dt = e^{i w t}`` and ``d2f/dt2 = i w e^{i w t}`` with the
    product rule, so it stays finite at ``omega = +-omega_em``.
    """
    omega = np.asarray(omega, float)
    a = np.asarray(omega_em, float)
    t = np.asarray(t, float)
    ph = np.exp(1j * a * t)
    # both first derivatives of f reduce to e^{i w t} after the phase factor
    e_w = np.exp(1j * omega * t)
    # first term: conj(f(a-w,t)) e^{iat}
    lo = a - omega
    c0 = np.conj(f_kernel(lo, t))
    g1 = (-1j * lo) * e_w + 2.0 * (1j * a) * e_w - a * a * c0 * ph
    # second term: f(a+w,t) e^{-iat}
    hi = a + omega
    c1 = f_kernel(hi, t)
    g2 = (1j * hi) * e_w + 2.0 * (-1j * a) * e_w - a * a * c1 / ph
    return g1 - g2


def second_order_integrand(omega, omega_em, t_r):
    """``omega^2 e^{-i omega t_r}`` times the bracket's second derivative at ``t_r``."""
    omega = np.asarray(omega, float)
    return omega**2 * np.exp(-1j * omega * np.asarray(t_r, float)) * second_order_bracket_dtt(omega, omega_em, t_r)


def integrand_split(omega, omega_em, t_r):
    """``(time_independent, oscillatory)`` pieces of :func:`second_order_integrand`.

    ``i w^4 [1/(w-a) - 1/(w+a)]`` and
    ``-i a^2 w^2 [e^{-i(w-a)t}/(w-a) - e^{-i(w+a)t}/(w+a)]``; both have
    simple poles at ``w = +-a`` that cancel in the sum.
    """
    w = np.asarray(omega, float)
    a = np.asarray(omega_em, float)
    t = np.asarray(t_r, float)
    u, v = w - a, w + a
    indep = 1j * w**4 * (1.0 / u - 1.0 / v)
    osc = -1j * a * a * w * w * (np.exp(-1j * u * t) / u - np.exp(-1j * v * t) / v)
    return indep, osc


# ---------------------------------------------------------------------------
# densities


def first_order_density(s: DipoleSpectrum, xhat) -> float:
    """x^2-scaled first-order flux density; every level m contributes."""
    total = 0.0
    for tr in s.from_excited():
        total += polarization_sum(tr.dipole, xhat) * tr.omega**4
    return FIRST_ORDER_PREFACTOR * total


@dataclass(frozen=True)
class SecondOrderCoefficient:
    """Per-transition weight multiplying the polarization sum."""

    transition: Transition
    value: float
    error: float = 0.0


def real_second_order_coefficients(s: DipoleSpectrum, spec: QuadratureSpec | None = None,
                                   method: str = "analytic") -> list[SecondOrderCoefficient]:
    """Coefficients ``c_m`` with density ``sum_m c_m sum_lambda |e_lambda . d_em|^2``.

    ``analytic``: ``omega^4 sgn(omega) / (16 pi^2)``.
    ``numerical``: the nascent-delta integral of ``omega^4``, extrapolated
    to eps -> 0, times ``1 / (4 (2 pi)^3)``.
    """
    out = []
    for tr in s.from_excited():
        if method == "analytic" or tr.omega == 0.0:
            c = FIRST_ORDER_PREFACTOR * tr.omega**4 * sgn(tr.omega)
            out.append(SecondOrderCoefficient(tr, c))
        elif method == "numerical":
            spec = spec or default_spec(s)
            r = pv_delta_integral(tr.omega, lambda w: w**4, spec)
            out.append(SecondOrderCoefficient(tr, SECOND_ORDER_PREFACTOR * r.value,
                                              SECOND_ORDER_PREFACTOR * r.error))
        else:
            raise ValueError(f"unknown method {method!r}")
    return out


def real_second_order_density(s: DipoleSpectrum, xhat, spec: QuadratureSpec | None = None,
                              method: str = "analytic") -> float:
    return sum(c.value * polarization_sum(c.transition.dipole, xhat)
               for c in real_second_order_coefficients(s, spec, method))


def real_density(s: DipoleSpectrum, xhat, spec=None, method="analytic") -> float:
    """x^2-scaled time-independent flux density (first order + real second order)."""
    return first_order_density(s, xhat) + real_second_order_density(s, xhat, spec, method)


@dataclass(frozen=True)
class TransitionFlux:
    target: str
    omega: float
    first_order: float
    second_order: float
    second_order_error: float

    @property
    def power(self) -> float:
        return self.first_order + self.second_order


@dataclass(frozen=True)
class RealFluxResult:
    total: float
    transitions: tuple[TransitionFlux, ...]
    method: str
    error: float = 0.0


def total_real_flux(s: DipoleSpectrum, grid: SphericalGrid | None = None,
                    spec: QuadratureSpec | None = None, method: str = "analytic") -> RealFluxResult:
    """Sphere integral of ``x^2 (first order + real second order)`` density."""
    grid = grid or sphere_grid()
    rows = []
    err = 0.0
    for c in real_second_order_coefficients(s, spec, method):
        tr = c.transition
        ang = integrate_sphere(lambda n: polarization_sums(tr.dipole, n), grid, vectorized=True)
        first = FIRST_ORDER_PREFACTOR * tr.omega**4 * ang
        second = c.value * ang
        rows.append(TransitionFlux(tr.target, tr.omega, first, second, c.error * ang))
        err += c.error * ang
    total = math.fsum(r.power for r in rows)
    return RealFluxResult(total, tuple(rows), method, err)


def angular_map(s: DipoleSpectrum, grid: SphericalGrid | None = None):
    """``(theta, phi, weight, x^2 density)`` of the time-independent flux on the grid."""
    grid = grid or sphere_grid()
    dens = np.zeros(len(grid))
    for c in real_second_order_coefficients(s):
        tr = c.transition
        dens += (FIRST_ORDER_PREFACTOR * tr.omega**4 + c.value) * polarization_sums(tr.dipole, grid.directions)
    return grid.theta, grid.phi, grid.weights, dens


# ---------------------------------------------------------------------------
# virtual flux


def _weight(spec: QuadratureSpec):
    reg = spec.regulator
    return lambda w: w * w * reg(w)


def virtual_kernel(omega_em: float, t_r: float, spec: QuadratureSpec,
                   prescription: str = "principal") -> complex:
    """``K = J(omega_em) - J(-omega_em)`` with ``J(p) = int w^2 r(w) e^{-i(w-p)t}/(w-p)``."""
    h = _weight(spec)
    return (pole_integral(h, omega_em, t_r, spec, prescription)
            - pole_integral(h, -omega_em, t_r, spec, prescription))


def virtual_kernel_direct(omega_em: float, t_r: float, spec: QuadratureSpec) -> float:
    """Imaginary part of :func:`virtual_kernel` (principal value) from the regular sinc form."""
    return -sinc_pair_integral(_weight(spec), omega_em, t_r, spec)


def _angular_weights(s: DipoleSpectrum, grid: SphericalGrid):
    out = []
    for tr in s.from_excited():
        if tr.omega == 0.0:
            continue
        ang = integrate_sphere(lambda n: polarization_sums(tr.dipole, n), grid, vectorized=True)
        out.append((tr, tr.omega**2 * ang))
    return out


def _retarded_time(t, radius):
    t_r = t - radius
    if t_r < 0:
        raise ValueError(f"t={t} precedes the arrival time x={radius} (t_r < 0)")
    return t_r


VIRTUAL_PREFACTOR = 1.0 / (16.0 * PI**3)


def virtual_flux_complex(s: DipoleSpectrum, t: float, grid=None, spec=None, radius=1.0,
                         prescription="principal") -> complex:
    """``expr + c.c.`` for the virtual power, kept complex so the residual is observable."""
    grid = grid or sphere_grid()
    spec = spec or default_spec(s)
    t_r = _retarded_time(t, radius)
    expr = 0.0j
    for tr, weight in _angular_weights(s, grid):
        expr += (-1j * SECOND_ORDER_PREFACTOR) * weight * virtual_kernel(tr.omega, t_r, spec, prescription)
    return expr + np.conj(expr)


def virtual_flux(s: DipoleSpectrum, t: float, grid=None, spec=None, radius=1.0,
                 prescription="principal") -> float:
    """Virtual radiated power at lab time ``t`` through the sphere of radius ``radius``."""
    return float(virtual_flux_complex(s, t, grid, spec, radius, prescription).real)


def virtual_flux_direct(s: DipoleSpectrum, t: float, grid=None, spec=None, radius=1.0) -> float:
    """Brute-force principal-value virtual power from the regular sinc integrand."""
    grid = grid or sphere_grid()
    spec = spec or default_spec(s)
    t_r = _retarded_time(t, radius)
    return VIRTUAL_PREFACTOR * sum(w * virtual_kernel_direct(tr.omega, t_r, spec)
                                   for tr, w in _angular_weights(s, grid))


def virtual_flux_average(s: DipoleSpectrum, T: float, grid=None, spec=None) -> float:
    """Running mean of the principal-value virtual power over ``t_r in [0, T]``.

    The time integral is done analytically node by node, so only one
    frequency quadrature is needed per ``T``.
    """
    grid = grid or sphere_grid()
    spec = spec or default_spec(s)
    h = _weight(spec)
    return VIRTUAL_PREFACTOR * sum(-w * averaged_sinc_pair_integral(h, tr.omega, T, spec)
                                   for tr, w in _angular_weights(s, grid))


_PRESCRIPTION_FACTOR = {"principal": 1.0, "retarded": 2.0, "advanced": 0.0}


def virtual_flux_asymptote(s: DipoleSpectrum, grid=None, spec=None, prescription="principal") -> float:
    """Large-``t_r`` limit of the non-oscillating part of the virtual power.

    Each pole inside the cutoff leaves ``-pi w^2 r(w) sgn(omega_em)`` in the
    imaginary part of the kernel under the principal value; the retarded
    prescription doubles it and the advanced one removes it.
    """
    grid = grid or sphere_grid()
    spec = spec or default_spec(s)
    fac = _PRESCRIPTION_FACTOR[prescription]
    total = 0.0
    for tr, w in _angular_weights(s, grid):
        a = abs(tr.omega)
        if a < spec.cutoff:
            total += w * (-PI * a * a * float(spec.regulator(a)) * sgn(tr.omega))
    return fac * VIRTUAL_PREFACTOR * total


@dataclass(frozen=True)
class VirtualFluxSeries:
    t: np.ndarray
    t_r: np.ndarray
    values: np.ndarray
    cutoff: float
    regulator: str
    prescription: str = "principal"


def virtual_flux_series(s: DipoleSpectrum, times, grid=None, spec=None, radius=1.0,
                        prescription="principal", threads=None) -> VirtualFluxSeries:
    grid = grid or sphere_grid()
    spec = spec or default_spec(s)
    times = np.asarray(times, dtype=float)
    vals = parallel_map(lambda t: virtual_flux(s, t, grid, spec, radius, prescription), times, threads)
    return VirtualFluxSeries(times, times - radius, np.asarray(vals), spec.cutoff,
                             spec.regulator.label(), prescription)


def time_average(P, T: float, t0: float = 0.0, n_panels: int = 256, order: int = 16) -> float:
    """``(1/T) int_{t0}^{t0+T} P(t) dt``.

    ``P`` is either a callable (composite Gauss-Legendre on ``n_panels``
    panels) or a ``(times, values)`` series (trapezoid rule on the samples
    inside the window, which must cover it).
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if callable(P):
        from .quadrature import panel_nodes
        ts, ws = panel_nodes(np.linspace(t0, t0 + T, n_panels + 1), order)
        vals = np.array([P(t) for t in ts], dtype=float)
        return float(np.sum(ws * vals) / T)
    times, values = (np.asarray(a, dtype=float) for a in P)
    if times.size == 0:
        raise ValueError("empty series")
    tol = 1e-9 * max(abs(T), 1.0)
    sel = (times >= t0 - tol) & (times <= t0 + T + tol)
    ts, vs = times[sel], values[sel]
    if ts.size < 2 or ts[0] > t0 + tol or ts[-1] < t0 + T - tol:
        raise ValueError("series does not cover the averaging window")
    return float(np.trapezoid(vs, ts) / T)


def fit_decay_exponent(Ts, averages) -> float:
    """Least-squares slope of ``log|average|`` against ``log T``."""
    Ts = np.asarray(Ts, float)
    a = np.abs(np.asarray(averages, float))
    return float(np.polyfit(np.log(Ts), np.log(a), 1)[0])


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class FluxDensityBreakdown:
    """Flux densities at one field point, each carrying its ``1/x^2``."""

    xhat: np.ndarray
    radius: float
    first_order: float
    real_second_order: float
    t: np.ndarray
    virtual: np.ndarray


def density_breakdown(s: DipoleSpectrum, xhat, radius: float, times=(), spec=None,
                      prescription="principal") -> FluxDensityBreakdown:
    spec = spec or default_spec(s)
    x2 = radius * radius
    first = first_order_density(s, xhat) / x2
    second = real_second_order_density(s, xhat) / x2
    times = np.asarray(times, dtype=float)
    vir = []
    for t in times:
        t_r = _retarded_time(t, radius)
        acc = 0.0
        for tr in s.from_excited():
            if tr.omega == 0.0:
                continue
            k = virtual_kernel(tr.omega, t_r, spec, prescription)
            acc += polarization_sum(tr.dipole, xhat) * tr.omega**2 * k.imag
        vir.append(VIRTUAL_PREFACTOR * acc / x2)
    return FluxDensityBreakdown(np.asarray(xhat, float), float(radius), first, second, times, np.asarray(vir))


@dataclass(frozen=True)
class FluxReport:
    P_real: float
    lines: tuple[TransitionFlux, ...]
    P_real_spectrum: float
    virtual: VirtualFluxSeries
    window: float
    time_average: float
    virtual_average: float
    diagnostics: dict = field(default_factory=dict)


def flux_report(s: DipoleSpectrum, times, grid=None, spec=None, radius=1.0, window=None,
                prescription="principal", cutoff_check: bool = True, threads=None) -> FluxReport:
    """Real flux, virtual series and the running mean of the total flux.

    ``window`` defaults to the largest sampled retarded time.  The cutoff
    diagnostic repeats the virtual series at twice the cutoff.
    """
    grid = grid or sphere_grid()
    spec = spec or default_spec(s)
    real = total_real_flux(s, grid, spec)
    series = virtual_flux_series(s, times, grid, spec, radius, prescription, threads)
    window = float(window if window is not None else (series.t_r.max() if series.t_r.size else 0.0))
    v_avg = virtual_flux_average(s, window, grid, spec) if window > 0 else math.nan
    if prescription != "principal" and window > 0:
        v_avg += virtual_flux_asymptote(s, grid, spec, prescription) - virtual_flux_asymptote(s, grid, spec)
    diag = {
        "cutoff": spec.cutoff,
        "regulator": spec.regulator.label(),
        "prescription": prescription,
        "virtual_asymptote": virtual_flux_asymptote(s, grid, spec, prescription),
    }
    if cutoff_check and series.values.size:
        doubled = virtual_flux_series(s, times, grid, spec.with_(cutoff=2 * spec.cutoff), radius,
                                      prescription, threads)
        scale = max(float(np.max(np.abs(series.values))), 1e-300)
        diag["cutoff_sensitivity"] = float(np.max(np.abs(doubled.values - series.values)) / scale)
    return FluxReport(real.total, real.transitions, real_flux(s).total, series, window,
                      real.total + v_avg, v_avg, diag)
