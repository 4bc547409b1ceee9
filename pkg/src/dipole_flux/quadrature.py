"""Regulated one-dimensional frequency integrals.

Composite Gauss-Legendre rules on panels are the only integration
primitive.  Sharp features are handled by choosing panel edges: geometric
grading around nascent-delta peaks, panel widths below a fraction of the
oscillation period for oscillatory integrands, and an edge at every
subtracted pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import sici

from . import kernels

SERIES_SWITCH = 1e-4


class NumericalError(ArithmeticError):
    """A quadrature produced or encountered a non-finite value."""


@dataclass(frozen=True)
class Regulator:
    """Frequency regulator applied inside the cutoff.

    ``sharp`` is the indicator of ``[0, cutoff]``; ``exponential`` multiplies
    by ``exp(-omega/scale)`` as well.
    """

    kind: str = "sharp"
    scale: float | None = None

    def __post_init__(self):
        if self.kind not in ("sharp", "exponential"):
            raise ValueError(f"unknown regulator {self.kind!r}")
        if self.kind == "exponential" and not (self.scale and self.scale > 0):
            raise ValueError("exponential regulator needs a positive scale")

    def __call__(self, om):
        om = np.asarray(om, dtype=float)
        if self.kind == "sharp":
            return np.ones_like(om)
        return np.exp(-om / self.scale)

    def label(self) -> str:
        return "sharp" if self.kind == "sharp" else f"exponential({self.scale!r})"

    def to_dict(self) -> dict:
        d = {"type": self.kind}
        if self.scale is not None:
            d["scale"] = float(self.scale)
        return d


@dataclass(frozen=True)
class QuadratureSpec:
    """Frequency-integration settings.

    Attributes
    ----------
    cutoff : float
        Upper frequency limit of every integral.
    regulator : Regulator
        Applied to the oscillatory (virtual-flux) integrals.
    epsilon : float
        Central nascent-delta width; the ``eps -> 0`` limit is extrapolated
        from ``epsilon * (10, 1, 0.1)``.
    n_nodes : int
        Minimum total Gauss-Legendre node count on ``[0, cutoff]``.
    panel_order : int
        Gauss-Legendre points per panel.
    """

    cutoff: float = 100.0
    regulator: Regulator = field(default_factory=Regulator)
    epsilon: float = 1e-3
    n_nodes: int = 64
    panel_order: int = 16

    def __post_init__(self):
        if not (self.cutoff > 0 and math.isfinite(self.cutoff)):
            raise ValueError("cutoff must be positive and finite")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive")
        if self.n_nodes < 64:
            raise ValueError("n_nodes must be >= 64")
        if self.panel_order < 2:
            raise ValueError("panel_order must be >= 2")

    @property
    def epsilons(self) -> tuple[float, float, float]:
        return (10.0 * self.epsilon, self.epsilon, 0.1 * self.epsilon)

    @classmethod
    def for_frequencies(cls, omegas, **overrides) -> "QuadratureSpec":
        """Defaults scaled to a set of transition frequencies.

        cutoff = 100 max|omega|, epsilon = 1e-3 min nonzero |omega|.
        """
        mags = [abs(w) for w in omegas if w != 0]
        if mags:
            base = dict(cutoff=100.0 * max(mags), epsilon=1e-3 * min(mags))
        else:
            base = {}
        base.update(overrides)
        return cls(**base)

    def with_(self, **changes) -> "QuadratureSpec":
        return replace(self, **changes)

    def check(self, omegas) -> None:
        """Raise if the spec cannot resolve the given transition frequencies."""
        for w in omegas:
            if abs(w) >= self.cutoff:
                raise ValueError(f"cutoff {self.cutoff} must exceed |omega|={abs(w)}")

    def to_dict(self) -> dict:
        return {
            "cutoff": float(self.cutoff),
            "regulator": self.regulator.to_dict(),
            "epsilon": float(self.epsilon),
            "n_nodes": int(self.n_nodes),
            "panel_order": int(self.panel_order),
        }

    @classmethod
    def from_dict(cls, d: dict, base: "QuadratureSpec | None" = None) -> "QuadratureSpec":
        base = base or cls()
        reg = base.regulator
        if "regulator" in d:
            r = d["regulator"]
            reg = Regulator(r.get("type", "sharp"), r.get("scale"))
        return cls(
            cutoff=float(d.get("cutoff", base.cutoff)),
            regulator=reg,
            epsilon=float(d.get("epsilon", base.epsilon)),
            n_nodes=int(d.get("n_nodes", base.n_nodes)),
            panel_order=int(d.get("panel_order", base.panel_order)),
        )


# ---------------------------------------------------------------------------
# elementary functions


def f_kernel(omega, t):
    """``f(omega, t) = (exp(i omega t) - 1) / (i omega)``, equal to ``t`` at omega = 0.

    Equivalent to ``int_0^t exp(i omega s) ds``.  Vectorised over both args.
    """
    om, t = np.broadcast_arrays(np.asarray(omega, dtype=float), np.asarray(t, dtype=float))
    x = om * t
    out = np.empty(om.shape, dtype=complex)
    small = np.abs(x) < SERIES_SWITCH
    xs, ts = x[small], t[small]
    out[small] = ts * (1.0 + xs * (0.5j + xs * (-1.0 / 6.0 + xs * (-1j / 24.0 + xs / 120.0))))
    big = ~small
    xb, ob = x[big], om[big]
    s = np.sin(0.5 * xb)
    # exp(ix) - 1 = i sin x - 2 sin^2(x/2), written without cancellation
    out[big] = (np.sin(xb) + 2j * s * s) / ob
    return out if out.ndim else complex(out)


def f_kernel_dt(omega, t):
    return np.exp(1j * np.asarray(omega, float) * np.asarray(t, float))


def f_kernel_dtt(omega, t):
    omega = np.asarray(omega, float)
    return 1j * omega * np.exp(1j * omega * np.asarray(t, float))


def delta_tau(omega, tau):
    """Finite-time nascent delta ``sin(omega tau/2) / (pi omega)``; ``tau/(2 pi)`` at 0."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    omega = np.asarray(omega, dtype=float)
    out = tau / (2.0 * np.pi) * np.sinc(omega * tau / (2.0 * np.pi))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# panel machinery


@lru_cache(maxsize=None)
def _gl(order: int):
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges, order: int):
    """Nodes and weights of the composite rule with the given panel edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = _gl(order)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    half = 0.5 * (hi - lo)
    om = (half * x + (lo + half)).ravel()
    wt = (half * w).ravel()
    return om, wt


def _merge_edges(a, b, *groups):
    pts = np.concatenate([np.asarray(g, dtype=float).ravel() for g in groups] + [[a, b]])
    pts = pts[(pts >= a) & (pts <= b)]
    pts = np.unique(pts)
    # drop edges that would give degenerate panels
    keep = np.concatenate([[True], np.diff(pts) > 1e-14 * max(abs(b), 1.0)])
    pts = pts[keep]
    pts[-1] = b
    return pts


def uniform_edges(a, b, max_width):
    n = max(1, int(math.ceil((b - a) / max_width)))
    return np.linspace(a, b, n + 1)


def graded_edges(center, width, a, b, ratio=2.0):
    """Edges at ``center +- width * ratio**k`` covering ``[a, b]``."""
    span = max(abs(b - center), abs(center - a))
    if span <= 0:
        return np.array([])
    k_max = int(math.ceil(math.log(max(span / width, 1.0), ratio))) + 1
    steps = width * ratio ** np.arange(-3, k_max + 1)
    return np.concatenate([[center], center - steps, center + steps])


def oscillation_width(t, spec: QuadratureSpec) -> float:
    """Panel width bound resolving ``exp(i omega t)`` on ``[0, cutoff]``."""
    w_osc = math.pi / (4.0 * max(abs(t), 1.0))
    w_cnt = spec.cutoff * spec.panel_order / spec.n_nodes
    return min(w_osc, w_cnt)


def delta_tau_moment(w: Callable, tau: float, half_width: float = 8.0, order: int = 16) -> float:
    """``int_{-L}^{L} delta_tau(om) w(om) d om`` with panels narrower than a quarter period."""
    if not half_width > 0:
        raise ValueError("half_width must be positive")
    edges = uniform_edges(-half_width, half_width, min(math.pi / tau, half_width))
    x, wt = panel_nodes(edges, order)
    return float(np.sum(wt * delta_tau(x, tau) * np.asarray(w(x), dtype=float)))


def oscillatory_nodes(t, spec: QuadratureSpec, breakpoints=()):
    edges = _merge_edges(0.0, spec.cutoff, uniform_edges(0.0, spec.cutoff, oscillation_width(t, spec)),
                         list(breakpoints))
    return panel_nodes(edges, spec.panel_order)


def _finite(vals, what):
    if not np.all(np.isfinite(vals)):
        raise NumericalError(f"non-finite integrand sample in {what}")
    return vals


# ---------------------------------------------------------------------------
# integrals


def regulated_oscillatory_integral(g: Callable, t_r: float, spec: QuadratureSpec) -> complex:
    """``int_0^cutoff g(omega) r(omega) d omega`` for a pole-free ``g``.

    ``g`` is called once with the full node array.  Panels are narrower than
    ``pi / (4 max(|t_r|, 1))``.
    """
    om, wt = oscillatory_nodes(t_r, spec)
    vals = _finite(np.asarray(g(om), dtype=complex) * spec.regulator(om), "oscillatory integral")
    return complex(np.sum(wt * vals))


def principal_value(w: Callable, pole: float, a: float, b: float, spec: QuadratureSpec) -> float:
    """``PV int_a^b w(omega) / (omega - pole) d omega`` by singularity subtraction."""
    width = (b - a) * spec.panel_order / spec.n_nodes
    if not (a < pole < b):
        om, wt = panel_nodes(uniform_edges(a, b, width), spec.panel_order)
        return float(np.sum(wt * _finite(np.asarray(w(om), float) / (om - pole), "PV")))
    wp = float(w(np.array([pole]))[0])
    edges = _merge_edges(a, b, uniform_edges(a, b, width), [pole])
    om, wt = panel_nodes(edges, spec.panel_order)
    q = (np.asarray(w(om), float) - wp) / (om - pole)
    return float(np.sum(wt * _finite(q, "PV"))) + wp * math.log((b - pole) / (pole - a))


def lorentzian_bracket(omega0: float, w: Callable, eps: float, spec: QuadratureSpec) -> complex:
    """``i int_0^cutoff w(om) [1/(om - omega0 + i eps) - 1/(om + omega0 + i eps)] d om``.

    The real part is the nascent-delta (Lorentzian) contribution, the
    imaginary part the regularised principal-value contribution.
    """
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    b = spec.cutoff
    edges = _merge_edges(
        0.0, b,
        uniform_edges(0.0, b, b * spec.panel_order / spec.n_nodes),
        graded_edges(omega0, eps, 0.0, b),
        graded_edges(-omega0, eps, 0.0, b),
    )
    om, wt = panel_nodes(edges, spec.panel_order)
    h = _finite(np.asarray(w(om), dtype=float), "nascent-delta integral")
    re, im = kernels.lorentz_pair_sum(om, wt, h, omega0, eps)
    return complex(re, im)


def richardson(xs, ys):
    """Extrapolate the interpolating polynomial through ``(xs, ys)`` to x = 0.

    Returns ``(value, error)``, the error being the change against the
    extrapolation that drops the point farthest from 0.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    order = np.argsort(np.abs(xs))
    xs, ys = xs[order], ys[order]

    def neville(x, y):
        p = list(y)
        n = len(x)
        for k in range(1, n):
            for i in range(n - k):
                p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i])
        return p[0]

    full = neville(xs, ys)
    if len(xs) < 2:
        return float(full), math.inf
    reduced = neville(xs[:-1], ys[:-1])
    return float(full), float(abs(full - reduced))


@dataclass(frozen=True)
class PVDeltaResult:
    """Retarded-prescription integral with its epsilon sequence.

    ``value`` is the ``eps -> 0`` extrapolation of ``2 Re(bracket)``, i.e.
    the bracket plus its complex conjugate.
    """

    value: float
    error: float
    epsilons: tuple
    raw: tuple
    pv_raw: tuple
    pv_extrapolated: float
    pv_direct: float

    @property
    def pv_mismatch(self) -> float:
        return abs(self.pv_extrapolated - self.pv_direct)


def pv_delta_integral(omega0: float, w: Callable, spec: QuadratureSpec, epsilons=None) -> PVDeltaResult:
    """``i int w [1/(om-omega0+i eps) - 1/(om+omega0+i eps)] + c.c.`` as eps -> 0.

    Tends to ``2 pi sgn(omega0) w(|omega0|)``.  The principal-value part of
    the bracket is extrapolated as well and compared with a direct
    subtraction-based principal value.
    """
    if not (0 < abs(omega0) < spec.cutoff):
        raise ValueError(f"need 0 < |omega0| < cutoff, got omega0={omega0}")
    epsilons = tuple(epsilons) if epsilons is not None else spec.epsilons
    if any(not e > 0 for e in epsilons):
        raise ValueError("epsilon must be positive")
    raw, pv_raw = [], []
    for e in epsilons:
        z = lorentzian_bracket(omega0, w, e, spec)
        raw.append(2.0 * z.real)
        pv_raw.append(z.imag)
    value, err = richardson(epsilons, raw)
    pv_ext, _ = richardson(epsilons, pv_raw)
    b = spec.cutoff
    pv_direct = principal_value(w, omega0, 0.0, b, spec) - principal_value(w, -omega0, 0.0, b, spec)
    return PVDeltaResult(value, err, epsilons, tuple(raw), tuple(pv_raw), pv_ext, pv_direct)


def exp_over_u(lo: float, hi: float, t: float) -> complex:
    """``PV int_lo^hi exp(-i u t) / u du`` via sine and cosine integrals (lo, hi != 0)."""
    if lo == 0.0 or hi == 0.0:
        raise ValueError("endpoint at the pole")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return complex(math.log(abs(hi) / abs(lo)), 0.0)
    si_hi, ci_hi = sici(abs(hi) * t)
    si_lo, ci_lo = sici(abs(lo) * t)
    cos_part = ci_hi - ci_lo
    sin_part = math.copysign(si_hi, hi) - math.copysign(si_lo, lo)
    return complex(cos_part, -sin_part)


PRESCRIPTIONS = ("principal", "retarded", "advanced")


def pole_integral(h: Callable, pole: float, t: float, spec: QuadratureSpec,
                  prescription: str = "principal") -> complex:
    """``int_0^cutoff h(om) exp(-i (om - pole) t) / (om - pole) d om``.

    ``h`` must be smooth and already include the regulator.  A pole inside
    ``(0, cutoff)`` is subtracted and its contribution integrated in closed
    form; ``prescription`` selects the principal value or the ``-+ i pi h``
    half-residue of the ``om - pole +- i0`` displacements.
    """
    if prescription not in PRESCRIPTIONS:
        raise ValueError(f"unknown prescription {prescription!r}")
    b = spec.cutoff
    if pole == 0.0 or pole == b:
        raise ValueError("pole on an integration endpoint")
    inside = 0.0 < pole < b
    om, wt = oscillatory_nodes(t, spec, breakpoints=[pole] if inside else [])
    hv = _finite(np.asarray(h(om), dtype=float), "pole integral")
    if not inside:
        return kernels.direct_sum(om, wt, hv, pole, t)
    hp = float(h(np.array([pole]))[0])
    val = kernels.pole_sum(om, wt, hv, hp, pole, t) + hp * exp_over_u(-pole, b - pole, t)
    if prescription == "retarded":
        val -= 1j * math.pi * hp
    elif prescription == "advanced":
        val += 1j * math.pi * hp
    return val


def sinc_pair_integral(h: Callable, a: float, t: float, spec: QuadratureSpec) -> float:
    """``int_0^cutoff h [sin((om-a)t)/(om-a) - sin((om+a)t)/(om+a)] d om`` (regular integrand)."""
    om, wt = oscillatory_nodes(t, spec, breakpoints=[abs(a)] if 0 < abs(a) < spec.cutoff else [])
    hv = _finite(np.asarray(h(om), dtype=float), "sinc integral")
    return kernels.sinc_pair_sum(om, wt, hv, a, t)


def averaged_sinc_pair_integral(h: Callable, a: float, T: float, spec: QuadratureSpec) -> float:
    """Time average over ``t in [0, T]`` of :func:`sinc_pair_integral`, exact in t."""
    if not T > 0:
        raise ValueError("T must be positive")
    om, wt = oscillatory_nodes(T, spec, breakpoints=[abs(a)] if 0 < abs(a) < spec.cutoff else [])
    hv = _finite(np.asarray(h(om), dtype=float), "averaged sinc integral")
    return kernels.avg_sinc_pair_sum(om, wt, hv, a, T)
