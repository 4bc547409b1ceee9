"""NumPy reference implementations of the frequency-quadrature kernels.

Every function takes quadrature nodes ``om``, weights ``wt`` and the smooth
part of the integrand ``h`` sampled on the nodes, and returns the weighted
sum.  The compiled module ``_ckernels`` exposes the same functions with the
same signatures.
"""

import numpy as np


def _sinc_t(u, t):
    # sin(u t) / u with the u -> 0 limit t
    out = np.empty_like(u)
    small = u == 0.0
    big = ~small
    out[big] = np.sin(u[big] * t) / u[big]
    out[small] = t
    return out


def _avg_sinc(u, T):
    # (1/T) int_0^T sin(u t)/u dt = 2 sin^2(u T / 2) / (u^2 T)
    out = np.empty_like(u)
    small = u == 0.0
    big = ~small
    s = np.sin(0.5 * u[big] * T)
    out[big] = 2.0 * s * s / (u[big] * u[big] * T)
    out[small] = 0.5 * T
    return out


def pole_sum(om, wt, h, h_pole, pole, t):
    u = om - pole
    q = (h - h_pole) / u
    phase = u * t
    re = np.sum(wt * q * np.cos(phase))
    im = -np.sum(wt * q * np.sin(phase))
    return complex(re, im)


def direct_sum(om, wt, h, pole, t):
    u = om - pole
    q = h / u
    phase = u * t
    re = np.sum(wt * q * np.cos(phase))
    im = -np.sum(wt * q * np.sin(phase))
    return complex(re, im)


def sinc_pair_sum(om, wt, h, a, t):
    return float(np.sum(wt * h * (_sinc_t(om - a, t) - _sinc_t(om + a, t))))


def avg_sinc_pair_sum(om, wt, h, a, T):
    return float(np.sum(wt * h * (_avg_sinc(om - a, T) - _avg_sinc(om + a, T))))


def lorentz_pair_sum(om, wt, h, w0, eps):
    u = om - w0
    v = om + w0
    du = u * u + eps * eps
    dv = v * v + eps * eps
    re = np.sum(wt * h * (eps / du - eps / dv))
    im = np.sum(wt * h * (u / du - v / dv))
    return float(re), float(im)
