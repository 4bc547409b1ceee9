"""Polarization triads, polarization sums and product-rule sphere quadrature."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

DEFAULT_SPHERE_ORDER = (32, 64)


@dataclass(frozen=True)
class PolarizationTriad:
    """Right-handed orthonormal triad ``e1 x e2 = xhat``."""

    e1: np.ndarray
    e2: np.ndarray
    xhat: np.ndarray

    def polarizations(self):
        return (self.e1, self.e2)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0 or not np.isfinite(n):
        raise ValueError("direction must be a finite non-zero 3-vector")
    return v / n


def triad_for(xhat) -> PolarizationTriad:
    """Triad ``(theta_hat, phi_hat, xhat)``.

    On the z axis (where phi is undefined) the Cartesian pair that continues
    the spherical convention at phi = 0 is used: ``(x, y)`` at the north
    pole and ``(-x, y)`` at the south pole.
    """
    r = unit(xhat)
    x, y, z = r
    rho = np.hypot(x, y)
    if rho == 0.0:
        s = 1.0 if z > 0 else -1.0
        return PolarizationTriad(np.array([s, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), r)
    e2 = np.array([-y / rho, x / rho, 0.0])
    # theta_hat = phi_hat x xhat, i.e. (z x, z y, -rho^2)/rho for unit input
    e1 = np.cross(e2, r)
    e1 /= np.linalg.norm(e1)
    return PolarizationTriad(e1, e2, r)


def transverse_norm2(d, xhat) -> float:
    """``|d|^2 - |xhat . d|^2`` (completeness form of the polarization sum)."""
    d = np.asarray(d, dtype=complex)
    r = unit(xhat)
    proj = np.dot(r, d)
    return float(np.vdot(d, d).real - (proj * np.conj(proj)).real)


def polarization_sum(d, xhat) -> float:
    """``sum_lambda |e_lambda(xhat) . d|^2`` over the two transverse polarizations.

    Evaluated with the explicit triad and cross-checked against the
    completeness form ``|d|^2 - |xhat.d|^2``.
    """
    d = np.asarray(d, dtype=complex)
    tri = triad_for(xhat)
    a = np.dot(tri.e1, d)
    b = np.dot(tri.e2, d)
    explicit = float((a * np.conj(a)).real + (b * np.conj(b)).real)
    compl = transverse_norm2(d, tri.xhat)
    scale = float(np.vdot(d, d).real)
    if abs(explicit - compl) > 1e-12 * max(scale, 1e-300) + 1e-300:
        raise ArithmeticError("polarization completeness violated")
    return explicit


def polarization_sums(d, xhats: np.ndarray) -> np.ndarray:
    """Completeness form evaluated on an ``(N, 3)`` array of unit directions."""
    d = np.asarray(d, dtype=complex)
    proj = xhats @ d
    return np.vdot(d, d).real - (proj * np.conj(proj)).real


@dataclass(frozen=True)
class SphericalGrid:
    """Gauss-Legendre in cos(theta) times uniform trapezoid in phi."""

    directions: np.ndarray
    weights: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    order: tuple[int, int]

    def __len__(self):
        return len(self.weights)


def sphere_grid(n_theta: int = DEFAULT_SPHERE_ORDER[0], n_phi: int = DEFAULT_SPHERE_ORDER[1]) -> SphericalGrid:
    if n_theta < 1 or n_phi < 1:
        raise ValueError("sphere order must be positive")
    mu, wmu = leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wphi = np.full(n_phi, 2.0 * np.pi / n_phi)
    mu_g, phi_g = np.meshgrid(mu, phi, indexing="ij")
    w = np.outer(wmu, wphi).ravel()
    s = np.sqrt(1.0 - mu_g**2)
    dirs = np.stack([s * np.cos(phi_g), s * np.sin(phi_g), mu_g], axis=-1).reshape(-1, 3)
    for arr in (dirs, w):
        arr.setflags(write=False)
    return SphericalGrid(dirs, w, np.arccos(mu_g).ravel(), phi_g.ravel(), (n_theta, n_phi))


def integrate_sphere(f, grid: SphericalGrid, vectorized: bool = False) -> float:
    """``sum_i w_i f(xhat_i)``.

    With ``vectorized=True`` ``f`` receives the whole ``(N, 3)`` direction
    array and must return ``N`` values.
    """
    if vectorized:
        vals = np.asarray(f(grid.directions), dtype=float)
    else:
        vals = np.array([f(x) for x in grid.directions], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite integrand on sphere grid")
    return float(np.sum(grid.weights * vals))
