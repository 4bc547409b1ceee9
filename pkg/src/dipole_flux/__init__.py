"""Radiated energy flux of quantum and classical electric dipoles."""

__version__ = "0.1.0"

from .spectrum import DipoleSpectrum, Level, SpectrumError, gamma_rate, load, real_flux, validate  # noqa: E402
from .quadrature import NumericalError, QuadratureSpec, Regulator  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "BACKEND",
    "DipoleSpectrum",
    "Level",
    "NumericalError",
    "QuadratureSpec",
    "Regulator",
    "SpectrumError",
    "__version__",
    "gamma_rate",
    "load",
    "real_flux",
    "validate",
]
