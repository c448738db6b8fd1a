"""Right-hand sides of the six evolution equations.

Each family is written as ``i u_t = A u + N(u)`` with ``A`` a Fourier
multiplier and ``N`` the nonlinearity.  For every family except DNLS the
nonlinearity is a real potential times u, which the splitting scheme
integrates exactly as a pointwise phase.
"""

from __future__ import annotations

import numpy as np

from .grid import Field1D, derivative
from .models import Family, ModelSpec

DEFAULT_LOG_FLOOR = 1e-12


def linear_symbol(model: ModelSpec, k: np.ndarray) -> np.ndarray:
    """Dispersion relation w(k): the linear flow is u_hat -> exp(-i w(k) t) u_hat."""
    if model.family is Family.BIHARMONIC:
        return model.mu * k**2 + k**4
    return k**2


def potential(model: ModelSpec, values: np.ndarray, log_floor: float = DEFAULT_LOG_FLOOR) -> np.ndarray:
    """Real potential V(|u|^2) with N(u) = V u (not defined for DNLS)."""
    rho = np.abs(values) ** 2
    fam = model.family
    eps = model.epsilon
    if fam in (Family.POWER_NLS, Family.BIHARMONIC):
        return eps * rho ** (model.p / 2)
    if fam is Family.GROSS_PITAEVSKII:
        return eps * (rho ** (model.p / 2) - 1.0)
    if fam is Family.CUBIC_QUINTIC:
        return model.lambda1 * rho - model.lambda2 * rho**2
    if fam is Family.LOG_NLS:
        return eps * np.log(np.maximum(rho, log_floor**2))
    raise ValueError(f"{fam.value} has no pointwise potential")


def time_derivative(model: ModelSpec, f: Field1D, log_floor: float = DEFAULT_LOG_FLOOR) -> np.ndarray:
    """u_t predicted by the model equation at the field's samples."""
    grid = f.grid
    w = f.decaying_part()
    u = f.values
    if model.family is Family.DERIVATIVE_NLS:
        cubic = np.abs(u) ** 2 * u
        return 1j * derivative(w, grid, 2) + model.epsilon * derivative(cubic, grid, 1)
    what = np.fft.fft(w)
    lin = np.fft.ifft(linear_symbol(model, grid.k) * what)
    return -1j * (lin + potential(model, u, log_floor) * u)
