"""Uniform periodic 1-D grids, complex fields and spectral calculus.

Everything downstream (closed-form solutions, invariants, virial identities,
time stepping) is evaluated on a ``Grid1D``: N equispaced points covering the
periodic box [-L, L).  Integrals use the periodic rectangle rule, which is
spectrally accurate for smooth integrands that decay (or are periodic) at the
box edge, and derivatives are taken by multiplying Fourier coefficients by
(ik)^order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BackgroundMismatch, NonFiniteError, ParameterError

DEFAULT_BOUNDARY_TOL = 1e-2


@dataclass(frozen=True)
class Grid1D:
    """N equispaced nodes x_j = -L + j*dx on the periodic box [-L, L).

    Attributes:
        length: half-width L of the box.
        points: number of nodes N, a power of two no smaller than 16.
    """

    length: float
    points: int

    def __post_init__(self):
        n = self.points
        if not isinstance(n, (int, np.integer)) or n < 16 or n & (n - 1):
            raise ParameterError(f"grid points must be a power of two >= 16, got {n!r}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ParameterError(f"grid half-width must be positive, got {self.length!r}")
        object.__setattr__(self, "points", int(n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        # N is a power of two, so this division is exact
        return 2.0 * self.length / self.points

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.length + self.dx * np.arange(self.points)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        k = 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.dx)
        k.setflags(write=False)
        return k

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping the lowest two thirds of |k| (2/3 rule)."""
        kmax = np.abs(self.k).max()
        m = np.abs(self.k) <= (2.0 / 3.0) * kmax
        m.setflags(write=False)
        return m


class BackgroundKind(enum.Enum):
    ZERO = "zero"
    STOKES = "stokes"


@dataclass(frozen=True, eq=False)
class Field1D:
    """Complex samples of u(t, .) on a grid.

    For a Stokes background the samples tend to the plane wave at the box edge.
    ``frame`` says which plane wave: ``"lab"`` means u -> e^{it} (the
    physical field), ``"gp"`` means the Gross-Pitaevskii frame v = e^{-it} u
    with v -> 1.  Zero-background fields always use ``"lab"``.
    """

    grid: Grid1D
    values: np.ndarray
    background: BackgroundKind = BackgroundKind.ZERO
    time: float = 0.0
    frame: str = "lab"
    boundary_tol: float | None = field(default=DEFAULT_BOUNDARY_TOL, repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.points,):
            raise ParameterError(f"field has shape {v.shape}, grid expects ({self.grid.points},)")
        if not np.all(np.isfinite(v)):
            raise NonFiniteError("field contains non-finite samples")
        if self.frame not in ("lab", "gp"):
            raise ParameterError(f"unknown frame {self.frame!r}")
        if self.background is BackgroundKind.ZERO and self.frame != "lab":
            raise ParameterError("zero-background fields live in the lab frame")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.background is BackgroundKind.STOKES and self.boundary_tol is not None:
            edge = np.abs(np.abs(v[[0, -1]]) - 1.0).max()
            if edge > self.boundary_tol:
                raise BackgroundMismatch(
                    f"Stokes field has |u| off by {edge:.3g} from 1 at the box edge "
                    f"(tolerance {self.boundary_tol:.3g})"
                )

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def replace(self, values=None, time=None, **kw) -> "Field1D":
        return Field1D(
            grid=self.grid,
            values=self.values if values is None else values,
            background=kw.get("background", self.background),
            time=self.time if time is None else time,
            frame=kw.get("frame", self.frame),
            boundary_tol=kw.get("boundary_tol", self.boundary_tol),
        )

    def background_value(self) -> complex:
        """The constant (in x) plane-wave value the field tends to."""
        if self.background is BackgroundKind.ZERO:
            return 0.0
        if self.frame == "gp":
            return 1.0
        return complex(np.exp(1j * self.time))

    def decaying_part(self) -> np.ndarray:
        return self.values - self.background_value()

    def to_gp_frame(self) -> "Field1D":
        """Remove the Stokes phase: v = e^{-it} u."""
        if self.background is not BackgroundKind.STOKES:
            raise BackgroundMismatch("only Stokes fields have a Gross-Pitaevskii frame")
        if self.frame == "gp":
            return self
        return self.replace(values=self.values * np.exp(-1j * self.time), frame="gp")


def quadrature(samples, grid: Grid1D) -> float:
    """Periodic rectangle rule dx * sum(samples)."""
    s = np.asarray(samples)
    if s.shape != (grid.points,):
        raise ParameterError(f"samples have shape {s.shape}, grid expects ({grid.points},)")
    if not np.all(np.isfinite(s)):
        raise NonFiniteError("non-finite integrand")
    if np.iscomplexobj(s):
        s = s.real
    return float(grid.dx * math.fsum(s))


def tail_integral(samples, grid: Grid1D, power: float = 2.0) -> float:
    """Analytic integral over |x| > L of the algebraic tail c/|x|^power.

    The coefficient c is read off separately at each edge from the outermost
    sample, so the correction follows whatever leading-order tail the field
    actually has.
    """
    if power <= 1:
        raise ParameterError("tail power must exceed 1 for the tail to be integrable")
    s = np.asarray(samples).real
    x = grid.x
    total = 0.0
    for j in (0, -1):
        xb = abs(x[j])
        c = s[j] * xb**power
        # the rectangle rule already covers up to +-L
        total += c * grid.length ** (1.0 - power) / (power - 1.0)
    return total


def quadrature_with_tail(samples, grid: Grid1D, power: float = 2.0) -> float:
    return quadrature(samples, grid) + tail_integral(samples, grid, power)


def derivative(values, grid: Grid1D, order: int = 1) -> np.ndarray:
    """(d/dx)^order of a periodic array by Fourier multiplication."""
    if order not in (1, 2, 3, 4):
        raise ParameterError(f"derivative order must be 1..4, got {order!r}")
    vhat = np.fft.fft(values)
    k = grid.k
    if order % 2 == 1:
        # the Nyquist mode has no well-defined odd derivative
        k = k.copy()
        k[grid.points // 2] = 0.0
    return np.fft.ifft((1j * k) ** order * vhat)


def spectral_derivative(f: Field1D, order: int) -> Field1D:
    """Spectral derivative of a field.

    The Stokes plane wave is subtracted first (its x-derivative is zero), so
    the transform only ever sees a decaying function.  The result decays, so
    it is returned with a zero background.
    """
    if order not in (1, 2, 4):
        raise ParameterError(f"spectral_derivative supports orders 1, 2, 4; got {order!r}")
    d = derivative(f.decaying_part(), f.grid, order)
    return Field1D(f.grid, d, BackgroundKind.ZERO, f.time)


def boundary_magnitude(samples, width: int = 1) -> float:
    s = np.abs(np.asarray(samples))
    return float(max(s[:width].max(), s[-width:].max()))
