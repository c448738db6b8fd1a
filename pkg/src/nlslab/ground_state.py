"""Ground states of -Delta Q + w Q - Q^{p+1} = 0.

In one dimension the profile is known in closed form.  The iterative solver
uses Petviashvili's stabilized fixed-point iteration

    Q <- S^g (-Delta + w)^{-1} Q^{p+1},   S = <(-Delta + w) Q, Q> / <Q^{p+1}, Q>,

with g = (p+1)/p.  For n = 2 the radial Laplacian Q'' + Q'/r is discretized
on the half-shifted nodes r_j = (j + 1/2) h by Fourier differentiation of the
even extension, so r = 0 is never a node and the symmetry condition Q'(0) = 0
holds by construction.  Radial integrals use Gauss-Legendre quadrature of the
trigonometric interpolant.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import functionals as fn
from .catalog import standing_wave_profile
from .errors import ConvergenceError, ParameterError
from .grid import BackgroundKind, Field1D, Grid1D, derivative

MAX_ITERATIONS = 5000


@dataclass(frozen=True)
class GroundStateResult:
    """A converged ground state and its norms.

    ``profile`` holds Q(|x|) on a 1-D grid; for n = 2 it is a slice through
    the radial profile and ``radius``/``radial_values`` hold the solver's own
    nodes.  ``norms`` has ``mass`` (|Q|_2^2), ``grad_sq``, ``lp``
    (|Q|_{p+2}^{p+2}) and ``energy`` in n dimensions.
    """

    profile: Field1D
    p: float
    n: int
    omega_eff: float
    residual: float
    l2_norm: float
    norms: dict
    iterations: int = 0
    radius: np.ndarray | None = field(default=None, repr=False)
    radial_values: np.ndarray | None = field(default=None, repr=False)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.radius is not None:
            w.writerow(["r", "Q"])
            rows = zip(self.radius, self.radial_values)
        else:
            w.writerow(["x", "Q"])
            rows = zip(self.profile.x, self.profile.values.real)
        for a, b in rows:
            w.writerow([format(float(a), ".17g"), format(float(b), ".17g")])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _check(p: float, omega: float):
    if not p > 0:
        raise ParameterError(f"need p > 0, got {p}")
    if not omega > 0:
        raise ParameterError(f"need omega > 0, got {omega}")


def _norms_1d(f: Field1D, p: float) -> dict:
    g = fn.grad_norm_sq(f)
    lp = fn.lp_norm_pow(f, p + 2)
    return {"mass": fn.mass(f), "grad_sq": g, "lp": lp, "energy": g - 2 / (p + 2) * lp}


def elliptic_residual_1d(q: np.ndarray, grid: Grid1D, p: float, omega: float) -> float:
    r = -derivative(q, grid, 2).real + omega * q - np.abs(q) ** p * q
    return float(np.abs(r).max())


def _result_1d(q: np.ndarray, grid: Grid1D, p: float, omega: float, iterations: int) -> GroundStateResult:
    f = Field1D(grid, q, BackgroundKind.ZERO, 0.0)
    norms = _norms_1d(f, p)
    return GroundStateResult(f, p, 1, omega, elliptic_residual_1d(q, grid, p, omega), math.sqrt(norms["mass"]),
                             norms, iterations)


def ground_state_1d_exact(p: float, omega: float, grid: Grid1D) -> GroundStateResult:
    """Q_w(x) = w^{1/p} ((p+2)/2)^{1/p} sech^{2/p}(p sqrt(w) x / 2)."""
    _check(p, omega)
    return _result_1d(standing_wave_profile(grid.x, omega, p), grid, p, omega, 0)


def _petviashvili(apply_inv, apply_op, inner, q, p, omega, residual, tol, max_iter):
    gamma = (p + 1) / p
    res = residual(q)
    for it in range(1, max_iter + 1):
        nl = np.abs(q) ** p * q
        s = inner(apply_op(q), q) / inner(nl, q)
        q = s**gamma * apply_inv(nl)
        res = residual(q)
        if not np.isfinite(res):
            raise ConvergenceError("ground-state iteration diverged", res)
        if res < tol:
            return q, res, it
    raise ConvergenceError(f"ground-state iteration did not converge in {max_iter} steps: residual {res:.3g}", res)


def _solve_1d(p, omega, grid, tol, max_iter):
    sym = grid.k**2 + omega
    q0 = np.exp(-grid.x**2)

    def op(q):
        return np.fft.ifft(sym * np.fft.fft(q)).real

    def inv(g):
        return np.fft.ifft(np.fft.fft(g) / sym).real

    def inner(a, b):
        return float(np.dot(a, b))

    q, res, it = _petviashvili(inv, op, inner, q0, p, omega,
                               lambda q: elliptic_residual_1d(q, grid, p, omega), tol, max_iter)
    return _result_1d(q, grid, p, omega, it)


class _RadialGrid:
    """Half-shifted radial nodes with a dense Fourier radial Laplacian."""

    def __init__(self, radius: float, points: int):
        if points < 16:
            raise ParameterError("radial grid needs at least 16 nodes")
        self.R = float(radius)
        self.M = int(points)
        h = self.R / self.M
        self.h = h
        self.r = (np.arange(self.M) + 0.5) * h
        n2 = 2 * self.M
        # even extension lives on x_j = -R + (j + 1/2) h, j = 0 .. 2M-1
        self.k = 2 * np.pi * np.fft.fftfreq(n2, d=h)
        eye = np.eye(n2)
        kk = self.k.copy()
        kk[self.M] = 0.0
        d1 = np.fft.ifft(1j * kk[:, None] * np.fft.fft(eye, axis=0), axis=0).real
        d2 = np.fft.ifft(-(self.k[:, None] ** 2) * np.fft.fft(eye, axis=0), axis=0).real
        right = slice(self.M, n2)
        # column j of the half-grid operator acts on the even extension of e_j
        fold = np.zeros((n2, self.M))
        fold[self.M + np.arange(self.M), np.arange(self.M)] = 1.0
        fold[self.M - 1 - np.arange(self.M), np.arange(self.M)] = 1.0
        self.lap = (d2[right] + d1[right] / self.r[:, None]) @ fold

    def extend(self, q: np.ndarray) -> np.ndarray:
        return np.concatenate([q[::-1], q])

    def interpolate(self, q: np.ndarray, y: np.ndarray, order: int = 0) -> np.ndarray:
        """Trigonometric interpolant of the even extension (or its derivative) at points y."""
        ext = self.extend(q)
        coef = np.fft.fft(ext) / ext.size
        x0 = -self.R + 0.5 * self.h
        k = self.k.copy()
        if order % 2:
            k[self.M] = 0.0
        phase = np.exp(1j * np.outer(y - x0, self.k))
        return (phase @ ((1j * k) ** order * coef)).real

    def integrate(self, q: np.ndarray, p: float, panels: int = 64, order: int = 16) -> dict:
        xg, wg = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(0.0, self.R, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        y = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        w = (half[:, None] * wg[None, :]).ravel() * 2 * np.pi * y
        qv = self.interpolate(q, y)
        dq = self.interpolate(q, y, 1)
        mass = float(w @ qv**2)
        grad = float(w @ dq**2)
        lp = float(w @ np.abs(qv) ** (p + 2))
        return {"mass": mass, "grad_sq": grad, "lp": lp, "energy": grad - 2 / (p + 2) * lp}


def _solve_radial(p, omega, grid: Grid1D, tol, max_iter):
    rg = _RadialGrid(grid.length, grid.points // 2)
    A = -rg.lap + omega * np.eye(rg.M)
    lu = lu_factor(A)
    wts = rg.r * rg.h

    def residual(q):
        return float(np.abs(A @ q - np.abs(q) ** p * q).max())

    q, res, it = _petviashvili(lambda g: lu_solve(lu, g), lambda q: A @ q, lambda a, b: float(np.dot(a * wts, b)),
                               np.exp(-rg.r**2), p, omega, residual, tol, max_iter)
    norms = rg.integrate(q, p)
    slice_vals = rg.interpolate(q, np.abs(grid.x))
    prof = Field1D(grid, slice_vals, BackgroundKind.ZERO, 0.0)
    return GroundStateResult(prof, p, 2, omega, res, math.sqrt(norms["mass"]), norms, it, rg.r, q)


def ground_state_imag_time(p: float, n: int, omega_eff: float, grid: Grid1D, tol: float = 1e-10,
                           max_iter: int = MAX_ITERATIONS) -> GroundStateResult:
    """Iterative ground state for n = 1 or n = 2 (radial, on [0, grid.length]).

    Converged when the sup-norm elliptic residual drops below ``tol``.
    """
    _check(p, omega_eff)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    if n == 1:
        return _solve_1d(p, omega_eff, grid, tol, max_iter)
    if n == 2:
        return _solve_radial(p, omega_eff, grid, tol, max_iter)
    raise ParameterError(f"ground states are computed for n = 1 or 2, got n = {n}")


# -- thresholds -------------------------------------------------------------


def critical_omega(p: float, n: int) -> float:
    """w_eff = 1 - s_c, s_c = n/2 - 2/p."""
    return 1 - (n / 2 - 2 / p)


@dataclass(frozen=True)
class Thresholds:
    """Ground-state quantities the classifier compares against."""

    p: float
    n: int
    omega_eff: float
    mass: float
    energy: float
    grad_l2: float
    l2_norm: float
    residual: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def thresholds_from(result: GroundStateResult) -> Thresholds:
    nm = result.norms
    return Thresholds(result.p, result.n, result.omega_eff, nm["mass"], nm["energy"], math.sqrt(nm["grad_sq"]),
                      result.l2_norm, result.residual)


class ThresholdCache:
    """Ground-state thresholds keyed by (p, n, w_eff, N, L), with a JSON sidecar.

    Lookups by (p, n, w_eff) alone return the entry with the most grid points.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = path
        self._entries: dict[str, dict] = {}
        self._lock = threading.Lock()
        if path is not None and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                self._entries = json.load(fh)

    @staticmethod
    def key(p, n, omega, points, length) -> str:
        return f"p={float(p)!r},n={int(n)},omega={float(omega)!r},N={int(points)},L={float(length)!r}"

    def put(self, th: Thresholds, grid: Grid1D):
        with self._lock:
            self._entries[self.key(th.p, th.n, th.omega_eff, grid.points, grid.length)] = th.to_dict()

    def get(self, p, n, omega=None) -> Thresholds | None:
        omega = critical_omega(p, n) if omega is None else omega
        best = None
        for k, v in self._entries.items():
            if v["n"] == n and math.isclose(v["p"], p, rel_tol=1e-12) and math.isclose(v["omega_eff"], omega,
                                                                                         rel_tol=1e-12):
                pts = int(k.split("N=")[1].split(",")[0])
                if best is None or pts > best[0]:
                    best = (pts, v)
        return Thresholds(**best[1]) if best else None

    def save(self, path=None):
        path = path or self.path
        if path is None:
            raise ParameterError("no sidecar path given")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self._entries, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def __len__(self):
        return len(self._entries)


def compute_thresholds(p: float, n: int, grid: Grid1D | None = None, omega: float | None = None,
                       cache: ThresholdCache | None = None, tol: float = 1e-10) -> Thresholds:
    """Solve for the ground state at (p, n) and record its thresholds."""
    omega = critical_omega(p, n) if omega is None else omega
    grid = grid or (Grid1D(30.0, 1024) if n == 1 else Grid1D(20.0, 512))
    th = thresholds_from(ground_state_imag_time(p, n, omega, grid, tol))
    if cache is not None:
        cache.put(th, grid)
    return th
