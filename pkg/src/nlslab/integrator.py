"""Pseudospectral time stepping for the six families on a 1-D periodic grid.

Potential-type families (the nonlinearity is a real potential times u) use
Strang splitting.  Both sub-flows are solved exactly: the linear part by a
Fourier multiplier, the nonlinear part as a pointwise phase, since |u| is
constant along it.  Derivative NLS uses fourth-order Runge-Kutta on the
Fourier coefficients with an integrating factor for the dispersion.

Gross-Pitaevskii fields are advanced as w = v - 1 so the FFT only sees a
decaying function.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import functionals as fn
from . import virial_identities as vi
from .equations import DEFAULT_LOG_FLOOR, linear_symbol, potential
from .errors import BlowUpDetected, DecayError, ParameterError
from .grid import BackgroundKind, Field1D
from .models import Family, ModelSpec

MAX_SPLIT_STEP = 0.1
DNLS_CFL = 1.0
BLOWUP_HIGH_MODE_FRACTION = 1e-6


class Scheme(str, enum.Enum):
    STRANG = "StrangSplit"
    RK4 = "RK4Pseudospectral"


@dataclass(frozen=True)
class EvolveConfig:
    """Time-stepping parameters.

    ``t_end`` is absolute; the field's own time is the start.  A negative
    ``dt`` runs backwards.  ``scheme`` and ``dealias`` default per family:
    RK4 and dealiasing for derivative NLS, dealiasing for p >= 4.  A run is
    declared blown up when max|u| exceeds ``blowup_factor`` times its initial
    value or the upper half of the spectrum holds more than a 1e-6 fraction
    of the power.
    """

    dt: float
    t_end: float
    sample_stride: int = 1
    scheme: Scheme | None = None
    log_floor: float = DEFAULT_LOG_FLOOR
    dealias: bool | None = None
    blowup_factor: float = 100.0

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt != 0):
            raise ParameterError(f"dt must be finite and nonzero, got {self.dt!r}")
        if abs(self.dt) > MAX_SPLIT_STEP:
            raise ParameterError(f"|dt| = {abs(self.dt)} exceeds the stability bound {MAX_SPLIT_STEP}")
        if not math.isfinite(self.t_end):
            raise ParameterError("t_end must be finite")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ParameterError("sample_stride must be a positive integer")
        if self.scheme is not None:
            object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.log_floor > 0:
            raise ParameterError("log_floor must be positive")

    def scheme_for(self, model: ModelSpec) -> Scheme:
        if model.family is Family.DERIVATIVE_NLS:
            if self.scheme is Scheme.STRANG:
                raise ParameterError("derivative NLS cannot be split into pointwise phases; use RK4Pseudospectral")
            return Scheme.RK4
        return self.scheme or Scheme.STRANG

    def dealias_for(self, model: ModelSpec) -> bool:
        if self.dealias is not None:
            return self.dealias
        return model.family is Family.DERIVATIVE_NLS or (
            model.family in (Family.POWER_NLS, Family.GROSS_PITAEVSKII, Family.BIHARMONIC) and model.p >= 4)


class _Stepper:
    """Array-level stepping state for one trajectory."""

    def __init__(self, f: Field1D, model: ModelSpec, dt: float, cfg: EvolveConfig):
        if model.n != 1:
            raise ParameterError("grid evolution is one-dimensional")
        gp = model.family is Family.GROSS_PITAEVSKII
        if gp != (f.background is BackgroundKind.STOKES):
            raise ParameterError("Gross-Pitaevskii runs need a Stokes field and vice versa")
        if gp:
            f = f.to_gp_frame()
        self.field0 = f
        self.model = model
        self.grid = f.grid
        self.dt = dt
        self.cfg = cfg
        self.gp = gp
        self.scheme = cfg.scheme_for(model)
        self.mask = self.grid.dealias_mask if cfg.dealias_for(model) else None
        self.w = np.array(f.decaying_part())
        self.t = f.time
        self.clamps = 0
        k = self.grid.k
        if self.scheme is Scheme.STRANG:
            self.lin = np.exp(-1j * linear_symbol(model, k) * dt)
        else:
            self.half = np.exp(-1j * k**2 * dt / 2)
            self.full = self.half**2
            self.ik = 1j * k.copy()
            self.ik[self.grid.points // 2] = 0.0
            amp = float(np.abs(f.values).max())
            if abs(dt) * np.abs(k).max() * max(amp, 1.0) ** 2 > DNLS_CFL:
                raise ParameterError(
                    f"dt={dt} violates the derivative-NLS bound |dt| k_max max|u|^2 <= {DNLS_CFL}")

    @property
    def values(self) -> np.ndarray:
        return self.w + 1.0 if self.gp else self.w

    def _phase(self, h: float):
        u = self.values
        if self.model.family is Family.LOG_NLS:
            self.clamps += int(np.count_nonzero(np.abs(u) < self.cfg.log_floor))
        u = u * np.exp(-1j * h * potential(self.model, u, self.cfg.log_floor))
        self.w = u - 1.0 if self.gp else u

    def _dnls_rhs(self, what: np.ndarray) -> np.ndarray:
        u = np.fft.ifft(what)
        out = self.model.epsilon * self.ik * np.fft.fft(np.abs(u) ** 2 * u)
        return out * self.mask if self.mask is not None else out

    def step(self):
        dt = self.dt
        if self.scheme is Scheme.STRANG:
            self._phase(dt / 2)
            what = np.fft.fft(self.w) * self.lin
            if self.mask is not None:
                what *= self.mask
            self.w = np.fft.ifft(what)
            self._phase(dt / 2)
        else:
            E, E2 = self.half, self.full
            u = np.fft.fft(self.w)
            a = self._dnls_rhs(u)
            b = self._dnls_rhs(E * (u + dt / 2 * a))
            c = self._dnls_rhs(E * u + dt / 2 * b)
            d = self._dnls_rhs(E2 * u + dt * E * c)
            self.w = np.fft.ifft(E2 * u + dt / 6 * (E2 * a + 2 * E * (b + c) + d))
        self.t += dt

    def field(self) -> Field1D:
        f0 = self.field0
        return Field1D(self.grid, self.values, f0.background, self.t, f0.frame, boundary_tol=f0.boundary_tol)

    def blown_up(self, peak0: float, spectral: bool = True) -> str:
        u = self.values
        if not np.all(np.isfinite(u)):
            return "non-finite samples"
        peak = float(np.abs(u).max())
        if peak > self.cfg.blowup_factor * max(peak0, 1e-300):
            return f"max|u| grew from {peak0:.3g} to {peak:.3g}"
        if not spectral:
            return ""
        spec = np.abs(np.fft.fft(self.w)) ** 2
        k = np.abs(self.grid.k)
        total = spec.sum()
        if total > 0:
            frac = spec[k > 0.5 * k.max()].sum() / total
            if frac > BLOWUP_HIGH_MODE_FRACTION:
                return f"unresolved: {frac:.3g} of the spectral power sits in the upper half of the band"
        return ""


def step(f: Field1D, model: ModelSpec, dt: float, cfg: EvolveConfig | None = None) -> Field1D:
    """Advance one step of size dt.  Stokes fields come back in the GP frame."""
    cfg = cfg or EvolveConfig(dt=dt, t_end=f.time + dt)
    s = _Stepper(f, model, dt, cfg)
    s.step()
    reason = s.blown_up(float(np.abs(f.values).max()))
    if reason:
        raise BlowUpDetected(f.time, f, None, reason)
    return s.field()


# -- diagnostics ------------------------------------------------------------


def virial_name(model: ModelSpec) -> str:
    if model.family is Family.DERIVATIVE_NLS:
        return "int x|u|^2"
    if model.family is Family.GROSS_PITAEVSKII:
        return "Im int x vbar v_x"
    return "Im int x ubar u_x"


def measure_virial(f: Field1D, model: ModelSpec) -> float:
    fam = model.family
    if fam is Family.DERIVATIVE_NLS:
        return fn.virial_dnls(f)
    if fam is Family.GROSS_PITAEVSKII:
        return fn.virial_P_nz_reduced(f)
    return fn.virial_P_tilde(f)


def virial_rhs(f: Field1D, model: ModelSpec) -> float:
    fam = model.family
    if fam is Family.POWER_NLS:
        return vi.rhs_power_nls(f, model)
    if fam is Family.GROSS_PITAEVSKII:
        return vi.rhs_gp_nz(f, model)
    if fam is Family.CUBIC_QUINTIC:
        return vi.rhs_cubic_quintic(f, model)
    if fam is Family.BIHARMONIC:
        return vi.rhs_biharmonic(f, model)
    if fam is Family.DERIVATIVE_NLS:
        return vi.rhs_dnls(f, model)
    return vi.rhs_log_nls(f, model)


def monotone_fraction(series) -> float:
    """Share of consecutive increments that carry the majority sign."""
    d = np.diff(np.asarray(series, dtype=float))
    if d.size == 0:
        return 1.0
    return max(int(np.count_nonzero(d > 0)), int(np.count_nonzero(d < 0))) / d.size


@dataclass
class TrajectoryDiagnostics:
    """Samples along one simulated orbit.

    ``center_intensity`` is |u|^2 at the node nearest x = 0 and ``peak`` is
    max |u|.  ``final`` is the last field reached.
    """

    model: ModelSpec
    times: np.ndarray
    reports: list
    virial: np.ndarray
    virial_rhs: np.ndarray
    peak: np.ndarray
    center_intensity: np.ndarray
    final: Field1D | None = None
    blowup_time: float | None = None
    blowup_reason: str = ""
    clamp_count: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def monotone_fraction(self) -> float:
        return monotone_fraction(self.virial)

    def series(self, key: str) -> np.ndarray:
        if key == "virial":
            return np.asarray(self.virial)
        if key == "virial_rhs":
            return np.asarray(self.virial_rhs)
        if key == "peak":
            return np.asarray(self.peak)
        if key == "center_intensity":
            return np.asarray(self.center_intensity)
        vals = [r.get(key) for r in self.reports]
        if any(v is None for v in vals):
            raise KeyError(f"{key!r} was not recorded on this trajectory")
        return np.asarray(vals, dtype=float)

    def recorded_keys(self) -> list[str]:
        return [k for k in fn.REPORT_KEYS if self.reports and all(r.get(k) is not None for r in self.reports)]

    def drift(self, key: str) -> float:
        return fn.conservation_drift(self, key)

    def drifts(self) -> dict:
        conserved = ("m", "e", "p", "m_nz", "e_nz", "p_nz", "dnls_h")
        if self.model.family is Family.DERIVATIVE_NLS:
            # Im int ubar u_x is not an invariant of derivative NLS; H is
            conserved = ("m", "e", "dnls_h")
        return {k: self.drift(k) for k in self.recorded_keys() if k in conserved} if len(self.reports) > 1 else {}

    def detect_period(self, key: str = "center_intensity") -> float:
        """Mean spacing of the interior maxima of a cubic-spline fit to a series."""
        t = np.asarray(self.times)
        y = self.series(key)
        if len(t) < 5:
            raise ParameterError("too few samples to detect a period")
        sp = CubicSpline(t, y)
        roots = sp.derivative().roots(extrapolate=False)
        second = sp.derivative(2)
        maxima = [r for r in roots if second(r) < 0 and t[0] < r < t[-1]]
        if len(maxima) < 2:
            raise ParameterError(f"series {key!r} has fewer than two maxima in the sampled window")
        return float(np.mean(np.diff(maxima)))

    def to_csv(self, path=None) -> str:
        keys = list(fn.REPORT_KEYS)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *keys, "virial"])
        for t, r, v in zip(self.times, self.reports, self.virial):
            row = [_fmt(t)] + ["" if r.get(k) is None else _fmt(r.get(k)) for k in keys] + [_fmt(v)]
            w.writerow(row)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def summary(self) -> dict:
        return {
            "model": self.model.as_dict(),
            "samples": len(self.times),
            "t_start": float(self.times[0]) if len(self.times) else None,
            "t_final": float(self.times[-1]) if len(self.times) else None,
            "drifts": self.drifts(),
            "monotone_fraction": self.monotone_fraction,
            "virial": virial_name(self.model),
            "blowup_time": self.blowup_time,
            "blowup_reason": self.blowup_reason or None,
            "log_clamp_count": self.clamp_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _sample(f: Field1D, model: ModelSpec, acc: dict):
    report = fn.invariants(f, model)
    acc["times"].append(f.time)
    acc["reports"].append(report)
    try:
        acc["virial"].append(measure_virial(f, model))
    except DecayError:
        acc["virial"].append(float("nan"))
    acc["rhs"].append(virial_rhs(f, model))
    acc["peak"].append(float(np.abs(f.values).max()))
    j = int(np.argmin(np.abs(f.x)))
    acc["center"].append(float(np.abs(f.values[j]) ** 2))


def _diagnostics(model, acc, final, clamps, t_blow=None, reason="") -> TrajectoryDiagnostics:
    return TrajectoryDiagnostics(
        model=model,
        times=np.asarray(acc["times"]),
        reports=acc["reports"],
        virial=np.asarray(acc["virial"]),
        virial_rhs=np.asarray(acc["rhs"]),
        peak=np.asarray(acc["peak"]),
        center_intensity=np.asarray(acc["center"]),
        final=final,
        blowup_time=t_blow,
        blowup_reason=reason,
        clamp_count=clamps,
        extra={"grad_l2_0": acc.get("grad0")},
    )


def evolve(f0: Field1D, model: ModelSpec, cfg: EvolveConfig) -> TrajectoryDiagnostics:
    """Advance f0 to cfg.t_end, sampling every ``sample_stride`` steps.

    The final step count is (t_end - t0)/dt, which must be a whole number.
    On blow-up raises ``BlowUpDetected`` carrying the trajectory so far.
    """
    span = cfg.t_end - f0.time
    nsteps_f = span / cfg.dt
    nsteps = int(round(nsteps_f))
    if nsteps < 0 or abs(nsteps - nsteps_f) > 1e-6 * max(1.0, abs(nsteps_f)):
        raise ParameterError(f"(t_end - t0)/dt = {nsteps_f} is not a non-negative whole number")
    s = _Stepper(f0, model, cfg.dt, cfg)
    acc = {"times": [], "reports": [], "virial": [], "rhs": [], "peak": [], "center": []}
    start = s.field()
    _sample(start, model, acc)
    acc["grad0"] = math.sqrt(fn.grad_norm_sq(start)) if start.background is BackgroundKind.ZERO else None
    peak0 = float(np.abs(start.values).max())
    for i in range(1, nsteps + 1):
        prev_w, prev_t = s.w, s.t
        s.step()
        if i == nsteps:
            # land exactly on t_end
            s.t = f0.time + nsteps * cfg.dt
        sample = i % cfg.sample_stride == 0 or i == nsteps
        reason = s.blown_up(peak0, spectral=sample)
        if reason:
            s.w, s.t = prev_w, prev_t
            last = s.field()
            traj = _diagnostics(model, acc, last, s.clamps, prev_t + cfg.dt, reason)
            raise BlowUpDetected(prev_t + cfg.dt, last, traj, reason)
        if sample:
            _sample(s.field(), model, acc)
    final = s.field() if nsteps else start
    return _diagnostics(model, acc, final, s.clamps)
