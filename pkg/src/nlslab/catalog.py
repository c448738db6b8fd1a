"""Closed-form solutions and the log-NLS breather.

Every solution is evaluated pointwise by ``evaluate(sol, t, x)`` on an
arbitrary array of x, and on a grid by ``eval_exact``.  Stokes-background
solutions (Peregrine, Kuznetsov-Ma, Akhmediev) are returned in the lab frame,
u -> e^{it}; call ``Field1D.to_gp_frame`` for v = e^{-it} u.

The Satsuma-Yajima breather is evaluated with an extra carrier e^{it}: the
bare quotient does not solve i u_t + u_xx = -|u|^2 u, the product does, and
the modulus (hence every invariant) is the same.
"""

from __future__ import annotations

import enum
import functools
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .equations import time_derivative
from .errors import NearSingularError, OrbitEscaped, ParameterError
from .grid import BackgroundKind, Field1D, Grid1D
from .models import Family, ModelSpec

APERIODIC = "aperiodic"
NON_PERIODIC = "non-periodic"
DEGENERATE = "degenerate/constant"
SINGULAR_GUARD = 1e-14
DEFAULT_ORBIT_SPAN = 40.0


class SolutionKind(str, enum.Enum):
    STANDING_WAVE = "standing-wave"
    SATSUMA_YAJIMA = "satsuma-yajima"
    PEREGRINE = "peregrine"
    KUZNETSOV_MA = "kuznetsov-ma"
    AKHMEDIEV = "akhmediev"
    GAUSSON = "gausson"
    LOG_BREATHER = "log-breather"


_STOKES_KINDS = (SolutionKind.PEREGRINE, SolutionKind.KUZNETSOV_MA, SolutionKind.AKHMEDIEV)


@dataclass(frozen=True)
class ExactSolution:
    """One member of the catalog with its parameters.

    ``omega`` and ``p`` are used by standing waves (``p`` only there), ``a`` by
    Kuznetsov-Ma and Akhmediev, ``omega`` by the Gausson, and ``alpha`` plus
    ``epsilon_branch`` by the log breather.
    """

    kind: SolutionKind
    a: float | None = None
    omega: float | None = None
    p: float | None = None
    alpha: complex | None = None
    epsilon_branch: int = 1

    def __post_init__(self):
        kind = SolutionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is SolutionKind.KUZNETSOV_MA:
            if self.a is None or not self.a > 0.5:
                raise ParameterError(f"Kuznetsov-Ma needs a > 1/2, got a={self.a!r}")
        elif kind is SolutionKind.AKHMEDIEV:
            if self.a is None or not 0 < self.a < 0.5:
                raise ParameterError(f"Akhmediev needs 0 < a < 1/2, got a={self.a!r}")
        elif kind is SolutionKind.STANDING_WAVE:
            object.__setattr__(self, "omega", 1.0 if self.omega is None else float(self.omega))
            object.__setattr__(self, "p", 2.0 if self.p is None else float(self.p))
            if not (self.omega > 0 and self.p > 0):
                raise ParameterError("standing wave needs omega > 0 and p > 0")
        elif kind is SolutionKind.GAUSSON:
            object.__setattr__(self, "omega", 1.0 if self.omega is None else float(self.omega))
        elif kind is SolutionKind.LOG_BREATHER:
            alpha = complex(1.0 if self.alpha is None else self.alpha)
            if not alpha.real > 0:
                raise ParameterError(f"log breather needs Re(alpha) > 0, got {alpha!r}")
            object.__setattr__(self, "alpha", alpha)
            if self.epsilon_branch not in (1, -1):
                raise ParameterError("epsilon_branch must be +1 or -1")

    @property
    def background(self) -> BackgroundKind:
        return BackgroundKind.STOKES if self.kind in _STOKES_KINDS else BackgroundKind.ZERO

    @property
    def model(self) -> ModelSpec:
        """The equation the lab-frame field solves."""
        if self.kind is SolutionKind.STANDING_WAVE:
            return ModelSpec(Family.POWER_NLS, -1, self.p)
        if self.kind in (SolutionKind.GAUSSON, SolutionKind.LOG_BREATHER):
            return ModelSpec(Family.LOG_NLS, -1)
        return ModelSpec(Family.POWER_NLS, -1, 2.0)

    @property
    def gp_model(self) -> ModelSpec:
        """Gross-Pitaevskii model for v = e^{-it} u (Stokes solutions only)."""
        if self.background is not BackgroundKind.STOKES:
            raise ParameterError(f"{self.kind.value} has a zero background")
        return ModelSpec(Family.GROSS_PITAEVSKII, -1, 2.0)

    @property
    def id(self) -> str:
        k = self.kind
        if k is SolutionKind.STANDING_WAVE:
            return f"{k.value}:omega={self.omega!r},p={self.p!r}"
        if k in (SolutionKind.KUZNETSOV_MA, SolutionKind.AKHMEDIEV):
            return f"{k.value}:a={self.a!r}"
        if k is SolutionKind.GAUSSON:
            return f"{k.value}:omega={self.omega!r}"
        if k is SolutionKind.LOG_BREATHER:
            return f"{k.value}:alpha_r={self.alpha.real!r},alpha_i={self.alpha.imag!r}"
        return k.value


def _km_constants(a: float) -> tuple[float, float]:
    return math.sqrt(8 * a * (2 * a - 1)), math.sqrt(2 * (2 * a - 1))


def _akhmediev_constants(a: float) -> tuple[float, float]:
    return math.sqrt(2 * (1 - 2 * a)), math.sqrt(8 * a * (1 - 2 * a))


def _guard(den: np.ndarray, what: str):
    if np.any(np.abs(den) < SINGULAR_GUARD):
        raise NearSingularError(f"near-singular evaluation of {what}: denominator below {SINGULAR_GUARD:g}")


def standing_wave_profile(x, omega: float, p: float) -> np.ndarray:
    """Q_w(x) = w^{1/p} ((p+2)/2)^{1/p} sech^{2/p}(p sqrt(w) x / 2)."""
    x = np.asarray(x, dtype=float)
    # sech via exp(-|y|) keeps large |x| finite
    y = np.abs(0.5 * p * math.sqrt(omega) * x)
    sech = 2.0 * np.exp(-y) / (1.0 + np.exp(-2.0 * y))
    return omega ** (1 / p) * ((p + 2) / 2) ** (1 / p) * sech ** (2 / p)


def evaluate(sol: ExactSolution, t: float, x) -> np.ndarray:
    """Lab-frame u(t, x) at the given points."""
    x = np.asarray(x, dtype=float)
    k = sol.kind
    if k is SolutionKind.STANDING_WAVE:
        return np.exp(1j * sol.omega * t) * standing_wave_profile(x, sol.omega, sol.p)
    if k is SolutionKind.SATSUMA_YAJIMA:
        # divide through by cosh(4x) so nothing overflows at large |x|
        c4 = np.cosh(np.minimum(np.abs(4 * x), 700.0))
        num = 4 * math.sqrt(2) * (np.cosh(3 * x) / c4 + 3 * np.exp(8j * t) * np.cosh(x) / c4)
        den = 1.0 + 4 * np.cosh(2 * x) / c4 + 3 * math.cos(8 * t) / c4
        _guard(den * c4, "Satsuma-Yajima")
        return np.exp(1j * t) * num / den
    if k is SolutionKind.PEREGRINE:
        den = 1 + 4 * t**2 + 2 * x**2
        _guard(den, "Peregrine")
        return np.exp(1j * t) * (1 - 4 * (1 + 2j * t) / den)
    if k is SolutionKind.KUZNETSOV_MA:
        alpha, beta = _km_constants(sol.a)
        den = alpha * np.cosh(beta * x) - math.sqrt(2) * beta * math.cos(alpha * t)
        _guard(den, "Kuznetsov-Ma")
        num = beta**2 * math.cos(alpha * t) + 1j * alpha * math.sin(alpha * t)
        return np.exp(1j * t) * (1 - math.sqrt(2) * beta * num / den)
    if k is SolutionKind.AKHMEDIEV:
        alpha, beta = _akhmediev_constants(sol.a)
        den = math.sqrt(2 * sol.a) * np.cos(alpha * x) - math.cosh(beta * t)
        _guard(den, "Akhmediev")
        num = alpha**2 * math.cosh(beta * t) + 1j * beta * math.sinh(beta * t)
        return np.exp(1j * t) * (1 + num / den)
    if k is SolutionKind.GAUSSON:
        return np.exp(1j * sol.omega * t + (sol.omega + 1) / 2 - x**2 / 2)
    if k is SolutionKind.LOG_BREATHER:
        orbit = _cached_orbit(sol.alpha, sol.epsilon_branch, _span_for(t))
        return _breather_values(orbit, t, x)
    raise ParameterError(f"unknown solution kind {k!r}")


@dataclass(frozen=True)
class Transform:
    """Symmetry image u -> e^{i theta} lam^{2/p} u(lam^2 t, lam (x - shift))."""

    shift: float = 0.0
    phase: float = 0.0
    scale: float = 1.0


def eval_exact(sol: ExactSolution, t: float, grid: Grid1D, transform: Transform | None = None) -> Field1D:
    """Evaluate a catalog solution (or a symmetry image of it) on a grid."""
    tr = transform or Transform()
    if tr.scale <= 0:
        raise ParameterError("scale must be positive")
    if tr.scale != 1.0 and sol.kind in (SolutionKind.GAUSSON, SolutionKind.LOG_BREATHER):
        raise ParameterError("scaling is not a symmetry of the logarithmic equation")
    if sol.background is BackgroundKind.STOKES and (tr.scale != 1.0 or tr.phase != 0.0):
        raise ParameterError("only translations preserve the Stokes background e^{it}")
    lam = tr.scale
    p = sol.model.p if sol.model.family is Family.POWER_NLS else 2.0
    x = lam * (grid.x - tr.shift)
    vals = np.exp(1j * tr.phase) * lam ** (2 / p) * evaluate(sol, lam**2 * t, x)
    tol = None if sol.kind is SolutionKind.AKHMEDIEV else 1e-2
    return Field1D(grid, vals, sol.background, t, "lab", boundary_tol=tol)


def exact_period(sol: ExactSolution) -> float | str:
    """Main period in time, or ``APERIODIC``.

    For the log breather this is the period detected on its r_alpha orbit,
    which may also be ``DEGENERATE`` or ``NON_PERIODIC``.
    """
    k = sol.kind
    if k is SolutionKind.SATSUMA_YAJIMA:
        return math.pi / 4
    if k is SolutionKind.KUZNETSOV_MA:
        return 2 * math.pi / _km_constants(sol.a)[0]
    if k in (SolutionKind.STANDING_WAVE, SolutionKind.GAUSSON):
        return 2 * math.pi / abs(sol.omega) if sol.omega else DEGENERATE
    if k is SolutionKind.LOG_BREATHER:
        return _cached_orbit(sol.alpha, sol.epsilon_branch, DEFAULT_ORBIT_SPAN).period
    return APERIODIC


def period_phase(sol: ExactSolution) -> float:
    """theta with u(t + T) = e^{i theta} u(t), T = exact_period(sol)."""
    T = exact_period(sol)
    if isinstance(T, str):
        raise ParameterError(f"{sol.id} has no period ({T})")
    k = sol.kind
    if k is SolutionKind.SATSUMA_YAJIMA or k is SolutionKind.KUZNETSOV_MA:
        return T
    if k is SolutionKind.LOG_BREATHER:
        orbit = _cached_orbit(sol.alpha, sol.epsilon_branch, DEFAULT_ORBIT_SPAN)
        return -orbit.state(T)[2]
    return 0.0


def centered_time_derivative(fn, t: float, dt: float):
    """Fourth-order centered difference of fn at t with step dt."""
    return (fn(t - 2 * dt) - 8 * fn(t - dt) + 8 * fn(t + dt) - fn(t + 2 * dt)) / (12 * dt)


def pde_residual(sol: ExactSolution, t: float, grid: Grid1D, dt: float = 1e-5, interior: float = 0.125,
                 transform: Transform | None = None) -> float:
    """Sup over interior nodes of |u_t(five-point difference) - u_t(equation)|.

    ``interior`` is the fraction of nodes dropped at each edge; it keeps the
    check away from the box boundary, where a truncated Stokes field is not
    periodic.
    """
    f = eval_exact(sol, t, grid, transform)
    ut = centered_time_derivative(lambda s: eval_exact(sol, s, grid, transform).values, t, dt)
    r = np.abs(ut - time_derivative(sol.model, f))
    cut = int(grid.points * interior)
    return float(r[cut: grid.points - cut].max())


# -- log-NLS breather --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RAlphaOrbit:
    """Solution of r'' = 1/r^3 - 2b/r with the phase Phi accumulated alongside.

    ``b`` is ``epsilon_branch``.  Samples are the integrator's accepted steps
    over [t_min, t_max]; ``state(t)`` interpolates the dense output.
    """

    alpha: complex
    epsilon_branch: int
    times: np.ndarray
    r: np.ndarray
    rdot: np.ndarray
    phi: np.ndarray
    period: float | str
    t_min: float
    t_max: float
    _pieces: tuple = field(default=(), repr=False)

    def state(self, t: float) -> tuple[float, float, float]:
        """(r, r', Phi) at time t."""
        if not self.t_min <= t <= self.t_max:
            raise ParameterError(f"t={t} outside the integrated span [{self.t_min}, {self.t_max}]")
        if not self._pieces:
            return float(self.r[0]), 0.0, float(self.phi[0])
        for lo, hi, sol in self._pieces:
            if lo <= t <= hi:
                y = sol(t)
                return float(y[0]), float(y[1]), float(y[2])
        raise ParameterError(f"t={t} not covered")


def _orbit_rhs(b: float, alpha_r: float):
    def rhs(t, y):
        r, v, _ = y
        return [v, 1 / r**3 - 2 * b / r, 0.5 / r**2 + b * math.log(r / alpha_r) - b]
    return rhs


def _escape_events():
    def hit_zero(t, y):
        return y[0] - 1e-12
    hit_zero.terminal = True

    def overflow(t, y):
        return y[0] - 1e12
    overflow.terminal = True
    return [hit_zero, overflow]


def solve_r_alpha(alpha: complex, epsilon_branch: int = 1, t_max: float = DEFAULT_ORBIT_SPAN,
                  tol: float = 1e-10) -> RAlphaOrbit:
    """Integrate the r_alpha ODE on [-t_max, t_max] with DOP853.

    On the branch b = -1 the force 1/r^3 + 2/r is positive everywhere, so
    once r' >= 0 the radius grows without bound; that moment is reported as
    the escape time.  Raises ``OrbitEscaped`` also when r hits zero or
    overflows numerically.
    """
    alpha = complex(alpha)
    r0, v0 = alpha.real, alpha.imag
    if not r0 > 0:
        raise ParameterError(f"need Re(alpha) > 0, got {alpha!r}")
    if not (tol > 0 and t_max > 0):
        raise ParameterError("tol and t_max must be positive")
    b = int(epsilon_branch)
    if b not in (1, -1):
        raise ParameterError("epsilon_branch must be +1 or -1")
    rhs = _orbit_rhs(b, r0)
    rtol = min(tol, 1e-12)
    y0 = [r0, v0, 0.0]

    if b == -1:
        if v0 >= 0:
            raise OrbitEscaped("orbit escaped: r is increasing and the force is positive everywhere", 0.0)
        def turn(t, y):
            return y[1]
        turn.terminal = True
        turn.direction = 1
        s = solve_ivp(rhs, (0, t_max), y0, method="DOP853", rtol=rtol, atol=rtol,
                      events=[turn, *_escape_events()])
        t_esc = float(s.t[-1])
        raise OrbitEscaped(f"orbit escaped: r' turns non-negative at t={t_esc:.6g} and the force is positive", t_esc)

    r_star = 1 / math.sqrt(2 * b)
    if abs(r0 - r_star) <= tol and abs(v0) <= tol:
        ts = np.array([-t_max, 0.0, t_max])
        phi = ts * (0.5 / r0**2 + b * math.log(r0 / r0) - b)
        return RAlphaOrbit(alpha, b, ts, np.full(3, r0), np.zeros(3), phi, DEGENERATE, -t_max, t_max)

    if v0 != 0:
        def section(t, y):
            return y[0] - r0
        section.direction = math.copysign(1, v0)
    else:
        def section(t, y):
            return y[1]
        section.direction = math.copysign(1, 1 / r0**3 - 2 * b / r0)

    fwd = solve_ivp(rhs, (0, t_max), y0, method="DOP853", rtol=rtol, atol=rtol,
                    dense_output=True, events=[section, *_escape_events()])
    bwd = solve_ivp(rhs, (0, -t_max), y0, method="DOP853", rtol=rtol, atol=rtol,
                    dense_output=True, events=_escape_events())
    for s in (fwd, bwd):
        if s.status == 1:
            raise OrbitEscaped("orbit escaped: r reached zero or overflowed", float(s.t[-1]))
        if s.status < 0:
            raise OrbitEscaped(f"orbit integration failed: {s.message}", float(s.t[-1]))

    period: float | str = NON_PERIODIC
    for te, ye in zip(fwd.t_events[0], fwd.y_events[0]):
        # the section passes through the initial point, skip that crossing
        if te > 1e-6:
            if abs(ye[0] - r0) + abs(ye[1] - v0) < tol:
                period = float(te)
            break

    times = np.concatenate([bwd.t[:0:-1], fwd.t])
    ys = np.concatenate([bwd.y[:, :0:-1], fwd.y], axis=1)
    if np.any(ys[0] <= 0):
        raise OrbitEscaped("orbit escaped: r reached zero", float(times[np.argmax(ys[0] <= 0)]))
    pieces = ((0.0, t_max, fwd.sol), (-t_max, 0.0, bwd.sol))
    return RAlphaOrbit(alpha, b, times, ys[0], ys[1], ys[2], period, -t_max, t_max, pieces)


def _span_for(t: float) -> float:
    span = DEFAULT_ORBIT_SPAN
    while abs(t) > span:
        span *= 2
    return span


@functools.lru_cache(maxsize=64)
def _cached_orbit(alpha: complex, branch: int, span: float) -> RAlphaOrbit:
    return solve_r_alpha(alpha, branch, span)


def _breather_values(orbit: RAlphaOrbit, t: float, x: np.ndarray) -> np.ndarray:
    r, v, phi = orbit.state(t)
    ar = orbit.alpha.real
    expo = 0.5 - 1j * phi - x**2 / (4 * r**2) + 1j * (v / r) * x**2 / 4
    return math.sqrt(ar / r) * np.exp(expo)


def eval_log_breather(orbit: RAlphaOrbit, t: float, grid: Grid1D) -> Field1D:
    """Assemble u^alpha(t, .) from the orbit's r, r', Phi at time t."""
    return Field1D(grid, _breather_values(orbit, t, grid.x), BackgroundKind.ZERO, t)


# -- registry ----------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    domain: str
    background: BackgroundKind
    period: str
    example: str


CATALOG = (
    CatalogEntry("standing-wave", "omega > 0, p > 0", BackgroundKind.ZERO, "2*pi/omega", "standing-wave:omega=1,p=2"),
    CatalogEntry("satsuma-yajima", "none", BackgroundKind.ZERO, "pi/4", "satsuma-yajima"),
    CatalogEntry("peregrine", "none", BackgroundKind.STOKES, APERIODIC, "peregrine"),
    CatalogEntry("kuznetsov-ma", "a > 1/2", BackgroundKind.STOKES, "2*pi/sqrt(8a(2a-1))", "kuznetsov-ma:a=1.0"),
    CatalogEntry("akhmediev", "0 < a < 1/2", BackgroundKind.STOKES, APERIODIC, "akhmediev:a=0.25"),
    CatalogEntry("gausson", "omega real", BackgroundKind.ZERO, "2*pi/|omega|", "gausson:omega=1"),
    CatalogEntry("log-breather", "Re(alpha) > 0", BackgroundKind.ZERO, "period of r_alpha",
                 "log-breather:alpha_r=0.8,alpha_i=0"),
)

_ID = re.compile(r"^\s*([a-z\-]+)\s*(?::(.*))?$")


def parse_solution_id(text: str) -> ExactSolution:
    """Parse ids such as ``kuznetsov-ma:a=1.0`` or ``log-breather:alpha=0.8+0.1j``."""
    m = _ID.match(text)
    if not m:
        raise ParameterError(f"malformed solution id {text!r}")
    try:
        kind = SolutionKind(m.group(1))
    except ValueError:
        raise ParameterError(f"unknown solution {m.group(1)!r}") from None
    params: dict[str, str] = {}
    if m.group(2):
        for item in m.group(2).split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise ParameterError(f"expected key=value in {text!r}, got {item!r}")
            params[key.strip()] = val.strip()
    known = {"a", "omega", "p", "alpha", "alpha_r", "alpha_i", "branch"}
    unknown = set(params) - known
    if unknown:
        raise ParameterError(f"unknown parameters {sorted(unknown)} in {text!r}")
    try:
        kw = {k: float(params[k]) for k in ("a", "omega", "p") if k in params}
        if "alpha" in params:
            kw["alpha"] = complex(params["alpha"].replace(" ", ""))
        elif "alpha_r" in params:
            kw["alpha"] = complex(float(params["alpha_r"]), float(params.get("alpha_i", 0.0)))
        if "branch" in params:
            kw["epsilon_branch"] = int(params["branch"])
    except ValueError as exc:
        raise ParameterError(f"bad number in {text!r}: {exc}") from None
    if kind is SolutionKind.KUZNETSOV_MA and "a" not in kw:
        kw["a"] = 1.0
    if kind is SolutionKind.AKHMEDIEV and "a" not in kw:
        kw["a"] = 0.25
    if kind is SolutionKind.LOG_BREATHER and "alpha" not in kw:
        kw["alpha"] = complex(0.8, 0.0)
    return ExactSolution(kind, **kw)


def default_grid(sol: ExactSolution) -> Grid1D:
    """A grid on which the solution is resolved and its boundary criterion holds.

    The Akhmediev box holds exactly two spatial periods, so the periodic
    extension is the solution itself.
    """
    k = sol.kind
    if k is SolutionKind.PEREGRINE:
        return Grid1D(2000.0, 2**16)
    if k is SolutionKind.KUZNETSOV_MA:
        return Grid1D(40.0, 4096)
    if k is SolutionKind.AKHMEDIEV:
        return Grid1D(2 * math.pi / _akhmediev_constants(sol.a)[0], 1024)
    if k is SolutionKind.STANDING_WAVE:
        return Grid1D(30.0, 1024)
    return Grid1D(20.0, 2048)


def list_catalog() -> str:
    """Plain-text table of catalog entries."""
    rows = [("id", "parameters", "background", "period", "example")]
    for e in CATALOG:
        rows.append((e.name, e.domain, e.background.value, e.period, e.example))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"
