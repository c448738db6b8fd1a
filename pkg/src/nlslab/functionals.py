"""Conserved quantities and virial functionals by quadrature.

Zero-background fields use the plain invariants.  Stokes-background fields
are moved to the Gross-Pitaevskii frame v = e^{-it} u and measured with the
renormalized invariants, which integrate v - 1 and |v|^2 - 1.  Derivatives
are always taken of the decaying part.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .catalog import standing_wave_profile
from .errors import BackgroundMismatch, DecayError, NonFiniteError, ParameterError
from .grid import BackgroundKind, Field1D, derivative, quadrature, quadrature_with_tail
from .models import Family, ModelSpec

VIRIAL_DECAY_TOL = 1e-8
VARIANCE_DECAY_TOL = 1e-12
PSI_DECAY_TOL = 1e-10
EXPONENTIAL_EDGE = 1e-12
REPORT_KEYS = ("m", "e", "p", "m_nz", "e_nz", "p_nz", "p_tilde", "variance", "dnls_h", "psi")


@dataclass(frozen=True)
class InvariantReport:
    """Measured functionals of one field; entries that do not apply are None.

    For a Stokes field ``p_tilde`` holds the background virial
    Im int x (vbar - 1) v_x.
    """

    m: float | None = None
    e: float | None = None
    p: float | None = None
    m_nz: float | None = None
    e_nz: float | None = None
    p_nz: float | None = None
    p_tilde: float | None = None
    variance: float | None = None
    dnls_h: float | None = None
    psi: float | None = None

    def __post_init__(self):
        for k, v in asdict(self).items():
            if v is not None:
                v = float(v)
                if not math.isfinite(v):
                    raise NonFiniteError(f"invariant {k} is not finite")
                object.__setattr__(self, k, v)

    def get(self, key: str) -> float | None:
        if key not in REPORT_KEYS:
            raise KeyError(f"unknown invariant {key!r}; expected one of {', '.join(REPORT_KEYS)}")
        return getattr(self, key)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in REPORT_KEYS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _require(f: Field1D, kind: BackgroundKind):
    if f.background is not kind:
        raise BackgroundMismatch(f"expected a {kind.value}-background field, got {f.background.value}")


def _edge(samples) -> float:
    s = np.abs(np.asarray(samples))
    return float(max(s[0], s[-1]))


# -- zero background -------------------------------------------------------


def mass(f: Field1D) -> float:
    return quadrature(np.abs(f.values) ** 2, f.grid)


def momentum(f: Field1D) -> float:
    u = f.values
    return quadrature(np.imag(derivative(u, f.grid, 1) * np.conj(u)), f.grid)


def grad_norm_sq(f: Field1D) -> float:
    return quadrature(np.abs(derivative(f.decaying_part(), f.grid, 1)) ** 2, f.grid)


def lp_norm_pow(f: Field1D, power: float) -> float:
    """int |u|^power."""
    return quadrature(np.abs(f.values) ** power, f.grid)


def energy(f: Field1D, model: ModelSpec) -> float:
    """Family energy of a zero-background field."""
    _require(f, BackgroundKind.ZERO)
    grid = f.grid
    u = f.values
    ux = derivative(u, grid, 1)
    rho = np.abs(u) ** 2
    g2 = quadrature(np.abs(ux) ** 2, grid)
    fam = model.family
    eps = model.epsilon
    if fam is Family.POWER_NLS:
        return g2 + 2 * eps / (model.p + 2) * quadrature(rho ** (model.p / 2 + 1), grid)
    if fam is Family.CUBIC_QUINTIC:
        return g2 + quadrature(model.lambda1 / 2 * rho**2 - model.lambda2 / 3 * rho**3, grid)
    if fam is Family.BIHARMONIC:
        uxx = derivative(u, grid, 2)
        return (quadrature(np.abs(uxx) ** 2, grid) + model.mu * g2
                + 2 * eps / (model.p + 2) * quadrature(rho ** (model.p / 2 + 1), grid))
    if fam is Family.DERIVATIVE_NLS:
        # Hamiltonian of i u_t + u_xx - i eps (|u|^2 u)_x = 0
        return g2 + quadrature(-1.5 * eps * np.imag(rho * np.conj(u) * ux) + 0.5 * rho**3, grid)
    if fam is Family.LOG_NLS:
        rlogr = np.where(rho > 0, rho * np.log(np.where(rho > 0, rho, 1.0)), 0.0)
        return g2 + eps * quadrature(rlogr, grid)
    raise ParameterError(f"{fam.value} fields have a Stokes background; use invariants_nonzero_bc")


def dnls_h(f: Field1D, model: ModelSpec) -> float:
    """H = -Im int ubar u_x + (eps/2) int |u|^4."""
    u = f.values
    ux = derivative(u, f.grid, 1)
    return (-quadrature(np.imag(np.conj(u) * ux), f.grid)
            + 0.5 * model.epsilon * quadrature(np.abs(u) ** 4, f.grid))


def virial_P_tilde(f: Field1D) -> float:
    """Im int x ubar u_x."""
    _require(f, BackgroundKind.ZERO)
    u = f.values
    ux = derivative(u, f.grid, 1)
    edge = _edge(f.x * np.abs(u) * np.abs(ux))
    if edge > VIRIAL_DECAY_TOL:
        raise DecayError(f"virial weight unbounded: |x u u_x| = {edge:.3g} at the box edge")
    return quadrature(f.x * np.imag(np.conj(u) * ux), f.grid)


def virial_dnls(f: Field1D) -> float:
    """V = int x |u|^2, the virial used for derivative NLS."""
    _require(f, BackgroundKind.ZERO)
    rho = np.abs(f.values) ** 2
    edge = _edge(f.x * rho)
    if edge > VIRIAL_DECAY_TOL:
        raise DecayError(f"virial weight unbounded: |x|u|^2| = {edge:.3g} at the box edge")
    return quadrature(f.x * rho, f.grid)


def variance(f: Field1D) -> float:
    """int x^2 |u|^2."""
    _require(f, BackgroundKind.ZERO)
    w = f.x**2 * np.abs(f.values) ** 2
    if _edge(w) > VARIANCE_DECAY_TOL:
        raise DecayError(f"variance integrand x^2|u|^2 = {_edge(w):.3g} at the box edge")
    return quadrature(w, f.grid)


def _logcosh(y: np.ndarray) -> np.ndarray:
    a = np.abs(y)
    return a + np.log1p(np.exp(-2 * a)) - math.log(2)


def weighted_virial_psi(z: Field1D, omega: float) -> float:
    """Im int cosh(sqrt(omega) x) z dx, with the weight applied in log space."""
    if not omega > 0:
        raise ParameterError("omega must be positive")
    zr = np.asarray(z.decaying_part())
    mag = np.abs(zr)
    lw = _logcosh(math.sqrt(omega) * z.x)
    with np.errstate(divide="ignore"):
        logprod = np.log(mag) + lw
    edge = float(np.exp(max(logprod[0], logprod[-1])))
    if edge > PSI_DECAY_TOL:
        raise DecayError(f"weight overwhelms decay: |z| cosh(sqrt(w) L) = {edge:.3g} at the box edge")
    weighted = np.where(mag > 0, np.exp(logprod) * np.sin(np.angle(zr)), 0.0)
    return quadrature(weighted, z.grid)


def standing_wave_deviation(f: Field1D, omega: float, p: float) -> Field1D:
    """z = e^{-i omega t} u - Q_omega."""
    q = standing_wave_profile(f.x, omega, p)
    return f.replace(values=np.exp(-1j * omega * f.time) * f.values - q)


def invariants_zero_bc(f: Field1D, model: ModelSpec, psi_omega: float | None = None) -> InvariantReport:
    """Mass, energy, momentum and the virials of a decaying field.

    The virial and the variance are left as None when the field does not
    decay fast enough for their weights.  ``psi_omega`` requests psi for the
    deviation from the standing wave of frequency psi_omega.
    """
    _require(f, BackgroundKind.ZERO)
    if model.family is Family.GROSS_PITAEVSKII:
        raise BackgroundMismatch("Gross-Pitaevskii fields carry a Stokes background")
    try:
        pt = virial_P_tilde(f)
    except DecayError:
        pt = None
    try:
        var = variance(f)
    except DecayError:
        var = None
    psi = None
    if psi_omega is not None:
        if model.family is not Family.POWER_NLS:
            raise ParameterError("psi is defined around power-NLS standing waves")
        psi = weighted_virial_psi(standing_wave_deviation(f, psi_omega, model.p), psi_omega)
    return InvariantReport(
        m=mass(f),
        e=energy(f, model),
        p=momentum(f),
        p_tilde=pt,
        variance=var,
        dnls_h=dnls_h(f, model) if model.family is Family.DERIVATIVE_NLS else None,
        psi=psi,
    )


# -- Stokes background -----------------------------------------------------


def _gp(f: Field1D) -> Field1D:
    _require(f, BackgroundKind.STOKES)
    return f.to_gp_frame()


def nz_quadrature(v: Field1D, tail: bool | None = None):
    """Quadrature choice for a GP-frame field: tail-corrected when it decays algebraically."""
    slow = _edge(v.values - 1.0) > EXPONENTIAL_EDGE
    if tail is None:
        tail = slow
    elif tail and not slow:
        warnings.warn("tail correction requested for an exponentially decaying field", stacklevel=3)
    if tail:
        return lambda s: quadrature_with_tail(s, v.grid, 2.0)
    return lambda s: quadrature(s, v.grid)


def _gp_power(model: ModelSpec | None) -> tuple[int, int]:
    if model is None:
        return -1, 1
    if model.family is not Family.GROSS_PITAEVSKII:
        raise ParameterError(f"expected a Gross-Pitaevskii model, got {model.family.value}")
    return model.epsilon, model.q


def energy_nz(f: Field1D, model: ModelSpec | None = None, tail: bool | None = None) -> float:
    """int |v_x|^2 + 2 eps/(p+2) (|v|^{p+2} - 1 - (p+2)/2 (|v|^2 - 1)).

    For p = 2, eps = -1 this is int |v_x|^2 - (|v|^2 - 1)^2 / 2.
    """
    v = _gp(f)
    eps, q = _gp_power(model)
    quad = nz_quadrature(v, tail)
    s = np.abs(v.values) ** 2 - 1
    # (1+s)^{q+1} - 1 - (q+1) s written as a sum of powers of s, exactly zero at s = 0
    pot = sum(math.comb(q + 1, k) * s**k for k in range(2, q + 2))
    vx = derivative(v.decaying_part(), v.grid, 1)
    return quad(np.abs(vx) ** 2 + eps / (q + 1) * pot)


def energy_nz_lemma(f: Field1D, model: ModelSpec | None = None, tail: bool | None = None) -> float:
    """int |grad v|^2 - 2 eps/(p+2) (1 - |v|^{p+2}), the energy of the virial lemma.

    Equals energy_nz + eps * m_nz.
    """
    eps, _ = _gp_power(model)
    return energy_nz(f, model, tail) + eps * mass_nz(f, tail)


def mass_nz(f: Field1D, tail: bool | None = None) -> float:
    v = _gp(f)
    return nz_quadrature(v, tail)(np.abs(v.values) ** 2 - 1)


def momentum_nz(f: Field1D, tail: bool | None = None) -> float:
    """Im int (vbar - 1) v_x."""
    v = _gp(f)
    w = v.decaying_part()
    return nz_quadrature(v, tail)(np.imag(np.conj(w) * derivative(w, v.grid, 1)))


def virial_P_nz(f: Field1D, tail: bool | None = None) -> float:
    """Im int x (vbar - 1) v_x."""
    v = _gp(f)
    w = v.decaying_part()
    integrand = v.x * np.imag(np.conj(w) * derivative(w, v.grid, 1))
    if tail is False and _edge(integrand) > VIRIAL_DECAY_TOL:
        raise DecayError(f"virial weight unbounded: {_edge(integrand):.3g} at the box edge")
    return nz_quadrature(v, tail)(integrand)


def virial_P_nz_reduced(f: Field1D, tail: bool | None = None) -> float:
    """Im int x vbar v_x, the functional whose derivative the binomial lemma gives.

    Differs from virial_P_nz by Im int x v_x.
    """
    v = _gp(f)
    w = v.decaying_part()
    return nz_quadrature(v, tail)(v.x * np.imag(np.conj(v.values) * derivative(w, v.grid, 1)))


def invariants_nonzero_bc(f: Field1D, model: ModelSpec | None = None, tail: bool | None = None) -> InvariantReport:
    """Renormalized mass, energy, momentum and virial of a Stokes field.

    ``tail=None`` applies the algebraic tail correction exactly when v - 1 has
    not decayed at the box edge (the Peregrine case).
    """
    v = _gp(f)
    return InvariantReport(
        m_nz=mass_nz(v, tail),
        e_nz=energy_nz(v, model, tail),
        p_nz=momentum_nz(v, tail),
        p_tilde=virial_P_nz(v, tail),
    )


def invariants(f: Field1D, model: ModelSpec, **kw) -> InvariantReport:
    """Dispatch on the field's background."""
    if f.background is BackgroundKind.STOKES:
        return invariants_nonzero_bc(f, model if model.family is Family.GROSS_PITAEVSKII else None, kw.get("tail"))
    return invariants_zero_bc(f, model, kw.get("psi_omega"))


def conservation_drift(traj, key: str) -> float:
    """max_k |X_k - X_0| / max(1, |X_0|) over a trajectory's reports."""
    if key not in REPORT_KEYS:
        raise KeyError(f"unknown invariant {key!r}")
    reports = traj.reports
    if len(reports) < 2:
        raise ParameterError("drift needs at least two samples")
    vals = [r.get(key) for r in reports]
    if any(v is None for v in vals):
        raise KeyError(f"invariant {key!r} not recorded on this trajectory")
    v0 = vals[0]
    return max(abs(v - v0) for v in vals) / max(1.0, abs(v0))
