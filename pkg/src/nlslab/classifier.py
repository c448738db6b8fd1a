"""Breather-nonexistence rules as an executable decision procedure.

Each rule inspects an ``InvariantFacts`` record and either fires (the data
cannot belong to a breather), does not apply, or reports which inputs it
would need.  Rules are tried in order R1..R11 restricted to the model's
family; the first one that fires decides.  If none fires the verdict is
NotPrecluded, unless some rule was blocked by a missing input, in which case
it is Inconclusive.

Numerical zero: a value x counts as 0 when |x| / max(1, |M|) < tau0.

Rule ids and the table rows they realize:

    R1   eps = +1                                    T1.1 T2.1 T3.1
    R2   P != 0                                      T1.2 T2.2 T3.2
    R3   sign of E against p vs 4/n, P = 0           T1.3 T2.3 T3.3
    R4   mass-critical, P = E = 0: (i) P~(0) != 0    T2.5
                                   (ii) |u|_2 < |Q|_2 T2.4
    R5   supercritical mass-energy balance           T3.4
    R6   subcritical small data with fast decay      T1.4
    R7   Gross-Pitaevskii, cubic/quintic, n = 1, 2
    R8   cubic-quintic, n = 1, 2, 3
    R9   biharmonic
    R10  derivative NLS (sign of H; parity)
    R11  logarithmic NLS, eps = +1
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable

from scipy.special import beta as beta_fn

from .errors import ParameterError
from .ground_state import ThresholdCache, critical_omega
from .models import Family, ModelSpec, energy_critical_power

DEFAULT_TAU0 = 1e-9
MAX_TRAJECTORY_DRIFT = 1e-5


class Status(str, enum.Enum):
    PRECLUDED = "Precluded"
    NOT_PRECLUDED = "NotPrecluded"
    INCONCLUSIVE = "Inconclusive"


TABLE_ROWS = {
    "T1.1": "R1", "T1.2": "R2", "T1.3": "R3", "T1.4": "R6",
    "T2.1": "R1", "T2.2": "R2", "T2.3": "R3", "T2.4": "R4(ii)", "T2.5": "R4(i)",
    "T3.1": "R1", "T3.2": "R2", "T3.3": "R3", "T3.4": "R5",
}

_TABLE = {"subcritical": "T1", "critical": "T2", "supercritical": "T3"}

_DNLS_ONLY = ("H", "parity")
_POWER_ONLY = ("mass_small", "decay_certificate", "eps_small", "grad_l2_at_0")


@dataclass(frozen=True)
class InvariantFacts:
    """Declared or measured inputs to the rules.

    ``P``, ``E`` and ``M`` are family-appropriate: for Gross-Pitaevskii they
    are P_nz, E_nz (the reported form) and M_nz.  ``l2_norm`` is the
    unsquared L2 norm; when absent on a zero-background family it is taken as
    sqrt(M).  ``parity`` is "even", "odd" or None.
    """

    model: ModelSpec
    P: float | None = None
    E: float | None = None
    M: float | None = None
    P_tilde0: float | None = None
    l2_norm: float | None = None
    grad_l2_at_0: float | None = None
    H: float | None = None
    mass_small: bool | None = None
    decay_certificate: bool | None = None
    eps_small: float | None = None
    parity: str | None = None

    def __post_init__(self):
        fam = self.model.family
        if fam is not Family.DERIVATIVE_NLS:
            bad = [k for k in _DNLS_ONLY if getattr(self, k) is not None]
            if bad:
                raise ParameterError(f"{', '.join(bad)} only apply to derivative NLS, not {fam.value}")
        if fam is not Family.POWER_NLS:
            bad = [k for k in _POWER_ONLY if getattr(self, k) is not None]
            if bad:
                raise ParameterError(f"{', '.join(bad)} only apply to power NLS, not {fam.value}")
        if self.parity not in (None, "even", "odd"):
            raise ParameterError(f"parity must be 'even', 'odd' or None, got {self.parity!r}")
        for k in ("P", "E", "M", "P_tilde0", "l2_norm", "grad_l2_at_0", "H", "eps_small"):
            v = getattr(self, k)
            if v is not None:
                if not math.isfinite(float(v)):
                    raise ParameterError(f"fact {k} is not finite")
                object.__setattr__(self, k, float(v))

    @property
    def l2(self) -> float | None:
        if self.l2_norm is not None:
            return self.l2_norm
        if self.M is not None and self.model.family is not Family.GROSS_PITAEVSKII and self.M >= 0:
            return math.sqrt(self.M)
        return None

    def inputs(self) -> dict:
        out = {"model": self.model.as_dict()}
        for k in ("P", "E", "M", "P_tilde0", "l2_norm", "grad_l2_at_0", "H", "mass_small", "decay_certificate",
                  "eps_small", "parity"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out


@dataclass(frozen=True)
class RegimeVerdict:
    status: Status
    rule: str
    inequality: str
    table_row: str | None = None
    inputs: dict = field(default_factory=dict)
    regime: str | None = None
    monotone_fraction: float | None = None

    @property
    def precluded(self) -> bool:
        return self.status is Status.PRECLUDED

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "rule": self.rule,
            "inequality": self.inequality,
            "table_row": self.table_row,
            "inputs": self.inputs,
            "regime": self.regime,
            "monotone_fraction": self.monotone_fraction,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# -- rule plumbing ------------------------------------------------------------


@dataclass(frozen=True)
class _Fire:
    rule: str
    inequality: str
    row: str | None = None


@dataclass(frozen=True)
class _Missing:
    names: tuple


class _Ctx:
    def __init__(self, facts: InvariantFacts, tau0: float, thresholds: ThresholdCache | None):
        self.f = facts
        self.tau0 = tau0
        self.thresholds = thresholds
        self.scale = max(1.0, abs(facts.M)) if facts.M is not None else 1.0

    def zero(self, x: float) -> bool:
        return abs(x) / self.scale < self.tau0

    def sign(self, x: float) -> int:
        return 0 if self.zero(x) else (1 if x > 0 else -1)

    def need(self, *names) -> _Missing | None:
        miss = tuple(n for n in names if getattr(self.f, n) is None)
        return _Missing(miss) if miss else None

    @property
    def eps(self) -> int:
        return self.f.model.epsilon

    def row(self, k: int) -> str:
        return f"{_TABLE[self.f.model.mass_regime]}.{k}"


def _g(x) -> str:
    return format(float(x), ".6g")


def _r1(c: _Ctx):
    if c.eps == 1:
        return _Fire("R1", "eps = +1 (defocusing)", c.row(1))
    return None


def _r2(c: _Ctx):
    if (m := c.need("P")):
        return m
    if not c.zero(c.f.P):
        row = c.row(2) if c.f.model.family is Family.POWER_NLS else None
        return _Fire("R2", f"|P| = {_g(abs(c.f.P))} >= tau0*max(1,|M|) = {_g(c.tau0 * c.scale)}", row)
    return None


def _p_zero(c: _Ctx):
    """None when P is known to vanish, else the reason this rule cannot run."""
    if c.f.P is None:
        return _Missing(("P",))
    return None if c.zero(c.f.P) else False


def _r3(c: _Ctx):
    gate = _p_zero(c)
    if gate is not None:
        return gate or None
    if (m := c.need("E")):
        return m
    p, n = c.f.model.p, c.f.model.n
    regime = c.f.model.mass_regime
    s = c.sign(c.f.E)
    e = _g(c.f.E)
    if s > 0 and regime in ("subcritical", "critical"):
        return _Fire("R3(1)", f"P = 0, E = {e} > 0 and p = {_g(p)} <= 4/n = {_g(4 / n)}", c.row(3))
    if s == 0 and regime != "critical":
        return _Fire("R3(2)", f"P = 0, E = 0 (|E| = {_g(abs(c.f.E))}) and p = {_g(p)} != 4/n = {_g(4 / n)}",
                     c.row(3))
    if s < 0 and regime in ("critical", "supercritical") and p < energy_critical_power(n):
        return _Fire("R3(3)", f"P = 0, E = {e} < 0 and 4/n = {_g(4 / n)} <= p = {_g(p)} < p_n^*", c.row(3))
    return None


def ground_state_l2(p: float, n: int, thresholds: ThresholdCache | None) -> float | None:
    """|Q|_2 at w = 1: cached if available, closed form in 1-D."""
    if thresholds is not None:
        th = thresholds.get(p, n, 1.0)
        if th is not None:
            return th.l2_norm
    if n == 1:
        # int sech^a = B(a/2, 1/2)
        return math.sqrt(((p + 2) / 2) ** (2 / p) * (2 / p) * beta_fn(2 / p, 0.5))
    return None


def _r4(c: _Ctx):
    if c.f.model.mass_regime != "critical":
        return None
    gate = _p_zero(c)
    if gate is not None:
        return gate or None
    if (m := c.need("E")):
        return m
    if not c.zero(c.f.E):
        return None
    missing = []
    if c.f.P_tilde0 is None:
        missing.append("P_tilde0")
    elif not c.zero(c.f.P_tilde0):
        return _Fire("R4(i)", f"p = 4/n, P = 0, E = 0 and P~(0) = {_g(c.f.P_tilde0)} != 0", "T2.5")
    q = ground_state_l2(c.f.model.p, c.f.model.n, c.thresholds)
    l2 = c.f.l2
    if l2 is None:
        missing.append("l2_norm")
    if q is None:
        missing.append("ground-state threshold |Q|_2")
    if l2 is not None and q is not None:
        if l2 < q and not math.isclose(l2, q, rel_tol=c.tau0):
            return _Fire("R4(ii)", f"p = 4/n, P = 0, E = 0 and |u|_2 = {_g(l2)} < |Q|_2 = {_g(q)}"
                         " (unsquared L2 norms)", "T2.4")
        return None
    return _Missing(tuple(missing))


def _r5(c: _Ctx):
    mdl = c.f.model
    if mdl.mass_regime != "supercritical":
        return None
    gate = _p_zero(c)
    if gate is not None:
        return gate or None
    if (m := c.need("E")):
        return m
    if c.sign(c.f.E) <= 0:
        return None
    th = c.thresholds.get(mdl.p, mdl.n, critical_omega(mdl.p, mdl.n)) if c.thresholds is not None else None
    missing = [k for k in ("M", "grad_l2_at_0") if getattr(c.f, k) is None]
    if th is None:
        missing.append("ground-state thresholds Q*")
    if missing:
        return _Missing(tuple(missing))
    sc = mdl.s_c
    lhs = c.f.E**sc * c.f.M ** (1 - sc)
    rhs = th.energy**sc * th.mass ** (1 - sc)
    if not lhs < rhs:
        return None
    g = c.f.grad_l2_at_0**sc * c.f.M ** (1 - sc)
    gq = th.grad_l2**sc * th.mass ** (1 - sc)
    if math.isclose(g, gq, rel_tol=c.tau0):
        return None
    which, op = ("R5(i)", "<") if g < gq else ("R5(ii)", ">")
    return _Fire(which, f"E^s M^(1-s) = {_g(lhs)} < {_g(rhs)} = E[Q*]^s M[Q*]^(1-s) and "
                        f"|grad u(0)|^s M^(1-s) = {_g(g)} {op} {_g(gq)}, s = {_g(sc)}", "T3.4")


def _r6(c: _Ctx):
    mdl = c.f.model
    if not (mdl.n == 1 and 2 <= mdl.p < 4):
        return None
    gate = _p_zero(c)
    if gate is not None:
        return gate or None
    if (m := c.need("E")):
        return m
    if c.sign(c.f.E) >= 0 or c.f.decay_certificate is not True:
        return None
    if c.f.mass_small is not None:
        small, how = c.f.mass_small, "declared small"
    elif c.f.eps_small is not None and c.f.l2 is not None:
        small, how = c.f.l2 < c.f.eps_small, f"|u0|_2 = {_g(c.f.l2)} < eps_small = {_g(c.f.eps_small)}"
    else:
        return _Missing(("eps_small",))
    if small:
        return _Fire("R6", f"n = 1, 2 <= p = {_g(mdl.p)} < 4, P = 0, E = {_g(c.f.E)} < 0, {how}, "
                           "decay faster than the ground state", "T1.4")
    return None


def _r7(c: _Ctx):
    mdl = c.f.model
    p, n, eps = int(round(mdl.p)), mdl.n, c.eps
    if (p, n) not in ((2, 1), (2, 2), (4, 1), (4, 2)):
        return None
    if (m := c.need("E", "M")):
        return m
    # the theorem's energy is the reported one plus eps * M_nz
    el = c.f.E + eps * c.f.M
    if p == 2 and n == 1:
        v = eps * (el - eps / 2 * c.f.M)
        ok = c.sign(v) <= 0
        text = f"cubic n = 1: eps*(E_L - (eps/2) M_nz) = {_g(v)} <= 0"
    elif p == 2:
        ok = c.sign(el) != 0
        text = f"cubic n = 2: E_L = {_g(el)} != 0"
    elif n == 1:
        v = eps * el
        ok = c.sign(v) >= 0
        text = f"quintic n = 1: eps*E_L = {_g(v)} >= 0"
    else:
        v = eps * (el + eps * c.f.M)
        ok = c.sign(v) >= 0
        text = f"quintic n = 2: eps*(E_L + eps M_nz) = {_g(v)} >= 0"
    if ok:
        return _Fire(f"R7(p={p},n={n})", f"{text}, with E_L = E_nz + eps*M_nz = {_g(el)}")
    return None


def _r8(c: _Ctx):
    mdl = c.f.model
    l1, l2, n = mdl.lambda1, mdl.lambda2, mdl.n
    if n not in (1, 2, 3):
        return None
    gate = _p_zero(c)
    if gate is not None:
        return gate or None
    if (m := c.need("E")):
        return m
    e = c.f.E
    if n == 1:
        if l1 != 0 and c.sign(l1 * e) <= 0:
            return _Fire("R8(n=1)", f"P = 0, lambda1*E1 = {_g(l1 * e)} <= 0")
        return None
    if n == 2:
        if l2 != 0 and c.sign(l2 * e) <= 0:
            return _Fire("R8(n=2)", f"P = 0, lambda2*E1 = {_g(l2 * e)} <= 0")
        return None
    if l1 < 0:
        if (m := c.need("M")):
            return m
        bound = 3 * l1**2 / (128 * abs(l2)) * c.f.M**2
        if e > bound and c.sign(e - bound) > 0:
            return _Fire("R8(n=3,i)", f"P = 0, lambda1 < 0, E1 = {_g(e)} > 3 lambda1^2 M^2/(128|lambda2|) = {_g(bound)}")
        return None
    if l1 > 0 and c.sign(e) < 0:
        if (m := c.need("P_tilde0")):
            return m
        if c.sign(c.f.P_tilde0) > 0:
            return _Fire("R8(n=3,ii)", f"P = 0, lambda1 > 0, E1 = {_g(e)} < 0, P~(0) = {_g(c.f.P_tilde0)} > 0")
    return None


def _r9(c: _Ctx):
    mu = c.f.model.mu
    if c.eps == 1 and mu >= 0:
        return _Fire("R9(1)", f"eps = +1 and mu = {_g(mu)} >= 0")
    if c.eps == -1 and mu <= 0:
        if (m := c.need("E")):
            return m
        if c.sign(c.f.E) >= 0:
            return _Fire("R9(2)", f"eps = -1, mu = {_g(mu)} <= 0 and E2 = {_g(c.f.E)} >= 0")
    return None


def _r10(c: _Ctx):
    missing = []
    if c.f.H is None:
        missing.append("H")
    else:
        s = c.sign(c.f.H)
        if c.eps == -1 and s <= 0:
            return _Fire("R10(1)", f"eps = -1 and H = {_g(c.f.H)} <= 0")
        if c.eps == 1 and s >= 0:
            return _Fire("R10(2)", f"eps = +1 and H = {_g(c.f.H)} >= 0")
    if c.f.parity is not None:
        return _Fire("R10(parity)", f"u is {c.f.parity} in x (total symmetry)")
    return _Missing(tuple(missing)) if missing else None


def _r11(c: _Ctx):
    if c.eps == 1:
        return _Fire("R11", "eps = +1 (defocusing logarithmic nonlinearity)")
    return None


RULES: dict[Family, tuple[tuple[str, Callable], ...]] = {
    Family.POWER_NLS: (("R1", _r1), ("R2", _r2), ("R3", _r3), ("R4", _r4), ("R5", _r5), ("R6", _r6)),
    Family.GROSS_PITAEVSKII: (("R2", _r2), ("R7", _r7)),
    Family.CUBIC_QUINTIC: (("R2", _r2), ("R8", _r8)),
    Family.BIHARMONIC: (("R9", _r9),),
    Family.DERIVATIVE_NLS: (("R10", _r10),),
    Family.LOG_NLS: (("R2", _r2), ("R11", _r11)),
}


def _surviving_regime(facts: InvariantFacts) -> str:
    mdl = facts.model
    if mdl.family is Family.POWER_NLS:
        return {
            "subcritical": "P = 0, E < 0 and p < 4/n",
            "critical": "P = 0, E = 0 and p = 4/n",
            "supercritical": "P = 0, E > 0 and 4/n < p < p_n^*",
        }[mdl.mass_regime]
    if mdl.family is Family.GROSS_PITAEVSKII and (int(round(mdl.p)), mdl.n) not in ((2, 1), (2, 2), (4, 1), (4, 2)):
        return "outside the cubic/quintic, n <= 2 results"
    if mdl.family is Family.CUBIC_QUINTIC and mdl.n > 3:
        return "outside the n <= 3 results"
    return "no stated nonexistence condition holds"


def classify(facts: InvariantFacts, tau0: float = DEFAULT_TAU0, thresholds: ThresholdCache | None = None,
             order: list[str] | None = None) -> RegimeVerdict:
    """First firing rule wins; ``order`` permutes the family's rule ids (for testing)."""
    if not tau0 > 0:
        raise ParameterError("tau0 must be positive")
    rules = RULES[facts.model.family]
    if order is not None:
        lookup = dict(rules)
        if sorted(order) != sorted(lookup):
            raise ParameterError(f"order must permute {list(lookup)}")
        rules = tuple((k, lookup[k]) for k in order)
    ctx = _Ctx(facts, tau0, thresholds)
    missing: list[str] = []
    for _, rule in rules:
        out = rule(ctx)
        if isinstance(out, _Fire):
            return RegimeVerdict(Status.PRECLUDED, out.rule, out.inequality, out.row, facts.inputs())
        if isinstance(out, _Missing):
            missing.extend(n for n in out.names if n not in missing)
    if missing:
        return RegimeVerdict(Status.INCONCLUSIVE, "missing-input", "missing: " + ", ".join(missing), None,
                             facts.inputs())
    regime = _surviving_regime(facts)
    return RegimeVerdict(Status.NOT_PRECLUDED, "none", "no rule fires", None, facts.inputs(), regime)


# -- trajectories -------------------------------------------------------------


def _mean(traj, key):
    vals = [r.get(key) for r in traj.reports]
    if any(v is None for v in vals):
        return None
    return float(sum(vals) / len(vals))


def facts_from_field(f, model: ModelSpec, **extra) -> InvariantFacts:
    """Facts measured on a single field (no time series)."""
    from . import functionals as fn

    fam = model.family
    r = fn.invariants(f, model)
    kw: dict = {}
    if fam is Family.GROSS_PITAEVSKII:
        kw.update(P=r.p_nz, E=r.e_nz, M=r.m_nz)
    elif fam is Family.DERIVATIVE_NLS:
        kw.update(E=r.e, M=r.m, H=r.dnls_h)
    else:
        kw.update(E=r.e, M=r.m)
        if fam is not Family.BIHARMONIC:
            kw["P"] = r.p
        if fam in (Family.POWER_NLS, Family.CUBIC_QUINTIC):
            kw["P_tilde0"] = r.p_tilde
        if fam is Family.POWER_NLS:
            kw["grad_l2_at_0"] = math.sqrt(fn.grad_norm_sq(f))
    kw.update(extra)
    return InvariantFacts(model, **kw)


def facts_from_trajectory(traj, model: ModelSpec, **extra) -> InvariantFacts:
    """Time-averaged conserved entries of a trajectory as classifier facts."""
    fam = model.family
    first = traj.reports[0]
    kw: dict = {}
    if fam is Family.GROSS_PITAEVSKII:
        kw.update(P=_mean(traj, "p_nz"), E=_mean(traj, "e_nz"), M=_mean(traj, "m_nz"))
    elif fam is Family.DERIVATIVE_NLS:
        kw.update(E=_mean(traj, "e"), M=_mean(traj, "m"), H=_mean(traj, "dnls_h"))
    else:
        kw.update(E=_mean(traj, "e"), M=_mean(traj, "m"))
        if fam is not Family.BIHARMONIC:
            kw["P"] = _mean(traj, "p")
        if fam in (Family.POWER_NLS, Family.CUBIC_QUINTIC):
            kw["P_tilde0"] = first.p_tilde
        if fam is Family.POWER_NLS:
            kw["grad_l2_at_0"] = traj.extra.get("grad_l2_0")
    kw.update(extra)
    return InvariantFacts(model, **kw)


def classify_trajectory(traj, model: ModelSpec, tau0: float = DEFAULT_TAU0,
                        thresholds: ThresholdCache | None = None, **extra) -> RegimeVerdict:
    """Classify from measured series; drifts above 1e-5 make the verdict Inconclusive.

    The verdict carries the virial's ``monotone_fraction`` as corroboration.
    """
    if not len(traj.reports):
        raise ParameterError("empty trajectory")
    if traj.model != model:
        raise ParameterError("trajectory was produced by a different model")
    mono = traj.monotone_fraction
    drifts = traj.drifts()
    bad = {k: v for k, v in drifts.items() if v > MAX_TRAJECTORY_DRIFT}
    facts = facts_from_trajectory(traj, model, **extra)
    if bad:
        k = max(bad, key=bad.get)
        return RegimeVerdict(Status.INCONCLUSIVE, "drift", f"drift[{k}] = {_g(bad[k])} > {MAX_TRAJECTORY_DRIFT:g}",
                             None, facts.inputs(), monotone_fraction=mono)
    v = classify(facts, tau0, thresholds)
    return RegimeVerdict(v.status, v.rule, v.inequality, v.table_row, v.inputs, v.regime, mono)
