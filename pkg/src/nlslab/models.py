"""Model families and their parameters."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ParameterError


class Family(str, enum.Enum):
    POWER_NLS = "PowerNLS"
    GROSS_PITAEVSKII = "GrossPitaevskii"
    CUBIC_QUINTIC = "CubicQuintic"
    BIHARMONIC = "Biharmonic"
    DERIVATIVE_NLS = "DerivativeNLS"
    LOG_NLS = "LogNLS"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.replace("-", "").replace("_", "").lower()
        for fam in cls:
            if fam.value.lower() == key:
                return fam
        aliases = {"nls": cls.POWER_NLS, "gp": cls.GROSS_PITAEVSKII, "dnls": cls.DERIVATIVE_NLS,
                   "lognls": cls.LOG_NLS, "cq": cls.CUBIC_QUINTIC, "bnls": cls.BIHARMONIC}
        if key in aliases:
            return aliases[key]
        raise ParameterError(f"unknown model family {name!r}")


def energy_critical_power(n: int) -> float:
    """p_n^*: infinite for n <= 2, 4/(n-2) otherwise."""
    return math.inf if n <= 2 else 4.0 / (n - 2)


def biharmonic_critical_power(n: int) -> float:
    return math.inf if n <= 4 else 8.0 / (n - 4)


def mass_critical_power(n: int) -> float:
    return 4.0 / n


@dataclass(frozen=True)
class ModelSpec:
    """One member of the six NLS families.

    ``epsilon`` is the sign in front of the nonlinearity written on the right
    of ``i u_t + Delta u = ...`` (+1 defocusing, -1 focusing).  Parameters not
    used by a family are ignored.
    """

    family: Family
    epsilon: int = -1
    p: float = 2.0
    n: int = 1
    mu: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        fam = self.family if isinstance(self.family, Family) else Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        if self.epsilon not in (1, -1):
            raise ParameterError(f"epsilon must be +1 or -1, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", int(self.epsilon))
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        fam = self.family
        if fam in (Family.POWER_NLS, Family.GROSS_PITAEVSKII):
            if not 0 < self.p < energy_critical_power(self.n):
                raise ParameterError(f"need 0 < p < p_n^* = {energy_critical_power(self.n)}, got p={self.p}")
        if fam is Family.GROSS_PITAEVSKII:
            q = self.p / 2
            if q != int(q) or q < 1:
                raise ParameterError(f"Gross-Pitaevskii needs an even power p = 2q, got p={self.p}")
        if fam is Family.BIHARMONIC and not 0 < self.p < biharmonic_critical_power(self.n):
            raise ParameterError(f"need 0 < p < p_n^** = {biharmonic_critical_power(self.n)}, got p={self.p}")
        if fam is Family.CUBIC_QUINTIC and not self.lambda1 * self.lambda2 > 0:
            raise ParameterError("cubic-quintic needs lambda1 * lambda2 > 0")
        if fam is Family.DERIVATIVE_NLS and self.n != 1:
            raise ParameterError("derivative NLS is one-dimensional")

    @property
    def q(self) -> int:
        return int(round(self.p / 2))

    @property
    def mass_regime(self) -> str:
        """'subcritical', 'critical' or 'supercritical' relative to p = 4/n."""
        pc = mass_critical_power(self.n)
        if math.isclose(self.p, pc, rel_tol=0, abs_tol=1e-12):
            return "critical"
        return "subcritical" if self.p < pc else "supercritical"

    @property
    def s_c(self) -> float:
        return self.n / 2 - 2 / self.p

    def as_dict(self) -> dict:
        return {
            "family": self.family.value,
            "epsilon": self.epsilon,
            "p": self.p,
            "n": self.n,
            "mu": self.mu,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
        }


def power_nls(epsilon=-1, p=2.0, n=1) -> ModelSpec:
    return ModelSpec(Family.POWER_NLS, epsilon, p, n)
