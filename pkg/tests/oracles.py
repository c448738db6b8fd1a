"""Independent reference values used by several test modules."""

import math

from scipy.integrate import quad
from scipy.optimize import brentq


def r_alpha_period(r0: float, b: int = 1) -> float:
    """Libration period of r'' = 1/r^3 - 2b/r started at rest from r0.

    Energy-level quadrature T = 2 int dr / sqrt(2 (E - U)) with
    U(r) = 1/(2 r^2) + 2 b log r.  The inverse square-root endpoint
    singularities are handled by the algebraic weight of QUADPACK.
    """
    def U(r):
        return 0.5 / r**2 + 2 * b * math.log(r)

    E = U(r0)
    r_star = 1 / math.sqrt(2 * b)
    if r0 > r_star:
        a, c = brentq(lambda r: U(r) - E, 1e-6, r_star), r0
    else:
        a, c = r0, brentq(lambda r: U(r) - E, r_star, 1e6)

    def dU(r):
        return -1 / r**3 + 2 * b / r

    def g(r):
        # finite limits at the turning points, where E - U vanishes linearly
        if r - a < 1e-9 * c:
            return math.sqrt((c - a) / (-2 * dU(a)))
        if c - r < 1e-9 * c:
            return math.sqrt((c - a) / (2 * dU(c)))
        return math.sqrt((r - a) * (c - r) / (2 * (E - U(r))))

    val, _ = quad(g, a, c, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-12, epsrel=1e-12, limit=200)
    return 2 * val
