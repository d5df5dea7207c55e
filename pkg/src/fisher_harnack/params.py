"""Parameter sets, feasibility conditions and derived constants.

Every estimate in the package is parametrised by the dimension ``n``, the
reaction rate ``c`` and the two Harnack weights ``alpha`` (gradient term)
and ``beta`` (exponential term).  This module decides which estimate a
parameter set is admissible for and evaluates the constants those
estimates are built from.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import NegativeRadicand, NoFeasibleEpsPrime, UnsupportedDimension

# Relative width of the band around 8*beta*(1-alpha) + c*n = 0 that is
# treated as exactly zero (the borderline case of the long-time split).
ZERO_SPLIT_RTOL = 1e-12


@dataclass(frozen=True)
class ParamSet:
    n: int
    c: float
    alpha: float
    beta: float
    K: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n!r}")
        if not self.c > 0:
            raise ValueError(f"reaction rate must be positive, got {self.c!r}")
        if self.K != 0.0:
            raise ValueError("only flat domains (K = 0) are supported")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))


class Regime(enum.Enum):
    COMPACT_III = "iii"
    COMPACT_IV = "iv"
    NONCOMPACT = "noncompact"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    regime: Regime
    violated_conditions: tuple = ()
    margins: dict = field(default_factory=dict)

    def summary(self) -> str:
        if self.feasible:
            return f"feasible regime={self.regime.value}"
        return "infeasible (" + ",".join(self.violated_conditions) + ")"


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form constants for one parameter set.

    ``mu1, nu1, omega1`` are the closed-manifold constants.  ``mu2, nu2,
    omega2`` are the noncompact constants and ``mu_A, nu_A`` their
    counterparts built from ``A(eps_prime)``; these are ``None`` whenever
    the square root they need is undefined.
    """

    mu1: float
    nu1: float
    omega1: float
    mu2: float | None
    nu2: float | None
    omega2: float
    A: float | None
    mu_A: float | None
    nu_A: float | None
    T2: float
    eps: float
    eps_prime: float


def compact_beta_bound(n: int, c: float, alpha: float) -> float:
    """Upper bound on beta shared by both closed and noncompact estimates."""
    return -c * n * (1.0 + alpha) / (4.0 * alpha**2 - 4.0 * alpha + 2.0 * n)


def split_value(p: ParamSet) -> float:
    """``8 beta (1 - alpha) / n + c``; its sign selects the long-time regime."""
    return 8.0 * p.beta * (1.0 - p.alpha) / p.n + p.c


def split_is_zero(p: ParamSet) -> bool:
    a = 8.0 * p.beta * (1.0 - p.alpha)
    b = p.c * p.n
    return abs(a + b) <= ZERO_SPLIT_RTOL * max(abs(a), abs(b))


def _alpha_margin(alpha: float) -> float:
    return min(alpha, 1.0 - alpha)


def validate_compact(p: ParamSet) -> FeasibilityVerdict:
    """Check the closed-manifold conditions and pick the long-time regime.

    Condition (ii) is closed; the (iii)/(iv) split is ``split_value < 0``
    versus ``>= 0``, with values within roundoff of zero counted as (iv).
    """
    s = 0.0 if split_is_zero(p) else split_value(p)
    margins = {
        "i": _alpha_margin(p.alpha),
        "ii": compact_beta_bound(p.n, p.c, p.alpha) - p.beta,
        "iii": -s,
        "iv": s,
    }
    violated = []
    if not margins["i"] > 0:
        violated.append("i")
    if not margins["ii"] >= 0:
        violated.append("ii")
    if violated:
        return FeasibilityVerdict(False, Regime.INFEASIBLE, tuple(violated), margins)
    regime = Regime.COMPACT_III if s < 0 else Regime.COMPACT_IV
    return FeasibilityVerdict(True, regime, (), margins)


def noncompact_beta_interval(n: int, c: float, alpha: float) -> tuple[float, float]:
    """Open interval for beta required by condition (iii) of the noncompact case."""
    if not alpha < 1:
        return (math.nan, math.nan)
    r2 = math.sqrt(2.0)
    lo = -c * n * (2.0 + r2) / (4.0 * (1.0 - alpha))
    hi = -c * n * (2.0 - r2) / (4.0 * (1.0 - alpha))
    return lo, hi


def validate_noncompact(p: ParamSet) -> FeasibilityVerdict:
    """Check the three strict conditions of the noncompact estimate."""
    lo, hi = noncompact_beta_interval(p.n, p.c, p.alpha)
    margins = {
        "i": _alpha_margin(p.alpha),
        "ii": compact_beta_bound(p.n, p.c, p.alpha) - p.beta,
        "iii_lower": p.beta - lo if p.alpha < 1 else -math.inf,
        "iii_upper": hi - p.beta if p.alpha < 1 else -math.inf,
    }
    violated = []
    if not margins["i"] > 0:
        violated.append("i")
    if not margins["ii"] > 0:
        violated.append("ii")
    if not margins["iii_lower"] > 0:
        violated.append("iii_lower")
    if not margins["iii_upper"] > 0:
        violated.append("iii_upper")
    if violated:
        return FeasibilityVerdict(False, Regime.INFEASIBLE, tuple(violated), margins)
    return FeasibilityVerdict(True, Regime.NONCOMPACT, (), margins)


def compact_constants(p: ParamSet) -> tuple[float, float, float]:
    """Return ``(mu1, nu1, omega1)``."""
    if not p.alpha < 1:
        raise ValueError("alpha < 1 required")
    s = math.sqrt(p.n / (2.0 * (1.0 - p.alpha)))
    mu1 = 0.5 * p.c * s
    nu1 = (p.c + 4.0 * p.beta * (1.0 - p.alpha) / p.n) / (2.0 * p.beta) * s
    omega1 = math.sqrt(2.0 * (1.0 - p.alpha) / p.n)
    return mu1, nu1, omega1


def noncompact_radicand(p: ParamSet) -> float:
    """``-c n - 8 beta (1 - alpha)``; must be positive for the noncompact constants."""
    return -p.c * p.n - 8.0 * p.beta * (1.0 - p.alpha)


def noncompact_constants(p: ParamSet) -> tuple[float, float, float]:
    """Return ``(mu2, nu2, omega2)`` in the form stated with the noncompact estimate."""
    rad = noncompact_radicand(p)
    if not rad > 0 or not p.alpha < 1:
        raise NegativeRadicand(f"-cn - 8 beta (1 - alpha) = {rad!r} is not positive")
    root = math.sqrt(2.0 * (1.0 - p.alpha) / (p.c * rad))
    mu2 = p.beta * p.c * root
    nu2 = (4.0 * p.beta * (1.0 - p.alpha) / p.n + p.c) * root
    omega2 = math.sqrt(2.0 * (1.0 - p.alpha) / p.n)
    return mu2, nu2, omega2


def quadratic_coefficient(p: ParamSet, eps_prime: float = 0.0) -> float:
    """``A(eps')``, the coefficient of ``e^{2u}`` after absorbing the cutoff terms."""
    room = 1.0 - p.alpha - eps_prime
    if not room > 0:
        raise ValueError(f"eps_prime must be below 1 - alpha, got {eps_prime!r}")
    b = p.c + 4.0 * p.beta * (1.0 - p.alpha) / p.n
    return 2.0 * p.beta**2 * (1.0 - p.alpha) / p.n - p.n * b**2 / (8.0 * room)


def a_based_constants(p: ParamSet, eps_prime: float = 0.0) -> tuple[float, float, float]:
    """Return ``(mu, nu, omega)`` built from ``A(eps')``; needs ``A > 0``."""
    A = quadratic_coefficient(p, eps_prime)
    if not A > 0:
        raise NegativeRadicand(f"A({eps_prime!r}) = {A!r} is not positive")
    root_a = math.sqrt(A)
    mu = p.beta * p.c / (2.0 * root_a)
    nu = (4.0 * p.beta * (1.0 - p.alpha) / p.n + p.c) / (2.0 * root_a)
    omega = math.sqrt(2.0 * (1.0 - p.alpha) / p.n)
    return mu, nu, omega


def switch_time(p: ParamSet, eps: float = 0.0) -> float:
    """Time at which the regime-(iv) profile changes branch."""
    b = 4.0 * p.beta * (1.0 - p.alpha) / p.n + p.c
    return p.n / (2.0 * (1.0 - p.alpha) * (1.0 - eps) * (-p.beta * p.c)) * b


def derived_constants(p: ParamSet, eps: float = 0.0, eps_prime: float = 0.0) -> DerivedConstants:
    mu1, nu1, omega1 = compact_constants(p)
    try:
        mu2, nu2, omega2 = noncompact_constants(p)
    except NegativeRadicand:
        mu2 = nu2 = None
        omega2 = omega1
    A = quadratic_coefficient(p, eps_prime)
    if A > 0:
        mu_a, nu_a, _ = a_based_constants(p, eps_prime)
    else:
        mu_a = nu_a = None
    return DerivedConstants(
        mu1=mu1,
        nu1=nu1,
        omega1=omega1,
        mu2=mu2,
        nu2=nu2,
        omega2=omega2,
        A=A,
        mu_A=mu_a,
        nu_A=nu_a,
        T2=switch_time(p, eps),
        eps=eps,
        eps_prime=eps_prime,
    )


def _eps_prime_ok(p: ParamSet, eps_prime: float) -> bool:
    A = quadratic_coefficient(p, eps_prime)
    if not A > 0:
        return False
    _, nu, omega = a_based_constants(p, eps_prime)
    return nu**2 < omega**2


def find_eps_prime(p: ParamSet, iterations: int = 64) -> float:
    """Return some ``eps' > 0`` with ``A(eps') > 0`` and ``nu^2 < omega^2``.

    Both conditions hold at ``eps' = 0`` for admissible parameters and
    degrade monotonically as ``eps'`` grows, so bisection on ``[0, 1-alpha)``
    locates the edge of the admissible range; the midpoint of that range
    is returned.
    """
    if not validate_noncompact(p).feasible:
        raise NoFeasibleEpsPrime(f"{p} does not satisfy the noncompact conditions")
    if not _eps_prime_ok(p, 0.0):
        raise NoFeasibleEpsPrime(f"strict inequalities fail at eps' = 0 for {p}")
    lo, hi = 0.0, 1.0 - p.alpha
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid >= hi or mid <= lo:
            break
        if _eps_prime_ok(p, mid):
            lo = mid
        else:
            hi = mid
    eps_prime = 0.5 * lo
    if not (eps_prime > 0 and _eps_prime_ok(p, eps_prime)):
        raise NoFeasibleEpsPrime(f"bisection found no admissible eps' for {p}")
    return eps_prime


def classical_beta_range(n: int, c: float, alpha: float) -> tuple[float, float] | None:
    """Closed beta interval ``[-c, bound]`` admitted by the ratio estimate, or None.

    At ``alpha = n/4`` the interval degenerates to a point and the two ends
    agree only up to roundoff, so a few ulps of overlap are tolerated.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    lo = -float(c)
    hi = compact_beta_bound(n, c, alpha)
    if lo <= hi:
        return lo, hi
    if lo - hi <= 8 * math.ulp(abs(lo)):
        return hi, hi
    return None


def wave_speed_bound(n: int, c: float) -> float:
    """Lower bound on the squared speed of plane waves in dimension ``n <= 3``."""
    if n not in (1, 2, 3):
        raise UnsupportedDimension(f"the wave-speed bound is stated for n = 1, 2, 3 only, got {n}")
    r = math.sqrt(4.0 * n - n * n)
    return 2.0 * c * (n - 4.0 + 2.0 * r) / (n - 2.0 + r)


def wave_speed_table(n: int, c: float) -> float:
    """Tabulated values of the same bound, written out case by case."""
    table = {1: 3.0 - math.sqrt(3.0), 2: 2.0, 3: 7.0 - 3.0 * math.sqrt(3.0)}
    if n not in table:
        raise UnsupportedDimension(f"no tabulated value for n = {n}")
    return table[n] * c


def cross_term_coefficient(p: ParamSet) -> float:
    """Coefficient of ``|grad u|^2 e^u`` in the gradient-quartic term.

    Nonnegative exactly when beta satisfies the closed-manifold bound (ii).
    """
    a = p.alpha
    return 4.0 * a * p.beta * (1.0 - a) / p.n - 2.0 * p.beta - a * p.c - p.c
