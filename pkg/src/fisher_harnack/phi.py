"""Time profiles phi(t) that close the Harnack estimates.

Each profile is a closed-form solution (or a glued pair of solutions) of a
Riccati-type equation

    -(mu + nu*phi)^2 + ((omega - eps)*phi)^2 + phi' = 0,

blowing up like 1/t at t = 0.  Evaluation is written in terms of
``exp(-|q|)`` and ``expm1`` so that neither the small-time blow-up nor the
long-time plateau loses precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import params as P
from .errors import (
    InfeasibleParams,
    NonpositiveTime,
    OutOfRegime,
    UnsupportedFamily,
)


class Family(enum.Enum):
    GENERAL_EPSILON = "general_epsilon"
    COMPACT_III = "compact_iii"
    COMPACT_IV = "compact_iv"
    COMPACT_LIMIT_III = "compact_limit_iii"
    COMPACT_LIMIT_IV = "compact_limit_iv"
    NONCOMPACT_EPSILON = "noncompact_epsilon"
    NONCOMPACT_LIMIT = "noncompact_limit"


COMPACT_FAMILIES = frozenset(
    {Family.COMPACT_III, Family.COMPACT_IV, Family.COMPACT_LIMIT_III, Family.COMPACT_LIMIT_IV}
)
NONCOMPACT_FAMILIES = frozenset({Family.NONCOMPACT_EPSILON, Family.NONCOMPACT_LIMIT})
_TEMPLATE_FAMILIES = frozenset(
    {Family.GENERAL_EPSILON, Family.COMPACT_III, Family.NONCOMPACT_EPSILON, Family.NONCOMPACT_LIMIT}
)

# Shown in reports next to the noncompact limit profile.
NONCOMPACT_DENOMINATOR_NOTE = (
    "noncompact limit profile uses 1/(nu2 + omega2) in the second term; "
    "the Riccati identity holds only with that choice"
)


@dataclass(frozen=True)
class PhiProfile:
    family: Family
    mu: float
    nu: float
    omega: float
    eps: float = 0.0
    params: P.ParamSet | None = None
    T2: float | None = None

    @property
    def shifted_omega(self) -> float:
        return self.omega - self.eps

    def __call__(self, t):
        return evaluate(self, t)


def default_eps(nu: float, omega: float) -> float:
    """Regularizer keeping ``nu^2 < (omega - eps)^2`` with room to spare."""
    return min(omega / 10.0, (omega - abs(nu)) / 2.0)


def general_profile(mu: float, nu: float, omega: float, eps: float | None = None) -> PhiProfile:
    if eps is None:
        eps = default_eps(nu, omega)
    if mu == 0:
        raise ValueError("mu must be nonzero")
    if not omega > 0:
        raise ValueError("omega must be positive")
    if not eps >= 0:
        raise ValueError("eps must be nonnegative")
    if not nu**2 < (omega - eps) ** 2:
        raise ValueError(f"need nu^2 < (omega - eps)^2, got nu={nu}, omega={omega}, eps={eps}")
    return PhiProfile(Family.GENERAL_EPSILON, float(mu), float(nu), float(omega), float(eps))


def compact_profile(p: P.ParamSet, eps: float | None = None, limit: bool = False) -> PhiProfile:
    """Profile for the closed-manifold estimate, regime picked from ``p``.

    ``limit=True`` gives the eps -> 0 profile that appears in the final
    statement; otherwise the regularised profile used inside the argument.
    """
    verdict = P.validate_compact(p)
    if not verdict.feasible:
        raise InfeasibleParams(f"{p} violates {verdict.violated_conditions}")
    mu1, nu1, omega1 = P.compact_constants(p)
    if verdict.regime is P.Regime.COMPACT_III:
        if limit:
            return PhiProfile(Family.COMPACT_LIMIT_III, mu1, nu1, omega1, 0.0, p)
        if eps is None:
            eps = default_eps(nu1, omega1)
        if not (eps > 0 and nu1**2 < (omega1 - eps) ** 2):
            raise ValueError(f"eps={eps} too large for nu1={nu1}, omega1={omega1}")
        return PhiProfile(Family.COMPACT_III, mu1, nu1, omega1, float(eps), p)
    if limit:
        return PhiProfile(Family.COMPACT_LIMIT_IV, mu1, nu1, omega1, 0.0, p, P.switch_time(p, 0.0))
    if eps is None:
        # nu1 <= -omega1 here, so the template default does not apply
        eps = min(omega1 / 10.0, 0.1)
    if not 0 < eps < min(1.0, 2.0 * omega1):
        raise ValueError(f"eps={eps} outside (0, min(1, 2*omega1))")
    return PhiProfile(Family.COMPACT_IV, mu1, nu1, omega1, float(eps), p, P.switch_time(p, eps))


def noncompact_profile(
    p: P.ParamSet,
    eps: float | None = None,
    eps_prime: float | None = None,
    limit: bool = False,
) -> PhiProfile:
    verdict = P.validate_noncompact(p)
    if not verdict.feasible:
        raise InfeasibleParams(f"{p} violates {verdict.violated_conditions}")
    if limit:
        mu2, nu2, omega2 = P.noncompact_constants(p)
        return PhiProfile(Family.NONCOMPACT_LIMIT, mu2, nu2, omega2, 0.0, p)
    if eps_prime is None:
        eps_prime = P.find_eps_prime(p)
    mu, nu, omega = P.a_based_constants(p, eps_prime)
    if eps is None:
        eps = default_eps(nu, omega)
    if not (eps > 0 and nu**2 < (omega - eps) ** 2):
        raise ValueError(f"eps={eps} too large for nu={nu}, omega={omega}")
    return PhiProfile(Family.NONCOMPACT_EPSILON, mu, nu, omega, float(eps), p)


def _times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise NonpositiveTime(f"profiles are defined for t > 0 only, got {t!r}")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _template(mu, nu, w, t):
    """Value and derivative of the single-formula Riccati solution."""
    q = 2.0 * mu * w * t
    g = np.exp(-np.abs(q))
    d = -np.expm1(-np.abs(q))  # 1 - exp(-|q|) > 0
    pos = q > 0
    num = np.where(pos, 1.0 / (nu - w) - g / (nu + w), g / (nu - w) - 1.0 / (nu + w))
    val = mu * num / np.where(pos, -d, d)
    der = 4.0 * mu**2 * w**2 * g / ((nu**2 - w**2) * d**2)
    return val, der


def _limit_iii(p, t):
    a = p.beta * p.c * p.n / (p.c * p.n + 8.0 * p.beta * (1.0 - p.alpha))
    g = np.exp(-p.c * t)
    d = -np.expm1(-p.c * t)
    return (a * g - p.beta) / d, -p.c * g * (a - p.beta) / d**2


def _limit_iv(p, T2, t):
    early = t <= T2
    te = np.where(early, t, 1.0)
    v_early = p.n / (2.0 * (1.0 - p.alpha) * te)
    d_early = -p.n / (2.0 * (1.0 - p.alpha) * te**2)
    g = np.exp(-p.c * np.where(early, 0.0, t - T2))
    lead = p.c + 8.0 * p.beta * (1.0 - p.alpha) / p.n
    den = lead * g + p.c
    v_late = -p.beta * p.c * (1.0 + g) / den
    d_late = -8.0 * p.beta**2 * p.c**2 * (1.0 - p.alpha) * g / (p.n * den**2)
    return np.where(early, v_early, v_late), np.where(early, d_early, d_late)


def _regularised_iv(prof, t):
    p, eps, T2 = prof.params, prof.eps, prof.T2
    mu, nu, w = prof.mu, prof.nu, prof.shifted_omega
    early = t <= T2
    te = np.where(early, t, 1.0)
    v_early = p.n / (2.0 * (1.0 - p.alpha) * (1.0 - eps) * te)
    d_early = -p.n / (2.0 * (1.0 - p.alpha) * (1.0 - eps) * te**2)
    g = np.exp(-2.0 * mu * w * np.where(early, 0.0, t - T2))
    den = (nu + w) * g + (nu - w)
    v_late = -mu * (1.0 + g) / den
    d_late = -4.0 * mu**2 * w**2 * g / den**2
    return np.where(early, v_early, v_late), np.where(early, d_early, d_late)


def _value_and_derivative(profile: PhiProfile, t):
    fam = profile.family
    if fam in _TEMPLATE_FAMILIES:
        return _template(profile.mu, profile.nu, profile.shifted_omega, t)
    if fam is Family.COMPACT_LIMIT_III:
        return _limit_iii(profile.params, t)
    if fam is Family.COMPACT_LIMIT_IV:
        return _limit_iv(profile.params, profile.T2, t)
    if fam is Family.COMPACT_IV:
        return _regularised_iv(profile, t)
    raise UnsupportedFamily(fam)


def evaluate(profile: PhiProfile, t):
    """phi(t) for scalar or array ``t > 0``."""
    arr = _times(t)
    with np.errstate(over="ignore"):
        val, _ = _value_and_derivative(profile, arr)
    return _out(val, t)


def derivative(profile: PhiProfile, t):
    """phi'(t); at the switch time of regime (iv) the left derivative is returned."""
    arr = _times(t)
    with np.errstate(over="ignore"):
        _, der = _value_and_derivative(profile, arr)
    return _out(der, t)


def long_time_limit(profile: PhiProfile) -> float:
    fam = profile.family
    if fam in (Family.COMPACT_LIMIT_III, Family.COMPACT_LIMIT_IV):
        return -profile.params.beta
    mu, nu, w = profile.mu, profile.nu, profile.shifted_omega
    if fam is Family.COMPACT_IV:
        return mu / (w - nu)
    return mu / (w - nu) if mu > 0 else -mu / (nu + w)


def riccati_residual(profile: PhiProfile, t, shifted: bool = True):
    """``-(mu + nu*phi)^2 + (w*phi)^2 + phi'`` with ``w = omega - eps`` (or ``omega``).

    The shifted residual vanishes identically; the unshifted one equals
    ``(2*eps*omega - eps^2) * phi^2``.
    """
    fam = profile.family
    if fam not in (Family.GENERAL_EPSILON, Family.COMPACT_III, Family.NONCOMPACT_EPSILON, Family.COMPACT_IV):
        raise UnsupportedFamily(f"{fam.value} has eps = 0; the identity is not a check there")
    arr = _times(t)
    if fam is Family.COMPACT_IV and np.any(arr <= profile.T2):
        raise OutOfRegime(f"the Riccati branch starts after T2 = {profile.T2}")
    with np.errstate(over="ignore"):
        val, der = _value_and_derivative(profile, arr)
    w = profile.shifted_omega if shifted else profile.omega
    res = -((profile.mu + profile.nu * val) ** 2) + (w * val) ** 2 + der
    return _out(res, t)


def switch_value(p: P.ParamSet) -> float:
    """Common value of both regime-(iv) branches at the switch time."""
    return -p.beta * p.c * p.n / (4.0 * p.beta * (1.0 - p.alpha) + p.c * p.n)


def continuity_gap_at_T2(profile: PhiProfile) -> float:
    """``|phi(T2-) - phi(T2+)|`` for the regime-(iv) profiles."""
    p = profile.params
    if profile.family is Family.COMPACT_IV:
        left = p.n / (2.0 * (1.0 - p.alpha) * (1.0 - profile.eps) * profile.T2)
        w = profile.shifted_omega
        right = -profile.mu * 2.0 / ((profile.nu + w) + (profile.nu - w))
    elif profile.family is Family.COMPACT_LIMIT_IV:
        left = p.n / (2.0 * (1.0 - p.alpha) * profile.T2)
        right = -p.beta * p.c * 2.0 / (p.c + 8.0 * p.beta * (1.0 - p.alpha) / p.n + p.c)
    else:
        raise UnsupportedFamily(f"{profile.family.value} has no switch time")
    return abs(left - right)


class TildeCase(enum.Enum):
    CASE_I = "i"
    CASE_II = "ii"
    CASE_III = "iii"


def tilde_case(p: P.ParamSet) -> TildeCase:
    """Case of the ratio estimate, from the sign of ``8 beta (1-alpha) + c n``."""
    if P.split_is_zero(p):
        return TildeCase.CASE_III
    return TildeCase.CASE_I if 8.0 * p.beta * (1.0 - p.alpha) + p.c * p.n < 0 else TildeCase.CASE_II


def tilde(p: P.ParamSet, t):
    """``-beta - phi0(t)`` for the closed-manifold limit profile."""
    return -p.beta - evaluate(compact_profile(p, limit=True), t)


def tilde_integral(p: P.ParamSet, t1: float, t2: float) -> float:
    """Integral of ``-beta - phi0`` over ``[t1, t2]`` in closed form."""
    if not 0 < t1 <= t2:
        raise ValueError(f"need 0 < t1 <= t2, got {t1}, {t2}")
    verdict = P.validate_compact(p)
    if not verdict.feasible:
        raise InfeasibleParams(f"{p} violates {verdict.violated_conditions}")
    if t1 == t2:
        return 0.0
    case = tilde_case(p)
    c, n, beta, a = p.c, p.n, p.beta, p.alpha
    if case is TildeCase.CASE_I:
        k = 8.0 * beta * (1.0 - a) / (c * n + 8.0 * beta * (1.0 - a))
        return beta / c * k * (math.log(-math.expm1(-c * t2)) - math.log(-math.expm1(-c * t1)))
    T2 = P.switch_time(p, 0.0)
    if not t1 > T2:
        raise OutOfRegime(f"t1 = {t1} must exceed T2 = {T2}")
    if case is TildeCase.CASE_III:
        return -beta / c * (math.exp(-c * (t2 - T2)) - math.exp(-c * (t1 - T2)))
    lead = 1.0 + 8.0 * beta * (1.0 - a) / (c * n)
    expo = 8.0 * beta**2 * (1.0 - a) / (c * (c * n + 8.0 * beta * (1.0 - a)))
    return expo * (
        math.log1p(lead * math.exp(-c * (t2 - T2))) - math.log1p(lead * math.exp(-c * (t1 - T2)))
    )
