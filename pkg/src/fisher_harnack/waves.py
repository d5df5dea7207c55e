"""Traveling plane waves and the wave-speed bounds implied by the Harnack estimate.

A plane wave ``f(x, t) = v(x.a + eta t)`` has a profile solving

    v'' = eta v' - c v (1 - v),    v(-inf) = 0,  v(+inf) = 1.

Profiles are built by shooting from the saddle at ``v = 1`` into the
region ``v < 1``.  Writing ``xi = -z``, ``s = log v`` and ``p = v_xi / v``
turns the profile equation into

    s' = p,    p' = -p^2 - eta p - c (1 - e^s),

which stays well scaled as ``v -> 0``.  Once ``p < -eta`` the Riccati term
forces ``p -> -inf`` in finite ``xi``, so ``v`` reaches zero and the
orbit is oscillatory; otherwise ``p`` settles at the slow eigenvalue and
the orbit is a monotone front.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import params as P
from . import phi as phimod
from .errors import BracketFailure, InfeasibleParams, IntegrationFailure, UnsupportedDimension

START_OFFSET = 1e-6


class FrontShape(enum.Enum):
    MONOTONE_FRONT = "monotone_front"
    OSCILLATORY = "oscillatory"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class WaveProfile:
    eta: float
    c: float
    z_samples: np.ndarray
    v_samples: np.ndarray
    classification: FrontShape
    tail_rate: float = math.nan

    def value_at(self, z) -> np.ndarray:
        """Profile value by interpolation of ``log v``; outside the window the ends are held."""
        return np.exp(np.interp(z, self.z_samples, np.log(self.v_samples)))


def slow_eigenvalue(eta: float, c: float) -> float:
    """Decay rate of the front as ``v -> 0``; requires ``eta^2 >= 4c``."""
    disc = eta * eta - 4.0 * c
    if disc < 0:
        return math.nan
    return 2.0 * c / (eta + math.sqrt(disc))


def default_span(c: float, tol: float) -> float:
    """Window long enough to see one oscillation for speeds ``tol`` below ``2 sqrt(c)``."""
    rc = math.sqrt(c)
    return 60.0 / rc + 2.0 * math.pi / math.sqrt(rc * tol)


def shoot_profile(eta: float, c: float, z_span: float | None = None, tol: float = 1e-3, samples: int = 2001) -> WaveProfile:
    if not (eta > 0 and c > 0):
        raise ValueError("eta and c must be positive")
    span = default_span(c, tol) if z_span is None else float(z_span)
    delta = START_OFFSET
    unstable = 0.5 * (-eta + math.sqrt(eta * eta + 4.0 * c))
    y0 = [math.log1p(-delta), -unstable * delta / (1.0 - delta)]

    def rhs(_, y):
        s, p = y
        return [p, -p * p - eta * p - c * (1.0 - math.exp(s))]

    def undershoot(_, y):
        return y[1] + eta

    def overshoot(_, y):
        return y[0]

    undershoot.terminal = True
    undershoot.direction = -1
    overshoot.terminal = True
    overshoot.direction = 1

    sol = solve_ivp(
        rhs,
        (0.0, span),
        y0,
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
        events=(undershoot, overshoot),
        dense_output=True,
    )
    if sol.status < 0:
        raise IntegrationFailure(f"profile integration failed at eta={eta}: {sol.message}")
    if sol.t_events[0].size:
        shape = FrontShape.OSCILLATORY
    elif sol.t_events[1].size:
        shape = FrontShape.DIVERGED
    else:
        shape = FrontShape.MONOTONE_FRONT
    xi = np.linspace(0.0, sol.t[-1], samples)
    s, p = sol.sol(xi)
    z = -xi[::-1]
    v = np.exp(s[::-1])
    # place v = 1/2 at z = 0 when the profile crosses it
    if v[0] < 0.5 < v[-1]:
        z = z - np.interp(0.5, v, z)
    tail = -float(p[-1]) if shape is FrontShape.MONOTONE_FRONT else math.nan
    return WaveProfile(float(eta), float(c), z, v, shape, tail)


def scan_speeds(c: float, speeds, tol: float = 1e-3) -> list:
    return [(float(e), shoot_profile(e, c, tol=tol).classification) for e in speeds]


def minimal_speed_search(c: float, tol: float = 1e-3) -> float:
    """Bisection for the slowest monotone front on ``[sqrt(c)/2, 4 sqrt(c)]``."""
    rc = math.sqrt(c)
    lo, hi = 0.5 * rc, 4.0 * rc
    if shoot_profile(lo, c, tol=tol).classification is not FrontShape.OSCILLATORY:
        raise BracketFailure(f"eta = {lo} is not oscillatory")
    if shoot_profile(hi, c, tol=tol).classification is not FrontShape.MONOTONE_FRONT:
        raise BracketFailure(f"eta = {hi} is not a monotone front")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if shoot_profile(mid, c, tol=tol).classification is FrontShape.MONOTONE_FRONT:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def boundary_beta(n: int, c: float, alpha: float) -> float:
    """The beta used to push the speed bound to its limit as ``alpha -> 0``."""
    return P.compact_beta_bound(n, c, alpha)


def m_prime(p: P.ParamSet, phi_value: float, v_value: float) -> float:
    return 4.0 * (1.0 - p.alpha) * ((p.c - phi_value) - (p.beta + p.c) * v_value)


def m_double_prime(p: P.ParamSet) -> float:
    """``4 (1 - alpha) (c + mu2 / (nu2 + omega2))``; only needs the noncompact constants to exist."""
    mu2, nu2, omega2 = P.noncompact_constants(p)
    return 4.0 * (1.0 - p.alpha) * (p.c + mu2 / (nu2 + omega2))


def speed_bound_chain(p: P.ParamSet, profile: WaveProfile, t: float, z: float) -> tuple[float, float, float]:
    """``(M', M'', M''')`` at time ``t`` and profile coordinate ``z``."""
    verdict = P.validate_noncompact(p)
    if not verdict.feasible:
        raise InfeasibleParams(f"{p} violates {verdict.violated_conditions}")
    phi1 = phimod.evaluate(phimod.noncompact_profile(p, limit=True), t)
    v = float(profile.value_at(z))
    return m_prime(p, phi1, v), m_double_prime(p), P.wave_speed_bound(p.n, p.c)


@dataclass(frozen=True)
class Witness:
    z: float
    v: float
    t: float
    M_prime: float
    M_double_prime: float
    M_triple_prime: float

    @property
    def gap(self) -> float:
        return self.M_prime - self.M_double_prime


def find_witness(p: P.ParamSet, profile: WaveProfile, t: float, v_max: float = 1e-4, eps3: float = 1e-3) -> Witness | None:
    """Tail point with ``v <= v_max`` where ``M' > M'' - eps3 / 3``, or ``None``."""
    tail = np.flatnonzero(profile.v_samples <= v_max)
    best = None
    for i in tail:
        z = float(profile.z_samples[i])
        m1, m2, m3 = speed_bound_chain(p, profile, t, z)
        w = Witness(z, float(profile.v_samples[i]), t, m1, m2, m3)
        if best is None or w.gap > best.gap:
            best = w
    if best is None or not best.gap > -eps3 / 3.0:
        return None
    return best


@dataclass(frozen=True)
class SpeedBoundReport:
    n: int
    c: float
    eta_min: float
    searched: bool
    bound: float

    @property
    def margin(self) -> float:
        return self.eta_min**2 - self.bound

    @property
    def passed(self) -> bool:
        return self.margin >= 0

    def to_text(self) -> str:
        how = "bisection" if self.searched else "analytic"
        return (
            f"n={self.n} c={self.c:.17g}\n"
            f"eta_min={self.eta_min:.17g} ({how})\n"
            f"eta_min^2={self.eta_min ** 2:.17g}\n"
            f"speed_bound={self.bound:.17g}\n"
            f"margin={self.margin:.17g}\n"
            f"pass={'yes' if self.passed else 'no'}\n"
        )


def verify_speed_bound(n: int, c: float, tol: float = 1e-3) -> SpeedBoundReport:
    """Compare the squared minimal speed with the dimension-dependent lower bound.

    Plane waves in any dimension reduce to the one-dimensional profile
    equation, so the minimal speed is searched for ``n = 1`` and taken as
    ``2 sqrt(c)`` otherwise.
    """
    if n not in (1, 2, 3):
        raise UnsupportedDimension(f"the bound is stated for n = 1, 2, 3 only, got {n}")
    bound = P.wave_speed_bound(n, c)
    if n == 1:
        return SpeedBoundReport(n, c, minimal_speed_search(c, tol), True, bound)
    return SpeedBoundReport(n, c, 2.0 * math.sqrt(c), False, bound)
