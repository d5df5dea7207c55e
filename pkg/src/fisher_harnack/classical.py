"""Classical Harnack ratio bounds obtained by integrating the differential estimate.

Along the straight space-time path between ``(x1, t1)`` and ``(x2, t2)``,

    f(x2, t2) / f(x1, t1) >= exp( int_{t1}^{t2} (-beta - phi0) dt )
                             * exp( -d(x1, x2)^2 / (4 (1 - alpha) (t2 - t1)) ),

valid when ``0 < f < 1`` and ``beta + c >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import params as P
from . import phi as phimod
from .errors import (
    DegenerateInterval,
    InfeasibleParams,
    OutOfRegime,
    PairTooClose,
    RangeViolation,
)
from .field import geodesic_distance
from .parallel import ordered_map

MIN_GAP_STEPS = 10


def _require_classical(p: P.ParamSet) -> None:
    verdict = P.validate_compact(p)
    if not verdict.feasible:
        raise InfeasibleParams(f"{p} violates {verdict.violated_conditions}")
    if p.beta + p.c < 0:
        raise InfeasibleParams(f"the ratio bound needs beta + c >= 0, got {p.beta + p.c}")


def distance_factor(alpha: float, d: float, t1: float, t2: float) -> float:
    if t2 == t1:
        if d > 0:
            raise DegenerateInterval("distance term undefined for t1 = t2 and d > 0")
        return 1.0
    return math.exp(-d * d / (4.0 * (1.0 - alpha) * (t2 - t1)))


def ratio_bound(p: P.ParamSet, d: float, t1: float, t2: float) -> float:
    """Lower bound for ``f(x2, t2) / f(x1, t1)`` at distance ``d``."""
    _require_classical(p)
    if not 0 < t1 <= t2:
        raise ValueError(f"need 0 < t1 <= t2, got {t1}, {t2}")
    factor = distance_factor(p.alpha, d, t1, t2)
    return math.exp(phimod.tilde_integral(p, t1, t2)) * factor


def printed_bound(p: P.ParamSet, d: float, t1: float, t2: float) -> float:
    """The same bound written case by case as a power or exponential."""
    _require_classical(p)
    c, n, a, b = p.c, p.n, p.alpha, p.beta
    factor = distance_factor(a, d, t1, t2)
    case = phimod.tilde_case(p)
    if case is phimod.TildeCase.CASE_I:
        expo = 8.0 * b * b * (1.0 - a) / (c * c * n + 8.0 * b * c * (1.0 - a))
        return ((1.0 - math.exp(-c * t2)) / (1.0 - math.exp(-c * t1))) ** expo * factor
    T2 = P.switch_time(p, 0.0)
    if not t1 > T2:
        raise OutOfRegime(f"t1 = {t1} must exceed T2 = {T2}")
    if case is phimod.TildeCase.CASE_III:
        return math.exp(-b / c * (math.exp(-c * (t2 - T2)) - math.exp(-c * (t1 - T2)))) * factor
    lead = 1.0 + 8.0 * b * (1.0 - a) / (c * n)
    expo = 8.0 * b * b * (1.0 - a) / (c * (c * n + 8.0 * b * (1.0 - a)))
    ratio = (lead * math.exp(-c * (t2 - T2)) + 1.0) / (lead * math.exp(-c * (t1 - T2)) + 1.0)
    return ratio**expo * factor


@dataclass(frozen=True)
class RatioCheck:
    x1: tuple
    t1: float
    x2: tuple
    t2: float
    case_tag: str
    distance: float
    lhs: float
    rhs: float
    tol: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tol

    def to_line(self) -> str:
        def pt(x):
            return ",".join(format(v, ".17g") for v in x)

        return (
            f"x1={pt(self.x1)} t1={self.t1:.17g} x2={pt(self.x2)} t2={self.t2:.17g} "
            f"case={self.case_tag} d={self.distance:.17g} lhs={self.lhs:.17g} rhs={self.rhs:.17g} "
            f"margin={self.margin:.17g} tol={self.tol:.17g} pass={'yes' if self.passed else 'no'}"
        )


def default_ratio_tolerance(rhs: float) -> float:
    return 1e-3 * rhs


def _node_point(grid, idx) -> tuple:
    return tuple(i * h for i, h in zip(idx, grid.spacing))


def verify_pairs(traj, p: P.ParamSet, pairs, tol_policy=None, workers: int | None = None) -> list:
    """Check the ratio bound at each ``(x1, t1, x2, t2)``; results keep the input order.

    Points are snapped to their nearest grid nodes and the distance is the
    torus distance between those nodes, so both sides refer to the same
    pair of space-time points.
    """
    _require_classical(p)
    for t, snap in zip(traj.times, traj.snapshots):
        v = snap.values
        if not (v.min() > 0 and v.max() < 1):
            raise RangeViolation(f"the ratio bound needs 0 < f < 1; violated at t = {t}")
    tol_policy = tol_policy or default_ratio_tolerance
    case = phimod.tilde_case(p).value
    grid = traj.grid

    def check(pair):
        x1, t1, x2, t2 = pair
        if t2 < t1:
            raise ValueError(f"pairs need t1 <= t2, got {t1}, {t2}")
        if 0 < t2 - t1 < MIN_GAP_STEPS * traj.dt_used:
            raise PairTooClose(f"t2 - t1 = {t2 - t1} is below {MIN_GAP_STEPS} time steps")
        i1, i2 = grid.nearest_index(x1), grid.nearest_index(x2)
        n1, n2 = _node_point(grid, i1), _node_point(grid, i2)
        d = geodesic_distance(grid, n1, n2)
        lhs = traj.at(t2).values[i2] / traj.at(t1).values[i1]
        rhs = ratio_bound(p, d, t1, t2)
        return RatioCheck(
            tuple(float(v) for v in np.atleast_1d(x1)),
            float(t1),
            tuple(float(v) for v in np.atleast_1d(x2)),
            float(t2),
            case,
            d,
            float(lhs),
            rhs,
            float(tol_policy(rhs)),
        )

    return ordered_map(check, pairs, workers)


def parse_pairs(text: str, n: int) -> list:
    """Parse lines ``x1 t1 x2 t2`` with ``n`` space-separated coordinates per point."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok = [float(v) for v in line.split()]
        if len(tok) != 2 * n + 2:
            raise ValueError(f"line {lineno}: expected {2 * n + 2} numbers, got {len(tok)}")
        pairs.append((tuple(tok[:n]), tok[n], tuple(tok[n + 1 : 2 * n + 1]), tok[2 * n + 1]))
    return pairs


def random_pairs(grid, times, count: int, seed: int, min_gap: float = 0.0) -> list:
    """``count`` reproducible pairs drawn from grid nodes and the given sample times."""
    rng = np.random.default_rng(seed)
    times = sorted(times)
    out = []
    while len(out) < count:
        a, b = sorted(rng.choice(len(times), size=2, replace=False))
        t1, t2 = times[a], times[b]
        if t2 - t1 < min_gap:
            continue
        pts = [tuple(rng.integers(0, m) * h for m, h in zip(grid.shape, grid.spacing)) for _ in range(2)]
        out.append((pts[0], t1, pts[1], t2))
    return out
