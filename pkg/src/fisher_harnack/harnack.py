"""The differential Harnack quantity and the pieces of its evolution inequality.

For a positive solution ``f`` of ``f_t = Δf + c f (1 - f)`` with
``u = log f``, the quantity

    h = Δu + alpha |∇u|^2 + beta f + phi(t) (+ psi(x))

is shown to stay nonnegative.  This module evaluates ``h`` on simulated
trajectories, checks its exact evolution identity under grid refinement,
exposes the algebraic terms ``P1 .. P8`` that the nonnegativity argument
is assembled from, and verifies the derivative bounds of the radial cutoff
used on noncompact domains.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import params as P
from . import phi as phimod
from .errors import (
    InfeasibleParams,
    InsufficientSnapshots,
    NonpositiveField,
    RadiusOutOfRange,
)
from .field import (
    ScalarField,
    gradient_array,
    hessian_frobenius_sq_array,
    laplacian_array,
)

TOLERANCE_CONSTANT = 10.0


def default_t_min(c: float) -> float:
    return 0.05 / c


def default_tolerance(dx: float, dt: float, beta: float, phi_value: float) -> float:
    """``10 (dx^2 + dt) max(1, |beta|, phi)``."""
    return TOLERANCE_CONSTANT * (dx * dx + dt) * max(1.0, abs(beta), phi_value)


def _log_field(values: np.ndarray) -> np.ndarray:
    if np.any(~(values > 0)):
        raise NonpositiveField("the Harnack quantity needs a strictly positive field")
    return np.log(values)


def _phi_free_part(f: np.ndarray, spacing, p: P.ParamSet):
    """``Δu + alpha |∇u|^2 + beta f`` together with ``u`` and its derivatives."""
    u = _log_field(f)
    grad = gradient_array(u, spacing)
    grad_sq = np.sum(grad * grad, axis=0)
    lap = laplacian_array(u, spacing)
    return lap + p.alpha * grad_sq + p.beta * f, u, grad, grad_sq, lap


def harnack_quantity(f_field: ScalarField, p: P.ParamSet, phi_value: float) -> ScalarField:
    core, *_ = _phi_free_part(f_field.values, f_field.grid.spacing, p)
    return ScalarField(f_field.grid, core + phi_value)


@dataclass(frozen=True)
class SampleRecord:
    t: float
    min_h: float
    argmin: tuple
    tol: float
    passed: bool


@dataclass
class HarnackReport:
    samples: list
    grid_spacing: float
    dt: float
    family: str
    identity_residuals: list = field(default_factory=list)

    @property
    def overall_pass(self) -> bool:
        return all(s.passed for s in self.samples)

    @property
    def worst_margin(self) -> float:
        return min((s.min_h + s.tol for s in self.samples), default=math.inf)

    def to_text(self) -> str:
        lines = []
        for s in self.samples:
            idx = ",".join(str(i) for i in s.argmin)
            lines.append(
                f"time={s.t:.17g} min_h={s.min_h:.17g} argmin={idx} tol={s.tol:.17g} "
                f"pass={'yes' if s.passed else 'no'}"
            )
        for t, r in self.identity_residuals:
            lines.append(f"identity time={t:.17g} max_residual={r:.17g}")
        lines.append("summary:")
        lines.append(f"  family={self.family}")
        lines.append(f"  dx={self.grid_spacing:.17g}")
        lines.append(f"  dt={self.dt:.17g}")
        lines.append(f"  tolerance={TOLERANCE_CONSTANT:g}*(dx^2+dt)*max(1,|beta|,phi)")
        lines.append(f"  samples={len(self.samples)}")
        lines.append(f"  overall_pass={'yes' if self.overall_pass else 'no'}")
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        recs = [json.dumps({**asdict(s), "argmin": list(s.argmin)}) for s in self.samples]
        recs.append(
            json.dumps(
                {
                    "summary": True,
                    "family": self.family,
                    "dx": self.grid_spacing,
                    "dt": self.dt,
                    "overall_pass": self.overall_pass,
                }
            )
        )
        return "\n".join(recs) + "\n"


def _check_regime(p: P.ParamSet, profile: phimod.PhiProfile) -> None:
    if profile.family in phimod.COMPACT_FAMILIES:
        verdict = P.validate_compact(p)
    elif profile.family in phimod.NONCOMPACT_FAMILIES:
        verdict = P.validate_noncompact(p)
    else:
        raise InfeasibleParams(f"profile family {profile.family.value} is not tied to an estimate")
    if not verdict.feasible:
        raise InfeasibleParams(f"{p} violates {verdict.violated_conditions}")
    if profile.params is not None and profile.params != p:
        raise InfeasibleParams("profile was built for a different parameter set")


def check_trajectory(traj, profile: phimod.PhiProfile, tol_policy=None, t_min: float | None = None) -> HarnackReport:
    """Minimum of ``h`` over the grid at every sample time ``t >= t_min``.

    ``tol_policy(dx, dt, beta, phi)`` gives the allowed negative excursion;
    ``psi`` is identically zero.  A parameter dimension larger than the
    grid dimension is allowed: a solution on a lower-dimensional torus is
    also a solution on the product with a flat factor.
    """
    p = traj.params
    _check_regime(p, profile)
    if p.n < traj.grid.n:
        raise InfeasibleParams(f"parameter dimension {p.n} is below the grid dimension {traj.grid.n}")
    tol_policy = tol_policy or default_tolerance
    t_min = default_t_min(p.c) if t_min is None else t_min
    dx = max(traj.grid.spacing)
    shape = traj.grid.shape
    records = []
    for t, snap in zip(traj.times, traj.snapshots):
        if t < t_min:
            continue
        phi_t = phimod.evaluate(profile, t)
        core, *_ = _phi_free_part(snap.values, traj.grid.spacing, p)
        h = core + phi_t
        flat = int(np.argmin(h))
        min_h = float(h.ravel()[flat])
        tol = float(tol_policy(dx, traj.dt_used, p.beta, phi_t))
        records.append(
            SampleRecord(float(t), min_h, tuple(int(i) for i in np.unravel_index(flat, shape)), tol, min_h >= -tol)
        )
    return HarnackReport(records, dx, traj.dt_used, profile.family.value)


def identity_rhs_without_phi(f, u_hess_sq, lap_u, grad_sq, p: P.ParamSet):
    """Right side of the evolution identity on a flat domain with ``psi = 0``, minus ``phi'``."""
    a, b, c = p.alpha, p.beta, p.c
    return (
        2.0 * (1.0 - a) * u_hess_sq
        - c * f * lap_u
        - grad_sq * f * (2.0 * a * c + 2.0 * b + c)
        + b * c * f
        - b * c * f * f
    )


def evolution_identity_residual(traj, profile: phimod.PhiProfile, t: float) -> ScalarField:
    """Pointwise ``|(∂t - Δ)h - 2∇u·∇h - RHS|`` at the sample time ``t``.

    The time derivative is a three-point difference over the neighbouring
    snapshots.  ``phi'`` appears identically on both sides and is cancelled
    analytically, so only the spatial part of ``h`` is differenced.
    """
    times = np.asarray(traj.times)
    hits = np.flatnonzero(np.isclose(times, t, rtol=1e-12, atol=1e-14))
    if hits.size == 0:
        raise InsufficientSnapshots(f"no snapshot at t = {t}")
    i = int(hits[0])
    if i == 0 or i == len(times) - 1:
        raise InsufficientSnapshots(f"t = {t} needs a snapshot on each side")
    p = traj.params
    spacing = traj.grid.spacing
    H = [_phi_free_part(traj.snapshots[j].values, spacing, p)[0] for j in (i - 1, i + 1)]
    core, u, grad, grad_sq, lap_u = _phi_free_part(traj.snapshots[i].values, spacing, p)
    tm, tp = times[i] - times[i - 1], times[i + 1] - times[i]
    dHdt = (-tp / (tm * (tm + tp))) * H[0] + ((tp - tm) / (tm * tp)) * core + (tm / (tp * (tm + tp))) * H[1]
    grad_core = gradient_array(core, spacing)
    lhs = dHdt - laplacian_array(core, spacing) - 2.0 * np.sum(grad * grad_core, axis=0)
    f = traj.snapshots[i].values
    rhs = identity_rhs_without_phi(f, hessian_frobenius_sq_array(u, spacing), lap_u, grad_sq, p)
    return ScalarField(traj.grid, np.abs(lhs - rhs))


@dataclass(frozen=True)
class PointData:
    """Pointwise ingredients of the P-terms; the cutoff entries default to ``psi = 0``."""

    grad_u_sq: float
    delta_u: float
    f_val: float
    grad_u_dot_grad_psi: float = 0.0
    laplacian_psi: float = 0.0


@dataclass(frozen=True)
class PTerms:
    P1: float
    P2: float
    P3: float
    P4: float
    P5: float
    P5_1: float
    P5_2: float
    P6: float
    P7: float
    P8: float
    cross_coefficient: float
    h: float


def p_terms(
    point: PointData,
    p: P.ParamSet,
    phi: float,
    psi: float = 0.0,
    phi_t: float = 0.0,
    eps_prime: float = 0.0,
) -> PTerms:
    """Closed forms of ``P1 .. P8`` at one point (flat domain, ``K = 0``).

    ``P8`` is ``nan`` when ``A(eps_prime) <= 0``.
    """
    if not point.f_val > 0:
        raise NonpositiveField("f must be positive")
    a, b, c, n = p.alpha, p.beta, p.c, p.n
    g2, ef = point.grad_u_sq, point.f_val
    k = 2.0 * (1.0 - a) / n
    lin = 4.0 * b * (1.0 - a) / n + c
    h = point.delta_u + a * g2 + b * ef + phi + psi
    cross = P.cross_term_coefficient(p)

    P1 = k * h - 2.0 * k * (a * g2 + b * ef + phi + psi) - c * ef
    P2 = k * (a * a * g2 * g2 + 2.0 * phi * psi) + 2.0 * a * k * phi * g2 + g2 * ef * cross
    P3 = ef * ef * b * b * k + ef * (lin * phi + c * b) + k * phi * phi + phi_t
    P4 = (
        2.0 * a * k * psi * g2
        - 2.0 * point.grad_u_dot_grad_psi
        + ef * psi * lin
        + k * psi * psi
        - point.laplacian_psi
    )
    mu1, nu1, omega1 = P.compact_constants(p)
    P5 = -((mu1 + nu1 * phi) ** 2) + (omega1 * phi) ** 2 + phi_t
    P5_1 = lin * phi + b * c
    P5_2 = k * phi * phi + phi_t
    A = P.quadratic_coefficient(p, eps_prime)
    P6 = A * ef * ef + ef * (lin * phi + c * b) + k * phi * phi + phi_t
    P7 = 2.0 * a * k * psi * g2 - 2.0 * point.grad_u_dot_grad_psi + 2.0 * eps_prime / n * psi * psi - point.laplacian_psi
    if A > 0:
        mu, nu, omega = P.a_based_constants(p, eps_prime)
        P8 = -((mu + nu * phi) ** 2) + (omega * phi) ** 2 + phi_t
    else:
        P8 = math.nan
    return PTerms(P1, P2, P3, P4, P5, P5_1, P5_2, P6, P7, P8, cross, h)


def cauchy_schwarz_rhs(point: PointData, p: P.ParamSet, phi: float, psi: float = 0.0, phi_t: float = 0.0) -> float:
    """Lower bound for ``(∂t - Δ)h - 2∇u·∇h`` after ``|∇∇u|^2 >= (Δu)^2/n``."""
    a, b, c, n = p.alpha, p.beta, p.c, p.n
    ef, du, g2 = point.f_val, point.delta_u, point.grad_u_sq
    return (
        2.0 * (1.0 - a) / n * du * du
        - c * ef * du
        - g2 * ef * (2.0 * a * c + 2.0 * b + c)
        + b * c * ef
        - b * c * ef * ef
        + phi_t
        - point.laplacian_psi
        - 2.0 * point.grad_u_dot_grad_psi
    )


# Radial cutoff  Psi(rho) = (R^2 + rho^2) / (R^2 - rho^2)^2


def cutoff_profile(R: float, rho):
    rho = np.asarray(rho, dtype=float)
    return (R * R + rho * rho) / (R * R - rho * rho) ** 2


def cutoff_radial_derivative(R: float, rho):
    rho = np.asarray(rho, dtype=float)
    return (6.0 * rho * R * R + 2.0 * rho**3) / (R * R - rho * rho) ** 3


def cutoff_second_derivative(R: float, rho):
    rho = np.asarray(rho, dtype=float)
    r2, p2 = R * R, rho * rho
    return (6.0 * r2 * r2 + 36.0 * p2 * r2 + 6.0 * p2 * p2) / (r2 - p2) ** 4


def cutoff_laplacian(n: int, R: float, rho):
    """``Psi'' + (n-1) Psi'/rho`` for ``rho = |x|`` in flat space, finite at the origin."""
    rho = np.asarray(rho, dtype=float)
    r2, p2 = R * R, rho * rho
    first_over_rho = (6.0 * r2 + 2.0 * p2) / (r2 - p2) ** 3
    return cutoff_second_derivative(R, rho) + (n - 1) * first_over_rho


def cutoff_threshold(n: int, alpha: float, eps_prime: float) -> float:
    """Smallest admissible scale ``k`` for the cutoff to keep ``P7`` positive."""
    c2 = 6.0 * (n - 1) + 18.0
    return max(c2 * n / eps_prime, 18.0 * n * n / (4.0 * alpha * (1.0 - alpha) * eps_prime))


@dataclass
class CutoffReport:
    n: int
    R: float
    radii: np.ndarray
    psi: np.ndarray
    grad_sq: np.ndarray
    laplacian: np.ndarray
    gradient_slack: np.ndarray  # 18 Psi^3 - |grad Psi|^2
    laplacian_slack: np.ndarray  # c2 Psi^2 - lap Psi
    c2: float
    k: float
    k_threshold: float | None = None
    p7_lower: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        ok = bool(np.all(self.gradient_slack >= 0) and np.all(self.laplacian_slack >= 0))
        if self.p7_lower is not None:
            ok = ok and bool(np.all(self.p7_lower > 0))
        return ok

    def to_text(self) -> str:
        lines = [
            f"n={self.n} R={self.R:.17g} k={self.k:.17g} c2={self.c2:.17g}",
            f"radii={self.radii.size}",
            f"min_gradient_slack={float(np.min(self.gradient_slack)):.17g}",
            f"min_laplacian_slack={float(np.min(self.laplacian_slack)):.17g}",
        ]
        if self.k_threshold is not None:
            lines.append(f"k_threshold={self.k_threshold:.17g}")
        if self.p7_lower is not None:
            lines.append(f"min_p7_lower_bound={float(np.min(self.p7_lower)):.17g}")
        lines.append(f"pass={'yes' if self.passed else 'no'}")
        return "\n".join(lines) + "\n"


def cutoff_check(
    n: int,
    R: float,
    k: float = 1.0,
    sample_radii=None,
    alpha: float | None = None,
    eps_prime: float | None = None,
) -> CutoffReport:
    """Evaluate ``Psi`` and its derivatives at the given radii and test both bounds.

    If ``alpha`` and ``eps_prime`` are given, the completed-square lower
    bound of ``P7`` for ``psi = k Psi`` is evaluated as well.
    """
    if not R >= 1:
        raise RadiusOutOfRange(f"R must be at least 1, got {R}")
    if sample_radii is None:
        sample_radii = np.linspace(0.0, 0.99 * R, 100)
    rho = np.asarray(sample_radii, dtype=float)
    if np.any(rho < 0) or np.any(rho >= R):
        raise RadiusOutOfRange(f"radii must lie in [0, {R})")
    c2 = 6.0 * (n - 1) + 18.0
    psi = cutoff_profile(R, rho)
    grad_sq = cutoff_radial_derivative(R, rho) ** 2
    lap = cutoff_laplacian(n, R, rho)
    report = CutoffReport(
        n=n,
        R=float(R),
        radii=rho,
        psi=psi,
        grad_sq=grad_sq,
        laplacian=lap,
        gradient_slack=18.0 * psi**3 - grad_sq,
        laplacian_slack=c2 * psi**2 - lap,
        c2=c2,
        k=float(k),
    )
    if alpha is not None and eps_prime is not None:
        report.k_threshold = cutoff_threshold(n, alpha, eps_prime)
        s = k * psi
        report.p7_lower = (
            2.0 * eps_prime / n * s * s - k * lap - n * k * k * grad_sq / (4.0 * alpha * (1.0 - alpha) * s)
        )
    return report


def fit_order(spacings, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(spacing)``; ``nan`` if any error is not positive."""
    dx = np.asarray(spacings, dtype=float)
    err = np.asarray(errors, dtype=float)
    if dx.size < 2 or np.any(~(err > 0)):
        return math.nan
    slope, _ = np.polyfit(np.log(dx), np.log(err), 1)
    return float(slope)


@dataclass
class RefinementRow:
    points: int
    dx: float
    dt: float
    max_identity_residual: float
    min_h: float

    @property
    def min_h_negative_part(self) -> float:
        return max(0.0, -self.min_h)


@dataclass
class RefinementStudy:
    rows: list
    h_changes: list  # max |h_m - h_2m| on the shared nodes, for consecutive doublings

    @property
    def identity_order(self) -> float:
        return fit_order([r.dx for r in self.rows], [r.max_identity_residual for r in self.rows])

    @property
    def negative_part_order(self) -> float:
        return fit_order([r.dx for r in self.rows], [r.min_h_negative_part for r in self.rows])

    @property
    def h_order(self) -> float:
        if not self.h_changes:
            return math.nan
        return fit_order([r.dx for r in self.rows[: len(self.h_changes)]], self.h_changes)


def refinement_study(
    p: P.ParamSet,
    profile: phimod.PhiProfile,
    initial_for,
    resolutions,
    t_samples,
    identity_time: float = 1.0,
    tau: float = 1e-3,
    safety: float = 0.5,
) -> RefinementStudy:
    """Run one simulation per resolution and collect the refinement diagnostics.

    ``initial_for(points)`` returns the initial field on the grid with that
    many points per axis.  When consecutive resolutions double, the change
    of ``h`` on the coarse nodes is recorded; it bounds how far the discrete
    ``h`` can sit below its grid-independent limit.
    """
    from .solver import simulate

    resolutions = list(resolutions)
    samples = sorted(set(float(t) for t in t_samples) | {identity_time - tau, identity_time, identity_time + tau})
    rows, h_fields = [], []
    for m in resolutions:
        f0 = initial_for(m)
        traj = simulate(f0, p, samples[-1], samples, safety=safety)
        res = evolution_identity_residual(traj, profile, identity_time)
        report = check_trajectory(traj, profile)
        spacing = traj.grid.spacing
        h_fields.append(np.stack([_phi_free_part(s.values, spacing, p)[0] for s in traj.snapshots]))
        rows.append(
            RefinementRow(
                m,
                max(spacing),
                traj.dt_used,
                float(res.values.max()),
                min(s.min_h for s in report.samples),
            )
        )
    changes = []
    for k in range(len(resolutions) - 1):
        if resolutions[k + 1] != 2 * resolutions[k]:
            changes = []
            break
        coarse, fine = h_fields[k], h_fields[k + 1]
        sl = (slice(None),) + (slice(None, None, 2),) * (fine.ndim - 1)
        changes.append(float(np.max(np.abs(coarse - fine[sl]))))
    return RefinementStudy(rows, changes)
