"""Explicit RK4 integration of the Fisher-KPP equation on flat tori."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MissingSnapshot, RangeViolation, StabilityViolation
from .field import ScalarField, TorusGrid, laplacian_array, load_snapshot, save_snapshot
from .params import ParamSet

RANGE_SLACK = 1e-9


def stable_dt(grid: TorusGrid, c: float, safety: float = 0.5) -> float:
    """``safety / (2 sum 1/dx_i^2 + c)``."""
    if not 0 < safety <= 1:
        raise ValueError(f"safety must lie in (0, 1], got {safety}")
    return safety / (2.0 * sum(1.0 / (h * h) for h in grid.spacing) + c)


def logistic_exact(f0: float, c: float, t):
    """Spatially constant solution, written to stay finite for large ``c t``."""
    return f0 / (f0 + (1.0 - f0) * np.exp(-c * np.asarray(t, dtype=float)))


@dataclass(frozen=True)
class SmoothRandom:
    seed: int = 0
    band: int = 4
    floor: float = 0.05


@dataclass(frozen=True)
class Bump:
    center: tuple = ()
    width: float = 1.0
    floor: float = 0.05
    height: float = 0.9


@dataclass(frozen=True)
class Constant:
    value: float = 0.5


def _wavevectors(n: int, band: int):
    """Half-space of integer wavevectors with ``0 < max|k_i| <= band``, in a fixed order."""
    for k in itertools.product(range(-band, band + 1), repeat=n):
        nz = [v for v in k if v != 0]
        if nz and nz[0] > 0:
            yield k


def _smooth_random(grid: TorusGrid, kind: SmoothRandom) -> np.ndarray:
    if not 0 < kind.floor < 0.5:
        raise RangeViolation(f"floor must lie in (0, 0.5), got {kind.floor}")
    if kind.band < 1:
        raise ValueError("band must be at least 1")
    rng = np.random.default_rng(kind.seed)
    xs = grid.coordinates()
    g = np.zeros(grid.shape)
    total = 0.0
    for k in _wavevectors(grid.n, kind.band):
        a, b = rng.standard_normal(2) / (1.0 + sum(v * v for v in k))
        phase = sum(2.0 * math.pi * kv * x / L for kv, x, L in zip(k, xs, grid.lengths))
        g += a * np.cos(phase) + b * np.sin(phase)
        total += abs(a) + abs(b)
    # |g| <= total pointwise, so the rescaled field lies in [floor, 1 - floor]
    return 0.5 + (0.5 - kind.floor) * g / total


def _bump(grid: TorusGrid, kind: Bump) -> np.ndarray:
    if not (kind.floor > 0 and kind.height >= 0 and kind.floor + kind.height < 1):
        raise RangeViolation(f"bump values [{kind.floor}, {kind.floor + kind.height}] leave (0, 1)")
    center = kind.center or tuple(0.5 * L for L in grid.lengths)
    if len(center) != grid.n:
        raise ValueError(f"center needs {grid.n} coordinates")
    g = np.ones(grid.shape)
    for x, x0, L in zip(grid.coordinates(), center, grid.lengths):
        kappa = (L / (2.0 * math.pi * kind.width)) ** 2
        g *= np.exp(kappa * (np.cos(2.0 * math.pi * (x - x0) / L) - 1.0))
    return kind.floor + kind.height * g


def make_initial(grid: TorusGrid, kind) -> ScalarField:
    if isinstance(kind, SmoothRandom):
        vals = _smooth_random(grid, kind)
    elif isinstance(kind, Bump):
        vals = _bump(grid, kind)
    elif isinstance(kind, Constant):
        if not 0 < kind.value < 1:
            raise RangeViolation(f"constant {kind.value} outside (0, 1)")
        vals = np.full(grid.shape, float(kind.value))
    else:
        raise TypeError(f"unknown initial data {kind!r}")
    return ScalarField(grid, vals)


@dataclass
class Trajectory:
    params: ParamSet
    grid: TorusGrid
    times: list
    snapshots: list
    dt_used: float

    def index_of(self, t: float) -> int:
        for i, s in enumerate(self.times):
            if math.isclose(s, t, rel_tol=1e-12, abs_tol=1e-14):
                return i
        raise MissingSnapshot(t)

    def at(self, t: float) -> ScalarField:
        return self.snapshots[self.index_of(t)]

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        lines = []
        for i, (t, snap) in enumerate(zip(self.times, self.snapshots)):
            name = f"snapshot_{i:05d}.txt"
            save_snapshot(d / name, snap, t)
            lines.append(f"{i} {t:.17g} {name}")
        (d / "manifest.txt").write_text("\n".join(lines) + "\n")
        p = self.params
        (d / "params.txt").write_text(
            f"n = {p.n}\nc = {p.c:.17g}\nalpha = {p.alpha:.17g}\nbeta = {p.beta:.17g}\ndt = {self.dt_used:.17g}\n"
        )

    @classmethod
    def load(cls, directory) -> "Trajectory":
        d = Path(directory)
        meta = {}
        for line in (d / "params.txt").read_text().splitlines():
            key, _, val = line.partition("=")
            meta[key.strip()] = val.strip()
        p = ParamSet(int(meta["n"]), float(meta["c"]), float(meta["alpha"]), float(meta["beta"]))
        times, snaps = [], []
        for line in (d / "manifest.txt").read_text().splitlines():
            if not line.strip():
                continue
            _, t, name = line.split()
            snap, _ = load_snapshot(d / name)
            times.append(float(t))
            snaps.append(snap)
        return cls(p, snaps[0].grid, times, snaps, float(meta["dt"]))


def _rk4_step(f, h, c, spacing):
    def rhs(g):
        return laplacian_array(g, spacing) + c * g * (1.0 - g)

    k1 = rhs(f)
    k2 = rhs(f + 0.5 * h * k1)
    k3 = rhs(f + 0.5 * h * k2)
    k4 = rhs(f + h * k3)
    return f + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_range(f, t):
    lo, hi = float(f.min()), float(f.max())
    if not (lo > -RANGE_SLACK and hi < 1.0 + RANGE_SLACK):
        raise StabilityViolation(f"values left (0, 1) at t = {t:.6g}: min {lo:.3g}, max {hi:.3g}")


def simulate(
    initial: ScalarField,
    p: ParamSet,
    t_end: float,
    sample_times=None,
    dt: float | None = None,
    safety: float = 0.5,
) -> Trajectory:
    """Integrate from ``t = 0`` and record snapshots at ``sample_times``.

    Steps of size ``dt`` are taken between samples; the last step before
    each sample is shortened so the sample time is hit exactly.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    grid = initial.grid
    samples = sorted(set(float(s) for s in (sample_times if sample_times is not None else [t_end])))
    if samples and (samples[0] <= 0 or samples[-1] > t_end * (1 + 1e-12)):
        raise ValueError(f"sample times must lie in (0, {t_end}]")
    f = np.array(initial.values, dtype=float)
    if not (f.min() > 0 and f.max() <= 1.0 + RANGE_SLACK):
        raise RangeViolation("initial data must lie in (0, 1]")
    limit = stable_dt(grid, p.c, 1.0)
    dt = stable_dt(grid, p.c, safety) if dt is None else float(dt)
    if not 0 < dt <= limit:
        raise StabilityViolation(f"dt = {dt} exceeds the explicit stability bound {limit}")
    spacing = grid.spacing
    t = 0.0
    times, snaps = [], []
    for target in samples:
        steps = max(1, math.ceil((target - t) / dt - 1e-9))
        start = t
        for k in range(steps - 1):
            f = _rk4_step(f, dt, p.c, spacing)
            t = start + (k + 1) * dt
            _check_range(f, t)
        f = _rk4_step(f, target - t, p.c, spacing)
        t = target
        _check_range(f, t)
        times.append(target)
        snaps.append(ScalarField(grid, f.copy()))
    return Trajectory(p, grid, times, snaps, dt)
