"""Flat periodic grids and second-order finite-difference calculus on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on ``[0, L_1) x ... x [0, L_n)`` with periodic wrap."""

    points_per_axis: tuple
    lengths: tuple

    def __post_init__(self):
        pts = tuple(int(m) for m in self.points_per_axis)
        lens = tuple(float(x) for x in self.lengths)
        if not 1 <= len(pts) <= 3:
            raise ValueError(f"tori of dimension 1..3 are supported, got {len(pts)}")
        if len(lens) != len(pts):
            raise ValueError("points_per_axis and lengths differ in length")
        if any(m < 8 for m in pts):
            raise ValueError(f"need at least 8 points per axis, got {pts}")
        if any(not x > 0 for x in lens):
            raise ValueError(f"lengths must be positive, got {lens}")
        object.__setattr__(self, "points_per_axis", pts)
        object.__setattr__(self, "lengths", lens)

    @classmethod
    def uniform(cls, n: int, points: int, length: float) -> "TorusGrid":
        return cls((points,) * n, (length,) * n)

    @property
    def n(self) -> int:
        return len(self.points_per_axis)

    @property
    def shape(self) -> tuple:
        return self.points_per_axis

    @property
    def spacing(self) -> tuple:
        return tuple(L / m for L, m in zip(self.lengths, self.points_per_axis))

    @property
    def size(self) -> int:
        return math.prod(self.points_per_axis)

    def coordinates(self) -> list:
        """Meshgrid arrays (``ij`` indexing) of node coordinates."""
        axes = [np.arange(m) * h for m, h in zip(self.points_per_axis, self.spacing)]
        return np.meshgrid(*axes, indexing="ij")

    def nearest_index(self, x) -> tuple:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.n,):
            raise ValueError(f"point must have {self.n} coordinates, got {x.tolist()}")
        idx = []
        for xi, h, m in zip(x, self.spacing, self.points_per_axis):
            idx.append(int(np.floor(xi / h + 0.5)) % m)
        return tuple(idx)


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def map(self, func) -> "ScalarField":
        return ScalarField(self.grid, func(self.values))


def _shift(a, axis, k):
    return np.roll(a, k, axis=axis)


def laplacian_array(values: np.ndarray, spacing) -> np.ndarray:
    out = np.zeros_like(values)
    for axis, h in enumerate(spacing):
        out += (_shift(values, axis, -1) - 2.0 * values + _shift(values, axis, 1)) / (h * h)
    return out


def gradient_array(values: np.ndarray, spacing) -> np.ndarray:
    """Stack of centered first differences, shape ``(n, *grid.shape)``."""
    return np.stack(
        [(_shift(values, axis, -1) - _shift(values, axis, 1)) / (2.0 * h) for axis, h in enumerate(spacing)]
    )


def hessian_frobenius_sq_array(values: np.ndarray, spacing) -> np.ndarray:
    out = np.zeros_like(values)
    n = len(spacing)
    for i in range(n):
        hi = spacing[i]
        d2 = (_shift(values, i, -1) - 2.0 * values + _shift(values, i, 1)) / (hi * hi)
        out += d2 * d2
        for j in range(i + 1, n):
            hj = spacing[j]
            pp = _shift(_shift(values, i, -1), j, -1)
            mm = _shift(_shift(values, i, 1), j, 1)
            pm = _shift(_shift(values, i, -1), j, 1)
            mp = _shift(_shift(values, i, 1), j, -1)
            mixed = (pp - pm - mp + mm) / (4.0 * hi * hj)
            out += 2.0 * mixed * mixed
    return out


def gradient(field: ScalarField) -> np.ndarray:
    return gradient_array(field.values, field.grid.spacing)


def laplacian(field: ScalarField) -> ScalarField:
    return ScalarField(field.grid, laplacian_array(field.values, field.grid.spacing))


def hessian_frobenius_sq(field: ScalarField) -> ScalarField:
    """Pointwise ``sum_ij (d_i d_j u)^2``; mixed partials use the 4-point cross stencil."""
    return ScalarField(field.grid, hessian_frobenius_sq_array(field.values, field.grid.spacing))


def geodesic_distance(grid: TorusGrid, x1, x2) -> float:
    d = np.abs(np.atleast_1d(np.asarray(x1, float)) - np.atleast_1d(np.asarray(x2, float)))
    L = np.asarray(grid.lengths)
    d = np.mod(d, L)
    return float(np.linalg.norm(np.minimum(d, L - d)))


def save_snapshot(path, field: ScalarField, t: float) -> None:
    g = field.grid
    header = " ".join(
        [str(g.n)] + [str(m) for m in g.points_per_axis] + [format(x, ".17g") for x in g.lengths] + [format(t, ".17g")]
    )
    body = "\n".join(format(v, ".17g") for v in field.values.ravel(order="C"))
    Path(path).write_text(header + "\n" + body + "\n")


def load_snapshot(path) -> tuple[ScalarField, float]:
    lines = Path(path).read_text().split("\n")
    head = lines[0].split()
    n = int(head[0])
    pts = tuple(int(v) for v in head[1 : 1 + n])
    lens = tuple(float(v) for v in head[1 + n : 1 + 2 * n])
    t = float(head[1 + 2 * n])
    grid = TorusGrid(pts, lens)
    vals = np.array([float(v) for v in lines[1:] if v.strip()], dtype=float)
    if vals.size != grid.size:
        raise ValueError(f"{path}: expected {grid.size} values, found {vals.size}")
    return ScalarField(grid, vals.reshape(pts)), t
