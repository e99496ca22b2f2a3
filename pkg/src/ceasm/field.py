"""Sampling grids, complex fields, padding and aperture generators.

Arrays are stored row-major with shape ``(n_y, n_x)``.  A one-dimensional
problem is a grid with ``n_y == 1``; such an axis is never padded or
transformed.

Padding layout: along every axis with ``n > 1`` the source window occupies
indices ``[n // 2, n // 2 + n)`` of the doubled window.  :func:`crop_center`
uses the same offset, so cropping a padded field returns the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "GridSpec",
    "ComplexField",
    "make_grid",
    "rect_aperture",
    "triangle_aperture",
    "zero_pad",
    "crop_center",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling geometry with square pixels."""

    n_x: int
    n_y: int
    pitch: float

    def __post_init__(self):
        if int(self.n_x) != self.n_x or int(self.n_y) != self.n_y:
            raise InvalidArgumentError("sample counts must be integers")
        if self.n_x < 1 or self.n_y < 1:
            raise InvalidArgumentError(f"sample counts must be >= 1, got ({self.n_x}, {self.n_y})")
        if not np.isfinite(self.pitch) or self.pitch <= 0:
            raise InvalidArgumentError(f"pitch must be positive, got {self.pitch}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_y, self.n_x)

    @property
    def extent(self) -> Tuple[float, float]:
        """Physical size ``(n_x * pitch, n_y * pitch)`` in meters."""
        return (self.n_x * self.pitch, self.n_y * self.pitch)

    @property
    def f_max(self) -> float:
        """Largest frequency a grid of this pitch can record (cycles/m)."""
        return 1.0 / (2.0 * self.pitch)

    @property
    def is_1d(self) -> bool:
        return self.n_y == 1

    def axis_size(self, axis: str) -> int:
        if axis == "x":
            return self.n_x
        if axis == "y":
            return self.n_y
        raise InvalidArgumentError(f"axis must be 'x' or 'y', got {axis!r}")

    def coords(self, axis: str) -> np.ndarray:
        """Centered sample positions ``(i - n // 2) * pitch`` along an axis."""
        n = self.axis_size(axis)
        return (np.arange(n) - n // 2) * self.pitch


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex amplitude samples on a :class:`GridSpec`.

    ``data`` is copied into a read-only ``complex128`` array of shape
    ``grid.shape``.
    """

    grid: GridSpec
    data: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.complex128, copy=True)
        if arr.size != self.grid.n_x * self.grid.n_y:
            raise InvalidArgumentError(
                f"data has {arr.size} samples, grid expects {self.grid.n_x * self.grid.n_y}"
            )
        arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("field data must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def energy(self) -> float:
        """Sum of ``|u|**2`` over all samples (no pitch weighting)."""
        return float(np.sum(np.abs(self.data) ** 2))

    def with_data(self, data: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, data)


def make_grid(n_x: int, n_y: int, pitch: float) -> GridSpec:
    """Build a :class:`GridSpec`, raising :class:`InvalidArgumentError` on bad input."""
    return GridSpec(int(n_x), int(n_y), float(pitch))


def _centered_slice(n: int, width: int) -> slice:
    start = (n - width) // 2
    return slice(start, start + width)


def rect_aperture(grid: GridSpec, width_samples_x: int, width_samples_y: int = 1) -> ComplexField:
    """Centered rectangle of unit amplitude.

    When ``n - width`` is odd the surplus zero sample sits on the high-index
    side.
    """
    for name, w, n in (("x", width_samples_x, grid.n_x), ("y", width_samples_y, grid.n_y)):
        if w < 1 or w > n:
            raise InvalidArgumentError(f"aperture width along {name} must be in [1, {n}], got {w}")
    data = np.zeros(grid.shape, dtype=np.complex128)
    data[_centered_slice(grid.n_y, width_samples_y), _centered_slice(grid.n_x, width_samples_x)] = 1.0
    return ComplexField(grid, data)


def _edge(a, b, px, py):
    return (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])


def triangle_aperture(
    grid: GridSpec,
    v1: Sequence[float],
    v2: Sequence[float],
    v3: Sequence[float],
) -> ComplexField:
    """Rasterize a filled triangle with unit amplitude.

    Vertex coordinates are meters measured from the grid corner, so the
    pixel ``(row j, column i)`` has its center at ``((i + 0.5) * pitch,
    (j + 0.5) * pitch)``.  A pixel is lit when its center lies inside the
    triangle or on one of its edges.
    """
    verts = [np.asarray(v, dtype=float).reshape(2) for v in (v1, v2, v3)]
    ex, ey = grid.extent
    for v in verts:
        if not (0.0 <= v[0] <= ex and 0.0 <= v[1] <= ey):
            raise InvalidArgumentError(f"vertex {tuple(v)} lies outside the grid extent {(ex, ey)}")
    a, b, c = verts
    area2 = _edge(a, b, c[0], c[1])
    scale = max(np.ptp([v[0] for v in verts]), np.ptp([v[1] for v in verts]))
    if abs(area2) <= 1e-12 * scale * scale:
        raise InvalidArgumentError("triangle vertices are collinear")
    if area2 < 0:
        b, c = c, b

    px = (np.arange(grid.n_x) + 0.5) * grid.pitch
    py = (np.arange(grid.n_y) + 0.5) * grid.pitch
    X, Y = np.meshgrid(px, py)
    # tolerance keeps centers lying exactly on an edge inside despite rounding
    tol = 1e-9 * grid.pitch * scale
    inside = (
        (_edge(a, b, X, Y) >= -tol)
        & (_edge(b, c, X, Y) >= -tol)
        & (_edge(c, a, X, Y) >= -tol)
    )
    return ComplexField(grid, inside.astype(np.complex128))


def zero_pad(field: ComplexField) -> ComplexField:
    """Double every non-flat axis, embedding the field at offset ``n // 2``."""
    g = field.grid
    ny = 2 * g.n_y if g.n_y > 1 else 1
    nx = 2 * g.n_x if g.n_x > 1 else 1
    out = np.zeros((ny, nx), dtype=np.complex128)
    out[_centered_slice(ny, g.n_y), _centered_slice(nx, g.n_x)] = field.data
    return ComplexField(GridSpec(nx, ny, g.pitch), out)


def crop_center(field: ComplexField, n_x: int, n_y: int) -> ComplexField:
    """Extract the central ``n_y x n_x`` window (inverse of :func:`zero_pad`)."""
    g = field.grid
    if not (1 <= n_x <= g.n_x and 1 <= n_y <= g.n_y):
        raise InvalidArgumentError(f"cannot crop ({n_x}, {n_y}) from ({g.n_x}, {g.n_y})")
    data = field.data[_centered_slice(g.n_y, n_y), _centered_slice(g.n_x, n_x)]
    return ComplexField(GridSpec(n_x, n_y, g.pitch), data)
