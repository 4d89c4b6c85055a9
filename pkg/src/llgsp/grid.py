"""Cell-centered grids on the unit interval/cube, vector fields, and discrete operators.

Fields are stored as arrays of shape ``grid.shape + (3,)`` where ``grid.shape``
is ``(nx,)`` in 1D and ``(nz, ny, nx)`` in 3D, so a C-order flattening walks the
cells lexicographically with x varying fastest.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered mesh of (0, 1)^dim.

    ``cells`` is given in axis order ``(nx,)`` or ``(nx, ny, nz)``.
    """

    cells: tuple[int, ...]

    def __post_init__(self) -> None:
        cells = tuple(int(n) for n in self.cells)
        if len(cells) not in (1, 3):
            raise ValueError(f"grid dimension must be 1 or 3, got {len(cells)}")
        if any(n < 2 for n in cells):
            raise ValueError(f"every axis needs at least 2 cells, got {cells}")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def uniform(cls, n: int, dim: int = 1) -> "Grid":
        return cls((n,) * dim)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(1.0 / n for n in self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of one field component (slowest axis first)."""
        return self.cells[::-1]

    @property
    def array_spacing(self) -> tuple[float, ...]:
        """Spacing matched to the array axes of ``shape``."""
        return self.spacing[::-1]

    @property
    def size(self) -> int:
        return math.prod(self.cells)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.cells[axis]
        return (np.arange(n) + 0.5) / n

    def cell_centers(self) -> list[np.ndarray]:
        """Coordinate arrays ``[x]`` or ``[x, y, z]``, each of shape ``self.shape``."""
        if self.dim == 1:
            return [self.axis_centers(0)]
        x, y, z = (self.axis_centers(a) for a in range(3))
        zz, yy, xx = np.meshgrid(z, y, x, indexing="ij")
        return [xx, yy, zz]


@dataclass
class VectorField:
    """One 3-vector per cell of ``grid``."""

    grid: Grid
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        expected = self.grid.shape + (3,)
        if data.shape != expected:
            if data.size != 3 * self.grid.size:
                raise ValueError(f"field data has shape {data.shape}, expected {expected}")
            data = data.reshape(expected)
        self.data = data

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros(grid.shape + (3,)))

    @classmethod
    def constant(cls, grid: Grid, vector: Sequence[float]) -> "VectorField":
        data = np.empty(grid.shape + (3,))
        data[...] = np.asarray(vector, dtype=np.float64)
        return cls(grid, data)

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[..., np.ndarray]) -> "VectorField":
        """Sample ``func(*coords)`` at cell centers; it must return shape ``(..., 3)``."""
        return cls(grid, func(*grid.cell_centers()))

    @property
    def flat(self) -> np.ndarray:
        """Lexicographic ``(ncells, 3)`` view."""
        return self.data.reshape(-1, 3)

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.data.copy())

    def _check(self, other: "VectorField") -> None:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check(other)
        return VectorField(self.grid, self.data + other.data)

    def __sub__(self, other: "VectorField") -> "VectorField":
        self._check(other)
        return VectorField(self.grid, self.data - other.data)

    def __mul__(self, scalar: float) -> "VectorField":
        return VectorField(self.grid, self.data * scalar)

    __rmul__ = __mul__


def laplacian_array(data: np.ndarray, array_spacing: Sequence[float]) -> np.ndarray:
    """Neumann Laplacian of a raw ``shape + (3,)`` array.

    Mirror ghost cells (ghost = adjacent interior value) make the boundary
    face flux vanish, so only interior faces contribute.
    """
    out = np.zeros_like(data)
    for axis, h in enumerate(array_spacing):
        flux = np.diff(data, axis=axis) / (h * h)
        lo = [slice(None)] * data.ndim
        hi = [slice(None)] * data.ndim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        out[tuple(lo)] += flux
        out[tuple(hi)] -= flux
    return out


def laplacian_neumann(f: VectorField) -> VectorField:
    return VectorField(f.grid, laplacian_array(f.data, f.grid.array_spacing))


def _cell_lengths(data: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...i,...i->...", data, data))


def _gradient_sq_sum(data: np.ndarray, array_spacing: Sequence[float]) -> float:
    total = 0.0
    for axis, h in enumerate(array_spacing):
        d = np.diff(data, axis=axis) / h
        total += float(np.sum(d * d))
    return total


def norm_linf(e: VectorField) -> float:
    """Largest Euclidean length over cells."""
    return float(np.max(_cell_lengths(e.data)))


def norm_l2(e: VectorField) -> float:
    return math.sqrt(e.grid.cell_volume * float(np.sum(e.data * e.data)))


def norm_h1(e: VectorField) -> float:
    """Discrete H1 norm: L2 part plus forward differences between neighboring cells."""
    vol = e.grid.cell_volume
    l2_sq = vol * float(np.sum(e.data * e.data))
    grad_sq = vol * _gradient_sq_sum(e.data, e.grid.array_spacing)
    return math.sqrt(l2_sq + grad_sq)


def exchange_energy(m: VectorField) -> float:
    """Quadrature of the exchange energy, the integral of |grad m|^2 over the domain."""
    return m.grid.cell_volume * _gradient_sq_sum(m.data, m.grid.array_spacing)


def max_unit_deviation(m: VectorField) -> float:
    return float(np.max(np.abs(_cell_lengths(m.data) - 1.0)))


def write_field_csv(field: VectorField, path: str | Path) -> None:
    """Dump ``x[,y,z],m1,m2,m3`` rows in lexicographic (x-fastest) order."""
    grid = field.grid
    coords = [c.reshape(-1) for c in grid.cell_centers()]
    names = ["x", "y", "z"][: grid.dim]
    values = field.flat
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + ["m1", "m2", "m3"])
        for i in range(grid.size):
            row = [c[i] for c in coords] + list(values[i])
            writer.writerow([f"{v:.17g}" for v in row])


def read_field_csv(path: str | Path, grid: Grid) -> VectorField:
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape != (grid.size, grid.dim + 3):
        raise ValueError(f"{path}: expected {grid.size} rows of {grid.dim + 3} columns")
    return VectorField(grid, raw[:, grid.dim:])
