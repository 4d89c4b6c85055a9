"""Manufactured exact solutions, their forcing terms, and named initial profiles.

Both exact solutions have the form

    m_e = (cos(phi) sin t, sin(phi) sin t, cos t)

with a spatial phase ``phi``: ``cos(pi x)`` in 1D and ``X Y Z`` in 3D where
``X = x^2 (1-x)^2`` (same for y, z).  Their Laplacians follow from

    Lap cos(phi) = -cos(phi) |grad phi|^2 - sin(phi) Lap phi
    Lap sin(phi) = -sin(phi) |grad phi|^2 + cos(phi) Lap phi.

Coordinates are passed as a sequence of broadcastable arrays ``[x]`` or
``[x, y, z]`` (a bare scalar/array is accepted for 1D).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .grid import Grid, VectorField
from .rotation import cross

EXACT_IDS = ("exact_1d", "exact_3d")
EXACT_DIM = {"exact_1d": 1, "exact_3d": 3}

# Initial conditions, keyed by CLI name.  "cosx3d" is the 3D run whose phase
# only depends on x (constant in y and z).
PROFILE_DIM = {
    "cos1d": 1,
    "cosx3d": 3,
    "xyz3d": 3,
    "cosprod3d": 3,
    "traveling3d": 3,
}
PROFILE_IDS = tuple(PROFILE_DIM)


def _coords(solution_id: str, x) -> list[np.ndarray]:
    if solution_id not in EXACT_DIM:
        raise ValueError(f"unknown exact solution {solution_id!r}; choose from {EXACT_IDS}")
    dim = EXACT_DIM[solution_id]
    if np.ndim(x) == 0 or (dim == 1 and not isinstance(x, (list, tuple))):
        x = [x]
    coords = [np.asarray(c, dtype=np.float64) for c in x]
    if len(coords) != dim:
        raise ValueError(f"{solution_id} needs {dim} coordinate(s), got {len(coords)}")
    return coords


def _bump(s: np.ndarray):
    """``s^2 (1-s)^2`` with first and second derivatives."""
    v = s * s * (1 - s) ** 2
    d1 = 2 * s * (1 - s) * (1 - 2 * s)
    d2 = 2 * (1 - 6 * s + 6 * s * s)
    return v, d1, d2


def _phase_gradient(solution_id: str, coords: Sequence[np.ndarray]) -> list[np.ndarray]:
    if solution_id == "exact_1d":
        (x,) = coords
        return [-np.pi * np.sin(np.pi * x)]
    (X, X1, _), (Y, Y1, _), (Z, Z1, _) = (_bump(c) for c in coords)
    return [X1 * Y * Z, X * Y1 * Z, X * Y * Z1]


def _phase(solution_id: str, coords: Sequence[np.ndarray]):
    """Return ``(phi, |grad phi|^2, Lap phi)``."""
    if solution_id == "exact_1d":
        (x,) = coords
        px = np.pi * x
        phi = np.cos(px)
        grad_sq = (np.pi * np.sin(px)) ** 2
        lap = -np.pi ** 2 * phi
        return phi, grad_sq, lap
    x, y, z = coords
    X, X1, X2 = _bump(x)
    Y, Y1, Y2 = _bump(y)
    Z, Z1, Z2 = _bump(z)
    phi = X * Y * Z
    grad_sq = (X1 * Y * Z) ** 2 + (X * Y1 * Z) ** 2 + (X * Y * Z1) ** 2
    lap = X2 * Y * Z + X * Y2 * Z + X * Y * Z2
    return phi, grad_sq, lap


def _stack(a, b, c) -> np.ndarray:
    a, b, c = np.broadcast_arrays(a, b, c)
    return np.stack([a, b, c], axis=-1)


def exact_solution(solution_id: str, x, t: float) -> np.ndarray:
    phi, _, _ = _phase(solution_id, _coords(solution_id, x))
    st = np.sin(t)
    return _stack(np.cos(phi) * st, np.sin(phi) * st, np.cos(t) + 0.0 * phi)


def exact_time_derivative(solution_id: str, x, t: float) -> np.ndarray:
    phi, _, _ = _phase(solution_id, _coords(solution_id, x))
    ct = np.cos(t)
    return _stack(np.cos(phi) * ct, np.sin(phi) * ct, -np.sin(t) + 0.0 * phi)


def exact_gradient(solution_id: str, x, t: float) -> np.ndarray:
    """Spatial derivatives of ``m_e``, shape ``(..., dim, 3)``; entry ``[..., i, :]`` is ``d m_e / d x_i``."""
    coords = _coords(solution_id, x)
    phi, _, _ = _phase(solution_id, coords)
    st = np.sin(t)
    dm_dphi = _stack(-np.sin(phi) * st, np.cos(phi) * st, 0.0 * phi)
    return np.stack([dm_dphi * np.asarray(g)[..., None]
                     for g in _phase_gradient(solution_id, coords)], axis=-2)


def exact_laplacian(solution_id: str, x, t: float) -> np.ndarray:
    phi, grad_sq, lap = _phase(solution_id, _coords(solution_id, x))
    c, s = np.cos(phi), np.sin(phi)
    st = np.sin(t)
    return _stack((-c * grad_sq - s * lap) * st, (-s * grad_sq + c * lap) * st, 0.0 * phi)


def forcing(solution_id: str, x, t: float, alpha: float) -> np.ndarray:
    """``f_e = d_t m_e + m_e x Lap m_e + alpha m_e x (m_e x Lap m_e)``."""
    m = exact_solution(solution_id, x, t)
    mxl = cross(m, exact_laplacian(solution_id, x, t))
    return exact_time_derivative(solution_id, x, t) + mxl + alpha * cross(m, mxl)


def _check_grid(solution_id: str, grid: Grid) -> None:
    dim = EXACT_DIM.get(solution_id)
    if dim is None:
        raise ValueError(f"unknown exact solution {solution_id!r}; choose from {EXACT_IDS}")
    if dim != grid.dim:
        raise ValueError(f"{solution_id} is {dim}D but the grid is {grid.dim}D")


def exact_field(solution_id: str, grid: Grid, t: float) -> VectorField:
    _check_grid(solution_id, grid)
    return VectorField(grid, exact_solution(solution_id, grid.cell_centers(), t))


def forcing_field(solution_id: str, grid: Grid, t: float, alpha: float) -> VectorField:
    _check_grid(solution_id, grid)
    return VectorField(grid, forcing(solution_id, grid.cell_centers(), t, alpha))


def exact_for_grid(grid: Grid) -> str:
    return "exact_1d" if grid.dim == 1 else "exact_3d"


def initial_profile(profile_id: str, grid: Grid, T0: float = 0.0) -> VectorField:
    """Sample a named initial condition at cell centers."""
    if profile_id not in PROFILE_DIM:
        raise ValueError(f"unknown profile {profile_id!r}; choose from {PROFILE_IDS}")
    if PROFILE_DIM[profile_id] != grid.dim:
        raise ValueError(f"profile {profile_id!r} is {PROFILE_DIM[profile_id]}D "
                         f"but the grid is {grid.dim}D")
    coords = grid.cell_centers()
    x = coords[0]
    st, ct = np.sin(T0), np.cos(T0)
    if profile_id == "cos1d":
        return VectorField(grid, exact_solution("exact_1d", coords, T0))
    if profile_id == "xyz3d":
        return VectorField(grid, exact_solution("exact_3d", coords, T0))
    if profile_id == "cosx3d":
        phi = np.cos(np.pi * x)
        return VectorField(grid, _stack(np.cos(phi) * st, np.sin(phi) * st, ct + 0.0 * phi))
    if profile_id == "cosprod3d":
        y, z = coords[1], coords[2]
        phi = np.cos(np.pi * x) * np.cos(np.pi * y) * np.cos(np.pi * z)
        return VectorField(grid, _stack(np.cos(phi) * st, np.sin(phi) * st, ct + 0.0 * phi))
    # traveling3d: the polar angle itself moves with x
    phi = np.cos(np.cos(np.cos(np.pi * x)))
    theta = np.pi * x + T0
    return VectorField(grid, _stack(np.cos(phi) * np.sin(theta), np.sin(phi) * np.sin(theta),
                                    np.cos(theta)))


def forcing_callback(solution_id: str, grid: Grid, alpha: float):
    """``t -> f_e(., t)`` sampled at cell centers, for use by the time steppers."""
    _check_grid(solution_id, grid)
    coords = grid.cell_centers()

    def at(t: float) -> VectorField:
        return VectorField(grid, forcing(solution_id, coords, t, alpha))

    return at
