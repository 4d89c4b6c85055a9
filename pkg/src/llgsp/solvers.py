"""Linear solves used by the time steppers.

Two operators appear:

* the Helmholtz smoother ``(I - k Lap_h)``, symmetric positive definite;
* the semi-implicit BDF1 predictor operator
  ``v -> v + k [m x Lap_h v + alpha m x (m x Lap_h v)]`` with ``m`` frozen at
  the previous step.  This one is nonsymmetric.

In 1D both are banded and solved directly (LAPACK ``gbsv`` through
``scipy.linalg.solve_banded``).  In 3D they are applied matrix-free inside a
scipy Krylov method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse.linalg import LinearOperator, bicgstab, cg, gmres

from .errors import SolverError
from .grid import VectorField, laplacian_array
from .rotation import cross

METHODS = ("auto", "direct", "cg", "gmres", "bicgstab")


@dataclass
class SolverConfig:
    """Tolerances and method selection for the linear solves.

    ``method="auto"`` picks the direct banded solve in 1D and a Krylov method in
    3D (CG for the Helmholtz operator, GMRES for the predictor).
    ``max_iterations=None`` means ``min(10 * unknowns, 10000)``.
    ``preconditioner`` is an optional callable ``r -> M^-1 r`` on flat vectors,
    handed to the Krylov methods; nothing is installed by default.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_iterations: Optional[int] = None
    method: str = "auto"
    restart: int = 60
    preconditioner: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("solver tolerances must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown solver method {self.method!r}; choose from {METHODS}")

    def iteration_cap(self, unknowns: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return min(10 * unknowns, 10000)


@dataclass
class SolveReport:
    iterations: int
    final_relative_residual: float
    converged: bool
    method: str = ""


def _residual_report(apply_op, x, rhs, cfg: SolverConfig, iterations: int, method: str) -> SolveReport:
    r = rhs - apply_op(x)
    rnorm = float(np.linalg.norm(r))
    bnorm = float(np.linalg.norm(rhs))
    rel = rnorm / bnorm if bnorm > 0 else rnorm
    ok = bool(np.isfinite(rnorm)) and (rel <= cfg.rel_tol or rnorm <= cfg.abs_tol)
    return SolveReport(iterations, rel, ok, method)


def _krylov(method: str, apply_flat, rhs_flat, x0_flat, cfg: SolverConfig) -> tuple[np.ndarray, int]:
    n = rhs_flat.size
    op = LinearOperator((n, n), matvec=apply_flat, dtype=np.float64)
    precond = None
    if cfg.preconditioner is not None:
        precond = LinearOperator((n, n), matvec=cfg.preconditioner, dtype=np.float64)
    cap = cfg.iteration_cap(n)
    count = 0

    # scipy's stopping test uses its own recurrence residual; aim below rel_tol
    # so the true residual check afterwards passes.
    rtol = 0.5 * cfg.rel_tol

    def on_residual(value) -> None:
        nonlocal count
        count += 1
        if not np.all(np.isfinite(value)):
            raise SolverError(f"{method}: non-finite value after {count} iterations")

    if method == "gmres":
        restart = min(cfg.restart, n)
        x, _ = gmres(op, rhs_flat, x0=x0_flat, rtol=rtol, atol=cfg.abs_tol, restart=restart,
                     maxiter=max(1, math.ceil(cap / restart)), M=precond,
                     callback=on_residual, callback_type="pr_norm")
    elif method == "bicgstab":
        x, _ = bicgstab(op, rhs_flat, x0=x0_flat, rtol=rtol, atol=cfg.abs_tol, maxiter=cap,
                        M=precond, callback=on_residual)
    elif method == "cg":
        x, _ = cg(op, rhs_flat, x0=x0_flat, rtol=rtol, atol=cfg.abs_tol, maxiter=cap,
                  M=precond, callback=on_residual)
    else:
        raise ValueError(f"{method!r} is not a Krylov method")
    return x, count


def _finish(x_flat, apply_flat, rhs_flat, cfg, iterations, method, field_grid, what):
    report = _residual_report(apply_flat, x_flat, rhs_flat, cfg, iterations, method)
    if not report.converged:
        raise SolverError(
            f"{what}: {method} did not reach rel_tol={cfg.rel_tol:g} "
            f"(relative residual {report.final_relative_residual:.3e} after {iterations} iterations)",
            report,
        )
    return VectorField(field_grid, x_flat), report


# ---------------------------------------------------------------- Helmholtz

def helmholtz_apply(v: np.ndarray, k: float, array_spacing) -> np.ndarray:
    return v - k * laplacian_array(v, array_spacing)


def _helmholtz_banded(n: int, k: float, h: float) -> np.ndarray:
    c = k / (h * h)
    ab = np.empty((3, n))
    ab[0, :] = -c
    ab[2, :] = -c
    ab[1, :] = 1.0 + 2.0 * c
    ab[1, 0] = ab[1, -1] = 1.0 + c
    return ab


def helmholtz_solve(rhs: VectorField, k: float, cfg: SolverConfig | None = None
                    ) -> tuple[VectorField, SolveReport]:
    """Return ``g`` with ``(I - k Lap_h) g = rhs``."""
    cfg = cfg or SolverConfig()
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    grid = rhs.grid
    if k == 0:
        return rhs.copy(), SolveReport(0, 0.0, True, "identity")

    spacing = grid.array_spacing
    shape = rhs.data.shape

    def apply_flat(x):
        return helmholtz_apply(x.reshape(shape), k, spacing).reshape(-1)

    rhs_flat = rhs.data.reshape(-1)
    method = cfg.method
    if method == "auto":
        method = "direct" if grid.dim == 1 else "cg"
    if method == "direct":
        if grid.dim != 1:
            raise ValueError("direct banded solve is only available in 1D")
        n = grid.cells[0]
        g = solve_banded((1, 1), _helmholtz_banded(n, k, grid.spacing[0]), rhs.data,
                         check_finite=False)
        return _finish(g.reshape(-1), apply_flat, rhs_flat, cfg, 1, method, grid, "helmholtz_solve")

    x, its = _krylov(method, apply_flat, rhs_flat, rhs_flat.copy(), cfg)
    return _finish(x, apply_flat, rhs_flat, cfg, its, method, grid, "helmholtz_solve")


# ---------------------------------------------------------------- BDF1 predictor

def predictor_apply(v: np.ndarray, m: np.ndarray, k: float, alpha: float, array_spacing) -> np.ndarray:
    """``v + k [m x Lap v + alpha m x (m x Lap v)]`` on raw ``(..., 3)`` arrays."""
    lap = laplacian_array(v, array_spacing)
    mxl = cross(m, lap)
    out = v + k * mxl
    if alpha != 0.0:
        out += (k * alpha) * cross(m, mxl)
    return out


def _cross_matrices(m: np.ndarray) -> np.ndarray:
    """Per-cell matrices of ``w -> m x w``, shape ``(n, 3, 3)``."""
    n = m.shape[0]
    c = np.zeros((n, 3, 3))
    c[:, 0, 1] = -m[:, 2]
    c[:, 0, 2] = m[:, 1]
    c[:, 1, 0] = m[:, 2]
    c[:, 1, 2] = -m[:, 0]
    c[:, 2, 0] = -m[:, 1]
    c[:, 2, 1] = m[:, 0]
    return c


_P = np.arange(3)[None, :, None]
_Q = np.arange(3)[None, None, :]
_BAND = 5  # interleaved 3-component unknowns: neighbor cells sit within 5 columns


def _predictor_banded(m: np.ndarray, k: float, alpha: float, h: float) -> np.ndarray:
    """Band storage of the 1D predictor matrix with unknown ``3*i + component``."""
    n = m.shape[0]
    cx = _cross_matrices(m)
    b = cx + alpha * (cx @ cx) if alpha != 0.0 else cx
    kb = k * b
    inv_h2 = 1.0 / (h * h)
    ldiag = np.full(n, -2.0 * inv_h2)
    ldiag[0] = ldiag[-1] = -inv_h2

    ab = np.zeros((2 * _BAND + 1, 3 * n))
    i = np.arange(n)[:, None, None]

    rows = 3 * i + _P
    cols = 3 * i + _Q
    ab[_BAND + rows - cols, cols] = kb * ldiag[:, None, None]

    lo = np.arange(1, n)[:, None, None]
    for src, dst in ((lo, lo - 1), (lo - 1, lo)):
        rows = 3 * src + _P
        cols = 3 * dst + _Q
        ab[_BAND + rows - cols, cols] = kb[src[:, 0, 0]] * inv_h2

    ab[_BAND, :] += 1.0
    return ab


def bdf1_predictor_solve(m_prev: VectorField, f: VectorField | None, k: float, alpha: float,
                         cfg: SolverConfig | None = None) -> tuple[VectorField, SolveReport]:
    """Solve the semi-implicit BDF1 predictor equation for ``v``::

        v + k [m x Lap_h v + alpha m x (m x Lap_h v)] = m + k f,   m = m_prev.
    """
    cfg = cfg or SolverConfig()
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    grid = m_prev.grid
    m = m_prev.data
    rhs = m if f is None else m + k * f.data
    spacing = grid.array_spacing
    shape = m.shape

    def apply_flat(x):
        return predictor_apply(x.reshape(shape), m, k, alpha, spacing).reshape(-1)

    rhs_flat = rhs.reshape(-1)
    method = cfg.method
    if method == "auto":
        method = "direct" if grid.dim == 1 else "gmres"
    if method == "cg":
        raise ValueError("the predictor operator is nonsymmetric; conjugate gradients does not apply")
    if method == "direct":
        if grid.dim != 1:
            raise ValueError("direct banded solve is only available in 1D")
        ab = _predictor_banded(m, k, alpha, grid.spacing[0])
        x = solve_banded((_BAND, _BAND), ab, rhs_flat, check_finite=False)
        if not np.all(np.isfinite(x)):
            raise SolverError("bdf1_predictor_solve: direct solve produced non-finite values")
        return _finish(x, apply_flat, rhs_flat, cfg, 1, method, grid, "bdf1_predictor_solve")

    x, its = _krylov(method, apply_flat, rhs_flat, m.reshape(-1).copy(), cfg)
    return _finish(x, apply_flat, rhs_flat, cfg, its, method, grid, "bdf1_predictor_solve")
