"""Convergence and norm-preservation studies, order fitting, and CSV tables.

Default settings reproduce the published 1D/3D benchmark tables: manufactured
solution started from ``m_e(., 0)``, damping 0.01, final time 0.1.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import NumericalFailure
from .grid import Grid, max_unit_deviation, norm_h1, norm_l2, norm_linf
from .manufactured import exact_field, exact_for_grid, forcing_callback, initial_profile
from .schemes import SchemeConfig, evolve
from .solvers import SolverConfig

logger = logging.getLogger(__name__)

ERROR_COLUMNS = ("err_linf", "err_l2", "err_h1")

TABLE1_KS = (2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4)
TABLE2_NS = (16, 24, 32, 48, 64)
# (cells per axis, steps to T); k = T/steps ~ h^2
TABLE3_LEVELS = ((10, 10), (20, 40), (24, 57), (28, 78))
TABLE3_FINEST = (32, 102)


@dataclass
class ConvergenceRow:
    k: float
    h: float
    err_linf: float
    err_l2: float
    err_h1: float
    diagnostics: Optional[dict] = None


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    order_parameters: tuple[str, ...] = ("k",)
    metadata: dict = field(default_factory=dict)
    orders: dict[str, dict[str, float]] = field(default_factory=dict)

    def fit_orders(self) -> None:
        self.orders = {
            p: {c: estimate_order(self.rows, c, p) for c in ERROR_COLUMNS}
            for p in self.order_parameters
        }


@dataclass
class NormRow:
    k: float
    h: float
    max_unit_deviation: float


@dataclass
class NormTable:
    rows: list[NormRow]
    metadata: dict = field(default_factory=dict)


class StudyAborted(NumericalFailure):
    """A study row failed; ``partial`` holds the rows finished before it."""

    def __init__(self, message: str, partial, cause: NumericalFailure):
        super().__init__(message, cause.step, cause.time)
        self.partial = partial
        self.cause = cause


def fit_order(params: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(param)``."""
    p = np.asarray(params, dtype=np.float64)
    e = np.asarray(errors, dtype=np.float64)
    if p.size < 2:
        raise ValueError("order fitting needs at least two rows")
    if np.any(e <= 0) or np.any(p <= 0):
        raise ValueError("order fitting needs positive errors and refinement parameters")
    x = np.log(p)
    y = np.log(e)
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def pairwise_orders(params: Sequence[float], errors: Sequence[float]) -> list[float]:
    p = np.log(np.asarray(params, dtype=np.float64))
    e = np.log(np.asarray(errors, dtype=np.float64))
    return list(np.diff(e) / np.diff(p))


def estimate_order(rows: Sequence[ConvergenceRow], column: str, parameter: str = "k") -> float:
    if column not in ERROR_COLUMNS:
        raise ValueError(f"unknown error column {column!r}")
    if parameter not in ("k", "h"):
        raise ValueError(f"refinement parameter must be 'k' or 'h', got {parameter!r}")
    return fit_order([getattr(r, parameter) for r in rows], [getattr(r, column) for r in rows])


def _solver_diagnostics(traj) -> dict:
    reports = [r for d in traj.diagnostics for r in d.reports]
    if not reports:
        return {"iterations_max": 0, "residual_max": 0.0}
    return {
        "iterations_max": max(r.iterations for r in reports),
        "residual_max": max(r.final_relative_residual for r in reports),
    }


def accuracy_row(grid: Grid, k: float, alpha: float = 0.01, T: float = 0.1,
                 scheme: str = "proposed", forcing_mode: str = "direct",
                 forcing_time: str = "start", solver: Optional[SolverConfig] = None,
                 diagnostics: bool = False) -> ConvergenceRow:
    """Evolve the manufactured solution from ``t=0`` to ``T`` and measure the error at ``T``."""
    sid = exact_for_grid(grid)
    cfg = SchemeConfig(scheme=scheme, alpha=alpha, k=k, forcing_mode=forcing_mode,
                       forcing_time=forcing_time, solver=solver or SolverConfig())
    m, traj = evolve(exact_field(sid, grid, 0.0), 0.0, T, cfg,
                     forcing_callback(sid, grid, alpha), track=diagnostics)
    err = m - exact_field(sid, grid, T)
    return ConvergenceRow(
        k=T / round(T / k), h=grid.spacing[0],
        err_linf=norm_linf(err), err_l2=norm_l2(err), err_h1=norm_h1(err),
        diagnostics=_solver_diagnostics(traj) if diagnostics else None,
    )


def _run_rows(jobs: Iterable[tuple[Grid, float]], table: ConvergenceTable, **kwargs) -> ConvergenceTable:
    for grid, k in jobs:
        try:
            row = accuracy_row(grid, k, **kwargs)
        except NumericalFailure as exc:
            table.metadata["aborted"] = str(exc)
            raise StudyAborted(f"study aborted at k={k:g}, h={grid.spacing[0]:g}: {exc}",
                               table, exc) from exc
        logger.info("k=%.6g h=%.6g linf=%.6e l2=%.6e h1=%.6e",
                    row.k, row.h, row.err_linf, row.err_l2, row.err_h1)
        table.rows.append(row)
    if len(table.rows) >= 2:
        table.fit_orders()
    return table


def _metadata(study: str, alpha: float, T: float, **kwargs) -> dict:
    meta = {"study": study, "alpha": alpha, "T": T}
    meta.update({key: v for key, v in kwargs.items() if key != "solver"})
    return meta


def run_temporal_study_1d(ks: Sequence[float] = TABLE1_KS, n: int = 2000, alpha: float = 0.01,
                          T: float = 0.1, **kwargs) -> ConvergenceTable:
    """Time refinement at fixed fine mesh (default ``h = 5e-4``)."""
    grid = Grid((n,))
    table = ConvergenceTable([], ("k",), _metadata("temporal_1d", alpha, T, **kwargs))
    return _run_rows(((grid, k) for k in ks), table, alpha=alpha, T=T, **kwargs)


def run_spatial_study_1d(ns: Sequence[int] = TABLE2_NS, k: float = 1e-6, alpha: float = 0.01,
                         T: float = 0.1, **kwargs) -> ConvergenceTable:
    """Mesh refinement at a tiny fixed time step."""
    table = ConvergenceTable([], ("h",), _metadata("spatial_1d", alpha, T, **kwargs))
    return _run_rows(((Grid((n,)), k) for n in ns), table, alpha=alpha, T=T, **kwargs)


def coupled_levels(include_finest: bool = False) -> tuple[tuple[int, int], ...]:
    return TABLE3_LEVELS + ((TABLE3_FINEST,) if include_finest else ())


def run_coupled_study_3d(levels: Optional[Sequence[tuple[int, int]]] = None,
                         include_finest: bool = False, alpha: float = 0.01, T: float = 0.1,
                         **kwargs) -> ConvergenceTable:
    """Joint refinement with ``k = T/steps ~ h^2``; orders are fitted against both k and h."""
    levels = tuple(levels) if levels is not None else coupled_levels(include_finest)
    table = ConvergenceTable([], ("k", "h"), _metadata("coupled_3d", alpha, T, **kwargs))
    jobs = ((Grid.uniform(n, 3), T / steps) for n, steps in levels)
    return _run_rows(jobs, table, alpha=alpha, T=T, **kwargs)


def norm_row(m0, k: float, alpha: float = 0.01, T: float = 0.1, scheme: str = "proposed",
             solver: Optional[SolverConfig] = None, record_every: int = 1) -> NormRow:
    """Largest cell-length deviation seen over an unforced run (every ``record_every`` steps)."""
    cfg = SchemeConfig(scheme=scheme, alpha=alpha, k=k, forcing_mode="none",
                       solver=solver or SolverConfig())
    worst = 0.0

    def record(step: int, t: float, m) -> None:
        nonlocal worst
        if step % record_every == 0:
            worst = max(worst, max_unit_deviation(m))

    evolve(m0, 0.0, T, cfg, None, observers=[record], track=False)
    return NormRow(T / round(T / k), m0.grid.spacing[0], worst)


def run_norm_study(dim: int = 1, ks: Sequence[float] = TABLE1_KS, n: int = 2000,
                   levels: Optional[Sequence[tuple[int, int]]] = None, alpha: float = 0.01,
                   T: float = 0.1, T0: float = 0.01, profile: Optional[str] = None,
                   scheme: str = "proposed", solver: Optional[SolverConfig] = None,
                   record_every: int = 1) -> NormTable:
    """Norm preservation without forcing, from the ``T0``-shifted exact profile."""
    if dim == 1:
        profile = profile or "cos1d"
        jobs = [(Grid((n,)), k) for k in ks]
    elif dim == 3:
        profile = profile or "xyz3d"
        levels = tuple(levels) if levels is not None else TABLE3_LEVELS
        jobs = [(Grid.uniform(nn, 3), T / steps) for nn, steps in levels]
    else:
        raise ValueError(f"dimension must be 1 or 3, got {dim}")
    table = NormTable([], {"study": f"norm_{dim}d", "alpha": alpha, "T": T, "T0": T0,
                           "profile": profile, "scheme": scheme})
    for grid, k in jobs:
        try:
            row = norm_row(initial_profile(profile, grid, T0), k, alpha, T, scheme, solver,
                           record_every)
        except NumericalFailure as exc:
            table.metadata["aborted"] = str(exc)
            raise StudyAborted(f"norm study aborted at k={k:g}: {exc}", table, exc) from exc
        logger.info("k=%.6g h=%.6g max deviation=%.3e", row.k, row.h, row.max_unit_deviation)
        table.rows.append(row)
    return table


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.17g}"


def write_table_csv(table: ConvergenceTable | NormTable, path: str | Path,
                    diagnostics: bool = False) -> None:
    """Write a study table as CSV.

    Convergence tables get ``k,h,err_linf,err_l2,err_h1`` rows followed by one
    order row per refinement parameter (``order`` when there is one,
    ``order_k``/``order_h`` when there are two).  Norm tables get
    ``k,h,max_unit_deviation``.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if isinstance(table, NormTable):
            writer.writerow(["k", "h", "max_unit_deviation"])
            for r in table.rows:
                writer.writerow([_fmt(r.k), _fmt(r.h), _fmt(r.max_unit_deviation)])
            return

        if len(table.rows) < 2:
            raise ValueError("a convergence table needs at least two rows to report orders")
        if not table.orders:
            table.fit_orders()
        header = ["k", "h", *ERROR_COLUMNS]
        if diagnostics:
            header += ["iterations_max", "residual_max"]
        writer.writerow(header)
        for r in table.rows:
            line = [_fmt(r.k), _fmt(r.h)] + [_fmt(getattr(r, c)) for c in ERROR_COLUMNS]
            if diagnostics:
                d = r.diagnostics or {}
                line += [_fmt(d.get("iterations_max", 0)), _fmt(d.get("residual_max", 0.0))]
            writer.writerow(line)
        for p in table.order_parameters:
            label = "order" if len(table.order_parameters) == 1 else f"order_{p}"
            line = [label, ""] + [_fmt(table.orders[p][c]) for c in ERROR_COLUMNS]
            if diagnostics:
                line += ["", ""]
            writer.writerow(line)


def is_monotone_decreasing(values: Sequence[float], allowed_violations: int = 1) -> bool:
    """True if at most ``allowed_violations`` consecutive pairs increase."""
    ups = sum(1 for a, b in zip(values, values[1:]) if b > a)
    return ups <= allowed_violations


def max_relative_gap(a: float, b: float) -> float:
    """Factor by which ``a`` and ``b`` differ (>= 1)."""
    return max(a, b) / min(a, b) if min(a, b) > 0 else math.inf
