"""Time steppers for the exchange-only LLG equation

    m_t = -m x Lap m - alpha m x (m x Lap m) + f.

Every scheme except the projection baseline finishes with the per-cell
Crank-Nicolson rotation, so cell lengths are kept to roundoff.  What differs is
the field ``b`` the rotation axis is built from:

* ``proposed``: ``b = Lap_h v`` with ``v`` from the semi-implicit BDF1 predictor;
* ``scheme1_explicit``: ``b = Lap_h m_n``;
* ``scheme3_semi_implicit``: ``b = Lap_h (I - k Lap_h)^-1 m_n``.

The axis is ``c = b + alpha m_n x b`` so that ``-avg x c`` reproduces both the
precession and the damping term.  ``bdf1_projection`` takes the predictor and
normalizes it cell by cell.

Forcing is sampled once per step, at ``t_n`` (``forcing_time="start"``) or at
``t_{n+1}`` (``"end"``), and always enters the predictor right-hand side.  In
the rotation step, ``direct`` mode adds ``f`` to the right-hand side;
``rotational`` mode instead adds ``m_n x f`` to the axis, which keeps cell
lengths exact because ``m x (m x f) = -f`` for tangential ``f`` on the sphere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BlowupError, DegenerateProjectionError, NumericalFailure
from .grid import VectorField, exchange_energy, laplacian_array, max_unit_deviation
from .rotation import cn_inverse_apply, cn_rotate, cross
from .solvers import SolveReport, SolverConfig, bdf1_predictor_solve, helmholtz_solve

logger = logging.getLogger(__name__)

SCHEMES = ("proposed", "scheme1_explicit", "scheme3_semi_implicit", "bdf1_projection")
FORCING_MODES = ("none", "direct", "rotational")
FORCING_TIMES = ("start", "end")

BLOWUP_THRESHOLD = 1e6
DEGENERATE_LENGTH = 1e-8

Forcing = Callable[[float], VectorField]
Observer = Callable[[int, float, VectorField], None]


@dataclass
class SchemeConfig:
    scheme: str = "proposed"
    alpha: float = 0.01
    k: float = 1e-3
    forcing_mode: str = "direct"
    solver: SolverConfig = field(default_factory=SolverConfig)
    forcing_time: str = "start"

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.forcing_mode not in FORCING_MODES:
            raise ValueError(f"unknown forcing mode {self.forcing_mode!r}; choose from {FORCING_MODES}")
        if self.forcing_time not in FORCING_TIMES:
            raise ValueError(f"unknown forcing time {self.forcing_time!r}; choose from {FORCING_TIMES}")
        if not self.k > 0:
            raise ValueError(f"time step k must be positive, got {self.k}")
        if not self.alpha >= 0:
            raise ValueError(f"damping alpha must be non-negative, got {self.alpha}")


@dataclass
class StepDiagnostics:
    step: int
    time: float
    energy: float
    max_unit_deviation: float
    reports: list[SolveReport]


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    snapshots: dict[int, VectorField] = field(default_factory=dict)
    diagnostics: list[StepDiagnostics] = field(default_factory=list)


def _forcing_at(t_n: float, cfg: SchemeConfig, forcing: Optional[Forcing]) -> Optional[np.ndarray]:
    if cfg.forcing_mode == "none" or forcing is None:
        return None
    t = t_n if cfg.forcing_time == "start" else t_n + cfg.k
    return forcing(t).data


def _damped_axis(m: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    if alpha == 0.0:
        return b
    return b + alpha * cross(m, b)


def _rotate(m: np.ndarray, c: np.ndarray, k: float, f: Optional[np.ndarray], mode: str) -> np.ndarray:
    if f is not None and mode == "rotational":
        c = c + cross(m, f)
    out = cn_rotate(m, c, k)
    if f is not None and mode == "direct":
        out += k * cn_inverse_apply(f, c, k)
    return out


def _step_proposed(m_n, t_n, cfg, forcing):
    f = _forcing_at(t_n, cfg, forcing)
    f_field = None if f is None else VectorField(m_n.grid, f)
    predictor, report = bdf1_predictor_solve(m_n, f_field, cfg.k, cfg.alpha, cfg.solver)
    m = m_n.data
    b = laplacian_array(predictor.data, m_n.grid.array_spacing)
    c = _damped_axis(m, b, cfg.alpha)
    return VectorField(m_n.grid, _rotate(m, c, cfg.k, f, cfg.forcing_mode)), [report]


def _step_scheme1(m_n, t_n, cfg, forcing):
    f = _forcing_at(t_n, cfg, forcing)
    m = m_n.data
    b = laplacian_array(m, m_n.grid.array_spacing)
    c = _damped_axis(m, b, cfg.alpha)
    return VectorField(m_n.grid, _rotate(m, c, cfg.k, f, cfg.forcing_mode)), []


def _step_scheme3(m_n, t_n, cfg, forcing):
    f = _forcing_at(t_n, cfg, forcing)
    g, report = helmholtz_solve(m_n, cfg.k, cfg.solver)
    m = m_n.data
    b = laplacian_array(g.data, m_n.grid.array_spacing)
    c = _damped_axis(m, b, cfg.alpha)
    return VectorField(m_n.grid, _rotate(m, c, cfg.k, f, cfg.forcing_mode)), [report]


def _step_projection(m_n, t_n, cfg, forcing):
    f = _forcing_at(t_n, cfg, forcing)
    f_field = None if f is None else VectorField(m_n.grid, f)
    predictor, report = bdf1_predictor_solve(m_n, f_field, cfg.k, cfg.alpha, cfg.solver)
    v = predictor.data
    length = np.sqrt(np.einsum("...i,...i->...", v, v))
    if np.min(length) < DEGENERATE_LENGTH:
        raise DegenerateProjectionError(
            f"predictor length {np.min(length):.3e} too small to normalize")
    return VectorField(m_n.grid, v / length[..., None]), [report]


_STEPPERS = {
    "proposed": _step_proposed,
    "scheme1_explicit": _step_scheme1,
    "scheme3_semi_implicit": _step_scheme3,
    "bdf1_projection": _step_projection,
}


def _require(cfg: SchemeConfig, scheme: str) -> None:
    if cfg.scheme != scheme:
        raise ValueError(f"config selects {cfg.scheme!r}, not {scheme!r}")


def step_proposed(m_n: VectorField, t_n: float, cfg: SchemeConfig,
                  forcing: Optional[Forcing] = None) -> VectorField:
    """Predictor solve followed by the Crank-Nicolson rotation about ``Lap_h`` of the predictor."""
    _require(cfg, "proposed")
    return _step_proposed(m_n, t_n, cfg, forcing)[0]


def step_scheme1(m_n: VectorField, cfg: SchemeConfig, t_n: float = 0.0,
                 forcing: Optional[Forcing] = None) -> VectorField:
    _require(cfg, "scheme1_explicit")
    return _step_scheme1(m_n, t_n, cfg, forcing)[0]


def step_scheme3(m_n: VectorField, cfg: SchemeConfig, t_n: float = 0.0,
                 forcing: Optional[Forcing] = None) -> VectorField:
    _require(cfg, "scheme3_semi_implicit")
    return _step_scheme3(m_n, t_n, cfg, forcing)[0]


def step_bdf1_projection(m_n: VectorField, t_n: float, cfg: SchemeConfig,
                         forcing: Optional[Forcing] = None) -> VectorField:
    _require(cfg, "bdf1_projection")
    return _step_projection(m_n, t_n, cfg, forcing)[0]


def step(m_n: VectorField, t_n: float, cfg: SchemeConfig,
         forcing: Optional[Forcing] = None) -> tuple[VectorField, list[SolveReport]]:
    """Advance one step with whichever scheme ``cfg`` selects; also return the solve reports."""
    return _STEPPERS[cfg.scheme](m_n, t_n, cfg, forcing)


def step_count(t0: float, T: float, k: float) -> int:
    if T < t0:
        raise ValueError(f"final time {T} is before start time {t0}")
    if T == t0:
        return 0
    return max(1, int(round((T - t0) / k)))


def evolve(m0: VectorField, t0: float, T: float, cfg: SchemeConfig,
           forcing: Optional[Forcing] = None, observers: Sequence[Observer] = (),
           track: bool = True, store_every: Optional[int] = None
           ) -> tuple[VectorField, Trajectory]:
    """Run ``round((T - t0)/k)`` steps, with ``k`` adjusted so the last step lands on ``T``.

    Observers are called as ``observer(step, time, field)`` after each step and
    must treat the field as read-only.  With ``track=False`` no per-step
    diagnostics are recorded (the long 1D studies skip them).
    """
    n_steps = step_count(t0, T, cfg.k)
    traj = Trajectory(times=[t0])
    if store_every:
        traj.snapshots[0] = m0.copy()
    if n_steps == 0:
        return m0.copy(), traj

    k = (T - t0) / n_steps
    cfg = replace(cfg, k=k)
    stepper = _STEPPERS[cfg.scheme]
    watch_energy = track and cfg.alpha > 0 and (cfg.forcing_mode == "none" or forcing is None)
    energy_prev = exchange_energy(m0) if watch_energy else None

    m = m0
    for n in range(n_steps):
        t_n = t0 + n * k
        t_next = T if n == n_steps - 1 else t0 + (n + 1) * k
        try:
            m, reports = stepper(m, t_n, cfg, forcing)
            data = m.data
            if not np.all(np.isfinite(data)):
                raise BlowupError("non-finite magnetization")
            peak = float(np.max(np.abs(data)))
            if peak > BLOWUP_THRESHOLD:
                raise BlowupError(f"magnetization component reached {peak:.3e}")
        except NumericalFailure as exc:
            exc.step, exc.time = n + 1, t_next
            raise

        traj.times.append(t_next)
        if store_every and (n + 1) % store_every == 0:
            traj.snapshots[n + 1] = m.copy()
        if track:
            energy = exchange_energy(m)
            if watch_energy and energy > energy_prev + 1e-8:
                logger.warning("exchange energy rose from %.10g to %.10g at step %d",
                               energy_prev, energy, n + 1)
            energy_prev = energy
            traj.diagnostics.append(
                StepDiagnostics(n + 1, t_next, energy, max_unit_deviation(m), reports))
        for observer in observers:
            observer(n + 1, t_next, m)
    return m, traj
