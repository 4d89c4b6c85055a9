"""Exceptions raised by the solvers and time steppers."""

from __future__ import annotations


class NumericalFailure(RuntimeError):
    """Base class for failures of the numerics (as opposed to bad input).

    ``step`` and ``time`` are filled in by ``evolve`` when the failure happens
    inside a time loop.
    """

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        super().__init__(message)
        self.message = message
        self.step = step
        self.time = time

    def __str__(self) -> str:
        if self.step is None:
            return self.message
        return f"{self.message} (step {self.step}, t={self.time:.17g})"


class SolverError(NumericalFailure):
    def __init__(self, message: str, report=None, step=None, time=None):
        super().__init__(message, step, time)
        self.report = report


class BlowupError(NumericalFailure):
    pass


class DegenerateProjectionError(NumericalFailure):
    pass
