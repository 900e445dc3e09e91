from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 10000
    tol: float = 1e-8
    grid_size: int = 100
    grid_decades: float = 4.0
    debug: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iterations < 1 or self.grid_size < 1:
            raise ValueError("iteration and grid counts must be positive")
        if not self.grid_decades > 0:
            raise ValueError("grid_decades must be positive")


DEFAULT_CONFIG = SolverConfig()


class FitLog:
    """Running summary of fits produced while a recorder is active."""

    def __init__(self):
        self.count = 0
        self.unconverged = 0
        self.max_kkt = 0.0

    def add(self, fit) -> None:
        if fit.converged:
            self.count += 1
            self.max_kkt = max(self.max_kkt, fit.kkt_residual)
        else:
            self.unconverged += 1


_active_logs: contextvars.ContextVar[tuple] = contextvars.ContextVar(
    "lassodf_fit_logs", default=())


@contextlib.contextmanager
def record_fits():
    """Collect KKT statistics for every fit returned inside the block."""
    log = FitLog()
    token = _active_logs.set(_active_logs.get() + (log,))
    try:
        yield log
    finally:
        _active_logs.reset(token)


def _report(fit):
    for log in _active_logs.get():
        log.add(fit)
    return fit
