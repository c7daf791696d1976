"""Exception types shared across the package."""

from __future__ import annotations


class ConvergenceError(RuntimeError):
    """An iterative scheme exhausted its iteration budget before converging."""

    def __init__(self, message: str, row_residual: float | None = None,
                 col_residual: float | None = None):
        super().__init__(message)
        self.row_residual = row_residual
        self.col_residual = col_residual


class BudgetError(RuntimeError):
    """A bounded computation (enumeration, rejection loop) exceeded its budget."""


class SamplingBudgetError(BudgetError):
    """Rejection sampling ran out of attempts; carries the best spectra seen."""

    def __init__(self, message: str, attempts: int,
                 best_slem: float, best_tlem: float):
        super().__init__(message)
        self.attempts = attempts
        self.best_slem = best_slem
        self.best_tlem = best_tlem


class EstimationError(ValueError):
    """Moment estimation is undefined for the given training signal."""


class DegenerateDensityError(ValueError):
    """KDE input has zero spread; carries the point-mass location."""

    def __init__(self, message: str, point_mass: float):
        super().__init__(message)
        self.point_mass = point_mass


class ConfigError(ValueError):
    """Invalid simulation configuration."""
