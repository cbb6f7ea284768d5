"""Exception types shared across the package."""

from __future__ import annotations

__all__ = ["ClockforgeError", "DomainError", "ConvergenceError", "ZeroOutcomeMassError"]


class ClockforgeError(Exception):
    """Base class for all package errors."""


class DomainError(ClockforgeError, ValueError):
    """An argument lies outside the supported domain of an operation."""


class ConvergenceError(ClockforgeError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    Attributes:
        residual: The last stationarity residual reached.
        sweeps: Number of sweeps performed.
    """

    def __init__(self, message: str, residual: float, sweeps: int):
        super().__init__(f"{message} (residual={residual:.3e}, sweeps={sweeps})")
        self.residual = residual
        self.sweeps = sweeps


class ZeroOutcomeMassError(ClockforgeError, ArithmeticError):
    """A negative moment was requested while N_C = 0 carries non-negligible mass."""

    def __init__(self, mass: float):
        super().__init__(f"zero-outcome mass {mass:.3e} makes the negative moment infinite")
        self.mass = mass
