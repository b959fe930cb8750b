"""Exception types shared across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """A distribution, model or strategy parameter lies outside its domain."""


class UnsupportedKindError(TypeError):
    """An operation was asked of a weight model kind that does not support it."""


class StrategyMismatchError(ValueError):
    """A vaccination strategy was paired with an incompatible weight model."""


class BracketError(RuntimeError):
    """Root bracketing failed because the target function is not monotone."""


class InsufficientSamplesError(RuntimeError):
    """Too few Monte Carlo runs produced the statistic being estimated."""


class ConfigError(ValueError):
    """Config text could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None and line is not None:
            where = f"{source}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
