"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`QHDError` and, where it
makes sense, carries the extended point ``(t, x, y, z)`` at which it occurred so
that the CLI can report it.
"""

from __future__ import annotations

import numpy as np


class QHDError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str, point=None):
        self.point = None if point is None else tuple(float(p) for p in np.ravel(point))
        if self.point is not None:
            message = f"{message} at point {list(self.point)}"
        super().__init__(message)


# fields
class AllNodal(QHDError):
    pass


class QuantumPotentialSingular(QHDError):
    pass


class UndefinedPhase(QHDError):
    pass


class DomainBoundary(QHDError):
    pass


class GridFormatError(QHDError):
    pass


class ExpressionError(QHDError):
    """Bad token or malformed analytic expression."""

    def __init__(self, message: str, token: str | None = None, position: int | None = None):
        self.token = token
        self.position = position
        if token is not None:
            message = f"{message}: {token!r}"
        if position is not None:
            message = f"{message} (column {position + 1})"
        super().__init__(message)


# geometry / connection
class MetricNotPositiveDefinite(QHDError):
    def __init__(self, message: str, point=None, minor: int | None = None):
        self.minor = minor
        if minor is not None:
            message = f"{message} (leading principal minor of order {minor} is not positive)"
        super().__init__(message, point)


class KropinaSingular(QHDError):
    pass


# dynamics
class InvalidInitial(QHDError):
    pass


class NonMonotoneTime(QHDError):
    pass


class NoOverlap(QHDError):
    pass


# zermelo
class ConformalSignError(QHDError):
    pass


class WindSingular(QHDError):
    pass


class WindNotUnit(QHDError):
    pass


# configuration
class SchemaError(QHDError):
    def __init__(self, message: str, key: str | None = None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class ScenarioSyntaxError(QHDError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")
