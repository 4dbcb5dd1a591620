from __future__ import annotations

from typing import Any, Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from .state import BarycenterResult


class NpcError(Exception):
    pass


class InputError(NpcError, ValueError):
    """
    A document or flag could not be turned into a domain object.
    `field` names the offending key so the CLI can point at it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class InvalidPointError(NpcError, ValueError):
    pass


class GeometryError(NpcError, ArithmeticError):
    pass


class ConvergenceError(NpcError, RuntimeError):
    def __init__(self, message: str, result: Optional[BarycenterResult] = None):
        super().__init__(message)
        self.result = result


class UnresolvedClassificationError(NpcError, RuntimeError):
    def __init__(self, message: str, pair: Optional[tuple[Any, Any]] = None, horizon: float = 0.0):
        super().__init__(message)
        self.pair = pair
        self.horizon = horizon
