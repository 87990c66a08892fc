"""Extended reals: finite values plus a single +inf element.

All (sub)derivative quantities in this package take values here.  Minus
infinity is deliberately unrepresentable: under proximal subgradients the
second-order quotients are bounded below by -r|w|^2, so a genuinely divergent
negative value signals a bug or a violated standing assumption.  The oracle
guards for that with ``NEG_GUARD``.
"""

from __future__ import annotations

import math
from functools import total_ordering
from typing import Iterable

from .errors import NegativeInfinityDetected

# Overflow cap for finite payloads and the abort threshold for oracle probes.
CAP = 1e30
NEG_GUARD = -1e15


@total_ordering
class ExtReal:
    """An immutable extended real: ``finite(x)`` or ``PLUS_INF``."""

    __slots__ = ("_value",)

    def __init__(self, value: float | None):
        if value is not None:
            value = float(value)
            if math.isnan(value):
                raise ValueError("ExtReal payload cannot be NaN")
            if value == math.inf or value > CAP:
                value = None  # overflow guard: huge values collapse to PlusInf
            elif value == -math.inf or value < -CAP:
                raise NegativeInfinityDetected(
                    "minus infinity is not representable as an ExtReal"
                )
        object.__setattr__(self, "_value", value)

    def __setattr__(self, name, val):  # pragma: no cover - immutability guard
        raise AttributeError("ExtReal is immutable")

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def finite(x: float) -> "ExtReal":
        if x is None or math.isinf(float(x)):
            raise ValueError("finite() requires a finite payload")
        return ExtReal(x)

    # -- predicates and access ------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self._value is not None

    @property
    def is_plus_inf(self) -> bool:
        return self._value is None

    @property
    def value(self) -> float:
        if self._value is None:
            raise ValueError("PlusInf has no finite payload")
        return self._value

    def as_float(self) -> float:
        """Finite payload, or IEEE +inf for the PlusInf tag."""
        return math.inf if self._value is None else self._value

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other) -> "ExtReal":
        other = _coerce(other)
        if self.is_plus_inf or other.is_plus_inf:
            return PLUS_INF
        return ExtReal(self._value + other._value)

    __radd__ = __add__

    def __sub__(self, other: float) -> "ExtReal":
        # Only finite subtrahends: PlusInf - PlusInf is meaningless here.
        if self.is_plus_inf:
            return PLUS_INF
        return ExtReal(self._value - float(other))

    def __mul__(self, scalar: float) -> "ExtReal":
        scalar = float(scalar)
        if self.is_plus_inf:
            if scalar <= 0:
                raise ValueError("PlusInf may only be scaled by positive reals")
            return PLUS_INF
        return ExtReal(self._value * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "ExtReal":
        if self.is_plus_inf:
            raise NegativeInfinityDetected("cannot negate PlusInf")
        return ExtReal(-self._value)

    # -- total order with PlusInf maximal --------------------------------------

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        return self._value == other._value

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        if self.is_plus_inf:
            return False
        if other.is_plus_inf:
            return True
        return self._value < other._value

    def __hash__(self):
        return hash(self._value)

    def __repr__(self):
        return "PlusInf" if self.is_plus_inf else f"ExtReal({self._value!r})"

    def __str__(self):
        return "+inf" if self.is_plus_inf else repr(self._value)

    def isclose(self, other, abs_tol: float = 1e-9, rel_tol: float = 0.0) -> bool:
        other = _coerce(other)
        if self.is_plus_inf or other.is_plus_inf:
            return self.is_plus_inf and other.is_plus_inf
        return math.isclose(self._value, other._value, rel_tol=rel_tol, abs_tol=abs_tol)


PLUS_INF = ExtReal(None)


def _coerce(x) -> ExtReal:
    return x if isinstance(x, ExtReal) else ExtReal(float(x))


def ext_min(values: Iterable[ExtReal]) -> ExtReal:
    """Minimum of a nonempty iterable; all-PlusInf minimizes to PlusInf."""
    best = None
    for v in values:
        v = _coerce(v)
        if best is None or v < best:
            best = v
    if best is None:
        raise ValueError("ext_min of an empty iterable")
    return best


def ext_max(values: Iterable[ExtReal]) -> ExtReal:
    best = None
    for v in values:
        v = _coerce(v)
        if best is None or best < v:
            best = v
    if best is None:
        raise ValueError("ext_max of an empty iterable")
    return best
