"""First-order forward-mode dual numbers in a single scalar parameter.

A ``Dual`` carries a value together with its derivative (tangent) with
respect to one designated parameter. Smooth arithmetic applies the chain
rule exactly; operations that would leave their domain raise
:class:`DomainError` instead of propagating NaN or Inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DomainError",
    "Dual",
    "constant",
    "parameter",
    "lift",
    "dsin",
    "dcos",
    "dsqrt",
    "dexp",
    "dsigmoid",
    "datan2",
]


class DomainError(ValueError):
    """Operand outside the valid domain of a dual operation."""

    def __init__(self, op: str, detail: str):
        super().__init__(f"{op}: {detail}")
        self.op = op


@dataclass(slots=True)
class Dual:
    value: float
    tangent: float = 0.0

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.tangent + other.tangent)
        return Dual(self.value + other, self.tangent)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.tangent - other.tangent)
        return Dual(self.value - other, self.tangent)

    def __rsub__(self, other):
        return Dual(other - self.value, -self.tangent)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.value * other.value,
                self.tangent * other.value + self.value * other.tangent,
            )
        return Dual(self.value * other, self.tangent * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if other.value == 0.0:
                raise DomainError("div", "division by a zero-valued dual")
            v = other.value
            return Dual(
                self.value / v,
                (self.tangent * v - self.value * other.tangent) / (v * v),
            )
        if other == 0.0:
            raise DomainError("div", "division by zero")
        return Dual(self.value / other, self.tangent / other)

    def __rtruediv__(self, other):
        if self.value == 0.0:
            raise DomainError("div", "division by a zero-valued dual")
        v = self.value
        return Dual(other / v, -other * self.tangent / (v * v))

    def __neg__(self):
        return Dual(-self.value, -self.tangent)


def constant(x: float) -> Dual:
    return Dual(float(x), 0.0)


def parameter(x: float) -> Dual:
    """The differentiation seed: tangent 1 with respect to itself."""
    return Dual(float(x), 1.0)


def lift(x) -> Dual:
    return x if isinstance(x, Dual) else Dual(float(x), 0.0)


def dsin(x: Dual) -> Dual:
    return Dual(math.sin(x.value), math.cos(x.value) * x.tangent)


def dcos(x: Dual) -> Dual:
    return Dual(math.cos(x.value), -math.sin(x.value) * x.tangent)


def dsqrt(x: Dual) -> Dual:
    if x.value <= 0.0:
        raise DomainError("sqrt", f"requires a positive value, got {x.value}")
    root = math.sqrt(x.value)
    return Dual(root, x.tangent / (2.0 * root))


def dexp(x: Dual) -> Dual:
    try:
        e = math.exp(x.value)
    except OverflowError:
        raise DomainError("exp", f"overflow at {x.value}") from None
    return Dual(e, e * x.tangent)


def dsigmoid(x: Dual) -> Dual:
    # Branch on sign so neither exp argument can overflow.
    v = x.value
    if v >= 0.0:
        s = 1.0 / (1.0 + math.exp(-v))
    else:
        e = math.exp(v)
        s = e / (1.0 + e)
    return Dual(s, s * (1.0 - s) * x.tangent)


def datan2(y: Dual, x: Dual) -> Dual:
    """Two-argument arctangent, d(atan2(y, x)) = (x dy - y dx) / (x^2 + y^2)."""
    xv, yv = x.value, y.value
    denom = xv * xv + yv * yv
    if denom == 0.0:
        raise DomainError("atan2", "undefined at the origin")
    return Dual(math.atan2(yv, xv), (xv * y.tangent - yv * x.tangent) / denom)
