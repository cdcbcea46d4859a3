"""Tiny closed-form stochastic programs with known exact gradients.

These pin down estimator behavior where the answer is analytic: a bare
Bernoulli whose probability is the parameter itself, and a smooth term
plus a Bernoulli whose probability may or may not depend on the
parameter. The second one is the classic trap for naive forward-mode
AD: with ``theta_dependent_p`` the discrete channel carries h'(theta),
which the smooth tangent alone cannot see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dual import Dual, dsigmoid

__all__ = ["BernoulliIdentity", "SmoothPlusBernoulli"]


@dataclass(frozen=True)
class BernoulliIdentity:
    """f(b) = b with b ~ Ber(theta), so d/dtheta E[f] = 1 everywhere."""

    def __call__(self, theta: Dual, ctx) -> float:
        ctx.begin_step(0)
        return float(ctx.bernoulli(theta))

    def exact_gradient(self, theta: float) -> float:
        return 1.0


@dataclass(frozen=True)
class SmoothPlusBernoulli:
    """f = g(theta) + b with g(theta) = theta**2.

    With ``theta_dependent_p`` (default) b ~ Ber(sigmoid(theta)) and the
    true gradient is g'(theta) + h'(theta); with it off, p is fixed at
    1/2 and the gradient is g'(theta) alone.
    """

    theta_dependent_p: bool = True

    def __call__(self, theta: Dual, ctx) -> float | Dual:
        ctx.begin_step(0)
        p = dsigmoid(theta) if self.theta_dependent_p else Dual(0.5)
        b = ctx.bernoulli(p)
        return theta * theta + Dual(float(b))

    def smooth_gradient(self, theta: float) -> float:
        return 2.0 * theta

    def exact_gradient(self, theta: float) -> float:
        if not self.theta_dependent_p:
            return self.smooth_gradient(theta)
        s = 1.0 / (1.0 + math.exp(-theta))
        return self.smooth_gradient(theta) + s * (1.0 - s)
