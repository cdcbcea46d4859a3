"""Bernoulli draws that carry a weighted flipped-outcome alternative, and
single-pass pruning of the alternatives accumulated over a run.

A draw with probability p(theta) contributes no smooth tangent, but the
derivative of an expectation through it is p'(theta) * (f(flip) - f(primal))
in distribution. Each outcome therefore carries the flipped outcome plus a
weight; pruning keeps exactly one alternative per run, selected with
probability proportional to |weight|, and re-scales it so the single kept
term is an unbiased stand-in for the whole sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dual import Dual
from .streams import RunRng

__all__ = [
    "InvalidProbabilityError",
    "DiscreteAlternative",
    "bernoulli_stochastic",
    "PruningState",
    "prune_consider",
    "pruned_weight",
]


class InvalidProbabilityError(ValueError):
    pass


@dataclass(slots=True, frozen=True)
class DiscreteAlternative:
    flipped_value: int
    weight: float
    draw_id: int = 0


def bernoulli_stochastic(p: Dual, omega: float, draw_id: int = 0) -> tuple[int, DiscreteAlternative]:
    """Draw outcome = 1 iff omega > 1 - p.value, with its alternative.

    Each outcome carries one side of the two-sided difference quotient in
    theta (0 -> 1 for the right side, 1 -> 0 for the left); the factor 2
    in the weights averages the sides so that over both outcomes
    E[weight * (f(flip) - f(primal))] equals d/dtheta E[f] exactly.
    """
    pv = p.value
    if not 0.0 < pv < 1.0:
        raise InvalidProbabilityError(f"probability must lie strictly in (0, 1), got {pv}")
    if omega > 1.0 - pv:
        return 1, DiscreteAlternative(0, -p.tangent / (2.0 * pv), draw_id)
    return 0, DiscreteAlternative(1, p.tangent / (2.0 * (1.0 - pv)), draw_id)


@dataclass(slots=True)
class PruningState:
    """Weighted reservoir of size one over a run's alternatives.

    ``rng`` may be the pruning stream itself or a zero-argument factory
    for it; a factory is invoked the first time a draw is actually
    needed, which is only from the second nonzero candidate on.
    """

    rng: RunRng
    chosen: DiscreteAlternative | None = None
    total_abs_weight: float = 0.0

    def consider(self, candidate: DiscreteAlternative) -> None:
        w = abs(candidate.weight)
        if w == 0.0:
            return
        self.total_abs_weight += w
        if self.chosen is None:
            # First nonzero candidate wins with probability w/w = 1.
            self.chosen = candidate
            return
        rng = self.rng
        if callable(rng):
            rng = self.rng = rng()
        if rng.uniform() * self.total_abs_weight < w:
            self.chosen = candidate


def prune_consider(state: PruningState, candidate: DiscreteAlternative) -> PruningState:
    state.consider(candidate)
    return state


def pruned_weight(state: PruningState) -> float | None:
    """Signed weight carried by the surviving alternative.

    Magnitude is the total |weight| seen, sign that of the chosen
    candidate, so selection probability |w|/total cancels and the kept
    term estimates the full signed sum.
    """
    if state.chosen is None:
        return None
    return math.copysign(state.total_abs_weight, state.chosen.weight)
