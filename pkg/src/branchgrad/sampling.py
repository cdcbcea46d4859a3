"""Execution contexts for stochastic programs.

A program is any callable ``program(theta: Dual, ctx) -> float | Dual``
that obtains every piece of randomness from its context: ``ctx.bernoulli(p)``
for discrete draws and ``ctx.uniform()`` for raw continuous inputs.
Programs with an internal notion of time call ``ctx.begin_step(i)`` once
per step so the coupling queue can be scoped to steps.

``PrimalContext`` samples a program forward, accumulating the score-function
tangent and, when instrumented, a trace plus a pruned alternative.
``AlternativeContext`` re-executes the program against a primal trace:
draws before the divergence replay the recorded outcomes verbatim, the
divergence draw is forced to its flipped value, and everything after is fed
from the per-step omega queue (coupled) or fresh fallback draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .discrete import InvalidProbabilityError, PruningState, bernoulli_stochastic
from .dual import Dual
from .streams import EventStreams, OmegaFifo

__all__ = [
    "DrawRecord",
    "PrimalTrace",
    "PrimalContext",
    "AlternativeContext",
    "value_of",
    "tangent_of",
]


def value_of(out) -> float:
    return out.value if isinstance(out, Dual) else float(out)


def tangent_of(out) -> float:
    return out.tangent if isinstance(out, Dual) else 0.0


class DrawRecord(NamedTuple):
    step: int
    slot: int
    outcome: int
    omega: float


@dataclass(slots=True)
class PrimalTrace:
    draws: list[DrawRecord]
    uniforms: list[float]

    def omegas_for_step(self, step: int, after_slot: int = -1) -> list[float]:
        return [d.omega for d in self.draws if d.step == step and d.slot > after_slot]


class PrimalContext:
    """Forward sampling; optionally records a trace and prunes alternatives."""

    replay_active = False

    __slots__ = ("streams", "score", "step", "pruning", "_slot", "_draws", "_uniforms", "_n_draws")

    def __init__(self, streams: EventStreams, *, prune: bool = False, record: bool = False):
        self.streams = streams
        self.score = 0.0
        self.step = 0
        self._slot = 0
        self._n_draws = 0
        self._draws: list[DrawRecord] | None = [] if record else None
        self._uniforms: list[float] = []
        self.pruning = PruningState(lambda: streams.pruning) if prune else None

    def begin_step(self, index: int) -> None:
        self.step = index
        self._slot = 0

    def uniform(self) -> float:
        u = self.streams.omega.uniform()
        self._uniforms.append(u)
        return u

    def bernoulli(self, p: Dual) -> int:
        omega = self.streams.omega.uniform()
        draw_id = self._n_draws
        self._n_draws += 1
        pv = p.value
        if self.pruning is not None:
            outcome, alt = bernoulli_stochastic(p, omega, draw_id)
            self.pruning.consider(alt)
        else:
            if not 0.0 < pv < 1.0:
                raise InvalidProbabilityError(f"probability must lie strictly in (0, 1), got {pv}")
            outcome = 1 if omega > 1.0 - pv else 0
        self.score += (outcome - pv) / (pv * (1.0 - pv)) * p.tangent
        if self._draws is not None:
            self._draws.append(DrawRecord(self.step, self._slot, outcome, omega))
        self._slot += 1
        return outcome

    @property
    def n_draws(self) -> int:
        return self._n_draws

    def trace(self) -> PrimalTrace:
        if self._draws is None:
            raise RuntimeError("context was not recording")
        return PrimalTrace(self._draws, self._uniforms)


class AlternativeContext:
    """Replay a primal trace up to one flipped draw, then couple.

    The prefix is shared verbatim: recorded outcomes are applied without
    redrawing. From the divergence step onward the queue holds the primal's
    omegas for the current step (for the divergence step itself, only the
    slots after the flipped one); once it runs dry, draws come fresh from
    the fallback stream. With ``coupled=False`` the queue is never loaded,
    so the whole continuation is fresh.
    """

    __slots__ = (
        "trace",
        "divergence_index",
        "flipped_value",
        "streams",
        "coupled",
        "fifo",
        "step",
        "_count",
        "_u_count",
        "_div_step",
        "_div_slot",
    )

    def __init__(
        self,
        trace: PrimalTrace,
        divergence_index: int,
        flipped_value: int,
        streams: EventStreams,
        *,
        coupled: bool = True,
    ):
        if not 0 <= divergence_index < len(trace.draws):
            raise ValueError(f"divergence index {divergence_index} outside the trace")
        self.trace = trace
        self.divergence_index = divergence_index
        self.flipped_value = flipped_value
        self.streams = streams
        self.coupled = coupled
        self.fifo = OmegaFifo()
        div = trace.draws[divergence_index]
        self._div_step = div.step
        self._div_slot = div.slot
        self._count = 0
        self._u_count = 0
        self.step = 0
        self.begin_step(0)

    def begin_step(self, index: int) -> None:
        self.step = index
        if not self.coupled:
            return
        if index == self._div_step:
            self.fifo.load(self.trace.omegas_for_step(index, after_slot=self._div_slot))
        elif index > self._div_step:
            self.fifo.load(self.trace.omegas_for_step(index))

    def uniform(self) -> float:
        if self._u_count < len(self.trace.uniforms):
            u = self.trace.uniforms[self._u_count]
            self._u_count += 1
            return u
        return self.streams.fallback.uniform()

    @property
    def replay_active(self) -> bool:
        """True while the next draw is determined by the shared prefix
        (recorded outcomes up to and including the flipped draw), so the
        caller may skip computing its probability."""
        return self._count <= self.divergence_index

    def replay_outcome(self) -> int:
        i = self._count
        self._count += 1
        if i < self.divergence_index:
            return self.trace.draws[i].outcome
        if i == self.divergence_index:
            return self.flipped_value
        raise RuntimeError("replay requested past the divergence draw")

    def bernoulli(self, p: Dual) -> int:
        if self._count <= self.divergence_index:
            return self.replay_outcome()
        self._count += 1
        # Touch the fallback stream only on a real queue miss, so a fully
        # covered continuation never has to seed it.
        rng = None if self.fifo else self.streams.fallback
        omega, _ = self.fifo.pop_or_draw(rng)
        return 1 if omega > 1.0 - p.value else 0

    def coupled_fraction(self) -> float | None:
        popped = self.fifo.popped_coupled + self.fifo.popped_fresh
        if popped == 0:
            return None
        return self.fifo.popped_coupled / popped
