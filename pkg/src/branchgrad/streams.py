"""Deterministic per-event randomness.

Every random draw in a run comes from a stream addressed by
``(seed, stream_id, lane, substream)``. The address is hashed into a
128-bit child seed, so distinct addresses give statistically independent
streams and a fixed address always reproduces the same sequence.

Within one event three substreams are kept apart for common-random-number
hygiene: primal draws, pruning decisions, and fresh draws for the
alternative continuation. ``lane`` separates whole evaluations that must
not share randomness, e.g. the two ends of a finite difference.
"""

from __future__ import annotations

import random
from collections import deque
from hashlib import blake2b

__all__ = [
    "child_seed",
    "RunRng",
    "draw_uniform",
    "OmegaFifo",
    "fifo_push",
    "fifo_pop_or_draw",
    "EventStreams",
]

_SUB_OMEGA = 0
_SUB_PRUNING = 1
_SUB_FALLBACK = 2


def child_seed(root: int, *path: int) -> int:
    # 32-byte parts so a previous 128-bit child seed can itself be the root.
    data = b"".join(int(part).to_bytes(32, "little", signed=True) for part in (root, *path))
    return int.from_bytes(blake2b(data, digest_size=16).digest(), "little")


class RunRng:
    """One uniform stream, reproducible from its address."""

    __slots__ = ("seed", "stream_id", "substream", "lane", "draw_counter", "_rng")

    def __init__(self, seed: int, stream_id: int = 0, substream: int = 0, lane: int = 0):
        self.seed = seed
        self.stream_id = stream_id
        self.substream = substream
        self.lane = lane
        self.draw_counter = 0
        self._rng = random.Random(child_seed(seed, stream_id, lane, substream))

    def uniform(self) -> float:
        """Next uniform in [0, 1)."""
        self.draw_counter += 1
        return self._rng.random()


def draw_uniform(rng: RunRng) -> float:
    return rng.uniform()


class OmegaFifo:
    """Queue of primal uniforms replayed, in order, by the alternative.

    Holds at most one time step's worth of draws; the owner reloads it at
    each step boundary. Popping past the queue falls back to a fresh draw,
    flagged as uncoupled.
    """

    __slots__ = ("_queue", "popped_coupled", "popped_fresh")

    def __init__(self):
        self._queue: deque[float] = deque()
        self.popped_coupled = 0
        self.popped_fresh = 0

    def __len__(self) -> int:
        return len(self._queue)

    def push(self, omega: float) -> None:
        self._queue.append(omega)

    def load(self, omegas) -> None:
        """Replace the queue contents at a time-step boundary."""
        self._queue.clear()
        self._queue.extend(omegas)

    def pop_or_draw(self, rng: RunRng) -> tuple[float, bool]:
        if self._queue:
            self.popped_coupled += 1
            return self._queue.popleft(), True
        self.popped_fresh += 1
        return rng.uniform(), False


def fifo_push(fifo: OmegaFifo, omega: float) -> OmegaFifo:
    fifo.push(omega)
    return fifo


def fifo_pop_or_draw(fifo: OmegaFifo, rng: RunRng) -> tuple[float, bool]:
    return fifo.pop_or_draw(rng)


class EventStreams:
    """The three per-event streams; pruning and fallback are built lazily
    since most estimator paths never touch them."""

    __slots__ = ("seed", "stream_id", "lane", "omega", "_pruning", "_fallback")

    def __init__(self, seed: int, stream_id: int, lane: int = 0):
        self.seed = seed
        self.stream_id = stream_id
        self.lane = lane
        self.omega = RunRng(seed, stream_id, _SUB_OMEGA, lane)
        self._pruning = None
        self._fallback = None

    @property
    def pruning(self) -> RunRng:
        if self._pruning is None:
            self._pruning = RunRng(self.seed, self.stream_id, _SUB_PRUNING, self.lane)
        return self._pruning

    @property
    def fallback(self) -> RunRng:
        if self._fallback is None:
            self._fallback = RunRng(self.seed, self.stream_id, _SUB_FALLBACK, self.lane)
        return self._fallback
