"""Brute-force ground truth for small stochastic programs.

Enumerates every reachable sequence of Bernoulli outcomes (a path), with
its probability accumulated in dual arithmetic, so the derivative of the
exact expectation sum(P(path; theta) * f(path)) is available without any
sampling error. Only feasible for programs whose draw count is tightly
bounded; the bound is enforced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .detector import DetectorParams
from .dual import Dual, lift
from .simulate import LossProgram, Mode, SimConfig

__all__ = [
    "OracleError",
    "InstanceTooLargeError",
    "PathOutcome",
    "enumerate_paths",
    "exact_expectation",
    "exact_gradient",
    "TinyInstance",
    "tiny_energy_loss_instance",
]

MAX_ENUMERABLE_DRAWS = 14


class OracleError(RuntimeError):
    pass


class InstanceTooLargeError(OracleError):
    pass


class _NeedsBranch(Exception):
    pass


class EnumerationContext:
    """Feeds a forced outcome prefix; asks for a branch when it runs out."""

    replay_active = False

    __slots__ = ("prefix", "i", "path_prob")

    def __init__(self, prefix: tuple[int, ...]):
        self.prefix = prefix
        self.i = 0
        self.path_prob = Dual(1.0, 0.0)

    def begin_step(self, index: int) -> None:
        pass

    def uniform(self) -> float:
        raise OracleError(
            "enumeration covers discrete draws only; fix continuous inputs "
            "(e.g. the initial direction) before enumerating"
        )

    def bernoulli(self, p: Dual) -> int:
        if self.i >= len(self.prefix):
            raise _NeedsBranch
        b = self.prefix[self.i]
        self.i += 1
        self.path_prob = self.path_prob * (p if b else (1.0 - p))
        return b


@dataclass(slots=True, frozen=True)
class PathOutcome:
    outcomes: tuple[int, ...]
    probability: Dual
    value: float
    tangent: float


def enumerate_paths(program, theta: float, max_draws: int = MAX_ENUMERABLE_DRAWS) -> list[PathOutcome]:
    theta_dual = Dual(theta, 1.0)
    paths: list[PathOutcome] = []

    def explore(prefix: tuple[int, ...]) -> None:
        ctx = EnumerationContext(prefix)
        try:
            out = program(theta_dual, ctx)
        except _NeedsBranch:
            if len(prefix) >= max_draws:
                raise InstanceTooLargeError(
                    f"program exceeds {max_draws} Bernoulli draws on some path"
                ) from None
            explore(prefix + (0,))
            explore(prefix + (1,))
            return
        if ctx.i != len(prefix):
            raise OracleError("program consumed fewer draws than on a previous visit")
        lifted = lift(out)
        paths.append(PathOutcome(prefix, ctx.path_prob, lifted.value, lifted.tangent))

    explore(())
    return paths


def exact_expectation(program, theta: float, max_draws: int = MAX_ENUMERABLE_DRAWS) -> Dual:
    """E[f] as a dual in theta, from full path enumeration."""
    paths = enumerate_paths(program, theta, max_draws)
    total_prob = 0.0
    total = Dual(0.0, 0.0)
    for path in paths:
        total_prob += path.probability.value
        total = total + path.probability * Dual(path.value, path.tangent)
    if not math.isclose(total_prob, 1.0, rel_tol=0.0, abs_tol=1e-10):
        raise OracleError(f"path probabilities sum to {total_prob!r}, not 1")
    return total


def exact_gradient(program, theta: float, max_draws: int = MAX_ENUMERABLE_DRAWS) -> float:
    return exact_expectation(program, theta, max_draws).tangent


@dataclass(frozen=True)
class TinyInstance:
    """A simulator configuration small enough to enumerate exactly."""

    config: SimConfig
    detector: DetectorParams
    max_draws: int = MAX_ENUMERABLE_DRAWS

    def __post_init__(self):
        if self.config.initial_direction is None:
            raise ValueError("tiny instances need a fixed initial direction")
        if self.config.max_steps > self.max_draws:
            raise ValueError(
                f"max_steps {self.config.max_steps} cannot bound draws by {self.max_draws}"
            )

    def program(self) -> LossProgram:
        return LossProgram(self.config, self.detector)

    def exact_gradient(self, theta: float) -> float:
        return exact_gradient(self.program(), theta, self.max_draws)

    def exact_expectation(self, theta: float) -> Dual:
        return exact_expectation(self.program(), theta, self.max_draws)


def tiny_energy_loss_instance() -> TinyInstance:
    """Twelve coarse steps, two interactions to stop: 79 paths, exact in ms.

    In energy-loss mode a single particle bounds the Bernoulli draw count
    by max_steps, which keeps enumeration trivially cheap while exercising
    the very same stepping and material code as the full-size runs.
    """
    config = SimConfig(
        mode=Mode.ENERGY_LOSS,
        step_size=0.2,
        e_init=2.2,
        e_threshold=0.5,
        e_loss=1.0,
        target_radius=2.0,
        max_steps=12,
        world_radius=8.0,
        initial_direction=0.0,
    )
    detector = DetectorParams(theta_r=Dual(0.8, 1.0))
    return TinyInstance(config, detector, max_draws=12)
