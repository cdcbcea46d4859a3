"""Fixed-step toy detector simulation.

One particle starts just off the origin with a configurable or randomly
drawn direction and walks in straight steps. At each step each live
particle propagates, then draws a Bernoulli against the local material
probability. On an interaction the position is recorded as a hit and the
particle either loses a fixed energy quantum (EnergyLoss mode) or splits
into two half-energy daughters opened symmetrically around its direction
(Shower mode; the split decision site is kept but forced by the mode).
Particles below the energy threshold retire; particles that leave the
world, or that are provably past the material moving outward, are dropped.

The loss compares recorded hit radii against a target radius.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .detector import DetectorParams, interaction_probability
from .dual import Dual
from .sampling import AlternativeContext, PrimalContext, PrimalTrace
from .streams import EventStreams

__all__ = [
    "Mode",
    "Termination",
    "SimConfig",
    "ParticleState",
    "Hit",
    "Track",
    "Event",
    "propagate",
    "split",
    "simulate_event",
    "run_alternative",
    "loss",
    "LossProgram",
]

TWO_PI = 2.0 * math.pi


class Mode(enum.Enum):
    ENERGY_LOSS = "energy-loss"
    SHOWER = "shower"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        for mode in cls:
            if mode.value == text:
                return mode
        raise ValueError(f"unknown mode {text!r}; expected one of {[m.value for m in cls]}")


class Termination(enum.Enum):
    ALL_BELOW_THRESHOLD = "all_below_threshold"
    MAX_STEPS = "max_steps"
    LEFT_WORLD = "left_world"


@dataclass(slots=True, frozen=True)
class SimConfig:
    mode: Mode = Mode.ENERGY_LOSS
    step_size: float = 0.02
    e_init: float = 25.0
    e_threshold: float = 0.5
    e_loss: float = 1.0
    opening_angle: float = 0.1
    target_radius: float = 2.0
    max_steps: int = 400
    world_radius: float = 8.0
    initial_position: tuple[float, float] = (0.01, 0.0)
    initial_direction: float | None = None  # angle in radians; None draws uniformly

    def __post_init__(self):
        if self.step_size <= 0.0 or self.e_init <= 0.0 or self.world_radius <= 0.0:
            raise ValueError("step_size, e_init and world_radius must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    @property
    def no_hit_loss(self) -> float:
        # Sentinel above any achievable mean squared radius mismatch.
        return self.world_radius * self.world_radius


@dataclass(slots=True)
class ParticleState:
    pos: tuple[float, float]
    direction: tuple[float, float]
    energy: float


@dataclass(slots=True, frozen=True)
class Hit:
    pos: tuple[float, float]
    r: float
    step_index: int


@dataclass(slots=True)
class Track:
    track_id: int
    parent_id: int | None
    birth_step: int
    energy: float
    points: list[tuple[float, float]]


@dataclass(slots=True)
class Event:
    hits: list[Hit]
    score_tangent: float
    n_steps: int
    terminated_by: Termination
    tracks: list[Track] | None = None


@dataclass(slots=True)
class StepSnapshot:
    """Handed to a step monitor after each step, for diagnostics/tests."""

    step: int
    live: list[ParticleState]
    retired: list[ParticleState]
    left: list[ParticleState]
    hits_this_step: int


def propagate(p: ParticleState, step_size: float) -> ParticleState:
    return ParticleState(
        (p.pos[0] + step_size * p.direction[0], p.pos[1] + step_size * p.direction[1]),
        p.direction,
        p.energy,
    )


def split(p: ParticleState, opening_angle: float) -> tuple[ParticleState, ParticleState]:
    """Two half-energy daughters, symmetric about the parent direction."""
    half = 0.5 * opening_angle
    c, s = math.cos(half), math.sin(half)
    dx, dy = p.direction
    e = 0.5 * p.energy
    left = ParticleState(p.pos, (c * dx - s * dy, s * dx + c * dy), e)
    right = ParticleState(p.pos, (c * dx + s * dy, -s * dx + c * dy), e)
    return left, right


def simulate_event(
    config: SimConfig,
    params: DetectorParams,
    ctx,
    *,
    record_tracks: bool = False,
    step_monitor=None,
) -> Event:
    angle = config.initial_direction
    if angle is None:
        angle = TWO_PI * ctx.uniform()
    direction = (math.cos(angle), math.sin(angle))
    particles = [ParticleState(config.initial_position, direction, config.e_init)]

    step_size = config.step_size
    e_threshold = config.e_threshold
    world_radius = config.world_radius
    shower = config.mode is Mode.SHOWER
    # Beyond this radius and moving outward a particle can never interact again.
    escape_radius = params.theta_r.value + params.r_max + params.pad

    hits: list[Hit] = []
    left_world = False
    step = 0

    tracks: list[Track] | None = None
    track_of: list[int] = []
    if record_tracks:
        tracks = [Track(0, None, 0, config.e_init, [config.initial_position])]
        track_of = [0]

    while step < config.max_steps and any(p.energy >= e_threshold for p in particles):
        ctx.begin_step(step)
        nxt: list[ParticleState] = []
        nxt_track: list[int] = []
        retired: list[ParticleState] = []
        left: list[ParticleState] = []
        hits_before = len(hits)

        for i, p in enumerate(particles):
            if p.energy < e_threshold:
                if step_monitor is not None:
                    retired.append(p)
                continue
            moved = propagate(p, step_size)
            x0, x1 = moved.pos
            r = math.hypot(x0, x1)
            outward = x0 * moved.direction[0] + x1 * moved.direction[1] > 0.0
            if r > world_radius or (r > escape_radius and outward):
                left_world = True
                if step_monitor is not None:
                    left.append(moved)
                continue
            if record_tracks:
                tracks[track_of[i]].points.append(moved.pos)
            if ctx.replay_active:
                interacted = ctx.replay_outcome()
            else:
                interacted = ctx.bernoulli(interaction_probability(moved.pos, params))
            if interacted:
                hits.append(Hit(moved.pos, r, step))
                if shower:
                    a, b = split(moved, config.opening_angle)
                    nxt.append(a)
                    nxt.append(b)
                    if record_tracks:
                        for child in (a, b):
                            tracks.append(Track(len(tracks), track_of[i], step, child.energy, [moved.pos]))
                            nxt_track.append(len(tracks) - 1)
                else:
                    nxt.append(ParticleState(moved.pos, moved.direction, moved.energy - config.e_loss))
                    if record_tracks:
                        nxt_track.append(track_of[i])
            else:
                nxt.append(moved)
                if record_tracks:
                    nxt_track.append(track_of[i])

        particles = nxt
        track_of = nxt_track
        step += 1
        if step_monitor is not None:
            step_monitor(StepSnapshot(step - 1, list(particles), retired, left, len(hits) - hits_before))

    if step >= config.max_steps and any(p.energy >= e_threshold for p in particles):
        terminated_by = Termination.MAX_STEPS
    elif left_world:
        terminated_by = Termination.LEFT_WORLD
    else:
        terminated_by = Termination.ALL_BELOW_THRESHOLD

    score = ctx.score if isinstance(ctx, PrimalContext) else 0.0
    return Event(hits, score, step, terminated_by, tracks)


def run_alternative(
    config: SimConfig,
    params: DetectorParams,
    trace: PrimalTrace,
    divergence_index: int,
    flipped_value: int,
    streams: EventStreams,
    *,
    coupled: bool = True,
    record_tracks: bool = False,
) -> tuple[Event, AlternativeContext]:
    """Re-run an event with one draw flipped, sharing state before it."""
    ctx = AlternativeContext(trace, divergence_index, flipped_value, streams, coupled=coupled)
    event = simulate_event(config, params, ctx, record_tracks=record_tracks)
    return event, ctx


def loss(event: Event, target_radius: float, no_hit_loss: float = 64.0) -> float:
    """Mean squared mismatch of hit radii against the target radius."""
    if not event.hits:
        return no_hit_loss
    total = 0.0
    for h in event.hits:
        d = h.r - target_radius
        total += d * d
    return total / len(event.hits)


@dataclass(frozen=True)
class LossProgram:
    """The simulator as a differentiable-program callable.

    ``theta`` is substituted for the detector's start radius; the return
    value is the scalar loss of the simulated event.
    """

    config: SimConfig
    detector: DetectorParams

    def __call__(self, theta: Dual, ctx) -> float:
        params = replace(self.detector, theta_r=theta)
        event = simulate_event(self.config, params, ctx)
        return loss(event, self.config.target_radius, self.config.no_hit_loss)
