import math

import pytest

from branchgrad.detector import DetectorParams
from branchgrad.dual import Dual
from branchgrad.sampling import PrimalContext, value_of
from branchgrad.simulate import (
    Event,
    Hit,
    LossProgram,
    Mode,
    ParticleState,
    SimConfig,
    Termination,
    loss,
    propagate,
    simulate_event,
    split,
)
from branchgrad.streams import EventStreams


def fresh_ctx(seed=0, stream=0):
    return PrimalContext(EventStreams(seed, stream))


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(step_size=0.0)
    with pytest.raises(ValueError):
        SimConfig(max_steps=0)
    assert SimConfig(world_radius=8.0).no_hit_loss == 64.0


def test_propagate_is_a_straight_step():
    p = ParticleState((1.0, 2.0), (0.6, 0.8), 5.0)
    q = propagate(p, 0.5)
    assert q.pos == (pytest.approx(1.3), pytest.approx(2.4))
    assert q.direction == p.direction
    assert q.energy == 5.0


def test_split_halves_energy_and_opens_symmetrically():
    angle = 0.2
    p = ParticleState((0.0, 1.0), (0.0, 1.0), 8.0)
    a, b = split(p, angle)
    assert a.energy == b.energy == 4.0
    for child in (a, b):
        assert math.hypot(*child.direction) == pytest.approx(1.0)
    spread = math.atan2(a.direction[0], a.direction[1]) - math.atan2(b.direction[0], b.direction[1])
    assert abs(spread) == pytest.approx(angle)
    assert a.pos == b.pos == p.pos


def test_loss_is_mean_squared_radius_mismatch():
    ev = Event([Hit((0.0, 1.0), 1.0, 0), Hit((3.0, 0.0), 3.0, 1)], 0.0, 2, Termination.MAX_STEPS)
    assert loss(ev, 2.0) == pytest.approx(((1 - 2) ** 2 + (3 - 2) ** 2) / 2)
    empty = Event([], 0.0, 2, Termination.LEFT_WORLD)
    assert loss(empty, 2.0, no_hit_loss=49.0) == 49.0


def detector(theta=1.0, tangent=1.0):
    return DetectorParams(theta_r=Dual(theta, tangent))


def test_energy_loss_hit_budget_and_conservation():
    cfg = SimConfig(mode=Mode.ENERGY_LOSS)
    # e_init 25, e_loss 1, threshold 0.5: at most 25 interactions
    for seed in range(30):
        ev = simulate_event(cfg, detector(), fresh_ctx(seed))
        assert len(ev.hits) <= 25


def test_shower_hit_budget():
    cfg = SimConfig(mode=Mode.SHOWER)
    # splits halve 25 GeV toward the 0.5 GeV floor: at most 63 splits
    for seed in range(30):
        ev = simulate_event(cfg, detector(), fresh_ctx(seed, stream=100))
        assert len(ev.hits) <= 63


def test_fixed_direction_same_stream_reproduces_the_event():
    cfg = SimConfig(mode=Mode.SHOWER, initial_direction=0.3)
    a = simulate_event(cfg, detector(), fresh_ctx(7))
    b = simulate_event(cfg, detector(), fresh_ctx(7))
    assert [h.pos for h in a.hits] == [h.pos for h in b.hits]
    assert a.terminated_by == b.terminated_by and a.n_steps == b.n_steps


def test_random_direction_consumes_one_uniform():
    cfg = SimConfig(mode=Mode.ENERGY_LOSS)
    ctx = PrimalContext(EventStreams(3, 0), record=True)
    simulate_event(cfg, detector(), ctx)
    assert len(ctx.trace().uniforms) == 1
    fixed = PrimalContext(EventStreams(3, 0), record=True)
    simulate_event(SimConfig(mode=Mode.ENERGY_LOSS, initial_direction=0.0), detector(), fixed)
    assert len(fixed.trace().uniforms) == 0


def test_max_steps_termination():
    cfg = SimConfig(mode=Mode.ENERGY_LOSS, max_steps=3, initial_direction=0.0)
    ev = simulate_event(cfg, detector(), fresh_ctx(1))
    assert ev.terminated_by is Termination.MAX_STEPS
    assert ev.n_steps <= 3


def test_left_world_when_aimed_through_empty_space():
    # the sensitive window starts beyond the world boundary, so the
    # particle crosses floor-probability vacuum and leaves hitless
    cfg = SimConfig(mode=Mode.ENERGY_LOSS, initial_direction=0.0, max_steps=500)
    ev = simulate_event(cfg, detector(theta=13.0), fresh_ctx(2))
    assert ev.terminated_by is Termination.LEFT_WORLD
    assert not ev.hits


def test_all_below_threshold_when_energy_exhausted():
    cfg = SimConfig(mode=Mode.ENERGY_LOSS, e_init=1.0, e_threshold=0.5, initial_direction=0.0)
    # dense material right on the path: one interaction retires the particle
    det = DetectorParams(theta_r=Dual(0.1, 1.0), sharpness=6.0, seg_freq=0.08, r_max=6.0)
    for seed in range(50):
        ev = simulate_event(cfg, det, fresh_ctx(seed, stream=7))
        if ev.hits:
            assert ev.terminated_by is Termination.ALL_BELOW_THRESHOLD
            break
    else:
        pytest.fail("no interacting event found")


def test_tracks_recorded_as_connected_polylines():
    cfg = SimConfig(mode=Mode.SHOWER)
    ev = simulate_event(cfg, detector(), fresh_ctx(11), record_tracks=True)
    assert ev.tracks is not None
    root = ev.tracks[0]
    assert root.parent_id is None
    assert root.points[0] == cfg.initial_position
    ids = {t.track_id for t in ev.tracks}
    for t in ev.tracks[1:]:
        assert t.parent_id in ids
        assert t.birth_step >= 0
    # shower children appear in pairs
    assert len(ev.tracks) % 2 == 1


def test_loss_program_substitutes_theta():
    cfg = SimConfig(mode=Mode.ENERGY_LOSS)
    program = LossProgram(cfg, detector(theta=1.0))
    out_near = value_of(program(Dual(1.0, 1.0), fresh_ctx(5)))
    out_far = value_of(program(Dual(13.0, 1.0), fresh_ctx(5)))
    assert out_far == cfg.no_hit_loss  # all material beyond reach
    assert 0.0 <= out_near <= cfg.no_hit_loss


def test_score_tangent_flows_through_context():
    cfg = SimConfig(mode=Mode.ENERGY_LOSS)
    program = LossProgram(cfg, detector())
    ctx = fresh_ctx(8)
    program(Dual(1.0, 1.0), ctx)
    ev_score = ctx.score
    assert math.isfinite(ev_score)
