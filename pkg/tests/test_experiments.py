import logging
import math

import numpy as np
import pytest

from branchgrad.detector import DetectorParams
from branchgrad.dual import Dual
from branchgrad.estimators import Method
from branchgrad.experiments import (
    AdamState,
    OptimizerDivergedError,
    adam_step,
    grad_table,
    optimize,
    scan,
)
from branchgrad.simulate import Mode, SimConfig


def tiny_setup(mode=Mode.ENERGY_LOSS):
    # coarse but real: fast enough for unit tests
    return (
        SimConfig(mode=mode, step_size=0.1, max_steps=80),
        DetectorParams(theta_r=Dual(1.0, 1.0)),
    )


# --- Adam ---


def test_adam_first_step_is_about_lr():
    state = AdamState(lr=0.01)
    new = adam_step(state, 5.0, 1.0)
    assert new == pytest.approx(1.0 - 0.01, abs=1e-6)
    state = AdamState(lr=0.01)
    assert adam_step(state, -0.001, 1.0) == pytest.approx(1.0 + 0.01, abs=1e-6)


def test_adam_zero_gradient_keeps_theta():
    state = AdamState()
    assert adam_step(state, 0.0, 2.5) == 2.5
    assert state.t == 1


def test_adam_moves_against_the_gradient():
    state = AdamState()
    theta = 1.0
    for _ in range(10):
        theta = adam_step(state, 3.0, theta)
    assert theta < 1.0


def test_adam_rejects_non_finite_gradients():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(OptimizerDivergedError):
            adam_step(AdamState(), bad, 1.0)


def test_adam_state_accumulates():
    state = AdamState(beta1=0.9, beta2=0.95)
    adam_step(state, 2.0, 0.0)
    assert state.m == pytest.approx(0.2)
    assert state.v == pytest.approx(0.2)
    assert state.t == 1


# --- scan ---


def test_scan_row_counts_and_grid():
    cfg, det = tiny_setup()
    thetas = [1.0, 1.5, 2.0, 2.5]
    res = scan(cfg, det, thetas, 40, [Method.STOCHAD, Method.SCORE_BASELINE], seed=5)
    assert [r.theta for r in res.loss_rows] == thetas
    assert len(res.grad_rows) == len(thetas) * 2
    assert {r.method for r in res.grad_rows} == {"stochad", "score_baseline"}
    for r in res.loss_rows:
        assert r.loss_q25 <= r.loss_median <= r.loss_q75
        assert math.isfinite(r.poly_fit_grad)


def test_scan_poly_fit_degree_capped_by_grid():
    cfg, det = tiny_setup()
    res = scan(cfg, det, [1.0, 2.0], 20, [], seed=5)
    # two points force a linear fit: both rows see the same slope
    assert res.loss_rows[0].poly_fit_grad == pytest.approx(res.loss_rows[1].poly_fit_grad)


def test_scan_reproducible():
    cfg, det = tiny_setup()
    a = scan(cfg, det, [1.0, 2.0], 30, [Method.STOCHAD], seed=9)
    b = scan(cfg, det, [1.0, 2.0], 30, [Method.STOCHAD], seed=9)
    assert a == b


# --- grad_table ---


def test_grad_table_rows_and_small_sample_warning(caplog):
    cfg, det = tiny_setup()
    methods = [Method.SCORE, Method.STOCHAD]
    with caplog.at_level(logging.WARNING):
        rows = grad_table(cfg, det, 1.5, 10, methods, seed=3)
    assert any("n=10" in r.message for r in caplog.records)
    assert len(rows) == 2
    for row in rows:
        assert row.mode == "energy-loss"
        assert row.theta == 1.5 and row.n == 10
        assert row.q25 <= row.q50 <= row.q75


def test_grad_table_no_warning_at_adequate_n(caplog):
    cfg, det = tiny_setup()
    with caplog.at_level(logging.WARNING):
        grad_table(cfg, det, 1.5, 30, [Method.STOCHAD], seed=3)
    assert not caplog.records


# --- optimize ---


def test_optimize_trace_shapes_and_seeds():
    cfg, det = tiny_setup()
    runs = optimize(cfg, det, Method.STOCHAD, 3, 12, 2, 2.0, seed=51)
    assert [r.replica_id for r in runs] == [0, 1, 2]
    assert [r.seed for r in runs] == [51, 52, 53]
    for r in runs:
        assert len(r.theta_trace) == 13
        assert len(r.loss_trace) == 13
        assert r.theta_trace[0] == 2.0
        assert r.method == "stochad"


def test_optimize_rejects_smooth_only():
    cfg, det = tiny_setup()
    with pytest.raises(ValueError):
        optimize(cfg, det, Method.SMOOTH_ONLY, 1, 5, 2, 2.0, seed=1)


def test_optimize_clamps_to_bounds():
    cfg, det = tiny_setup()
    runs = optimize(
        cfg, det, Method.STOCHAD, 2, 15, 2, 2.0, seed=5, theta_bounds=(1.9, 2.1), lr=0.05
    )
    for r in runs:
        assert all(1.9 <= t <= 2.1 for t in r.theta_trace)


def test_optimize_thread_invariant():
    cfg, det = tiny_setup()
    a = optimize(cfg, det, Method.SCORE_BASELINE, 4, 8, 2, 2.0, seed=5, threads=1)
    b = optimize(cfg, det, Method.SCORE_BASELINE, 4, 8, 2, 2.0, seed=5, threads=4)
    assert [r.theta_trace for r in a] == [r.theta_trace for r in b]


def test_smoothed_median_loss_non_increasing_on_desk_scale_run():
    # The default-calibration property at desk scale: median loss over
    # replicas, smoothed over 50-step windows, should not rise.
    cfg = SimConfig(mode=Mode.SHOWER)
    det = DetectorParams(theta_r=Dual(1.0, 1.0))
    runs = optimize(cfg, det, Method.STOCHAD, 4, 200, 2, 3.0, seed=77, threads=4)
    per_step = np.median([r.loss_trace[:-1] for r in runs], axis=0)
    windows = [per_step[i : i + 50].mean() for i in range(0, 200, 50)]
    drops = np.diff(windows)
    assert (drops <= 0.05 * abs(windows[0])).all()
