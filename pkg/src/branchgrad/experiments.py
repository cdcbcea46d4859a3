"""Study drivers: parameter scans, estimator comparison tables, and
Adam-based optimization of the detector start radius."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .detector import DetectorParams
from .estimators import (
    Method,
    estimator_stats,
    gradient_samples,
    primal_losses,
)
from .parallel import pmap
from .simulate import LossProgram, SimConfig
from .streams import child_seed

__all__ = [
    "ScanLossRow",
    "ScanGradRow",
    "ScanResult",
    "scan",
    "GradTableRow",
    "grad_table",
    "AdamState",
    "adam_step",
    "OptimizerDivergedError",
    "OptRun",
    "optimize",
]

log = logging.getLogger(__name__)

_SMALL_SAMPLE_WARN = 30


@dataclass(slots=True, frozen=True)
class ScanLossRow:
    theta: float
    loss_mean: float
    loss_median: float
    loss_q25: float
    loss_q75: float
    poly_fit_grad: float


@dataclass(slots=True, frozen=True)
class ScanGradRow:
    theta: float
    method: str
    grad_mean: float
    grad_std: float
    n: int


@dataclass(slots=True, frozen=True)
class ScanResult:
    loss_rows: list[ScanLossRow]
    grad_rows: list[ScanGradRow]


def scan(
    config: SimConfig,
    detector: DetectorParams,
    thetas,
    n_per_point: int,
    methods,
    seed: int,
    *,
    fd_eps: float = 0.01,
    poly_degree: int = 6,
    threads: int = 1,
) -> ScanResult:
    """Loss statistics and estimator means over a theta grid, plus the
    derivative of a polynomial fit to the mean-loss curve."""
    thetas = [float(t) for t in thetas]
    program = LossProgram(config, detector)

    loss_stats = []
    grad_rows: list[ScanGradRow] = []
    for i, theta in enumerate(thetas):
        losses = np.asarray(primal_losses(program, theta, n_per_point, child_seed(seed, 0, i), threads=threads))
        q25, q50, q75 = np.quantile(losses, [0.25, 0.5, 0.75])
        loss_stats.append((float(losses.mean()), float(q50), float(q25), float(q75)))
        for j, method in enumerate(methods):
            samples = gradient_samples(
                method, program, theta, n_per_point, child_seed(seed, 1 + j, i),
                fd_eps=fd_eps, threads=threads,
            )
            stats = estimator_stats(samples)
            grad_rows.append(ScanGradRow(theta, method.value, stats.mean, stats.std, stats.n))

    degree = min(poly_degree, len(thetas) - 1)
    fit = np.polynomial.Polynomial.fit(thetas, [s[0] for s in loss_stats], degree)
    dfit = fit.deriv()
    loss_rows = [
        ScanLossRow(theta, mean, q50, q25, q75, float(dfit(theta)))
        for theta, (mean, q50, q25, q75) in zip(thetas, loss_stats)
    ]
    return ScanResult(loss_rows, grad_rows)


@dataclass(slots=True, frozen=True)
class GradTableRow:
    mode: str
    method: str
    theta: float
    n: int
    mean: float
    std: float
    q25: float
    q50: float
    q75: float


def grad_table(
    config: SimConfig,
    detector: DetectorParams,
    theta: float,
    n: int,
    methods,
    seed: int,
    *,
    fd_eps: float = 0.01,
    threads: int = 1,
) -> list[GradTableRow]:
    if n < _SMALL_SAMPLE_WARN:
        log.warning("estimator std from only n=%d samples is noisy", n)
    program = LossProgram(config, detector)
    rows = []
    for j, method in enumerate(methods):
        samples = gradient_samples(
            method, program, theta, n, child_seed(seed, 10 + j),
            fd_eps=fd_eps, threads=threads,
        )
        s = estimator_stats(samples)
        rows.append(
            GradTableRow(config.mode.value, method.value, theta, s.n, s.mean, s.std, s.q25, s.q50, s.q75)
        )
    return rows


@dataclass(slots=True)
class AdamState:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.95
    eps: float = 1e-8
    m: float = 0.0
    v: float = 0.0
    t: int = 0


class OptimizerDivergedError(RuntimeError):
    pass


def adam_step(state: AdamState, grad: float, theta: float) -> float:
    """One bias-corrected Adam update; mutates the state, returns new theta."""
    if not math.isfinite(grad):
        raise OptimizerDivergedError(f"non-finite gradient {grad!r} at step {state.t + 1}")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return theta - state.lr * m_hat / (math.sqrt(v_hat) + state.eps)


_FINAL_EVAL_N = 200


@dataclass(slots=True, frozen=True)
class OptRun:
    method: str
    replica_id: int
    seed: int
    theta_trace: list[float]
    loss_trace: list[float]


def _optimize_replica(
    config: SimConfig,
    detector: DetectorParams,
    method: Method,
    steps: int,
    batch: int,
    theta_init: float,
    lr: float,
    theta_bounds: tuple[float, float],
    fd_eps: float,
    base_seed: int,
    replica_id: int,
) -> OptRun:
    seed = base_seed + replica_id
    program = LossProgram(config, detector)
    state = AdamState(lr=lr)
    lo, hi = theta_bounds
    theta = theta_init
    theta_trace = [theta]
    loss_trace = []
    clamped = 0
    for step in range(steps):
        samples = gradient_samples(
            method, program, theta, batch, child_seed(seed, step), fd_eps=fd_eps
        )
        grad = sum(s.value for s in samples) / len(samples)
        loss_trace.append(sum(s.aux["loss"] for s in samples) / len(samples))
        theta = adam_step(state, grad, theta)
        if theta < lo or theta > hi:
            clamped += 1
            theta = min(max(theta, lo), hi)
        theta_trace.append(theta)
    # Last row evaluates the arrived-at theta properly; the per-step rows are the
    # noisy batch means the optimizer actually saw.
    final = primal_losses(program, theta, _FINAL_EVAL_N, child_seed(seed, steps))
    loss_trace.append(sum(final) / len(final))
    if clamped:
        log.info("replica %d clamped theta to bounds on %d steps", replica_id, clamped)
    return OptRun(method.value, replica_id, seed, theta_trace, loss_trace)


def optimize(
    config: SimConfig,
    detector: DetectorParams,
    method: Method,
    replicas: int,
    steps: int,
    batch: int,
    theta_init: float,
    seed: int,
    *,
    lr: float = 0.01,
    theta_bounds: tuple[float, float] = (0.5, 6.0),
    fd_eps: float = 0.01,
    threads: int = 1,
) -> list[OptRun]:
    """Independent Adam replicas; replica r uses seed + r throughout."""
    if method is Method.SMOOTH_ONLY:
        raise ValueError("the smooth-only tangent is identically zero here; nothing to optimize")
    worker = partial(
        _optimize_replica,
        config, detector, method, steps, batch, theta_init, lr, theta_bounds, fd_eps, seed,
    )
    return pmap(worker, range(replicas), threads)
