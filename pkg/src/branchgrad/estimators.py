"""Gradient estimators for stochastic programs.

All four estimate d/dtheta E[program(theta)] from n independent samples:

* numeric: finite differences with independent randomness per evaluation
* score: score-function weighting, optionally with a batch-mean baseline
* stochad: smooth tangent plus one pruned weighted alternative per run
* smooth_only: the naive forward-mode tangent, blind to the derivative
  carried by discrete draws (kept as the cautionary reference)

Samples are grouped into fixed-size chunks of 256; each chunk owns its
random streams, addressed by (seed, chunk index, lane), and samples
within a chunk draw from them sequentially. Chunk boundaries do not
depend on the worker count, so any n and any number of workers
reproduce the same values, and seeding cost is amortized over the
chunk rather than paid per sample.
"""

from __future__ import annotations

import enum
from functools import partial
from typing import NamedTuple

import numpy as np

from .dual import Dual
from .parallel import pmap
from .sampling import AlternativeContext, PrimalContext, tangent_of, value_of
from .streams import EventStreams
from .discrete import pruned_weight

__all__ = [
    "Method",
    "GradientSample",
    "EstimatorStats",
    "numeric_gradient",
    "score_gradient",
    "stochad_gradient",
    "smooth_only_gradient",
    "gradient_samples",
    "estimator_stats",
    "primal_losses",
]

_LANE_BASE = 0
_LANE_SHIFTED = 1
_LANE_SHIFTED_DOWN = 2

_CHUNK = 256


class Method(str, enum.Enum):
    NUMERIC = "numeric"
    SCORE = "score"
    SCORE_BASELINE = "score_baseline"
    STOCHAD = "stochad"
    SMOOTH_ONLY = "smooth_only"

    @classmethod
    def parse(cls, text: str) -> "Method":
        for m in cls:
            if m.value == text:
                return m
        raise ValueError(f"unknown method {text!r}; expected one of {[m.value for m in cls]}")


class GradientSample(NamedTuple):
    value: float
    method: Method
    aux: dict | None = None


class EstimatorStats(NamedTuple):
    mean: float
    std: float
    q25: float
    q50: float
    q75: float
    n: int


def _chunk_bounds(n: int) -> list[tuple[int, int]]:
    return [(start, min(start + _CHUNK, n)) for start in range(0, n, _CHUNK)]


def _flatten(chunks) -> list:
    out = []
    for chunk in chunks:
        out.extend(chunk)
    return out


def _score_chunk(program, theta, seed, bounds):
    start, stop = bounds
    streams = EventStreams(seed, start // _CHUNK, _LANE_BASE)
    dual = Dual(theta, 1.0)
    out = []
    for _ in range(start, stop):
        ctx = PrimalContext(streams)
        o = program(dual, ctx)
        out.append((value_of(o), tangent_of(o), ctx.score))
    return out


def _numeric_chunk(program, theta, seed, fd_eps, central, common_rng, bounds):
    start, stop = bounds
    chunk_id = start // _CHUNK
    up_dual = Dual(theta + fd_eps, 1.0)
    base_dual = Dual(theta, 1.0)
    down_dual = Dual(theta - fd_eps, 1.0)
    if not common_rng:
        up_streams = EventStreams(seed, chunk_id, _LANE_SHIFTED)
        base_streams = EventStreams(seed, chunk_id, _LANE_BASE)
        down_streams = EventStreams(seed, chunk_id, _LANE_SHIFTED_DOWN) if central else None
    out = []
    for idx in range(start, stop):
        if common_rng:
            # Shared draws require streams re-synchronized per sample, since
            # the two evaluations may consume different draw counts.
            up_streams = EventStreams(seed, idx, _LANE_BASE)
            base_streams = EventStreams(seed, idx, _LANE_BASE)
            down_streams = EventStreams(seed, idx, _LANE_BASE) if central else None
        up = value_of(program(up_dual, PrimalContext(up_streams)))
        base = value_of(program(base_dual, PrimalContext(base_streams)))
        if central:
            down = value_of(program(down_dual, PrimalContext(down_streams)))
            value = (up - down) / (2.0 * fd_eps)
        else:
            value = (up - base) / fd_eps
        out.append((value, base))
    return out


def _stochad_chunk(program, theta, seed, coupling, bounds):
    start, stop = bounds
    streams = EventStreams(seed, start // _CHUNK, _LANE_BASE)
    dual = Dual(theta, 1.0)
    out = []
    for _ in range(start, stop):
        ctx = PrimalContext(streams, prune=True, record=True)
        o = program(dual, ctx)
        f_x = value_of(o)
        delta = tangent_of(o)
        chosen = ctx.pruning.chosen
        aux = {"loss": f_x, "divergence_step": None, "coupled_fraction": None}
        if chosen is None:
            out.append(GradientSample(delta, Method.STOCHAD, aux))
            continue
        weight = pruned_weight(ctx.pruning)
        trace = ctx.trace()
        alt_ctx = AlternativeContext(
            trace, chosen.draw_id, chosen.flipped_value, streams, coupled=coupling
        )
        f_y = value_of(program(dual, alt_ctx))
        aux["divergence_step"] = trace.draws[chosen.draw_id].step
        aux["coupled_fraction"] = alt_ctx.coupled_fraction()
        aux["alt_loss"] = f_y
        out.append(GradientSample(delta + weight * (f_y - f_x), Method.STOCHAD, aux))
    return out


def numeric_gradient(
    program,
    theta: float,
    n: int,
    seed: int,
    *,
    fd_eps: float = 0.01,
    central: bool = False,
    common_rng: bool = False,
    threads: int = 1,
) -> list[GradientSample]:
    if fd_eps <= 0.0:
        raise ValueError("fd_eps must be positive")
    worker = partial(_numeric_chunk, program, theta, seed, fd_eps, central, common_rng)
    rows = _flatten(pmap(worker, _chunk_bounds(n), threads))
    return [GradientSample(value, Method.NUMERIC, {"loss": base}) for value, base in rows]


def score_gradient(
    program,
    theta: float,
    n: int,
    seed: int,
    *,
    use_baseline: bool = False,
    threads: int = 1,
) -> list[GradientSample]:
    worker = partial(_score_chunk, program, theta, seed)
    rows = _flatten(pmap(worker, _chunk_bounds(n), threads))
    baseline = sum(r[0] for r in rows) / len(rows) if (use_baseline and rows) else 0.0
    method = Method.SCORE_BASELINE if use_baseline else Method.SCORE
    return [
        GradientSample(delta + score * (value - baseline), method, {"loss": value})
        for value, delta, score in rows
    ]


def stochad_gradient(
    program,
    theta: float,
    n: int,
    seed: int,
    *,
    coupling: bool = True,
    threads: int = 1,
) -> list[GradientSample]:
    worker = partial(_stochad_chunk, program, theta, seed, coupling)
    return _flatten(pmap(worker, _chunk_bounds(n), threads))


def smooth_only_gradient(program, theta: float, n: int, seed: int, *, threads: int = 1) -> list[GradientSample]:
    worker = partial(_score_chunk, program, theta, seed)
    rows = _flatten(pmap(worker, _chunk_bounds(n), threads))
    return [GradientSample(delta, Method.SMOOTH_ONLY, {"loss": value}) for value, delta, _ in rows]


def gradient_samples(
    method: Method,
    program,
    theta: float,
    n: int,
    seed: int,
    *,
    fd_eps: float = 0.01,
    coupling: bool = True,
    threads: int = 1,
) -> list[GradientSample]:
    """Dispatch by method with each method's own defaults."""
    if method is Method.NUMERIC:
        return numeric_gradient(program, theta, n, seed, fd_eps=fd_eps, threads=threads)
    if method is Method.SCORE:
        return score_gradient(program, theta, n, seed, use_baseline=False, threads=threads)
    if method is Method.SCORE_BASELINE:
        return score_gradient(program, theta, n, seed, use_baseline=True, threads=threads)
    if method is Method.STOCHAD:
        return stochad_gradient(program, theta, n, seed, coupling=coupling, threads=threads)
    if method is Method.SMOOTH_ONLY:
        return smooth_only_gradient(program, theta, n, seed, threads=threads)
    raise ValueError(f"unknown method {method}")


def primal_losses(program, theta: float, n: int, seed: int, *, threads: int = 1) -> list[float]:
    worker = partial(_score_chunk, program, theta, seed)
    rows = _flatten(pmap(worker, _chunk_bounds(n), threads))
    return [value for value, _, _ in rows]


def estimator_stats(samples) -> EstimatorStats:
    values = np.asarray([s.value if isinstance(s, GradientSample) else float(s) for s in samples])
    if values.size < 2:
        raise ValueError("need at least two samples for a standard deviation")
    q25, q50, q75 = np.quantile(values, [0.25, 0.5, 0.75])
    return EstimatorStats(
        mean=float(values.mean()),
        std=float(values.std(ddof=1)),
        q25=float(q25),
        q50=float(q50),
        q75=float(q75),
        n=int(values.size),
    )
