from scipy import stats

from branchgrad.streams import (
    EventStreams,
    OmegaFifo,
    RunRng,
    child_seed,
    draw_uniform,
    fifo_pop_or_draw,
    fifo_push,
)


def test_child_seed_is_deterministic_and_path_sensitive():
    assert child_seed(7, 1, 2) == child_seed(7, 1, 2)
    assert child_seed(7, 1, 2) != child_seed(7, 2, 1)
    assert child_seed(7) != child_seed(8)
    # appending a zero is not the same as stopping
    assert child_seed(7, 1) != child_seed(7, 1, 0)


def test_child_seed_accepts_its_own_output_and_negatives():
    wide = child_seed(1, 2)
    assert wide.bit_length() <= 128
    assert child_seed(wide, 0) != child_seed(wide, 1)
    assert child_seed(-5, 3) != child_seed(5, 3)


def test_runrng_reproducible_by_address():
    a = [RunRng(9, 4, 1, 2).uniform() for _ in range(5)]
    b = [RunRng(9, 4, 1, 2).uniform() for _ in range(5)]
    assert a == b
    assert RunRng(9, 4, 1, 2).uniform() != RunRng(9, 4, 1, 3).uniform()


def test_runrng_counts_draws():
    rng = RunRng(0)
    for _ in range(3):
        draw_uniform(rng)
    assert rng.draw_counter == 3


def test_stream_uniformity_and_independence():
    rng = RunRng(123)
    xs = [rng.uniform() for _ in range(4000)]
    assert stats.kstest(xs, "uniform").pvalue > 0.01
    other = RunRng(123, 0, 0, 1)
    ys = [other.uniform() for _ in range(4000)]
    assert abs(stats.pearsonr(xs, ys).statistic) < 0.05


def test_event_streams_substreams_are_distinct_and_lazy():
    ev = EventStreams(5, 0)
    assert ev._pruning is None and ev._fallback is None
    a = ev.omega.uniform()
    b = ev.pruning.uniform()
    c = ev.fallback.uniform()
    assert len({a, b, c}) == 3
    assert ev._pruning is not None and ev._fallback is not None


def test_event_streams_differ_by_chunk_and_lane():
    base = EventStreams(5, 0, 0).omega.uniform()
    assert EventStreams(5, 1, 0).omega.uniform() != base
    assert EventStreams(5, 0, 1).omega.uniform() != base


def test_fifo_replays_in_order_then_falls_back():
    fifo = OmegaFifo()
    fifo_push(fifo, 0.1)
    fifo_push(fifo, 0.2)
    rng = RunRng(2)
    assert fifo_pop_or_draw(fifo, rng) == (0.1, True)
    assert fifo_pop_or_draw(fifo, rng) == (0.2, True)
    value, coupled = fifo_pop_or_draw(fifo, rng)
    assert not coupled and 0.0 <= value < 1.0
    assert fifo.popped_coupled == 2 and fifo.popped_fresh == 1


def test_fifo_load_replaces_contents():
    fifo = OmegaFifo()
    fifo.push(0.9)
    fifo.load([0.3, 0.4])
    assert len(fifo) == 2
    assert fifo.pop_or_draw(RunRng(0))[0] == 0.3
