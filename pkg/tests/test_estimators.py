import math

import numpy as np
import pytest

from branchgrad.estimators import (
    Method,
    estimator_stats,
    gradient_samples,
    numeric_gradient,
    primal_losses,
    score_gradient,
    smooth_only_gradient,
    stochad_gradient,
)
from branchgrad.reference import BernoulliIdentity, SmoothPlusBernoulli

ALL_FOUR = [Method.NUMERIC, Method.SCORE, Method.SCORE_BASELINE, Method.STOCHAD]


def mean_se(samples):
    vals = np.array([s.value for s in samples])
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def test_method_parse():
    assert Method.parse("stochad") is Method.STOCHAD
    with pytest.raises(ValueError):
        Method.parse("bogus")


def test_estimator_stats_quantiles():
    s = estimator_stats([1.0, 2.0, 3.0, 4.0])
    assert s.n == 4
    assert s.mean == 2.5
    assert s.q25 == 1.75 and s.q50 == 2.5 and s.q75 == 3.25


@pytest.mark.parametrize("method", ALL_FOUR)
@pytest.mark.parametrize("theta", [0.2, 0.5, 0.8])
def test_bare_bernoulli_gradient_is_one(method, theta):
    program = BernoulliIdentity()
    n = 8000 if method is Method.NUMERIC else 3000
    mean, se = mean_se(gradient_samples(method, program, theta, n, seed=5))
    assert abs(mean - 1.0) <= max(3.0 * se, 1e-9)


def test_smooth_only_sees_exactly_the_smooth_term():
    program = SmoothPlusBernoulli()
    samples = smooth_only_gradient(program, 0.7, 50, seed=3)
    assert all(s.value == pytest.approx(1.4, rel=1e-12) for s in samples)


def test_smooth_plus_bernoulli_full_gradient():
    program = SmoothPlusBernoulli()
    theta = 0.7
    want = program.exact_gradient(theta)
    for method in (Method.STOCHAD, Method.SCORE_BASELINE):
        mean, se = mean_se(gradient_samples(method, program, theta, 4000, seed=11))
        assert abs(mean - want) <= 3.0 * se
    # the smooth-only tangent misses the discrete channel h'(theta) = s(1-s)
    h_prime = 1.0 / (2.0 + math.exp(theta) + math.exp(-theta))
    assert want - program.smooth_gradient(theta) == pytest.approx(h_prime, rel=1e-12)


def test_fixed_probability_bernoulli_has_no_discrete_gradient():
    program = SmoothPlusBernoulli(theta_dependent_p=False)
    samples = stochad_gradient(program, 0.7, 2000, seed=2)
    assert all(s.value == pytest.approx(1.4, rel=1e-12) for s in samples)
    for s in samples:
        assert s.aux["divergence_step"] is None


def test_stochad_aux_fields():
    program = SmoothPlusBernoulli()
    samples = stochad_gradient(program, 0.3, 200, seed=6)
    for s in samples:
        assert set(s.aux) >= {"loss", "divergence_step", "coupled_fraction"}
        if s.aux["divergence_step"] is not None:
            assert "alt_loss" in s.aux


def test_numeric_rejects_bad_eps():
    with pytest.raises(ValueError):
        numeric_gradient(SmoothPlusBernoulli(), 0.5, 10, seed=0, fd_eps=0.0)


def test_numeric_central_beats_forward_on_curvature():
    # f = theta^2 smooth part: forward FD bias is fd_eps, central is 0.
    program = SmoothPlusBernoulli(theta_dependent_p=False)
    theta, eps = 1.0, 0.25
    fwd = numeric_gradient(program, theta, 400, seed=9, fd_eps=eps)
    cen = numeric_gradient(program, theta, 400, seed=9, fd_eps=eps, central=True)
    fwd_bias = abs(np.mean([s.value for s in fwd]) - 2 * theta)
    cen_bias = abs(np.mean([s.value for s in cen]) - 2 * theta)
    assert fwd_bias == pytest.approx(eps, abs=0.05)
    assert cen_bias < fwd_bias


def test_numeric_common_rng_shares_draws():
    # With p fixed, shared streams make the discrete term cancel exactly.
    program = SmoothPlusBernoulli(theta_dependent_p=False)
    samples = numeric_gradient(program, 1.0, 300, seed=4, fd_eps=0.5, common_rng=True)
    assert all(s.value == pytest.approx(2.0 * 1.0 + 0.5, rel=1e-9) for s in samples)  # same b up and down


def test_score_baseline_centers_values():
    program = SmoothPlusBernoulli()
    plain = score_gradient(program, 0.5, 3000, seed=8, use_baseline=False)
    base = score_gradient(program, 0.5, 3000, seed=8, use_baseline=True)
    assert np.std([s.value for s in base]) < np.std([s.value for s in plain])
    assert all(s.method is Method.SCORE for s in plain)
    assert all(s.method is Method.SCORE_BASELINE for s in base)


def test_every_sample_carries_its_loss():
    program = SmoothPlusBernoulli()
    for method in ALL_FOUR:
        for s in gradient_samples(method, program, 0.5, 64, seed=1):
            assert "loss" in s.aux and math.isfinite(s.aux["loss"])


def test_primal_losses_match_program_values():
    program = SmoothPlusBernoulli()
    losses = primal_losses(program, 0.5, 100, seed=12)
    assert len(losses) == 100
    assert all(l in (pytest.approx(0.25), pytest.approx(1.25)) for l in losses)


def test_results_identical_across_thread_counts():
    program = SmoothPlusBernoulli()
    for method in ALL_FOUR:
        one = [s.value for s in gradient_samples(method, program, 0.6, 600, seed=3, threads=1)]
        four = [s.value for s in gradient_samples(method, program, 0.6, 600, seed=3, threads=4)]
        assert one == four
