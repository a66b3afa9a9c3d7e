import pytest, math

import numpy as np

from rslab import PreconditionError
from rslab.bmo import (
    J_value,
    bmo_norm_estimate,
    ceil_gap_check,
    fefferman_blocks,
    fefferman_S,
    interval_oscillation,
    jn_tail_experiment,
    oscillation_limsup_reference,
)


def brute_force_blocks(k: int, m: int, N: int, n_max: int, J_cut: int | None = None) -> float:
    blocks: dict[int, float] = {}
    for n in range(1, n_max + 1):
        l = n**k - m
        if l < N:
            continue
        j = l // N
        if J_cut is None or j <= J_cut:
            blocks[j] = blocks.get(j, 0.0) + 1.0 / n
    return math.fsum(value * value for value in blocks.values())


def test_fefferman_blocks_single_terms():
    result = fefferman_blocks(2, 0, 1, 100)
    assert result.block_sum == pytest.approx(math.fsum(1 / n**2 for n in range(1, 101)), rel=1e-12)
    assert result.lower_bound is None


@pytest.mark.parametrize(
    "k, m, N, n_max, J_cut",
    [
        (2, 0, 10, 10, None),
        (2, 0, 10, 500, None),
        (3, 7, 50, 300, None),
        (2, 5, 100, 2000, 30),
        (4, 0, 1000, 200, None),
        (5, 100, 10, 50, 1000),
    ],
)
def test_fefferman_blocks_match_brute_force(k, m, N, n_max, J_cut):
    result = fefferman_blocks(k, m, N, n_max, J_cut)
    assert result.block_sum == pytest.approx(brute_force_blocks(k, m, N, n_max, J_cut), rel=1e-10)


def test_fefferman_blocks_skip_low_blocks():
    # every l = n^2 - 10^6 with n <= 1000 is negative
    assert fefferman_blocks(2, 10**6, 10, 1000).block_sum == 0


def test_fefferman_blocks_grow_with_J_cut():
    sums = [fefferman_blocks(3, 10, 100, 5000, J_cut).block_sum for J_cut in range(1, 40)]
    assert all(a <= b for a, b in zip(sums, sums[1:]))


@pytest.mark.parametrize("k, m, N", [(1, 0, 10), (2, -1, 10), (2, 0, 0)])
def test_fefferman_blocks_rejects(k, m, N):
    with pytest.raises(ValueError):
        fefferman_blocks(k, m, N, 10)


def test_fefferman_S():
    assert fefferman_S(3, 0, [1000], 10_000) == pytest.approx(math.sqrt(fefferman_blocks(3, 0, 1000, 10_000).block_sum))
    assert fefferman_S(2, 0, [10, 10_000], 10**6) >= 1 / (math.sqrt(8) * 2) * 0.99
    with pytest.raises(ValueError):
        fefferman_S(2, 0, [], 10)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("m", [0, 10])
def test_fefferman_chain(k, m):
    result = fefferman_blocks(k, m, 10**4, 10**7)
    if J_value(k, m, 10**4) > 2:
        assert result.lower_bound is not None
        assert result.block_sum >= result.lower_bound
    else:
        assert result.lower_bound is None


def test_ceil_gap_check():
    assert ceil_gap_check(2, 0, 100, 1)
    J = J_value(3, 5, 1000)
    assert ceil_gap_check(3, 5, 1000, math.floor(J) - 1)
    with pytest.raises(PreconditionError, match="J"):
        ceil_gap_check(2, 0, 100, 10)


def test_ceil_gap_check_random_tuples():
    rng = np.random.default_rng(21)
    checked = 0
    while checked < 1000:
        k = int(rng.integers(2, 6))
        m = int(rng.integers(0, 101))
        N = int(rng.integers(10, 100_001))
        J = J_value(k, m, N)
        if J < 3:
            continue
        j = int(rng.integers(1, math.floor(J)))
        assert ceil_gap_check(k, m, N, j), (k, m, N, j)
        checked += 1


@pytest.mark.parametrize(
    "values, expected",
    [([2.5] * 10, 0.0), ([1, -1] * 5, 1.0), ([1j, -1j, 1j, -1j], 1.0)],
)
def test_interval_oscillation(values, expected):
    assert interval_oscillation([(i, value) for i, value in enumerate(values)]) == pytest.approx(expected)


def test_interval_oscillation_needs_two_samples():
    with pytest.raises(ValueError):
        interval_oscillation([(0.5, 1.0)])


def test_oscillation_limsup_reference():
    assert oscillation_limsup_reference(3) == pytest.approx((12 * math.pi) ** (1 / 3))


def test_bmo_norm_estimate_of_constant_is_zero():
    assert bmo_norm_estimate(3, 100, 3, 4, seed=1, h=lambda x: 2.0) == 0


def test_bmo_norm_estimate_grows_with_depth():
    shallow = bmo_norm_estimate(3, 200, 1, 8, seed=4)
    deep = bmo_norm_estimate(3, 200, 2, 8, seed=4)
    assert 0 < shallow <= deep


@pytest.mark.slow
def test_bmo_norm_estimate_scales_like_inverse_k():
    scaled = [k * bmo_norm_estimate(k, 10**4, 8, 16, seed=1, jobs=4) for k in (2, 3, 4)]
    assert min(scaled) > 0
    assert max(scaled) < 4 * min(scaled)


def test_bmo_norm_estimate_rejects():
    with pytest.raises(ValueError):
        bmo_norm_estimate(3, 100, 0, 4, seed=1)


LAMBDAS = np.linspace(0.0, 2.0, 21)


def test_jn_tail_histogram_shape():
    histogram = jn_tail_experiment(1, 5, 3, LAMBDAS, 200, 25, seed=1)
    assert histogram.empirical[0] == 1
    assert np.all(np.diff(histogram.empirical) <= 0)
    assert np.all((histogram.empirical >= 0) & (histogram.empirical <= 1))
    assert histogram.theorem2_rate == pytest.approx(3 * 5 ** (1 / 3) / 4.709236)
    assert histogram.theorem2_curve[0] == 1
    assert histogram.metadata["min_denominator"] == 50

    beyond = jn_tail_experiment(1, 5, 3, [0.0, 1e6], 200, 25, seed=1)
    assert list(beyond.empirical) == [1.0, 0.0]


def test_jn_tail_is_deterministic_across_jobs():
    serial = jn_tail_experiment(2, 7, 3, LAMBDAS, 120, 49, seed=3, jobs=1)
    parallel = jn_tail_experiment(2, 7, 3, LAMBDAS, 120, 49, seed=3, jobs=2)
    assert np.array_equal(serial.empirical, parallel.empirical)
    assert serial.mean == parallel.mean


def test_jn_tail_sub_interval():
    histogram = jn_tail_experiment(1, 5, 3, LAMBDAS, 50, 25, seed=2, sub_interval=[2, 3])
    assert histogram.J_sub == (2, 3)
    assert histogram.interval.length < 1 / 30


def test_jn_tail_samples_both_sides():
    both = jn_tail_experiment(1, 5, 3, LAMBDAS, 50, 25, seed=2)
    canonical = jn_tail_experiment(1, 5, 3, LAMBDAS, 50, 25, seed=2, two_sided=False)
    assert both.metadata["two_sided"] and not canonical.metadata["two_sided"]
    assert float(both.interval.hi) == pytest.approx(2 / 9)
    assert float(canonical.interval.hi) == pytest.approx(1 / 5)


def test_jn_tail_quadratic_curve():
    histogram = jn_tail_experiment(1, 4, 2, LAMBDAS, 50, 16, seed=2)
    assert histogram.theorem2_rate == pytest.approx(math.sqrt(8))
    assert histogram.metadata["curve"] == "sqrt-2q"


def test_jn_tail_surrogate_evaluator():
    histogram = jn_tail_experiment(1, 5, 3, LAMBDAS, 30, 25, seed=5, depth=4, max_quotient=6, evaluator="surrogate")
    assert histogram.empirical[0] == 1


@pytest.mark.parametrize(
    "p, q, k, N, error",
    [(1, 5, 3, 24, PreconditionError), (2, 4, 3, 16, ValueError), (1, 5, 1, 25, ValueError)],
)
def test_jn_tail_rejects(p, q, k, N, error):
    with pytest.raises(error):
        jn_tail_experiment(p, q, k, LAMBDAS, 10, N, seed=1)


@pytest.mark.slow
def test_jn_tail_decay():
    lambdas = np.linspace(0.0, 1.0, 21)
    histogram = jn_tail_experiment(1, 5, 3, lambdas, 10_000, 10**5, seed=1, jobs=4)
    assert histogram.fitted_slope <= -1
    doubled = jn_tail_experiment(1, 5, 3, lambdas, 20_000, 10**5, seed=1, jobs=4)
    assert np.all(np.abs(doubled.empirical - histogram.empirical) < 3 / math.sqrt(10_000))
