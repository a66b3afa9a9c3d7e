import pytest
from fractions import Fraction
from math import gcd

import numpy as np

from rslab import PrecisionExhaustedError
from rslab.contfrac import (
    CFReal,
    alternate_expansion,
    approximation_bounds,
    best_rational_approx,
    cf_expand_rational,
    is_convergent,
    interval_of_convergent,
    parse_cf,
    refine_interval,
    sample_points,
)


def reduced_fractions(max_denominator: int):
    for s in range(2, max_denominator + 1):
        for r in range(1, s):
            if gcd(r, s) == 1:
                yield Fraction(r, s)


def random_rational(rng: np.random.Generator, depth: int, max_quotient: int) -> CFReal:
    body = [int(a) for a in rng.integers(1, max_quotient + 1, size=depth - 1)]
    last = int(rng.integers(2, max_quotient + 1))
    return CFReal(tuple(body) + (last,), is_prefix=False)


def test_cf_expand_rational():
    x = cf_expand_rational(5, 13)
    assert x.quotients == (2, 1, 1, 2)
    assert x.convergents == [(0, 1), (1, 2), (1, 3), (2, 5), (5, 13)]
    assert x.value == Fraction(5, 13)


@pytest.mark.parametrize("p, q", [(2, 4), (3, 2), (-1, 5), (0, 0)])
def test_cf_expand_rational_rejects(p, q):
    with pytest.raises(ValueError):
        cf_expand_rational(p, q)


@pytest.mark.parametrize(
    "text, quotients, a0, is_prefix",
    [
        ("0;2,2", (2, 2), 0, True),
        ("[1; 1, 2, 3]", (1, 2, 3), 1, True),
        ("1/3", (3,), 0, False),
        ("2/6", (3,), 0, False),
        ("7/5", (2, 2), 1, False),
    ],
)
def test_parse_cf(text, quotients, a0, is_prefix):
    x = parse_cf(text)
    assert (x.quotients, x.a0, x.is_prefix) == (quotients, a0, is_prefix)


@pytest.mark.parametrize("text", ["abc", "0;0,1", "1/0", ";1,2"])
def test_parse_cf_rejects(text):
    with pytest.raises(ValueError):
        parse_cf(text)


def test_exact_rational_must_be_canonical():
    with pytest.raises(ValueError):
        CFReal((2, 1), is_prefix=False)
    assert CFReal((2, 1), is_prefix=True).value == Fraction(1, 3)


@pytest.mark.parametrize(
    "p, q, lo, hi",
    [
        (1, 2, Fraction(1, 3), Fraction(2, 3)),
        (1, 3, Fraction(1, 4), Fraction(2, 5)),
        (0, 1, Fraction(0), Fraction(1)),
    ],
)
def test_interval_of_convergent(p, q, lo, hi):
    interval = interval_of_convergent(p, q)
    assert (interval.lo, interval.hi) == (lo, hi)
    assert interval.center == Fraction(p, q)


@pytest.mark.parametrize("p, q", [(1, 2), (1, 3), (2, 5), (3, 8), (5, 13), (4, 7)])
def test_interval_matches_convergent_enumeration(p, q):
    interval = interval_of_convergent(p, q)
    for x in reduced_fractions(200):
        assert is_convergent(p, q, x) == (x in interval), f"{p}/{q} against {x}"


def test_one_sided_interval_keeps_canonical_branch():
    interval = interval_of_convergent(1, 2, two_sided=False)
    assert (interval.lo, interval.hi) == (Fraction(1, 3), Fraction(1, 2))
    assert interval.branch_lengths == (Fraction(1, 6), Fraction(0))


@pytest.mark.parametrize("b", [(2,), (1, 3), (2, 3), (7, 1, 4)])
def test_refine_interval_is_nested(b):
    base = cf_expand_rational(1, 5)
    inner = refine_interval(base, b)
    assert interval_of_convergent(1, 5).contains_interval(inner)
    assert inner.length < interval_of_convergent(1, 5).length


@pytest.mark.parametrize("b", [(), (0,), (1,)])
def test_refine_interval_rejects(b):
    with pytest.raises(ValueError):
        refine_interval(cf_expand_rational(1, 5), b)


@pytest.mark.parametrize("mode", ["gauss-kuzmin", "grid"])
def test_sample_points_stay_inside(mode):
    base = cf_expand_rational(2, 7)
    interval = interval_of_convergent(2, 7)
    points = sample_points(interval, base, 50, 8, 40, seed=3, mode=mode)
    assert all(point.value in interval for point in points)


def test_sample_points_use_per_index_substreams():
    base = cf_expand_rational(1, 5)
    interval = interval_of_convergent(1, 5)
    full = sample_points(interval, base, 6, 10, 100, seed=11)
    single = sample_points(interval, base, 1, 10, 100, seed=11, start_index=4)
    assert single[0] == full[4]
    assert full == sample_points(interval, base, 6, 10, 100, seed=11)


@pytest.mark.parametrize("p, q", [(1, 5), (2, 7), (1, 2), (5, 13)])
def test_sample_points_cover_both_branches(p, q):
    interval = interval_of_convergent(p, q)
    center = Fraction(p, q)
    points = sample_points(interval, cf_expand_rational(p, q), 2000, 10, 100, seed=1)
    above = sum(point.value > center for point in points) / len(points)
    assert abs(above - float((interval.hi - center) / interval.length)) < 0.05
    assert all(point.value in interval for point in points)


def test_one_sided_samples_stay_on_canonical_branch():
    interval = interval_of_convergent(1, 5, two_sided=False)
    points = sample_points(interval, cf_expand_rational(1, 5), 500, 10, 100, seed=1)
    assert (interval.lo, interval.hi) == (Fraction(1, 6), Fraction(1, 5))
    assert all(point.value < Fraction(1, 5) for point in points)


def test_alternate_expansion():
    x = cf_expand_rational(5, 13)
    alternate = alternate_expansion(x)
    assert alternate.quotients == (2, 1, 1, 1, 1)
    assert alternate.value == x.value
    assert alternate_expansion(CFReal(())) is None


def test_determinant_identity():
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = random_rational(rng, int(rng.integers(2, 30)), 1000)
        convs = x.convergents
        for j in range(1, len(convs)):
            (p_prev, q_prev), (p_j, q_j) = convs[j - 1], convs[j]
            assert p_j * q_prev - p_prev * q_j == (-1) ** (j + 1)


def test_interval_length_bounds():
    for x in reduced_fractions(200):
        interval = interval_of_convergent(x.numerator, x.denominator)
        q = x.denominator
        assert Fraction(1, 2 * q * q) <= interval.length <= Fraction(2, q * q)
        assert interval.length == sum(interval.branch_lengths)
        assert interval.lo < x < interval.hi



def exhaustive_best(y: Fraction, M_max: int) -> tuple[int, int]:
    best = None
    for M in range(1, M_max + 1):
        floor = y.numerator * M // y.denominator
        for C in (floor, floor + 1):
            key = (abs(y - Fraction(C, M)), M)
            if best is None or key < best[0]:
                best = (key, C, M)
    return best[1], best[2]


def test_best_rational_approx_matches_exhaustive_search():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        y = random_rational(rng, int(rng.integers(2, 8)), 20)
        M_max = int(rng.integers(1, 500))
        approx = best_rational_approx(y, M_max)
        assert (approx.C, approx.M) == exhaustive_best(y.value, M_max)
        assert approx.beta == y.value - Fraction(approx.C, approx.M)


def test_best_rational_approx_needs_a_long_enough_prefix():
    with pytest.raises(PrecisionExhaustedError):
        best_rational_approx(parse_cf("0;2,2"), 100)
    assert best_rational_approx(parse_cf("2/5"), 100).beta == 0


def test_khinchin_sandwich():
    rng = np.random.default_rng(7)
    for _ in range(100):
        x = random_rational(rng, int(rng.integers(3, 12)), 50)
        rows = approximation_bounds(x)
        assert len(rows) == x.depth - 1
        for j, lower, error, upper in rows:
            assert lower < error < upper, f"j={j} for {x}"
