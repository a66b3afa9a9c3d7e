import pytest, math

import numpy as np

import rslab.gauss as gauss
from rslab import PreconditionError
from rslab.gauss import A_BOUND, a_constant_scan, gauss_sum, normalized_modulus


def brute_force(a: int, q: int, k: int) -> complex:
    return complex(sum(np.exp(2j * np.pi * (a * pow(t, k, q) % q) / q) for t in range(q)))


@pytest.mark.parametrize(
    "a, q, k, expected",
    [(1, 8, 3, 4), (2, 27, 3, 9), (1, 1, 5, 1), (3, 9, 2, 3 * math.sqrt(3) * 1j)],
)
def test_prime_power_identities(a, q, k, expected):
    assert abs(gauss_sum(a, q, k).value - expected) < 1e-9


@pytest.mark.parametrize("q", [3, 5, 7, 9, 15, 21, 6, 10, 14, 4, 8, 12, 16, 20])
def test_quadratic_pattern(q):
    modulus = gauss_sum(1, q, 2).modulus
    if q % 2:
        expected = math.sqrt(q)
    elif q % 4 == 2:
        expected = 0.0
    else:
        expected = math.sqrt(2 * q)
    assert abs(modulus - expected) < 1e-9


def test_quadratic_pattern_for_every_residue():
    for q in range(2, 201):
        expected = math.sqrt(q) if q % 2 else 0.0 if q % 4 == 2 else math.sqrt(2 * q)
        for a in range(1, q):
            if math.gcd(a, q) == 1:
                assert abs(gauss_sum(a, q, 2).modulus - expected) < 1e-9, f"{a}/{q}"


@pytest.mark.parametrize("k", [2, 3, 4])
def test_conjugation(k):
    for q in range(2, 61):
        for a in range(1, q):
            assert abs(gauss_sum(q - a, q, k).value - gauss_sum(a, q, k).value.conjugate()) < 1e-9


@pytest.mark.parametrize("k", [2, 3])
def test_multiplicativity_over_coprime_moduli(k):
    for q1 in range(2, 18):
        for q2 in range(q1 + 1, 300 // q1 + 1):
            if math.gcd(q1, q2) != 1:
                continue
            q = q1 * q2
            for a in range(1, q, max(1, q // 7)):
                a1, a2 = a * pow(q2, -1, q1) % q1, a * pow(q1, -1, q2) % q2
                product = gauss_sum(a1, q1, k).value * gauss_sum(a2, q2, k).value
                assert abs(gauss_sum(a, q, k).value - product) < 1e-8, f"{a}/{q} = {a1}/{q1} * {a2}/{q2}"

@pytest.mark.parametrize("a, q, k", [(1, 12, 3), (5, 35, 4), (7, 64, 3), (-3, 50, 2), (11, 97, 6)])
def test_matches_brute_force(a, q, k):
    record = gauss_sum(a, q, k)
    assert record.a == a % q
    assert abs(record.value - brute_force(a, q, k)) < 1e-9
    assert record.normalized == pytest.approx(record.modulus * q ** (1 / k - 1))


@pytest.mark.parametrize("a", [1, 11, 13, 6, 2520])
@pytest.mark.parametrize("k", [2, 3, 4])
def test_multiplicativity(a, k, monkeypatch):
    q = 2**3 * 3**2 * 5 * 7
    direct = gauss._direct_sum(a % q, q, k)
    monkeypatch.setattr(gauss, "DIRECT_LIMIT", 10)
    assert abs(gauss_sum(a, q, k).value - direct) < 1e-8


def test_prime_with_coprime_power_vanishes():
    # 5 does not divide 1000002 = p - 1
    assert gauss._prime_power_sum(5, 1_000_003, 1, 5) == 0


def test_prime_power_above_limit_is_rejected(monkeypatch):
    monkeypatch.setattr(gauss, "DIRECT_LIMIT", 10)
    with pytest.raises(PreconditionError):
        gauss_sum(1, 13 * 11, 2)


@pytest.mark.parametrize("a, q, k", [(1, 0, 3), (1, -4, 3), (1, 5, 1)])
def test_invalid_arguments(a, q, k):
    with pytest.raises(ValueError):
        gauss_sum(a, q, k)


def test_normalized_modulus_requires_coprime():
    with pytest.raises(PreconditionError, match="gcd"):
        normalized_modulus(2, 4, 2)
    assert normalized_modulus(1, 4, 2) == pytest.approx(math.sqrt(2))


def test_quadratic_constant():
    result = a_constant_scan(2, 100)
    assert abs(result.value - math.sqrt(2)) < 1e-9
    assert result.argmax_q % 4 == 0
    assert sorted(result.per_q_max) == list(range(2, 101))
    assert all(value <= math.sqrt(2) + 1e-9 for value in result.per_q_max.values())


def test_scan_is_independent_of_parallelism():
    serial = a_constant_scan(3, 40, parallelism=1)
    parallel = a_constant_scan(3, 40, parallelism=2)
    assert serial == parallel


@pytest.mark.slow
def test_quadratic_constant_up_to_200():
    assert a_constant_scan(2, 200, parallelism=4).value <= math.sqrt(2) + 1e-9


@pytest.mark.slow
@pytest.mark.parametrize("k", [3, 4, 5, 6])
def test_scan_respects_bound(k):
    assert a_constant_scan(k, 200, parallelism=4).value <= A_BOUND + 1e-6
