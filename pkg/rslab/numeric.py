"""Exact phases and unit-circle exponentials.

Phases ``n^k * p / q`` are reduced modulo 1 with integer arithmetic only; floating
point first appears in the final ``cos``/``sin`` call. ``fractions.Fraction`` is
the big rational throughout the package, values on the unit circle are plain
``complex``.
"""

import logging, math
from fractions import Fraction
from functools import lru_cache

import numpy as np

logger = logging.getLogger(__name__)

# Largest modulus whose residues can be multiplied in int64 without overflow.
INT64_SAFE_MODULUS = 3_037_000_499
UNIT_TOLERANCE = 1e-12

BigRational = Fraction


def reduce_phase(phase: Fraction | int) -> Fraction:
    """Canonical representative of ``phase`` in [0, 1)."""
    phase = Fraction(phase)
    return Fraction(phase.numerator % phase.denominator, phase.denominator)


def unit_exp(phase: Fraction | int) -> complex:
    """e(phase) = exp(2 pi i phase), exact on the quarter-turn grid."""
    theta = reduce_phase(phase)
    quarter = (4 * theta.numerator) // theta.denominator
    rest = theta - Fraction(quarter, 4)
    angle = 2.0 * math.pi * float(rest)
    c, s = (1.0, 0.0) if rest == 0 else (math.cos(angle), math.sin(angle))
    if quarter == 0:
        value = complex(c, s)
    elif quarter == 1:
        value = complex(-s, c)
    elif quarter == 2:
        value = complex(-c, -s)
    else:
        value = complex(s, -c)
    assert abs(value.real**2 + value.imag**2 - 1.0) <= UNIT_TOLERANCE
    return value


def power_phase(n: int, k: int, p: int, q: int) -> Fraction:
    """((n^k * p) mod q) / q without ever forming n^k as a float."""
    if q < 1:
        raise ValueError(f"Expecting q >= 1. Got: {q}")
    if k < 1:
        raise ValueError(f"Expecting k >= 1. Got: {k}")
    return Fraction(pow(n, k, q) * p % q, q)


def power_residues(ns, k: int, p: int, q: int) -> np.ndarray:
    """Residues ``(n^k * p) mod q`` for every n in ``ns``.

    Moduli up to :data:`INT64_SAFE_MODULUS` run in int64; larger moduli fall back
    to object arrays of Python integers, which stay exact at any size.
    """
    if q < 1:
        raise ValueError(f"Expecting q >= 1. Got: {q}")
    p_mod = p % q
    if q <= INT64_SAFE_MODULUS:
        base = np.asarray(ns, dtype=np.int64) % q
        acc = base.copy()
        for _ in range(k - 1):
            acc = (acc * base) % q
        return (acc * p_mod) % q
    logger.debug(f"Modulus {q} exceeds the int64 range, using exact object arithmetic")
    return np.array([pow(int(n), k, q) * p_mod % q for n in ns], dtype=object)


def residue_exps(residues: np.ndarray, q: int) -> np.ndarray:
    """e(r / q) for an array of residues r in [0, q)."""
    if residues.dtype == object:
        theta = np.array([int(r) / q for r in residues], dtype=float)
    else:
        theta = residues.astype(float) / q
    return np.exp(2j * np.pi * theta)


def power_exps(ns, k: int, p: int, q: int) -> np.ndarray:
    """e(n^k * p / q) for every n in ``ns``."""
    return residue_exps(power_residues(ns, k, p, q), q)


@lru_cache(maxsize=64)
def roots_of_unity(q: int) -> np.ndarray:
    """Table of e(r / q), r = 0..q-1, built with :func:`unit_exp` accuracy on the quarter grid."""
    table = np.exp(2j * np.pi * (np.arange(q, dtype=float) / q))
    for quarter in range(4):
        if (quarter * q) % 4 == 0:
            r = quarter * q // 4
            table[r] = unit_exp(Fraction(r, q))
    table.setflags(write=False)
    return table
