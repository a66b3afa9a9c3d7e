"""Complete Gauss sums xi^k_{a/q} = sum_{t=0}^{q-1} e(a t^k / q) and the A(k) scan."""

import logging, math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sympy import factorint

from .numeric import power_residues, residue_exps, roots_of_unity
from .utils import DirectLimitError, PreconditionError

logger = logging.getLogger(__name__)

# Upper bound for A(k), valid for every k >= 2.
A_BOUND = 4.709236
# Prime powers above this are not summed term by term.
DIRECT_LIMIT = 20_000_000
_CHUNK = 1 << 22
TABLE_LIMIT = 1 << 16


@dataclass(frozen=True)
class GaussSumRecord:
    a: int
    q: int
    k: int
    value: complex
    modulus: float
    normalized: float


@dataclass
class AScanResult:
    """A_{<=Q}(k): a lower bound for A(k), never an estimate of the supremum."""

    k: int
    Q_max: int
    value: float
    argmax_a: int
    argmax_q: int
    per_q_max: dict[int, float] = field(default_factory=dict)


def _direct_sum(a: int, q: int, k: int) -> complex:
    """Residue-count histogram: c_r = #{t : a t^k = r mod q}, then sum c_r e(r/q)."""
    counts = np.zeros(q, dtype=np.int64)
    for start in range(0, q, _CHUNK):
        residues = power_residues(np.arange(start, min(q, start + _CHUNK)), k, a, q)
        counts += np.bincount(residues.astype(np.int64), minlength=q)
    if q <= TABLE_LIMIT:
        return complex(np.dot(counts.astype(float), roots_of_unity(q)))
    hit = np.flatnonzero(counts)
    return complex(np.dot(counts[hit].astype(float), residue_exps(hit, q)))


def _prime_power_sum(a: int, prime: int, exponent: int, k: int) -> complex:
    q = prime**exponent
    if a % q == 0:
        return complex(q, 0.0)
    if exponent == 1 and a % prime != 0 and math.gcd(k, prime - 1) == 1:
        # t -> t^k permutes Z/p, so the sum runs over a full set of residues
        return 0j
    if q > DIRECT_LIMIT:
        raise DirectLimitError(
            f"Gauss sum component modulo {prime}^{exponent} exceeds the direct limit {DIRECT_LIMIT}"
        )
    return _direct_sum(a % q, q, k)


def _gauss_value(a: int, q: int, k: int) -> complex:
    """Multiplicative over coprime factors: for q = q1 q2, xi_{a/q} = xi_{a1/q1} xi_{a2/q2} with
    a1 = a q2^{-1} mod q1 and a2 = a q1^{-1} mod q2."""
    if q <= DIRECT_LIMIT:
        return _direct_sum(a % q, q, k)
    value = 1 + 0j
    for prime, exponent in sorted(factorint(q).items()):
        q_i = prime**exponent
        rest = q // q_i
        a_i = a * pow(rest, -1, q_i) % q_i
        value *= _prime_power_sum(a_i, prime, exponent, k)
        if value == 0:
            break
    return value


def gauss_sum(a: int, q: int, k: int) -> GaussSumRecord:
    """xi^k_{a/q} with its modulus and normalized modulus |xi| q^{1/k - 1}."""
    if q < 1:
        raise ValueError(f"Expecting q >= 1. Got: {q}")
    if k < 2:
        raise ValueError(f"Expecting k >= 2. Got: {k}")
    a %= q
    value = _gauss_value(a, q, k)
    modulus = abs(value)
    return GaussSumRecord(a, q, k, value, modulus, modulus * q ** (1.0 / k - 1.0))


def normalized_modulus(a: int, q: int, k: int) -> float:
    if q < 2:
        raise ValueError(f"Expecting q >= 2. Got: {q}")
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"gcd(a, q) = 1 required for A(k). Got: gcd({a}, {q}) = {math.gcd(a, q)}")
    return gauss_sum(a, q, k).normalized


def _scan_q(q: int, k: int) -> tuple[int, float, int]:
    best, best_a = -1.0, 0
    for a in range(1, q // 2 + 1):
        if math.gcd(a, q) != 1:
            continue
        value = gauss_sum(a, q, k).normalized
        if value > best:
            best, best_a = value, a
    return q, best, best_a


def a_constant_scan(k: int, Q_max: int, parallelism: int = 1) -> AScanResult:
    """max over 2 <= q <= Q_max and coprime 1 <= a <= q/2 of |xi^k_{a/q}| q^{1/k - 1}.

    Conjugation symmetry |xi_{(q-a)/q}| = |xi_{a/q}| halves the a-range. Workers
    return per-q maxima, which are reduced in increasing q order, so the result is
    identical for every ``parallelism``.
    """
    if Q_max < 2:
        raise ValueError(f"Expecting Q_max >= 2. Got: {Q_max}")
    logger.info(f"Scanning A({k}) over q <= {Q_max} with {parallelism} job(s)...")
    rows = Parallel(n_jobs=parallelism)(delayed(_scan_q)(q, k) for q in range(2, Q_max + 1))

    result = AScanResult(k=k, Q_max=Q_max, value=-1.0, argmax_a=0, argmax_q=0)
    for q, best, best_a in rows:
        logger.debug(f"q={q}: max normalized modulus {best:.12f} at a={best_a}")
        result.per_q_max[q] = best
        if best > result.value:
            result.value, result.argmax_a, result.argmax_q = best, best_a, q
    if result.value > A_BOUND + 1e-6:
        logger.warning(f"A_<={Q_max}({k}) = {result.value} exceeds the bound {A_BOUND}")
    return result
