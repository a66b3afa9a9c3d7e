"""Mean oscillation of F_k: the block functional S({a_n}), the ceiling-gap inequality,
Monte-Carlo oscillation on intervals and the John-Nirenberg tail experiment on I_{p/q}."""

import logging, math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from joblib import Parallel, delayed
from sympy import integer_nthroot

from .contfrac import ConvergentInterval, cf_expand_rational, draw_point, interval_of_convergent, refine_interval
from .gauss import A_BOUND
from .series import riemann_value, surrogate_sum
from .utils import PreconditionError, fit_slope

logger = logging.getLogger(__name__)

supported_evaluators: list[str] = ["truncation", "surrogate"]
# Prime modulus for points of the dyadic oscillation scan; stays on the int64 path.
DYADIC_MODULUS = 2**31 - 1
MAX_REDRAWS = 1000


@dataclass(frozen=True)
class BlockFunctionalResult:
    k: int
    m: int
    N: int
    J_cut: int
    block_sum: float
    lower_bound: float | None


@dataclass
class TailHistogram:
    interval: ConvergentInterval
    J_sub: tuple[int, ...] | None
    k: int
    q: int
    lambdas: np.ndarray
    empirical: np.ndarray
    theorem2_rate: float
    theorem2_curve: np.ndarray
    classic_jn_curve: np.ndarray
    samples: int
    truncation_N: int
    seed: int
    A_ref: float
    mean: complex = 0j
    oscillation: float = 0.0
    fitted_slope: float = float("nan")
    metadata: dict = field(default_factory=dict)


def J_value(k: int, m: int, N: int) -> float:
    """J(k, m, N) = ((N / 2k)^{k/(k-1)} - m) / N."""
    return ((N / (2 * k)) ** (k / (k - 1)) - m) / N


def _ceil_root(value: int, k: int) -> int:
    root, exact = integer_nthroot(value, k)
    return int(root) if exact else int(root) + 1


def fefferman_blocks(k: int, m: int, N: int, n_max: int, J_cut: int | None = None) -> BlockFunctionalResult:
    """sum_{j >= 1} (sum_{jN <= l < (j+1)N} a_l)^2 with a_l = 1/n at l = n^k - m, n <= n_max.

    Blocks are taken literally: block j = 1 starts at l = N. Once consecutive l
    differ by at least N every block holds a single term, so the remaining n
    contribute 1/n^2 each and are summed as one vector.
    """
    if k < 2 or m < 0 or N < 1:
        raise ValueError(f"Expecting k >= 2, m >= 0, N >= 1. Got: {k=}, {m=}, {N=}")

    blocks: dict[int, float] = {}
    n = 1
    while n <= n_max and n**k - (n - 1) ** k < N:
        block = (n**k - m) // N if n**k >= m else -1
        if block >= 1 and (J_cut is None or block <= J_cut):
            blocks[block] = blocks.get(block, 0.0) + 1.0 / n
        n += 1
    block_sum = math.fsum(value * value for _, value in sorted(blocks.items()))
    last_block = max(blocks, default=0)

    while n <= n_max and n**k - m < N:
        n += 1
    n_hi = n_max
    if J_cut is not None:
        n_hi = min(n_hi, int(integer_nthroot((J_cut + 1) * N + m - 1, k)[0]))
    if n <= n_hi:
        tail = np.arange(n, n_hi + 1, dtype=float)
        block_sum += float(np.sum(1.0 / (tail * tail)))
        last_block = max(last_block, (n_hi**k - m) // N)

    J = J_value(k, m, N)
    lower = (1 / (8 * k * k)) * (1 / (1 + m / N) - 2 / J) if J > 2 else None
    return BlockFunctionalResult(k, m, N, last_block, block_sum, lower)


def fefferman_S(k: int, m: int, N_list, n_max: int, J_cut: int | None = None) -> float:
    """max over N of sqrt(block sum): a lower estimate of S({a_n})."""
    N_list = list(N_list)
    if not N_list:
        raise ValueError("Expecting at least one N")
    return max(math.sqrt(fefferman_blocks(k, m, N, n_max, J_cut).block_sum) for N in N_list)


def ceil_gap_check(k: int, m: int, N: int, j: int) -> bool:
    """ceil(((j+1)N+m)^{1/k}) - ceil((jN+m)^{1/k}) >= (((j+1)N+m)^{1/k} - (jN+m)^{1/k}) / 2."""
    J = J_value(k, m, N)
    if j < 1 or j + 1 > J:
        raise PreconditionError(f"j + 1 <= J(k,m,N) = {J:.6g} required (and j >= 1). Got: {j=}")
    upper, lower = (j + 1) * N + m, j * N + m
    gap = _ceil_root(upper, k) - _ceil_root(lower, k)
    return gap >= (upper ** (1 / k) - lower ** (1 / k)) / 2


def _oscillation(values) -> float:
    values = np.asarray(values)
    if values.size < 2:
        raise ValueError(f"Expecting at least 2 samples. Got: {values.size}")
    return float(np.mean(np.abs(values - values.mean())))


def interval_oscillation(samples) -> float:
    """Monte-Carlo ||h||_I = mean |h - h_I| over (x, h(x)) pairs."""
    return _oscillation([value for _, value in samples])


def oscillation_limsup_reference(k: int) -> float:
    """3 (12 pi)^{1/3} / k, the limit bound for ||F_k||_I as |I| -> 0."""
    return 3 * (12 * math.pi) ** (1 / 3) / k


def _evaluate(x, k: int, truncation_N: int, evaluator: str) -> complex:
    if evaluator == "surrogate":
        return surrogate_sum(x, k).total
    return riemann_value(x, k, truncation_N)


def _draw_and_evaluate(
    indices, base, interval, depth, max_quotient, seed, min_denominator, k, truncation_N, evaluator
) -> list[complex]:
    values = []
    for index in indices:
        rng = np.random.default_rng([seed, index])
        for _ in range(MAX_REDRAWS):
            point = draw_point(rng, base, interval, depth, max_quotient)
            if point.value.denominator >= min_denominator:
                break
            logger.debug(f"Sample {index}: redrawing {point} (denominator below {min_denominator})")
        else:
            raise PreconditionError(f"No sample with denominator >= {min_denominator} after {MAX_REDRAWS} draws")
        assert point.value in interval
        values.append(_evaluate(point, k, truncation_N, evaluator))
    return values


def jn_tail_experiment(
    p: int,
    q: int,
    k: int,
    lambda_grid,
    samples: int,
    truncation_N: int,
    seed: int,
    sub_interval=None,
    A_ref: float = A_BOUND,
    depth: int = 10,
    max_quotient: int = 100,
    jobs: int = 1,
    evaluator: str = "truncation",
    correction_C: float | None = None,
    two_sided: bool = True,
) -> TailHistogram:
    """Empirical |{x in J : |F_k(x) - (F_k)_J| > lambda}| / |J| on J = I_{p/q} (or I_b).

    Points extend either expansion of p/q (or of the refined fraction) by ``depth``
    Gauss-Kuzmin quotients, the branch picked in proportion to its length unless
    ``two_sided`` is False. Sample ``i`` uses substream ``[seed, i]``; rationals with
    denominator below 10 q are redrawn. (F_k)_J is the sample mean. The reference
    curve is e^{-lambda k q^{1/k} / A_ref} for k >= 3 and e^{-lambda sqrt(2q)} for k = 2.
    """
    if math.gcd(p, q) != 1:
        raise ValueError(f"Expecting gcd(p, q) = 1. Got: {p}/{q}")
    if k < 2:
        raise ValueError(f"Expecting k >= 2. Got: {k}")
    if samples < 2:
        raise ValueError(f"Expecting at least 2 samples. Got: {samples}")
    if evaluator not in supported_evaluators:
        raise ValueError(f"Unsupported evaluator: {evaluator}. Expecting: " + " ".join(supported_evaluators))
    if truncation_N < q * q:
        raise PreconditionError(
            f"truncation_N >= q^2 required (the Cesaro window needs m >= q^2). Got: {truncation_N} < {q * q}"
        )

    base = cf_expand_rational(p, q)
    interval = interval_of_convergent(p, q, two_sided)
    J_sub = None
    if sub_interval:
        J_sub = tuple(int(b) for b in sub_interval)
        interval = refine_interval(base, J_sub, two_sided)
        base = cf_expand_rational(interval.center.numerator, interval.center.denominator)

    logger.info(f"Sampling {samples} points of [{interval.lo}, {interval.hi}] with {jobs} job(s)...")
    chunks = np.array_split(np.arange(samples), max(1, jobs * 4))
    results = Parallel(n_jobs=jobs)(
        delayed(_draw_and_evaluate)(
            [int(i) for i in chunk], base, interval, depth, max_quotient, seed, 10 * q, k, truncation_N, evaluator
        )
        for chunk in chunks
        if chunk.size
    )
    values = np.array([value for chunk in results for value in chunk])

    mean = complex(values.mean())
    deviations = np.abs(values - mean)
    lambdas = np.asarray(lambda_grid, dtype=float)
    empirical = np.array([1.0 if lam <= 0 else float(np.mean(deviations > lam)) for lam in lambdas])
    assert np.all(np.diff(empirical) <= 0) and np.all((0 <= empirical) & (empirical <= 1))

    if k == 2:
        rate, exponent = math.sqrt(2 * q), 0.0
    else:
        rate = k * q ** (1 / k) / A_ref
        exponent = 0.0
        if correction_C is not None:
            exponent = correction_C * q ** (1 / k - 1 / (2**k * (k - 1))) * math.log(q)
    oscillation = float(np.mean(deviations))
    positive = empirical > 0
    slope = fit_slope(lambdas[positive], np.log(empirical[positive]))

    return TailHistogram(
        interval=interval,
        J_sub=J_sub,
        k=k,
        q=q,
        lambdas=lambdas,
        empirical=empirical,
        theorem2_rate=rate,
        theorem2_curve=np.exp(-rate * lambdas + exponent),
        classic_jn_curve=np.exp(-lambdas / oscillation) if oscillation > 0 else np.zeros_like(lambdas),
        samples=samples,
        truncation_N=truncation_N,
        seed=seed,
        A_ref=A_ref,
        mean=mean,
        oscillation=oscillation,
        fitted_slope=slope,
        metadata={
            "depth": depth,
            "max_quotient": max_quotient,
            "evaluator": evaluator,
            "correction_C": correction_C,
            "min_denominator": 10 * q,
            "two_sided": two_sided,
            "curve": "sqrt-2q" if k == 2 else "gauss-constant",
        },
    )


def bmo_norm_estimate(
    k: int,
    truncation_N: int,
    dyadic_depth: int,
    samples_per_interval: int,
    seed: int,
    h=None,
    jobs: int = 1,
) -> float:
    """max of the Monte-Carlo oscillation over dyadic intervals down to ``dyadic_depth``.

    Interval (level, index) draws its points r / (2^31 - 1) from substream
    ``[seed, level, index]``, so a deeper scan repeats every shallower interval
    exactly and never reports less. ``h`` replaces truncated F_k when given.
    """
    if dyadic_depth < 1:
        raise ValueError(f"Expecting dyadic_depth >= 1. Got: {dyadic_depth}")
    if samples_per_interval < 2:
        raise ValueError(f"Expecting at least 2 samples per interval. Got: {samples_per_interval}")
    cells = [(level, index) for level in range(dyadic_depth + 1) for index in range(2**level)]
    logger.info(f"Estimating the BMO norm over {len(cells)} dyadic intervals...")
    oscillations = Parallel(n_jobs=jobs)(
        delayed(_cell_oscillation)(level, index, k, truncation_N, samples_per_interval, seed, h)
        for level, index in cells
    )
    return max(oscillations)


def _cell_oscillation(level, index, k, truncation_N, samples_per_interval, seed, h) -> float:
    rng = np.random.default_rng([seed, level, index])
    lo = -(-index * DYADIC_MODULUS // 2**level)
    hi = (index + 1) * DYADIC_MODULUS // 2**level
    residues = rng.integers(lo, hi, size=samples_per_interval, endpoint=False)
    points = [Fraction(int(r), DYADIC_MODULUS) for r in residues]
    evaluate = h if h is not None else (lambda x: riemann_value(x, k, truncation_N))
    return _oscillation([evaluate(x) for x in points])
