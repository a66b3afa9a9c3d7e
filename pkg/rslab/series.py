"""Weyl sums S_n(x), partial sums of F_k(x) = sum e(n^k x)/n, their Cesaro form,
the convergent-driven surrogate series and the checks built on them."""

import logging, math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np
from numpy.polynomial.legendre import leggauss

from .contfrac import CFReal
from .gauss import A_BOUND, DIRECT_LIMIT, GaussSumRecord, gauss_sum
from .numeric import power_exps
from .utils import DirectLimitError, PrecisionExhaustedError, PreconditionError, QuadratureError, fit_slope

logger = logging.getLogger(__name__)

DEFAULT_TAU = 2.0
# Longest Cesaro window summed directly.
MAX_TERMS = 50_000_000
TRUNCATION_NOTE = "surrogate partial sum up to N holds the terms with q_{i+1}^tau <= N"

_GL_NODES, _GL_WEIGHTS = leggauss(20)
_MAX_PANELS = 4_000_000
_PANEL_CHUNK = 1 << 16


@dataclass
class PartialSumTrace:
    x: CFReal | Fraction
    k: int
    N: int
    checkpoints: list[int]
    values: list[complex]


@dataclass(frozen=True)
class SurrogateTerm:
    j: int
    p: int
    q: int
    record: GaussSumRecord
    value: complex
    bound: float


@dataclass
class SurrogateTrace:
    terms: list[SurrogateTerm] = field(default_factory=list)
    partial_sums: list[complex] = field(default_factory=list)
    truncated_at_q: int | None = None

    @property
    def total(self) -> complex:
        return self.partial_sums[-1] if self.partial_sums else 0j


@dataclass(frozen=True)
class Prop2Result:
    cesaro: complex
    main: complex
    residual: complex
    window: tuple[float, float]


class Verdict(Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    INCONCLUSIVE = "inconclusive"


@dataclass
class VerdictResult:
    verdict: Verdict
    evidence: dict


def as_fraction(x: CFReal | Fraction | int) -> Fraction:
    return x.value if isinstance(x, CFReal) else Fraction(x)


def log_plus(log_y: float) -> float:
    """ln+ y = max(ln y, 0), given ln y."""
    return max(log_y, 0.0)


def _terms(x: CFReal | Fraction | int, k: int, n: int) -> np.ndarray:
    """e(l^k x) for l = 1..n."""
    value = as_fraction(x)
    return power_exps(np.arange(1, n + 1), k, value.numerator, value.denominator)


def weyl_partial_sums(x: CFReal | Fraction | int, k: int, n: int) -> np.ndarray:
    """Running S_1, ..., S_n."""
    if n < 1:
        raise ValueError(f"Expecting n >= 1. Got: {n}")
    return np.cumsum(_terms(x, k, n))


def weyl_partial_sum(x: CFReal | Fraction | int, k: int, n: int) -> complex:
    if n < 1:
        raise ValueError(f"Expecting n >= 1. Got: {n}")
    total = complex(np.sum(_terms(x, k, n)))
    assert abs(total) <= n * (1 + 1e-12)
    return total


def riemann_partial_sum(x: CFReal | Fraction | int, k: int, N: int, checkpoints=None) -> PartialSumTrace:
    """sum_{n <= c} e(n^k x)/n at every checkpoint c (defaults to N alone)."""
    if N < 1:
        raise ValueError(f"Expecting N >= 1. Got: {N}")
    checkpoints = sorted(set(int(c) for c in checkpoints)) if checkpoints else [N]
    if checkpoints[0] < 1 or checkpoints[-1] > N:
        raise ValueError(f"Checkpoints must lie in [1, {N}]. Got: {checkpoints}")
    running = np.cumsum(_terms(x, k, N) / np.arange(1, N + 1))
    return PartialSumTrace(x, k, N, checkpoints, [complex(running[c - 1]) for c in checkpoints])


def riemann_value(x: CFReal | Fraction | int, k: int, N: int) -> complex:
    """sum_{n <= N} e(n^k x)/n as a single value."""
    if N < 1:
        raise ValueError(f"Expecting N >= 1. Got: {N}")
    return complex(np.sum(_terms(x, k, N) / np.arange(1, N + 1)))


def cesaro_form_sum(x: CFReal | Fraction | int, k: int, m: int, N: int) -> complex:
    """sum_{m <= n < N} S_n(x) / (n(n+1)) with a running S_n."""
    if not 1 <= m < N:
        raise ValueError(f"Expecting 1 <= m < N. Got: {m=}, {N=}")
    if N > MAX_TERMS:
        raise PreconditionError(f"Cesaro window up to N = {N} exceeds {MAX_TERMS} terms")
    sums = weyl_partial_sums(x, k, N - 1)[m - 1 :]
    n = np.arange(m, N, dtype=float)
    return complex(np.sum(sums / (n * (n + 1.0))))


def _surrogate_term(convs, j: int, k: int) -> SurrogateTerm:
    p_j, q_j = convs[j]
    record = gauss_sum(p_j % q_j, q_j, k)
    log_ratio = math.log(convs[j + 1][1]) - math.log(q_j)
    value = record.value / (k * q_j) * log_ratio
    bound = A_BOUND * q_j ** (-1.0 / k) * log_ratio / k
    if abs(value) > bound * (1 + 1e-9):
        logger.warning(f"Surrogate term {j} ({abs(value)}) exceeds the A(k) bound {bound}")
    return SurrogateTerm(j, p_j, q_j, record, value, bound)


def surrogate_sum(x: CFReal, k: int, j_start: int = 1, max_q: int | None = None) -> SurrogateTrace:
    """Terms xi_{p_j/q_j} / (k q_j) * ln(q_{j+1}/q_j) for j = j_start .. J-1.

    The last convergent has no successor and contributes nothing. The trace stops
    before the first q_j above ``max_q`` or whose Gauss sum has a prime-power
    component beyond the direct limit; ``truncated_at_q`` then names that q_j.
    """
    convs = x.convergents
    trace = SurrogateTrace()
    running = 0j
    for j in range(j_start, len(convs) - 1):
        if max_q is not None and convs[j][1] > max_q:
            trace.truncated_at_q = convs[j][1]
            break
        try:
            term = _surrogate_term(convs, j, k)
        except DirectLimitError as error:
            logger.info(f"Surrogate trace of {x} stops at term {j}: {error}")
            trace.truncated_at_q = convs[j][1]
            break
        running += term.value
        trace.terms.append(term)
        trace.partial_sums.append(running)
    return trace


def _tau_power(q: int, tau: float) -> float:
    return float(q**int(tau)) if float(tau).is_integer() else q**tau


def prop2_decomposition(x: CFReal, k: int, i: int, m: int, tau: float = DEFAULT_TAU) -> Prop2Result:
    """Cesaro window sum over [m, q_{i+1}^tau) against xi_{p_i/q_i}/(k q_i) ln+(q_i q_{i+1} / m^k)."""
    if tau < 2:
        raise ValueError(f"Expecting tau >= 2. Got: {tau}")
    convs = x.convergents
    if not 0 <= i < len(convs) - 1:
        raise PrecisionExhaustedError(f"Convergent index {i} needs a successor; prefix {x} has {x.depth} quotients")
    p_i, q_i = convs[i]
    q_next = convs[i + 1][1]
    lower, upper = _tau_power(q_i, tau), _tau_power(q_next, tau)
    if not lower <= m < upper:
        raise PreconditionError(f"q_i^τ ≤ m < q_{{i+1}}^τ violated: need {lower:g} <= m < {upper:g}, got m = {m}")

    cesaro = cesaro_form_sum(x, k, m, math.ceil(upper))
    record = gauss_sum(p_i % q_i, q_i, k)
    main = record.value / (k * q_i) * log_plus(math.log(q_i) + math.log(q_next) - k * math.log(m))
    return Prop2Result(cesaro, main, cesaro - main, (lower, upper))


def prop2_residual(x: CFReal, k: int, i: int, m: int, tau: float = DEFAULT_TAU) -> complex:
    return prop2_decomposition(x, k, i, m, tau).residual


def oscillatory_integral_check(
    m: float, N: float, beta: Fraction | float, k: int, rel_tol: float = 1e-8
) -> tuple[complex, float, float]:
    """int_m^N e(y^k beta)/y dy against (1/k) ln+(|beta|^{-1} m^{-k}).

    Composite 20-point Gauss-Legendre panels no wider than a quarter of the local
    period at their right endpoint (nor than their left endpoint, for the 1/y
    factor); panels are halved until their two-level estimates agree to ``rel_tol``
    of the summed panel magnitudes.
    """
    beta = float(beta)
    if beta == 0:
        raise ValueError("Expecting beta != 0")
    if not 1 <= m <= N:
        raise ValueError(f"Expecting 1 <= m <= N. Got: {m=}, {N=}")
    main = log_plus(-math.log(abs(beta)) - k * math.log(m)) / k
    if N == m:
        return 0j, main, main

    def frequency(y: float) -> float:
        return k * y ** (k - 1) * abs(beta)

    edges = [float(m)]
    y = float(m)
    while y < N:
        width = min(0.25 / frequency(y), y, N - y)
        width = min(width, 0.25 / frequency(y + width))
        y = float(N) if y + width >= N * (1 - 1e-12) else y + width
        edges.append(y)
        if len(edges) > _MAX_PANELS:
            raise QuadratureError(f"More than {_MAX_PANELS} panels needed on [{m}, {N}]", float("nan"))
    edges = np.asarray(edges)

    def panel_integrals(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        result = np.empty(a.size, dtype=complex)
        for start in range(0, a.size, _PANEL_CHUNK):
            lo, hi = a[start : start + _PANEL_CHUNK], b[start : start + _PANEL_CHUNK]
            mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
            ys = mid[:, None] + half[:, None] * _GL_NODES[None, :]
            values = np.exp(2j * np.pi * beta * ys**k) / ys
            result[start : start + _PANEL_CHUNK] = half * (values @ _GL_WEIGHTS)
        return result

    left, right = edges[:-1], edges[1:]
    settled = 0j
    settled_mass = 0.0
    span = float(N - m)
    achieved = float("inf")
    for refinement in range(40):
        mid = (left + right) / 2.0
        coarse = panel_integrals(left, right)
        fine = panel_integrals(left, mid) + panel_integrals(mid, right)
        mass = max(settled_mass + float(np.abs(fine).sum()), 1e-300)
        allowance = rel_tol * mass * (right - left) / span
        error = np.abs(fine - coarse)
        done = error <= allowance
        settled += fine[done].sum()
        settled_mass += float(np.abs(fine[done]).sum())
        achieved = float(error.sum() / mass)
        logger.debug(f"Quadrature pass {refinement}: {int((~done).sum())} of {done.size} panels refined")
        if done.all():
            integral = complex(settled)
            return integral, main, abs(integral - main)
        left, right = np.concatenate([left[~done], mid[~done]]), np.concatenate([mid[~done], right[~done]])
        if left.size > _MAX_PANELS:
            break
    raise QuadratureError(f"Quadrature on [{m}, {N}] did not reach relative tolerance {rel_tol}", achieved)


def rational_divergence_test(a: int, q: int, k: int) -> bool:
    """F_k diverges at a/q iff sum_{n=1}^q e(a n^k / q) != 0 (the t = 0 and t = q terms coincide)."""
    if math.gcd(a, q) != 1:
        raise PreconditionError(f"gcd(a, q) = 1 required. Got: gcd({a}, {q}) = {math.gcd(a, q)}")
    return gauss_sum(a, q, k).modulus > 1e-9


def convergence_verdict(
    x: CFReal, k: int, budget: int = DIRECT_LIMIT, tolerance: float = 0.5
) -> VerdictResult:
    """Decides convergence of F_k at x.

    Exact rationals go through :func:`rational_divergence_test`. Prefixes run a
    Cauchy analysis of the surrogate over convergents with q_j <= ``budget``: the
    A(k) term bounds of the last half are fitted by a geometric decay, whose
    extrapolated tail plus the observed movement of the partial sums must stay
    within ``tolerance``.
    """
    if not x.is_prefix:
        value = x.value
        a, q = value.numerator % value.denominator, value.denominator
        diverges = rational_divergence_test(a, q, k)
        evidence = {"a": a, "q": q, "gauss_sum_modulus": gauss_sum(a, q, k).modulus}
        return VerdictResult(Verdict.DIVERGES if diverges else Verdict.CONVERGES, evidence)

    trace = surrogate_sum(x, k, max_q=budget)
    evidence: dict = {
        "terms_used": len(trace.terms),
        "truncated_at_q": trace.truncated_at_q,
        "tolerance": tolerance,
        "pairing": TRUNCATION_NOTE,
    }
    if len(trace.terms) < 4:
        logger.info(f"Only {len(trace.terms)} surrogate terms within budget {budget}")
        return VerdictResult(Verdict.INCONCLUSIVE, evidence)

    half = len(trace.terms) // 2
    tail_terms = trace.terms[half:]
    js = [term.j for term in tail_terms]
    slope = fit_slope(js, [math.log(term.bound) for term in tail_terms])
    sums = np.asarray(trace.partial_sums[half:])
    movement = float(np.max(np.abs(sums[-1] - sums)))
    mean_term = float(np.mean([abs(term.value) for term in tail_terms]))
    evidence.update({"bound_slope": slope, "movement": movement, "mean_term": mean_term})

    if slope < 0:
        ratio = math.exp(slope)
        tail = tail_terms[-1].bound * ratio / (1 - ratio)
        evidence["tail_estimate"] = tail
        if tail + movement <= tolerance:
            return VerdictResult(Verdict.CONVERGES, evidence)
    elif mean_term > tolerance:
        return VerdictResult(Verdict.DIVERGES, evidence)
    return VerdictResult(Verdict.INCONCLUSIVE, evidence)


def theorem1_gap(x: CFReal, k: int, N_list, tau: float = DEFAULT_TAU) -> list[tuple[int, complex, complex, float]]:
    """(N, F_N(x), surrogate partial sum, |gap|) for each N, the surrogate truncated at q_{i+1}^tau <= N."""
    N_list = sorted(int(N) for N in N_list)
    trace = riemann_partial_sum(x, k, N_list[-1], N_list)
    convs = x.convergents
    terms = []
    for j in range(1, len(convs) - 1):
        if _tau_power(convs[j + 1][1], tau) > N_list[-1]:
            break
        terms.append((_tau_power(convs[j + 1][1], tau), _surrogate_term(convs, j, k).value))

    rows = []
    for N, F_N in zip(trace.checkpoints, trace.values):
        partial = sum((value for cutoff, value in terms if cutoff <= N), 0j)
        rows.append((N, F_N, partial, abs(F_N - partial)))
    return rows


def major_arc_gap(x: CFReal, k: int, i: int, n: int) -> float:
    """|S_n(x) - (xi_{p_i/q_i}/q_i) sum_{l<=n} e(l^k beta)| with beta = x - p_i/q_i.

    At most 8 q_i when |beta| <= n^-k.
    """
    p_i, q_i = x.convergents[i]
    beta = x.value - Fraction(p_i, q_i)
    xi = gauss_sum(p_i % q_i, q_i, k).value
    major = xi / q_i * complex(np.sum(_terms(beta, k, n)))
    return abs(weyl_partial_sum(x, k, n) - major)
