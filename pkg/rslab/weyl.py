"""Three-case rational-approximation classifier for Weyl sums of l^k x and the matching bound shapes.

The classifier is applied to y = k! x with n = k: the estimates are stated for
phases f(l) y / n! with f monic of degree n, and l^k x = (l^k) (k! x) / k!.
Unknown constants are set to 1, so every bound reported here is a *shape*.
"""

import logging, math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from sympy import integer_nthroot

from .contfrac import CFReal, RationalApprox, best_rational_approx
from .series import weyl_partial_sums

logger = logging.getLogger(__name__)


class WeylCase(Enum):
    A = "A"
    B = "B"
    C = "C"


@dataclass(frozen=True)
class WeylClassification:
    case: WeylCase
    approx: RationalApprox | None
    P: int
    epsilon: float
    k: int
    delta: float | None
    bound_shape: float


@dataclass(frozen=True)
class WeylRow:
    P: int
    case: WeylCase
    modulus: float
    bound_shape: float
    ratio: float
    normalized: float


def exact_epsilon(epsilon: float | Fraction | str) -> Fraction:
    """The rational behind a decimal epsilon, e.g. 0.25 -> 1/4 and 0.3 -> 3/10."""
    value = Fraction(str(epsilon)) if isinstance(epsilon, float) else Fraction(epsilon)
    if not 0 < value < 1:
        raise ValueError(f"Expecting 0 < epsilon < 1. Got: {epsilon}")
    return value


def _at_most_power(value: Fraction, P: int, eps: Fraction) -> bool:
    """value <= P^eps, decided with integer powers."""
    return value ** eps.denominator <= Fraction(P) ** eps.numerator


def bound_shape(c: WeylClassification) -> float:
    n, P, eps = c.k, float(c.P), c.epsilon
    if c.case == WeylCase.A:
        return P ** (1 - eps / 2**n)
    M = c.approx.M
    if c.case == WeylCase.C:
        return P / M ** (1 / (2**n * (n - 1)))
    beta = abs(float(c.approx.beta))
    minor = P ** (1 - eps / 2 ** (n - 1))
    major = (
        P ** (1 - (n - eps) / (2 ** (n - 1) * (n - 1)))
        * beta ** (-1 / (2 ** (n - 1) * (n - 1)))
        * M ** (-1 / (2**n * (n - 1)))
    )
    return minor + major


def classify_point(x: CFReal, k: int, P: int, epsilon: float | Fraction | str) -> WeylClassification:
    """Case A, B or C for y = k! x, decided by the best approximation C/M with M <= P^eps.

    A: even the best C/M has |beta| > P^{eps-1}. C: |beta| <= P^{eps-k}.
    B: P^{eps-k} < |beta| <= P^{eps-1}.
    """
    if P < 2:
        raise ValueError(f"Expecting P >= 2. Got: {P}")
    if k < 2:
        raise ValueError(f"Expecting k >= 2. Got: {k}")
    eps = exact_epsilon(epsilon)
    y = CFReal.from_fraction(math.factorial(k) * x.value, is_prefix=x.is_prefix)
    M_max = int(integer_nthroot(P**eps.numerator, eps.denominator)[0])
    approx = best_rational_approx(y, M_max)
    beta = abs(approx.beta)
    logger.debug(f"Best approximation of {k}! x with M <= {M_max}: {approx.C}/{approx.M}, |beta| = {float(beta):.3e}")

    if not _at_most_power(beta * P, P, eps):
        case, kept = WeylCase.A, None
    elif _at_most_power(beta * Fraction(P) ** k, P, eps):
        case, kept = WeylCase.C, approx
    else:
        case, kept = WeylCase.B, approx

    delta = None
    if kept is not None and approx.M >= 2 and beta != 0:
        log_beta = math.log(beta.numerator) - math.log(beta.denominator)
        delta = k / (1 - log_beta / math.log(approx.M))

    partial = WeylClassification(case, kept, P, float(eps), k, delta, float("nan"))
    return WeylClassification(case, kept, P, float(eps), k, delta, bound_shape(partial))


def empirical_vs_bound(x: CFReal, k: int, P_list, epsilon: float | Fraction | str) -> list[WeylRow]:
    """|S_P(x)| next to the case-dependent bound shape, one row per P (sorted by P)."""
    P_list = [int(P) for P in P_list]
    if not P_list or any(b <= a for a, b in zip(P_list, P_list[1:])):
        raise ValueError(f"Expecting a nonempty increasing list of P. Got: {P_list}")
    sums = weyl_partial_sums(x, k, P_list[-1])
    rows = []
    for P in P_list:
        classification = classify_point(x, k, P, epsilon)
        modulus = float(abs(sums[P - 1]))
        assert modulus <= P * (1 + 1e-12)
        shape = classification.bound_shape
        rows.append(WeylRow(P, classification.case, modulus, shape, modulus / shape, modulus / P))
    return rows
