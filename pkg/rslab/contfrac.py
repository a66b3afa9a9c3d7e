"""Continued fractions, the convergent intervals I_{p/q} and best rational approximation.

An irrational point is only ever known through a finite prefix of its partial
quotients; every claim made here is a claim about the exact rational value of that
prefix. Operations that would need more quotients than the prefix holds raise
:class:`~rslab.utils.PrecisionExhaustedError`.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd

import numpy as np

from .utils import PrecisionExhaustedError

logger = logging.getLogger(__name__)

supported_sampling_modes: list[str] = ["gauss-kuzmin", "grid"]


@dataclass(frozen=True)
class CFReal:
    """x = [a0; a1, ..., aJ].

    ``is_prefix`` marks a truncated expansion of an irrational number; exact
    rationals carry ``is_prefix=False`` and are stored in canonical form.
    """

    quotients: tuple[int, ...]
    a0: int = 0
    is_prefix: bool = True

    def __post_init__(self):
        object.__setattr__(self, "quotients", tuple(int(a) for a in self.quotients))
        for a in self.quotients:
            if a < 1:
                raise ValueError(f"Partial quotients must be positive. Got: {list(self.quotients)}")
        if not self.is_prefix and self.quotients and self.quotients[-1] == 1:
            raise ValueError(f"Rational expansions must end in a quotient >= 2. Got: {self}")

    @classmethod
    def from_fraction(cls, value: Fraction | int, is_prefix: bool = False) -> "CFReal":
        value = Fraction(value)
        if value < 0:
            raise ValueError(f"Expecting a nonnegative value. Got: {value}")
        a0, rest = divmod(value.numerator, value.denominator)
        return cls(tuple(_euclid(rest, value.denominator)), a0=a0, is_prefix=is_prefix)

    @cached_property
    def convergents(self) -> list[tuple[int, int]]:
        return convergents(self)

    @property
    def value(self) -> Fraction:
        p, q = self.convergents[-1]
        return Fraction(p, q)

    @property
    def depth(self) -> int:
        return len(self.quotients)

    def extend(self, tail) -> "CFReal":
        return CFReal(self.quotients + tuple(tail), a0=self.a0, is_prefix=True)

    def __str__(self) -> str:
        return f"{self.a0};" + ",".join(str(a) for a in self.quotients)


@dataclass(frozen=True)
class ConvergentInterval:
    lo: Fraction
    hi: Fraction
    center: Fraction
    branch_lengths: tuple[Fraction, Fraction]

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def contains_interval(self, other: "ConvergentInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


@dataclass(frozen=True)
class RationalApprox:
    C: int
    M: int
    beta: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        assert gcd(self.C, self.M) == 1 and self.M > 0


def _euclid(p: int, q: int) -> list[int]:
    quotients = []
    while p:
        a, r = divmod(q, p)
        quotients.append(a)
        q, p = p, r
    return quotients


def cf_expand_rational(p: int, q: int) -> CFReal:
    """Canonical expansion of p/q in [0, 1)."""
    if q < 1 or not 0 <= p < q:
        raise ValueError(f"Expecting 0 <= p < q. Got: {p}/{q}")
    if gcd(p, q) != 1:
        raise ValueError(f"Expecting a reduced fraction. Got: {p}/{q} (gcd {gcd(p, q)})")
    return CFReal(tuple(_euclid(p, q)), is_prefix=False)


def convergents(x: CFReal) -> list[tuple[int, int]]:
    """[(p_0, q_0), ..., (p_J, q_J)] from the recurrence seeded by (1, 0) and (a0, 1)."""
    p_prev, q_prev = 1, 0
    p, q = x.a0, 1
    result = [(p, q)]
    for a in x.quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        result.append((p, q))
    return result


def parse_cf(text: str) -> CFReal:
    """Accepts ``"a0;a1,a2,..."`` (a prefix) or ``"p/q"`` (an exact rational)."""
    text = text.strip().strip("[]").replace(" ", "")
    if "/" in text:
        num, den = text.split("/", 1)
        if int(den) < 1:
            raise ValueError(f"Expecting a positive denominator. Got: {text}")
        return CFReal.from_fraction(Fraction(int(num), int(den)))
    head, _, tail = text.partition(";")
    if not head:
        raise ValueError(f"Expecting a continued fraction literal such as 0;2,2. Got: {text}")
    quotients = tuple(int(a) for a in tail.split(",") if a) if tail else ()
    return CFReal(quotients, a0=int(head), is_prefix=True)


def alternate_expansion(x: CFReal) -> CFReal | None:
    """[..., a_J - 1, 1], the second expansion of a rational whose last quotient is >= 2."""
    if not x.quotients or x.quotients[-1] < 2:
        return None
    *head, last = x.quotients
    return CFReal(tuple(head) + (last - 1, 1), a0=x.a0)


def _alternate_convergents(x: CFReal) -> list[tuple[int, int]]:
    """Convergents of the second expansion of a rational."""
    alternate = alternate_expansion(x)
    return alternate.convergents if alternate is not None else x.convergents


def is_convergent(p: int, q: int, x: Fraction) -> bool:
    """Whether p/q is a convergent of x under either expansion of x."""
    expansion = CFReal.from_fraction(x)
    return (p, q) in expansion.convergents or (p, q) in _alternate_convergents(expansion)


def interval_of_convergent(p: int, q: int, two_sided: bool = True) -> ConvergentInterval:
    """Closure of {x in (0, 1) : p/q is a convergent of x}.

    The canonical branch [..., a_J] spans p/q to the mediant (p + p')/(q + q'); the
    branch [..., a_J - 1, 1] spans p/q to (2p - p')/(2q - q'). ``two_sided=False``
    keeps only the canonical branch.
    """
    if (p, q) == (0, 1):
        return ConvergentInterval(Fraction(0), Fraction(1), Fraction(0), (Fraction(0), Fraction(1)))
    if not 0 < p < q or gcd(p, q) != 1:
        raise ValueError(f"Expecting a reduced p/q with 0 < p < q, or 0/1. Got: {p}/{q}")

    p_prev, q_prev = cf_expand_rational(p, q).convergents[-2]
    center = Fraction(p, q)
    canonical_end = Fraction(p + p_prev, q + q_prev)
    alternate_end = Fraction(2 * p - p_prev, 2 * q - q_prev)
    lengths = (Fraction(1, q * (q + q_prev)), Fraction(1, q * (2 * q - q_prev)))
    ends = [center, canonical_end, alternate_end] if two_sided else [center, canonical_end]
    return ConvergentInterval(min(ends), max(ends), center, lengths if two_sided else (lengths[0], Fraction(0)))


def refine_interval(base: CFReal, b, two_sided: bool = True) -> ConvergentInterval:
    """I_b: the interval of [0; a_1, ..., a_j0, b_1, ..., b_d], nested inside I_{p/q}."""
    b = tuple(int(item) for item in b)
    if not b or min(b) < 1:
        raise ValueError(f"Expecting a nonempty tail of positive integers. Got: {list(b)}")
    if base.a0 != 0 or (base.quotients and base.quotients[-1] < 2):
        raise ValueError(f"Expecting a canonical base [0; a_1, ..., a_j0] with a_j0 >= 2. Got: {base}")
    if b == (1,):
        raise ValueError(f"Tail (1,) merges into the base quotient ([{base},1] is not a refinement)")

    refined = CFReal(base.quotients + b).value
    base_value = base.value
    outer = interval_of_convergent(base_value.numerator, base_value.denominator, two_sided)
    inner = interval_of_convergent(refined.numerator, refined.denominator, two_sided)
    assert outer.contains_interval(inner), f"I_b for {list(b)} escapes the base interval"
    return inner


@lru_cache(maxsize=32)
def gauss_kuzmin_weights(max_quotient: int, minimum: int = 1) -> np.ndarray:
    """P(a = j) = log2(1 + 1/(j(j+2))), restricted to minimum <= j <= max_quotient and renormalised."""
    j = np.arange(minimum, max_quotient + 1, dtype=float)
    weights = np.log2(1.0 + 1.0 / (j * (j + 2.0)))
    weights /= weights.sum()
    weights.setflags(write=False)
    return weights


def draw_tail(rng: np.random.Generator, depth: int, max_quotient: int) -> tuple[int, ...]:
    """Gauss-Kuzmin quotients; the last one is conditioned on >= 2 to stay canonical."""
    body = rng.choice(np.arange(1, max_quotient + 1), size=depth - 1, p=gauss_kuzmin_weights(max_quotient))
    last = rng.choice(np.arange(2, max_quotient + 1), p=gauss_kuzmin_weights(max_quotient, 2))
    return tuple(int(a) for a in body) + (int(last),)


def draw_point(
    rng: np.random.Generator, base: CFReal, interval: ConvergentInterval, depth: int, max_quotient: int
) -> CFReal:
    """``base`` extended by a Gauss-Kuzmin tail on one branch of ``interval``.

    The branch [..., a_J - 1, 1] is picked with probability proportional to its
    length, so both sides of p/q are covered; a one-sided interval has a zero
    second branch and always extends ``base`` itself.
    """
    canonical_length, alternate_length = interval.branch_lengths
    alternate = alternate_expansion(base)
    if alternate is not None and alternate_length > 0:
        if rng.random() < float(alternate_length / (canonical_length + alternate_length)):
            base = alternate
    return base.extend(draw_tail(rng, depth, max_quotient))


def sample_points(
    interval: ConvergentInterval,
    base: CFReal,
    count: int,
    depth: int,
    max_quotient: int,
    seed: int,
    mode: str = "gauss-kuzmin",
    start_index: int = 0,
) -> list[CFReal]:
    """Points of ``interval``: ``base`` or its second expansion, extended by ``depth`` random quotients.

    Sample ``i`` is drawn from its own substream ``default_rng([seed, i])`` so any
    subset of indices reproduces independently of ``count``. ``mode="grid"`` returns
    the midpoints of ``count`` equal cells of the interval instead.
    """
    if count < 1 or depth < 1:
        raise ValueError(f"Expecting count >= 1 and depth >= 1. Got: {count=}, {depth=}")
    if max_quotient < 2:
        raise ValueError(f"Expecting max_quotient >= 2. Got: {max_quotient}")
    if mode not in supported_sampling_modes:
        raise ValueError(f"Unsupported sampling mode: {mode}. Expecting: " + " ".join(supported_sampling_modes))

    points: list[CFReal] = []
    for index in range(start_index, start_index + count):
        if mode == "grid":
            offset = Fraction(2 * (index - start_index) + 1, 2 * count)
            point = CFReal.from_fraction(interval.lo + offset * interval.length, is_prefix=True)
        else:
            rng = np.random.default_rng([seed, index])
            point = draw_point(rng, base, interval, depth, max_quotient)
        assert point.value in interval, f"Sample {point} escapes [{interval.lo}, {interval.hi}]"
        points.append(point)
    return points


def best_rational_approx(y: CFReal, M_max: int) -> RationalApprox:
    """Closest C/M to y with M <= M_max among convergents and semiconvergents; ties go to the smaller M."""
    if M_max < 1:
        raise ValueError(f"Expecting M_max >= 1. Got: {M_max}")
    convs = y.convergents
    if y.is_prefix and convs[-1][1] <= M_max:
        raise PrecisionExhaustedError(
            f"Precision exhausted: prefix {y} has final denominator {convs[-1][1]} <= M_max = {M_max}"
        )

    value = y.value
    j = max(index for index, (_, q) in enumerate(convs) if q <= M_max)
    p_j, q_j = convs[j]
    if j == len(convs) - 1:
        return RationalApprox(p_j, q_j, value - Fraction(p_j, q_j))

    p_prev, q_prev = convs[j - 1] if j > 0 else (1, 0)
    t = (M_max - q_prev) // q_j
    best = (p_j, q_j)
    semi = (t * p_j + p_prev, t * q_j + q_prev)
    if semi[1] > 0:
        d_best = abs(value - Fraction(*best))
        d_semi = abs(value - Fraction(*semi))
        if d_semi < d_best or (d_semi == d_best and semi[1] < best[1]):
            best = semi
    return RationalApprox(best[0], best[1], value - Fraction(*best))


def approximation_bounds(x: CFReal) -> list[tuple[int, Fraction, Fraction, Fraction]]:
    """(j, 1/(2 q_j q_{j+1}), |x - p_j/q_j|, 1/(q_j q_{j+1})) for every interior j (j + 1 < J)."""
    convs = x.convergents
    value = x.value
    rows = []
    for j in range(len(convs) - 2):
        p_j, q_j = convs[j]
        q_next = convs[j + 1][1]
        rows.append((j, Fraction(1, 2 * q_j * q_next), abs(value - Fraction(p_j, q_j)), Fraction(1, q_j * q_next)))
    return rows
