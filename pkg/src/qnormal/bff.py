"""Block friendly families, the range set R(W) and W-good trend diagnostics.

The growth conditions of a W-good sequence are asymptotic (omega / little-o).
From a finite prefix we can only report the three ratios and test whether
they move the right way; :func:`check_w_good` labels its verdict as trend
evidence, never as proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .blocks import BlockLike, ChampernowneBlock
from .errors import BFFInvariantError, DegenerateSchedule, KOutOfRange, QNormalError, Unfeasible
from .weightings import DEFAULT_BUDGET, UniformWeighting, Weighting, check_normality, is_pb_uniform


def ln(x) -> float:
    """Natural log of a positive int or Fraction of any size; -inf at 0."""
    if x == 0:
        return float("-inf")
    if x < 0:
        raise ValueError(f"log of negative value {x}")
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


@dataclass(frozen=True)
class BFFTerm:
    i: int
    l: int
    b: int
    p: int
    eps: Fraction
    k: int
    mu: Weighting


class BFFSpec:
    """The 6-tuple sequence (l_i, b_i, p_i, eps_i, k_i, mu_i), given by rules.

    ``k_limit`` declares lim k_i: an int K, or ``None`` for infinity.  It
    cannot be inferred from a finite prefix.
    """

    def __init__(self, l: Callable[[int], int], b: Callable[[int], int], p: Callable[[int], int],
                 eps: Callable[[int], Fraction], k: Callable[[int], int],
                 mu: Callable[[int], Weighting], k_limit: int | None = None, name: str = "custom"):
        self.l = lru_cache(maxsize=None)(l)
        self.b = lru_cache(maxsize=None)(b)
        self.p = lru_cache(maxsize=None)(p)
        self.eps = lru_cache(maxsize=None)(lambda i: Fraction(eps(i)))
        self.k = lru_cache(maxsize=None)(k)
        self.mu = lru_cache(maxsize=None)(mu)
        self.k_limit = k_limit
        self.name = name

    def __repr__(self) -> str:
        return f"BFFSpec({self.name})"

    def at(self, i: int) -> BFFTerm:
        return BFFTerm(i, self.l(i), self.b(i), self.p(i), self.eps(i), self.k(i), self.mu(i))

    def validate(self, i_max: int, depth: int = 2, budget: int = DEFAULT_BUDGET) -> None:
        """Check every defining constraint on indices 1..i_max.

        Raises :class:`BFFInvariantError` naming the first bad index.
        """
        prev = None
        for i in range(1, i_max + 1):
            t = self.at(i)
            if t.b < 2:
                raise BFFInvariantError(f"b_{i} = {t.b} < 2", i, "b")
            if not 1 <= t.p <= t.b:
                raise BFFInvariantError(f"p_{i} = {t.p} not in [1, b_{i}={t.b}]", i, "p")
            if t.l < 0:
                raise BFFInvariantError(f"l_{i} = {t.l} is negative", i, "l")
            if t.k < 1:
                raise BFFInvariantError(f"k_{i} = {t.k} < 1", i, "k")
            if not 0 < t.eps < 1:
                raise BFFInvariantError(f"eps_{i} = {t.eps} not in (0, 1)", i, "eps")
            if self.k_limit is not None and t.k > self.k_limit:
                raise BFFInvariantError(f"k_{i} = {t.k} exceeds declared limit {self.k_limit}", i, "k")
            if prev is not None:
                for name in ("l", "b", "p", "k"):
                    if getattr(t, name) < getattr(prev, name):
                        raise BFFInvariantError(f"{name}_{i} < {name}_{i - 1}: sequence decreases", i, name)
                if not t.eps < prev.eps:
                    raise BFFInvariantError(f"eps_{i} = {t.eps} is not below eps_{i - 1} = {prev.eps}", i, "eps")
            try:
                uniform_ok = is_pb_uniform(t.mu, t.p, t.b, depth, budget=budget)
            except Unfeasible:
                uniform_ok = is_pb_uniform(t.mu, t.p, t.b, 1, budget=budget)
            if not uniform_ok:
                raise BFFInvariantError(f"mu_{i} is not ({t.p},{t.b})-uniform", i, "mu")
            prev = t


class GoodSequence:
    """Blocks x_1, x_2, ... with closed-form lengths where available."""

    def __init__(self, x: Callable[[int], BlockLike], length: Callable[[int], int] | None = None,
                 name: str = "custom"):
        self.block = lru_cache(maxsize=None)(x)
        if length is None:
            length = lambda i: self.block(i).length  # noqa: E731
        self.length = lru_cache(maxsize=None)(length)
        self.name = name

    def __repr__(self) -> str:
        return f"GoodSequence({self.name})"

    def validate(self, W: BFFSpec, i_max: int, budget: int = DEFAULT_BUDGET) -> list[str]:
        """Check |x_i| non-decreasing and each x_i (eps_i, k_i, mu_i)-normal.

        Returns notes for indices whose normality could only be left
        unverified (beyond budget); raises on a definite violation.
        """
        notes = []
        prev_len = None
        for i in range(1, i_max + 1):
            n = self.length(i)
            if prev_len is not None and n < prev_len:
                raise BFFInvariantError(f"|x_{i}| = {n} < |x_{i - 1}| = {prev_len}", i, "x")
            prev_len = n
            ok = _normality_verdict(self.block(i), W.eps(i), W.k(i), W.mu(i), budget)
            if ok is None:
                notes.append(f"x_{i}: normality not verified (beyond budget)")
            elif not ok:
                raise BFFInvariantError(
                    f"x_{i} is not ({W.eps(i)}, {W.k(i)}, {W.mu(i)!r})-normal", i, "x")
        return notes


def _normality_verdict(x: BlockLike, eps: Fraction, k: int, mu: Weighting, budget: int) -> bool | None:
    if (isinstance(x, ChampernowneBlock) and isinstance(mu, UniformWeighting)
            and mu.b == x.base and k <= x.width):
        for m in range(1, k + 1):
            lo, hi = x.count_range(m)
            expected = x.width * x.base ** (x.width - m)
            if not (expected * (1 - eps) <= lo and hi <= expected * (1 + eps)):
                return False
        return True
    try:
        return check_normality(x, eps, k, mu, budget=budget).passed
    except Unfeasible:
        return None


@dataclass(frozen=True)
class RangeSet:
    """R(W): {0, ..., K} when lim k_i = K is finite, else all naturals."""

    limit: int | None

    @property
    def finite(self) -> bool:
        return self.limit is not None

    def __contains__(self, k) -> bool:
        return isinstance(k, int) and k >= 0 and (self.limit is None or k <= self.limit)

    def __repr__(self) -> str:
        return f"{{0,...,{self.limit}}}" if self.finite else "{0,1,2,...}"


def range_set(W: BFFSpec) -> RangeSet:
    return RangeSet(W.k_limit)


def _strict_trend(values: Sequence[float], increasing: bool) -> bool:
    pairs = list(zip(values, values[1:]))
    if not pairs:
        return False
    return all((b > a) if increasing else (b < a) for a, b in pairs)


def tail_half(values: Sequence) -> list:
    """The last half of a prefix (the larger half when the length is odd), at least two values."""
    values = list(values)
    return values[max(0, min(len(values) // 2, len(values) - 2)):]


@dataclass
class WGoodReport:
    """Log-domain ratios for the three W-good growth conditions.

    ``log_r1``: |x_i| (eps_{i-1} - eps_i) / b_i^k, should grow without bound.
    ``log_r2``: (l_{i-1}/l_i)(|x_{i-1}|/|x_i|) i b_i^k, should tend to 0.
    ``log_r3``: (1/l_i)(|x_{i+1}|/|x_i|) b_i^k, should tend to 0.
    """

    k: int
    i_max: int
    log_r1: dict[int, float] = field(default_factory=dict)
    log_r2: dict[int, float] = field(default_factory=dict)
    log_r3: dict[int, float] = field(default_factory=dict)
    trends: dict[str, bool] = field(default_factory=dict)
    note: str = "trend evidence over a finite prefix, not a proof"

    @property
    def passed(self) -> bool:
        return all(self.trends.values())

    def rows(self) -> list[tuple[int, float | None, float | None, float | None]]:
        idx = sorted(set(self.log_r1) | set(self.log_r2) | set(self.log_r3))
        return [(i, self.log_r1.get(i), self.log_r2.get(i), self.log_r3.get(i)) for i in idx]


def check_w_good(W: BFFSpec, X: GoodSequence, i_max: int, k: int) -> WGoodReport:
    """Evaluate the three growth ratios for i <= i_max and test their tail trends.

    Ratios r1 and r3 start at i = 2, r2 at i = 3, so a vanishing
    l_1 never enters a denominator.  A verdict requires strict monotonicity
    in the limit direction over the last half of each evaluated prefix.
    """
    if i_max < 3:
        raise QNormalError("i_max must be >= 3")
    if k not in range_set(W):
        raise KOutOfRange(f"k={k} is not in R(W) = {range_set(W)}")
    rep = WGoodReport(k, i_max)
    for i in range(2, i_max + 1):
        gap = W.eps(i - 1) - W.eps(i)
        if gap == 0:
            raise DegenerateSchedule(f"eps_{i - 1} == eps_{i}: r1 divides by zero")
        if W.l(i) == 0:
            raise DegenerateSchedule(f"l_{i} = 0: r2 and r3 divide by zero")
        b_k = W.b(i) ** k
        xi = X.length(i)
        rep.log_r1[i] = ln(xi) + ln(gap) - ln(b_k)
        rep.log_r3[i] = ln(X.length(i + 1)) + ln(b_k) - ln(W.l(i)) - ln(xi)
        if i >= 3:
            rep.log_r2[i] = (ln(W.l(i - 1)) + ln(X.length(i - 1)) + math.log(i) + ln(b_k)
                             - ln(W.l(i)) - ln(xi))
    rep.trends = {
        "r1": _strict_trend(tail_half([rep.log_r1[i] for i in sorted(rep.log_r1)]), True),
        "r2": _strict_trend(tail_half([rep.log_r2[i] for i in sorted(rep.log_r2)]), False),
        "r3": _strict_trend(tail_half([rep.log_r3[i] for i in sorted(rep.log_r3)]), False),
    }
    return rep
