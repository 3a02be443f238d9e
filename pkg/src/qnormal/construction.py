"""The constructed number: x = l_1 x_1 l_2 x_2 ... read as a Q-Cantor expansion.

Index convention used throughout: for a position n >= 1 the *middle* index
``i`` is the largest index with L_i <= n and ``m = n - L_i``, so the first n
digits are ``l_1 x_1 ... l_i x_i`` followed by ``m`` digits of copies of
``x_{i+1}``, with ``m = alpha |x_{i+1}| + beta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .bff import BFFSpec, GoodSequence, range_set
from .blocks import Block, ChampernowneBlock, ConcatSchedule, count_in_schedule
from .cantor import PartialSum, ScheduleQ, q_partial_sum
from .errors import BadScale, BFFInvariantError, DegenerateSchedule, OutOfRange, QNormalError
from .weightings import DEFAULT_BUDGET, uniform

MAX_TERMS = 10**6


@dataclass(frozen=True)
class PrefixDecomposition:
    n: int
    i: int
    m: int
    alpha: int
    beta: int


class Construction:
    """A BFF plus a good sequence, evaluated lazily.

    Rules are defined for every index; ``i_cap`` only bounds the digit
    positions that may be read: positions up to L_{i_cap + 1}, so that every
    quantity at n <= L_{i_cap} can look ahead into x_{i_cap + 1}.
    """

    def __init__(self, bff: BFFSpec, good: GoodSequence, i_cap: int, name: str = "custom",
                 canonical: bool = False):
        if i_cap < 1:
            raise QNormalError("i_cap must be >= 1")
        self.bff = bff
        self.good = good
        self.i_cap = i_cap
        self.name = name
        self.canonical = canonical
        self._L = [0]
        self._Q = ScheduleQ(lambda i: (self.bff.l(i) * self.good.length(i), self.bff.b(i)))
        self._qsums: dict = {}

    def __repr__(self) -> str:
        tag = "canonical" if self.canonical else "non-canonical"
        return f"Construction({self.name}, i_cap={self.i_cap}, {tag})"

    def l(self, i: int) -> int:
        return self.bff.l(i)

    def b(self, i: int) -> int:
        return self.bff.b(i)

    def p(self, i: int) -> int:
        return self.bff.p(i)

    def eps(self, i: int) -> Fraction:
        return self.bff.eps(i)

    def k(self, i: int) -> int:
        return self.bff.k(i)

    def x(self, i: int):
        return self.good.block(i)

    def x_len(self, i: int) -> int:
        return self.good.length(i)

    def L(self, i: int) -> int:
        if i < 0:
            raise OutOfRange("L_i needs i >= 0")
        while len(self._L) <= i:
            j = len(self._L)
            self._L.append(self._L[-1] + self.l(j) * self.x_len(j))
        return self._L[i]

    @property
    def total_length(self) -> int:
        return self.L(self.i_cap + 1)

    def basic_sequence(self) -> ScheduleQ:
        return self._Q

    def q(self, n: int) -> int:
        return self._Q.q(n)

    def q_sum(self, n: int, k: int) -> Fraction:
        """Exact Q_n^(k), memoized; Q_0^(k) = 0."""
        if n == 0:
            return Fraction(0)
        key = (n, k)
        if key not in self._qsums:
            self._qsums[key] = q_partial_sum(self._Q, n, k).value
        return self._qsums[key]

    def S_at_L(self, i: int, k: int) -> Fraction:
        """S_{L_i}^(k) = sum_{j<=i} b_j^-k l_j |x_j|."""
        return sum((Fraction(self.l(j) * self.x_len(j), self.b(j) ** k) for j in range(1, i + 1)),
                   Fraction(0))

    def decompose(self, n: int) -> PrefixDecomposition:
        if n < 1:
            raise OutOfRange(f"n must be >= 1, got {n}")
        i = 0
        while self.L(i + 1) <= n:
            i += 1
            if i > MAX_TERMS:
                raise DegenerateSchedule("cumulative lengths stop growing")
        m = n - self.L(i)
        alpha, beta = divmod(m, self.x_len(i + 1))
        return PrefixDecomposition(n, i, m, alpha, beta)

    def prefix_schedule(self, p: int) -> ConcatSchedule:
        """Terms l_1 x_1 ... l_j x_j for the least j with L_j >= p."""
        if p > self.total_length:
            raise OutOfRange(f"{p} digits requested; construction holds {self.total_length}")
        terms = []
        j = 0
        while self.L(j) < p:
            j += 1
            terms.append((self.l(j), self.x(j)))
        return ConcatSchedule(terms)

    def digit_stream(self, n_start: int, count: int) -> list[int]:
        if count < 0:
            raise OutOfRange("count must be >= 0")
        if count == 0:
            return []
        if n_start < 1:
            raise OutOfRange("positions are 1-based")
        stop = n_start + count - 1
        if stop > self.total_length:
            raise OutOfRange(f"position {stop} beyond total length {self.total_length}")
        return list(self.prefix_schedule(stop).digits_range(n_start - 1, stop))

    def count_prefix(self, B: Block | Sequence[int], n: int) -> int:
        """Exact N_n^Q(B, x): occurrences starting at positions <= n."""
        if n < 1:
            raise OutOfRange("n must be >= 1")
        k = len(B)
        need = n + k - 1
        if need > self.total_length:
            raise OutOfRange(f"counting at n={n} needs {need} digits; construction holds {self.total_length}")
        return count_in_schedule(self.prefix_schedule(need), B, n)

    def validate(self, i_max: int | None = None, budget: int = DEFAULT_BUDGET) -> list[str]:
        """Check BFF and good-sequence invariants on indices 1..i_max (default i_cap + 1)."""
        i_max = self.i_cap + 1 if i_max is None else i_max
        self.bff.validate(i_max, budget=budget)
        for i in range(1, i_max + 1):
            if self.x(i).base > self.b(i):
                raise BFFInvariantError(f"x_{i} uses base {self.x(i).base} > b_{i} = {self.b(i)}", i, "x")
        return self.good.validate(self.bff, i_max, budget=budget)


def cumulative_length(c: Construction, i: int) -> int:
    return c.L(i)


def decompose(c: Construction, n: int) -> PrefixDecomposition:
    return c.decompose(n)


def digit_stream(c: Construction, n_start: int, count: int) -> list[int]:
    return c.digit_stream(n_start, count)


def count_prefix(c: Construction, B, n: int) -> int:
    return c.count_prefix(B, n)


def canonical_x1() -> Block:
    return Block(2, (0, 1))


def theorem_4_1_instance(i_cap: int, scale: Mapping[str, Callable[[int], int]] | None = None,
                         x1: Block | None = None, validate: bool = True) -> Construction:
    """The explicit example: x_i = C_{i, i^2}, b_i = i, l_i = i^(3i) for i >= 2.

    Index 1 is fixed: x_1 = (0,1), b_1 = 2, l_1 = 0, eps_1 = 3/5, k_1 = 1,
    p_1 = 2, mu_1 = lambda_2.  For i >= 2: eps_i = 1/i, k_i = i, p_i = b_i,
    mu_i = lambda_{b_i}.

    ``scale`` overrides any of ``l``, ``w`` (Champernowne word length),
    ``b``, ``eps``, ``k`` for i >= 2; the result is then labeled
    non-canonical.  Overrides that break a family invariant raise
    :class:`BadScale`.
    """
    if i_cap < 2:
        raise QNormalError("i_cap must be >= 2")
    scale = dict(scale or {})
    unknown = set(scale) - {"l", "w", "b", "eps", "k"}
    if unknown:
        raise BadScale(f"unknown scale overrides: {sorted(unknown)}")
    l_rule = scale.get("l", lambda i: i ** (3 * i))
    w_rule = scale.get("w", lambda i: i * i)
    b_rule = scale.get("b", lambda i: i)
    eps_rule = scale.get("eps", lambda i: Fraction(1, i))
    k_rule = scale.get("k", lambda i: i)
    first = x1 if x1 is not None else canonical_x1()

    bff = BFFSpec(
        l=lambda i: 0 if i == 1 else l_rule(i),
        b=lambda i: 2 if i == 1 else b_rule(i),
        p=lambda i: 2 if i == 1 else b_rule(i),
        eps=lambda i: Fraction(3, 5) if i == 1 else Fraction(eps_rule(i)),
        k=lambda i: 1 if i == 1 else k_rule(i),
        mu=lambda i: uniform(2 if i == 1 else b_rule(i)),
        k_limit=None,
        name="thm4.1" if not scale else "thm4.1-scaled",
    )
    good = GoodSequence(
        x=lambda i: first if i == 1 else ChampernowneBlock(b_rule(i), w_rule(i)),
        length=lambda i: first.length if i == 1 else w_rule(i) * b_rule(i) ** w_rule(i),
        name="C_{i,w_i}",
    )
    canonical = not scale and x1 is None
    c = Construction(bff, good, i_cap, name=bff.name, canonical=canonical)
    if validate:
        try:
            c.validate()
        except BFFInvariantError as exc:
            if canonical:
                raise
            raise BadScale(f"scale overrides violate an invariant: {exc}") from exc
    return c


def scaled_instance(i_cap: int = 5, validate: bool = True) -> Construction:
    """Desk-size variant: l_i = i^3 and x_i = C_{i, 2i}; everything else as canonical."""
    return theorem_4_1_instance(i_cap, scale={"l": lambda i: i**3, "w": lambda i: 2 * i},
                                validate=validate)


def k_in_range(c: Construction, k: int) -> bool:
    return k in range_set(c.bff)
