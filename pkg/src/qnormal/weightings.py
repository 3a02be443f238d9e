"""Weightings, (p, b)-uniformity and (eps, k, mu)-normality of finite blocks."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

from .blocks import Block, ChampernowneBlock, ConcatSchedule
from .errors import BadBase, QNormalError, Unfeasible

#: Default cap on the number of block evaluations in exhaustive checks.
DEFAULT_BUDGET = 200_000

Number = Union[Fraction, float]


class Weighting:
    """A family mu^(1), mu^(2), ... of functions on digit tuples.

    Subclasses implement :meth:`evaluate`; ``mu(block)`` is shorthand for
    ``mu.evaluate(len(block), block)``.
    """

    kind = "custom"
    exact = False

    def evaluate(self, k: int, block: Sequence[int]) -> Number:
        raise NotImplementedError

    def __call__(self, block: Sequence[int]) -> Number:
        block = tuple(block)
        return self.evaluate(len(block), block)


class UniformWeighting(Weighting):
    kind = "uniform"
    exact = True

    def __init__(self, b: int):
        if not isinstance(b, int) or b < 2:
            raise BadBase(f"uniform weighting needs base >= 2, got {b!r}")
        self.b = b

    def __repr__(self) -> str:
        return f"UniformWeighting({self.b})"

    def __eq__(self, other) -> bool:
        return isinstance(other, UniformWeighting) and other.b == self.b

    def __hash__(self) -> int:
        return hash(("uniform", self.b))

    def evaluate(self, k: int, block: Sequence[int]) -> Fraction:
        if len(block) != k:
            raise QNormalError(f"block length {len(block)} does not match k={k}")
        if any(not 0 <= d < self.b for d in block):
            return Fraction(0)
        return Fraction(1, self.b**k)


class CustomWeighting(Weighting):
    """Wraps an arbitrary function ``(k, block) -> value in [0, 1]``.

    Values are compared with tolerance ``tol``.
    """

    def __init__(self, fn: Callable[[int, tuple], Number], tol: float = 1e-12, name: str = "custom"):
        self._fn = fn
        self.tol = tol
        self.name = name

    def __repr__(self) -> str:
        return f"CustomWeighting({self.name})"

    def evaluate(self, k: int, block: Sequence[int]) -> Number:
        return self._fn(k, tuple(block))


def uniform(b: int) -> UniformWeighting:
    return UniformWeighting(b)


def _check_budget(alphabet: int, k_max: int, budget: int) -> None:
    needed = sum(alphabet**m for m in range(1, k_max + 1))
    if needed > budget:
        raise Unfeasible(f"{needed} block evaluations exceed budget {budget}")


def is_pb_uniform(mu: Weighting, p: int, b: int, k_max: int, tol: Number = 0,
                  budget: int = DEFAULT_BUDGET) -> bool:
    """Exhaustively test mu^(k)(B) == b^-k for all base-p blocks with k <= k_max."""
    if not 1 <= p <= b:
        raise QNormalError(f"need 1 <= p <= b, got p={p}, b={b}")
    if k_max < 1:
        raise QNormalError("k_max must be >= 1")
    _check_budget(p, k_max, budget)
    for k in range(1, k_max + 1):
        target = Fraction(1, b**k)
        for blk in itertools.product(range(p), repeat=k):
            if abs(mu.evaluate(k, blk) - target) > tol:
                return False
    return True


def check_weighting(mu: Weighting, k_max: int, digits: int, tol: Number = 0) -> bool:
    """Truncated check of the weighting axioms over the digit range ``[0, digits)``.

    Tests that the first-level masses sum to 1 within ``tol`` and that every
    mu^(k) marginalizes from mu^(k+1).
    """
    first = sum(mu.evaluate(1, (j,)) for j in range(digits))
    if abs(first - 1) > tol:
        return False
    for k in range(1, k_max):
        for blk in itertools.product(range(digits), repeat=k):
            marg = sum(mu.evaluate(k + 1, blk + (j,)) for j in range(digits))
            if abs(mu.evaluate(k, blk) - marg) > tol:
                return False
    return True


@dataclass
class NormalityResult:
    passed: bool
    worst_block: tuple | None
    worst_ratio: Number | None
    checked: int
    failures: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def _block_counter(y):
    """Return (length, count function) for any supported digit source."""
    if isinstance(y, ChampernowneBlock):
        return y.length, y.count
    if isinstance(y, ConcatSchedule):
        return y.length, lambda pat: y.count_fit(pat, y.length)
    seq = tuple(y)
    cache: dict[int, Counter] = {}

    def count(pat):
        m = len(pat)
        if m not in cache:
            cache[m] = Counter(seq[j:j + m] for j in range(len(seq) - m + 1))
        return cache[m][pat]

    return len(seq), count


def check_normality(y, eps: Number, k: int, mu: Weighting, alphabet_bound: int | None = None,
                    budget: int = DEFAULT_BUDGET, max_failures: int = 10) -> NormalityResult:
    """Decide (eps, k, mu)-normality of the finite block ``y``.

    ``y`` may be a digit sequence, a :class:`Block`, a lazy
    :class:`ChampernowneBlock` or a :class:`ConcatSchedule`.  Candidate
    blocks range over all lengths ``m <= k`` with digits below
    ``alphabet_bound`` (default: the base of ``y``).  ``worst`` is the block
    whose ratio N / (mu |y|) is farthest from 1.
    """
    if not 0 < eps < 1:
        raise QNormalError(f"eps must lie in (0, 1), got {eps}")
    if k < 1:
        raise QNormalError("k must be >= 1")
    if isinstance(eps, float):
        eps = Fraction(eps)
    if alphabet_bound is None:
        if isinstance(y, (Block, ChampernowneBlock, ConcatSchedule)):
            alphabet_bound = y.base
        else:
            alphabet_bound = max(2, max(y, default=0) + 1)
    if alphabet_bound < 2:
        raise BadBase("alphabet_bound must be >= 2")
    _check_budget(alphabet_bound, k, budget)
    size, count = _block_counter(y)
    passed = True
    worst, worst_ratio, worst_dev = None, None, -1
    failures = []
    checked = 0
    for m in range(1, k + 1):
        for blk in itertools.product(range(alphabet_bound), repeat=m):
            checked += 1
            n_occ = count(blk)
            expected = mu.evaluate(m, blk) * size
            ok = expected * (1 - eps) <= n_occ <= expected * (1 + eps)
            if expected == 0:
                ratio = None if n_occ == 0 else float("inf")
                dev = 0 if n_occ == 0 else float("inf")
            else:
                ratio = Fraction(n_occ) / expected if isinstance(expected, Fraction) else n_occ / expected
                dev = abs(ratio - 1)
            if dev > worst_dev:
                worst, worst_ratio, worst_dev = blk, ratio, dev
            if not ok:
                passed = False
                if len(failures) < max_failures:
                    failures.append((blk, n_occ, expected))
    return NormalityResult(passed, worst, worst_ratio, checked, failures)
