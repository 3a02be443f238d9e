"""Basic sequences, Q-Cantor digit expansions and the partial sums Q_n^(k)."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

from mpmath import iv, mp, mpf

from .errors import BadBase, DigitOutOfRange, OutOfRange, QNormalError, Undefined

Run = tuple  # (start, length or None for unbounded, base)


def _check_q(value: int, n: int) -> int:
    if not isinstance(value, int) or value < 2:
        raise BadBase(f"q_{n} = {value!r} is not an integer >= 2")
    return value


class BasicSequence:
    """A sequence q_1, q_2, ... of integers >= 2.

    Every form exposes ``q(n)`` and ``runs()``; the latter yields maximal
    (or at least constant) stretches ``(start, length, base)`` so that
    partial sums can be grouped.
    """

    defined_through: int | None = None

    def q(self, n: int) -> int:
        raise NotImplementedError

    def runs(self) -> Iterator[Run]:
        n = 1
        while self.defined_through is None or n <= self.defined_through:
            yield (n, 1, self.q(n))
            n += 1

    def prefix(self, n: int) -> list[int]:
        return [self.q(j) for j in range(1, n + 1)]


class ConstantQ(BasicSequence):
    def __init__(self, b: int):
        self.b = _check_q(b, 1)

    def __repr__(self) -> str:
        return f"ConstantQ({self.b})"

    def q(self, n: int) -> int:
        if n < 1:
            raise OutOfRange(f"index {n} < 1")
        return self.b

    def runs(self) -> Iterator[Run]:
        yield (1, None, self.b)


class ExplicitQ(BasicSequence):
    def __init__(self, values: Sequence[int]):
        self.values = tuple(_check_q(v, j) for j, v in enumerate(values, start=1))
        self.defined_through = len(self.values)

    def __repr__(self) -> str:
        return f"ExplicitQ({len(self.values)} terms)"

    def q(self, n: int) -> int:
        if not 1 <= n <= len(self.values):
            raise Undefined(f"q_{n} requested but only {len(self.values)} terms given")
        return self.values[n - 1]

    def runs(self) -> Iterator[Run]:
        start = 1
        for j in range(2, len(self.values) + 2):
            if j > len(self.values) or self.values[j - 1] != self.values[start - 1]:
                yield (start, j - start, self.values[start - 1])
                start = j


class RuleQ(BasicSequence):
    """q_n given by a closed form, e.g. ``RuleQ(lambda n: n + 1)``."""

    def __init__(self, fn: Callable[[int], int], name: str = "rule"):
        self._fn = fn
        self.name = name

    def __repr__(self) -> str:
        return f"RuleQ({self.name})"

    def q(self, n: int) -> int:
        if n < 1:
            raise OutOfRange(f"index {n} < 1")
        return _check_q(self._fn(n), n)


class ScheduleQ(BasicSequence):
    """Piecewise-constant Q: run ``i`` has ``length(i)`` copies of ``base(i)``.

    ``run(i)`` returns ``(length, base)``; empty runs are allowed and skipped.
    Runs are evaluated lazily, so the sequence may be infinite.
    """

    def __init__(self, run: Callable[[int], tuple[int, int]], max_runs: int | None = None):
        self._run = run
        self.max_runs = max_runs
        self._ends: list[int] = []
        self._bases: list[int] = []

    def __repr__(self) -> str:
        return f"ScheduleQ({len(self._ends)} runs evaluated)"

    def _extend(self) -> bool:
        i = len(self._ends) + 1
        if self.max_runs is not None and i > self.max_runs:
            return False
        length, base = self._run(i)
        if length < 0:
            raise QNormalError(f"run {i} has negative length {length}")
        self._ends.append((self._ends[-1] if self._ends else 0) + length)
        self._bases.append(_check_q(base, i))
        return True

    def _run_index(self, n: int) -> int:
        guard = 0
        while not self._ends or self._ends[-1] < n:
            if not self._extend():
                raise Undefined(f"q_{n} lies beyond the last run")
            guard += 1
            if guard > 10**6:
                raise Undefined("run lengths do not grow; schedule looks degenerate")
        return bisect.bisect_left(self._ends, n)

    def q(self, n: int) -> int:
        if n < 1:
            raise OutOfRange(f"index {n} < 1")
        return self._bases[self._run_index(n)]

    def runs(self) -> Iterator[Run]:
        i = 0
        while True:
            if i >= len(self._ends) and not self._extend():
                return
            start = (self._ends[i - 1] if i else 0) + 1
            length = self._ends[i] - start + 1
            if length:
                yield (start, length, self._bases[i])
            i += 1


@dataclass(frozen=True)
class PartialSum:
    """Q_n^(k).  ``error`` bounds |value - exact| (0 in exact mode)."""

    value: Union[Fraction, mpf]
    n: int
    k: int
    mode: str
    error: Union[Fraction, mpf] = Fraction(0)


def _grouped_terms(Q: BasicSequence, n: int, k: int) -> Iterator[tuple[int, int]]:
    """Yield (multiplicity, denominator) pairs whose weighted sum is Q_n^(k).

    Inside a run of base b every window of k digits that does not reach the
    run's end contributes 1/b^k; the at most k-1 windows that do are
    multiplied out individually.
    """
    for start, length, base in Q.runs():
        if start > n:
            return
        end = None if length is None else start + length - 1
        last = n if end is None else min(end, n)
        same_hi = last if end is None else min(last, end - k + 1)
        if same_hi >= start:
            yield (same_hi - start + 1, base**k)
        for j in range(max(start, same_hi + 1), last + 1):
            yield (1, math.prod(Q.q(j + t) for t in range(k)))


def q_partial_sum(Q: BasicSequence, n: int, k: int, mode: str = "exact", prec: int = 128) -> PartialSum:
    """Q_n^(k) = sum_{j<=n} 1 / (q_j q_{j+1} ... q_{j+k-1}).

    ``mode="exact"`` returns a Fraction.  ``mode="float"`` returns an mpmath
    value at ``prec`` bits obtained by Neumaier summation, together with a
    certified error bound from an interval evaluation of the same terms.
    """
    if n < 1 or k < 1:
        raise QNormalError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if Q.defined_through is not None and n + k - 1 > Q.defined_through:
        raise Undefined(f"Q_{n}^({k}) needs q up to index {n + k - 1}")
    terms = _grouped_terms(Q, n, k)
    if mode == "exact":
        num, den = 0, 1
        for mult, d in terms:
            g = math.gcd(den, d)
            num = num * (d // g) + mult * (den // g)
            den = den * (d // g)
        return PartialSum(Fraction(num, den), n, k, "exact")
    if mode != "float":
        raise QNormalError(f"unknown mode {mode!r}")
    old_iv = iv.prec
    try:
        iv.prec = prec
        with mp.workprec(prec):
            total, comp = mpf(0), mpf(0)
            enclosure = iv.mpf(0)
            for mult, d in terms:
                t = mpf(mult) / mpf(d)
                s = total + t
                if abs(total) >= abs(t):
                    comp += (total - s) + t
                else:
                    comp += (t - s) + total
                total = s
                enclosure += iv.mpf(mult) / iv.mpf(d)
            value = total + comp
            lo, hi = mpf(enclosure.a), mpf(enclosure.b)
            error = max(abs(value - lo), abs(hi - value))
    finally:
        iv.prec = old_iv
    return PartialSum(value, n, k, "float", error)


@dataclass(frozen=True)
class CantorValue:
    """Partial value sum_{j<=n} E_j/(q_1...q_j) plus what is known about the rest."""

    value: Union[Fraction, mpf]
    tail_bound: Fraction
    rounding_bound: Union[Fraction, mpf] = Fraction(0)


def digits_to_value(Q: BasicSequence, E: Sequence[int], n: int, precision: int | None = None) -> CantorValue:
    if n < 1:
        raise QNormalError("n must be >= 1")
    E = list(E)
    if len(E) < n:
        raise QNormalError(f"{len(E)} digits supplied, {n} requested")
    num, den = 0, 1
    for j in range(1, n + 1):
        qj = Q.q(j)
        e = E[j - 1]
        if not 0 <= e < qj:
            raise DigitOutOfRange(f"E_{j} = {e} not in [0, {qj - 1}]")
        num = num * qj + e
        den *= qj
    exact = Fraction(num, den)
    tail = Fraction(1, den)
    if precision is None:
        return CantorValue(exact, tail)
    with mp.workprec(precision):
        approx = mpf(num) / mpf(den)
        # three roundings (num, den, quotient), each within 2^-precision relative
        err = abs(approx) * mpf(4) * mpf(2) ** (-precision)
    return CantorValue(approx, tail, err)


@dataclass(frozen=True)
class CantorDigits:
    digits: tuple[int, ...]
    bases: tuple[int, ...]
    remainder: Fraction

    def __iter__(self):
        return iter(self.digits)


def value_to_digits(Q: BasicSequence, x: Union[Fraction, int, str], n: int) -> CantorDigits:
    """Greedy expansion: E_j = floor(x_j q_j), x_{j+1} = x_j q_j - E_j.

    Starting from an exact rational in [0, 1) the remainder never reaches 1,
    so the expansion never ends in an all-(q_j - 1) tail.
    """
    x = Fraction(x)
    if not 0 <= x < 1:
        raise OutOfRange(f"x = {x} is not in [0, 1)")
    digits, bases = [], []
    for j in range(1, n + 1):
        qj = Q.q(j)
        scaled = x * qj
        e = scaled.numerator // scaled.denominator
        digits.append(e)
        bases.append(qj)
        x = scaled - e
    return CantorDigits(tuple(digits), tuple(bases), x)


@dataclass(frozen=True)
class DivergenceReport:
    k: int
    checkpoints: tuple[int, ...]
    values: tuple[Fraction, ...]
    divergence_consistent: bool
    reason: str


def is_k_divergent_report(Q: BasicSequence, k: int, checkpoints: Sequence[int],
                          plateau_ratio: float = 0.5) -> DivergenceReport:
    """Tabulate Q_n^(k) at increasing checkpoints.

    Evidence only.  The verdict requires strictly increasing values and no
    plateau, where a plateau means the last increment is less than
    ``plateau_ratio`` times the previous one (geometric decay of increments
    is what a convergent sum looks like between sparse checkpoints).
    """
    cps = tuple(checkpoints)
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise QNormalError("checkpoints must be strictly increasing")
    values = tuple(q_partial_sum(Q, n, k).value for n in cps)
    if any(b <= a for a, b in zip(values, values[1:])):
        return DivergenceReport(k, cps, values, False, "not strictly increasing")
    if len(values) >= 3:
        d1 = values[-2] - values[-3]
        d2 = values[-1] - values[-2]
        if d2 < plateau_ratio * d1:
            return DivergenceReport(k, cps, values, False,
                                    f"increments shrinking by factor {float(d2 / d1):.3g}: plateau")
    return DivergenceReport(k, cps, values, True, "strictly increasing, no plateau detected")
