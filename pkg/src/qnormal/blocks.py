"""Blocks, symbolic concatenations and exact overlapping occurrence counts.

Positions exposed to callers are 1-based, as in the construction itself;
internal helpers named ``*_range`` take 0-based half-open ranges.

Two block-like types exist:

* :class:`Block` -- an explicit digit string, stored packed.
* :class:`ChampernowneBlock` -- ``C_{b,w}``, all base-``b`` words of length
  ``w`` in lexicographic order.  Never materialized; occurrence counts come
  from a digit-pattern counting argument over the integers ``0 .. b**w - 1``.

Both provide ``base``, ``length``, ``digits_range``, ``count`` and
``count_fit``.  :class:`ConcatSchedule` strings them together with
multiplicities (``l_1 B_1 l_2 B_2 ...``) and counts occurrences without
expanding the copies.
"""

from __future__ import annotations

import bisect
import itertools
from array import array
from typing import Iterable, Iterator, Sequence, Union

from .errors import (
    BadBase,
    BadLength,
    DigitOutOfRange,
    EmptyBlock,
    OutOfRange,
    TooLong,
    Unfeasible,
)

#: Largest digit string scanned by brute force inside a lazy block.
SCAN_LIMIT = 10**7

Pattern = tuple


def _typecode(base: int) -> str | None:
    for code in ("B", "H", "L", "Q"):
        if base - 1 < 1 << (8 * array(code).itemsize):
            return code
    return None


def _as_pattern(block: Union["Block", Sequence[int]]) -> Pattern:
    if isinstance(block, Block):
        return block.digits
    return tuple(int(d) for d in block)


def _scan(window: Sequence[int], pattern: Pattern, starts_below: int | None = None) -> int:
    """Count overlapping matches of ``pattern`` in ``window``.

    Only start offsets ``< starts_below`` are counted when given.
    """
    k = len(pattern)
    last = len(window) - k + 1
    if starts_below is not None:
        last = min(last, starts_below)
    window = tuple(window)
    return sum(1 for s in range(max(last, 0)) if window[s:s + k] == pattern)


class Block:
    """A finite digit string over ``{0, ..., base-1}``."""

    __slots__ = ("base", "_data", "_packed", "_counts")

    def __init__(self, base: int, digits: Iterable[int]):
        if not isinstance(base, int) or base < 2:
            raise BadBase(f"base must be an integer >= 2, got {base!r}")
        digits = tuple(int(d) for d in digits)
        if not digits:
            raise EmptyBlock("a block needs at least one digit")
        for pos, d in enumerate(digits, start=1):
            if not 0 <= d < base:
                raise DigitOutOfRange(f"digit {d} at position {pos} is outside base {base}")
        self.base = base
        code = _typecode(base)
        self._data = array(code, digits) if code else digits
        self._packed = self._data.tobytes() if code else None
        self._counts: dict = {}

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(self._data)

    @property
    def length(self) -> int:
        return len(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self) -> Iterator[int]:
        return iter(self._data)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return tuple(self._data[idx])
        return self._data[idx]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Block):
            return NotImplemented
        return self.base == other.base and self.digits == other.digits

    def __hash__(self) -> int:
        return hash((self.base, self.digits))

    def __repr__(self) -> str:
        body = ",".join(map(str, self._data[:16]))
        if len(self._data) > 16:
            body += f",...({len(self._data)} digits)"
        return f"Block(base={self.base}, ({body}))"

    def digits_range(self, start: int, stop: int) -> tuple[int, ...]:
        return tuple(self._data[start:stop])

    def count_fit(self, pattern: Pattern, p: int) -> int:
        """Occurrences lying entirely inside the first ``p`` digits."""
        k = len(pattern)
        p = min(p, len(self._data))
        if k == 0 or p < k or any(not 0 <= d < self.base for d in pattern):
            return 0
        if self._packed is None:
            return _scan(self._data[:p], pattern)
        item = self._data.itemsize
        needle = array(self._data.typecode, pattern).tobytes()
        hay_end = p * item
        total = 0
        pos = self._packed.find(needle, 0, hay_end)
        while pos != -1:
            if pos % item == 0:
                total += 1
            pos = self._packed.find(needle, pos + 1, hay_end)
        return total

    def count(self, pattern: Pattern) -> int:
        if pattern not in self._counts:
            self._counts[pattern] = self.count_fit(pattern, len(self._data))
        return self._counts[pattern]


def make_block(base: int, digits: Sequence[int]) -> Block:
    return Block(base, digits)


def _count_below(bound: int, b: int, w: int, fixed: dict[int, int]) -> int:
    """Count integers N in [0, bound) whose w-digit base-b form has ``fixed`` digits.

    ``fixed`` maps 0-based positions (most significant first) to digits.
    """
    if bound <= 0:
        return 0
    if bound >= b**w:
        return b ** (w - len(fixed))
    bdigits = []
    v = bound
    for _ in range(w):
        v, d = divmod(v, b)
        bdigits.append(d)
    bdigits.reverse()
    free_after = [0] * w
    free = 0
    for pos in range(w - 1, -1, -1):
        free_after[pos] = free
        if pos not in fixed:
            free += 1
    total = 0
    for pos in range(w):
        bd = bdigits[pos]
        weight = b ** free_after[pos]
        if pos in fixed:
            d = fixed[pos]
            if d < bd:
                total += weight
                break
            if d > bd:
                break
        else:
            total += bd * weight
    return total


class ChampernowneBlock:
    """``C_{b,w}``: every base-``b`` word of length ``w``, lexicographically.

    Streaming iteration and random access never hold more than one word.
    """

    __slots__ = ("base", "width", "length", "_counts")

    def __init__(self, b: int, w: int):
        if not isinstance(b, int) or b < 2:
            raise BadBase(f"base must be an integer >= 2, got {b!r}")
        if not isinstance(w, int) or w < 1:
            raise BadLength(f"word length must be an integer >= 1, got {w!r}")
        self.base = b
        self.width = w
        self.length = w * b**w
        self._counts: dict = {}

    def __repr__(self) -> str:
        return f"ChampernowneBlock(b={self.base}, w={self.width})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChampernowneBlock):
            return NotImplemented
        return (self.base, self.width) == (other.base, other.width)

    def __hash__(self) -> int:
        return hash(("C", self.base, self.width))

    def __iter__(self) -> Iterator[int]:
        return itertools.chain.from_iterable(
            itertools.product(range(self.base), repeat=self.width))

    def word(self, index: int) -> tuple[int, ...]:
        """The ``index``-th (0-based) constituent word."""
        b, w = self.base, self.width
        out = [0] * w
        for pos in range(w - 1, -1, -1):
            index, out[pos] = divmod(index, b)
        return tuple(out)

    def digits_range(self, start: int, stop: int) -> tuple[int, ...]:
        stop = min(stop, self.length)
        if start >= stop:
            return ()
        w = self.width
        num, off = divmod(start, w)
        out: list[int] = []
        need = stop - start
        while len(out) < need:
            word = self.word(num)
            out.extend(word[off:off + need - len(out)])
            num += 1
            off = 0
        return tuple(out)

    def materialize(self, limit: int = SCAN_LIMIT) -> Block:
        if self.length > limit:
            raise TooLong(f"C_{{{self.base},{self.width}}} has {self.length} digits > limit {limit}")
        return Block(self.base, self)

    def count_fit(self, pattern: Pattern, p: int) -> int:
        """Occurrences of ``pattern`` lying entirely inside the first ``p`` digits.

        For ``k = len(pattern) <= w`` an occurrence touches at most two
        consecutive words N, N+1, so it is either interior to a word (a
        fixed-digit pattern on N) or straddles a boundary with ``s`` digits in
        N.  In the straddling case N+1 keeps the high part of N unless the low
        ``s`` digits of N are all ``b-1``, in which case a carry makes
        N+1 a multiple of ``b**s``.  Each case is a digit-pattern count below
        a bound; occurrences reaching the trailing partial word are scanned.
        """
        b, w = self.base, self.width
        k = len(pattern)
        p = min(p, self.length)
        if k == 0 or p < k or any(not 0 <= d < b for d in pattern):
            return 0
        if k > w:
            if p > SCAN_LIMIT:
                raise Unfeasible(f"pattern longer than word length needs a scan of {p} digits")
            return _scan(self.digits_range(0, p), pattern)
        q, r = divmod(p, w)
        total = 0
        for j in range(w - k + 1):
            total += _count_below(q, b, w, {j + t: pattern[t] for t in range(k)})
        for s in range(1, k):
            head, rest = pattern[:s], pattern[s:]
            fixed = {u: rest[u] for u in range(k - s)}
            if all(d == b - 1 for d in head):
                fixed.update({w - s + u: 0 for u in range(s)})
                cnt = _count_below(q, b, w, fixed)
                if all(d == 0 for d in rest):
                    cnt -= min(cnt, 1)
            else:
                fixed.update({w - s + u: head[u] for u in range(s)})
                cnt = _count_below(q - 1, b, w, fixed)
            total += cnt
        if r:
            lo = max(0, q * w - (k - 1))
            window = self.digits_range(lo, p)
            first = q * w - (k - 1) - lo
            for st in range(max(first, 0), len(window) - k + 1):
                if window[st:st + k] == pattern:
                    total += 1
        return total

    def count(self, pattern: Pattern) -> int:
        if pattern not in self._counts:
            self._counts[pattern] = self.count_fit(pattern, self.length)
        return self._counts[pattern]

    def count_range(self, m: int) -> tuple[int, int]:
        """Exact (min, max) of the full count over all base-b blocks of length m <= w.

        Interior occurrences always number (w-m+1) b^(w-m); each of the m-1
        straddle offsets contributes b^(w-m), less one exactly when the block is
        (b-1)^s 0^(m-s) for that offset s.  At most one offset can lose.
        """
        b, w = self.base, self.width
        if not 1 <= m <= w:
            raise BadLength(f"count_range needs 1 <= m <= w, got m={m}, w={w}")
        top = w * b ** (w - m)
        return (top - (1 if m >= 2 else 0), top)


BlockLike = Union[Block, ChampernowneBlock]


def champernowne_block(b: int, w: int) -> ChampernowneBlock:
    return ChampernowneBlock(b, w)


class ConcatSchedule:
    """``l_1 B_1 l_2 B_2 ... l_n B_n`` kept symbolic.

    Terms are ``(multiplicity, block)`` pairs; block bases may differ.
    """

    def __init__(self, terms: Iterable[tuple[int, BlockLike]]):
        clean = []
        for mult, blk in terms:
            if not isinstance(mult, int) or mult < 0:
                raise BadLength(f"multiplicity must be a non-negative integer, got {mult!r}")
            clean.append((mult, blk))
        self.terms: tuple[tuple[int, BlockLike], ...] = tuple(clean)
        starts = []
        pos = 0
        for mult, blk in self.terms:
            starts.append(pos)
            pos += mult * blk.length
        self._starts = starts
        self.length = pos
        self.base = max((blk.base for _, blk in self.terms), default=2)
        self._cross_cache: dict = {}

    def __repr__(self) -> str:
        return f"ConcatSchedule({len(self.terms)} terms, length={self.length})"

    def __iter__(self) -> Iterator[int]:
        for mult, blk in self.terms:
            for _ in range(mult):
                yield from blk

    def digits_range(self, start: int, stop: int) -> tuple[int, ...]:
        stop = min(stop, self.length)
        out: list[int] = []
        pos = start
        idx = bisect.bisect_right(self._starts, pos) - 1
        while pos < stop and idx < len(self.terms):
            mult, blk = self.terms[idx]
            t_start = self._starts[idx]
            t_end = t_start + mult * blk.length
            if pos >= t_end:
                idx += 1
                continue
            w = blk.length
            off = (pos - t_start) % w
            take = min(w - off, stop - pos)
            out.extend(blk.digits_range(off, off + take))
            pos += take
        return tuple(out)

    def _crossing(self, tail: tuple, look: tuple, pattern: Pattern) -> int:
        return _scan(tail + look, pattern, starts_below=len(tail))

    def _cross_repeat(self, blk: BlockLike, pattern: Pattern) -> int:
        key = (blk, pattern)
        if key not in self._cross_cache:
            k, w = len(pattern), blk.length
            tail = blk.digits_range(max(0, w - (k - 1)), w)
            head = blk.digits_range(0, min(w, k - 1))
            look = (head * (-(-(k - 1) // len(head))))[:k - 1]
            self._cross_cache[key] = self._crossing(tail, look, pattern)
        return self._cross_cache[key]

    def count_fit(self, pattern: Pattern, p: int) -> int:
        """Occurrences lying entirely inside the first ``p`` digits.

        Every occurrence is charged either to the block copy that contains
        it or, if it crosses copy boundaries, to the first junction it
        crosses.  Junction windows are the last ``k-1`` digits of a copy plus
        the next ``k-1`` digits of the stream; junctions between copies of the
        same term whose look-ahead stays inside the term are all alike and are
        counted once and multiplied.
        """
        k = len(pattern)
        p = min(p, self.length)
        if k == 0 or p < k:
            return 0
        total = 0
        for idx, (mult, blk) in enumerate(self.terms):
            start = self._starts[idx]
            if start >= p:
                break
            w = blk.length
            span = mult * w
            if span == 0:
                continue
            avail = min(span, p - start)
            full, rem = divmod(avail, w)
            total += full * blk.count(pattern)
            if rem:
                total += blk.count_fit(pattern, rem)
            if k == 1 or not full:
                continue
            uniform = min(full, max(0, (avail - (k - 1)) // w))
            if uniform:
                total += uniform * self._cross_repeat(blk, pattern)
            tail = blk.digits_range(max(0, w - (k - 1)), w)
            for c in range(uniform, full):
                junction = start + (c + 1) * w
                look = self.digits_range(junction, min(junction + k - 1, p))
                total += self._crossing(tail, look, pattern)
        return total


def concat(terms: Iterable[tuple[int, BlockLike]]) -> ConcatSchedule:
    return ConcatSchedule(terms)


def materialize(schedule: ConcatSchedule, limit: int) -> Block:
    if schedule.length > limit:
        raise TooLong(f"schedule represents {schedule.length} digits > limit {limit}")
    if schedule.length == 0:
        raise EmptyBlock("schedule represents no digits")
    return Block(schedule.base, schedule)


def count_occurrences(B: Union[Block, Sequence[int]], y: Iterable[int], n: int) -> int:
    """Brute-force N_n(B, y): overlapping matches starting at positions 1..n."""
    pattern = _as_pattern(B)
    seq = tuple(y)
    k = len(pattern)
    last = min(n, len(seq) - k + 1)
    return sum(1 for j in range(max(last, 0)) if seq[j:j + k] == pattern)


def count_in_schedule(schedule: ConcatSchedule, B: Union[Block, Sequence[int]], n: int) -> int:
    """Exact N_n(B, ·) over the virtual concatenation, without expanding it."""
    if n < 0 or n > schedule.length:
        raise OutOfRange(f"n={n} outside [0, {schedule.length}]")
    pattern = _as_pattern(B)
    if n == 0:
        return 0
    return schedule.count_fit(pattern, min(n + len(pattern) - 1, schedule.length))
