"""Analytic quantities around a prefix of the constructed number, and their checks.

Everything here is exact rational arithmetic unless a name says ``log``.
Statements about limits can only be checked as finite trends; each report
says which of its verdicts hold at the given n and which are trend evidence.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Sequence

from .bff import ln, range_set, tail_half
from .blocks import Block, ChampernowneBlock, ConcatSchedule, count_in_schedule
from .construction import Construction
from .errors import DegenerateSchedule, KOutOfRange, OutOfRange, QNormalError, Unfeasible
from .weightings import check_normality, uniform

MAX_TERMS = 10**6


def min_base(B: Sequence[int]) -> int:
    """Smallest base in which B is a block."""
    return max(B, default=0) + 1


@dataclass(frozen=True)
class SectionTwoContext:
    """All quantities attached to a prefix length n and block length k.

    ``i`` is the largest index with L_i <= n; the prefix is
    l_1 x_1 ... l_i x_i followed by m = alpha |x_{i+1}| + beta digits.
    """

    c: Construction
    k: int
    n: int
    i: int
    m: int
    alpha: int
    beta: int
    L_prev: int
    L_i: int
    l_i: int
    l_next: int
    x_len: int
    x_next_len: int
    b_i: int
    b_next: int
    eps_i: Fraction
    eps_next: Fraction
    k_i: int
    p_i: int
    S_prev: Fraction
    S_Li: Fraction
    S_n: Fraction

    @property
    def bk_i(self) -> int:
        return self.b_i**self.k

    @property
    def bk_next(self) -> int:
        return self.b_next**self.k


def section_two_context(c: Construction, k: int, n: int) -> SectionTwoContext:
    if k < 1:
        raise QNormalError("k must be >= 1")
    if k not in range_set(c.bff):
        raise KOutOfRange(f"k={k} is not in R(W) = {range_set(c.bff)}")
    d = c.decompose(n)
    i = d.i
    if i < 1:
        raise OutOfRange(f"n={n} lies inside the first term (L_1 = {c.L(1)}); no middle block yet")
    S_prev = c.S_at_L(i - 1, k)
    S_Li = S_prev + Fraction(c.l(i) * c.x_len(i), c.b(i) ** k)
    return SectionTwoContext(
        c=c, k=k, n=n, i=i, m=d.m, alpha=d.alpha, beta=d.beta,
        L_prev=c.L(i - 1), L_i=c.L(i), l_i=c.l(i), l_next=c.l(i + 1),
        x_len=c.x_len(i), x_next_len=c.x_len(i + 1), b_i=c.b(i), b_next=c.b(i + 1),
        eps_i=c.eps(i), eps_next=c.eps(i + 1), k_i=c.k(i), p_i=c.p(i),
        S_prev=S_prev, S_Li=S_Li, S_n=S_Li + Fraction(d.m, c.b(i + 1) ** k),
    )


def s_partial_sum(ctx: SectionTwoContext) -> Fraction:
    """S_n^(k): the partial sum with every junction ignored."""
    return ctx.S_n


def q_value(ctx: SectionTwoContext) -> Fraction:
    return ctx.c.q_sum(ctx.n, ctx.k)


# -- S - Q ------------------------------------------------------------------

def first_long_index(c: Construction, k: int) -> int:
    """s = min{t : k < |x_t|}."""
    t = 1
    while c.x_len(t) <= k:
        t += 1
        if t > MAX_TERMS:
            raise DegenerateSchedule("block lengths never exceed k")
    return t


@dataclass(frozen=True)
class SMinusQCheck:
    n: int
    k: int
    i: int
    s: int
    r: Fraction
    diff: Fraction
    bound: Fraction
    nonnegative: bool
    within_bound: bool
    strict: bool

    @property
    def passed(self) -> bool:
        return self.nonnegative and self.within_bound


def s_minus_q_bound_check(ctx: SectionTwoContext, s_start: int | None = None) -> SMinusQCheck:
    """0 <= S - Q <= r + k(i + 2 - s) with r = S_{L_{s-1}} - Q_{L_{s-1}}."""
    c, k = ctx.c, ctx.k
    s = first_long_index(c, k) if s_start is None else s_start
    L_s = c.L(s - 1)
    r = c.S_at_L(s - 1, k) - c.q_sum(L_s, k)
    diff = ctx.S_n - q_value(ctx)
    bound = r + k * (ctx.i + 2 - s)
    return SMinusQCheck(ctx.n, k, ctx.i, s, r, diff, bound, diff >= 0, diff <= bound, diff < bound)


@dataclass
class SMinusQSweep:
    k: int
    checks: list[SMinusQCheck]
    monotone: bool

    @property
    def passed(self) -> bool:
        return self.monotone and all(ch.passed for ch in self.checks)


def s_minus_q_sweep(c: Construction, k: int, checkpoints: Iterable[int]) -> SMinusQSweep:
    """Run the bound check at increasing checkpoints and test that S - Q never decreases."""
    cps = list(checkpoints)
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise QNormalError("checkpoints must be strictly increasing")
    checks = [s_minus_q_bound_check(section_two_context(c, k, n)) for n in cps]
    monotone = all(b.diff >= a.diff for a, b in zip(checks, checks[1:]))
    return SMinusQSweep(k, checks, monotone)


# -- counting sandwiches ----------------------------------------------------

def kappa(ctx: SectionTwoContext) -> Fraction:
    k = ctx.k
    head = ctx.L_prev + k * (ctx.l_i + 1) + (1 + ctx.eps_i) * Fraction(ctx.l_i * ctx.x_len, ctx.bk_i)
    per_copy = (1 + ctx.eps_next) * Fraction(ctx.x_next_len, ctx.bk_next) + k
    return head + per_copy * ctx.alpha + ctx.beta


@dataclass
class LemmaCheck:
    """``passed`` is None when the hypotheses do not hold at this prefix."""

    name: str
    passed: bool | None
    margins: dict[str, Fraction] = field(default_factory=dict)
    note: str = ""


def _block_hypotheses(ctx: SectionTwoContext, B: Sequence[int]) -> str:
    if len(B) != ctx.k:
        raise QNormalError(f"block length {len(B)} differs from k={ctx.k}")
    problems = []
    if ctx.k > ctx.k_i:
        problems.append(f"k={ctx.k} > k_i={ctx.k_i}")
    if min_base(B) > ctx.p_i:
        problems.append(f"block needs base {min_base(B)} > p_i={ctx.p_i}")
    return "; ".join(problems)


def check_lemma_2_1(ctx: SectionTwoContext, B: Block | Sequence[int]) -> LemmaCheck:
    """Counts of B in x_i and in the first m positions of l_{i+1} x_{i+1}."""
    B = tuple(B)
    unmet = _block_hypotheses(ctx, B)
    if unmet:
        return LemmaCheck("count sandwich in x_i and the tail", None, note=unmet)
    c = ctx.c
    full = c.x(ctx.i).count(B)
    mean_i = Fraction(ctx.x_len, ctx.bk_i)
    tail = 0
    if ctx.m:
        tail = count_in_schedule(ConcatSchedule([(ctx.l_next, c.x(ctx.i + 1))]), B, ctx.m)
    mean_tail = Fraction(ctx.alpha * ctx.x_next_len, ctx.bk_next)
    margins = {
        "x_i_lower": full - (1 - ctx.eps_i) * mean_i,
        "x_i_upper": (1 + ctx.eps_i) * mean_i - full,
        "tail_lower": tail - (1 - ctx.eps_next) * mean_tail,
        "tail_upper": (1 + ctx.eps_next) * mean_tail + ctx.beta + ctx.k * ctx.alpha - tail,
    }
    return LemmaCheck("count sandwich in x_i and the tail", all(v >= 0 for v in margins.values()), margins)


def prefix_lower_bound(ctx: SectionTwoContext) -> Fraction:
    return ((1 - ctx.eps_i) * Fraction(ctx.l_i * ctx.x_len, ctx.bk_i)
            + (1 - ctx.eps_next) * Fraction(ctx.alpha * ctx.x_next_len, ctx.bk_next))


def check_lemma_2_2(ctx: SectionTwoContext, B: Block | Sequence[int]) -> LemmaCheck:
    """lower <= N_n^Q(B, x) <= kappa."""
    B = tuple(B)
    unmet = _block_hypotheses(ctx, B)
    if unmet:
        return LemmaCheck("prefix count sandwich", None, note=unmet)
    N = ctx.c.count_prefix(B, ctx.n)
    margins = {"lower": N - prefix_lower_bound(ctx), "upper": kappa(ctx) - N}
    return LemmaCheck("prefix count sandwich", all(v >= 0 for v in margins.values()), margins)


# -- f, g and the envelope ---------------------------------------------------

def g_coefficients(ctx: SectionTwoContext) -> tuple[Fraction, ...]:
    """(C, D, E, F, G, H) with g(w, z) = (C + Dw + Ez) / (F + Gw + Hz)."""
    k = ctx.k
    C = ctx.L_prev + ctx.eps_i * Fraction(ctx.l_i * ctx.x_len, ctx.bk_i) + k * (ctx.l_i + 1)
    D = ctx.eps_next * Fraction(ctx.x_next_len, ctx.bk_next) + k
    E = Fraction(1)
    F = ctx.S_Li
    G = Fraction(ctx.x_next_len, ctx.bk_next)
    H = Fraction(1, ctx.bk_next)
    return C, D, E, F, G, H


def f_g_functions(ctx: SectionTwoContext, w: int, z: int) -> tuple[Fraction, Fraction]:
    if w < 0 or z < 0:
        raise QNormalError("w and z must be >= 0")
    den = ctx.S_Li + Fraction(ctx.x_next_len * w + z, ctx.bk_next)
    if den == 0:
        raise DegenerateSchedule("S_{L_i} = 0 and w = z = 0")
    lead = ctx.eps_i * Fraction(ctx.l_i * ctx.x_len, ctx.bk_i)
    f_num = ctx.S_prev + lead + ctx.eps_next * Fraction(ctx.x_next_len * w, ctx.bk_next) + Fraction(z, ctx.bk_next)
    g_num = (ctx.L_prev + lead + ctx.k * (ctx.l_i + 1)
             + (ctx.eps_next * Fraction(ctx.x_next_len, ctx.bk_next) + ctx.k) * w + z)
    return f_num / den, g_num / den


def g_value(ctx: SectionTwoContext, w: int, z: int) -> Fraction:
    return f_g_functions(ctx, w, z)[1]


def epsilon_prime(ctx: SectionTwoContext) -> Fraction:
    """eps_i' = g_i(0, |x_{i+1}|), written out directly."""
    if ctx.l_i < 1:
        raise DegenerateSchedule(f"l_{ctx.i} = 0: eps' undefined")
    k = ctx.k
    num = (ctx.L_prev + ctx.eps_i * Fraction(ctx.l_i * ctx.x_len, ctx.bk_i)
           + k * (ctx.l_i + 1) + ctx.x_next_len)
    return num / (ctx.S_Li + Fraction(ctx.x_next_len, ctx.bk_next))


def envelope_hypotheses(ctx: SectionTwoContext) -> list[str]:
    """Unmet hypotheses for bounding g by eps' (empty list: all hold)."""
    k = ctx.k
    out = []
    if ctx.l_i <= 0:
        out.append(f"l_{ctx.i} = 0")
    if not ctx.x_len > 4 * k:
        out.append(f"|x_{ctx.i}| <= 4k")
    gap = ctx.eps_i - ctx.eps_next
    if gap <= 0 or not ctx.x_next_len > k * ctx.bk_next / gap:
        out.append(f"|x_{ctx.i + 1}| <= k b^k / (eps_i - eps_(i+1))")
    return out


@dataclass
class GridSpec:
    """Corner-biased sample: all corners and edge neighbours, evenly spaced and random interior points."""

    n_w: int = 10
    n_z: int = 10
    seed: int = 0


def _axis(hi: int, count: int, rng: random.Random) -> list[int]:
    pts = {v for v in (0, 1, hi - 1, hi) if 0 <= v <= hi}
    even = max(count - len(pts), 0) // 2
    for j in range(1, even + 1):
        pts.add(hi * j // (even + 1))
    while len(pts) < min(count, hi + 1):
        pts.add(rng.randint(0, hi))
    return sorted(pts)


@dataclass
class Lemma25Check:
    applicable: bool
    passed: bool | None
    unmet: list[str]
    points: int = 0
    violations: list[str] = field(default_factory=list)
    eps_prime: Fraction | None = None
    diagnostics: dict[str, bool] = field(default_factory=dict)


def check_lemma_2_5(ctx: SectionTwoContext, grid: GridSpec | None = None) -> Lemma25Check:
    """g decreasing in w, increasing in z and below eps' over a sampled grid.

    Hypothesis failures are reported in ``unmet`` with ``passed = None``.
    ``diagnostics`` records the intermediate inequalities of the monotonicity
    argument, including both readings of the S-subscript in the first
    sufficient condition (``first_sufficient_prev`` uses S_{L_{i-1}},
    ``first_sufficient_next`` uses S_{L_{i+1}}).
    """
    grid = grid or GridSpec()
    unmet = envelope_hypotheses(ctx)
    if ctx.k not in range_set(ctx.c.bff):
        unmet.append("k not in R(W)")
    if unmet:
        return Lemma25Check(False, None, unmet)
    rng = random.Random(grid.seed)
    ws = _axis(ctx.l_next, grid.n_w, rng)
    zs = _axis(ctx.x_next_len - 1, grid.n_z, rng)
    top = epsilon_prime(ctx)
    violations = []
    points = 0
    for w in ws:
        for z in zs:
            points += 1
            f, g = f_g_functions(ctx, w, z)
            if not f < g:
                violations.append(f"f >= g at ({w},{z})")
            if not g < top:
                violations.append(f"g({w},{z}) >= eps'")
            if w + 1 <= ctx.l_next and not g_value(ctx, w + 1, z) < g:
                violations.append(f"g not decreasing in w at ({w},{z})")
            if z + 1 <= ctx.x_next_len - 1 and not g_value(ctx, w, z + 1) > g:
                violations.append(f"g not increasing in z at ({w},{z})")
    C, D, E, F, G, H = g_coefficients(ctx)
    k = ctx.k
    S_next = ctx.c.S_at_L(ctx.i + 1, k)
    X, bk = ctx.x_next_len, ctx.bk_next
    lhs = ctx.L_prev * Fraction(X, bk)
    diagnostics = {
        "dz_positive": all(E * (F + G * w) > H * (C + D * w) for w in ws),
        "dw_negative": all(D * (F + H * z) < G * (C + E * z) for z in zs),
        "CG_gt_DF": C * G > D * F,
        # first sufficient condition; with L_{i-1} = 0 both sides vanish, hence >=
        "first_sufficient_prev": lhs >= D * ctx.S_prev,
        "first_sufficient_next": lhs >= D * S_next,
        "second_sufficient": ctx.eps_i * Fraction(X, bk) > D,
    }
    return Lemma25Check(True, not violations, [], points, violations, top, diagnostics)


# -- eps' trends ---------------------------------------------------------------

def _logsumexp(logs: Iterable[float]) -> float:
    logs = [v for v in logs if v != float("-inf")]
    if not logs:
        return float("-inf")
    top = max(logs)
    return top + math.log(sum(math.exp(v - top) for v in logs))


def epsilon_prime_at(c: Construction, i: int, k: int) -> Fraction:
    """Exact eps_i' for block length k, without reference to any n."""
    if c.l(i) < 1:
        raise DegenerateSchedule(f"l_{i} = 0: eps' undefined")
    li, xi, bk = c.l(i), c.x_len(i), c.b(i) ** k
    num = c.L(i - 1) + c.eps(i) * Fraction(li * xi, bk) + k * (li + 1) + c.x_len(i + 1)
    return num / (c.S_at_L(i, k) + Fraction(c.x_len(i + 1), c.b(i + 1) ** k))


def log_epsilon_prime(c: Construction, i: int, k: int) -> float:
    """ln eps_i' from logs of the individual terms; never forms the big values' quotient."""
    if c.l(i) < 1:
        raise DegenerateSchedule(f"l_{i} = 0: eps' undefined")
    li, xi = c.l(i), c.x_len(i)
    lb = math.log(c.b(i))
    num = [ln(c.l(j)) + ln(c.x_len(j)) for j in range(1, i) if c.l(j)]
    num += [ln(c.eps(i)) - k * lb + ln(li) + ln(xi), math.log(k) + ln(li + 1), ln(c.x_len(i + 1))]
    den = [ln(c.l(j)) + ln(c.x_len(j)) - k * math.log(c.b(j)) for j in range(1, i + 1) if c.l(j)]
    den.append(ln(c.x_len(i + 1)) - k * math.log(c.b(i + 1)))
    return _logsumexp(num) - _logsumexp(den)


@dataclass(frozen=True)
class EpsPrimeRow:
    i: int
    log_eps_prime: float
    log_junction_ratio: float
    junction_bound_ok: bool
    log_head_ratio: float


@dataclass
class EpsilonPrimeReport:
    """eps_i' and its two component ratios over a range of i.

    ``junction`` is k(l_i + 1) / (b_i^-k l_i |x_i|); ``head`` is
    (sum_{j <= i-2} l_j |x_j|) / (b_i^-k l_i |x_i|).  Both, and eps', should
    tend to 0.  ``tail_decreasing`` is the trend verdict (last half of the
    range); ``full_decreasing`` asks for strict decrease over every step.
    """

    k: int
    rows: list[EpsPrimeRow]
    skipped: list[str]
    tail_decreasing: bool
    full_decreasing: bool
    junction_tail_decreasing: bool
    head_tail_decreasing: bool
    junction_bounds_ok: bool

    @property
    def passed(self) -> bool:
        return self.tail_decreasing and self.junction_bounds_ok


def _decreasing(values: Sequence[float]) -> bool:
    return len(values) >= 2 and all(b < a for a, b in zip(values, values[1:]))


def epsilon_prime_trend(c: Construction, k: int, i_range: Iterable[int]) -> EpsilonPrimeReport:
    rows, skipped = [], []
    for i in i_range:
        li = c.l(i)
        if li < 1:
            skipped.append(f"i={i}: l_i = 0, ratio undefined")
            continue
        xi, b = c.x_len(i), c.b(i)
        lead = ln(li) + ln(xi) - k * math.log(b)
        junction = math.log(k) + ln(li + 1) - lead
        # the proof's own bound: ratio <= 2k b_i^k / |x_i|, exactly
        bound_ok = Fraction(k * (li + 1) * b**k, li * xi) <= Fraction(2 * k * b**k, xi)
        head = _logsumexp(ln(c.l(j)) + ln(c.x_len(j)) for j in range(1, i - 1) if c.l(j)) - lead
        rows.append(EpsPrimeRow(i, log_epsilon_prime(c, i, k), junction, bound_ok, head))
    eps = [r.log_eps_prime for r in rows]
    return EpsilonPrimeReport(
        k=k, rows=rows, skipped=skipped,
        tail_decreasing=_decreasing(tail_half(eps)),
        full_decreasing=_decreasing(eps),
        junction_tail_decreasing=_decreasing(tail_half([r.log_junction_ratio for r in rows])),
        head_tail_decreasing=_decreasing(tail_half([r.log_head_ratio for r in rows if r.log_head_ratio > float("-inf")])),
        junction_bounds_ok=all(r.junction_bound_ok for r in rows),
    )


# -- discrepancy harness -------------------------------------------------------

CSV_COLUMNS = ("n", "block", "N", "Q", "ratio", "abs_err", "eps_prime", "s_minus_q_over_s", "envelope", "pass")


def fmt_decimal(x: Fraction | None, digits: int = 20) -> str:
    if x is None:
        return ""
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def fmt_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def fmt_block(B: Sequence[int]) -> str:
    if all(d < 10 for d in B):
        return "".join(map(str, B))
    return ".".join(map(str, B)) + ("." if len(B) == 1 else "")


@dataclass(frozen=True)
class DiscrepancyRow:
    """One (checkpoint, block) cell; ``status`` is pass, fail or pre (hypotheses unmet)."""

    n: int
    block: tuple[int, ...]
    N: int
    Q: Fraction
    ratio: Fraction
    abs_err: Fraction
    eps_prime: Fraction | None
    s_minus_q_over_s: Fraction | None
    envelope: Fraction | None
    status: str
    note: str = ""

    def csv_fields(self) -> list[str]:
        return [str(self.n), fmt_block(self.block), str(self.N), fmt_fraction(self.Q),
                fmt_decimal(self.ratio), fmt_decimal(self.abs_err), fmt_decimal(self.eps_prime),
                fmt_decimal(self.s_minus_q_over_s), fmt_decimal(self.envelope), self.status]


@dataclass
class DiscrepancyReport:
    k: int
    rows: list[DiscrepancyRow]

    @property
    def passed(self) -> bool:
        return all(r.status != "fail" for r in self.rows)

    def failing(self) -> list[DiscrepancyRow]:
        return [r for r in self.rows if r.status == "fail"]

    def for_block(self, B: Sequence[int]) -> list[DiscrepancyRow]:
        B = tuple(B)
        return [r for r in self.rows if r.block == B]

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        lines += [",".join(r.csv_fields()) for r in self.rows]
        return "\n".join(lines) + "\n"


@dataclass
class _Checkpoint:
    n: int
    Q: Fraction
    ctx: SectionTwoContext | None
    eps_prime: Fraction | None
    sq: Fraction | None
    unmet: list[str]


def _prepare(c: Construction, k: int, n: int) -> _Checkpoint:
    Q = c.q_sum(n, k)
    try:
        ctx = section_two_context(c, k, n)
    except OutOfRange as exc:
        return _Checkpoint(n, Q, None, None, None, [str(exc)])
    unmet = envelope_hypotheses(ctx)
    if not ctx.S_n < 2 * Q:
        unmet.append("S/Q >= 2")
    if k > ctx.k_i:
        unmet.append(f"k > k_{ctx.i}")
    eps = None if ctx.l_i < 1 else epsilon_prime(ctx)
    sq = (ctx.S_n - Q) / ctx.S_n if ctx.S_n else None
    return _Checkpoint(n, Q, ctx, eps, sq, unmet)


def _row(c: Construction, cp: _Checkpoint, B: tuple[int, ...]) -> DiscrepancyRow:
    N = c.count_prefix(B, cp.n)
    ratio = N / cp.Q
    err = abs(ratio - 1)
    unmet = list(cp.unmet)
    if cp.ctx is not None and min_base(B) > cp.ctx.p_i:
        unmet.append(f"block base > p_{cp.ctx.i}")
    envelope = None
    if cp.eps_prime is not None and cp.sq is not None:
        envelope = 2 * cp.eps_prime + cp.sq
    if unmet:
        return DiscrepancyRow(cp.n, B, N, cp.Q, ratio, err, cp.eps_prime, cp.sq, envelope, "pre",
                              "pre-asymptotic: " + "; ".join(unmet))
    status = "pass" if err < envelope else "fail"
    return DiscrepancyRow(cp.n, B, N, cp.Q, ratio, err, cp.eps_prime, cp.sq, envelope, status)


def discrepancy_sweep(c: Construction, blocks: Sequence[Sequence[int]], k: int,
                      checkpoints: Sequence[int], threads: int = 1) -> DiscrepancyReport:
    """Exact N_n^Q, Q_n^(k) and the envelope 2 eps_i' + (S-Q)/S per (checkpoint, block).

    Rows are ordered checkpoint-major in input order whatever ``threads`` is.
    A row fails only if every hypothesis of the envelope holds and
    |N/Q - 1| is not below it.
    """
    if k < 1 or k not in range_set(c.bff):
        raise KOutOfRange(f"k={k} is not a positive element of R(W) = {range_set(c.bff)}")
    cps = list(checkpoints)
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise QNormalError("checkpoints must be strictly increasing")
    if cps and cps[0] < 1:
        raise OutOfRange("checkpoints must be >= 1")
    blocks = [tuple(B) for B in blocks]
    for B in blocks:
        if len(B) != k:
            raise QNormalError(f"block {B} has length {len(B)}, expected k={k}")
    if cps and cps[-1] + k - 1 > c.total_length:
        raise OutOfRange(f"checkpoint {cps[-1]} needs digits beyond L_{c.i_cap + 1}")
    prepared = [_prepare(c, k, n) for n in cps]
    cells = [(cp, B) for cp in prepared for B in blocks]
    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda cell: _row(c, *cell), cells))
    else:
        rows = [_row(c, cp, B) for cp, B in cells]
    return DiscrepancyReport(k, rows)


# -- Champernowne block lemmas -------------------------------------------------

@dataclass
class ChampernowneReport:
    cases: int = 0
    passes: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.cases == self.passes

    def record(self, ok: bool, label: str) -> None:
        self.cases += 1
        if ok:
            self.passes += 1
        else:
            self.failures.append(label)


def verify_champernowne_lemmas(b_max: int, w_max: int, budget: int = 10**7, b_min: int = 2) -> ChampernowneReport:
    """Exhaustive check of the count bounds and the normality of C_{b,w}.

    For every b_min <= b <= b_max and w <= w_max: each base-b block of each
    length k <= w satisfies (w-k+1) b^(w-k) <= N <= w b^(w-k), counted both by
    brute force and in closed form; blocks using digit b never occur; and
    C_{b,w} is (K/w, K, lambda_b)-normal for every K < w.
    """
    total = sum(w * b**w * (1 + w) for b in range(b_min, b_max + 1) for w in range(1, w_max + 1))
    if total > budget:
        raise Unfeasible(f"about {total} digit visits exceed budget {budget}")
    rep = ChampernowneReport()
    for b in range(b_min, b_max + 1):
        for w in range(1, w_max + 1):
            C = ChampernowneBlock(b, w)
            seq = tuple(C)
            for k in range(1, w + 1):
                grams = Counter(seq[j:j + k] for j in range(len(seq) - k + 1))
                lo, hi = (w - k + 1) * b ** (w - k), w * b ** (w - k)
                for B in itertools.product(range(b), repeat=k):
                    brute = grams[B]
                    ok = brute == C.count(B) and lo <= brute <= hi
                    rep.record(ok, f"b={b} w={w} B={B}: N={brute}, closed={C.count(B)}, bounds [{lo},{hi}]")
                foreign = sum(n for B, n in grams.items() if max(B) >= b)
                rep.record(foreign == 0, f"b={b} w={w} k={k}: digits >= b occur")
            for K in range(1, w):
                res = check_normality(seq, Fraction(K, w), K, uniform(b), alphabet_bound=b)
                rep.record(res.passed, f"b={b} w={w} K={K}: not (K/w, K, lambda_b)-normal")
    return rep


def sweep_checkpoints(c: Construction, count: int, upto: int | None = None, seed: int = 0) -> list[int]:
    """Deterministic checkpoints in [1, upto]: every L_i and its neighbours, filled up with seeded random n."""
    upto = c.L(c.i_cap) if upto is None else upto
    pts = {1, upto}
    for i in range(1, c.i_cap + 1):
        for d in (-1, 0, 1, 2):
            if 1 <= c.L(i) + d <= upto:
                pts.add(c.L(i) + d)
    rng = random.Random(seed)
    while len(pts) < min(count, upto):
        pts.add(rng.randint(1, upto))
    return sorted(pts)[:count] if len(pts) > count else sorted(pts)
