from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnormal.analysis import (
    CSV_COLUMNS,
    GridSpec,
    check_lemma_2_1,
    check_lemma_2_2,
    check_lemma_2_5,
    discrepancy_sweep,
    epsilon_prime,
    epsilon_prime_at,
    epsilon_prime_trend,
    f_g_functions,
    first_long_index,
    g_coefficients,
    g_value,
    kappa,
    log_epsilon_prime,
    q_value,
    s_minus_q_bound_check,
    s_minus_q_sweep,
    s_partial_sum,
    section_two_context,
    sweep_checkpoints,
    verify_champernowne_lemmas,
)
from qnormal.blocks import champernowne_block
from qnormal.construction import scaled_instance, theorem_4_1_instance
from qnormal.errors import DegenerateSchedule, KOutOfRange, OutOfRange, QNormalError, Unfeasible

SCALED = scaled_instance(5)
CANON = theorem_4_1_instance(12, validate=False)
FLAT = theorem_4_1_instance(3, scale={"b": lambda i: 2, "w": lambda i: i + 1}, validate=False)


def test_s_at_L2_canonical():
    ctx = section_two_context(CANON, 1, CANON.L(2))
    assert s_partial_sum(ctx) == 2048
    assert ctx.m == 0 and ctx.S_n == ctx.S_Li


def test_constant_base_s_equals_q():
    for n in (1, 7, FLAT.L(2), FLAT.L(2) + 333, FLAT.L(3) - 1):
        for k in (1, 2):
            ctx = section_two_context(FLAT, k, n)
            assert s_partial_sum(ctx) == q_value(ctx) == Fraction(n, 2**k)
            chk = s_minus_q_bound_check(ctx)
            assert chk.diff == 0 and chk.passed


def test_context_errors():
    with pytest.raises(QNormalError):
        section_two_context(SCALED, 0, 600)
    with pytest.raises(OutOfRange):
        section_two_context(SCALED, 1, 0)


def test_first_long_index():
    assert first_long_index(SCALED, 1) == 1
    assert first_long_index(SCALED, 2) == 2
    assert first_long_index(SCALED, 64) == 3


def test_s_minus_q_scaled_k2():
    cps = sweep_checkpoints(SCALED, 300, upto=SCALED.L(4))
    sweep = s_minus_q_sweep(SCALED, 2, cps)
    assert sweep.passed
    assert all(ch.r == 0 for ch in sweep.checks)


def test_s_minus_q_sweep_needs_increasing():
    with pytest.raises(QNormalError):
        s_minus_q_sweep(SCALED, 1, [600, 600])


def _kappa_by_hand(c, k, n):
    # an independent transcription from the raw parameters
    i = max(j for j in range(0, c.i_cap + 2) if c.L(j) <= n)
    m = n - c.L(i)
    alpha, beta = divmod(m, c.x_len(i + 1))
    b, bn = Fraction(c.b(i)) ** k, Fraction(c.b(i + 1)) ** k
    return (c.L(i - 1) + k * (c.l(i) + 1) + (1 + c.eps(i)) * c.l(i) * c.x_len(i) / b
            + ((1 + c.eps(i + 1)) * c.x_len(i + 1) / bn + k) * alpha + beta)


def test_kappa_dual_transcription():
    for n in (512, 513, 40000, SCALED.L(3), SCALED.L(3) + 10**6 + 3):
        for k in (1, 2, 3):
            assert kappa(section_two_context(SCALED, k, n)) == _kappa_by_hand(SCALED, k, n)


def test_kappa_alpha_beta_zero():
    ctx = section_two_context(SCALED, 2, SCALED.L(3))
    assert ctx.alpha == ctx.beta == 0
    expected = ctx.L_prev + 2 * (ctx.l_i + 1) + (1 + ctx.eps_i) * Fraction(ctx.l_i * ctx.x_len, ctx.b_i**2)
    assert kappa(ctx) == expected


@pytest.mark.parametrize("n_off", [0, 17, 2 * 524288 + 17, 30 * 524288 + 1001])
def test_lemma_2_1_and_2_2_scaled_i3(n_off):
    n = SCALED.L(3) + n_off
    ctx = section_two_context(SCALED, 2, n)
    assert ctx.i == 3
    c1 = check_lemma_2_1(ctx, (0, 1))
    c2 = check_lemma_2_2(ctx, (0, 1))
    assert c1.passed and c2.passed
    assert set(c1.margins) == {"x_i_lower", "x_i_upper", "tail_lower", "tail_upper"}
    assert all(v >= 0 for v in c2.margins.values())


def test_lemma_2_1_tiny_tail():
    ctx = section_two_context(SCALED, 2, SCALED.L(3) + 1)
    assert ctx.alpha == 0 and ctx.m < 2
    res = check_lemma_2_1(ctx, (1, 1))
    assert res.passed and res.margins["tail_lower"] == 0


def test_lemma_checks_report_unmet_hypotheses():
    ctx = section_two_context(SCALED, 3, SCALED.L(2) + 5)
    assert check_lemma_2_1(ctx, (0, 1, 2)).passed is None  # k = 3 > k_2
    ctx = section_two_context(SCALED, 2, SCALED.L(2) + 5)
    assert check_lemma_2_2(ctx, (0, 3)).passed is None  # needs base 4 > p_2
    with pytest.raises(QNormalError):
        check_lemma_2_1(ctx, (0,))


CTX4 = section_two_context(SCALED, 1, SCALED.L(4) + 12345)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, CTX4.l_next), st.integers(0, CTX4.x_next_len - 1))
def test_f_below_g(w, z):
    f, g = f_g_functions(CTX4, w, z)
    assert f < g


def test_g_corners_and_limit():
    C, D, E, F, G, H = g_coefficients(CTX4)
    assert g_value(CTX4, 0, 0) == C / F
    assert g_value(CTX4, 0, CTX4.x_next_len) == epsilon_prime(CTX4)
    far = g_value(CTX4, 10**9, 0)
    assert abs(far - D / G) < Fraction(1, 10**6)
    with pytest.raises(QNormalError):
        f_g_functions(CTX4, -1, 0)


def test_g_monotone_steps():
    for w, z in [(0, 0), (5, 100), (CTX4.l_next - 1, CTX4.x_next_len - 2)]:
        g = g_value(CTX4, w, z)
        assert g_value(CTX4, w + 1, z) < g < g_value(CTX4, w, z + 1)


def test_lemma_2_5_scaled_i4():
    res = check_lemma_2_5(CTX4, GridSpec(10, 10))
    assert res.applicable and res.passed and res.points >= 100
    assert res.eps_prime == epsilon_prime(CTX4)
    assert res.diagnostics["first_sufficient_prev"]
    assert not res.diagnostics["first_sufficient_next"]


def test_lemma_2_5_hypotheses_unmet_at_small_i():
    ctx = section_two_context(SCALED, 1, 5)
    assert ctx.i == 1
    res = check_lemma_2_5(ctx)
    assert not res.applicable and res.passed is None
    assert "l_1 = 0" in res.unmet


def test_epsilon_prime_consistency():
    for i in (2, 3, 4):
        ctx = section_two_context(SCALED, 2, SCALED.L(i))
        assert epsilon_prime(ctx) == epsilon_prime_at(SCALED, i, 2)
        assert log_epsilon_prime(SCALED, i, 2) == pytest.approx(math.log(epsilon_prime(ctx)), rel=1e-12)


def test_epsilon_prime_skips_zero_l():
    with pytest.raises(DegenerateSchedule):
        epsilon_prime_at(SCALED, 1, 1)
    rep = epsilon_prime_trend(SCALED, 1, range(1, 5))
    assert rep.skipped and rep.skipped[0].startswith("i=1")
    assert [r.i for r in rep.rows] == [2, 3, 4]


def test_epsilon_prime_canonical_tail_trend():
    for k in range(1, 7):
        rep = epsilon_prime_trend(CANON, k, range(3, 13))
        assert rep.passed and rep.junction_tail_decreasing and rep.head_tail_decreasing


def test_epsilon_prime_canonical_k1_head_rises():
    # frozen: log eps' at i = 3, 4 for k = 1; the first step goes up
    rep = epsilon_prime_trend(CANON, 1, range(3, 9))
    assert rep.rows[0].log_eps_prime < rep.rows[1].log_eps_prime
    assert not rep.full_decreasing


def test_discrepancy_pre_row_at_one():
    rep = discrepancy_sweep(SCALED, [(0,), (1,)], 1, [1])
    zero, one = rep.rows
    assert one.N == 0 and one.ratio == 0 and one.status == "pre"
    assert zero.N == 1 and zero.status == "pre" and "pre-asymptotic" in zero.note


def test_discrepancy_csv_columns():
    rep = discrepancy_sweep(SCALED, [(0,), (1,)], 1, [512, 600])
    lines = rep.to_csv().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 5
    assert lines[1].startswith("512,0,256,256/1,1,0,")
    assert lines[1].endswith(",pass")


def test_discrepancy_thread_independence():
    cps = [512, 1000, 50000, SCALED.L(3), SCALED.L(3) + 999]
    blocks = list(itertools.product(range(2), repeat=2))
    a = discrepancy_sweep(SCALED, blocks, 2, cps, threads=1).to_csv()
    b = discrepancy_sweep(SCALED, blocks, 2, cps, threads=4).to_csv()
    assert a == b


def test_discrepancy_argument_errors():
    with pytest.raises(KOutOfRange):
        discrepancy_sweep(SCALED, [()], 0, [5])
    with pytest.raises(QNormalError):
        discrepancy_sweep(SCALED, [(0,)], 1, [10, 5])
    with pytest.raises(QNormalError):
        discrepancy_sweep(SCALED, [(0, 1)], 1, [10])
    with pytest.raises(OutOfRange):
        discrepancy_sweep(SCALED, [(0,)], 1, [SCALED.total_length + 1])


def test_discrepancy_flat_schedule_tends_to_one():
    c = theorem_4_1_instance(4, scale={"b": lambda i: 2, "w": lambda i: 6}, validate=False)
    errs = [abs(c.count_prefix((0,), n) / c.q_sum(n, 1) - 1) for n in (c.L(2), c.L(3), c.L(4))]
    assert errs == [0, 0, 0]


def test_champernowne_lemmas_small():
    rep = verify_champernowne_lemmas(3, 6)
    assert rep.passed and rep.cases > 1000


def test_champernowne_bounds_b2_w3():
    N = champernowne_block(2, 3).count((0, 1))
    assert (3 - 2 + 1) * 2 ** (3 - 2) <= N <= 3 * 2 ** (3 - 2)


def test_champernowne_budget():
    with pytest.raises(Unfeasible):
        verify_champernowne_lemmas(10, 10)


def test_sweep_checkpoints_deterministic():
    a = sweep_checkpoints(SCALED, 200, upto=SCALED.L(4))
    assert a == sweep_checkpoints(SCALED, 200, upto=SCALED.L(4))
    assert len(a) == 200 and a == sorted(set(a))
    assert SCALED.L(3) in a and 1 in a


def test_log_epsilon_prime_matches_exact_canonical():
    c = theorem_4_1_instance(6, validate=False)
    for i in (3, 4):
        for k in (1, 3):
            exact = epsilon_prime_at(c, i, k)
            direct = math.log(exact.numerator) - math.log(exact.denominator)
            assert log_epsilon_prime(c, i, k) == pytest.approx(direct, rel=1e-12)
    # the first step of the canonical range goes up, in exact arithmetic too
    assert epsilon_prime_at(c, 4, 1) > epsilon_prime_at(c, 3, 1)
