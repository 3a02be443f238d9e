from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from oracles import cantor_value, q_sum
from qnormal.cantor import (
    ConstantQ,
    ExplicitQ,
    RuleQ,
    ScheduleQ,
    digits_to_value,
    is_k_divergent_report,
    q_partial_sum,
    value_to_digits,
)
from qnormal.construction import theorem_4_1_instance
from qnormal.errors import BadBase, DigitOutOfRange, OutOfRange, Undefined


def test_constant_sum():
    assert q_partial_sum(ConstantQ(10), 7, 1).value == Fraction(7, 10)
    assert q_partial_sum(ConstantQ(3), 100, 4).value == Fraction(100, 81)


def test_rule_sum_frozen():
    assert q_partial_sum(RuleQ(lambda n: n + 1), 5, 2).value == Fraction(5, 14)


def test_bad_bases():
    with pytest.raises(BadBase):
        ConstantQ(1)
    with pytest.raises(BadBase):
        ExplicitQ([2, 1])
    with pytest.raises(BadBase):
        RuleQ(lambda n: 1).q(1)


def test_explicit_runs_and_undefined():
    Q = ExplicitQ([2, 2, 3, 3, 3, 5])
    assert list(Q.runs()) == [(1, 2, 2), (3, 3, 3), (6, 1, 5)]
    with pytest.raises(Undefined):
        q_partial_sum(Q, 5, 3)


def test_schedule_skips_empty_runs():
    Q = ScheduleQ(lambda i: (0 if i == 1 else i, i + 1))
    assert Q.prefix(6) == [3, 3, 4, 4, 4, 5]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(2, 9)), min_size=1, max_size=12),
       st.integers(1, 4), st.data())
def test_grouped_sum_matches_naive(runs, k, data):
    runs = sorted(runs, key=lambda r: r[1])
    qs = [b for length, b in runs for _ in range(length)]
    if len(qs) < k:
        return
    n = data.draw(st.integers(1, len(qs) - k + 1))
    assert q_partial_sum(ExplicitQ(qs), n, k).value == q_sum(qs, n, k)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(2, 50), min_size=5, max_size=200), st.integers(1, 4))
def test_float_mode_within_certified_bound(qs, k):
    if len(qs) < k:
        return
    n = len(qs) - k + 1
    exact = q_partial_sum(ExplicitQ(qs), n, k).value
    approx = q_partial_sum(ExplicitQ(qs), n, k, mode="float", prec=64)
    with mp.workprec(256):
        assert abs(approx.value - mpf(exact.numerator) / exact.denominator) <= approx.error + mpf(2) ** -200


def test_float_mode_large_n():
    c = theorem_4_1_instance(4, validate=False)
    n = c.L(3) + 12345
    exact = c.q_sum(n, 3)
    approx = q_partial_sum(c.basic_sequence(), n, 3, mode="float", prec=128)
    with mp.workprec(256):
        assert abs(approx.value - mpf(exact.numerator) / exact.denominator) <= approx.error + mpf(2) ** -100


def test_e_minus_two():
    Q = RuleQ(lambda n: n + 1)
    res = digits_to_value(Q, [1] * 20, 20)
    assert res.value == sum(Fraction(1, math.factorial(j)) for j in range(2, 22))
    with mp.workprec(200):
        assert abs(mp.e - 2 - mpf(res.value.numerator) / res.value.denominator) <= mpf(res.tail_bound.numerator) / res.tail_bound.denominator


def test_quarter_decimal():
    assert digits_to_value(ConstantQ(10), [2, 5, 0, 0], 4).value == Fraction(1, 4)
    assert value_to_digits(ConstantQ(10), Fraction(1, 4), 4).digits == (2, 5, 0, 0)


def test_zero_and_half():
    assert digits_to_value(ConstantQ(7), [0] * 5, 5).value == 0
    assert value_to_digits(RuleQ(lambda n: n + 1), 0, 6).digits == (0,) * 6
    assert value_to_digits(ConstantQ(2), Fraction(1, 2), 3).digits == (1, 0, 0)


def test_conversion_errors():
    with pytest.raises(DigitOutOfRange):
        digits_to_value(ConstantQ(10), [10], 1)
    with pytest.raises(OutOfRange):
        value_to_digits(ConstantQ(10), Fraction(3, 2), 2)
    with pytest.raises(OutOfRange):
        value_to_digits(ConstantQ(10), Fraction(-1, 2), 2)


def test_float_value_bound():
    res = digits_to_value(RuleQ(lambda n: n + 1), [1] * 30, 30, precision=80)
    exact = digits_to_value(RuleQ(lambda n: n + 1), [1] * 30, 30).value
    with mp.workprec(300):
        assert abs(res.value - mpf(exact.numerator) / exact.denominator) <= res.rounding_bound


basic_sequences = st.one_of(
    st.integers(2, 16).map(ConstantQ),
    st.lists(st.integers(2, 12), min_size=30, max_size=30).map(ExplicitQ),
    st.just(RuleQ(lambda n: n + 1)),
)


@settings(max_examples=200, deadline=None)
@given(basic_sequences, st.integers(1, 10**6), st.data(), st.integers(1, 30))
def test_round_trip(Q, den, data, n):
    x = Fraction(data.draw(st.integers(0, den - 1)), den)
    out = value_to_digits(Q, x, n)
    assert all(0 <= e < q for e, q in zip(out.digits, out.bases))
    back = digits_to_value(Q, out.digits, n)
    assert back.value == cantor_value(out.bases, out.digits)
    assert 0 <= x - back.value < back.tail_bound
    assert x == back.value + out.remainder * back.tail_bound
    again = value_to_digits(Q, back.value, n)
    assert again.digits == out.digits and again.remainder == 0


def test_divergence_constant():
    rep = is_k_divergent_report(ConstantQ(10), 2, (100, 1000, 10000))
    assert rep.values == (1, 10, 100) and rep.divergence_consistent


def test_divergence_rejects_fast_growing_bases():
    rep = is_k_divergent_report(RuleQ(lambda n: 2**n), 1, (5, 10, 20))
    assert not rep.divergence_consistent
    assert rep.values[-1] < 1


def test_divergence_canonical():
    c = theorem_4_1_instance(3, validate=False)
    rep = is_k_divergent_report(c.basic_sequence(), 3, (c.L(2), c.L(3)))
    assert rep.values[0] < rep.values[1]


def test_random_schedule_values_deterministic():
    rng = random.Random(7)
    qs = [rng.randint(2, 9) for _ in range(50)]
    a = q_partial_sum(ExplicitQ(qs), 40, 3, mode="float").value
    b = q_partial_sum(ExplicitQ(qs), 40, 3, mode="float").value
    assert a == b
