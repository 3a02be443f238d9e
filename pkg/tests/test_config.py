from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnormal.blocks import ChampernowneBlock, make_block
from qnormal.config import (
    Rule,
    RunConfig,
    ScheduleConfig,
    format_block,
    parse_block,
    parse_blocks,
    parse_config,
    resolve_checkpoint,
    serialize_config,
)
from qnormal.construction import scaled_instance, theorem_4_1_instance
from qnormal.errors import ConfigError, QNormalError
from qnormal.weightings import UniformWeighting

SAMPLE = """\
# desk-size variant with a tweak
schedule = scaled
l_rule = i^3 + 1
x_rule[1] = B(2, 0, 1)
k = 2
blocks = 00,01,10,11
checkpoints = L2, L3, 1000
precision = 96
threads = 3
"""


def test_rule_basics():
    assert Rule("i^3")(i=4) == 64
    assert Rule("1/i")(i=4) == Fraction(1, 4)
    assert Rule("4/2")(i=1) == 2 and isinstance(Rule("4/2")(i=1), int)
    assert Rule("max(i - 2, 1)")(i=1) == 1
    assert Rule("C(i, 2*i)")(i=3) == ChampernowneBlock(3, 6)
    assert Rule("B(3, 0, 2)")(i=1) == make_block(3, (0, 2))
    assert isinstance(Rule("uniform(b)")(i=1, b=5), UniformWeighting)


@pytest.mark.parametrize("text", [
    "__import__('os').system('true')",
    "i.__class__",
    "open('x')",
    "[i for i in range(3)]",
    "lambda: 1",
    "1.5 * i",
    "'abc'",
    "i if i else 0",
    "j + 1",
    "min(i, key=1)",
])
def test_rule_rejects_unsafe_or_unknown(text):
    with pytest.raises(QNormalError):
        Rule(text)


def test_rule_limits():
    with pytest.raises(QNormalError):
        Rule("2^(10^9)")(i=1)
    with pytest.raises(QNormalError):
        Rule("i / (i - 1)")(i=1)
    with pytest.raises(QNormalError):
        Rule("2^(1/2)")(i=1)


def test_presets_build_the_library_instances():
    c = ScheduleConfig.from_preset("thm4.1", i_cap=4).build(validate=False)
    ref = theorem_4_1_instance(4, validate=False)
    assert c.canonical
    assert [c.L(i) for i in range(5)] == [ref.L(i) for i in range(5)]
    s = ScheduleConfig.from_preset("scaled").build()
    ref = scaled_instance(5)
    assert not s.canonical
    assert [s.L(i) for i in range(7)] == [ref.L(i) for i in range(7)]
    assert s.x(1) == make_block(2, (0, 1)) and s.eps(1) == Fraction(3, 5)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        ScheduleConfig.from_preset("nope")
    with pytest.raises(ConfigError) as err:
        parse_config("k = 1\nschedule = nope\n")
    assert err.value.line == 2


def test_parse_sample():
    run = parse_config(SAMPLE)
    assert run.k == 2 and run.precision == 96 and run.threads == 3
    assert run.blocks == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert run.checkpoints == ["L2", "L3", "1000"]
    c = run.schedule.build()
    assert c.l(2) == 9 and c.l(1) == 0 and c.x(1) == make_block(2, (0, 1))
    assert run.resolve_checkpoints(c) == [c.L(2), c.L(3), 1000]


@pytest.mark.parametrize("text,line", [
    ("schedule = scaled\nk = zero\n", 2),
    ("schedule = scaled\n\n# c\nbogus = 1\n", 4),
    ("schedule = scaled\nl_rule = i^\n", 2),
    ("schedule = scaled\nk = 1\nk = 2\n", 3),
    ("schedule = scaled\njust words\n", 2),
    ("schedule = scaled\nk[2] = 1\n", 2),
    ("schedule = scaled\ncheckpoints = L2, Lx\n", 2),
    ("schedule = scaled\nblocks = 0a\n", 2),
    ("schedule = scaled\nk = 0\n", 2),
    ("schedule = scaled\nl_rule = \n", 2),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}:")


def test_missing_rules_without_preset():
    with pytest.raises(ConfigError) as err:
        parse_config("l_rule = i\n")
    assert "missing rules" in str(err.value)


def test_invariant_violation_at_build():
    run = parse_config("schedule = scaled\nl_rule = 10 - i\n")
    with pytest.raises(ConfigError):
        run.schedule.build()


def test_wrong_rule_type_reports_line():
    run = parse_config("schedule = scaled\nx_rule = i\n")
    with pytest.raises(ConfigError) as err:
        run.schedule.build()
    assert err.value.line == 2


def test_round_trip_sample():
    run = parse_config(SAMPLE)
    text = serialize_config(run)
    again = parse_config(text)
    assert again == run
    assert serialize_config(again) == text


def test_round_trip_full_rules():
    text = serialize_config(parse_config(SAMPLE))
    full = ScheduleConfig(dict(parse_config(SAMPLE).schedule.rules), {}, 4, 3, None)
    run = RunConfig(full, k=1, blocks=[(0, 12)], checkpoints=["7"], output="out.csv", budget=99)
    assert parse_config(serialize_config(run)) == run
    assert text != serialize_config(run)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.lists(st.lists(st.integers(0, 15), min_size=1, max_size=4), max_size=5),
       st.lists(st.integers(1, 10**12), max_size=5), st.integers(8, 512), st.sampled_from(["scaled", "thm4.1"]))
def test_round_trip_random(k, blocks, cps, precision, preset):
    run = RunConfig(ScheduleConfig.from_preset(preset), k=k,
                    blocks=[tuple(B) for B in blocks] or None,
                    checkpoints=[str(n) for n in cps] or None, precision=precision)
    assert parse_config(serialize_config(run)) == run


def test_block_parsing():
    assert parse_block("0110") == (0, 1, 1, 0)
    assert parse_block("1.12.3") == (1, 12, 3)
    assert parse_block("10.") == (10,)
    assert format_block((10,)) == "10." and format_block((1, 0)) == "10"
    assert parse_blocks("0, 1 ,01") == [(0,), (1,), (0, 1)]
    for bad in ("", "x", "1.-2"):
        with pytest.raises(QNormalError):
            parse_block(bad)


def test_resolve_checkpoint():
    c = scaled_instance(3)
    assert resolve_checkpoint("L3", c) == c.L(3)
    assert resolve_checkpoint(" 42 ", c) == 42
    with pytest.raises(QNormalError):
        resolve_checkpoint("Lz", c)
