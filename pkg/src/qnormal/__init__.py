"""Exact tools for Q-normal numbers built from blocks, with checks of the bounds behind them."""

from __future__ import annotations

from .analysis import (
    DiscrepancyReport,
    SectionTwoContext,
    check_lemma_2_1,
    check_lemma_2_2,
    check_lemma_2_5,
    discrepancy_sweep,
    epsilon_prime,
    epsilon_prime_at,
    epsilon_prime_trend,
    f_g_functions,
    kappa,
    s_minus_q_bound_check,
    s_partial_sum,
    section_two_context,
    verify_champernowne_lemmas,
)
from .bff import BFFSpec, GoodSequence, check_w_good, range_set
from .blocks import (
    Block,
    ChampernowneBlock,
    ConcatSchedule,
    champernowne_block,
    concat,
    count_in_schedule,
    count_occurrences,
    make_block,
    materialize,
)
from .cantor import (
    ConstantQ,
    ExplicitQ,
    RuleQ,
    ScheduleQ,
    digits_to_value,
    is_k_divergent_report,
    q_partial_sum,
    value_to_digits,
)
from .construction import (
    Construction,
    count_prefix,
    cumulative_length,
    decompose,
    digit_stream,
    scaled_instance,
    theorem_4_1_instance,
)
from .errors import *  # noqa: F401,F403
from .weightings import CustomWeighting, UniformWeighting, check_normality, is_pb_uniform, uniform

__version__ = "0.1.0"
