"""Command line front end: ``qnormal digits|discrepancy|verify|convert``.

Exit codes: 0 success, 1 a verification failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from fractions import Fraction
from pathlib import Path

from mpmath import mp, mpf, nstr

from . import analysis
from .bff import check_w_good
from .cantor import ConstantQ, ExplicitQ, RuleQ, digits_to_value, value_to_digits
from .config import Rule, RunConfig, ScheduleConfig, parse_blocks, parse_config
from .construction import Construction, theorem_4_1_instance
from .errors import QNormalError

SUITES = ("champernowne", "wgood", "lemma23", "sandwich", "lemma25", "epsprime")


class UsageError(QNormalError):
    pass


def _load_schedule(name: str) -> ScheduleConfig:
    path = Path(name)
    if path.is_file():
        return parse_config(path.read_text()).schedule
    return ScheduleConfig.from_preset(name)


def _run_config(args) -> RunConfig:
    if getattr(args, "config", None):
        run = parse_config(Path(args.config).read_text())
    else:
        run = RunConfig(_load_schedule(args.schedule))
    if getattr(args, "i_cap", None) is not None:
        run.schedule.i_cap = args.i_cap
    for attr in ("k", "threads", "output", "budget", "precision"):
        v = getattr(args, attr, None)
        if v is not None:
            setattr(run, attr, v)
    if getattr(args, "blocks", None):
        run.blocks = parse_blocks(args.blocks)
    if getattr(args, "checkpoints", None):
        run.checkpoints = [t.strip() for t in args.checkpoints.split(",") if t.strip()]
    return run


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _threads(n: int | None) -> int:
    return n if n else (os.cpu_count() or 1)


# -- commands ------------------------------------------------------------------

def cmd_digits(args) -> int:
    if args.start < 1:
        raise UsageError("positions are 1-based: --from must be >= 1")
    if args.count < 0:
        raise UsageError("--count must be >= 0")
    if args.count == 0:
        return 0
    run = _run_config(args)
    c = run.schedule.build()
    stop = args.start + args.count - 1
    while c.total_length < stop:
        c.i_cap += 1
    digits = c.digit_stream(args.start, args.count)
    lines = [" ".join(map(str, digits[j:j + 64])) for j in range(0, len(digits), 64)]
    _emit("\n".join(lines) + "\n", run.output)
    return 0


def cmd_discrepancy(args) -> int:
    run = _run_config(args)
    c = run.schedule.build()
    report = analysis.discrepancy_sweep(c, run.resolve_blocks(), run.k, run.resolve_checkpoints(c),
                                        threads=_threads(run.threads))
    _emit(report.to_csv(), run.output)
    if report.passed:
        return 0
    for r in report.failing():
        print(f"fail: n={r.n} block={analysis.fmt_block(r.block)} |ratio-1|={analysis.fmt_decimal(r.abs_err)} "
              f"envelope={analysis.fmt_decimal(r.envelope)}", file=sys.stderr)
    return 1


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _suite_champernowne(args) -> tuple[int, int]:
    rep = analysis.verify_champernowne_lemmas(args.bmax, args.wmax)
    for f in rep.failures[:20]:
        print(f"champernowne: {f}", file=sys.stderr)
    return rep.cases, rep.passes


def _suite_wgood(args) -> tuple[int, int]:
    c = _load_schedule(args.schedule or "thm4.1").build(validate=False)
    cases = passes = 0
    for k in _int_list(args.k):
        rep = check_w_good(c.bff, c.good, args.imax, k)
        for name, ok in rep.trends.items():
            cases += 1
            passes += ok
            if not ok:
                print(f"wgood: k={k} ratio {name} trend fails", file=sys.stderr)
    return cases, passes


def _scaled(args) -> Construction:
    return _load_schedule(args.schedule or "scaled").build()


def _suite_lemma23(args) -> tuple[int, int]:
    c = _scaled(args)
    cps = analysis.sweep_checkpoints(c, args.points)
    cases = passes = 0
    for k in _int_list(args.k):
        sweep = analysis.s_minus_q_sweep(c, k, cps)
        for ch in sweep.checks:
            cases += 1
            passes += ch.passed
        cases += 1
        passes += sweep.monotone
        if not sweep.passed:
            print(f"lemma23: k={k} fails", file=sys.stderr)
    return cases, passes


def _suite_sandwich(args) -> tuple[int, int]:
    c = _scaled(args)
    cps = analysis.sweep_checkpoints(c, min(args.points, 100))
    cases = passes = 0
    for k in _int_list(args.k):
        for n in cps:
            ctx = analysis.section_two_context(c, k, n)
            for B in itertools.product(range(2), repeat=k):
                for check in (analysis.check_lemma_2_1(ctx, B), analysis.check_lemma_2_2(ctx, B)):
                    if check.passed is None:
                        continue
                    cases += 1
                    passes += check.passed
                    if not check.passed:
                        print(f"sandwich: n={n} B={B} {check.name} fails", file=sys.stderr)
    return cases, passes


def _suite_lemma25(args) -> tuple[int, int]:
    c = _scaled(args)
    cases = passes = 0
    for k in _int_list(args.k):
        for i in range(2, c.i_cap + 1):
            ctx = analysis.section_two_context(c, k, c.L(i))
            res = analysis.check_lemma_2_5(ctx)
            if not res.applicable:
                print(f"lemma25: i={i} k={k} hypotheses unmet: {'; '.join(res.unmet)}", file=sys.stderr)
                continue
            cases += 1
            passes += res.passed
            if not res.passed:
                print(f"lemma25: i={i} k={k}: {res.violations[:3]}", file=sys.stderr)
    return cases, passes


def _suite_epsprime(args) -> tuple[int, int]:
    c = theorem_4_1_instance(args.imax, validate=False)
    cases = passes = 0
    for k in _int_list(args.k):
        rep = analysis.epsilon_prime_trend(c, k, range(3, args.imax + 1))
        for ok, label in ((rep.tail_decreasing, "eps' tail trend"),
                          (rep.junction_bounds_ok, "junction ratio bound")):
            cases += 1
            passes += ok
            if not ok:
                print(f"epsprime: k={k} {label} fails", file=sys.stderr)
    return cases, passes


_SUITE_FUNCS = {
    "champernowne": _suite_champernowne,
    "wgood": _suite_wgood,
    "lemma23": _suite_lemma23,
    "sandwich": _suite_sandwich,
    "lemma25": _suite_lemma25,
    "epsprime": _suite_epsprime,
}


def cmd_verify(args) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    lines = ["suite,cases,passes,failures"]
    ok = True
    for name in names:
        cases, passes = _SUITE_FUNCS[name](args)
        lines.append(f"{name},{cases},{passes},{cases - passes}")
        ok = ok and cases == passes
    _emit("\n".join(lines) + "\n", args.output)
    return 0 if ok else 1


def parse_q(text: str):
    kind, _, arg = text.partition(":")
    if not arg:
        raise UsageError(f"--q needs KIND:ARG, got {text!r}")
    if kind == "const":
        return ConstantQ(int(arg))
    if kind == "rule":
        try:
            rule = Rule(arg, names=("n",))
        except QNormalError as exc:
            raise UsageError(str(exc)) from None
        return RuleQ(lambda n: rule(n=n), name=arg)
    if kind == "list":
        return ExplicitQ(_int_list(arg))
    if kind == "schedule":
        return _load_schedule(arg).build().basic_sequence()
    raise UsageError(f"unknown basic sequence kind {kind!r}; use const, rule, list or schedule")


def cmd_convert(args) -> int:
    Q = parse_q(args.q)
    if (args.value is None) == (args.digits is None):
        raise UsageError("give exactly one of --value and --digits")
    if args.value is not None:
        try:
            x = Fraction(args.value)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad rational {args.value!r}") from None
        if args.n is None:
            raise UsageError("--value needs --n")
        out = value_to_digits(Q, x, args.n)
        _emit(" ".join(map(str, out.digits)) + "\n", args.output)
        return 0
    digits = [int(t) for t in args.digits.replace(",", " ").split()]
    n = len(digits) if args.n is None else args.n
    res = digits_to_value(Q, digits, n)
    text = f"{res.value.numerator}/{res.value.denominator}\n"
    if args.precision:
        with mp.workprec(args.precision):
            approx = mpf(res.value.numerator) / mpf(res.value.denominator)
            text += nstr(approx, max(1, int(args.precision * 0.30103))) + "\n"
    _emit(text, args.output)
    return 0


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qnormal", description="Q-normal number constructions: digits, counts and checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def schedule_opts(sp, default):
        sp.add_argument("--schedule", default=default,
                        help="built-in schedule (thm4.1, scaled) or a config file (default: %(default)s)")
        sp.add_argument("--config", help="run config file; flags given explicitly override it")
        sp.add_argument("--i-cap", type=int, dest="i_cap", help="largest index of a full term")
        sp.add_argument("--output", help="write to this file instead of stdout")
        sp.add_argument("--threads", type=int, help="worker threads (default: all cores)")

    d = sub.add_parser("digits", help="print a window of digits of x")
    schedule_opts(d, "thm4.1")
    d.add_argument("--from", dest="start", type=int, required=True, help="first position (1-based)")
    d.add_argument("--count", type=int, required=True, help="number of digits")
    d.set_defaults(func=cmd_digits)

    r = sub.add_parser("discrepancy", help="CSV of N_n/Q_n against the envelope")
    schedule_opts(r, "scaled")
    r.add_argument("--k", type=int, help="block length (default 1)")
    r.add_argument("--blocks", help="comma-separated blocks, e.g. 00,01 (default: all base-2 blocks of length k)")
    r.add_argument("--checkpoints", help="comma-separated n or L<i> tokens (default: L2..L<i_cap>)")
    r.add_argument("--precision", type=int, help="bits of precision for float output")
    r.add_argument("--budget", type=int, help="evaluation budget for exhaustive checks")
    r.set_defaults(func=cmd_discrepancy)

    v = sub.add_parser("verify", help="run verification suites; prints suite,cases,passes,failures")
    v.add_argument("--suite", required=True, choices=SUITES + ("all",))
    v.add_argument("--schedule", help="schedule for wgood (default thm4.1) or lemma suites (default scaled)")
    v.add_argument("--bmax", type=int, default=3)
    v.add_argument("--wmax", type=int, default=6)
    v.add_argument("--imax", type=int, default=12)
    v.add_argument("--k", default="1,2,3", help="comma-separated block lengths")
    v.add_argument("--points", type=int, default=1000, help="checkpoints for the lemma suites")
    v.add_argument("--output")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("convert", help="digits <-> rational value under a basic sequence")
    c.add_argument("--q", required=True, help="const:B | rule:EXPR-in-n | list:q1,q2,... | schedule:NAME")
    c.add_argument("--value", help="rational p/q in [0, 1)")
    c.add_argument("--digits", help="space- or comma-separated digits")
    c.add_argument("--n", type=int, help="number of digits")
    c.add_argument("--precision", type=int, help="also print a decimal at this many bits")
    c.add_argument("--output")
    c.set_defaults(func=cmd_convert)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"qnormal: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
