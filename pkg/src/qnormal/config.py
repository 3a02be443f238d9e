"""Flat ``key = value`` run configuration and a small safe rule language.

Rules are arithmetic expressions in the index ``i`` (and ``b``, the value of
``b_rule`` at ``i``).  Supported: integers, ``+ - * / // % ** ^``, ``min``,
``max``, ``C(b, w)`` (Champernowne block), ``B(base, d1, d2, ...)`` (literal
block) and ``uniform(b)``.  Division is exact.  ``^`` means power.

Example::

    # desk-size variant
    schedule = scaled
    l_rule = i^3
    x_rule[1] = B(2, 0, 1)
    k = 2
    checkpoints = L2, L3, L4
"""

from __future__ import annotations

import ast
import itertools
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .bff import BFFSpec, GoodSequence
from .blocks import Block, ChampernowneBlock
from .construction import Construction
from .errors import BFFInvariantError, ConfigError, QNormalError
from .weightings import DEFAULT_BUDGET, UniformWeighting

RULE_KEYS = ("x_rule", "b_rule", "l_rule", "eps_rule", "k_rule", "p_rule", "mu_rule")
MAX_EXPONENT = 100_000

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: lambda a, b: Fraction(a) / Fraction(b),
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
    ast.Pow: None,
}


def _power(a, e):
    if isinstance(e, Fraction):
        if e.denominator != 1:
            raise QNormalError("non-integer exponent")
        e = e.numerator
    if not isinstance(e, int):
        raise QNormalError("exponent must be an integer")
    if abs(e) > MAX_EXPONENT:
        raise QNormalError(f"exponent {e} too large")
    if e < 0:
        return Fraction(a) ** e
    return a**e


def _normalize(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


def _make_block(base, *digits):
    return Block(int(base), [int(d) for d in digits])


_FUNCS: dict[str, Callable] = {
    "min": min,
    "max": max,
    "C": lambda b, w: ChampernowneBlock(int(b), int(w)),
    "B": _make_block,
    "uniform": lambda b: UniformWeighting(int(b)),
}


class Rule:
    """A parsed expression; ``Rule(text)(i=3)`` evaluates it."""

    def __init__(self, text: str, names: tuple[str, ...] = ("i", "b")):
        self.text = text.strip()
        self.names = names
        try:
            tree = ast.parse(self.text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise QNormalError(f"cannot parse {self.text!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def __repr__(self) -> str:
        return f"Rule({self.text!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Rule) and other.text == self.text

    def __hash__(self) -> int:
        return hash(self.text)

    def uses(self, name: str) -> bool:
        return any(isinstance(n, ast.Name) and n.id == name for n in ast.walk(self._tree))

    def _check(self, node) -> None:
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, int) or isinstance(node.value, bool):
                raise QNormalError(f"only integer literals allowed, got {node.value!r}")
        elif isinstance(node, ast.Name):
            if node.id not in self.names:
                raise QNormalError(f"unknown name {node.id!r}; allowed: {', '.join(self.names)}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise QNormalError(f"operator {type(node.op).__name__} not allowed")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise QNormalError("only unary + and - allowed")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
                raise QNormalError(f"unknown function in {self.text!r}; allowed: {', '.join(_FUNCS)}")
            for a in node.args:
                self._check(a)
        else:
            raise QNormalError(f"syntax not allowed in {self.text!r}")

    def __call__(self, **env):
        return _normalize(self._eval(self._tree, env))

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            return env[node.id]
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = self._eval(node.left, env), self._eval(node.right, env)
            if isinstance(node.op, ast.Pow):
                return _normalize(_power(a, b))
            if isinstance(node.op, (ast.Div, ast.FloorDiv, ast.Mod)) and b == 0:
                raise QNormalError(f"division by zero in {self.text!r}")
            return _normalize(_BINOPS[type(node.op)](a, b))
        args = [self._eval(a, env) for a in node.args]
        return _FUNCS[node.func.id](*args)


_CANONICAL_RULES = {
    "x_rule": "C(i, i^2)",
    "b_rule": "i",
    "l_rule": "i^(3*i)",
    "eps_rule": "1/i",
    "k_rule": "i",
    "p_rule": "b",
    "mu_rule": "uniform(b)",
}
_CANONICAL_FIRST = {
    "x_rule": "B(2, 0, 1)",
    "b_rule": "2",
    "l_rule": "0",
    "eps_rule": "3/5",
    "k_rule": "1",
    "p_rule": "2",
    "mu_rule": "uniform(2)",
}
PRESETS = {
    "thm4.1": dict(_CANONICAL_RULES),
    "scaled": dict(_CANONICAL_RULES, l_rule="i^3", x_rule="C(i, 2*i)"),
}
DEFAULT_I_CAP = {"thm4.1": 3, "scaled": 5}


@dataclass
class ScheduleConfig:
    """Rule texts for every parameter sequence, plus per-index overrides."""

    rules: dict[str, str]
    overrides: dict[tuple[str, int], str] = field(default_factory=dict)
    k_limit: int | None = None
    i_cap: int = 5
    preset: str | None = None
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_preset(cls, name: str, i_cap: int | None = None) -> "ScheduleConfig":
        if name not in PRESETS:
            raise ConfigError(f"unknown schedule {name!r}; built-in: {', '.join(PRESETS)}")
        overrides = {(key, 1): text for key, text in _CANONICAL_FIRST.items()}
        return cls(dict(PRESETS[name]), overrides, None,
                   DEFAULT_I_CAP[name] if i_cap is None else i_cap, name)

    @property
    def canonical(self) -> bool:
        ref = ScheduleConfig.from_preset("thm4.1")
        return self.rules == ref.rules and self.overrides == ref.overrides and self.k_limit is None

    def _rule(self, key: str, i: int) -> Rule:
        text = self.overrides.get((key, i), self.rules[key])
        line = self.lines.get((key, i), self.lines.get(key))
        try:
            rule = Rule(text)
        except QNormalError as exc:
            raise ConfigError(f"{key}: {exc}", line) from None
        if key == "b_rule" and rule.uses("b"):
            raise ConfigError("b_rule cannot refer to b", line)
        return rule

    def evaluate(self, key: str, i: int):
        line = self.lines.get((key, i), self.lines.get(key))
        try:
            env = {"i": i}
            if key != "b_rule":
                env["b"] = self.evaluate("b_rule", i)
            return self._rule(key, i)(**env)
        except ConfigError:
            raise
        except (QNormalError, TypeError, ValueError, OverflowError) as exc:
            raise ConfigError(f"{key} at i={i}: {exc}", line) from None

    def build(self, validate: bool = True) -> Construction:
        def typed(key, kind):
            def fn(i):
                v = self.evaluate(key, i)
                if not isinstance(v, kind):
                    names = "/".join(t.__name__ for t in (kind if isinstance(kind, tuple) else (kind,)))
                    raise ConfigError(f"{key} at i={i} gives {v!r}, expected {names}",
                                      self.lines.get((key, i), self.lines.get(key)))
                return v
            return fn

        bff = BFFSpec(
            l=typed("l_rule", int), b=typed("b_rule", int), p=typed("p_rule", int),
            eps=lambda i: Fraction(self.evaluate("eps_rule", i)), k=typed("k_rule", int),
            mu=typed("mu_rule", UniformWeighting), k_limit=self.k_limit,
            name=self.preset or "config",
        )
        good = GoodSequence(x=typed("x_rule", (Block, ChampernowneBlock)), name=self.rules["x_rule"])
        c = Construction(bff, good, self.i_cap, name=self.preset or "config", canonical=self.canonical)
        if validate:
            try:
                c.validate()
            except BFFInvariantError as exc:
                raise ConfigError(f"schedule violates an invariant: {exc}") from None
        return c


@dataclass
class RunConfig:
    schedule: ScheduleConfig
    k: int = 1
    blocks: list[tuple[int, ...]] | None = None
    checkpoints: list[str] | None = None
    precision: int = 64
    output: str | None = None
    budget: int = DEFAULT_BUDGET
    threads: int | None = None

    def resolve_checkpoints(self, c: Construction) -> list[int]:
        tokens = self.checkpoints or [f"L{i}" for i in range(2, c.i_cap + 1)]
        return [resolve_checkpoint(t, c) for t in tokens]

    def resolve_blocks(self) -> list[tuple[int, ...]]:
        if self.blocks is not None:
            return list(self.blocks)
        return list(itertools.product(range(2), repeat=self.k))


def resolve_checkpoint(token: str, c: Construction) -> int:
    t = token.strip()
    try:
        if t[:1] in ("L", "l"):
            return c.L(int(t[1:]))
        return int(t)
    except ValueError:
        raise QNormalError(f"bad checkpoint {token!r}: expected an integer or L<i>") from None


def parse_block(text: str) -> tuple[int, ...]:
    """``"01"`` is (0, 1); dotted ``"1.12.3"`` allows multi-digit values."""
    t = text.strip()
    if not t:
        raise QNormalError("empty block")
    parts = t.rstrip(".").split(".") if "." in t else list(t)
    try:
        digits = tuple(int(p) for p in parts)
    except ValueError:
        raise QNormalError(f"bad block {text!r}") from None
    if any(d < 0 for d in digits):
        raise QNormalError(f"negative digit in {text!r}")
    return digits


def format_block(B) -> str:
    """Inverse of :func:`parse_block`; a lone multi-digit value gets a trailing dot."""
    if all(d < 10 for d in B):
        return "".join(map(str, B))
    return ".".join(map(str, B)) + ("." if len(B) == 1 else "")


def parse_blocks(text: str) -> list[tuple[int, ...]]:
    return [parse_block(p) for p in text.split(",") if p.strip()]


def _parse_int(value: str, key: str, line: int, minimum: int | None = None) -> int:
    try:
        v = int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}", line) from None
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key} must be >= {minimum}", line)
    return v


RUN_KEYS = ("k", "blocks", "checkpoints", "precision", "output", "budget", "threads")
SCHEDULE_KEYS = ("schedule",) + RULE_KEYS + ("k_limit", "i_cap")


def parse_config(text: str) -> RunConfig:
    entries = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno)
        index = None
        if "[" in key:
            if not key.endswith("]"):
                raise ConfigError(f"bad key {key!r}", lineno)
            key, idx = key[:-1].split("[", 1)
            key = key.strip()
            index = _parse_int(idx.strip(), "index", lineno, minimum=1)
            if key not in RULE_KEYS:
                raise ConfigError(f"only rules take an index, not {key!r}", lineno)
        elif key not in RUN_KEYS + SCHEDULE_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if (key, index) in seen:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        seen.add((key, index))
        entries.append((lineno, key, index, value))

    preset = next((v for _, k, _, v in entries if k == "schedule"), None)
    if preset is not None:
        try:
            sched = ScheduleConfig.from_preset(preset)
        except ConfigError as exc:
            ln = next(n for n, k, _, _ in entries if k == "schedule")
            raise ConfigError(str(exc), ln) from None
    else:
        sched = ScheduleConfig({}, {}, None, 5, None)
    run = RunConfig(sched)
    for lineno, key, index, value in entries:
        if key in RULE_KEYS:
            try:
                Rule(value)
            except QNormalError as exc:
                raise ConfigError(f"{key}: {exc}", lineno) from None
            if index is None:
                sched.rules[key] = value
                sched.lines[key] = lineno
            else:
                sched.overrides[(key, index)] = value
                sched.lines[(key, index)] = lineno
        elif key == "k_limit":
            sched.k_limit = None if value in ("inf", "infinity") else _parse_int(value, key, lineno, 0)
        elif key == "i_cap":
            sched.i_cap = _parse_int(value, key, lineno, 1)
        elif key == "k":
            run.k = _parse_int(value, key, lineno, 1)
        elif key == "blocks":
            try:
                run.blocks = parse_blocks(value)
            except QNormalError as exc:
                raise ConfigError(str(exc), lineno) from None
        elif key == "checkpoints":
            run.checkpoints = [t.strip() for t in value.split(",") if t.strip()]
            for t in run.checkpoints:
                if not (t.isdigit() or (t[:1] in "Ll" and t[1:].isdigit())):
                    raise ConfigError(f"bad checkpoint {t!r}", lineno)
        elif key == "precision":
            run.precision = _parse_int(value, key, lineno, 8)
        elif key == "output":
            run.output = value
        elif key == "budget":
            run.budget = _parse_int(value, key, lineno, 1)
        elif key == "threads":
            run.threads = _parse_int(value, key, lineno, 1)
    missing = [k for k in RULE_KEYS if k not in sched.rules]
    if missing:
        raise ConfigError(f"no schedule preset and missing rules: {', '.join(missing)}")
    return run


def serialize_config(run: RunConfig) -> str:
    """Inverse of :func:`parse_config` (up to comments and whitespace)."""
    s = run.schedule
    out = []
    base = ScheduleConfig.from_preset(s.preset) if s.preset else None
    if s.preset:
        out.append(f"schedule = {s.preset}")
    for key in RULE_KEYS:
        if base is None or s.rules[key] != base.rules[key]:
            out.append(f"{key} = {s.rules[key]}")
    for (key, idx), text in sorted(s.overrides.items()):
        if base is None or base.overrides.get((key, idx)) != text:
            out.append(f"{key}[{idx}] = {text}")
    if s.k_limit is not None:
        out.append(f"k_limit = {s.k_limit}")
    out.append(f"i_cap = {s.i_cap}")
    out.append(f"k = {run.k}")
    if run.blocks is not None:
        out.append("blocks = " + ",".join(format_block(B) for B in run.blocks))
    if run.checkpoints is not None:
        out.append("checkpoints = " + ",".join(run.checkpoints))
    out.append(f"precision = {run.precision}")
    if run.output is not None:
        out.append(f"output = {run.output}")
    out.append(f"budget = {run.budget}")
    if run.threads is not None:
        out.append(f"threads = {run.threads}")
    return "\n".join(out) + "\n"

