"""Reward expressions over measured bits and named parameters.

Grammar::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*      # '/' only where division is allowed
    unary := '-' unary | atom
    atom  := number | ident | func '(' expr ')' | '(' expr ')'
    func  := sin | cos | sqrt | asin

Identifiers ``s0`` .. ``s23`` are bit variables; every other identifier is a
parameter. ``pi`` resolves to math.pi unless a binding overrides it.
Division is refused in reward expressions and allowed in parameter
definitions and circuit angles.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ParseDiagnostic, ValidationError
from .statevector import MAX_QUBITS, OutcomeDistribution, bit_table

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "sqrt": np.sqrt, "asin": np.arcsin}
BUILTINS = {"pi": math.pi}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/()]))"
)
_BIT_RE = re.compile(r"s(0|[1-9]\d*)")


def _bit_index(name: str) -> int | None:
    m = _BIT_RE.fullmatch(name)
    if m and int(m.group(1)) < MAX_QUBITS:
        return int(m.group(1))
    return None


# -- tree -------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    line: int = field(default=1, compare=False, kw_only=True)
    column: int = field(default=1, compare=False, kw_only=True)


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Bit(Node):
    index: int


@dataclass(frozen=True)
class Param(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


def _walk(node: Node):
    yield node
    for child in ("operand", "left", "right", "arg"):
        sub = getattr(node, child, None)
        if sub is not None:
            yield from _walk(sub)


@dataclass(frozen=True)
class RewardExpr:
    """Parsed expression; ``text`` is kept for reports and round-trips."""

    text: str
    root: Node

    @property
    def bit_indices(self) -> frozenset[int]:
        return frozenset(n.index for n in _walk(self.root) if isinstance(n, Bit))

    @property
    def parameters(self) -> frozenset[str]:
        return frozenset(n.name for n in _walk(self.root) if isinstance(n, Param))

    def __str__(self):
        return self.text


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, text, *, allow_bits, allow_division, line, column, forbidden_kind):
        self.text = text
        self.allow_bits = allow_bits
        self.allow_division = allow_division
        self.line = line
        self.col0 = column
        self.forbidden_kind = forbidden_kind
        self.tokens = self._tokenize()
        self.i = 0

    def error(self, message, offset, kind="syntax"):
        return ParseDiagnostic(kind, message, self.line, self.col0 + offset)

    def _tokenize(self):
        tokens = []
        pos = 0
        text = self.text
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise self.error(f"unexpected character {text[bad]!r}", bad)
            kind = m.lastgroup
            tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        tokens.append(("end", "", len(text.rstrip())))
        return tokens

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise self.error(f"expected {value!r}, found {found}", pos)

    def pos_kw(self, offset):
        return {"line": self.line, "column": self.col0 + offset}

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise self.error(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.term(), **self.pos_kw(pos))
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            if op == "/" and not self.allow_division:
                raise self.error("division is not allowed in reward expressions", pos)
            node = BinOp(op, node, self.unary(), **self.pos_kw(pos))
        return node

    def unary(self):
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary(), **self.pos_kw(pos))
        return self.atom()

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text), **self.pos_kw(pos))
        if kind == "ident":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg, **self.pos_kw(pos))
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                raise self.error(f"unknown function {text!r}", pos)
            bit = _bit_index(text)
            if bit is not None:
                if not self.allow_bits:
                    raise self.error(f"bit variable {text} is not allowed here", pos, self.forbidden_kind)
                return Bit(bit, **self.pos_kw(pos))
            return Param(text, **self.pos_kw(pos))
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise self.error(f"expected a number, name or '(', found {found}", pos)


def parse_expression(
    text: str,
    *,
    allow_bits: bool = True,
    allow_division: bool = False,
    line: int = 1,
    column: int = 1,
    forbidden_kind: str = "syntax",
) -> RewardExpr:
    """Parse ``text``; ``line``/``column`` locate it inside a larger source."""
    if not isinstance(text, str):
        raise ValidationError(f"expression must be text, got {type(text).__name__}")
    parser = _Parser(
        text,
        allow_bits=allow_bits,
        allow_division=allow_division,
        line=line,
        column=column,
        forbidden_kind=forbidden_kind,
    )
    return RewardExpr(text.strip(), parser.parse())


def parse_reward(text: str) -> RewardExpr:
    return parse_expression(text, allow_bits=True, allow_division=False)


# -- evaluation -------------------------------------------------------------


def _eval(node: Node, bits: np.ndarray | None, params: Mapping[str, float]):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Bit):
        if bits is None or node.index >= bits.shape[-1]:
            width = 0 if bits is None else bits.shape[-1]
            raise ValidationError(f"bit variable s{node.index} is outside the {width}-bit outcome")
        return bits[..., node.index].astype(float)
    if isinstance(node, Param):
        if node.name in params:
            return params[node.name]
        if node.name in BUILTINS:
            return BUILTINS[node.name]
        raise ParseDiagnostic(
            "unbound-parameter", f"parameter {node.name!r} is not bound", node.line, node.column
        )
    if isinstance(node, Neg):
        return -_eval(node.operand, bits, params)
    if isinstance(node, Call):
        with np.errstate(invalid="ignore"):
            return FUNCTIONS[node.func](_eval(node.arg, bits, params))
    left = _eval(node.left, bits, params)
    right = _eval(node.right, bits, params)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.divide(left, right)


def evaluate(expr: RewardExpr, params: Mapping[str, float], bits: np.ndarray | None = None):
    """Evaluate on one bit vector or, vectorised, on rows of a bit table."""
    if bits is not None:
        bits = np.asarray(bits, dtype=np.int64)
    value = _eval(expr.root, bits, params)
    if bits is not None and bits.ndim == 2:
        return np.broadcast_to(np.asarray(value, dtype=float), (bits.shape[0],))
    return float(value)


def eval_reward(expr: RewardExpr, bits: Sequence[int], params: Mapping[str, float]) -> float:
    return evaluate(expr, params, np.asarray(bits, dtype=np.int64))


def evaluate_parameters(definitions: Mapping[str, float | str]) -> dict[str, float]:
    """Resolve parameter definitions in order.

    Values are numbers or expression text over earlier names (``/`` allowed).
    """
    resolved: dict[str, float] = {}
    for name, definition in definitions.items():
        if not re.fullmatch(r"[A-Za-z_]\w*", name) or _bit_index(name) is not None:
            raise ValidationError(f"invalid parameter name {name!r}")
        if isinstance(definition, str):
            expr = parse_expression(definition, allow_bits=False, allow_division=True)
            value = evaluate(expr, resolved)
        elif isinstance(definition, (int, float, np.integer, np.floating)) and not isinstance(definition, bool):
            value = float(definition)
        else:
            raise ValidationError(f"parameter {name!r} must be a number or an expression string")
        if not math.isfinite(value):
            raise ValidationError(f"parameter {name!r} evaluates to {value}")
        resolved[name] = value
    return resolved


def _check_dims(dist: OutcomeDistribution, expr: RewardExpr):
    if expr.bit_indices and max(expr.bit_indices) >= dist.n_qubits:
        raise ValidationError(
            f"reward uses s{max(expr.bit_indices)} but the distribution has {dist.n_qubits} qubit(s)"
        )


def support_rewards(dist: OutcomeDistribution, expr: RewardExpr, params: Mapping[str, float]):
    """(support indices, probabilities, rewards) restricted to p > 0."""
    _check_dims(dist, expr)
    idx = dist.support()
    rewards = evaluate(expr, params, bit_table(dist.n_qubits, idx))
    return idx, dist.probabilities[idx], np.asarray(rewards, dtype=float)


def reward_moments(dist: OutcomeDistribution, expr: RewardExpr, params: Mapping[str, float]) -> tuple[float, float]:
    """Mean and variance of the reward under ``dist``."""
    _, probs, rewards = support_rewards(dist, expr, params)
    if rewards.size and np.all(rewards == rewards[0]):
        # Constant on the support: exact mean, zero variance.
        return float(rewards[0]), 0.0
    if dist.counts is not None:
        counts = dist.counts[dist.support()]
        total = counts.sum()
        mean = float(np.dot(counts, rewards) / total)
        second = float(np.dot(counts, rewards**2) / total)
    else:
        mean = float(np.dot(probs, rewards))
        second = float(np.dot(probs, rewards**2))
    var = second - mean * mean
    if var < 0.0:
        var = 0.0
    return mean, var


def expected_reward(dist: OutcomeDistribution, expr: RewardExpr, params: Mapping[str, float]) -> float:
    return reward_moments(dist, expr, params)[0]


def reward_variance(dist: OutcomeDistribution, expr: RewardExpr, params: Mapping[str, float]) -> tuple[float, float]:
    """``(variance, standard deviation)`` as ``E[r^2] - E[r]^2``, clamped at zero."""
    var = reward_moments(dist, expr, params)[1]
    return var, math.sqrt(var)
