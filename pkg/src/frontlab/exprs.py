"""Tiny arithmetic expression language for coefficient fields.

Config files describe k(x) and h(x) as strings over the variables x and
y with numeric literals, +, -, *, unary minus, sin, exp, and parentheses.
Parsing is a hand-rolled recursive descent into a small AST; evaluation
is vectorized over numpy arrays.  Nothing is ever passed to eval().
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["CoefficientExpr", "parse_expr"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*()]))"
)

_FUNCTIONS = {"sin": np.sin, "exp": np.exp}


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ConfigError(f"unrecognized token at {rest[:12]!r} in expression {text!r}")
        if m.group("num") is not None:
            tokens.append(text[m.start():m.end()].strip())
        else:
            tokens.append(m.group("name") or m.group("op"))
        pos = m.end()
    return tokens


class _Parser:
    """Grammar: sum := term (('+'|'-') term)*; term := unary ('*' unary)*;
    unary := '-' unary | atom; atom := number | var | func '(' sum ')' | '(' sum ')'.
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables: set[str] = set()

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, tok):
        got = self.take()
        if got != tok:
            raise ConfigError(f"expected {tok!r}, got {got!r} in expression {self.text!r}")

    def parse(self):
        node = self.sum()
        if self.peek() is not None:
            raise ConfigError(f"trailing tokens at {self.peek()!r} in expression {self.text!r}")
        return node

    def sum(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == "*":
            self.take()
            node = ("mul", node, self.unary())
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            return ("neg", self.unary())
        return self.atom()

    def atom(self):
        tok = self.take()
        if tok is None:
            raise ConfigError(f"unexpected end of expression {self.text!r}")
        if tok == "(":
            node = self.sum()
            self.expect(")")
            return node
        if tok in _FUNCTIONS:
            self.expect("(")
            arg = self.sum()
            self.expect(")")
            return (tok, arg)
        if tok in ("x", "y"):
            self.variables.add(tok)
            return ("var", tok)
        try:
            return ("const", float(tok))
        except ValueError:
            raise ConfigError(f"unknown name {tok!r} in expression {self.text!r}") from None


def _eval_node(node, env):
    kind = node[0]
    if kind == "const":
        return node[1]
    if kind == "var":
        return env[node[1]]
    if kind == "neg":
        return -_eval_node(node[1], env)
    if kind in _FUNCTIONS:
        return _FUNCTIONS[kind](_eval_node(node[1], env))
    a = _eval_node(node[1], env)
    b = _eval_node(node[2], env)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    return a * b


@dataclass(frozen=True)
class CoefficientExpr:
    """Parsed coefficient expression, callable on scalars or arrays."""

    source: str
    _ast: tuple
    variables: frozenset[str]

    def __call__(self, x, y=None):
        if "y" in self.variables and y is None:
            raise ConfigError(f"expression {self.source!r} needs y but none was given")
        xa = np.asarray(x, dtype=float)
        env = {"x": xa, "y": np.asarray(y, dtype=float) if y is not None else 0.0}
        out = _eval_node(self._ast, env)
        if np.shape(out) != np.shape(xa):
            out = np.broadcast_to(np.asarray(out, dtype=float), np.shape(xa)).copy()
        return out if np.ndim(out) else float(out)


def parse_expr(text: str) -> CoefficientExpr:
    """Parse one coefficient expression; raises ConfigError on bad syntax."""
    if not isinstance(text, str) or not text.strip():
        raise ConfigError("coefficient expression must be a non-empty string")
    parser = _Parser(text)
    ast = parser.parse()
    return CoefficientExpr(source=text, _ast=ast, variables=frozenset(parser.variables))
