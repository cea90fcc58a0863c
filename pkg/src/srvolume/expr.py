"""Tiny arithmetic expression language for frequency and measure fields.

Grammar (a strict subset of Python expression syntax)::

    expr    := expr ('+'|'-') term | term
    term    := term ('*'|'/') factor | factor
    factor  := ('+'|'-') factor | power
    power   := atom (('^'|'**') factor)?
    atom    := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := abs | sqrt | sin | cos | exp
    NAME    := q1 .. qn | t | pi

Expressions are evaluated polymorphically: plain floats, numpy arrays
and :class:`~srvolume.jets.Jet` objects all work, so derivatives of a
configured curve come for free.
"""

from __future__ import annotations

import ast
import math
import re

import numpy as np

from . import jets
from .exceptions import ParseError

__all__ = ["Expression", "parse_expression", "parse_assignments"]

FUNCTIONS = {
    "abs": jets.absolute,
    "sqrt": jets.sqrt,
    "sin": jets.sin,
    "cos": jets.cos,
    "exp": jets.exp,
}
CONSTANTS = {"pi": math.pi}
_VAR_RE = re.compile(r"^(q[1-9][0-9]*|t)$")

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a ** b,
}


class Expression:
    """A parsed, validated expression; call :meth:`evaluate` with a namespace."""

    def __init__(self, text: str, tree: ast.AST, variables: frozenset):
        self.text = text
        self._tree = tree
        self.variables = variables

    def __repr__(self):
        return f"Expression({self.text!r})"

    def evaluate(self, env: dict | None = None, **kwargs):
        env = dict(env or {}, **kwargs)
        missing = self.variables - env.keys()
        if missing:
            raise KeyError(f"unbound variables: {sorted(missing)}")
        return _eval(self._tree, env)

    __call__ = evaluate


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id in CONSTANTS:
            return CONSTANTS[node.id]
        return env[node.id]
    if isinstance(node, ast.UnaryOp):
        val = _eval(node.operand, env)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.Call):
        return FUNCTIONS[node.func.id](_eval(node.args[0], env))
    raise AssertionError("unvalidated node")  # pragma: no cover


def _fail(msg, node, source, line_offset=0, col_offset=0):
    line = getattr(node, "lineno", 1) + line_offset
    col = getattr(node, "col_offset", 0) + 1 + col_offset
    raise ParseError(msg, line=line, column=col, source=source)


def _validate(node, variables, allowed, source, line_offset, col_offset):
    args = (source, line_offset, col_offset)
    if isinstance(node, ast.Expression):
        return _validate(node.body, variables, allowed, *args)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            _fail(f"unsupported literal {node.value!r}", node, *args)
        return
    if isinstance(node, ast.Name):
        if node.id in CONSTANTS:
            return
        if not _VAR_RE.match(node.id) or (allowed is not None and node.id not in allowed):
            _fail(f"unknown identifier '{node.id}'", node, *args)
        variables.add(node.id)
        return
    if isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.UAdd, ast.USub)):
            _fail("unsupported unary operator", node, *args)
        return _validate(node.operand, variables, allowed, *args)
    if isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            _fail("unsupported operator", node, *args)
        _validate(node.left, variables, allowed, *args)
        return _validate(node.right, variables, allowed, *args)
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            _fail("unknown function", node, *args)
        if len(node.args) != 1 or node.keywords:
            _fail(f"{node.func.id}() takes exactly one argument", node, *args)
        return _validate(node.args[0], variables, allowed, *args)
    _fail(f"unsupported syntax ({type(node).__name__})", node, *args)


def parse_expression(text: str, allowed=None, source=None, line_offset=0,
                     col_offset=0) -> Expression:
    """Parse ``text``; ``allowed`` optionally restricts variable names.

    Errors raise :class:`ParseError` carrying 1-based line and column
    (shifted by the offsets so callers can report positions in a larger
    document).
    """
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", line=1 + line_offset,
                         column=1 + col_offset, source=source)
    stripped = text.lstrip()
    lead = len(text) - len(stripped)
    # '^' is power; rewrite before parsing so it binds like '**'
    if "**^" in stripped or "^*" in stripped:
        k = stripped.find("**^") + 2 if "**^" in stripped else stripped.find("^*")
        raise ParseError("invalid syntax: mixed power operators", line=1 + line_offset,
                         column=k + 1 + lead + col_offset, source=source)
    body = stripped.rstrip().replace("^", "**")
    carets = [i for i, ch in enumerate(stripped) if ch == "^"]

    def origin(col0):
        # map a 0-based column of the rewritten text back to the original
        return col0 - sum(1 for k, c in enumerate(carets) if c + k < col0)

    try:
        tree = ast.parse(body, mode="eval")
    except SyntaxError as exc:
        col = origin((exc.offset or 1) - 1) + 1
        raise ParseError(f"invalid syntax: {exc.msg}", line=(exc.lineno or 1) + line_offset,
                         column=col + lead + col_offset, source=source) from None
    for node in ast.walk(tree):
        if hasattr(node, "col_offset"):
            node.col_offset = origin(node.col_offset)
    variables: set = set()
    _validate(tree, variables, None if allowed is None else set(allowed), source,
              line_offset, col_offset + lead)
    return Expression(text.strip(), tree, frozenset(variables))


def parse_assignments(text: str, allowed=None, source=None) -> dict:
    """Parse ``"b1=1+t; b2=1+2*t"`` into an ordered ``{name: Expression}``."""
    out = {}
    pos = 0
    for piece in text.split(";"):
        start = pos
        pos += len(piece) + 1
        if not piece.strip():
            continue
        if "=" not in piece:
            raise ParseError("expected 'name = expression'", line=1,
                             column=start + len(piece) - len(piece.lstrip()) + 1, source=source)
        name, rhs = piece.split("=", 1)
        if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", name.strip()):
            raise ParseError(f"invalid name '{name.strip()}'", line=1,
                             column=start + len(name) - len(name.lstrip()) + 1, source=source)
        out[name.strip()] = parse_expression(rhs, allowed=allowed, source=source,
                                             col_offset=start + len(name) + 1)
    if not out:
        raise ParseError("no assignments found", line=1, column=1, source=source)
    return out


def evaluate_vectorized(expr: Expression, env: dict, shape) -> np.ndarray:
    """Evaluate and broadcast to ``shape`` (constant expressions included)."""
    return np.broadcast_to(np.asarray(expr.evaluate(env), dtype=float), shape)
