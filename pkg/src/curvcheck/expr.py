"""Closed-form scalar expressions over chart coordinates.

Metric components, warping functions and mapping covectors enter the
engine as short formulas such as ``1 - 2*M/r + Q^2/r^2``.  They are
parsed once into an immutable AST, evaluated as IEEE-754 doubles, and
differentiated exactly, so every curvature object downstream is built
from exact derivatives rather than finite differences.

The grammar is documented in docs/expr-grammar.md.  Identifiers are
case sensitive, ``^`` is power, and precedence is

    ^   >   unary -   >   * /   >   + -

with ``^`` grouping to the right.  Exponents that are integer literals
are stored as integer powers, which keeps differentiation stable near a
zero base (no log() is ever introduced on an integer-power chain).

There is no algebraic simplification beyond light constant folding in
derivative construction; correctness is by evaluation, not by normal
form.  All node types are frozen dataclasses, so expressions and
bindings are safe to share between threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "Expr",
    "Num",
    "Const",
    "Var",
    "Unary",
    "Bin",
    "IntPow",
    "Bindings",
    "ExprError",
    "ParseError",
    "UndeclaredSymbolError",
    "UnboundSymbolError",
    "DomainError",
    "parse",
    "evaluate",
    "diff",
    "to_text",
    "free_symbols",
    "compile_exprs",
    "num",
    "var",
    "const",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "intpow",
    "power",
    "fn",
]


class ExprError(ValueError):
    """Base class for expression failures."""


class ParseError(ExprError):
    """Syntax failure; carries the position of the offending token."""

    def __init__(self, message: str, src: str, pos: int):
        super().__init__(f"{message} at position {pos}: {src!r}")
        self.src = src
        self.pos = pos


class UndeclaredSymbolError(ParseError):
    """An identifier that is neither a declared coordinate nor constant."""


class UnboundSymbolError(ExprError):
    """A symbol had no value at evaluation time."""


class DomainError(ExprError):
    """Evaluation left the real domain (log, sqrt, division, pow)."""

    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in {subexpr!r}")
        self.subexpr = subexpr


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # neg sin cos tan exp log sqrt abs
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # + - * / pow
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class IntPow:
    base: "Expr"
    power: int


Expr = Union[Num, Const, Var, Unary, Bin, IntPow]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")


class Bindings(Mapping[str, float]):
    """Immutable name -> float map for named constants.

    Lookup of a name that was never bound raises UnboundSymbolError;
    there are no silent defaults.
    """

    def __init__(self, values: Mapping[str, float] | None = None, **extra: float):
        data = dict(values) if values else {}
        data.update(extra)
        self._values = {str(k): float(v) for k, v in data.items()}

    def __getitem__(self, name: str) -> float:
        try:
            return self._values[name]
        except KeyError:
            raise UnboundSymbolError(f"constant {name!r} is not bound") from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in sorted(self._values.items()))
        return f"Bindings({inner})"

    # Immutable, so hashable by content; lets containing specs be cached.
    def __hash__(self) -> int:
        return hash(frozenset(self._values.items()))

    def __eq__(self, other) -> bool:
        if isinstance(other, Bindings):
            return self._values == other._values
        return NotImplemented


# --------------------------------------------------------------------------
# Construction helpers.  The binary helpers fold numeric literals and drop
# additive/multiplicative identities; diff() relies on them to keep
# derivative trees small.  parse() does not fold, so user formulas
# round-trip structurally.

def num(v: float) -> Num:
    return Num(float(v))


def var(name: str) -> Var:
    return Var(name)


def const(name: str) -> Const:
    return Const(name)


def neg(e: Expr) -> Expr:
    if isinstance(e, Num):
        return Num(-e.value)
    if isinstance(e, Unary) and e.op == "neg":
        return e.arg
    return Unary("neg", e)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and a.value == 0.0:
        return b
    if isinstance(b, Num) and b.value == 0.0:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Bin("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Num) and b.value == 0.0:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if isinstance(a, Num) and a.value == 0.0:
        return neg(b)
    return Bin("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num):
        if a.value == 0.0:
            return Num(0.0)
        if a.value == 1.0:
            return b
    if isinstance(b, Num):
        if b.value == 0.0:
            return Num(0.0)
        if b.value == 1.0:
            return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Bin("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Num) and b.value == 1.0:
        return a
    if isinstance(a, Num) and a.value == 0.0 and isinstance(b, Num) and b.value != 0.0:
        return Num(0.0)
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    return Bin("/", a, b)


def intpow(base: Expr, k: int) -> Expr:
    if k == 0:
        return Num(1.0)
    if k == 1:
        return base
    return IntPow(base, int(k))


def power(base: Expr, exponent: Expr) -> Expr:
    return Bin("pow", base, exponent)


def fn(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    return Unary(name, arg)


# --------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)

# Exponent literals larger than this stay general powers.
_MAX_INT_POWER = 1_000_000


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", src, pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str, coords: Sequence[str], consts: Iterable[str]):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0
        self.coords = set(coords)
        self.consts = set(consts)
        overlap = self.coords & self.consts
        if overlap:
            raise ExprError(f"names declared as both coordinate and constant: {sorted(overlap)}")

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, text: str):
        kind, value, pos = self.next()
        if kind != "op" or value != text:
            raise ParseError(f"expected {text!r}", self.src, pos)

    def parse(self) -> Expr:
        e = self.sum()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {value!r}", self.src, pos)
        return e

    def sum(self) -> Expr:
        e = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.next()
                rhs = self.term()
                e = Bin(value, e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.next()
                rhs = self.factor()
                e = Bin(value, e, rhs)
            else:
                return e

    def factor(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.next()
            return Unary("neg", self.factor())
        if kind == "op" and value == "+":
            self.next()
            return self.factor()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.next()
            exponent = self.factor()  # right associative; allows x^-2
            return _make_power(base, exponent)
        return base

    def atom(self) -> Expr:
        kind, value, pos = self.next()
        if kind == "num":
            return Num(float(value))
        if kind == "op" and value == "(":
            e = self.sum()
            self.expect_op(")")
            return e
        if kind == "name":
            nk, nv, _ = self.peek()
            if nk == "op" and nv == "(":
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function {value!r}", self.src, pos)
                self.next()
                arg = self.sum()
                self.expect_op(")")
                return Unary(value, arg)
            if value in self.coords:
                return Var(value)
            if value in self.consts:
                return Const(value)
            raise UndeclaredSymbolError(f"undeclared symbol {value!r}", self.src, pos)
        raise ParseError(f"unexpected token {value!r}", self.src, pos)


def _make_power(base: Expr, exponent: Expr) -> Expr:
    k = _as_int_literal(exponent)
    if k is not None and abs(k) <= _MAX_INT_POWER:
        return IntPow(base, k)
    return Bin("pow", base, exponent)


def _as_int_literal(e: Expr) -> int | None:
    if isinstance(e, Num) and float(e.value).is_integer():
        return int(e.value)
    if isinstance(e, Unary) and e.op == "neg":
        inner = _as_int_literal(e.arg)
        if inner is not None:
            return -inner
    return None


def parse(src: str, coords: Sequence[str], consts: Iterable[str] = ()) -> Expr:
    """Parse a formula over the declared coordinates and constants.

    Raises ParseError (with position) on bad syntax and
    UndeclaredSymbolError on identifiers outside the declared names.
    """
    return _Parser(src, coords, consts).parse()


# --------------------------------------------------------------------------
# Evaluation

def evaluate(e: Expr, point: Mapping[str, float], consts: Mapping[str, float] | None = None) -> float:
    """Evaluate to an IEEE double.

    Domain failures (log of a non-positive value, division by zero,
    sqrt of a negative, non-real powers) raise DomainError naming the
    offending subexpression.
    """
    consts = consts if consts is not None else {}

    def ev(node: Expr) -> float:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            try:
                return float(point[node.name])
            except KeyError:
                raise UnboundSymbolError(f"coordinate {node.name!r} has no value") from None
        if isinstance(node, Const):
            try:
                return float(consts[node.name])
            except KeyError:
                raise UnboundSymbolError(f"constant {node.name!r} is not bound") from None
        if isinstance(node, Unary):
            v = ev(node.arg)
            op = node.op
            if op == "neg":
                return -v
            if op == "sin":
                return math.sin(v)
            if op == "cos":
                return math.cos(v)
            if op == "tan":
                return math.tan(v)
            if op == "exp":
                try:
                    return math.exp(v)
                except OverflowError:
                    raise DomainError("overflow", to_text(node)) from None
            if op == "log":
                if v <= 0.0:
                    raise DomainError("log of non-positive value", to_text(node))
                return math.log(v)
            if op == "sqrt":
                if v < 0.0:
                    raise DomainError("sqrt of negative value", to_text(node))
                return math.sqrt(v)
            if op == "abs":
                return abs(v)
            raise ExprError(f"unknown unary op {op!r}")
        if isinstance(node, Bin):
            a = ev(node.lhs)
            b = ev(node.rhs)
            op = node.op
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                if b == 0.0:
                    raise DomainError("division by zero", to_text(node))
                return a / b
            if op == "pow":
                try:
                    return math.pow(a, b)
                except (ValueError, OverflowError):
                    raise DomainError("power outside real domain", to_text(node)) from None
            raise ExprError(f"unknown binary op {op!r}")
        if isinstance(node, IntPow):
            a = ev(node.base)
            try:
                return a ** node.power
            except ZeroDivisionError:
                raise DomainError("zero base with negative power", to_text(node)) from None
            except OverflowError:
                raise DomainError("overflow", to_text(node)) from None
        raise ExprError(f"not an expression node: {node!r}")

    return ev(e)


# --------------------------------------------------------------------------
# Differentiation

def diff(e: Expr, variable: str) -> Expr:
    """Exact symbolic derivative with respect to a coordinate.

    Closed over the AST grammar; abs differentiates to u/abs(u) * u',
    which errors on evaluation at u = 0.
    """

    def d(node: Expr) -> Expr:
        if isinstance(node, (Num, Const)):
            return Num(0.0)
        if isinstance(node, Var):
            return Num(1.0) if node.name == variable else Num(0.0)
        if isinstance(node, Unary):
            u, du = node.arg, d(node.arg)
            op = node.op
            if op == "neg":
                return neg(du)
            if op == "sin":
                return mul(Unary("cos", u), du)
            if op == "cos":
                return neg(mul(Unary("sin", u), du))
            if op == "tan":
                return mul(add(Num(1.0), intpow(Unary("tan", u), 2)), du)
            if op == "exp":
                return mul(node, du)
            if op == "log":
                return div(du, u)
            if op == "sqrt":
                return div(du, mul(Num(2.0), node))
            if op == "abs":
                return mul(div(u, node), du)
            raise ExprError(f"unknown unary op {op!r}")
        if isinstance(node, Bin):
            a, b = node.lhs, node.rhs
            da, db = d(a), d(b)
            op = node.op
            if op == "+":
                return add(da, db)
            if op == "-":
                return sub(da, db)
            if op == "*":
                return add(mul(da, b), mul(a, db))
            if op == "/":
                return div(sub(mul(da, b), mul(a, db)), intpow(b, 2))
            if op == "pow":
                # d(a^b) = a^b * (db*log(a) + b*da/a)
                return mul(node, add(mul(db, Unary("log", a)), div(mul(b, da), a)))
            raise ExprError(f"unknown binary op {op!r}")
        if isinstance(node, IntPow):
            k = node.power
            du = d(node.base)
            return mul(mul(Num(float(k)), intpow(node.base, k - 1)), du)
        raise ExprError(f"not an expression node: {node!r}")

    return d(e)


# --------------------------------------------------------------------------
# Printing and introspection

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        if e.op in "+-":
            return _PREC_ADD
        if e.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(e, IntPow):
        return _PREC_POW
    if isinstance(e, Unary):
        return _PREC_NEG if e.op == "neg" else _PREC_ATOM
    if isinstance(e, Num) and e.value < 0:
        return _PREC_NEG
    return _PREC_ATOM


def to_text(e: Expr) -> str:
    """Render to grammar text; parsing the result evaluates identically."""

    def wrap(child: Expr, minimum: int) -> str:
        s = to_text(child)
        return f"({s})" if _prec(child) < minimum else s

    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + wrap(e.arg, _PREC_NEG)
        return f"{e.op}({to_text(e.arg)})"
    if isinstance(e, IntPow):
        base = wrap(e.base, _PREC_ATOM)
        return f"{base}^{e.power}" if e.power >= 0 else f"{base}^({e.power})"
    if isinstance(e, Bin):
        if e.op == "pow":
            return f"{wrap(e.lhs, _PREC_ATOM)}^{wrap(e.rhs, _PREC_POW)}"
        if e.op in "+-":
            return f"{to_text(e.lhs)} {e.op} {wrap(e.rhs, _PREC_MUL)}"
        # * and /: the grammar is left associative, so the right operand
        # must bind strictly tighter or grouping (and fp rounding) changes.
        left = wrap(e.lhs, _PREC_MUL)
        right = wrap(e.rhs, _PREC_MUL + 1)
        return f"{left}{e.op}{right}"
    raise ExprError(f"not an expression node: {e!r}")


def free_symbols(e: Expr) -> tuple[set[str], set[str]]:
    """Return (coordinate names, constant names) appearing in e."""
    varnames: set[str] = set()
    constnames: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            varnames.add(node.name)
        elif isinstance(node, Const):
            constnames.add(node.name)
        elif isinstance(node, Unary):
            stack.append(node.arg)
        elif isinstance(node, Bin):
            stack.append(node.lhs)
            stack.append(node.rhs)
        elif isinstance(node, IntPow):
            stack.append(node.base)
    return varnames, constnames


# --------------------------------------------------------------------------
# Compilation.  The geometry engine evaluates thousands of derivative
# expressions per point; compiling them into one generated function
# removes the tree-walk overhead.  The generated code mirrors evaluate()
# operation for operation, so both paths produce bit-identical values.

_COMPILE_NS = {
    "_sin": math.sin,
    "_cos": math.cos,
    "_tan": math.tan,
    "_exp": math.exp,
    "_log": math.log,
    "_sqrt": math.sqrt,
    "_abs": abs,
    "_pow": math.pow,
    "__builtins__": {},
}


def _codegen(e: Expr, argnames: Mapping[str, str], consts: Mapping[str, float]) -> str:
    if isinstance(e, Num):
        return f"({e.value!r})"
    if isinstance(e, Var):
        try:
            return argnames[e.name]
        except KeyError:
            raise UnboundSymbolError(f"coordinate {e.name!r} is not in the chart") from None
    if isinstance(e, Const):
        try:
            return f"({float(consts[e.name])!r})"
        except KeyError:
            raise UnboundSymbolError(f"constant {e.name!r} is not bound") from None
    if isinstance(e, Unary):
        a = _codegen(e.arg, argnames, consts)
        if e.op == "neg":
            return f"(-{a})"
        return f"_{e.op}({a})"
    if isinstance(e, Bin):
        a = _codegen(e.lhs, argnames, consts)
        b = _codegen(e.rhs, argnames, consts)
        if e.op == "pow":
            return f"_pow({a}, {b})"
        return f"({a} {e.op} {b})"
    if isinstance(e, IntPow):
        a = _codegen(e.base, argnames, consts)
        return f"({a} ** ({e.power}))"
    raise ExprError(f"not an expression node: {e!r}")


def compile_exprs(
    exprs: Sequence[Expr],
    coords: Sequence[str],
    consts: Mapping[str, float],
) -> Callable[..., tuple[float, ...]]:
    """Compile expressions into one positional function of the coordinates.

    The result f satisfies f(*point) == tuple(evaluate(e, point_map, consts)
    for e in exprs).  Constants are inlined at compile time.  Domain
    failures raise the interpreter's native ValueError / ZeroDivisionError /
    OverflowError; callers wanting an attributed DomainError re-run the
    failing expression through evaluate().
    """
    argnames = {name: f"_c{i}" for i, name in enumerate(coords)}
    body = ", ".join(_codegen(e, argnames, consts) for e in exprs)
    trailing = "," if len(exprs) == 1 else ""
    src = f"def _compiled({', '.join(argnames.values())}):\n    return ({body}{trailing})"
    namespace = dict(_COMPILE_NS)
    exec(compile(src, "<curvcheck-expr>", "exec"), namespace)
    return namespace["_compiled"]
