"""Polynomial expressions: lexer, precedence-climbing parser, printer, evaluator.

Grammar (loosest to tightest)::

    expr     := term (("+" | "-") term)*
    term     := unary ("*" unary)*
    unary    := "-" unary | power
    power    := atom ("^" exponent)?
    exponent := INT ("^" exponent)?          right-associative, evaluated
    atom     := NUMBER | NAME | "(" expr ")"

NUMBER is ``123`` or ``123/456`` with no spaces.  ``**`` is accepted for
``^``.  Juxtaposition such as ``2x`` is rejected.
"""

import re
from dataclasses import dataclass

from gmpy2 import mpq


class ParseError(ValueError):
    def __init__(self, message, offset, code="parse_error"):
        super().__init__(f"{message} at byte {offset}")
        self.message = message
        self.offset = offset
        self.code = code


@dataclass(frozen=True)
class Num:
    value: object


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


def neg(a):
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Num):
        return Num(-a.value)
    return Neg(a)


def _negative(b):
    return isinstance(b, Neg) or (isinstance(b, Num) and b.value < 0)


def add(a, b):
    return Sub(a, neg(b)) if _negative(b) else Add(a, b)


def sub(a, b):
    return Add(a, neg(b)) if _negative(b) else Sub(a, b)


def normalize(node):
    """Re-apply the unary-minus folding bottom-up."""
    if isinstance(node, Num):
        return Num(mpq(node.value))
    if isinstance(node, Var):
        return node
    if isinstance(node, Neg):
        return neg(normalize(node.arg))
    if isinstance(node, Add):
        return add(normalize(node.left), normalize(node.right))
    if isinstance(node, Sub):
        return sub(normalize(node.left), normalize(node.right))
    if isinstance(node, Mul):
        return Mul(normalize(node.left), normalize(node.right))
    if isinstance(node, Pow):
        return Pow(normalize(node.base), node.exp)
    raise TypeError(f"not an expression node: {node!r}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _lex(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        offset = len(text[:pos].encode("utf-8"))
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", offset, "lex_error")
        kind = m.lastgroup
        if kind != "ws":
            body = m.group()
            if kind == "op" and body == "**":
                body = "^"
            if kind == "num" and "/" in body and int(body.split("/")[1]) == 0:
                raise ParseError("zero denominator", offset, "lex_error")
            toks.append(_Tok(kind, body, offset))
        pos = m.end()
    toks.append(_Tok("end", "", len(text.encode("utf-8"))))
    return toks


class _Parser:
    def __init__(self, text, variables):
        self.toks = _lex(text)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        tok = self.take()
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected {op!r}", tok.offset)

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            if tok.kind in ("num", "name") or tok.text == "(":
                raise ParseError("implicit multiplication is not allowed", tok.offset)
            raise ParseError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            node = add(node, rhs) if op == "+" else sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.take()
            node = Mul(node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self):
        tok = self.take()
        if tok.kind != "num" or "/" in tok.text:
            raise ParseError("exponent must be a non-negative integer literal", tok.offset,
                             "malformed_exponent")
        value = int(tok.text)
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            value = value ** self.exponent()
        if value > 4096:
            raise ParseError("exponent too large", tok.offset, "malformed_exponent")
        return value

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            return Num(mpq(tok.text))
        if tok.kind == "name":
            if self.variables is not None and tok.text not in self.variables:
                raise ParseError(f"unknown variable {tok.text!r}", tok.offset, "unknown_variable")
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.offset)
        raise ParseError(f"unexpected {tok.text!r}", tok.offset)


def parse_expr(text, variables=None):
    """Parse text into an AST; ``variables`` (if given) is the allowed name list."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text, None if variables is None else list(variables)).parse()


_PREC = {Add: 1, Sub: 1, Mul: 2, Neg: 3, Pow: 4}


def _prec(node):
    if isinstance(node, Num):
        return 3 if node.value < 0 else 5
    if isinstance(node, Var):
        return 5
    return _PREC[type(node)]


def to_text(node):
    """Print with the fewest parentheses that reparse to the same tree."""

    def wrap(n, need):
        s = to_text(n)
        return f"({s})" if _prec(n) < need else s

    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.arg, 3)
    if isinstance(node, Add):
        return f"{wrap(node.left, 1)} + {wrap(node.right, 2)}"
    if isinstance(node, Sub):
        return f"{wrap(node.left, 1)} - {wrap(node.right, 2)}"
    if isinstance(node, Mul):
        return f"{wrap(node.left, 2)}*{wrap(node.right, 3)}"
    if isinstance(node, Pow):
        return f"{wrap(node.base, 5)}^{node.exp}"
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node, env, const):
    """Fold the tree with python operators; names come from env, numbers through const."""
    if isinstance(node, Num):
        return const(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.arg, env, const)
    if isinstance(node, Add):
        return evaluate(node.left, env, const) + evaluate(node.right, env, const)
    if isinstance(node, Sub):
        return evaluate(node.left, env, const) - evaluate(node.right, env, const)
    if isinstance(node, Mul):
        return evaluate(node.left, env, const) * evaluate(node.right, env, const)
    if isinstance(node, Pow):
        return evaluate(node.base, env, const) ** node.exp
    raise TypeError(f"not an expression node: {node!r}")


def to_series(node, variables, order):
    from .series import Series

    n = len(variables)
    env = {v: Series.variable(n, i, order) for i, v in enumerate(variables)}
    return evaluate(node, env, lambda c: Series.constant(n, c, order))


def to_family(node, variables, order, parameter="t"):
    from .isotopy import FamilySeries, TPoly

    n = len(variables)
    env = {v: FamilySeries.variable(n, i, order) for i, v in enumerate(variables)}
    env[parameter] = FamilySeries.constant(n, TPoly.t(), order)
    return evaluate(node, env, lambda c: FamilySeries.constant(n, c, order))


def to_tpoly(node, parameter="t"):
    from .isotopy import TPoly

    return evaluate(node, {parameter: TPoly.t()}, TPoly)


def parse_series(text, variables, order):
    return to_series(parse_expr(text, variables), variables, order)
