"""Recursive-descent parser for the system-definition and predicate DSL.

Grammar (documented in the README):

    system     ::= (param_decl | equation)+        statements split on newline or ";"
    param_decl ::= "param" ident "=" const_expr
    equation   ::= "diff(" ident ["(t)"] "," "t" ")" "=" expr
    expr       ::= term (("+" | "-") term)*
    term       ::= factor (("*" | "/") factor)*
    factor     ::= "-" factor | power
    power      ::= atom ["^" factor]               exponent must fold to a constant
    atom       ::= number | ident | ident "(t)" | func "(" expr ")" | "(" expr ")"

    predicate  ::= or_term
    or_term    ::= and_term ("or" and_term)*
    and_term   ::= not_term ("and" not_term)*
    not_term   ::= "not" not_term | comparison | "(" predicate ")"
    comparison ::= expr ("<" | ">" | "<=" | ">=") expr

`x` and `x(t)` both denote the state variable x. `t` is the time variable and
is reserved. `#` starts a comment running to end of line. Numeric literals are
double precision; constant subexpressions such as `8/3` fold to a double at
parse time wherever a constant is required (param values, exponents).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ParseError
from .ast import (
    And,
    BinOp,
    Call,
    Cmp,
    Const,
    FUNCTIONS,
    Neg,
    Not,
    Or,
    ParamRef,
    Predicate,
    StateRef,
    SystemDef,
    TimeRef,
)

_KEYWORDS = {"diff", "param", "and", "or", "not", "t"}


@dataclass(frozen=True)
class _RawIdent:
    """Unresolved name; replaced by StateRef/ParamRef during resolution."""

    name: str
    line: int
    col: int


@dataclass(frozen=True)
class _Token:
    kind: str  # NUMBER IDENT OP NEWLINE EOF
    text: str
    line: int
    col: int


_TWO_CHAR_OPS = ("<=", ">=")
_ONE_CHAR_OPS = "()=,+-*/^<>;"


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            tokens.append(_Token("NEWLINE", "\n", line, col))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith(_TWO_CHAR_OPS[0], i) or source.startswith(_TWO_CHAR_OPS[1], i):
            tokens.append(_Token("OP", source[i : i + 2], line, col))
            i += 2
            col += 2
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            if text.count(".") > 1:
                raise ParseError(f"malformed number {text!r}", line, col)
            tokens.append(_Token("NUMBER", text, line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("IDENT", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(_Token("OP", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    # token plumbing ---------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text if tok.kind != "EOF" else "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", tok.line, tok.col)
        return self.next()

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text == text

    def skip_separators(self) -> None:
        while self.peek().kind == "NEWLINE" or self.at_op(";"):
            self.next()

    # expressions ------------------------------------------------------

    def parse_expr(self):
        node = self.parse_term()
        while self.at_op("+") or self.at_op("-"):
            op = self.next().text
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.at_op("*") or self.at_op("/"):
            op = self.next().text
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self):
        if self.at_op("-"):
            self.next()
            return Neg(self.parse_factor())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.at_op("^"):
            tok = self.next()
            exponent = self.parse_factor()
            value = _fold_const(exponent)
            if value is None:
                raise ParseError("exponent must be a numeric constant", tok.line, tok.col)
            return BinOp("^", base, Const(value))
        return base

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            return Const(float(tok.text))
        if self.at_op("("):
            self.next()
            node = self.parse_expr()
            self.expect("OP", ")")
            return node
        if tok.kind == "IDENT":
            self.next()
            name = tok.text
            if name == "t":
                return TimeRef()
            if name in FUNCTIONS:
                self.expect("OP", "(")
                arg = self.parse_expr()
                self.expect("OP", ")")
                return Call(name, (arg,))
            if self.at_op("("):
                # state variable written in the x(t) form
                self.next()
                self.expect("IDENT", "t")
                self.expect("OP", ")")
                return _RawIdent(name, tok.line, tok.col)
            if name in {"and", "or", "not", "diff", "param"}:
                raise ParseError(f"unexpected keyword {name!r}", tok.line, tok.col)
            return _RawIdent(name, tok.line, tok.col)
        got = tok.text if tok.kind != "EOF" else "end of input"
        raise ParseError(f"expected an expression, found {got!r}", tok.line, tok.col)

    # predicates -------------------------------------------------------

    def parse_predicate_root(self):
        node = self.parse_and_term()
        while self.peek().kind == "IDENT" and self.peek().text == "or":
            self.next()
            node = Or(node, self.parse_and_term())
        return node

    def parse_and_term(self):
        node = self.parse_not_term()
        while self.peek().kind == "IDENT" and self.peek().text == "and":
            self.next()
            node = And(node, self.parse_not_term())
        return node

    def parse_not_term(self):
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text == "not":
            self.next()
            return Not(self.parse_not_term())
        if self.at_op("("):
            # "(p and q)" versus "(x + 1) < 2": try boolean first, backtrack
            checkpoint = self.pos
            try:
                self.next()
                inner = self.parse_predicate_root()
                self.expect("OP", ")")
                return inner
            except ParseError:
                self.pos = checkpoint
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_expr()
        tok = self.peek()
        if tok.kind == "OP" and tok.text in ("<", ">", "<=", ">="):
            self.next()
            right = self.parse_expr()
            return Cmp(tok.text, left, right)
        got = tok.text if tok.kind != "EOF" else "end of input"
        raise ParseError(f"expected a comparison operator, found {got!r}", tok.line, tok.col)

    # statements -------------------------------------------------------

    def parse_system_statements(self):
        params: dict[str, float] = {}
        equations: list[tuple[str, object, _Token]] = []
        while True:
            self.skip_separators()
            tok = self.peek()
            if tok.kind == "EOF":
                break
            if tok.kind == "IDENT" and tok.text == "param":
                self.next()
                name_tok = self.expect("IDENT")
                name = name_tok.text
                if name in _KEYWORDS or name in FUNCTIONS:
                    raise ParseError(f"{name!r} is reserved", name_tok.line, name_tok.col)
                self.expect("OP", "=")
                expr = self.parse_expr()
                value = _fold_const(expr)
                if value is None:
                    raise ParseError(
                        "parameter value must be a numeric constant", name_tok.line, name_tok.col
                    )
                if name in params:
                    raise ParseError(f"duplicate parameter {name!r}", name_tok.line, name_tok.col)
                params[name] = value
            elif tok.kind == "IDENT" and tok.text == "diff":
                self.next()
                self.expect("OP", "(")
                var_tok = self.expect("IDENT")
                var = var_tok.text
                if var in _KEYWORDS or var in FUNCTIONS:
                    raise ParseError(f"{var!r} is reserved", var_tok.line, var_tok.col)
                if self.at_op("("):
                    self.next()
                    self.expect("IDENT", "t")
                    self.expect("OP", ")")
                self.expect("OP", ",")
                self.expect("IDENT", "t")
                self.expect("OP", ")")
                self.expect("OP", "=")
                expr = self.parse_expr()
                if any(var == v for v, _, _ in equations):
                    raise ParseError(f"duplicate equation for {var!r}", var_tok.line, var_tok.col)
                equations.append((var, expr, var_tok))
            else:
                got = tok.text
                raise ParseError(f"expected 'diff' or 'param', found {got!r}", tok.line, tok.col)
            end = self.peek()
            if end.kind not in ("NEWLINE", "EOF") and not self.at_op(";"):
                raise ParseError(f"unexpected {end.text!r} after statement", end.line, end.col)
        return params, equations


def _fold_const(expr) -> float | None:
    """Evaluate a reference-free subtree to a double, or None if it has refs."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Neg):
        v = _fold_const(expr.operand)
        return None if v is None else -v
    if isinstance(expr, BinOp):
        a = _fold_const(expr.left)
        b = _fold_const(expr.right)
        if a is None or b is None:
            return None
        try:
            if expr.op == "+":
                return a + b
            if expr.op == "-":
                return a - b
            if expr.op == "*":
                return a * b
            if expr.op == "/":
                return a / b
            if expr.op == "^":
                return float(a**b)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise ParseError(f"invalid constant arithmetic: {exc}", 0, 0) from exc
    if isinstance(expr, Call):
        v = _fold_const(expr.args[0])
        if v is None:
            return None
        fn = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "ln": math.log,
              "sqrt": math.sqrt, "abs": abs}[expr.func]
        try:
            return float(fn(v))
        except (ValueError, OverflowError) as exc:
            raise ParseError(f"invalid constant arithmetic: {exc}", 0, 0) from exc
    return None


def _resolve(expr, state_index: dict[str, int], params: dict[str, float], *, context: str):
    """Replace _RawIdent placeholders with StateRef/ParamRef nodes."""
    if isinstance(expr, _RawIdent):
        if expr.name in state_index:
            return StateRef(state_index[expr.name])
        if expr.name in params:
            return ParamRef(expr.name)
        if context == "system":
            raise ParseError(
                f"missing equation for state variable {expr.name!r}", expr.line, expr.col
            )
        raise ParseError(f"unknown identifier {expr.name!r}", expr.line, expr.col)
    if isinstance(expr, Neg):
        return Neg(_resolve(expr.operand, state_index, params, context=context))
    if isinstance(expr, BinOp):
        return BinOp(
            expr.op,
            _resolve(expr.left, state_index, params, context=context),
            _resolve(expr.right, state_index, params, context=context),
        )
    if isinstance(expr, Call):
        return Call(expr.func, (_resolve(expr.args[0], state_index, params, context=context),))
    return expr


def _resolve_bool(node, state_index, params):
    if isinstance(node, Cmp):
        left = _resolve(node.left, state_index, params, context="predicate")
        right = _resolve(node.right, state_index, params, context="predicate")
        _reject_time(left)
        _reject_time(right)
        return Cmp(node.op, left, right)
    if isinstance(node, And):
        return And(_resolve_bool(node.left, state_index, params),
                   _resolve_bool(node.right, state_index, params))
    if isinstance(node, Or):
        return Or(_resolve_bool(node.left, state_index, params),
                  _resolve_bool(node.right, state_index, params))
    if isinstance(node, Not):
        return Not(_resolve_bool(node.operand, state_index, params))
    raise TypeError(f"not a boolean node: {node!r}")


def _reject_time(expr) -> None:
    if isinstance(expr, TimeRef):
        raise ParseError("time reference not allowed in predicates", 0, 0)
    if isinstance(expr, Neg):
        _reject_time(expr.operand)
    elif isinstance(expr, BinOp):
        _reject_time(expr.left)
        _reject_time(expr.right)
    elif isinstance(expr, Call):
        _reject_time(expr.args[0])


def parse_system(source: str, name: str = "system") -> SystemDef:
    """Parse DSL source into a SystemDef with parameters bound.

    State variables appear in equation declaration order. Every bare
    identifier that is not a declared parameter is taken to be a state
    variable and must have its own equation.
    """
    parser = _Parser(source)
    params, equations = parser.parse_system_statements()
    if not equations:
        tok = parser.peek()
        raise ParseError("system has no equations", tok.line, tok.col)
    state_vars = tuple(var for var, _, _ in equations)
    for var, _, tok in equations:
        if var in params:
            raise ParseError(
                f"{var!r} is declared as both a parameter and a state variable",
                tok.line,
                tok.col,
            )
    state_index = {v: i for i, v in enumerate(state_vars)}
    rhs = tuple(
        _resolve(expr, state_index, params, context="system") for _, expr, _ in equations
    )
    return SystemDef(name, state_vars, params, rhs)


def parse_predicate(source: str, sys: SystemDef) -> Predicate:
    """Parse a boolean predicate over the state variables and parameters of sys."""
    parser = _Parser(source)
    parser.skip_separators()
    root = parser.parse_predicate_root()
    parser.skip_separators()
    tok = parser.peek()
    if tok.kind != "EOF":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
    state_index = {v: i for i, v in enumerate(sys.state_vars)}
    resolved = _resolve_bool(root, state_index, sys.parameters)
    return Predicate(resolved, sys.state_vars)
