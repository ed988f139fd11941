"""Expression and system AST node types, plus pretty-printing.

All nodes are frozen dataclasses: immutable after construction and safe to
share across workers. Structural equality is dataclass equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")

# Unrolling rule for constant integer exponents, shared by every evaluator
# and code emitter so all execution paths perform the same arithmetic.
UNROLL_MAX_EXPONENT = 8


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class StateRef:
    index: int


@dataclass(frozen=True)
class ParamRef:
    name: str


@dataclass(frozen=True)
class TimeRef:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")
        if len(self.args) != 1:
            raise ValueError(f"{self.func} takes 1 argument, got {len(self.args)}")


Expr = Union[Const, StateRef, ParamRef, TimeRef, Neg, BinOp, Call]


@dataclass(frozen=True)
class SystemDef:
    """A parsed ODE system: state variables, bound parameters, one RHS per variable."""

    name: str
    state_vars: tuple[str, ...]
    parameters: dict[str, float]
    rhs: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.state_vars) < 1:
            raise ValueError("system must have at least one state variable")
        if len(set(self.state_vars)) != len(self.state_vars):
            raise ValueError("state variable names must be unique")
        clash = set(self.state_vars) & set(self.parameters)
        if clash:
            raise ValueError(f"name used as both state variable and parameter: {sorted(clash)}")
        if len(self.rhs) != len(self.state_vars):
            raise ValueError("rhs list length must equal the number of state variables")

    @property
    def dimension(self) -> int:
        return len(self.state_vars)

    def rebind(self, **overrides: float) -> "SystemDef":
        """Return a new SystemDef with some parameter values replaced."""
        unknown = set(overrides) - set(self.parameters)
        if unknown:
            raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
        params = dict(self.parameters)
        params.update({k: float(v) for k, v in overrides.items()})
        return SystemDef(self.name, self.state_vars, params, self.rhs)


# Boolean predicate tree ----------------------------------------------------

@dataclass(frozen=True)
class Cmp:
    op: str  # one of < > <= >=
    left: Expr
    right: Expr


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


BoolExpr = Union[Cmp, And, Or, Not]


@dataclass(frozen=True)
class Predicate:
    """Boolean classification predicate over a state vector."""

    root: BoolExpr
    # kept for printing; not part of structural identity
    state_vars: tuple[str, ...] = field(default=(), compare=False)


# Pretty-printing -----------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3


def format_expr(e: Expr, state_vars: tuple[str, ...]) -> str:
    return _fmt(e, state_vars, 0)


def _fmt(e: Expr, sv: tuple[str, ...], parent_prec: int) -> str:
    if isinstance(e, Const):
        v = e.value
        if v == int(v) and abs(v) < 1e16:
            text = str(int(v))
        else:
            text = repr(v)
        if v < 0:
            return f"({text})" if parent_prec > 0 else text
        return text
    if isinstance(e, StateRef):
        return sv[e.index]
    if isinstance(e, ParamRef):
        return e.name
    if isinstance(e, TimeRef):
        return "t"
    if isinstance(e, Neg):
        inner = _fmt(e.operand, sv, _NEG_PREC)
        text = f"-{inner}"
        return f"({text})" if parent_prec > _NEG_PREC else text
    if isinstance(e, Call):
        return f"{e.func}({_fmt(e.args[0], sv, 0)})"
    if isinstance(e, BinOp):
        prec = _PRECEDENCE[e.op]
        # left-assoc for + - * /; the right operand of ^ is always a constant
        left = _fmt(e.left, sv, prec)
        right = _fmt(e.right, sv, prec + 1)
        text = f"{left} {e.op} {right}" if e.op != "^" else f"{left}^{right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"not an expression node: {e!r}")


def format_system(sys: SystemDef) -> str:
    """Render a SystemDef back to DSL source that re-parses to an equal value."""
    lines = [f"param {name} = {repr(value)}" for name, value in sys.parameters.items()]
    for var, expr in zip(sys.state_vars, sys.rhs):
        lines.append(f"diff({var}, t) = {format_expr(expr, sys.state_vars)}")
    return "\n".join(lines) + "\n"


def format_predicate(p: Predicate) -> str:
    return _fmt_bool(p.root, p.state_vars, 0)


_BOOL_PREC = {"or": 1, "and": 2, "not": 3}


def _fmt_bool(b: BoolExpr, sv: tuple[str, ...], parent_prec: int) -> str:
    if isinstance(b, Cmp):
        return f"{_fmt(b.left, sv, 0)} {b.op} {_fmt(b.right, sv, 0)}"
    if isinstance(b, And):
        text = f"{_fmt_bool(b.left, sv, 2)} and {_fmt_bool(b.right, sv, 3)}"
        return f"({text})" if parent_prec > 2 else text
    if isinstance(b, Or):
        text = f"{_fmt_bool(b.left, sv, 1)} or {_fmt_bool(b.right, sv, 2)}"
        return f"({text})" if parent_prec > 1 else text
    if isinstance(b, Not):
        return f"not ({_fmt_bool(b.operand, sv, 0)})"
    raise TypeError(f"not a boolean node: {b!r}")
