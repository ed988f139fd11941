"""System-definition DSL: parsing, evaluation, and kernel code emission."""
from .ast import (
    And,
    BinOp,
    BoolExpr,
    Call,
    Cmp,
    Const,
    Expr,
    FUNCTIONS,
    Neg,
    Not,
    Or,
    ParamRef,
    Predicate,
    StateRef,
    SystemDef,
    TimeRef,
    format_expr,
    format_predicate,
    format_system,
)
from .codegen import DIALECTS, Dialect, emit_kernel_source
from .evaluate import compile_rhs, eval_predicate, eval_rhs
from .parser import parse_predicate, parse_system

__all__ = [
    "And", "BinOp", "BoolExpr", "Call", "Cmp", "Const", "Expr", "FUNCTIONS",
    "Neg", "Not", "Or", "ParamRef", "Predicate", "StateRef", "SystemDef",
    "TimeRef", "format_expr", "format_predicate", "format_system",
    "DIALECTS", "Dialect", "emit_kernel_source",
    "compile_rhs", "eval_predicate", "eval_rhs",
    "parse_predicate", "parse_system",
]
