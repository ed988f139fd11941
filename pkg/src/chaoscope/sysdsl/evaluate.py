"""Expression evaluation: checked tree-walk and generated vectorized form.

`eval_rhs` / `eval_predicate` interpret the AST directly with full domain
checking. `compile_rhs` generates a numpy function evaluating all RHS
components at once for a single state vector or a whole batch; it performs
the same arithmetic (identical operation order, identical integer-power
unrolling) but reports domain violations as non-finite values instead of
exceptions, which is what the integrator's failure detection expects.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError
from .ast import (
    And,
    BinOp,
    Call,
    Cmp,
    Const,
    Expr,
    Neg,
    Not,
    Or,
    ParamRef,
    Predicate,
    StateRef,
    SystemDef,
    TimeRef,
    UNROLL_MAX_EXPONENT,
)

_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "ln": math.log,
          "sqrt": math.sqrt, "abs": abs}


def unrolled_exponent(value: float) -> int | None:
    """The integer exponent to unroll as repeated multiplication, else None."""
    if value == int(value) and abs(value) <= UNROLL_MAX_EXPONENT:
        return int(value)
    return None


def _eval(expr: Expr, sys: SystemDef, t: float, x: Sequence[float]) -> float:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, StateRef):
        return float(x[expr.index])
    if isinstance(expr, ParamRef):
        return sys.parameters[expr.name]
    if isinstance(expr, TimeRef):
        return t
    if isinstance(expr, Neg):
        return -_eval(expr.operand, sys, t, x)
    if isinstance(expr, Call):
        v = _eval(expr.args[0], sys, t, x)
        if expr.func == "ln" and v <= 0.0:
            raise DomainError(f"ln of non-positive value {v!r}")
        if expr.func == "sqrt" and v < 0.0:
            raise DomainError(f"sqrt of negative value {v!r}")
        try:
            return _FUNCS[expr.func](v)
        except (ValueError, OverflowError) as exc:
            raise DomainError(f"{expr.func}({v!r}): {exc}") from exc
    if isinstance(expr, BinOp):
        a = _eval(expr.left, sys, t, x)
        if expr.op == "^":
            return _eval_pow(a, expr.right)
        b = _eval(expr.right, sys, t, x)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "/":
            if b == 0.0:
                raise DomainError("division by zero")
            return a / b
    raise TypeError(f"not an expression node: {expr!r}")


def _eval_pow(base: float, exponent: Expr) -> float:
    # parser guarantees the exponent is a Const
    e = exponent.value
    m = unrolled_exponent(e)
    if m is not None:
        if m == 0:
            return 1.0
        acc = base
        for _ in range(abs(m) - 1):
            acc = acc * base
        if m < 0:
            if acc == 0.0:
                raise DomainError("zero raised to a negative power")
            return 1.0 / acc
        return acc
    if base < 0.0:
        raise DomainError(f"negative base {base!r} with non-integer exponent {e!r}")
    if base == 0.0 and e < 0.0:
        raise DomainError("zero raised to a negative power")
    try:
        return math.pow(base, e)
    except (ValueError, OverflowError) as exc:
        raise DomainError(f"pow({base!r}, {e!r}): {exc}") from exc


def eval_rhs(sys: SystemDef, t: float, x: Sequence[float]) -> np.ndarray:
    """Evaluate the derivative vector F(x, t) component-wise with domain checks."""
    if len(x) != sys.dimension:
        raise ValueError(f"state length {len(x)} != system dimension {sys.dimension}")
    out = np.empty(sys.dimension)
    for i, expr in enumerate(sys.rhs):
        try:
            out[i] = _eval(expr, sys, t, x)
        except DomainError as exc:
            raise DomainError(str(exc), component=i) from None
    return out


def eval_predicate(p: Predicate, sys: SystemDef, x: Sequence[float]) -> bool:
    """Evaluate a classification predicate against a state vector."""
    if len(x) != sys.dimension:
        raise ValueError(f"state length {len(x)} != system dimension {sys.dimension}")
    return _eval_bool(p.root, sys, x)


def _eval_bool(node, sys: SystemDef, x) -> bool:
    if isinstance(node, Cmp):
        a = _eval(node.left, sys, 0.0, x)
        b = _eval(node.right, sys, 0.0, x)
        if node.op == "<":
            return a < b
        if node.op == ">":
            return a > b
        if node.op == "<=":
            return a <= b
        return a >= b
    if isinstance(node, And):
        return _eval_bool(node.left, sys, x) and _eval_bool(node.right, sys, x)
    if isinstance(node, Or):
        return _eval_bool(node.left, sys, x) or _eval_bool(node.right, sys, x)
    if isinstance(node, Not):
        return not _eval_bool(node.operand, sys, x)
    raise TypeError(f"not a boolean node: {node!r}")


# Generated vectorized evaluation -------------------------------------------

_NP_FUNCS = {"sin": "np.sin", "cos": "np.cos", "exp": "np.exp", "ln": "np.log",
             "sqrt": "np.sqrt", "abs": "np.abs"}


def _py_expr(expr: Expr, sys: SystemDef) -> str:
    if isinstance(expr, Const):
        return repr(expr.value)
    if isinstance(expr, StateRef):
        return f"x[..., {expr.index}]"
    if isinstance(expr, ParamRef):
        return repr(sys.parameters[expr.name])
    if isinstance(expr, TimeRef):
        return "t"
    if isinstance(expr, Neg):
        return f"(-{_py_expr(expr.operand, sys)})"
    if isinstance(expr, Call):
        return f"{_NP_FUNCS[expr.func]}({_py_expr(expr.args[0], sys)})"
    if isinstance(expr, BinOp):
        if expr.op == "^":
            return _py_pow(_py_expr(expr.left, sys), expr.right.value)
        a = _py_expr(expr.left, sys)
        b = _py_expr(expr.right, sys)
        return f"({a} {expr.op} {b})"
    raise TypeError(f"not an expression node: {expr!r}")


def _py_pow(base: str, e: float) -> str:
    m = unrolled_exponent(e)
    if m is not None:
        if m == 0:
            return "1.0"
        prod = " * ".join([base] * abs(m))
        return f"(1.0 / ({prod}))" if m < 0 else f"({prod})"
    return f"(np.power({base}, {repr(e)}))"


def compile_rhs(sys: SystemDef) -> Callable[[float, np.ndarray], np.ndarray]:
    """Generate f(t, x) -> dx/dt operating on (n,) vectors or (m, n) batches.

    Domain violations produce NaN/Inf components rather than raising.
    """
    lines = ["def rhs(t, x):", "    out = np.empty_like(x)"]
    for i, expr in enumerate(sys.rhs):
        lines.append(f"    out[..., {i}] = {_py_expr(expr, sys)}")
    lines.append("    return out")
    namespace: dict = {"np": np}
    exec(compile("\n".join(lines), f"<chaoscope-rhs:{sys.name}>", "exec"), namespace)
    return namespace["rhs"]
