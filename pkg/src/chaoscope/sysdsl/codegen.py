"""Kernel source emission for external numeric plugins.

The only built-in dialect is c99, producing a translation unit with the
fixed entry point

    void derivs(double t, const double *x, double *dxdt)

Emission is deterministic: the same SystemDef always yields byte-identical
source. Constant integer exponents are unrolled into multiplication chains
using the same rule as every other evaluator in the package.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import EmissionError
from .ast import BinOp, Call, Const, Expr, Neg, ParamRef, StateRef, SystemDef, TimeRef
from .evaluate import unrolled_exponent


@dataclass(frozen=True)
class Dialect:
    name: str
    function_map: dict[str, str]


C99 = Dialect(
    name="c99",
    function_map={"sin": "sin", "cos": "cos", "exp": "exp", "ln": "log",
                  "sqrt": "sqrt", "abs": "fabs"},
)

DIALECTS: dict[str, Dialect] = {"c99": C99}


def _c_literal(v: float) -> str:
    text = f"{v:.17g}"
    # make sure the token reads as a double, not an int
    if all(c not in text for c in ".eE") and "inf" not in text and "nan" not in text:
        text += ".0"
    return text


def _c_expr(expr: Expr, sys: SystemDef, dialect: Dialect) -> str:
    if isinstance(expr, Const):
        return _c_literal(expr.value)
    if isinstance(expr, StateRef):
        return f"x[{expr.index}]"
    if isinstance(expr, ParamRef):
        return f"p_{expr.name}"
    if isinstance(expr, TimeRef):
        return "t"
    if isinstance(expr, Neg):
        return f"(-{_c_expr(expr.operand, sys, dialect)})"
    if isinstance(expr, Call):
        fn = dialect.function_map.get(expr.func)
        if fn is None:
            raise EmissionError(
                f"function {expr.func!r} has no mapping in dialect {dialect.name!r}"
            )
        return f"{fn}({_c_expr(expr.args[0], sys, dialect)})"
    if isinstance(expr, BinOp):
        if expr.op == "^":
            return _c_pow(_c_expr(expr.left, sys, dialect), expr.right.value)
        a = _c_expr(expr.left, sys, dialect)
        b = _c_expr(expr.right, sys, dialect)
        return f"({a} {expr.op} {b})"
    raise TypeError(f"not an expression node: {expr!r}")


def _c_pow(base: str, e: float) -> str:
    m = unrolled_exponent(e)
    if m is not None:
        if m == 0:
            return "1.0"
        prod = " * ".join([base] * abs(m))
        return f"(1.0 / ({prod}))" if m < 0 else f"({prod})"
    return f"pow({base}, {_c_literal(e)})"


def emit_kernel_source(sys: SystemDef, dialect: str = "c99") -> str:
    """Emit compilable kernel source implementing the derivative evaluation."""
    spec = DIALECTS.get(dialect)
    if spec is None:
        raise EmissionError(f"unsupported emission dialect {dialect!r}")
    lines = [
        f"/* derivative kernel for system '{sys.name}' ({sys.dimension} variables) */",
        "#include <math.h>",
        "",
        "void derivs(double t, const double *x, double *dxdt)",
        "{",
        "    (void)t;",
        "    (void)x;",
    ]
    for name, value in sys.parameters.items():
        lines.append(f"    const double p_{name} = {_c_literal(value)};")
    for i, expr in enumerate(sys.rhs):
        lines.append(f"    dxdt[{i}] = {_c_expr(expr, sys, spec)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
