"""Parser, evaluator, and code emission tests.

The evaluation oracle is an independent tree-walk in 50-digit mpmath
arithmetic; the compiled-kernel oracle is the C toolchain itself.
"""
from __future__ import annotations

import math
import shutil
import subprocess

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaoscope.errors import DomainError, EmissionError, ParseError
from chaoscope.sysdsl import (
    BinOp,
    Call,
    Cmp,
    Const,
    Neg,
    ParamRef,
    StateRef,
    TimeRef,
    compile_rhs,
    emit_kernel_source,
    eval_predicate,
    eval_rhs,
    format_predicate,
    format_system,
    parse_predicate,
    parse_system,
)
from chaoscope.sysdsl.codegen import DIALECTS, Dialect
from chaoscope.systems import (
    BLOWUP_SOURCE,
    CONSTANT_SOURCE,
    HARMONIC_SOURCE,
    LORENZ_SOURCE,
    lorenz,
)

FUNCTION_RICH_SOURCE = """\
param a = 0.7
param c = 8/3
diff(x, t) = sin(x) * exp(y / 4) + ln(2 + cos(y)) - a * t
diff(y, t) = sqrt(abs(x)) - c * y^3 + x^0.5 * 0 + 2^-2
"""


# parsing --------------------------------------------------------------------


def test_parse_lorenz():
    sys = parse_system(LORENZ_SOURCE, "lorenz")
    assert sys.state_vars == ("x", "y", "z")
    assert sys.dimension == 3
    assert set(sys.parameters) == {"sigma", "b", "R"}
    assert sys.parameters["b"] == pytest.approx(8.0 / 3.0, abs=0)


def test_parse_constant_system():
    sys = parse_system("diff(x,t) = 0")
    assert sys.dimension == 1
    assert sys.rhs == (Const(0.0),)


def test_parse_missing_equation():
    with pytest.raises(ParseError, match="missing equation.*'y'"):
        parse_system("diff(x,t) = y")


def test_parse_duplicate_equation():
    with pytest.raises(ParseError, match="duplicate equation"):
        parse_system("diff(x,t) = 1\ndiff(x,t) = 2")


def test_parse_syntax_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_system("diff(x,t) = 1 +\ndiff(y,t) = 2")
    assert "line" in str(err.value)


def test_parse_x_of_t_form_equals_bare_form():
    a = parse_system("diff(x(t), t) = x(t) * 2")
    b = parse_system("diff(x, t) = x * 2")
    assert a.rhs == b.rhs


def test_parse_param_rational_folds_to_double():
    sys = parse_system("param c = 8/3\ndiff(x,t) = c * x")
    assert sys.parameters["c"] == 8.0 / 3.0


def test_parse_exponent_must_be_constant():
    with pytest.raises(ParseError, match="exponent must be a numeric constant"):
        parse_system("diff(x,t) = x^x")


def test_parse_reserved_names_rejected():
    with pytest.raises(ParseError, match="reserved"):
        parse_system("diff(sin, t) = 1")
    with pytest.raises(ParseError, match="reserved"):
        parse_system("param t = 1\ndiff(x,t) = 1")


def test_parse_state_param_collision():
    with pytest.raises(ParseError, match="both a parameter and a state variable"):
        parse_system("param x = 1\ndiff(x,t) = 1")


# round trip -----------------------------------------------------------------


@pytest.mark.parametrize("source", [
    LORENZ_SOURCE, HARMONIC_SOURCE, CONSTANT_SOURCE, BLOWUP_SOURCE,
    FUNCTION_RICH_SOURCE,
    "diff(x,t) = -x^-2 + 0.001\n",
    "diff(x,t) = (x + 1) * (x - 2) / (x * x + 1)\n",
])
def test_round_trip(source):
    first = parse_system(source)
    again = parse_system(format_system(first))
    assert first == again


_names = st.sampled_from(["x", "y"])


def _exprs():
    leaves = st.one_of(
        st.floats(min_value=0.0, max_value=100.0, allow_nan=False).map(Const),
        _names.map(lambda n: StateRef(0 if n == "x" else 1)),
        st.just(ParamRef("a")),
        st.just(TimeRef()),
    )

    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from("+-*/"), children, children).map(
                lambda t: BinOp(t[0], t[1], t[2])
            ),
            st.tuples(children, st.integers(min_value=-3, max_value=3)).map(
                lambda t: BinOp("^", t[0], Const(float(t[1])))
            ),
            st.tuples(st.sampled_from(["sin", "cos", "exp", "ln", "sqrt", "abs"]), children).map(
                lambda t: Call(t[0], (t[1],))
            ),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@given(rx=_exprs(), ry=_exprs())
@settings(max_examples=60, deadline=None)
def test_round_trip_property(rx, ry):
    from chaoscope.sysdsl import SystemDef

    sys0 = SystemDef("prop", ("x", "y"), {"a": 1.25}, (rx, ry))
    # the fixpoint property: once through the printer, print/parse is stable
    first = parse_system(format_system(sys0))
    again = parse_system(format_system(first))
    assert first == again


# evaluation -----------------------------------------------------------------


def test_eval_lorenz_hand_value():
    sys = lorenz(sigma=10.0, b=8.0 / 3.0, R=28.0)
    out = eval_rhs(sys, 0.0, [1.0, 1.0, 1.0])
    assert out[0] == 0.0
    assert out[1] == 26.0
    assert out[2] == pytest.approx(-5.0 / 3.0, rel=1e-15)


def test_eval_constant_zero():
    sys = parse_system(CONSTANT_SOURCE)
    assert eval_rhs(sys, 3.0, [7.0]) == pytest.approx([0.0])


def test_eval_domain_error_reports_component():
    sys = parse_system("diff(x,t) = 1\ndiff(y,t) = ln(x)")
    with pytest.raises(DomainError, match="component 1"):
        eval_rhs(sys, 0.0, [-1.0, 0.0])


def test_eval_division_by_zero():
    sys = parse_system("diff(x,t) = 1/x")
    with pytest.raises(DomainError, match="division by zero"):
        eval_rhs(sys, 0.0, [0.0])


def _mp_eval(expr, sys, t, x):
    """Independent high-precision reference evaluation."""
    mp = mpmath.mp
    if isinstance(expr, Const):
        return mpmath.mpf(expr.value)
    if isinstance(expr, StateRef):
        return mpmath.mpf(float(x[expr.index]))
    if isinstance(expr, ParamRef):
        return mpmath.mpf(sys.parameters[expr.name])
    if isinstance(expr, TimeRef):
        return mpmath.mpf(t)
    if isinstance(expr, Neg):
        return -_mp_eval(expr.operand, sys, t, x)
    if isinstance(expr, Call):
        v = _mp_eval(expr.args[0], sys, t, x)
        return {"sin": mpmath.sin, "cos": mpmath.cos, "exp": mpmath.exp,
                "ln": mpmath.log, "sqrt": mpmath.sqrt, "abs": abs}[expr.func](v)
    if isinstance(expr, BinOp):
        a = _mp_eval(expr.left, sys, t, x)
        b = _mp_eval(expr.right, sys, t, x)
        return {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
                "/": lambda: a / b, "^": lambda: a**b}[expr.op]()
    raise TypeError(expr)


@pytest.mark.parametrize("source,box", [
    (LORENZ_SOURCE, (-20.0, 20.0)),
    (HARMONIC_SOURCE, (-5.0, 5.0)),
    (FUNCTION_RICH_SOURCE, (0.1, 3.0)),
])
def test_eval_matches_high_precision_reference(source, box):
    sys = parse_system(source)
    rng = np.random.default_rng(7)
    mpmath.mp.dps = 50
    for _ in range(100):
        x = rng.uniform(box[0], box[1], size=sys.dimension)
        t = float(rng.uniform(0, 10))
        got = eval_rhs(sys, t, x)
        for i, expr in enumerate(sys.rhs):
            ref = float(_mp_eval(expr, sys, t, x))
            assert got[i] == pytest.approx(ref, rel=1e-14, abs=1e-300)


def test_compiled_rhs_matches_eval_rhs_batched():
    # transcendental functions may differ by an ulp between the numpy and
    # libm scalar paths; everything else must agree exactly
    sys = parse_system(FUNCTION_RICH_SOURCE)
    f = compile_rhs(sys)
    rng = np.random.default_rng(11)
    xs = rng.uniform(0.1, 3.0, size=(50, 2))
    batch = f(1.5, xs)
    for i in range(50):
        single = eval_rhs(sys, 1.5, xs[i])
        assert batch[i] == pytest.approx(single, rel=1e-14)

    poly = lorenz()
    g = compile_rhs(poly)
    ys = rng.uniform(-20.0, 20.0, size=(50, 3))
    batch = g(0.0, ys)
    for i in range(50):
        assert np.array_equal(batch[i], eval_rhs(poly, 0.0, ys[i]))


# predicates -----------------------------------------------------------------


def test_predicate_simple_comparison():
    sys = lorenz()
    p = parse_predicate("x < 0", sys)
    assert isinstance(p.root, Cmp)
    assert eval_predicate(p, sys, [-0.5, 0, 0]) is True
    assert eval_predicate(p, sys, [0.0, 0, 0]) is False  # strict at the boundary


def test_predicate_conjunction_interval():
    sys = lorenz()
    p = parse_predicate("x<-4 and x > -11", sys)
    assert eval_predicate(p, sys, [-7.0, 0, 0]) is True
    assert eval_predicate(p, sys, [-3.0, 0, 0]) is False
    assert eval_predicate(p, sys, [-12.0, 0, 0]) is False


def test_predicate_expression_comparison():
    sys = lorenz()
    p = parse_predicate("x < y + 1", sys)
    assert eval_predicate(p, sys, [0.5, 0.0, 0.0]) is True
    assert eval_predicate(p, sys, [1.5, 0.0, 0.0]) is False


def test_predicate_unknown_identifier():
    sys = lorenz()
    with pytest.raises(ParseError, match="unknown identifier"):
        parse_predicate("w < 0", sys)


def test_predicate_time_rejected():
    sys = lorenz()
    with pytest.raises(ParseError, match="time reference"):
        parse_predicate("t < 1", sys)


def test_predicate_round_trip():
    sys = lorenz()
    for source in ["x < 0", "x<-4 and x > -11", "not (x < 0 or y >= 2)",
                   "(x + 1) * 2 <= z and not y > 0"]:
        p = parse_predicate(source, sys)
        assert parse_predicate(format_predicate(p), sys) == p


@given(x=st.floats(-10, 10), y=st.floats(-10, 10), z=st.floats(-10, 10))
@settings(max_examples=100, deadline=None)
def test_predicate_negation_property(x, y, z):
    sys = lorenz()
    p = parse_predicate("x < y and z >= 0", sys)
    q = parse_predicate("not (x < y and z >= 0)", sys)
    state = [x, y, z]
    assert eval_predicate(q, sys, state) == (not eval_predicate(p, sys, state))


# code emission --------------------------------------------------------------


def test_emit_lorenz_kernel_shape():
    src = emit_kernel_source(lorenz(), "c99")
    assert "void derivs(double t, const double *x, double *dxdt)" in src
    assert src.count("dxdt[") == 3
    assert src.isascii()
    assert "malloc" not in src


def test_emit_constant_kernel():
    src = emit_kernel_source(parse_system(CONSTANT_SOURCE), "c99")
    assert "dxdt[0] = 0.0;" in src


def test_emit_deterministic():
    sys = parse_system(FUNCTION_RICH_SOURCE)
    assert emit_kernel_source(sys, "c99") == emit_kernel_source(sys, "c99")


def test_emit_unknown_dialect():
    with pytest.raises(EmissionError, match="unsupported emission dialect"):
        emit_kernel_source(lorenz(), "fortran66")


def test_emit_unmapped_function(monkeypatch):
    crippled = Dialect(name="c99-no-log", function_map={"sin": "sin"})
    monkeypatch.setitem(DIALECTS, "c99-no-log", crippled)
    sys = parse_system("diff(x,t) = ln(x)")
    with pytest.raises(EmissionError, match="no mapping"):
        emit_kernel_source(sys, "c99-no-log")


_HARNESS = """\
#include <stdio.h>
void derivs(double t, const double *x, double *dxdt);
int main(void)
{
    double t, x[16], d[16];
    int i;
    while (scanf("%lf", &t) == 1) {
        for (i = 0; i < N; ++i) scanf("%lf", &x[i]);
        derivs(t, x, d);
        for (i = 0; i < N; ++i) printf("%.17g ", d[i]);
        printf("\\n");
    }
    return 0;
}
"""


@pytest.mark.skipif(shutil.which("cc") is None, reason="no C compiler")
@pytest.mark.parametrize("source,box", [
    (LORENZ_SOURCE, (-20.0, 20.0)),
    (HARMONIC_SOURCE, (-5.0, 5.0)),
    (CONSTANT_SOURCE, (-1.0, 1.0)),
    (BLOWUP_SOURCE, (-2.0, 2.0)),
    (FUNCTION_RICH_SOURCE, (0.1, 3.0)),
])
def test_emitted_kernel_matches_eval_rhs(tmp_path, source, box):
    sys = parse_system(source)
    (tmp_path / "derivs.c").write_text(emit_kernel_source(sys, "c99"))
    (tmp_path / "main.c").write_text(f"#define N {sys.dimension}\n" + _HARNESS)
    subprocess.run(
        ["cc", "-O2", "-ffp-contract=off", "-o", "harness", "derivs.c", "main.c", "-lm"],
        cwd=tmp_path, check=True, capture_output=True,
    )
    rng = np.random.default_rng(3)
    states = rng.uniform(box[0], box[1], size=(100, sys.dimension))
    ts = rng.uniform(0.0, 5.0, size=100)
    feed = "\n".join(
        f"{t:.17g} " + " ".join(f"{v:.17g}" for v in row)
        for t, row in zip(ts, states)
    )
    proc = subprocess.run([str(tmp_path / "harness")], input=feed, text=True,
                          capture_output=True, check=True)
    for line, t, row in zip(proc.stdout.splitlines(), ts, states):
        got = np.array([float(v) for v in line.split()])
        want = eval_rhs(sys, t, row)
        denom = np.maximum(np.maximum(np.abs(got), np.abs(want)), 1e-300)
        assert np.max(np.abs(got - want) / denom) <= 1e-12
