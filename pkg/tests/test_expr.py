import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from myller.expr import (Binary, Const, ExprDomainError, ExprError, ExprFunc,
                         ExprSyntaxError, SampledFunc, Unary, Var, combine, diff,
                         differentiate, evaluate, evaluate_ast, parse_expr, to_text)

from conftest import central_difference, usable_asts


def test_parse_literal():
    assert parse_expr("3") == Const(3.0)


def test_parse_structure():
    expected = Binary("+", Unary("sin", Binary("*", Const(2.0), Var())),
                      Binary("^", Var(), Const(2.0)))
    assert parse_expr("sin(2*s) + s^2") == expected


def test_whitespace_insensitive():
    assert parse_expr("  sin ( 2 *s )+s ^2 ") == parse_expr("sin(2*s)+s^2")


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("2*/s")
    assert info.value.offset == 2


@pytest.mark.parametrize("text, offset", [("", 0), ("s +", 3), ("(s", 2), ("s s", 2),
                                          ("2 $ s", 2)])
def test_syntax_errors(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert info.value.offset == offset


def test_unknown_identifier():
    with pytest.raises(ExprError, match="unknown identifier 'x'"):
        parse_expr("sin(x)")


def test_arity_mismatch():
    with pytest.raises(ExprError, match="arity"):
        parse_expr("sin(s, 2)")


def test_power_is_right_associative_and_unary_minus_binds_tight():
    assert parse_expr("2^3^2") == Binary("^", Const(2.0), Binary("^", Const(3.0), Const(2.0)))
    assert evaluate("2^3^2", 0.0) == 512.0
    # '-' base: the minus belongs to the base, before '^'
    assert evaluate("-s^2", 3.0) == 9.0
    assert evaluate("-(s^2)", 3.0) == -9.0


CORPUS = ["3", "s", "sin(2*s) + s^2", "-s", "--s", "exp(-s/2)*cos(3*s)",
          "sqrt(1 + s^2) - log(2 + s)", "abs(s - 1)^1.5", "tan(s/4)/(1+s)",
          "1.5e-3*s^-2", "(s)", "2^3^2", "s - (1 - s)", "s/(2/s)", "-(-(3))"]


@pytest.mark.parametrize("text", CORPUS)
def test_round_trip(text):
    ast = parse_expr(text)
    printed = to_text(ast)
    assert parse_expr(printed) == ast
    assert to_text(parse_expr(printed)) == printed


def test_eval_examples():
    assert evaluate("s^2", 3) == 9
    assert evaluate("sin(s)", 0) == 0


@pytest.mark.parametrize("text, s", [("log(s)", 0.0), ("log(s - 1)", 0.5), ("sqrt(s)", -1.0),
                                     ("1/s", 0.0), ("s^0.5", -2.0), ("s^-1", 0.0)])
def test_domain_errors(text, s):
    with pytest.raises(ExprDomainError):
        evaluate(text, s)


def test_vectorized_eval():
    s = np.linspace(0, 1, 7)
    np.testing.assert_allclose(evaluate("s^2 + 1", s), s ** 2 + 1, rtol=0, atol=0)


def test_samples_reproduce_line():
    f = SampledFunc([0, 1, 2, 3], [1, 2, 3, 4])
    # oracle: the line s + 1
    assert f(1.5) == pytest.approx(2.5, abs=1e-14)


def test_samples_exact_at_knots(rng):
    knots = np.cumsum(rng.uniform(0.1, 1.0, 12))
    values = rng.normal(size=12)
    f = SampledFunc(knots, values)
    assert np.array_equal(f(knots), values)


def test_samples_validation():
    with pytest.raises(ValueError):
        SampledFunc([0, 1, 2], [0, 1, 2])
    with pytest.raises(ValueError):
        SampledFunc([0, 1, 1, 2], [0, 1, 2, 3])
    f = SampledFunc([0, 1, 2, 3], [0, 1, 2, 3])
    with pytest.raises(ExprDomainError):
        f(3.5)


def test_diff_examples():
    assert diff("s^2")(3) == 6
    assert diff("sin(2*s)")(0) == 2


def test_diff_samples_of_cube():
    knots = np.linspace(0, 2, 65)
    d = SampledFunc(knots, knots ** 3).diff()
    # oracle: 3 s^2
    assert d(1.0) == pytest.approx(3.0, abs=1e-6)


def test_diff_samples_accuracy_nonuniform(rng):
    knots = np.sort(np.concatenate([[0, 3], rng.uniform(0, 3, 400)]))
    d = SampledFunc(knots, np.sin(knots)).diff()
    inner = knots[2:-2]
    assert np.max(np.abs(d(inner) - np.cos(inner))) < 1e-5


def test_diff_samples_fourth_order():
    errs = []
    for n in (41, 81):
        knots = np.linspace(0, 2, n)
        d = SampledFunc(knots, np.exp(knots)).diff()
        errs.append(np.max(np.abs(d.values[2:-2] - np.exp(knots[2:-2]))))
    assert errs[0] / errs[1] > 14


def test_symbolic_diff_matches_finite_differences():
    rng = np.random.default_rng(7)
    points = np.sort(rng.uniform(0.5, 2.0, 20))
    for ast in usable_asts(11, 50, points):
        f = ExprFunc(ast)
        exact = f.diff()(points)
        approx = central_difference(f, points)
        scale = np.maximum(1.0, np.abs(exact))
        assert np.all(np.abs(exact - approx) <= 1e-6 * scale), to_text(ast)


def test_derivative_constant_folding():
    assert differentiate(parse_expr("3*s")) == Const(3.0)
    assert differentiate(parse_expr("7")) == Const(0.0)
    assert differentiate(parse_expr("s + 2")) == Const(1.0)


def test_general_power_rule():
    f = ExprFunc.parse("s^s")
    assert f.diff()(2.0) == pytest.approx(4 * (math.log(2) + 1), rel=1e-14)


def test_combine_symbolic_and_sampled():
    knots = np.linspace(0, 1, 11)
    g = combine(lambda a, b: a * b, lambda a, b: Binary("*", a, b), "s", "2")
    assert isinstance(g, ExprFunc) and g(0.5) == 1.0
    h = combine(lambda a, b: a * b, lambda a, b: None, SampledFunc(knots, knots), "2")
    assert isinstance(h, SampledFunc)
    np.testing.assert_allclose(h.values, 2 * knots)


_leaf = st.one_of(st.just(Var()), st.floats(0, 100, allow_nan=False).map(Const))
_trees = st.recursive(
    _leaf,
    lambda sub: st.one_of(
        st.builds(Unary, st.sampled_from(["neg", "sin", "cos", "tan", "exp", "log", "sqrt", "abs"]), sub),
        st.builds(Binary, st.sampled_from(list("+-*/^")), sub, sub)),
    max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(_trees)
def test_print_parse_idempotent(ast):
    once = parse_expr(to_text(ast))
    assert parse_expr(to_text(once)) == once
