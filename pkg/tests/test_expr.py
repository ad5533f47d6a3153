"""Parser, evaluator and exact-derivative tests."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from curvcheck import expr as ex
from curvcheck.expr import (
    Bin,
    Bindings,
    DomainError,
    IntPow,
    Num,
    ParseError,
    UnboundSymbolError,
    UndeclaredSymbolError,
    Unary,
    Var,
    compile_exprs,
    diff,
    evaluate,
    parse,
    to_text,
)


def ev(src, coords=("x",), consts=(), point=None, values=None):
    e = parse(src, coords, consts)
    return evaluate(e, point or {}, values or {})


class TestParse:
    def test_sin_squared_shape(self):
        e = parse("sin(x)^2", ["x"])
        assert e == IntPow(Unary("sin", Var("x")), 2)

    def test_rn_profile_parses(self):
        e = parse("1 - 2*M/r + Q^2/r^2", ["r"], ["M", "Q"])
        vars_, consts_ = ex.free_symbols(e)
        assert vars_ == {"r"} and consts_ == {"M", "Q"}

    def test_undeclared_symbol(self):
        with pytest.raises(UndeclaredSymbolError):
            parse("b*(1+q*b)", ["x"], ["q"])

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as info:
            parse("x + * 2", ["x"])
        assert info.value.pos == 4

    def test_unknown_function(self):
        with pytest.raises(ParseError):
            parse("sinh(x)", ["x"])

    def test_unbalanced_paren(self):
        with pytest.raises(ParseError):
            parse("(x + 1", ["x"])

    def test_precedence(self):
        assert ev("2 + 3 * 4") == 14.0
        assert ev("2 * 3 ^ 2") == 18.0
        assert ev("-3^2") == -9.0  # pow binds tighter than unary minus
        assert ev("2^-2") == 0.25
        assert ev("2^3^2") == 512.0  # right associative
        assert ev("(2+3)*4") == 20.0

    def test_integer_power_detection(self):
        assert isinstance(parse("x^3", ["x"]), IntPow)
        assert isinstance(parse("x^(-2)", ["x"]), IntPow)
        assert isinstance(parse("x^2.5", ["x"]), Bin)

    def test_coordinate_constant_clash(self):
        with pytest.raises(ex.ExprError):
            parse("x", ["x"], ["x"])


class TestEvaluate:
    def test_square(self):
        assert ev("x^2", point={"x": 3.0}) == 9.0

    def test_rn_profile_value(self):
        # 1 - 2/3 + 1/9 at r=3, M=Q=1
        val = ev("1 - 2*M/r + Q^2/r^2", ("r",), ("M", "Q"),
                 point={"r": 3.0}, values={"M": 1.0, "Q": 1.0})
        assert val == pytest.approx(4.0 / 9.0, rel=1e-15)

    def test_log_domain_error(self):
        with pytest.raises(DomainError):
            ev("log(x)", point={"x": -1.0})

    def test_sqrt_domain_error(self):
        with pytest.raises(DomainError):
            ev("sqrt(x)", point={"x": -4.0})

    def test_division_by_zero_names_subexpression(self):
        with pytest.raises(DomainError) as info:
            ev("1/(x-1)", point={"x": 1.0})
        assert "x - 1" in str(info.value)

    def test_unbound_constant(self):
        e = parse("M*x", ["x"], ["M"])
        with pytest.raises(UnboundSymbolError):
            evaluate(e, {"x": 1.0}, {})

    def test_bindings_reject_missing(self):
        b = Bindings(M=1.0)
        assert b["M"] == 1.0
        with pytest.raises(UnboundSymbolError):
            b["Q"]

    def test_purity(self):
        e = parse("sin(x)*exp(x) - x^3/7", ["x"])
        a = evaluate(e, {"x": 0.731})
        b = evaluate(e, {"x": 0.731})
        assert a == b


class TestDiff:
    def test_sin_squared_at_pi_over_4(self):
        e = parse("sin(x)^2", ["x"])
        d = diff(e, "x")
        assert evaluate(d, {"x": math.pi / 4}) == pytest.approx(1.0, abs=1e-15)

    def test_constant_derivative_zero(self):
        e = parse("M", ["x"], ["M"])
        d = diff(e, "x")
        assert evaluate(d, {"x": 5.0}, {"M": 3.0}) == 0.0

    def test_second_derivative_cubic(self):
        e = parse("x^3", ["x"])
        d2 = diff(diff(e, "x"), "x")
        assert evaluate(d2, {"x": 2.0}) == 12.0

    def test_abs_derivative_is_sign(self):
        e = parse("abs(x)", ["x"])
        d = diff(e, "x")
        assert evaluate(d, {"x": 2.5}) == 1.0
        assert evaluate(d, {"x": -2.5}) == -1.0
        with pytest.raises(DomainError):
            evaluate(d, {"x": 0.0})

    def test_general_power_derivative(self):
        e = parse("x^2.5", ["x"])
        d = diff(e, "x")
        assert evaluate(d, {"x": 2.0}) == pytest.approx(2.5 * 2.0 ** 1.5, rel=1e-14)

    def test_negative_intpow_derivative(self):
        e = parse("x^(-2)", ["x"])
        d = diff(e, "x")
        assert evaluate(d, {"x": 2.0}) == pytest.approx(-2.0 / 8.0, rel=1e-14)


# ---------------------------------------------------------------------------
# Randomized properties, on the shared domain-safe generator.

from helpers import COORDS, central_difference, random_expr, random_point  # noqa: E402


def test_derivative_matches_central_difference_bulk():
    rng = random.Random(20240817)
    for _ in range(1000):
        e = random_expr(rng, rng.choice([1, 2, 3]))
        p = random_point(rng)
        d = diff(e, "x")
        exact = evaluate(d, p)
        approx = central_difference(e, p, "x")
        assert abs(exact - approx) <= 1e-6 * (1.0 + abs(exact))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=150, deadline=None)
def test_diff_linearity(seed):
    rng = random.Random(seed)
    e1 = random_expr(rng, 2)
    e2 = random_expr(rng, 2)
    a, b = rng.uniform(-2, 2), rng.uniform(-2, 2)
    p = random_point(rng)
    combo = ex.add(ex.mul(Num(a), e1), ex.mul(Num(b), e2))
    lhs = evaluate(diff(combo, "x"), p)
    rhs = a * evaluate(diff(e1, "x"), p) + b * evaluate(diff(e2, "x"), p)
    assert abs(lhs - rhs) <= 1e-12 * (1.0 + max(abs(lhs), abs(rhs)))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=150, deadline=None)
def test_diff_product_rule(seed):
    rng = random.Random(seed)
    e1 = random_expr(rng, 2)
    e2 = random_expr(rng, 2)
    p = random_point(rng)
    lhs = evaluate(diff(ex.Bin("*", e1, e2), "x"), p)
    rhs = (evaluate(diff(e1, "x"), p) * evaluate(e2, p)
           + evaluate(e1, p) * evaluate(diff(e2, "x"), p))
    assert abs(lhs - rhs) <= 1e-12 * (1.0 + max(abs(lhs), abs(rhs)))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=150, deadline=None)
def test_diff_chain_rule(seed):
    rng = random.Random(seed)
    inner = random_expr(rng, 2)
    p = random_point(rng)
    lhs = evaluate(diff(Unary("sin", inner), "x"), p)
    rhs = math.cos(evaluate(inner, p)) * evaluate(diff(inner, "x"), p)
    assert abs(lhs - rhs) <= 1e-12 * (1.0 + max(abs(lhs), abs(rhs)))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_print_parse_roundtrip(seed):
    rng = random.Random(seed)
    e = random_expr(rng, rng.choice([1, 2, 3]))
    text = to_text(e)
    back = parse(text, COORDS)
    again = parse(to_text(back), COORDS)
    for _ in range(5):
        p = random_point(rng)
        assert evaluate(back, p) == evaluate(e, p)
        assert evaluate(again, p) == evaluate(e, p)


def test_roundtrip_of_parsed_sources():
    sources = [
        "1 - 2*M/r + Q^2/r^2",
        "sin(x)^2 + cos(x)^2",
        "-x^2 + 3*x/(1 + x^2)",
        "sqrt(1.5 + x^2)*exp(0.5*x) - log(2 + x^2)",
        "x^(-3) - 2^x",
    ]
    for src in sources:
        e = parse(src, ["r", "x"], ["M", "Q"])
        back = parse(to_text(e), ["r", "x"], ["M", "Q"])
        point = {"r": 3.2, "x": 0.7}
        consts = {"M": 1.1, "Q": 0.8}
        assert evaluate(back, point, consts) == evaluate(e, point, consts)


def test_compiled_matches_treewalk():
    rng = random.Random(7)
    exprs = [random_expr(rng, 3) for _ in range(40)]
    f = compile_exprs(exprs, COORDS, {})
    for _ in range(25):
        p = random_point(rng)
        got = f(p["x"], p["y"])
        want = tuple(evaluate(e, p) for e in exprs)
        assert got == want


def test_compiled_inlines_constants():
    e = parse("M*x + Q^2", ["x"], ["M", "Q"])
    f = compile_exprs([e], ["x"], {"M": 2.0, "Q": 3.0})
    assert f(1.5) == (2.0 * 1.5 + 9.0,)
    with pytest.raises(UnboundSymbolError):
        compile_exprs([e], ["x"], {"M": 2.0})
