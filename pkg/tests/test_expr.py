import numpy as np
import pytest
from hypothesis import given, strategies as st

from bfpde.expr import (
    Add,
    Call,
    Const,
    Div,
    EvalDomainError,
    Mul,
    Neg,
    ParseError,
    Pow,
    Sub,
    UnboundVariableError,
    Var,
    differentiate,
    evaluate,
    finite_difference,
    free_variables,
    parse,
    to_string,
)

PARAMS = ("beta", "gamma")


class TestParse:
    def test_worked_candidate_shape(self):
        e = parse("x1^beta * x2 + gamma", PARAMS)
        assert e == Add(Mul(Pow(Var("x1"), Var("beta")), Var("x2")), Var("gamma"))

    def test_bare_variable(self):
        assert parse("x1") == Var("x1")

    def test_mul_div_left_associative(self):
        e = parse("beta * x2 / x1", PARAMS)
        assert e == Div(Mul(Var("beta"), Var("x2")), Var("x1"))
        assert evaluate(e, {"beta": 0.5, "x1": 2.0, "x2": 3.0}) == pytest.approx(0.75)

    def test_power_right_associative(self):
        assert parse("x1^x2^2") == Pow(Var("x1"), Pow(Var("x2"), Const(2.0)))

    def test_unary_minus_binds_below_power(self):
        assert parse("-x1^2") == Neg(Pow(Var("x1"), Const(2.0)))
        assert parse("2^-x1") == Pow(Const(2.0), Neg(Var("x1")))

    def test_function_call(self):
        assert parse("ln(x1) + exp(x2)") == Add(Call("ln", Var("x1")), Call("exp", Var("x2")))

    def test_scientific_notation(self):
        assert parse("1.5e-3") == Const(1.5e-3)

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse("x1 +* x2")
        assert err.value.position == 4

    def test_undeclared_identifier(self):
        with pytest.raises(ParseError, match="undeclared identifier 'qq'"):
            parse("x1 + qq")

    def test_unknown_function(self):
        with pytest.raises(ParseError, match="unknown function"):
            parse("tan(x1)")

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse("   ")

    def test_trailing_tokens(self):
        with pytest.raises(ParseError):
            parse("x1 x2")

    def test_unbalanced_parens(self):
        with pytest.raises(ParseError):
            parse("(x1 + x2")


class TestEvaluate:
    def test_power_of_one_base(self):
        e = parse("x1^beta*x2+gamma", PARAMS)
        assert evaluate(e, {"x1": 1.0, "x2": 5.0, "beta": 0.5, "gamma": 0.0}) == 5.0

    def test_division_by_zero(self):
        e = parse("x1/x2")
        with pytest.raises(EvalDomainError, match="division by zero"):
            evaluate(e, {"x1": 1.0, "x2": 0.0})

    def test_power_and_offset_hand_oracle(self):
        # 4^0.5 * 1 + 2 = 4
        e = parse("x1^beta*x2+gamma", PARAMS)
        assert evaluate(e, {"x1": 4.0, "x2": 1.0, "beta": 0.5, "gamma": 2.0}) == pytest.approx(4.0)

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariableError):
            evaluate(parse("x1 + x2"), {"x1": 1.0})

    def test_ln_domain(self):
        with pytest.raises(EvalDomainError, match="ln"):
            evaluate(parse("ln(x1)"), {"x1": -1.0})

    def test_sqrt_domain(self):
        with pytest.raises(EvalDomainError, match="sqrt"):
            evaluate(parse("sqrt(x1)"), {"x1": -4.0})

    def test_zero_to_negative_power(self):
        with pytest.raises(EvalDomainError, match="zero base"):
            evaluate(parse("x1^(-1)"), {"x1": 0.0})

    def test_negative_base_fractional_exponent(self):
        with pytest.raises(EvalDomainError, match="non-integer exponent"):
            evaluate(parse("x1^x2"), {"x1": -2.0, "x2": 0.5})

    def test_negative_base_integer_exponent_ok(self):
        assert evaluate(parse("x1^x2"), {"x1": -2.0, "x2": 3.0}) == -8.0

    def test_array_binding_broadcasts(self):
        e = parse("x1 * x2")
        out = evaluate(e, {"x1": np.array([1.0, 2.0, 3.0]), "x2": 10.0})
        np.testing.assert_array_equal(out, [10.0, 20.0, 30.0])

    def test_array_domain_check_any_element(self):
        e = parse("ln(x1)")
        with pytest.raises(EvalDomainError):
            evaluate(e, {"x1": np.array([2.0, 0.0])})


class TestDifferentiate:
    def test_worked_candidate_x1_partial(self):
        # closed form: beta * x1^(beta-1) * x2
        e = parse("x1^beta*x2+gamma", PARAMS)
        d = differentiate(e, "x1")
        for x1, x2, beta in [(1.0, 5.0, 0.5), (2.0, 3.0, 0.25), (4.0, 0.5, 0.75)]:
            got = evaluate(d, {"x1": x1, "x2": x2, "beta": beta, "gamma": 1.0})
            assert got == pytest.approx(beta * x1 ** (beta - 1.0) * x2, rel=1e-14)

    def test_worked_candidate_x2_partial(self):
        e = parse("x1^beta*x2+gamma", PARAMS)
        d = differentiate(e, "x2")
        assert d == Pow(Var("x1"), Var("beta"))
        for x1, beta in [(1.0, 0.5), (3.0, 0.25)]:
            got = evaluate(d, {"x1": x1, "x2": 9.9, "beta": beta, "gamma": 1.0})
            assert got == pytest.approx(x1**beta, rel=1e-14)

    def test_constant_rule(self):
        assert differentiate(parse("gamma", PARAMS), "x1") == Const(0.0)

    def test_quotient_rule(self):
        d = differentiate(parse("x1/x2"), "x2")
        assert evaluate(d, {"x1": 6.0, "x2": 2.0}) == pytest.approx(-1.5)

    def test_chain_rules(self):
        cases = {
            "exp(2*x1)": lambda x: 2.0 * np.exp(2.0 * x),
            "ln(x1)": lambda x: 1.0 / x,
            "sqrt(x1)": lambda x: 0.5 / np.sqrt(x),
            "sin(x1)": np.cos,
            "cos(x1)": lambda x: -np.sin(x),
        }
        for text, want in cases.items():
            d = differentiate(parse(text), "x1")
            assert evaluate(d, {"x1": 1.3}) == pytest.approx(want(1.3), rel=1e-12)

    def test_derivative_wrt_parameter(self):
        # d/dbeta x1^beta = x1^beta * ln(x1), needed by the envelope probes
        d = differentiate(parse("x1^beta", PARAMS), "beta")
        got = evaluate(d, {"x1": 2.0, "beta": 0.5})
        assert got == pytest.approx(2.0**0.5 * np.log(2.0), rel=1e-14)


class TestFiniteDifference:
    def test_square_slope(self):
        got = finite_difference(parse("x1^2"), "x1", {"x1": 3.0}, 1e-5)
        assert got == pytest.approx(6.0, abs=1e-8)

    def test_constant_is_exactly_flat(self):
        got = finite_difference(parse("gamma", PARAMS), "x1", {"x1": 2.0, "gamma": 7.0}, 1e-5)
        assert got == 0.0

    def test_matches_symbolic_on_power(self):
        e = parse("x1^beta*x2", PARAMS)
        b = {"x1": 2.0, "x2": 3.0, "beta": 0.5}
        sym = evaluate(differentiate(e, "x1"), b)
        fd = finite_difference(e, "x1", b, 1e-5)
        assert abs(sym - fd) <= 1e-6 * (1.0 + abs(sym))

    def test_rejects_non_positive_step(self):
        with pytest.raises(ValueError):
            finite_difference(parse("x1"), "x1", {"x1": 1.0}, 0.0)


def _leaves():
    consts = st.floats(0, 10, allow_nan=False, allow_infinity=False).map(Const)
    names = st.sampled_from(["x1", "x2", "beta", "gamma"]).map(Var)
    return st.one_of(consts, names)


def _compound(children):
    pair = st.tuples(children, children)
    return st.one_of(
        pair.map(lambda ab: Add(*ab)),
        pair.map(lambda ab: Sub(*ab)),
        pair.map(lambda ab: Mul(*ab)),
        pair.map(lambda ab: Div(*ab)),
        pair.map(lambda ab: Pow(*ab)),
        children.map(Neg),
        st.tuples(st.sampled_from(["exp", "ln", "sqrt", "sin", "cos"]), children).map(
            lambda fa: Call(*fa)
        ),
    )


grammar_asts = st.recursive(_leaves(), _compound, max_leaves=25)


class TestProperties:
    @given(grammar_asts)
    def test_print_parse_round_trip(self, e):
        assert parse(to_string(e), PARAMS) == e

    @given(grammar_asts)
    def test_free_variables_subset_of_alphabet(self, e):
        assert free_variables(e) <= {"x1", "x2", "beta", "gamma"}

    def test_differentiation_is_linear(self):
        rng = np.random.default_rng(7)
        e1 = parse("x1^2 * x2 + sin(x1)", PARAMS)
        e2 = parse("exp(x1 / 4) + gamma * x1", PARAMS)
        d_sum = differentiate(Add(e1, e2), "x1")
        d_parts = Add(differentiate(e1, "x1"), differentiate(e2, "x1"))
        for _ in range(25):
            b = {
                "x1": float(rng.uniform(0.5, 3.0)),
                "x2": float(rng.uniform(0.5, 3.0)),
                "beta": float(rng.uniform(0.5, 1.0)),
                "gamma": float(rng.uniform(0.0, 2.0)),
            }
            assert evaluate(d_sum, b) == pytest.approx(evaluate(d_parts, b), rel=1e-12)

    def test_symbolic_vs_central_difference_random_smooth(self):
        # dedicated acceptance criterion runs 500 of these; keep a smoke batch here
        from randexpr import random_binding, random_smooth_expression

        rng = np.random.default_rng(42)
        checked = 0
        while checked < 60:
            e, var = random_smooth_expression(rng)
            b = random_binding(rng)
            try:
                sym = evaluate(differentiate(e, var), b)
                fd = finite_difference(e, var, b, 1e-5)
            except EvalDomainError:
                continue
            if not (np.isfinite(sym) and np.isfinite(fd)) or abs(sym) > 50.0:
                continue
            assert abs(sym - fd) <= 1e-6 * (1.0 + abs(sym))
            checked += 1
