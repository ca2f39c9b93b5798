import math
from fractions import Fraction

import pytest

from solv.errors import BindingError, DomainError, FormError, ParseError, SingularityError
from solv.symtrig import (
    bind_parameters,
    differentiate,
    evaluate,
    is_zero,
    normalize,
    parse,
    resolve_abs,
    substitute,
    to_fourier,
    to_quasipoly,
    to_text,
)
from solv.symtrig import canon as C
from solv.symtrig import expr as E
from solv.symtrig.forms import content_of, proportionality, unit_ratio


def norm_text(text: str) -> str:
    return to_text(normalize(parse(text)))


# -- parsing ---------------------------------------------------------------------------


def test_parse_examples():
    e = parse("r^6/16")
    assert isinstance(e, (E.Div, E.Mul))
    assert to_text(parse("a'' - a'^2")) == "a'' - a'^2"
    e = parse("log(b + r*sin(t))")
    assert isinstance(e, E.Log)
    assert E.function_symbols(e) == {("b", 0), ("r", 0)}


def test_parse_function_notation_and_unicode():
    assert parse("a'(s)") == parse("a'")
    assert parse("λ·s − μ") == parse("lambda*s - mu")
    assert parse("r′′") == parse("r''")


def test_parse_exact_decimals():
    assert norm_text("0.1*s") == "1/10*s"


@pytest.mark.parametrize(
    "text, pos",
    [("1 +", 3), ("sin(s)", 0), ("foo + 1", 0), ("(s", 2), ("s ^ t", 4), ("2 $ 3", 2), ("", 0), ("s)", 1)],
)
def test_parse_errors_have_positions(text, pos):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.pos == pos


def test_parse_division_by_zero_constant():
    with pytest.raises(ParseError):
        parse("s/0")


def test_print_parse_fixed_point():
    for text in ["a'' - a'^2", "(1 + a^2)*(-2*a'^2 + a*a'')", "r*cos(t)/(b + r*sin(t))", "exp(2*a) - log(abs(s + mu))"]:
        printed = to_text(normalize(parse(text)))
        assert to_text(normalize(parse(printed))) == printed


# -- normalization -----------------------------------------------------------------------


def test_product_to_sum():
    assert norm_text("sin(t)*cos(t)") == "1/2*sin(2*t)"
    assert norm_text("cos(t)^2") == "1/2 + 1/2*cos(2*t)"
    assert norm_text("sin(t)^2 + cos(t)^2") == "1"
    assert norm_text("sin(2*t)*sin(3*t)") == "1/2*cos(t) - 1/2*cos(5*t)"


def test_zero_is_canonical():
    assert normalize(parse("a*b - b*a")) == E.ZERO
    assert is_zero("(s + 1)^2 - s^2 - 2*s - 1")
    assert not is_zero("s")


def test_common_denominator_and_cancellation():
    assert norm_text("1/(s + 1) + 1/(s - 1)") == "-2*s/((1 - s)*(1 + s))"
    assert norm_text("(s^2 - 1)/(s - 1)") == "1 + s"
    assert norm_text("(a^2 - b^2)/(a + b)") == "a - b"


def test_exact_rationals():
    assert norm_text("1/3 + 1/6") == "1/2"
    big = "123456789012345678901234567890"
    assert norm_text(f"{big}/{big}0") == "1/10"


def test_exp_log_rules():
    assert norm_text("exp(log(s + 2))") == "2 + s"
    assert norm_text("exp(a)*exp(-a)") == "1"
    assert norm_text("exp(2*log(abs(s + 1)))") == "1 + 2*s + s^2"


# -- differentiation -----------------------------------------------------------------------


def test_differentiate_examples():
    assert to_text(differentiate(parse("sin(t)"), "t")) == "cos(t)"
    assert to_text(differentiate(parse("a"), "s")) == "a'"
    assert to_text(differentiate(parse("log(b + r*sin(t))"), "t")) == "r*cos(t)/(b + r*sin(t))"
    assert to_text(differentiate(parse("exp(2*a)"), "s")) == "2*a'*exp(2*a)"
    assert is_zero(E.add(differentiate(parse("log(abs(s + 1))"), "s"), E.neg(parse("1/(s + 1)"))))
    with pytest.raises(ValueError):
        differentiate(parse("s"), "x")


def test_raw_derivative_matches_normalized():
    e = parse("a'*sin(2*t)/(b + r*cos(t))")
    raw = differentiate(e, "t", normalized=False)
    assert is_zero(E.add(raw, E.neg(differentiate(e, "t"))))


# -- substitution ----------------------------------------------------------------------------


def test_substitute_examples():
    res = substitute(parse("a'' - a'^2"), "a", parse("lambda - log(abs(s + mu))"))
    assert is_zero(resolve_abs(res, 0.0, bindings={"mu": 3, "lambda": 2}))
    res = substitute(parse("-2*b'^2 + b*b''"), "b", parse("b0/(s + b1)"))
    assert is_zero(res)
    assert is_zero(substitute(parse("a''"), "a", parse("7/3")))


def test_substitute_rejects_t():
    with pytest.raises(DomainError):
        substitute(parse("a'"), "a", parse("s*t"))


def test_printed_horocycle_solution_is_not_a_solution():
    res = substitute(parse("a'' - a'^2"), "a", parse("lambda + log(abs(s + mu))"))
    res = resolve_abs(res, 0.0, bindings={"mu": 3, "lambda": 2})
    assert to_text(res) == "-2/(mu + s)^2"


def test_bind_parameters():
    e = bind_parameters(parse("lambda*s + mu"), {"lambda": Fraction(1, 2), "mu": 3})
    assert to_text(normalize(e)) == "3 + 1/2*s"


# -- evaluation ------------------------------------------------------------------------------


def test_eval_examples():
    assert evaluate(parse("sin(2*t)"), 0.0, math.pi / 4) == pytest.approx(1.0)
    # B5 of the cyclic H-numerator with r(s) = 2
    assert evaluate(parse("r^6/16"), 0.3, 0.0, {"r": 2}) == pytest.approx(4.0)


def test_eval_bindings_forms():
    e = parse("a'' + a")
    assert evaluate(e, 0.5, 0.0, {"a": parse("s^3")}) == pytest.approx(3.0 + 0.125)
    assert evaluate(e, 0.5, 0.0, {"a": lambda s, k: [math.sin(s), math.cos(s), -math.sin(s)][k]}) == pytest.approx(0.0)
    assert evaluate(e, 0.5, 0.0, {"a": [math.exp, math.exp, math.exp]}) == pytest.approx(2 * math.exp(0.5))
    assert evaluate(e, 0.5, 0.0, {"a": 2}) == pytest.approx(2.0)


def test_eval_errors():
    with pytest.raises(BindingError):
        evaluate(parse("a + 1"), 0.0, 0.0, {})
    with pytest.raises(SingularityError):
        evaluate(parse("1/s"), 0.0, 0.0)


def test_eval_matches_canonical_eval():
    e = parse("(a*cos(t) + b'*sin(2*t))^2/(b + r*sin(t))")
    env = {"a": parse("1 + s"), "b": parse("3 + s^2"), "r": parse("1/2")}
    p = C.reduce(C.from_tree(e))
    for s, t in [(0.1, 0.2), (-0.7, 2.0), (0.4, -1.1)]:
        assert C.evaluate(p, s, t, E.as_bindings(env)) == pytest.approx(evaluate(e, s, t, env), rel=1e-12)


# -- coefficient forms ------------------------------------------------------------------------


def test_to_fourier_examples():
    form, power = to_fourier(parse("3*cos(t) + sin(2*t)"))
    assert (form.k, power) == (2, 0)
    assert to_text(form.coefficient("A1")) == "3"
    assert to_text(form.coefficient("B2")) == "1"
    assert to_text(form.coefficient("A2")) == "0"
    form, _ = to_fourier(parse("5/7"))
    assert form.k == 0 and to_text(form.A[0]) == "5/7" and form.B == ()


def test_to_fourier_exact_linear_independence():
    cs = [Fraction(1, 3), Fraction(-2), Fraction(0), Fraction(7, 5)]
    text = " + ".join(f"({c})*cos({n}*t)" for n, c in enumerate(cs) if n)
    form, _ = to_fourier(parse(f"{cs[0]} + {text}"))
    assert form.k == 3
    assert [form.coefficient_poly(f"A{n}").const_value() if not form.coefficient_poly(f"A{n}").is_zero() else 0 for n in range(4)] == cs


def test_to_fourier_minimal_clearing():
    form, power = to_fourier(parse("1/(b + r*sin(t)) + sin(t)"))
    assert power == 1
    assert to_text(form.denominator) == "b + r*sin(t)"
    back = E.add(form.reconstruct(), E.neg(E.mul(form.denominator, parse("1/(b + r*sin(t)) + sin(t)"))))
    assert is_zero(back)


def test_to_fourier_rejects_bare_t():
    with pytest.raises(FormError) as info:
        to_fourier(parse("t*cos(t)"))
    assert "t" in str(info.value)
    with pytest.raises(FormError):
        to_fourier(parse("exp(t)"))


def test_to_quasipoly_examples():
    q = to_quasipoly(parse("a''*t + b''"))
    assert {(n, w): to_text(c) for n, w, c in q.terms} == {(1, 0): "a''", (0, 0): "b''"}
    q = to_quasipoly(parse("exp(2*t)*a''"))
    assert {(n, w): to_text(c) for n, w, c in q.terms} == {(0, 2): "a''"}
    q = to_quasipoly(parse("a*t^2*exp(-2*t) + t"))
    assert q.basis() == [(1, 0), (2, -2)]
    assert q.degree == 2
    with pytest.raises(FormError):
        to_quasipoly(parse("sin(t)"))


def test_fourier_json_shape():
    form, _ = to_fourier(parse("r^6/16*sin(5*t) + a*cos(t)"))
    d = form.to_dict()
    assert set(d) >= {"k", "A", "B", "denominator_power"}
    assert d["k"] == 5 and d["B"][4] == "1/16*r^6"
    assert d["content"]["B5"] == {"factor": "1/16", "monomial": "r^6", "rest": "1"}


def test_content_and_proportionality():
    p = C.reduce(C.from_tree(parse("-1/8*a'^2*r^2 + 1/4*r^2*b^2")))
    c = content_of(p)
    assert c.factor == Fraction(-1, 8) and to_text(c.monomial) == "r^2"
    target = C.reduce(C.from_tree(parse("r^2*a'^2")))
    assert proportionality(C.reduce(C.from_tree(parse("-3*r^2*a'^2"))), target) == -3
    assert proportionality(p, target) is None


def test_unit_ratio_in_laurent_ring():
    target = C.reduce(C.from_tree(parse("(1 + a^2)*(-2*a'^2 + a*a'')")))
    p = C.reduce(C.from_tree(parse("(1 + a^2)*(-2*a'^2 + a*a'')/(t^2*a^4)")))
    u = unit_ratio(p, target)
    assert u is not None and to_text(C.to_tree(u)) == "1/(t^2*a^4)"
    assert unit_ratio(C.reduce(C.from_tree(parse("(1 + a)*a''"))), target) is None
