"""Random expression trees for the property suites.

Every generated tree is smooth and pole-free on the sampling box
|s| <= 1, t in R, under BINDINGS: divisions and logs only use arguments
that stay positive there.
"""

from fractions import Fraction

from hypothesis import strategies as st

from solv.symtrig import expr as E
from solv.symtrig import parse

BINDINGS = {
    "a": parse("1/2 + s/5 + s^2/3"),
    "b": parse("3 + s/4"),
    "r": parse("1 + s^2/5"),
    "lambda": 0.75,
    "mu": -0.5,
}

POSITIVE = [parse(text) for text in ("2 + sin(t)", "b + r*sin(t)", "3 + s^2", "2 + cos(2*t)", "b", "exp(s)")]
CLEARING = parse("b + r*sin(t)")

rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4)).map(E.const)
functions = st.sampled_from([E.Func("a", 0), E.Func("a", 1), E.Func("a", 2), E.Func("b", 0), E.Func("b", 1), E.Func("r", 0), E.Func("r", 1)])
params = st.sampled_from([E.Param("lambda"), E.Param("mu")])
trig = st.builds(lambda kind, n: E.sin(n) if kind else E.cos(n), st.booleans(), st.integers(1, 3))
s_var = st.just(E.S)
t_var = st.just(E.T)


def _extend(children, allow_exp_t: bool):
    positive = st.sampled_from(POSITIVE)
    small = children if allow_exp_t else children.filter(lambda e: not E.depends_on(e, "t"))
    return st.one_of(
        st.builds(E.add, children, children),
        st.builds(E.mul, children, children),
        st.builds(E.power, children, st.integers(0, 3)),
        st.builds(E.div, children, positive),
        st.builds(lambda e: E.exp(E.div(e, E.const(4))), small.filter(lambda e: E.node_count(e) <= 4)),
        st.builds(E.log, positive),
    )


def general(max_leaves: int = 8):
    """Arbitrary trees over s, t, a, b, r, parameters, trig, exp, log, quotients."""
    leaf = st.one_of(rationals, functions, params, trig, s_var, t_var)
    return st.recursive(leaf, lambda ch: _extend(ch, True), max_leaves=max_leaves)


def trig_rational(max_leaves: int = 6):
    """(trig polynomial with s-dependent coefficients) / (b + r sin t)^k."""
    leaf = st.one_of(rationals, functions, trig, s_var)

    def extend(children):
        return st.one_of(
            st.builds(E.add, children, children),
            st.builds(E.mul, children, children),
            st.builds(E.power, children, st.integers(0, 2)),
        )

    numerator = st.recursive(leaf, extend, max_leaves=max_leaves)
    return st.builds(lambda n, k: E.div(n, E.power(CLEARING, k)) if k else n, numerator, st.integers(0, 3))


points = st.tuples(st.floats(-0.9, 0.9), st.floats(-3.0, 3.0))


def _binding_set(c):
    a0, a1, a2, b1, r2, lam, mu = c
    return {
        "a": E.add(E.const(a0), E.mul(E.const(a1), E.S), E.mul(E.const(a2), E.power(E.S, 2))),
        "b": E.add(E.const(3), E.mul(E.const(b1), E.S)),
        "r": E.add(E.ONE, E.mul(E.const(r2), E.power(E.S, 2))),
        "lambda": float(lam),
        "mu": float(mu),
    }


_small = st.fractions(min_value=-1, max_value=1, max_denominator=8)
_half = st.fractions(min_value=-0.5, max_value=0.5, max_denominator=8)
# b + r sin t >= 3 - 1 - 1.5 > 0 on |s| <= 1, so the POSITIVE list stays positive
binding_sets = st.tuples(_small, _small, _small, _small, _half, _small, _small).map(_binding_set)
