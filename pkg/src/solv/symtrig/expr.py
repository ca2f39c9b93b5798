"""Expression trees over the variables s, t and the function symbols a, b, r.

Trees are immutable. Build them with the smart constructors (``add``, ``mul``,
``div``, ``power``, ``sin``, ``cos``, ``exp``, ``log``, ``absval``) or the
Python operators; both flatten nested sums/products and fold rational
constants so that ``parse(to_text(e)) == e`` for every tree they produce.

Numeric evaluation (``evaluate``) and raw differentiation (``derivative``) work
directly on the tree and never consult the canonical algebra, which keeps them
usable as independent cross-checks of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence, Union

from solv.errors import BindingError, DomainError, SingularityError

FUNCTION_NAMES = ("a", "b", "r")
VARIABLES = ("s", "t")
PARAMETER_NAMES = ("lambda", "mu", "a0", "a1", "b0", "b1")

Number = Union[int, Fraction]


class SymExpr:
    """Base class of all expression nodes."""

    __slots__ = ()

    def __add__(self, other: Any) -> SymExpr:
        return add(self, as_expr(other))

    def __radd__(self, other: Any) -> SymExpr:
        return add(as_expr(other), self)

    def __sub__(self, other: Any) -> SymExpr:
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other: Any) -> SymExpr:
        return add(as_expr(other), neg(self))

    def __mul__(self, other: Any) -> SymExpr:
        return mul(self, as_expr(other))

    def __rmul__(self, other: Any) -> SymExpr:
        return mul(as_expr(other), self)

    def __truediv__(self, other: Any) -> SymExpr:
        return div(self, as_expr(other))

    def __rtruediv__(self, other: Any) -> SymExpr:
        return div(as_expr(other), self)

    def __neg__(self) -> SymExpr:
        return neg(self)

    def __pow__(self, k: int) -> SymExpr:
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        return power(self, k)

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {to_text(self)}>"


@dataclass(frozen=True, repr=False)
class Const(SymExpr):
    value: Fraction


@dataclass(frozen=True, repr=False)
class Var(SymExpr):
    name: str


@dataclass(frozen=True, repr=False)
class Param(SymExpr):
    """A named constant such as lambda or a0; its derivative is zero."""

    name: str


@dataclass(frozen=True, repr=False)
class Func(SymExpr):
    """The ``order``-th derivative of the function symbol ``name`` at s."""

    name: str
    order: int = 0


@dataclass(frozen=True, repr=False)
class Add(SymExpr):
    terms: tuple


@dataclass(frozen=True, repr=False)
class Mul(SymExpr):
    factors: tuple


@dataclass(frozen=True, repr=False)
class Pow(SymExpr):
    base: SymExpr
    exp: int


@dataclass(frozen=True, repr=False)
class Div(SymExpr):
    num: SymExpr
    den: SymExpr


@dataclass(frozen=True, repr=False)
class Sin(SymExpr):
    """sin(n*t), n >= 1."""

    n: int


@dataclass(frozen=True, repr=False)
class Cos(SymExpr):
    """cos(n*t), n >= 1."""

    n: int


@dataclass(frozen=True, repr=False)
class Exp(SymExpr):
    arg: SymExpr


@dataclass(frozen=True, repr=False)
class Log(SymExpr):
    arg: SymExpr


@dataclass(frozen=True, repr=False)
class Abs(SymExpr):
    arg: SymExpr


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
S = Var("s")
T = Var("t")


def const(value: Number | str) -> Const:
    return Const(Fraction(value))


def as_expr(value: Any) -> SymExpr:
    if isinstance(value, SymExpr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value))
    if isinstance(value, str):
        from solv.symtrig.parser import parse

        return parse(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def func(name: str, order: int = 0) -> Func:
    if name not in FUNCTION_NAMES:
        raise DomainError(f"unknown function symbol {name!r}")
    if order < 0:
        raise DomainError("derivative order must be non-negative")
    return Func(name, order)


def param(name: str) -> Param:
    if name not in PARAMETER_NAMES:
        raise DomainError(f"unknown parameter {name!r}")
    return Param(name)


# -- smart constructors ------------------------------------------------------


def _fold(items: list, node_type: type, identity: Fraction, combine: Callable) -> list:
    """Flatten nested nodes and fold constants into the first constant slot."""
    flat: list = []
    for item in items:
        if isinstance(item, node_type):
            flat.extend(item.terms if node_type is Add else item.factors)
        else:
            flat.append(item)
    slot = None
    acc = identity
    out: list = []
    for item in flat:
        if isinstance(item, Const):
            acc = combine(acc, item.value)
            if slot is None:
                slot = len(out)
                out.append(None)
        else:
            out.append(item)
    if slot is not None:
        if acc == identity and len(out) > 1:
            del out[slot]
        else:
            out[slot] = Const(acc)
    return out


def add(*terms: SymExpr) -> SymExpr:
    items = _fold(list(terms), Add, Fraction(0), lambda x, y: x + y)
    if not items:
        return ZERO
    if len(items) == 1:
        return items[0]
    return Add(tuple(items))


def mul(*factors: SymExpr) -> SymExpr:
    items = _fold(list(factors), Mul, Fraction(1), lambda x, y: x * y)
    if not items:
        return ONE
    if any(isinstance(f, Const) and f.value == 0 for f in items):
        return ZERO
    if len(items) == 1:
        return items[0]
    return Mul(tuple(items))


def neg(e: SymExpr) -> SymExpr:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Mul) and isinstance(e.factors[0], Const):
        return mul(Const(-e.factors[0].value), *e.factors[1:])
    return mul(Const(Fraction(-1)), e)


def div(num: SymExpr, den: SymExpr) -> SymExpr:
    if isinstance(den, Const):
        if den.value == 0:
            raise SingularityError("division by the constant 0")
        if isinstance(num, Const):
            return Const(num.value / den.value)
        if den.value == 1:
            return num
    if isinstance(num, Const) and num.value == 0:
        return ZERO
    return Div(num, den)


def power(base: SymExpr, k: int) -> SymExpr:
    if k == 0:
        return ONE
    if k == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and k < 0:
            raise SingularityError("0 raised to a negative power")
        return Const(base.value**k)
    return Pow(base, k)


def sin(n: int) -> SymExpr:
    if n == 0:
        return ZERO
    if n < 0:
        return neg(Sin(-n))
    return Sin(n)


def cos(n: int) -> SymExpr:
    if n == 0:
        return ONE
    return Cos(abs(n))


def exp(arg: SymExpr) -> SymExpr:
    if isinstance(arg, Const) and arg.value == 0:
        return ONE
    return Exp(arg)


def log(arg: SymExpr) -> SymExpr:
    if isinstance(arg, Const):
        if arg.value <= 0:
            raise DomainError(f"log of non-positive constant {arg.value}")
        if arg.value == 1:
            return ZERO
    return Log(arg)


def absval(arg: SymExpr) -> SymExpr:
    if isinstance(arg, Const):
        return Const(abs(arg.value))
    return Abs(arg)


def sqrt(arg: SymExpr) -> SymExpr:
    """Square root, expressed as exp(log(arg)/2) so that it stays in the grammar."""
    return exp(mul(Const(Fraction(1, 2)), log(arg)))


# -- printing ----------------------------------------------------------------

_ATOM_PREC = 5


def _const_text(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _prec(e: SymExpr) -> int:
    if isinstance(e, Add):
        return 1
    if isinstance(e, (Mul, Div)):
        return 2
    if isinstance(e, Const):
        if e.value < 0:
            return 2
        return _ATOM_PREC if e.value.denominator == 1 else 2
    if isinstance(e, Pow):
        return 4
    return _ATOM_PREC


def _wrap(e: SymExpr, min_prec: int) -> str:
    text = to_text(e)
    return f"({text})" if _prec(e) < min_prec else text


def _is_negative_term(e: SymExpr) -> bool:
    if isinstance(e, Const):
        return e.value < 0
    return isinstance(e, Mul) and isinstance(e.factors[0], Const) and e.factors[0].value < 0


def _mul_text(factors: tuple) -> str:
    parts: list[str] = []
    prefix = ""
    rest = list(factors)
    head = rest[0]
    if isinstance(head, Const):
        rest = rest[1:]
        if head.value == -1:
            prefix = "-"
        else:
            parts.append(_const_text(head.value))
    for f in rest:
        if isinstance(f, Const):
            parts.append(f"({_const_text(f.value)})" if (f.value < 0 or f.value.denominator != 1) else _const_text(f.value))
        else:
            parts.append(_wrap(f, 3))
    return prefix + "*".join(parts)


def _func_text(e: Func) -> str:
    return e.name + "'" * e.order


def to_text(e: SymExpr) -> str:
    """Render ``e`` in the grammar accepted by :func:`solv.symtrig.parse`."""
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Func):
        return _func_text(e)
    if isinstance(e, Add):
        out = to_text(e.terms[0])
        for term in e.terms[1:]:
            if _is_negative_term(term):
                out += " - " + _wrap(neg(term), 2)
            else:
                out += " + " + _wrap(term, 2)
        return out
    if isinstance(e, Mul):
        return _mul_text(e.factors)
    if isinstance(e, Div):
        return f"{_wrap(e.num, 2)}/{_wrap(e.den, 4)}"
    if isinstance(e, Pow):
        exp_text = str(e.exp) if e.exp >= 0 else f"({e.exp})"
        return f"{_wrap(e.base, _ATOM_PREC)}^{exp_text}"
    if isinstance(e, Sin):
        return "sin(t)" if e.n == 1 else f"sin({e.n}*t)"
    if isinstance(e, Cos):
        return "cos(t)" if e.n == 1 else f"cos({e.n}*t)"
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})"
    if isinstance(e, Log):
        return f"log({to_text(e.arg)})"
    if isinstance(e, Abs):
        return f"abs({to_text(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# -- structural queries --------------------------------------------------------


def children(e: SymExpr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, (Exp, Log, Abs)):
        return (e.arg,)
    return ()


def walk(e: SymExpr):
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(children(node))


def depends_on(e: SymExpr, var: str) -> bool:
    for node in walk(e):
        if isinstance(node, Var) and node.name == var:
            return True
        if var == "t" and isinstance(node, (Sin, Cos)):
            return True
        if var == "s" and isinstance(node, Func):
            return True
    return False


def function_symbols(e: SymExpr) -> set[tuple[str, int]]:
    return {(n.name, n.order) for n in walk(e) if isinstance(n, Func)}


def parameters(e: SymExpr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Param)}


def node_count(e: SymExpr) -> int:
    return sum(1 for _ in walk(e))


# -- raw differentiation -------------------------------------------------------


def derivative(e: SymExpr, var: str) -> SymExpr:
    """Exact derivative of ``e`` with respect to ``var``, without normalization.

    abs is differentiated away from zero: d|u| = |u| * u' / u.
    """
    if var not in VARIABLES:
        raise DomainError(f"cannot differentiate with respect to {var!r}")
    if isinstance(e, (Const, Param)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Func):
        return Func(e.name, e.order + 1) if var == "s" else ZERO
    if isinstance(e, Add):
        return add(*(derivative(term, var) for term in e.terms))
    if isinstance(e, Mul):
        pieces = []
        for i, f in enumerate(e.factors):
            df = derivative(f, var)
            if df != ZERO:
                pieces.append(mul(*e.factors[:i], df, *e.factors[i + 1 :]))
        return add(*pieces)
    if isinstance(e, Pow):
        db = derivative(e.base, var)
        if db == ZERO:
            return ZERO
        return mul(Const(Fraction(e.exp)), power(e.base, e.exp - 1), db)
    if isinstance(e, Div):
        dn = derivative(e.num, var)
        dd = derivative(e.den, var)
        if dd == ZERO:
            return div(dn, e.den)
        return div(add(mul(dn, e.den), neg(mul(e.num, dd))), power(e.den, 2))
    if isinstance(e, Sin):
        return mul(Const(Fraction(e.n)), Cos(e.n)) if var == "t" else ZERO
    if isinstance(e, Cos):
        return mul(Const(Fraction(-e.n)), Sin(e.n)) if var == "t" else ZERO
    if isinstance(e, Exp):
        du = derivative(e.arg, var)
        return ZERO if du == ZERO else mul(e, du)
    if isinstance(e, Log):
        du = derivative(e.arg, var)
        return ZERO if du == ZERO else div(du, e.arg)
    if isinstance(e, Abs):
        du = derivative(e.arg, var)
        return ZERO if du == ZERO else div(mul(e, du), e.arg)
    raise TypeError(f"not an expression node: {e!r}")


# -- numeric evaluation ----------------------------------------------------------

Binding = Union[Callable[[float, int], float], Sequence[Callable[[float], float]], SymExpr, float, int]


class Bindings:
    """Numeric values for function symbols and parameters.

    A function symbol may be bound to a callable ``f(s, order)``, a sequence of
    callables ``[f, f', f'', ...]``, an expression in s (differentiated
    symbolically on demand) or a number (a constant function). Parameters are
    bound to numbers.
    """

    def __init__(self, values: Mapping[str, Binding] | None = None):
        self._values = dict(values or {})
        self._derivs: dict[tuple[str, int], SymExpr] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def param(self, name: str) -> float:
        try:
            value = self._values[name]
        except KeyError:
            raise BindingError(f"no value bound for parameter {name!r}") from None
        if isinstance(value, SymExpr):
            return evaluate(value, 0.0, 0.0, self)
        return float(value)

    def function(self, name: str, order: int, s: float) -> float:
        try:
            value = self._values[name]
        except KeyError:
            raise BindingError(f"no binding for function symbol {name!r}") from None
        if isinstance(value, SymExpr):
            key = (name, order)
            if key not in self._derivs:
                d = value
                for _ in range(order):
                    d = derivative(d, "s")
                self._derivs[key] = d
            return evaluate(self._derivs[key], s, 0.0, self)
        if isinstance(value, (int, float, Fraction)):
            return float(value) if order == 0 else 0.0
        if callable(value):
            return float(value(s, order))
        try:
            return float(value[order](s))
        except IndexError:
            raise BindingError(f"binding for {name!r} lacks derivative order {order}") from None


def as_bindings(values: Bindings | Mapping[str, Binding] | None) -> Bindings:
    return values if isinstance(values, Bindings) else Bindings(values)


def evaluate(e: SymExpr, s: float, t: float, bindings: Bindings | Mapping[str, Binding] | None = None) -> float:
    """Floating-point value of ``e`` at (s, t)."""
    env = as_bindings(bindings)
    return _eval(e, float(s), float(t), env)


def _eval(e: SymExpr, s: float, t: float, env: Bindings) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        return s if e.name == "s" else t
    if isinstance(e, Param):
        return env.param(e.name)
    if isinstance(e, Func):
        return env.function(e.name, e.order, s)
    if isinstance(e, Add):
        return math.fsum(_eval(term, s, t, env) for term in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, s, t, env)
        return out
    if isinstance(e, Pow):
        base = _eval(e.base, s, t, env)
        if base == 0.0 and e.exp < 0:
            raise SingularityError("pole: zero raised to a negative power")
        return base**e.exp
    if isinstance(e, Div):
        den = _eval(e.den, s, t, env)
        if den == 0.0:
            raise SingularityError(f"pole: denominator {to_text(e.den)} vanishes at s={s}, t={t}")
        return _eval(e.num, s, t, env) / den
    if isinstance(e, Sin):
        return math.sin(e.n * t)
    if isinstance(e, Cos):
        return math.cos(e.n * t)
    if isinstance(e, Exp):
        try:
            return math.exp(_eval(e.arg, s, t, env))
        except OverflowError:
            raise SingularityError("exp overflow") from None
    if isinstance(e, Log):
        u = _eval(e.arg, s, t, env)
        if u <= 0.0:
            raise SingularityError(f"log of non-positive value {u} at s={s}, t={t}")
        return math.log(u)
    if isinstance(e, Abs):
        return abs(_eval(e.arg, s, t, env))
    raise TypeError(f"not an expression node: {e!r}")
