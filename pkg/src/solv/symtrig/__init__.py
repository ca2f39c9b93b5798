"""Exact expression engine over s, t and the function symbols a, b, r."""

from __future__ import annotations

from typing import Mapping

from solv.errors import DomainError
from solv.symtrig import canon
from solv.symtrig.expr import (
    Bindings,
    SymExpr,
    as_bindings,
    as_expr,
    depends_on,
    evaluate,
    function_symbols,
    parameters,
    to_text,
)
from solv.symtrig.forms import (
    Content,
    FourierForm,
    QuasiPolyForm,
    content_of,
    has_factor,
    proportionality,
    to_fourier,
    to_quasipoly,
    unit_ratio,
)
from solv.symtrig.parser import ParseError, parse

__all__ = [
    "Bindings",
    "Content",
    "FourierForm",
    "ParseError",
    "QuasiPolyForm",
    "SymExpr",
    "as_bindings",
    "as_expr",
    "bind_parameters",
    "content_of",
    "depends_on",
    "differentiate",
    "eval",
    "evaluate",
    "function_symbols",
    "has_factor",
    "is_zero",
    "normalize",
    "parameters",
    "parse",
    "proportionality",
    "unit_ratio",
    "resolve_abs",
    "substitute",
    "to_fourier",
    "to_quasipoly",
    "to_text",
]


def normalize(e) -> SymExpr:
    """Canonical form of ``e``.

    >>> to_text(normalize("sin(t)*cos(t)"))
    '1/2*sin(2*t)'
    """
    return canon.to_tree(canon.reduce(canon.from_tree(as_expr(e))))


def is_zero(e) -> bool:
    return canon.reduce(canon.from_tree(as_expr(e))).is_zero()


def differentiate(e, var: str, normalized: bool = True) -> SymExpr:
    """Exact derivative in ``var`` ("s" or "t")."""
    if var not in ("s", "t"):
        raise ValueError(f"can only differentiate in s or t, not {var!r}")
    e = as_expr(e)
    if not normalized:
        from solv.symtrig.expr import derivative

        return derivative(e, var)
    return canon.to_tree(canon.reduce(canon.pdiff(canon.from_tree(e), var)))


def substitute(e, symbol: str, replacement) -> SymExpr:
    """Replace the function symbol and all its derivatives, then normalize."""
    replacement = as_expr(replacement)
    if depends_on(replacement, "t"):
        raise DomainError(f"replacement for {symbol} depends on t: {to_text(replacement)}")
    p = canon.from_tree(as_expr(e))
    r = canon.reduce(canon.from_tree(replacement))
    return canon.to_tree(canon.substitute_function(p, symbol, r))


def bind_parameters(e, values: Mapping[str, object]) -> SymExpr:
    """Replace named parameters (lambda, mu, a0, ...) by rational values."""
    table = {k: canon.const(v) for k, v in values.items()}

    def mapping(atom):
        if atom.kind == "param" and atom.name in table:
            return table[atom.name]
        return None

    return canon.to_tree(canon.substitute_atoms(canon.from_tree(as_expr(e)), mapping))


def resolve_abs(e, s: float, t: float = 0.0, bindings=None) -> SymExpr:
    """Replace every |u| by u or -u according to the sign of u at (s, t).

    Valid on any region where the arguments keep the sign they have at the
    sample point.
    """
    p = canon.from_tree(as_expr(e))
    return canon.to_tree(canon.resolve_abs(p, s, t, as_bindings(bindings)))


eval = evaluate  # noqa: A001
