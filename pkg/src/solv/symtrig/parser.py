"""Recursive-descent parser for the expression grammar (see docs/grammar.md).

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = ("-" | "+") unary | power ;
    power    = primary [ "^" exponent ] ;
    exponent = [ "-" | "+" ] INTEGER | "(" [ "-" | "+" ] INTEGER ")" ;
    primary  = NUMBER | "s" | "t" | PARAM | FSYM { "'" } [ "(" "s" ")" ]
             | CALL "(" expr ")" | "(" expr ")" ;
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from solv.errors import ParseError
from solv.symtrig import expr as E

_CALLS = {"sin", "cos", "exp", "log", "abs", "sqrt"}
_ALIASES = {"λ": "lambda", "μ": "mu"}
_TRANSLATE = str.maketrans({"−": "-", "·": "*", "×": "*", "′": "'", "″": "''"})

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_λμ][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),'])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    source = text.translate(_TRANSLATE)
    tokens: list[Token] = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.pos, self.text)

    def take(self, text: str | None = None) -> Token:
        tok = self.tok
        if text is not None and tok.text != text:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> E.SymExpr:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        result = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return result

    def expr(self) -> E.SymExpr:
        terms = [self.term()]
        while self.at("+") or self.at("-"):
            op = self.take().text
            rhs = self.term()
            terms.append(rhs if op == "+" else E.neg(rhs))
        return E.add(*terms)

    def term(self) -> E.SymExpr:
        result = self.unary()
        while self.at("*") or self.at("/"):
            op = self.take()
            rhs = self.unary()
            if op.text == "*":
                result = E.mul(result, rhs)
            else:
                try:
                    result = E.div(result, rhs)
                except ArithmeticError as exc:
                    raise self.error(str(exc), op) from None
        return result

    def unary(self) -> E.SymExpr:
        if self.at("-"):
            self.take()
            return E.neg(self.unary())
        if self.at("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> E.SymExpr:
        base = self.primary()
        if self.at("^"):
            op = self.take()
            k = self.exponent()
            try:
                return E.power(base, k)
            except ArithmeticError as exc:
                raise self.error(str(exc), op) from None
        return base

    def exponent(self) -> int:
        paren = self.at("(")
        if paren:
            self.take()
        sign = 1
        if self.at("-") or self.at("+"):
            sign = -1 if self.take().text == "-" else 1
        tok = self.tok
        if tok.kind != "num" or "." in tok.text:
            raise self.error("exponent must be an integer literal")
        self.take()
        if paren:
            self.take(")")
        return sign * int(tok.text)

    def primary(self) -> E.SymExpr:
        tok = self.tok
        if tok.kind == "num":
            self.take()
            return E.Const(Fraction(tok.text))
        if self.at("("):
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        if tok.kind == "name":
            return self.name()
        if tok.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {tok.text!r}")

    def name(self) -> E.SymExpr:
        tok = self.take()
        name = _ALIASES.get(tok.text, tok.text)
        if name in E.VARIABLES:
            return E.Var(name)
        if name in E.PARAMETER_NAMES:
            return E.Param(name)
        if name in E.FUNCTION_NAMES:
            order = 0
            while self.at("'"):
                self.take()
                order += 1
            if self.at("(") and self.tokens[self.i + 1].text == "s" and self.tokens[self.i + 2].text == ")":
                self.i += 3
            return E.Func(name, order)
        if name in _CALLS:
            self.take("(")
            arg = self.expr()
            self.take(")")
            return self.call(name, arg, tok)
        raise self.error(f"unknown identifier {tok.text!r}", tok)

    def call(self, name: str, arg: E.SymExpr, tok: Token) -> E.SymExpr:
        try:
            if name in ("sin", "cos"):
                n = _multiple_of_t(arg)
                if n is None:
                    raise self.error(f"{name} takes an integer multiple of t, got {E.to_text(arg)!r}", tok)
                return E.sin(n) if name == "sin" else E.cos(n)
            if name == "exp":
                return E.exp(arg)
            if name == "log":
                return E.log(arg)
            if name == "abs":
                return E.absval(arg)
            return E.sqrt(arg)
        except ArithmeticError as exc:
            raise self.error(str(exc), tok) from None
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise self.error(str(exc), tok) from None


def _multiple_of_t(arg: E.SymExpr) -> int | None:
    from solv.symtrig.canon import from_tree

    p = from_tree(arg)
    if p.is_zero():
        return 0
    if len(p.terms) != 1:
        return None
    (mono, c), = p.terms.items()
    atoms, trig, xarg = mono
    if trig != (0, 0) or xarg is not None or len(atoms) != 1:
        return None
    atom, k = atoms[0]
    if atom.kind != "t" or k != 1 or c.denominator != 1:
        return None
    return int(c)


def parse(text: str) -> E.SymExpr:
    """Parse ``text`` into an expression tree.

    >>> from solv.symtrig import to_text
    >>> to_text(parse("a'' - a'^2"))
    "a'' - a'^2"
    """
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    return _Parser(text).parse()
