"""Coefficient forms: trig polynomials in t and quasi-polynomials t^n e^{wt}.

Both extractors work on the canonical algebra. They clear the t-dependent
part of the denominator with the smallest power that works, then read off
coefficients of the basis elements, which are exact because the basis
elements are linearly independent over functions of s.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from solv.errors import FormError
from solv.symtrig import canon as C
from solv.symtrig import expr as E

MAX_CLEARING_POWER = 64


@dataclass(frozen=True)
class Content:
    """A coefficient written as ``factor * monomial * rest``."""

    factor: Fraction
    monomial: E.SymExpr
    rest: E.SymExpr

    def as_dict(self) -> dict:
        return {
            "factor": _fraction_text(self.factor),
            "monomial": E.to_text(self.monomial),
            "rest": E.to_text(self.rest),
        }


def _fraction_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def content(p: C.Poly) -> tuple[Fraction, dict, C.Poly]:
    """Split ``p`` into a rational factor, a common function-symbol monomial, and the rest.

    The rational factor carries the sign of the leading term, so the rest
    always starts with a positive integer-content coefficient of 1.
    """
    if p.is_zero():
        return Fraction(0), {}, C.ZERO
    n = p
    dens = C._den_exponents(p)
    if dens:
        n = C.clear(p, dens)
    terms = n.sorted_terms()
    num_gcd = 0
    den_lcm = 1
    for _, c in terms:
        from math import gcd

        num_gcd = gcd(num_gcd, abs(c.numerator))
        den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
    factor = Fraction(num_gcd, den_lcm)
    if terms[0][1] < 0:
        factor = -factor
    mins: dict = {}
    funcs = {a for (atoms, _, _), _ in terms for a, _ in atoms if a.kind == "func"}
    for atom in funcs:
        lo = min(dict(atoms).get(atom, 0) for (atoms, _, _), _ in terms)
        if lo > 0:
            mins[atom] = lo
    mono = C.Poly({(tuple(sorted(mins.items(), key=lambda ae: ae[0].key)), C.CONST_TRIG, None): C.F1})
    rest = C.reduce(C.pmul(p, C.pscale(C.reciprocal(mono), 1 / factor)))
    return factor, mins, rest


def content_of(p: C.Poly) -> Content:
    factor, mins, rest = content(p)
    mono = E.mul(*(E.power(C.atom_tree(a), e) for a, e in sorted(mins.items(), key=lambda ae: ae[0].key)))
    return Content(factor, mono, C.to_tree(rest))


def proportionality(p: C.Poly, target: C.Poly) -> Fraction | None:
    """The constant c with p = c * target, or None when no such rational exists."""
    if target.is_zero():
        return Fraction(0) if p.is_zero() else None
    q = C.reduce(C.pmul(p, C.reciprocal(target)))
    if q.is_const() and not q.is_zero():
        return q.const_value()
    return None


def has_factor(p: C.Poly, factor: C.Poly) -> bool:
    """True when ``factor`` divides the cleared numerator of ``p`` exactly."""
    if p.is_zero():
        return True
    dens = C._den_exponents(p)
    n = C.clear(p, dens) if dens else p
    return C.divide_exact(n, factor) is not None


# -- t-dependence checks -----------------------------------------------------------


def _t_obstruction(p: C.Poly, allow_t_power: bool, allow_trig: bool, allow_exp_t: bool) -> str | None:
    for (atoms, trig, x), _ in p.terms.items():
        if trig != C.CONST_TRIG and not allow_trig:
            return E.to_text(C._trig_tree(trig))
        for atom, e in atoms:
            if atom.kind == "t":
                if not allow_t_power or e < 0:
                    return E.to_text(C.atom_tree(atom)) if e > 0 else f"t^{e}"
            elif C.atom_depends(atom, "t"):
                node = C.atom_tree(atom)
                if atom.kind == "den":
                    return f"1/({E.to_text(node)})"
                return E.to_text(node)
        if x is not None and C.depends_on(x, "t"):
            if not allow_exp_t:
                return E.to_text(E.Exp(C.to_tree(x)))
            _, rest = _split_linear_t(x)
            if rest is None:
                return E.to_text(E.Exp(C.to_tree(x)))
    return None


def _split_linear_t(x: C.Poly) -> tuple[Fraction, C.Poly | None]:
    """Write x = w*t + x0 with x0 free of t; rest is None when impossible."""
    w = Fraction(0)
    rest = {}
    for m, c in x.terms.items():
        atoms, trig, xa = m
        if atoms == ((C.T_ATOM, 1),) and trig == C.CONST_TRIG and xa is None:
            w += c
        else:
            rest[m] = c
    x0 = C.Poly(rest)
    if C.depends_on(x0, "t"):
        return w, None
    return w, x0


def _clear_t(p: C.Poly, denominator: C.Poly | None, accept) -> tuple[C.Poly, int, C.Poly]:
    """Smallest power q with denominator**q * p accepted; returns (product, q, denominator)."""
    if denominator is None:
        dens = {a: k for a, k in C._den_exponents(p).items() if C.atom_depends(a, "t")}
        denominator = C.pprod(a.inner for a in sorted(dens, key=lambda a: a.key))
        for atoms, _, _ in p.terms:
            for atom, e in atoms:
                if atom.kind == "t" and e < 0:
                    denominator = C.pmul(denominator, C.atom_poly(C.T_ATOM))
                    break
            else:
                continue
            break
    current = p
    for q in range(MAX_CLEARING_POWER + 1):
        if accept(current) is None:
            return current, q, denominator
        current = C.reduce(C.pmul(current, denominator))
    raise FormError(f"cannot clear denominator: offending node {accept(p)}")


# -- Fourier forms -------------------------------------------------------------------


@dataclass(frozen=True)
class FourierForm:
    """sum_{n=0..k} A_n cos(nt) + sum_{n=1..k} B_n sin(nt), each coefficient free of t."""

    k: int
    A: tuple
    B: tuple
    denominator_power: int = 0
    denominator: E.SymExpr = E.ONE
    A_poly: tuple = field(default=(), compare=False, repr=False)
    B_poly: tuple = field(default=(), compare=False, repr=False)

    def coefficient(self, name: str) -> E.SymExpr:
        return C.to_tree(self.coefficient_poly(name))

    def coefficient_poly(self, name: str) -> C.Poly:
        kind, n = name[0].upper(), int(name[1:])
        if kind == "A" and 0 <= n <= self.k:
            return self.A_poly[n]
        if kind == "B" and 1 <= n <= self.k:
            return self.B_poly[n - 1]
        if kind in "AB" and n >= 0:
            return C.ZERO
        raise KeyError(name)

    def content(self, name: str) -> Content:
        return content_of(self.coefficient_poly(name))

    def reconstruct(self) -> E.SymExpr:
        terms = [E.mul(self.A[0])]
        for n in range(1, self.k + 1):
            terms.append(E.mul(self.A[n], E.cos(n)))
            terms.append(E.mul(self.B[n - 1], E.sin(n)))
        return E.add(*terms)

    def nonzero(self) -> list[str]:
        names = [f"A{n}" for n in range(self.k + 1)] + [f"B{n}" for n in range(1, self.k + 1)]
        return [nm for nm in names if not self.coefficient_poly(nm).is_zero()]

    def to_dict(self, with_content: bool = True) -> dict:
        out = {
            "k": self.k,
            "A": [E.to_text(a) for a in self.A],
            "B": [E.to_text(b) for b in self.B],
            "denominator_power": self.denominator_power,
            "denominator": E.to_text(self.denominator),
        }
        if with_content:
            out["content"] = {nm: self.content(nm).as_dict() for nm in self.nonzero()}
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _fourier_obstruction(p: C.Poly) -> str | None:
    return _t_obstruction(p, allow_t_power=False, allow_trig=True, allow_exp_t=False)


def fourier_from_poly(p: C.Poly, denominator: C.Poly | None = None) -> FourierForm:
    p = C.reduce(p)
    cleared, power, den = _clear_t(p, denominator, _fourier_obstruction)
    coeffs: dict = {}
    for (atoms, trig, x), c in cleared.terms.items():
        coeffs.setdefault(trig, {})[(atoms, C.CONST_TRIG, x)] = c
    k = max((n for (_, n) in coeffs), default=0)
    a_poly = tuple(C.Poly(coeffs.get((C.COS, n) if n else C.CONST_TRIG, {})) for n in range(k + 1))
    b_poly = tuple(C.Poly(coeffs.get((C.SIN, n), {})) for n in range(1, k + 1))
    return FourierForm(
        k=k,
        A=tuple(C.to_tree(q) for q in a_poly),
        B=tuple(C.to_tree(q) for q in b_poly),
        denominator_power=power,
        denominator=C.to_tree(den),
        A_poly=a_poly,
        B_poly=b_poly,
    )


def to_fourier(e, denominator=None) -> tuple[FourierForm, int]:
    """Expand ``e`` times the minimal power of its t-denominator in the trig basis.

    >>> form, power = to_fourier(E.as_expr("3*cos(t) + sin(2*t)"))
    >>> form.k, E.to_text(form.A[1]), E.to_text(form.B[1]), power
    (2, '3', '1', 0)
    """
    p = C.from_tree(E.as_expr(e))
    den = None if denominator is None else C.reduce(C.from_tree(E.as_expr(denominator)))
    form = fourier_from_poly(p, den)
    return form, form.denominator_power


# -- quasi-polynomial forms ---------------------------------------------------------


@dataclass(frozen=True)
class QuasiPolyForm:
    """sum over basis (n, w) of coeff * t^n * e^{wt}, coefficients free of t."""

    terms: tuple  # ((n, w, SymExpr), ...) sorted by (n, w)
    denominator_power: int = 0
    denominator: E.SymExpr = E.ONE
    polys: dict = field(default_factory=dict, compare=False, repr=False)

    def coefficient(self, n: int, w: int = 0) -> E.SymExpr:
        return C.to_tree(self.coefficient_poly(n, w))

    def coefficient_poly(self, n: int, w: int = 0) -> C.Poly:
        return self.polys.get((n, w), C.ZERO)

    @property
    def degree(self) -> int:
        return max((n for n, _, _ in self.terms), default=0)

    def leading(self) -> C.Poly:
        top = [(n, w) for n, w, _ in self.terms if n == self.degree]
        if not top:
            return C.ZERO
        return self.polys[max(top)]

    def basis(self) -> list[tuple[int, int]]:
        return [(n, w) for n, w, _ in self.terms]

    def reconstruct(self) -> E.SymExpr:
        parts = []
        for n, w, coeff in self.terms:
            factors = [coeff]
            if n:
                factors.append(E.power(E.T, n))
            if w:
                factors.append(E.exp(E.mul(E.const(w), E.T)))
            parts.append(E.mul(*factors))
        return E.add(*parts)

    def to_dict(self) -> dict:
        return {
            "terms": [{"n": n, "w": w, "coefficient": E.to_text(c)} for n, w, c in self.terms],
            "denominator_power": self.denominator_power,
            "denominator": E.to_text(self.denominator),
            "content": [
                {"n": n, "w": w, **content_of(self.polys[(n, w)]).as_dict()} for n, w, _ in self.terms
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _quasi_obstruction(p: C.Poly) -> str | None:
    bad = _t_obstruction(p, allow_t_power=True, allow_trig=False, allow_exp_t=True)
    if bad is not None:
        return bad
    for (_, _, x), _ in p.terms.items():
        if x is not None:
            w, _ = _split_linear_t(x)
            if w.denominator != 1:
                return E.to_text(E.Exp(C.to_tree(x)))
    return None


def quasipoly_from_poly(p: C.Poly, denominator: C.Poly | None = None) -> QuasiPolyForm:
    p = C.reduce(p)
    cleared, power, den = _clear_t(p, denominator, _quasi_obstruction)
    buckets: dict = {}
    for (atoms, trig, x), c in cleared.terms.items():
        n = 0
        rest = []
        for atom, e in atoms:
            if atom.kind == "t":
                n = e
            else:
                rest.append((atom, e))
        w = Fraction(0)
        x0 = x
        if x is not None:
            w, x0 = _split_linear_t(x)
            if x0 is not None and x0.is_zero():
                x0 = None
        buckets.setdefault((n, int(w)), []).append(C.Poly({(tuple(rest), C.CONST_TRIG, None): c}))
        if x0 is not None:
            buckets[(n, int(w))][-1] = C.pmul(buckets[(n, int(w))][-1], C.make_exp(x0))
    polys = {}
    for key, parts in buckets.items():
        q = C.psum(parts)
        if not q.is_zero():
            polys[key] = q
    terms = tuple((n, w, C.to_tree(polys[(n, w)])) for n, w in sorted(polys))
    return QuasiPolyForm(terms=terms, denominator_power=power, denominator=C.to_tree(den), polys=polys)


def to_quasipoly(e, denominator=None) -> QuasiPolyForm:
    """Coefficients of t^n e^{wt} after clearing the t-denominator.

    >>> q = to_quasipoly(E.as_expr("a''*t + b''"))
    >>> [(n, w, E.to_text(c)) for n, w, c in q.terms]
    [(0, 0, "b''"), (1, 0, "a''")]
    """
    p = C.from_tree(E.as_expr(e))
    den = None if denominator is None else C.reduce(C.from_tree(E.as_expr(denominator)))
    return quasipoly_from_poly(p, den)


def unit_ratio(p: C.Poly, target: C.Poly) -> C.Poly | None:
    """p / target when that ratio is a unit (constant times atom powers and an exponential)."""
    if p.is_zero() or target.is_zero():
        return None
    q = C.reduce(C.pmul(p, C.reciprocal(target)))
    return q if C.is_unit(q) else None


def numerator(p: C.Poly) -> C.Poly:
    """p with its den atoms cleared (the numerator over the common denominator)."""
    dens = C._den_exponents(p)
    return C.clear(p, dens) if dens else p
