"""Canonical algebra: exact rational-function normal forms over atoms.

A :class:`Poly` is a finite sum ``sum(c * monomial)`` with exact rational
coefficients. A monomial is a triple ``(atoms, trig, exparg)``:

* ``atoms`` -- sorted tuple of ``(Atom, exponent)`` with non-zero integer
  exponents. Negative exponents are allowed (Laurent monomials).
* ``trig`` -- one basis element of {1, cos(n t), sin(n t)}, encoded as
  ``(0, 0)``, ``(1, n)`` or ``(2, n)``; products are rewritten into this basis
  with the product-to-sum identities.
* ``exparg`` -- ``None`` or the (non-zero, canonical) argument X of a single
  factor exp(X). Integer multiples of log atoms are pulled out of X as powers.

Atoms are s, t, parameters, the function symbols a^(k), b^(k), r^(k), and the
composite atoms log(u), abs(u) and den(U). A den atom stands for a primitive
polynomial U that occurs in a denominator; it only ever carries negative
exponents. :func:`reduce` clears all den atoms, cancels every den factor that
divides the cleared numerator exactly, and redistributes the remaining common
denominator, which gives a normal form in which zero is always detected.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from solv.errors import DomainError, SingularityError
from solv.symtrig import expr as E

_RANK = {"param": 0, "s": 1, "t": 2, "func": 3, "log": 4, "abs": 5, "den": 6}
CONST_TRIG = (0, 0)
COS, SIN = 1, 2
HALF = Fraction(1, 2)
F1 = Fraction(1)


class Atom:
    """An indeterminate of the algebra. Instances are interned."""

    __slots__ = ("kind", "name", "order", "inner", "key", "_hash")

    _pool: dict = {}

    def __new__(cls, kind: str, name: str | None = None, order: int = 0, inner: Poly | None = None):
        if kind == "param":
            payload: tuple = (name,)
        elif kind in ("s", "t"):
            payload = ()
        elif kind == "func":
            payload = (name, order)
        else:
            payload = inner.key
        key = (_RANK[kind], payload)
        cached = cls._pool.get(key)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.kind = kind
        self.name = name
        self.order = order
        self.inner = inner
        self.key = key
        self._hash = hash(key)
        cls._pool[key] = self
        return self

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return self is other or (isinstance(other, Atom) and self._hash == other._hash and self.key == other.key)

    def __reduce__(self):
        return (Atom, (self.kind, self.name, self.order, self.inner))

    def __repr__(self) -> str:
        return f"Atom({E.to_text(atom_tree(self))})"


class Poly:
    """Immutable sparse sum of monomials with Fraction coefficients."""

    __slots__ = ("terms", "_hash", "_key")

    def __init__(self, terms: dict):
        self.terms = terms
        self._hash = None
        self._key = None

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Poly) and (self is other or self.terms == other.terms)

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = tuple(sorted((mono_key(m), (c.numerator, c.denominator)) for m, c in self.terms.items()))
        return self._key

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and UNIT in self.terms)

    def const_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if self.is_const():
            return self.terms[UNIT]
        raise ValueError("not a constant")

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: mono_key(mc[0]))

    def __add__(self, other: Poly) -> Poly:
        return padd(self, other)

    def __sub__(self, other: Poly) -> Poly:
        return padd(self, pscale(other, -F1))

    def __mul__(self, other: Poly) -> Poly:
        return pmul(self, other)

    def __neg__(self) -> Poly:
        return pscale(self, -F1)

    def __pow__(self, k: int) -> Poly:
        return ppow(self, k) if k >= 0 else ppow(reciprocal(self), -k)

    def __repr__(self) -> str:
        return f"Poly({E.to_text(to_tree(self))})"


UNIT = ((), CONST_TRIG, None)
ZERO = Poly({})
ONE = Poly({UNIT: F1})


def const(c) -> Poly:
    c = Fraction(c)
    return Poly({UNIT: c}) if c else ZERO


def atom_poly(atom: Atom, exponent: int = 1) -> Poly:
    return Poly({(((atom, exponent),), CONST_TRIG, None): F1})


def trig_poly(kind: int, n: int) -> Poly:
    if kind == SIN:
        if n == 0:
            return ZERO
        sign = F1 if n > 0 else -F1
        return Poly({((), (SIN, abs(n)), None): sign})
    if n == 0:
        return ONE
    return Poly({((), (COS, abs(n)), None): F1})


S_ATOM = Atom("s")
T_ATOM = Atom("t")


def func_atom(name: str, order: int = 0) -> Atom:
    return Atom("func", name, order)


def param_atom(name: str) -> Atom:
    return Atom("param", name)


@lru_cache(maxsize=None)
def mono_key(m: tuple) -> tuple:
    atoms, trig, xarg = m
    return (tuple((a.key, e) for a, e in atoms), trig, () if xarg is None else xarg.key)


# -- arithmetic ----------------------------------------------------------------


def padd(p: Poly, q: Poly) -> Poly:
    if not p.terms:
        return q
    if not q.terms:
        return p
    out = dict(p.terms)
    for m, c in q.terms.items():
        v = out.get(m)
        if v is None:
            out[m] = c
        else:
            v += c
            if v:
                out[m] = v
            else:
                del out[m]
    return Poly(out)


def psum(polys: Iterable[Poly]) -> Poly:
    out: dict = {}
    for p in polys:
        for m, c in p.terms.items():
            out[m] = out.get(m, 0) + c
    return Poly({m: c for m, c in out.items() if c})


def pscale(p: Poly, c) -> Poly:
    c = Fraction(c)
    if not c:
        return ZERO
    if c == 1:
        return p
    return Poly({m: v * c for m, v in p.terms.items()})


def pmul(p: Poly, q: Poly) -> Poly:
    if not p.terms or not q.terms:
        return ZERO
    if p is ONE:
        return q
    if q is ONE:
        return p
    out: dict = {}
    get = out.get
    for m1, c1 in p.terms.items():
        for m2, c2 in q.terms.items():
            for m, c in mono_mul(m1, m2):
                out[m] = get(m, 0) + c * c1 * c2
    return Poly({m: c for m, c in out.items() if c})


def pprod(polys: Iterable[Poly]) -> Poly:
    out = ONE
    for p in polys:
        out = pmul(out, p)
        if not out.terms:
            return ZERO
    return out


@lru_cache(maxsize=4096)
def ppow(p: Poly, k: int) -> Poly:
    if k < 0:
        raise ValueError("ppow expects a non-negative exponent")
    if k == 0:
        return ONE
    if k == 1:
        return p
    half = ppow(p, k // 2)
    sq = pmul(half, half)
    return pmul(sq, p) if k % 2 else sq


def pint_pow(p: Poly, k: int) -> Poly:
    return ppow(p, k) if k >= 0 else ppow(reciprocal(p), -k)


def _merge_atoms(a1: tuple, a2: tuple) -> tuple:
    if not a1:
        return a2
    if not a2:
        return a1
    d = dict(a1)
    for atom, e in a2:
        v = d.get(atom, 0) + e
        if v:
            d[atom] = v
        else:
            del d[atom]
    return tuple(sorted(d.items(), key=lambda ae: ae[0].key))


def _cos_term(n: int, c: Fraction):
    return ((COS, abs(n)) if n else CONST_TRIG, c)


def _sin_term(n: int, c: Fraction):
    if n == 0:
        return None
    return ((SIN, n), c) if n > 0 else ((SIN, -n), -c)


@lru_cache(maxsize=None)
def _trig_mul(t1: tuple, t2: tuple) -> tuple:
    k1, n1 = t1
    k2, n2 = t2
    if k1 == 0:
        return ((t2, F1),)
    if k2 == 0:
        return ((t1, F1),)
    if k1 == COS and k2 == COS:
        pieces = [_cos_term(n1 - n2, HALF), _cos_term(n1 + n2, HALF)]
    elif k1 == SIN and k2 == SIN:
        pieces = [_cos_term(n1 - n2, HALF), _cos_term(n1 + n2, -HALF)]
    elif k1 == SIN:
        pieces = [_sin_term(n1 + n2, HALF), _sin_term(n1 - n2, HALF)]
    else:
        pieces = [_sin_term(n1 + n2, HALF), _sin_term(n2 - n1, HALF)]
    out: dict = {}
    for piece in pieces:
        if piece is not None:
            out[piece[0]] = out.get(piece[0], 0) + piece[1]
    return tuple((t, c) for t, c in out.items() if c)


def _needs_exp_fix(x: Poly) -> bool:
    for m, c in x.terms.items():
        atoms, trig, xa = m
        if c.denominator == 1 and len(atoms) == 1 and trig == CONST_TRIG and xa is None:
            atom, e = atoms[0]
            if atom.kind == "log" and e == 1:
                return True
        for atom, _ in atoms:
            if atom.kind == "den":
                return True
    return False


@lru_cache(maxsize=1 << 20)
def mono_mul(m1: tuple, m2: tuple) -> tuple:
    a1, t1, x1 = m1
    a2, t2, x2 = m2
    atoms = _merge_atoms(a1, a2)
    extra = None
    if x1 is None:
        x = x2
    elif x2 is None:
        x = x1
    else:
        x = padd(x1, x2)
        if x.is_zero():
            x = None
        elif _needs_exp_fix(x):
            extra = make_exp(x)
            x = None
    if any(atom.kind == "abs" and e % 2 == 0 for atom, e in atoms):
        keep = []
        for atom, e in atoms:
            if atom.kind == "abs" and e % 2 == 0:
                factor = pint_pow(atom.inner, e)
                extra = factor if extra is None else pmul(extra, factor)
            else:
                keep.append((atom, e))
        atoms = tuple(keep)
    base = tuple(((atoms, tr, x), c) for tr, c in _trig_mul(t1, t2))
    if extra is None:
        return base
    return tuple(pmul(Poly(dict(base)), extra).terms.items())


# -- structure queries -----------------------------------------------------------


def top_atoms(p: Poly) -> set:
    return {atom for (atoms, _, _) in p.terms for atom, _ in atoms}


def has_den(p: Poly) -> bool:
    return any(atom.kind == "den" for (atoms, _, _) in p.terms for atom, _ in atoms)


@lru_cache(maxsize=1 << 16)
def atom_depends(atom: Atom, var: str) -> bool:
    if atom.kind in ("s", "t"):
        return atom.kind == var
    if atom.kind == "param":
        return False
    if atom.kind == "func":
        return var == "s"
    return depends_on(atom.inner, var)


@lru_cache(maxsize=1 << 16)
def depends_on(p: Poly, var: str) -> bool:
    for atoms, trig, x in p.terms:
        if var == "t" and trig != CONST_TRIG:
            return True
        for atom, _ in atoms:
            if atom_depends(atom, var):
                return True
        if x is not None and depends_on(x, var):
            return True
    return False


def collect_atoms(p: Poly, pred: Callable[[Atom], bool]) -> set:
    """All atoms (at any depth) satisfying ``pred``."""
    found: set = set()
    stack = [p]
    seen: set = set()
    while stack:
        q = stack.pop()
        for atoms, _, x in q.terms:
            for atom, _ in atoms:
                if atom in seen:
                    continue
                seen.add(atom)
                if pred(atom):
                    found.add(atom)
                if atom.inner is not None:
                    stack.append(atom.inner)
            if x is not None:
                stack.append(x)
    return found


# -- exp / log / abs -------------------------------------------------------------


def make_exp(x: Poly) -> Poly:
    """exp(x) with integer multiples of log atoms extracted as powers."""
    if has_den(x):
        x = reduce(x)
    if x.is_zero():
        return ONE
    factor = ONE
    rest: dict = {}
    for m, c in x.terms.items():
        atoms, trig, xa = m
        if c.denominator == 1 and len(atoms) == 1 and trig == CONST_TRIG and xa is None:
            atom, e = atoms[0]
            if atom.kind == "log" and e == 1:
                factor = pmul(factor, pint_pow(atom.inner, int(c)))
                continue
        rest[m] = c
    if not rest:
        return factor
    return pmul(factor, Poly({((), CONST_TRIG, Poly(rest)): F1}))


def make_log(u: Poly) -> Poly:
    u = reduce(u)
    if u.is_zero():
        raise DomainError("log of zero")
    if u.is_const():
        c = u.const_value()
        if c <= 0:
            raise DomainError(f"log of non-positive constant {c}")
        if c == 1:
            return ZERO
    if len(u.terms) == 1:
        (m, c), = u.terms.items()
        atoms, trig, x = m
        if x is not None:
            rest = Poly({(atoms, trig, None): c})
            return padd(make_log(rest), x)
    return atom_poly(Atom("log", inner=u))


def make_abs(u: Poly) -> Poly:
    u = reduce(u)
    if u.is_zero():
        return ZERO
    if u.is_const():
        return const(abs(u.const_value()))
    first_m, first_c = min(u.terms.items(), key=lambda mc: mono_key(mc[0]))
    if len(u.terms) == 1 and first_m[0] == () and first_m[1] == CONST_TRIG:
        # c * exp(X): exp is positive
        return pscale(u, Fraction(1) if first_c > 0 else Fraction(-1))
    inner = pscale(u, 1 / first_c)
    return pscale(atom_poly(Atom("abs", inner=inner)), abs(first_c))


# -- reciprocal, clearing, reduction ------------------------------------------


def _den_exponents(p: Poly) -> dict:
    dens: dict = {}
    for atoms, _, _ in p.terms:
        for atom, e in atoms:
            if atom.kind == "den" and -e > dens.get(atom, 0):
                dens[atom] = -e
    return dens


def clear(p: Poly, dens: Mapping[Atom, int]) -> Poly:
    """Multiply ``p`` by prod(U**k for U, k in dens), expanding the den atoms."""
    if not dens:
        return p
    groups: dict = {}
    for m, c in p.terms.items():
        atoms, trig, x = m
        sig = []
        keep = []
        for atom, e in atoms:
            if atom in dens:
                sig.append((atom, e))
            else:
                keep.append((atom, e))
        groups.setdefault(tuple(sig), {})[(tuple(keep), trig, x)] = c
    out = []
    for sig, terms in groups.items():
        present = dict(sig)
        mult = ONE
        for atom, k in dens.items():
            extra = k + present.get(atom, 0)
            if extra < 0:
                raise ValueError("clearing power too small")
            if extra:
                mult = pmul(mult, ppow(atom.inner, extra))
        out.append(pmul(Poly(terms), mult))
    return psum(out)


def _attach(p: Poly, dens: Mapping[Atom, int]) -> Poly:
    atoms = tuple(sorted(((a, -k) for a, k in dens.items() if k), key=lambda ae: ae[0].key))
    if not atoms:
        return p
    return pmul(p, Poly({(atoms, CONST_TRIG, None): F1}))


def decompose(n: Poly) -> tuple:
    """Split a den-free ``n`` as c * M * exp(X) * U with U primitive.

    M is a Laurent monomial in the plain atoms. U has coprime integer
    coefficients, and its first term (in canonical order) is positive and
    carries no exp factor.
    """
    mins: dict = {}
    terms = list(n.terms.items())
    candidates = {atom for (atoms, _, _), _ in terms for atom, _ in atoms if atom.kind not in ("abs", "den")}
    for atom in candidates:
        lo = None
        for (atoms, _, _), _ in terms:
            e = dict(atoms).get(atom, 0)
            lo = e if lo is None else min(lo, e)
        if lo:
            mins[atom] = lo
    if mins:
        inv = tuple(sorted(((a, -e) for a, e in mins.items()), key=lambda ae: ae[0].key))
        n = pmul(n, Poly({(inv, CONST_TRIG, None): F1}))
    first_m, _ = min(n.terms.items(), key=lambda mc: (mono_key(mc[0])[:2], mono_key(mc[0])[2]))
    x = first_m[2]
    if x is not None:
        n = pmul(n, Poly({((), CONST_TRIG, pscale(x, -F1)): F1}))
    first_m, first_c = min(n.terms.items(), key=lambda mc: mono_key(mc[0]))
    u = pscale(n, 1 / first_c)
    # integer coefficients without common factor, first term positive
    num_gcd, den_lcm = 0, 1
    for c in u.terms.values():
        num_gcd = math.gcd(num_gcd, c.numerator)
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    k = Fraction(num_gcd, den_lcm)
    return first_c * k, mins, x, pscale(u, 1 / k)


def reciprocal(p: Poly) -> Poly:
    if p.is_zero():
        raise SingularityError("division by zero")
    if len(p.terms) == 1:
        (m, c), = p.terms.items()
        atoms, trig, x = m
        if trig == CONST_TRIG:
            inv = []
            extra = ONE
            for atom, e in atoms:
                if atom.kind == "den":
                    extra = pmul(extra, ppow(atom.inner, -e))
                else:
                    inv.append((atom, -e))
            xm = None if x is None else pscale(x, -F1)
            return pmul(Poly({(tuple(inv), CONST_TRIG, xm): 1 / c}), extra)
    dens = _den_exponents(p)
    if dens:
        n = clear(p, dens)
        factor = pprod(ppow(atom.inner, k) for atom, k in dens.items())
        return pmul(factor, reciprocal(n))
    c, mins, x, u = decompose(p)
    atoms = [(a, -e) for a, e in mins.items()]
    if u != ONE:
        atoms.append((Atom("den", inner=u), -1))
    atoms.sort(key=lambda ae: ae[0].key)
    xm = None if x is None else pscale(x, -F1)
    return Poly({(tuple(atoms), CONST_TRIG, xm): 1 / c})


def pdiv(p: Poly, q: Poly) -> Poly:
    return pmul(p, reciprocal(q))


def reduce(p: Poly) -> Poly:
    """Normal form: common denominator with every exactly-dividing factor cancelled."""
    dens = _den_exponents(p)
    if not dens:
        return p
    n = clear(p, dens)
    if n.is_zero():
        return ZERO
    for atom in sorted(dens, key=lambda a: a.key):
        while dens[atom] > 0:
            q = divide_exact(n, atom.inner)
            if q is None:
                break
            n = q
            dens[atom] -= 1
    return _attach(n, dens)


# -- exact division ------------------------------------------------------------


def _split_by(p: Poly, var: Atom) -> dict | None:
    out: dict = {}
    for (atoms, trig, x), c in p.terms.items():
        e = 0
        rest = []
        for atom, k in atoms:
            if atom is var or atom == var:
                e = k
            else:
                rest.append((atom, k))
        if e < 0:
            return None
        out.setdefault(e, {})[(tuple(rest), trig, x)] = c
    return {e: Poly(t) for e, t in out.items()}


def _is_unit_lead(p: Poly) -> bool:
    if len(p.terms) != 1:
        return False
    (atoms, trig, _), = p.terms
    return trig == CONST_TRIG and all(a.kind not in ("den", "abs") for a, _ in atoms)


def _division_variable(u: Poly):
    """Pick an atom in which ``u`` has an invertible leading coefficient.

    Rational leading coefficients are preferred, then monomial ones (which
    are units of the Laurent ring), then lower degree.
    """
    best = None
    for atom in top_atoms(u):
        if atom.kind in ("den", "abs"):
            continue
        split = _split_by(u, atom)
        if split is None:
            continue
        d = max(split)
        if d == 0:
            continue
        lead = split[d]
        if lead.is_const():
            rank = 0
        elif _is_unit_lead(lead):
            rank = 1
        else:
            continue
        cand = (rank, d, atom.key, atom, split)
        if best is None or cand[:3] < best[:3]:
            best = cand
    return None if best is None else best[1:]


def divide_exact(n: Poly, u: Poly) -> Poly | None:
    """Return n/u when u divides n exactly (in the Laurent ring), else None."""
    if n.is_zero():
        return ZERO
    if all(atoms == () and x is None for atoms, _, x in u.terms):
        return _divide_trig(n, u)
    choice = _division_variable(u)
    if choice is None:
        return None
    d, _, var, usplit = choice
    lo = min(dict(atoms).get(var, 0) for atoms, _, _ in n.terms)
    if lo < 0:
        n = pmul(n, atom_poly(var, -lo))
    r = _split_by(n, var)
    if r is None:
        return None
    inv_lead = reciprocal(usplit[d])
    q: dict = {}
    while r:
        top = max(r)
        if top < d:
            return None
        coef = pmul(r[top], inv_lead)
        shift = top - d
        q[shift] = padd(q.get(shift, ZERO), coef)
        for deg, uc in usplit.items():
            key = deg + shift
            val = padd(r.get(key, ZERO), pscale(pmul(coef, uc), -F1))
            if val.is_zero():
                r.pop(key, None)
            else:
                r[key] = val
    out = []
    for e, coef in q.items():
        e += min(lo, 0)
        if e:
            out.append(pmul(coef, atom_poly(var, e)))
        else:
            out.append(coef)
    return psum(out)


def _to_laurent(trig_coeffs: Mapping[tuple, Fraction]) -> dict:
    """Trig polynomial -> Laurent coefficients in z = exp(i t) as (re, im) pairs."""
    z: dict = {}

    def bump(k, re, im):
        a, b = z.get(k, (Fraction(0), Fraction(0)))
        z[k] = (a + re, b + im)

    for (kind, n), c in trig_coeffs.items():
        if kind == 0:
            bump(0, c, Fraction(0))
        elif kind == COS:
            bump(n, c / 2, Fraction(0))
            bump(-n, c / 2, Fraction(0))
        else:
            bump(n, Fraction(0), -c / 2)
            bump(-n, Fraction(0), c / 2)
    return {k: v for k, v in z.items() if v != (0, 0)}


def _cmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _cinv(x):
    d = x[0] * x[0] + x[1] * x[1]
    return (x[0] / d, -x[1] / d)


def _divide_laurent(num: dict, den: dict) -> dict | None:
    r = dict(num)
    dtop = max(den)
    dlow = min(den)
    inv_lead = _cinv(den[dtop])
    q: dict = {}
    while r:
        top = max(r)
        if top - dtop < min(r) - dlow:
            return None
        shift = top - dtop
        coef = _cmul(r[top], inv_lead)
        q[shift] = coef
        for k, v in den.items():
            prod = _cmul(coef, v)
            cur = r.get(k + shift, (Fraction(0), Fraction(0)))
            val = (cur[0] - prod[0], cur[1] - prod[1])
            if val == (0, 0):
                r.pop(k + shift, None)
            else:
                r[k + shift] = val
        if min(r, default=0) - dlow > top and r:
            return None
    return q


def _from_laurent(z: dict) -> dict | None:
    out: dict = {}
    for k in sorted({abs(k) for k in z}):
        cp = z.get(k, (Fraction(0), Fraction(0)))
        cm = z.get(-k, (Fraction(0), Fraction(0)))
        if k == 0:
            if cp[1]:
                return None
            if cp[0]:
                out[CONST_TRIG] = cp[0]
            continue
        a = (cp[0] + cm[0], cp[1] + cm[1])
        # B_n = i (c_n - c_-n)
        b = (-(cp[1] - cm[1]), cp[0] - cm[0])
        if a[1] or b[1]:
            return None
        if a[0]:
            out[(COS, k)] = a[0]
        if b[0]:
            out[(SIN, k)] = b[0]
    return out


def _divide_trig(n: Poly, u: Poly) -> Poly | None:
    den = _to_laurent({trig: c for (_, trig, _), c in u.terms.items()})
    groups: dict = {}
    for (atoms, trig, x), c in n.terms.items():
        groups.setdefault((atoms, x), {})[trig] = c
    out: dict = {}
    for (atoms, x), coeffs in groups.items():
        q = _divide_laurent(_to_laurent(coeffs), den)
        if q is None:
            return None
        trig_q = _from_laurent(q)
        if trig_q is None:
            return None
        for trig, c in trig_q.items():
            out[(atoms, trig, x)] = c
    return Poly(out)


# -- differentiation -------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def atom_derivative(atom: Atom, var: str) -> Poly:
    """d(atom)/d(var); for a den atom U this is dU (the exponent rule is applied by the caller)."""
    kind = atom.kind
    if kind in ("s", "t"):
        return ONE if kind == var else ZERO
    if kind == "param":
        return ZERO
    if kind == "func":
        return atom_poly(func_atom(atom.name, atom.order + 1)) if var == "s" else ZERO
    du = pdiff(atom.inner, var)
    if du.is_zero():
        return ZERO
    if kind == "log":
        return pmul(du, reciprocal(atom.inner))
    if kind == "abs":
        return pmul(pmul(atom_poly(atom), du), reciprocal(atom.inner))
    return du


@lru_cache(maxsize=1 << 18)
def _mono_diff(m: tuple, var: str) -> tuple:
    atoms, trig, x = m
    pieces = []
    for i, (atom, e) in enumerate(atoms):
        da = atom_derivative(atom, var)
        if da.is_zero():
            continue
        rest = list(atoms)
        if e == 1:
            del rest[i]
        else:
            rest[i] = (atom, e - 1)
        pieces.append(pmul(Poly({(tuple(rest), trig, x): Fraction(e)}), da))
    if var == "t" and trig != CONST_TRIG:
        kind, n = trig
        if kind == COS:
            pieces.append(Poly({(atoms, (SIN, n), x): Fraction(-n)}))
        else:
            pieces.append(Poly({(atoms, (COS, n), x): Fraction(n)}))
    if x is not None:
        dx = pdiff(x, var)
        if not dx.is_zero():
            pieces.append(pmul(Poly({m: F1}), dx))
    return tuple(psum(pieces).terms.items())


@lru_cache(maxsize=1 << 14)
def pdiff(p: Poly, var: str) -> Poly:
    out: dict = {}
    for m, c in p.terms.items():
        for m2, c2 in _mono_diff(m, var):
            out[m2] = out.get(m2, 0) + c * c2
    return Poly({m: c for m, c in out.items() if c})


# -- substitution ------------------------------------------------------------------


def substitute_atoms(p: Poly, mapping: Callable[[Atom], Poly | None]) -> Poly:
    """Replace atoms by polynomials; ``mapping`` returns None to keep an atom."""
    memo: dict = {}

    def atom_image(atom: Atom) -> Poly | None:
        if atom in memo:
            return memo[atom]
        img = mapping(atom)
        if img is None and atom.inner is not None:
            inner = sub(atom.inner)
            if inner != atom.inner:
                if atom.kind == "log":
                    img = make_log(inner)
                elif atom.kind == "abs":
                    img = make_abs(inner)
                else:
                    img = inner
        memo[atom] = img
        return img

    def sub(q: Poly) -> Poly:
        out = []
        for (atoms, trig, x), c in q.terms.items():
            kept = []
            factors = []
            for atom, e in atoms:
                img = atom_image(atom)
                if img is None:
                    kept.append((atom, e))
                else:
                    factors.append(pint_pow(img, e))
            xf = ONE
            if x is not None:
                xs = sub(x)
                xf = make_exp(xs) if xs != x else Poly({((), CONST_TRIG, x): F1})
            base = Poly({(tuple(kept), trig, None): c})
            out.append(pprod([base, xf, *factors]))
        return psum(out)

    return reduce(sub(p))


def substitute_function(p: Poly, name: str, replacement: Poly) -> Poly:
    derivs = [replacement]

    def mapping(atom: Atom) -> Poly | None:
        if atom.kind == "func" and atom.name == name:
            while len(derivs) <= atom.order:
                derivs.append(pdiff(derivs[-1], "s"))
            return derivs[atom.order]
        return None

    return substitute_atoms(p, mapping)


# -- tree conversion -------------------------------------------------------------


def from_tree(e: E.SymExpr) -> Poly:
    memo: dict = {}

    def conv(node: E.SymExpr) -> Poly:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit[1]
        out = _conv(node)
        memo[key] = (node, out)
        return out

    def recip(node: E.SymExpr) -> Poly:
        if isinstance(node, E.Mul):
            return pprod(recip(f) for f in node.factors)
        if isinstance(node, E.Pow):
            if node.exp > 0:
                return ppow(recip(node.base), node.exp)
            return ppow(conv(node.base), -node.exp)
        if isinstance(node, E.Const):
            if node.value == 0:
                raise SingularityError("division by zero")
            return const(1 / node.value)
        return reciprocal(conv(node))

    def _conv(node: E.SymExpr) -> Poly:
        if isinstance(node, E.Const):
            return const(node.value)
        if isinstance(node, E.Var):
            return atom_poly(S_ATOM if node.name == "s" else T_ATOM)
        if isinstance(node, E.Param):
            return atom_poly(param_atom(node.name))
        if isinstance(node, E.Func):
            return atom_poly(func_atom(node.name, node.order))
        if isinstance(node, E.Add):
            return psum(conv(t) for t in node.terms)
        if isinstance(node, E.Mul):
            return pprod(conv(f) for f in node.factors)
        if isinstance(node, E.Pow):
            if node.exp >= 0:
                return ppow(conv(node.base), node.exp)
            return ppow(recip(node.base), -node.exp)
        if isinstance(node, E.Div):
            return pmul(conv(node.num), recip(node.den))
        if isinstance(node, E.Sin):
            return trig_poly(SIN, node.n)
        if isinstance(node, E.Cos):
            return trig_poly(COS, node.n)
        if isinstance(node, E.Exp):
            return make_exp(conv(node.arg))
        if isinstance(node, E.Log):
            return make_log(conv(node.arg))
        if isinstance(node, E.Abs):
            return make_abs(conv(node.arg))
        raise TypeError(f"not an expression node: {node!r}")

    return conv(e)


def atom_tree(atom: Atom) -> E.SymExpr:
    kind = atom.kind
    if kind in ("s", "t"):
        return E.Var(kind)
    if kind == "param":
        return E.Param(atom.name)
    if kind == "func":
        return E.Func(atom.name, atom.order)
    if kind == "log":
        return E.Log(to_tree(atom.inner))
    if kind == "abs":
        return E.Abs(to_tree(atom.inner))
    return to_tree(atom.inner)


def _trig_tree(trig: tuple) -> E.SymExpr | None:
    kind, n = trig
    if kind == 0:
        return None
    return E.Cos(n) if kind == COS else E.Sin(n)


def _mono_tree(c: Fraction, atoms: Iterable, trig: tuple, x: Poly | None) -> E.SymExpr:
    factors: list = [E.Const(c)]
    for atom, e in atoms:
        factors.append(E.power(atom_tree(atom), e))
    tt = _trig_tree(trig)
    if tt is not None:
        factors.append(tt)
    if x is not None:
        factors.append(E.Exp(to_tree(x)))
    return E.mul(*factors)


def to_tree(p: Poly) -> E.SymExpr:
    """Render ``p`` as a tree: one numerator over the common denominator."""
    if p.is_zero():
        return E.ZERO
    dens: dict = {}
    for atoms, _, _ in p.terms:
        for atom, e in atoms:
            if e < 0 and -e > dens.get(atom, 0):
                dens[atom] = -e
    num_terms = []
    for (atoms, trig, x), c in p.sorted_terms():
        d = dict(atoms)
        for atom, k in dens.items():
            d[atom] = d.get(atom, 0) + k
        shifted = sorted(((a, e) for a, e in d.items() if e), key=lambda ae: ae[0].key)
        num_terms.append(_mono_tree(c, shifted, trig, x))
    num = E.add(*num_terms)
    if not dens:
        return num
    den = E.mul(*(E.power(atom_tree(a), dens[a]) for a in sorted(dens, key=lambda a: a.key)))
    return E.div(num, den)


# -- numeric evaluation -----------------------------------------------------------


def evaluate(p: Poly, s: float, t: float, env: E.Bindings) -> float:
    memo: dict = {}

    def atom_value(atom: Atom) -> float:
        v = memo.get(atom)
        if v is not None:
            return v
        kind = atom.kind
        if kind == "s":
            v = s
        elif kind == "t":
            v = t
        elif kind == "param":
            v = env.param(atom.name)
        elif kind == "func":
            v = env.function(atom.name, atom.order, s)
        else:
            inner = value(atom.inner)
            if kind == "log":
                if inner <= 0.0:
                    raise SingularityError(f"log of non-positive value {inner} at s={s}, t={t}")
                v = math.log(inner)
            elif kind == "abs":
                v = abs(inner)
            else:
                v = inner
        memo[atom] = v
        return v

    def value(q: Poly) -> float:
        parts = []
        for (atoms, trig, x), c in q.terms.items():
            term = float(c)
            for atom, e in atoms:
                av = atom_value(atom)
                if av == 0.0 and e < 0:
                    raise SingularityError(f"pole at s={s}, t={t}")
                term *= av**e
            kind, n = trig
            if kind == COS:
                term *= math.cos(n * t)
            elif kind == SIN:
                term *= math.sin(n * t)
            if x is not None:
                term *= math.exp(value(x))
            parts.append(term)
        return math.fsum(parts)

    return value(p)


def clear_caches() -> None:
    for fn in (mono_key, ppow, _trig_mul, mono_mul, atom_depends, depends_on, atom_derivative, _mono_diff, pdiff):
        fn.cache_clear()


def resolve_abs(p: Poly, s: float, t: float, env: E.Bindings) -> Poly:
    """Replace each abs atom by +u or -u using the sign of u at (s, t)."""

    def mapping(atom: Atom) -> Poly | None:
        if atom.kind != "abs":
            return None
        inner = substitute_atoms(atom.inner, mapping)
        value = evaluate(inner, s, t, env)
        if value == 0.0:
            raise DomainError(f"abs argument vanishes at s={s}, t={t}")
        return inner if value > 0 else pscale(inner, -F1)

    return substitute_atoms(p, mapping)


def is_unit(p: Poly) -> bool:
    """A single nonzero term without trig: a product of atom powers and one exponential."""
    if len(p.terms) != 1:
        return False
    (atoms, trig, _), _ = next(iter(p.terms.items()))
    return trig == CONST_TRIG and all(a.kind in ("param", "s", "t", "func") for a, _ in atoms)
