"""Named curves and surfaces: circles and lines in the leaves P_s, cyclic charts, classified solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import least_squares

from solv.curvature import SurfaceChart
from solv.errors import DomainError
from solv.sol3_core import Sol3Point, phi_s_inv, translate
from solv.symtrig import canon as C
from solv.symtrig import expr as E
from solv.symtrig import parse

TWO_PI = 2 * math.pi

# -- circles and lines in a leaf P_s ----------------------------------------------------


@dataclass(frozen=True)
class CircleInfo:
    s: float
    a: float
    b: float
    r: float
    center: tuple | None
    hyperbolic_radius: float | None
    curvature: float

    @property
    def kind(self) -> str:
        return kind_from_data(self.b, self.r)


def kind_from_data(b: float, r: float, tol: float = 1e-12) -> str:
    """Curve type of the Euclidean circle or line with data (b, r), from kappa = b/r."""
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    if abs(b) <= tol:
        return "geodesic"
    if abs(b - r) <= tol * max(1.0, r):
        return "horocycle"
    if 0 < b < r:
        return "equidistant"
    if b > r:
        return "circle"
    raise DomainError(f"negative curvature data b={b}, r={r}")


def circle_info(s: float, a: float, b: float, r: float) -> CircleInfo:
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    center = None
    radius = None
    if b > r:
        h = math.sqrt(b * b - r * r)
        center = (a, h)
        radius = math.log((b + r) / h)
    return CircleInfo(s, a, b, r, center, radius, abs(b) / r)


def circle_curve(s: float, a: float, b: float, r: float) -> tuple[Callable[[float], Sol3Point], CircleInfo]:
    """t -> (s, a + r cos t, log(b + r sin t)), the preimage of a Euclidean circle in the half-plane."""
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    if b - r <= 0:
        raise DomainError(f"b - r = {b - r} <= 0: not a circle of the leaf; use line_curve")

    def curve(t: float) -> Sol3Point:
        return phi_s_inv(s, (a + r * math.cos(t), b + r * math.sin(t)))

    return curve, circle_info(s, a, b, r)


def line_curve(kind: str, s: float, a: float = 0.0, b: float = 0.0) -> Callable[[float], Sol3Point]:
    """Geodesic (s, a, log t), equidistant (s, t, log(at+b)) or horocycle (s, t, log a)."""
    if kind == "geodesic":

        def curve(t):
            if t <= 0:
                raise DomainError(f"geodesic parameter must be positive, got {t}")
            return Sol3Point(s, a, math.log(t))

    elif kind == "equidistant":
        if a == 0:
            raise DomainError("equidistant line needs a != 0")

        def curve(t):
            v = a * t + b
            if v <= 0:
                raise DomainError(f"a*t + b = {v} <= 0")
            return Sol3Point(s, t, math.log(v))

    elif kind == "horocycle":
        if a <= 0:
            raise DomainError(f"horocycle needs a > 0, got {a}")
        za = math.log(a)

        def curve(t):
            return Sol3Point(s, t, za)

    else:
        raise ValueError(f"unknown line kind {kind!r}")
    return curve


def geodesic_curvature_half_plane(curve: Callable[[float], tuple[float, float]], t: float, h: float = 1e-4) -> float:
    """Signed geodesic curvature of a curve in the half-plane metric (dx^2+dy^2)/y^2.

    The metric is conformal to the Euclidean one with factor e^{2f}, f = -log y,
    so kappa_h = y * (kappa_e - df/dn) where n is the left Euclidean unit
    normal. Derivatives of the curve are central differences with step h.
    """
    p0 = np.asarray(curve(t), dtype=float)
    p1 = np.asarray(curve(t + h), dtype=float)
    pm = np.asarray(curve(t - h), dtype=float)
    d1 = (p1 - pm) / (2 * h)
    d2 = (p1 - 2 * p0 + pm) / (h * h)
    speed = math.hypot(*d1)
    kappa_e = (d1[0] * d2[1] - d1[1] * d2[0]) / speed**3
    normal = np.array([-d1[1], d1[0]]) / speed
    y = p0[1]
    df_dn = -normal[1] / y
    return y * (kappa_e - df_dn)


# -- charts -------------------------------------------------------------------------


def _sym(value) -> E.SymExpr:
    if isinstance(value, E.SymExpr):
        return value
    if isinstance(value, (int, Fraction)):
        return E.const(value)
    if isinstance(value, float):
        return E.const(Fraction(str(value)))
    return parse(str(value))


def _fill(template: str, **subs) -> E.SymExpr:
    """Parse ``template`` (written in a, b, r) and substitute the given functions.

    Derivatives such as a' in the template become derivatives of the
    replacement. Symbols bound to themselves are left untouched.
    """
    tree = parse(template)
    table = {}
    for name, value in subs.items():
        value = _sym(value)
        if value == E.Func(name, 0):
            continue
        if E.depends_on(value, "t"):
            raise DomainError(f"{name} must depend on s only, got {E.to_text(value)}")
        table[name] = [C.reduce(C.from_tree(value))]
    if not table:
        return tree

    def mapping(atom):
        if atom.kind == "func" and atom.name in table:
            derivs = table[atom.name]
            while len(derivs) <= atom.order:
                derivs.append(C.pdiff(derivs[-1], "s"))
            return derivs[atom.order]
        return None

    return C.to_tree(C.substitute_atoms(C.from_tree(tree), mapping))


def cyclic_chart(a="a", b="b", r="r", s_domain=(-1.0, 1.0), t_domain=(0.1, math.pi - 0.1), label="cyclic", bindings=None) -> SurfaceChart:
    """(s, a + r cos t, log(b + r sin t)) with the matching normal attached."""
    X = (E.S, _fill("a + r*cos(t)", a=a, r=r), _fill("log(b + r*sin(t))", b=b, r=r))
    N = (
        _fill("(r' + a'*cos(t) + b'*sin(t))/(b + r*sin(t))^2", a=a, b=b, r=r),
        parse("-cos(t)"),
        parse("-sin(t)"),
    )
    clearing = _fill("b + r*sin(t)", b=b, r=r)
    return SurfaceChart(X, s_domain, t_domain, label, normal=N, clearing=clearing, bindings=bindings or {})


def line_of_centers(a: float, b: float, r: float) -> Callable[[float], Sol3Point]:
    """Centers of the circles of a rotational chart, as points of Sol3.

    The half-plane center of each circle is (a, sqrt(b^2 - r^2)); its preimage
    in P_s has z = log sqrt(b^2 - r^2).
    """
    if b - r <= 0:
        raise DomainError("centers exist only for b > r")
    h = math.sqrt(b * b - r * r)
    return lambda s: phi_s_inv(s, (a, h))


def zplane_cyclic_chart(a="a", b="b", r="r", s_domain=(-1.0, 1.0), t_domain=(0.0, TWO_PI), label="zplane", bindings=None) -> SurfaceChart:
    """(a + r e^{-s} cos t, b + r e^{s} sin t, s) with the matching normal attached."""
    X = (
        _fill("a + r*exp(-s)*cos(t)", a=a, r=r),
        _fill("b + r*exp(s)*sin(t)", b=b, r=r),
        E.S,
    )
    N = (
        parse("cos(t)"),
        parse("sin(t)"),
        _fill("r*cos(2*t) - a'*exp(s)*cos(t) - b'*exp(-s)*sin(t) - r'", a=a, b=b, r=r),
    )
    return SurfaceChart(X, s_domain, t_domain, label, normal=N, bindings=bindings or {})


FOLIATION_KINDS = ("geodesic", "equidistant", "horocycle")


def foliated_chart(kind: str, a="a", b="b", s_domain=None, t_domain=None, bindings=None) -> SurfaceChart:
    """Surfaces whose s-slices are geodesics, equidistant lines or horocycles of P_s."""
    if kind == "geodesic":
        X = (E.S, _fill("a", a=a), E.T)
        N = (_fill("a'*exp(-t)", a=a), parse("-exp(t)"), E.ZERO)
        return SurfaceChart(X, s_domain or (-1.0, 1.0), t_domain or (-1.0, 1.0), "geodesic-foliated", normal=N, bindings=bindings or {})
    if kind == "equidistant":
        X = (E.S, E.T, _fill("log(a*t + b)", a=a, b=b))
        N = (
            _fill("-(a'*t + b')/(a*t + b)^2", a=a, b=b),
            _fill("-a", a=a),
            E.ONE,
        )
        clearing = _fill("a*t + b", a=a, b=b)
        return SurfaceChart(
            X, s_domain or (-1.0, 1.0), t_domain or (0.5, 2.0), "equidistant-foliated", normal=N, clearing=clearing, bindings=bindings or {}
        )
    if kind == "horocycle":
        X = (E.S, E.T, _fill("a", a=a))
        N = (_fill("a'*exp(-a)", a=a), E.ZERO, E.const(-1))
        return SurfaceChart(X, s_domain or (-1.0, 1.0), t_domain or (-1.0, 1.0), "horocycle-foliated", normal=N, bindings=bindings or {})
    raise ValueError(f"unknown foliation kind {kind!r}; expected one of {FOLIATION_KINDS}")


# -- classified surfaces -------------------------------------------------------------


@dataclass(frozen=True)
class ClassifiedSpec:
    id: str
    condition: str  # "H" (minimal) or "K" (flat)
    invariance: tuple  # translation families the surface is claimed to be invariant under
    defaults: Mapping = field(default_factory=dict)
    note: str = ""


CATALOGUE: dict[str, ClassifiedSpec] = {
    "min_geodesic_plane": ClassifiedSpec("min_geodesic_plane", "H", (), {"lambda": 1, "mu": 0}),
    "min_equi_1": ClassifiedSpec("min_equi_1", "H", ("T2",), {"b0": 1, "b1": 1}),
    "min_equi_2": ClassifiedSpec("min_equi_2", "H", ("T1",), {"a0": 1, "a1": 1}),
    "min_horo": ClassifiedSpec("min_horo", "H", ("T2",), {"lambda": 0, "mu": 1}),
    "flat_Qs": ClassifiedSpec("flat_Qs", "K", ("T1",), {"s0": 0}),
    "flat_geo_circle": ClassifiedSpec("flat_geo_circle", "K", ("T1",), {"a": 0, "r": 1}),
    "flat_equi": ClassifiedSpec("flat_equi", "K", ("T2",), {"lambda": 0, "mu": 1}),
    "flat_horo": ClassifiedSpec("flat_horo", "K", ("T2",), {"lambda": 0, "mu": 1}),
    "min_equi_b0": ClassifiedSpec(
        "min_equi_b0", "H", (), {}, note="b = 0 with a(s) free; the numerator reduces to the a*a'' - 2a'^2 factor"
    ),
    "min_horo_printed": ClassifiedSpec(
        "min_horo_printed", "H", ("T2",), {"lambda": 0, "mu": 1}, note="z = lambda + log|s + mu| is not minimal"
    ),
}

MINIMAL_IDS = ("min_geodesic_plane", "min_equi_1", "min_equi_2", "min_horo")
FLAT_IDS = ("flat_Qs", "flat_geo_circle", "flat_equi", "flat_horo")


def _rat(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def quadratic_domain(lam, mu) -> tuple[float, float]:
    """The interval where -s^2 + lambda s + mu > 0."""
    lam, mu = _rat(lam), _rat(mu)
    disc = lam * lam + 4 * mu
    if disc <= 0:
        raise DomainError(f"-s^2 + {lam}s + {mu} is never positive")
    root = math.sqrt(disc)
    return ((float(lam) - root) / 2, (float(lam) + root) / 2)


def _shrink(lo: float, hi: float, frac: float = 0.05) -> tuple[float, float]:
    pad = (hi - lo) * frac
    return (lo + pad, hi - pad)


def _right_of(pole: float, width: float = 2.0) -> tuple[float, float]:
    return _shrink(pole, pole + width)


def classified_surface(id: str, **params) -> SurfaceChart:
    """Chart of a catalogued minimal or flat surface with rational parameters bound."""
    try:
        spec = CATALOGUE[id]
    except KeyError:
        raise ValueError(f"unknown classified surface {id!r}; known: {sorted(CATALOGUE)}") from None
    values = {**spec.defaults, **params}
    unknown = set(values) - set(spec.defaults)
    if unknown:
        raise ValueError(f"{id} takes parameters {sorted(spec.defaults)}, got {sorted(unknown)}")
    v = {k: _rat(x) for k, x in values.items()}
    c = {k: E.to_text(E.const(x)) for k, x in v.items()}

    if id == "min_geodesic_plane":
        X = (E.S, parse(f"({c['lambda']})*s + ({c['mu']})"), E.T)
        return SurfaceChart(X, (-1.0, 1.0), (-1.0, 1.0), id)
    if id == "min_equi_1":
        if v["b0"] == 0:
            raise DomainError("b0 must be nonzero")
        X = (E.S, E.T, parse(f"log(abs(({c['b0']})/(s + ({c['b1']}))))"))
        return SurfaceChart(X, _right_of(-float(v["b1"])), (-1.0, 1.0), id)
    if id == "min_equi_2":
        if v["a0"] == 0:
            raise DomainError("a0 must be nonzero")
        X = (E.S, E.T, parse(f"log(abs(({c['a0']})*t/(s + ({c['a1']}))))"))
        return SurfaceChart(X, _right_of(-float(v["a1"])), (0.25, 2.0), id)
    if id == "min_horo":
        X = (E.S, E.T, parse(f"({c['lambda']}) - log(abs(s + ({c['mu']})))"))
        return SurfaceChart(X, _right_of(-float(v["mu"])), (-1.0, 1.0), id)
    if id == "min_horo_printed":
        X = (E.S, E.T, parse(f"({c['lambda']}) + log(abs(s + ({c['mu']})))"))
        return SurfaceChart(X, _right_of(-float(v["mu"])), (-1.0, 1.0), id)
    if id == "min_equi_b0":
        return foliated_chart("equidistant", a="a", b=0, s_domain=(-1.0, 1.0), t_domain=(0.5, 2.0))
    if id == "flat_Qs":
        X = (E.S, parse(c["s0"]), E.T)
        return SurfaceChart(X, (-1.0, 1.0), (-1.0, 1.0), id)
    if id == "flat_geo_circle":
        if v["r"] <= 0:
            raise DomainError("r must be positive")
        X = (E.S, parse(f"({c['a']}) + ({c['r']})*cos(t)"), parse(f"log(({c['r']})*sin(t))"))
        return SurfaceChart(X, (-1.0, 1.0), _shrink(0.0, math.pi), id)
    q = f"-s^2 + ({c['lambda']})*s + ({c['mu']})"
    dom = _shrink(*quadratic_domain(v["lambda"], v["mu"]))
    if id == "flat_equi":
        X = (E.S, E.T, parse(f"log(abs(1/sqrt({q})))"))
        return SurfaceChart(X, dom, (-1.0, 1.0), id)
    if id == "flat_horo":
        X = (E.S, E.T, parse(f"-1/2*log(abs({q}))"))
        return SurfaceChart(X, dom, (-1.0, 1.0), id)
    raise AssertionError(id)


# -- invariance under translations ---------------------------------------------------------


@dataclass(frozen=True)
class InvarianceReport:
    kind: str
    invariant: bool
    max_residual: float
    samples: int
    shifts: tuple

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "invariant": self.invariant,
            "max_residual": self.max_residual,
            "samples": self.samples,
            "shifts": list(self.shifts),
        }


def _membership_residual(chart: SurfaceChart, target: np.ndarray, guess: tuple[float, float], env) -> float:
    """Distance from ``target`` to the chart image, minimized over (s, t) near ``guess``."""

    def f(st):
        try:
            p = [E.evaluate(c, st[0], st[1], env) for c in chart.X]
        except (ArithmeticError, ValueError):
            return np.full(3, 1e6)
        return np.asarray(p) - target

    best = math.inf
    (slo, shi), (tlo, thi) = chart.s_domain, chart.t_domain
    starts = [guess, ((slo + shi) / 2, (tlo + thi) / 2)]
    for st0 in starts:
        st0 = (min(max(st0[0], slo), shi), min(max(st0[1], tlo), thi))
        sol = least_squares(f, st0, bounds=([slo, tlo], [shi, thi]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        best = min(best, float(np.max(np.abs(sol.fun))))
        if best < 1e-12:
            break
    return best


def invariance_check(
    chart: SurfaceChart,
    kind: str,
    shifts=(0.05, -0.05, 0.1),
    samples: int = 5,
    seed: int = 0,
    tol: float = 1e-8,
    bindings=None,
) -> InvarianceReport:
    """Do translated chart points stay on the chart image?"""
    rng = np.random.default_rng(seed)
    env = chart.env(bindings)
    (slo, shi), (tlo, thi) = chart.s_domain, chart.t_domain
    worst = 0.0
    for _ in range(samples):
        s = slo + (shi - slo) * (0.3 + 0.4 * rng.random())
        t = tlo + (thi - tlo) * (0.3 + 0.4 * rng.random())
        p = Sol3Point.of(E.evaluate(c, s, t, env) for c in chart.X)
        for c in shifts:
            q = translate(kind, c, p).as_array()
            worst = max(worst, _membership_residual(chart, q, (s, t), env))
    return InvarianceReport(kind, worst < tol, worst, samples, tuple(shifts))


# -- family specs (JSON input of the command line) ------------------------------------------

FAMILY_TAGS = (
    "cyclic_P",
    "cyclic_R",
    "geodesic_line",
    "equidistant_line",
    "horocycle_line",
    "leaf_P",
    "leaf_Q",
    "leaf_R",
    "chart",
)
_LINE_KINDS = {"geodesic_line": "geodesic", "equidistant_line": "equidistant", "horocycle_line": "horocycle"}
_LEAF_FOLIATIONS = {"leaf_P": "F1", "leaf_Q": "F2", "leaf_R": "F3"}


@dataclass(frozen=True)
class FamilySpec:
    """A family tag, its parameter values and optional domain overrides."""

    family: str
    params: Mapping = field(default_factory=dict)
    s_domain: tuple | None = None
    t_domain: tuple | None = None

    @classmethod
    def from_dict(cls, data: Mapping) -> FamilySpec:
        if not isinstance(data, Mapping):
            raise ValueError("a family spec must be a JSON object")
        extra = set(data) - {"family", "params", "s_domain", "t_domain"}
        if extra:
            raise ValueError(f"unknown family spec keys: {sorted(extra)}")
        if "family" not in data:
            raise ValueError("family spec needs a 'family' entry")
        params = data.get("params") or {}
        if not isinstance(params, Mapping):
            raise ValueError("'params' must be an object")
        doms = []
        for key in ("s_domain", "t_domain"):
            dom = data.get(key)
            if dom is not None:
                if len(dom) != 2 or not all(isinstance(v, (int, float)) for v in dom):
                    raise ValueError(f"{key} must be a pair of numbers")
                if not dom[0] < dom[1]:
                    raise DomainError(f"{key} {list(dom)} is empty")
                dom = (float(dom[0]), float(dom[1]))
            doms.append(dom)
        return cls(str(data["family"]), dict(params), doms[0], doms[1])

    def chart(self) -> SurfaceChart:
        return chart_from_spec(self)


def _spec_value(value) -> E.SymExpr:
    if isinstance(value, bool):
        raise ValueError("boolean parameter values are not allowed")
    if isinstance(value, (int, float)):
        return E.const(_rat(value))
    if isinstance(value, str):
        return parse(value)
    raise ValueError(f"parameter values must be numbers or expression strings, got {value!r}")


def _split_params(params: Mapping, allowed_functions: tuple) -> tuple[dict, dict]:
    """Separate function bindings from named constants and bind the constants."""
    funcs, consts = {}, {}
    for name, value in params.items():
        if name in allowed_functions:
            funcs[name] = _spec_value(value)
        elif name in E.PARAMETER_NAMES:
            consts[name] = _rat(value) if not isinstance(value, str) else Fraction(value)
        else:
            raise ValueError(f"unexpected parameter {name!r}; allowed: {list(allowed_functions) + list(E.PARAMETER_NAMES)}")
    if consts:
        from solv.symtrig import bind_parameters

        funcs = {k: bind_parameters(v, consts) for k, v in funcs.items()}
    return funcs, consts


def _with_domains(chart: SurfaceChart, spec: FamilySpec) -> SurfaceChart:
    if spec.s_domain is None and spec.t_domain is None:
        return chart
    return SurfaceChart(
        chart.X,
        spec.s_domain or chart.s_domain,
        spec.t_domain or chart.t_domain,
        chart.label,
        chart.normal,
        chart.clearing,
        chart.bindings,
    )


def chart_from_spec(spec: FamilySpec | Mapping) -> SurfaceChart:
    """Build the chart named by a family spec."""
    if not isinstance(spec, FamilySpec):
        spec = FamilySpec.from_dict(spec)
    tag = spec.family
    if tag in CATALOGUE:
        values = {}
        for k, v in spec.params.items():
            values[k] = Fraction(v) if isinstance(v, str) else v
        return _with_domains(classified_surface(tag, **values), spec)
    if tag in ("cyclic_P", "cyclic_R"):
        funcs, _ = _split_params(spec.params, ("a", "b", "r"))
        build = cyclic_chart if tag == "cyclic_P" else zplane_cyclic_chart
        return _with_domains(build(**funcs, label=tag), spec)
    if tag in _LINE_KINDS:
        funcs, _ = _split_params(spec.params, ("a", "b"))
        if tag != "equidistant_line" and "b" in funcs:
            raise ValueError(f"{tag} takes only the function a")
        return _with_domains(foliated_chart(_LINE_KINDS[tag], **funcs), spec)
    if tag in _LEAF_FOLIATIONS:
        extra = set(spec.params) - {"s"}
        if extra:
            raise ValueError(f"{tag} takes only the leaf parameter s")
        s = float(_rat(spec.params.get("s", 0)))
        from solv.sol3_core import leaf_chart

        return _with_domains(leaf_chart(_LEAF_FOLIATIONS[tag], s), spec)
    if tag == "chart":
        missing = {"x", "y", "z"} - set(spec.params)
        extra = set(spec.params) - {"x", "y", "z"}
        if missing or extra:
            raise ValueError("a raw chart needs exactly the parameters x, y, z")
        X = tuple(_spec_value(spec.params[k]) for k in ("x", "y", "z"))
        return _with_domains(SurfaceChart(X, label="chart"), spec)
    raise ValueError(f"unknown family {tag!r}; known: {list(FAMILY_TAGS) + sorted(CATALOGUE)}")


def check_domain(chart: SurfaceChart, samples: int = 5) -> None:
    """Spot-check that the chart evaluates to finite points on its domain.

    Raises DomainError if a component is undefined somewhere on a sample grid
    (for example when b + r sin t is not positive). Charts with unbound
    function symbols are skipped.
    """
    free = set()
    for c in chart.X:
        free |= {name for name, _ in E.function_symbols(c)}
        free |= E.parameters(c)
    if free - set(chart.bindings):
        return
    env = chart.env()
    (slo, shi), (tlo, thi) = chart.s_domain, chart.t_domain
    for i in range(samples):
        s = slo + (shi - slo) * (i + 0.5) / samples
        for j in range(samples):
            t = tlo + (thi - tlo) * (j + 0.5) / samples
            try:
                values = [E.evaluate(c, s, t, env) for c in chart.X]
            except (ArithmeticError, ValueError) as exc:
                raise DomainError(f"chart undefined at s={s:.6g}, t={t:.6g}: {exc}") from None
            if not all(math.isfinite(v) for v in values):
                raise DomainError(f"chart not finite at s={s:.6g}, t={t:.6g}")
