"""First and second fundamental forms of charts in Sol3, symbolic and numeric.

All vector quantities are frame components on E1, E2, E3. Since the frame is
orthonormal, inner products are plain dot products of the components, and the
covariant derivative only needs the constant connection table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from solv.errors import SingularityError
from solv.sol3_core import CONNECTION_TABLE
from solv.symtrig import canon as C
from solv.symtrig import expr as E
from solv.symtrig.forms import FourierForm, QuasiPolyForm, fourier_from_poly, quasipoly_from_poly

DEGENERACY_TOL = 1e-12
NORMAL_MODES = ("preset", "cross")

Triple = tuple  # three frame components


def _tree(value) -> E.SymExpr:
    if isinstance(value, float):
        return E.const(Fraction(str(value)))
    return E.as_expr(value)


@dataclass(frozen=True)
class SurfaceChart:
    """A map (s, t) -> (x, y, z) given by three expressions."""

    X: tuple
    s_domain: tuple = (-1.0, 1.0)
    t_domain: tuple = (0.0, 2 * math.pi)
    label: str = ""
    normal: tuple | None = None
    clearing: E.SymExpr | None = None
    bindings: Mapping = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        comps = tuple(_tree(c) for c in self.X)
        if len(comps) != 3:
            raise ValueError("a chart needs exactly three components")
        object.__setattr__(self, "X", comps)
        if self.normal is not None:
            nrm = tuple(_tree(c) for c in self.normal)
            if len(nrm) != 3:
                raise ValueError("a preset normal needs three frame components")
            object.__setattr__(self, "normal", nrm)
        if self.clearing is not None:
            object.__setattr__(self, "clearing", _tree(self.clearing))
        for lo, hi in (self.s_domain, self.t_domain):
            if not lo < hi:
                raise ValueError(f"empty domain interval ({lo}, {hi})")
        object.__setattr__(self, "s_domain", tuple(float(v) for v in self.s_domain))
        object.__setattr__(self, "t_domain", tuple(float(v) for v in self.t_domain))
        object.__setattr__(self, "bindings", dict(self.bindings))

    def with_bindings(self, **values) -> SurfaceChart:
        merged = {**self.bindings, **values}
        return SurfaceChart(self.X, self.s_domain, self.t_domain, self.label, self.normal, self.clearing, merged)

    def with_normal(self, normal) -> SurfaceChart:
        return SurfaceChart(self.X, self.s_domain, self.t_domain, self.label, normal, self.clearing, self.bindings)

    def point(self, s: float, t: float, bindings=None) -> tuple[float, float, float]:
        env = E.as_bindings({**self.bindings, **dict(bindings or {})})
        return tuple(E.evaluate(c, s, t, env) for c in self.X)

    def env(self, bindings=None) -> E.Bindings:
        if isinstance(bindings, E.Bindings):
            return bindings
        return E.as_bindings({**self.bindings, **dict(bindings or {})})

    def text(self) -> str:
        return "(" + ", ".join(E.to_text(c) for c in self.X) + ")"


# -- symbolic pipeline --------------------------------------------------------------


def _red(p: C.Poly) -> C.Poly:
    return C.reduce(p)


def _dot(u: Triple, v: Triple) -> C.Poly:
    return _red(C.psum(C.pmul(a, b) for a, b in zip(u, v)))


def _cross(u: Triple, v: Triple) -> Triple:
    return (
        _red(C.pmul(u[1], v[2]) - C.pmul(u[2], v[1])),
        _red(C.pmul(u[2], v[0]) - C.pmul(u[0], v[2])),
        _red(C.pmul(u[0], v[1]) - C.pmul(u[1], v[0])),
    )


@lru_cache(maxsize=256)
def _poly_partials(chart: SurfaceChart) -> tuple[Triple, Triple]:
    x, y, z = (C.reduce(C.from_tree(c)) for c in chart.X)
    ez = C.make_exp(z)
    emz = C.make_exp(C.pscale(z, -1))
    out = []
    for var in ("s", "t"):
        out.append(
            (
                _red(C.pmul(ez, C.pdiff(x, var))),
                _red(C.pmul(emz, C.pdiff(y, var))),
                _red(C.pdiff(z, var)),
            )
        )
    return out[0], out[1]


def _poly_covariant(V: Triple, W: Triple, var: str) -> Triple:
    comps = [list([C.pdiff(V[k], var)]) for k in range(3)]
    for (i, j), gamma in CONNECTION_TABLE.items():
        for k in range(3):
            if gamma[k]:
                comps[k].append(C.pscale(C.pmul(W[i - 1], V[j - 1]), gamma[k]))
    return tuple(_red(C.psum(parts)) for parts in comps)


def _poly_normal(chart: SurfaceChart, mode: str) -> Triple:
    if mode not in NORMAL_MODES:
        raise ValueError(f"normal mode must be one of {NORMAL_MODES}, got {mode!r}")
    if mode == "preset" and chart.normal is not None:
        return tuple(C.reduce(C.from_tree(c)) for c in chart.normal)
    Xs, Xt = _poly_partials(chart)
    return _cross(Xs, Xt)


@dataclass(frozen=True)
class FundamentalData:
    """E, F, G and l, m, n against the (non-unit) normal Ntilde, as frame expressions."""

    E: E.SymExpr
    F: E.SymExpr
    G: E.SymExpr
    l: E.SymExpr
    m: E.SymExpr
    n: E.SymExpr
    Ntilde: tuple
    Xs: tuple
    Xt: tuple
    m_alt: E.SymExpr
    polys: dict = field(compare=False, repr=False, default_factory=dict)

    def m_symmetric(self) -> bool:
        # rational representatives need not be unique, so compare the difference
        return C.reduce(self.polys["m"] - self.polys["m_alt"]).is_zero()


@lru_cache(maxsize=256)
def _poly_fundamental(chart: SurfaceChart, mode: str) -> dict:
    Xs, Xt = _poly_partials(chart)
    N = _poly_normal(chart, mode)
    dss = _poly_covariant(Xs, Xs, "s")
    dst = _poly_covariant(Xt, Xs, "s")  # nabla_{Xs} Xt
    dts = _poly_covariant(Xs, Xt, "t")  # nabla_{Xt} Xs
    dtt = _poly_covariant(Xt, Xt, "t")
    data = {
        "E": _dot(Xs, Xs),
        "F": _dot(Xs, Xt),
        "G": _dot(Xt, Xt),
        "l": _dot(dss, N),
        "m": _dot(dst, N),
        "m_alt": _dot(dts, N),
        "n": _dot(dtt, N),
        "N": N,
        "Xs": Xs,
        "Xt": Xt,
    }
    data["h"] = _red(
        C.psum([C.pmul(data["E"], data["n"]), C.pscale(C.pmul(data["F"], data["m"]), -2), C.pmul(data["G"], data["l"])])
    )
    data["k"] = _red(C.pmul(data["l"], data["n"]) - C.pmul(data["m"], data["m"]))
    return data


def partials(chart: SurfaceChart) -> tuple[Triple, Triple]:
    """Frame components of X_s and X_t."""
    Xs, Xt = _poly_partials(chart)
    return tuple(C.to_tree(c) for c in Xs), tuple(C.to_tree(c) for c in Xt)


def covariant_derivative(V, direction: str, chart: SurfaceChart) -> Triple:
    """nabla_{X_direction} V for a frame field V along the chart."""
    if direction not in ("s", "t"):
        raise ValueError("direction must be 's' or 't'")
    Xs, Xt = _poly_partials(chart)
    W = Xs if direction == "s" else Xt
    Vp = tuple(C.reduce(C.from_tree(E.as_expr(c))) for c in V)
    return tuple(C.to_tree(c) for c in _poly_covariant(Vp, W, direction))


def normal(chart: SurfaceChart, mode: str = "preset") -> Triple:
    return tuple(C.to_tree(c) for c in _poly_normal(chart, mode))


def fundamental_data(chart: SurfaceChart, normal_choice: str = "preset") -> FundamentalData:
    d = _poly_fundamental(chart, normal_choice)
    tree = C.to_tree
    return FundamentalData(
        E=tree(d["E"]),
        F=tree(d["F"]),
        G=tree(d["G"]),
        l=tree(d["l"]),
        m=tree(d["m"]),
        n=tree(d["n"]),
        Ntilde=tuple(tree(c) for c in d["N"]),
        Xs=tuple(tree(c) for c in d["Xs"]),
        Xt=tuple(tree(c) for c in d["Xt"]),
        m_alt=tree(d["m_alt"]),
        polys=d,
    )


def h_numerator_poly(chart: SurfaceChart, normal_choice: str = "preset") -> C.Poly:
    return _poly_fundamental(chart, normal_choice)["h"]


def k_numerator_poly(chart: SurfaceChart, normal_choice: str = "preset") -> C.Poly:
    return _poly_fundamental(chart, normal_choice)["k"]


def h_numerator(chart: SurfaceChart, normal_choice: str = "preset") -> E.SymExpr:
    """E n - 2 F m + G l with the non-unit normal."""
    return C.to_tree(h_numerator_poly(chart, normal_choice))


def k_numerator(chart: SurfaceChart, normal_choice: str = "preset") -> E.SymExpr:
    """l n - m^2 with the non-unit normal."""
    return C.to_tree(k_numerator_poly(chart, normal_choice))


def _clearing(chart: SurfaceChart) -> C.Poly | None:
    return None if chart.clearing is None else C.reduce(C.from_tree(chart.clearing))


def fourier(chart: SurfaceChart, target: str = "H", normal_choice: str = "preset") -> FourierForm:
    p = h_numerator_poly(chart, normal_choice) if target.upper() == "H" else k_numerator_poly(chart, normal_choice)
    return fourier_from_poly(p, _clearing(chart))


def quasipoly(chart: SurfaceChart, target: str = "H", normal_choice: str = "preset") -> QuasiPolyForm:
    p = h_numerator_poly(chart, normal_choice) if target.upper() == "H" else k_numerator_poly(chart, normal_choice)
    return quasipoly_from_poly(p, _clearing(chart))


# -- numeric pipeline ----------------------------------------------------------------


def _numeric_data(chart: SurfaceChart, s: float, t: float, bindings, normal_choice: str) -> tuple:
    d = _poly_fundamental(chart, normal_choice)
    env = chart.env(bindings)
    val = {key: C.evaluate(d[key], s, t, env) for key in ("E", "F", "G", "l", "m", "n")}
    N = [C.evaluate(c, s, t, env) for c in d["N"]]
    det = val["E"] * val["G"] - val["F"] ** 2
    if det <= DEGENERACY_TOL:
        raise SingularityError(f"degenerate metric at s={s}, t={t}: EG-F^2={det:.3e}")
    norm = math.sqrt(sum(c * c for c in N))
    if norm <= DEGENERACY_TOL:
        raise SingularityError(f"vanishing normal at s={s}, t={t}")
    return val, det, norm


def mean_curvature_numeric(chart: SurfaceChart, s: float, t: float, bindings=None, normal_choice: str = "cross") -> float:
    v, det, norm = _numeric_data(chart, s, t, bindings, normal_choice)
    return (v["E"] * v["n"] - 2 * v["F"] * v["m"] + v["G"] * v["l"]) / (2 * det * norm)


def gauss_curvature_numeric(chart: SurfaceChart, s: float, t: float, bindings=None, normal_choice: str = "cross") -> float:
    """The extrinsic ratio (ln - m^2)/(EG - F^2) with the unit normal."""
    v, det, norm = _numeric_data(chart, s, t, bindings, normal_choice)
    return (v["l"] * v["n"] - v["m"] ** 2) / (det * norm * norm)


def curvatures_numeric(chart: SurfaceChart, s: float, t: float, bindings=None, normal_choice: str = "cross") -> tuple[float, float]:
    v, det, norm = _numeric_data(chart, s, t, bindings, normal_choice)
    H = (v["E"] * v["n"] - 2 * v["F"] * v["m"] + v["G"] * v["l"]) / (2 * det * norm)
    K = (v["l"] * v["n"] - v["m"] ** 2) / (det * norm * norm)
    return H, K
