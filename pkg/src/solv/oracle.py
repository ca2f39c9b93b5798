"""Finite-difference verifier, independent of the frame calculus and the canonical algebra.

Curvatures here are assembled from the coordinate metric alone: Christoffel
symbols come from differencing ``metric_at`` and chart partials come from
differencing numeric chart evaluations. Nothing in this module reads the
connection table or the symbolic fundamental forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from solv.errors import DomainError, SingularityError
from solv.numdiff import DEFAULT_FD, FDConfig, derivative, mixed_derivative, second_derivative
from solv.sol3_core import CoordVec, Sol3Point, metric_at
from solv.symtrig import canon as C
from solv.symtrig import expr as E
from solv.symtrig import parse

DEGENERACY_TOL = 1e-12
_BASIS = (CoordVec(1.0, 0.0, 0.0), CoordVec(0.0, 1.0, 0.0), CoordVec(0.0, 0.0, 1.0))


def metric_tensor(q) -> np.ndarray:
    """Gram matrix of the coordinate basis, read off metric_at."""
    p = q if isinstance(q, Sol3Point) else Sol3Point.of(q)
    return np.array([[metric_at(p, u, v) for v in _BASIS] for u in _BASIS])


def christoffel_fd(p: Sol3Point, cfg: FDConfig = DEFAULT_FD, metric: Callable = metric_tensor) -> np.ndarray:
    """Gamma[k, i, j] of the coordinate metric via central differences of its components."""
    x0 = p.as_array() if isinstance(p, Sol3Point) else np.asarray(p, dtype=float)
    dg = np.empty((3, 3, 3))  # dg[l, i, j] = d_l g_ij
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = 1.0
        dg[axis] = derivative(lambda h: metric(x0 + h * e), 0.0, cfg)
    ginv = np.linalg.inv(metric(x0))
    lowered = np.empty((3, 3, 3))  # Gamma_{l i j} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    for l in range(3):
        for i in range(3):
            for j in range(3):
                lowered[l, i, j] = 0.5 * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
    return np.einsum("kl,lij->kij", ginv, lowered)


def frame_field(q: np.ndarray) -> np.ndarray:
    """Rows are E1, E2, E3 in coordinates, built from the metric's diagonal."""
    g = metric_tensor(q)
    return np.diag(1.0 / np.sqrt(np.diag(g)))


def frame_connection_fd(p: Sol3Point, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """table[i, j] = frame components of nabla_{E_i} E_j, derived numerically."""
    x0 = p.as_array()
    gamma = christoffel_fd(p, cfg)
    F = frame_field(x0)
    Finv = np.linalg.inv(F.T)  # coordinates -> frame components
    table = np.empty((3, 3, 3))
    for i in range(3):
        Ei = F[i]
        for j in range(3):
            dEj = derivative(lambda h: frame_field(x0 + h * Ei)[j], 0.0, cfg)
            cov = dEj + np.einsum("kab,a,b->k", gamma, Ei, F[j])
            table[i, j] = Finv @ cov
    return table


# -- chart curvatures ------------------------------------------------------------------


def _chart_fn(chart, bindings) -> Callable[[float, float], np.ndarray]:
    env = chart.env(bindings)
    comps = chart.X

    def f(s: float, t: float) -> np.ndarray:
        return np.array([E.evaluate(c, s, t, env) for c in comps])

    return f


@dataclass(frozen=True)
class OracleCurvatures:
    H: float
    K_paper: float
    E: float
    F: float
    G: float


def curvatures_fd(chart, s: float, t: float, bindings=None, cfg: FDConfig = DEFAULT_FD) -> OracleCurvatures:
    """H and the extrinsic ratio (ln - m^2)/(EG - F^2) from finite differences.

    The unit normal is g^{-1}(X_s x X_t) sqrt(det g), normalized; this is the
    orientation of the frame cross product.
    """
    f = _chart_fn(chart, bindings)
    X = f(s, t)
    Xs = derivative(lambda h: f(s + h, t), 0.0, cfg)
    Xt = derivative(lambda h: f(s, t + h), 0.0, cfg)
    Xss = second_derivative(lambda h: f(s + h, t), 0.0, cfg)
    Xtt = second_derivative(lambda h: f(s, t + h), 0.0, cfg)
    Xst = mixed_derivative(lambda a, b: f(s + a, t + b), 0.0, 0.0, cfg)
    g = metric_tensor(X)
    gamma = christoffel_fd(Sol3Point.of(X), cfg)
    E_, F_, G_ = Xs @ g @ Xs, Xs @ g @ Xt, Xt @ g @ Xt
    det = E_ * G_ - F_ * F_
    if det <= DEGENERACY_TOL:
        raise SingularityError(f"degenerate metric at s={s}, t={t}: EG-F^2={det:.3e}")
    N = np.linalg.solve(g, np.cross(Xs, Xt)) * math.sqrt(np.linalg.det(g))
    norm = math.sqrt(N @ g @ N)
    if norm <= DEGENERACY_TOL:
        raise SingularityError(f"vanishing normal at s={s}, t={t}")
    N = N / norm

    def second(a, u, v):
        return (a + np.einsum("kij,i,j->k", gamma, u, v)) @ g @ N

    l_ = second(Xss, Xs, Xs)
    m_ = second(Xst, Xs, Xt)
    n_ = second(Xtt, Xt, Xt)
    H = (E_ * n_ - 2 * F_ * m_ + G_ * l_) / (2 * det)
    K = (l_ * n_ - m_ * m_) / det
    return OracleCurvatures(float(H), float(K), float(E_), float(F_), float(G_))


def euclidean_metric_tensor(q) -> np.ndarray:
    return np.eye(3)


def intrinsic_gauss_fd(
    chart,
    s: float,
    t: float,
    bindings=None,
    cfg: FDConfig = DEFAULT_FD,
    metric: Callable = metric_tensor,
    outer_factor: float = 10.0,
) -> float:
    """Gauss curvature of the induced metric from E, F, G alone (Brioschi formula).

    E, F, G are computed at nearby points with step h; their derivatives use
    an outer step ``outer_factor * h``. Pass ``metric=euclidean_metric_tensor``
    to work in flat space.
    """
    f = _chart_fn(chart, bindings)

    def efg(u: float, v: float) -> np.ndarray:
        Xs = derivative(lambda h: f(u + h, v), 0.0, cfg)
        Xt = derivative(lambda h: f(u, v + h), 0.0, cfg)
        g = metric(f(u, v))
        return np.array([Xs @ g @ Xs, Xs @ g @ Xt, Xt @ g @ Xt])

    outer = FDConfig(h=min(cfg.h * outer_factor, 9e-3), extrapolation=cfg.extrapolation)
    E_, F_, G_ = efg(s, t)
    d_s = derivative(lambda h: efg(s + h, t), 0.0, outer)
    d_t = derivative(lambda h: efg(s, t + h), 0.0, outer)
    d_ss = second_derivative(lambda h: efg(s + h, t), 0.0, outer)
    d_tt = second_derivative(lambda h: efg(s, t + h), 0.0, outer)
    d_st = mixed_derivative(lambda a, b: efg(s + a, t + b), 0.0, 0.0, outer)
    Es, Fs, Gs = d_s
    Et, Ft, Gt = d_t
    Ett, Fst, Gss = d_tt[0], d_st[1], d_ss[2]
    det = E_ * G_ - F_ * F_
    if det <= DEGENERACY_TOL:
        raise SingularityError(f"degenerate metric at s={s}, t={t}")
    A = np.array(
        [
            [-0.5 * Ett + Fst - 0.5 * Gss, 0.5 * Es, Fs - 0.5 * Et],
            [Ft - 0.5 * Gs, E_, F_],
            [0.5 * Gt, F_, G_],
        ]
    )
    B = np.array([[0.0, 0.5 * Et, 0.5 * Gs], [0.5 * Et, E_, F_], [0.5 * Gs, F_, G_]])
    return float((np.linalg.det(A) - np.linalg.det(B)) / det**2)


# -- ODE catalogue -------------------------------------------------------------------


@dataclass(frozen=True)
class OdeCase:
    """A differential equation from the classification, with a claimed closed-form solution."""

    id: str
    residual: E.SymExpr
    symbol: str
    solution: E.SymExpr
    params: Mapping = field(default_factory=dict)
    domain: tuple = (-1.0, 1.0)
    source: str = ""

    def __post_init__(self):
        names = {n for n, _ in E.function_symbols(self.residual)}
        if names - {self.symbol}:
            raise ValueError(f"residual of {self.id} uses symbols {sorted(names)}, expected only {self.symbol}")
        if E.depends_on(self.residual, "t") or E.depends_on(self.solution, "t"):
            raise ValueError(f"{self.id}: residual and solution must not involve t")

    def samples(self, count: int = 25) -> list[float]:
        lo, hi = self.domain
        return [lo + (hi - lo) * (k + 0.5) / count for k in range(count)]


def _case(id, residual, symbol, solution, params, domain, source) -> OdeCase:
    return OdeCase(id, parse(residual), symbol, parse(solution), dict(params), domain, source)


ODE_CATALOGUE: dict[str, OdeCase] = {
    c.id: c
    for c in (
        _case("geodesic_minimal", "a''", "a", "lambda*s + mu", {"lambda": 2, "mu": 3}, (-5.0, 5.0), "geodesic foliation, H = 0"),
        _case(
            "equidistant_leading", "-2*a'^2 + a*a''", "a", "a0/(s + a1)", {"a0": 2, "a1": 3}, (-2.9, 5.0),
            "equidistant foliation, leading t^2 coefficient of H",
        ),
        _case(
            "equidistant_b", "-2*b'^2 + b*b''", "b", "b0/(s + b1)", {"b0": 2, "b1": 3}, (-2.9, 5.0),
            "equidistant foliation with a = 0, H = 0",
        ),
        _case(
            "horocycle_minimal", "a'' - a'^2", "a", "lambda - log(abs(s + mu))", {"lambda": 2, "mu": 3}, (-2.9, 10.0),
            "horocycle foliation, H = 0 (sign of the log corrected)",
        ),
        _case("geodesic_flat", "a'^2", "a", "a0", {"a0": 1}, (-5.0, 5.0), "geodesic foliation, K = 0"),
        _case(
            "equidistant_flat", "b^4 + 3*b'^2 - b*b''", "b", "1/sqrt(-s^2 + lambda*s + mu)", {"lambda": 0, "mu": 1},
            (-0.95, 0.95), "equidistant foliation with a = 0, K = 0",
        ),
        _case(
            "horocycle_flat", "a'' - 2*a'^2 - exp(2*a)", "a", "-1/2*log(abs(-s^2 + lambda*s + mu))", {"lambda": 0, "mu": 1},
            (-0.95, 0.95), "horocycle foliation, K = 0",
        ),
    )
}

NEGATIVE_CONTROLS: dict[str, OdeCase] = {
    "horocycle_linear": _case("horocycle_linear", "a'' - a'^2", "a", "s", {}, (-5.0, 5.0), "a = s gives residual -1"),
    "horocycle_printed_sign": _case(
        "horocycle_printed_sign", "a'' - a'^2", "a", "lambda + log(abs(s + mu))", {"lambda": 2, "mu": 3}, (-2.9, 10.0),
        "log with a plus sign gives -2/(s + mu)^2",
    ),
}


@dataclass(frozen=True)
class OdeResult:
    id: str
    symbolic: E.SymExpr
    symbolic_zero: bool
    max_numeric: float


def symbolic_residual(case: OdeCase, params: Mapping | None = None) -> C.Poly:
    """Exact residual after substitution, with parameters bound and |.| resolved on the domain."""
    values = {**case.params, **dict(params or {})}
    table = {k: C.const(v) for k, v in values.items()}

    def bind(atom):
        if atom.kind == "param" and atom.name in table:
            return table[atom.name]
        return None

    sol = C.substitute_atoms(C.from_tree(case.solution), bind)
    res = C.substitute_function(C.from_tree(case.residual), case.symbol, sol)
    res = C.substitute_atoms(res, bind)
    mid = sum(case.domain) / 2
    return C.resolve_abs(res, mid, 0.0, E.as_bindings(values))


def ode_residual(case: OdeCase, samples: Sequence[float] | None = None, params: Mapping | None = None) -> OdeResult:
    """Symbolic residual and the largest numeric |residual| over ``samples``."""
    values = {**case.params, **dict(params or {})}
    samples = case.samples() if samples is None else list(samples)
    lo, hi = case.domain
    for s in samples:
        if not lo < s < hi:
            raise DomainError(f"sample s={s} outside the domain ({lo}, {hi}) of {case.id}")
    sym = symbolic_residual(case, values)
    env = E.as_bindings({**values, case.symbol: case.solution})
    worst = max((abs(E.evaluate(case.residual, s, 0.0, env)) for s in samples), default=0.0)
    return OdeResult(case.id, C.to_tree(sym), sym.is_zero(), worst)
