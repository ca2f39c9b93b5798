"""The ambient space: points, metric, left-invariant frame, connection, isometries, leaves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from solv.errors import DomainError
from solv.numdiff import DEFAULT_FD, FDConfig, jacobian

LEAF_TOL = 1e-12


def _finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise DomainError(f"non-finite coordinate {v}")


@dataclass(frozen=True)
class Sol3Point:
    x: float
    y: float
    z: float

    def __post_init__(self):
        _finite(self.x, self.y, self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def of(cls, values) -> Sol3Point:
        x, y, z = (float(v) for v in values)
        return cls(x, y, z)


@dataclass(frozen=True)
class CoordVec:
    dx: float
    dy: float
    dz: float

    def __post_init__(self):
        _finite(self.dx, self.dy, self.dz)

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz])


@dataclass(frozen=True)
class FrameVec:
    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])


def metric_matrix(z: float) -> np.ndarray:
    return np.diag([math.exp(2 * z), math.exp(-2 * z), 1.0])


def metric_at(p: Sol3Point, u: CoordVec, v: CoordVec) -> float:
    """e^{2z} du_x dv_x + e^{-2z} du_y dv_y + du_z dv_z at p."""
    return math.exp(2 * p.z) * u.dx * v.dx + math.exp(-2 * p.z) * u.dy * v.dy + u.dz * v.dz


def group_mul(p: Sol3Point, q: Sol3Point) -> Sol3Point:
    return Sol3Point(p.x + math.exp(-p.z) * q.x, p.y + math.exp(p.z) * q.y, p.z + q.z)


def group_inv(p: Sol3Point) -> Sol3Point:
    return Sol3Point(-math.exp(p.z) * p.x, -math.exp(-p.z) * p.y, -p.z)


def frame_at(p: Sol3Point) -> tuple[CoordVec, CoordVec, CoordVec]:
    return (
        CoordVec(math.exp(-p.z), 0.0, 0.0),
        CoordVec(0.0, math.exp(p.z), 0.0),
        CoordVec(0.0, 0.0, 1.0),
    )


def coord_to_frame(p: Sol3Point, u: CoordVec) -> FrameVec:
    return FrameVec(math.exp(p.z) * u.dx, math.exp(-p.z) * u.dy, u.dz)


def frame_to_coord(p: Sol3Point, v: FrameVec) -> CoordVec:
    return CoordVec(math.exp(-p.z) * v.c1, math.exp(p.z) * v.c2, v.c3)


# nabla_{E_i} E_j as frame components, indices 1..3
CONNECTION_TABLE: dict[tuple[int, int], tuple[int, int, int]] = {
    (1, 1): (0, 0, -1),
    (1, 2): (0, 0, 0),
    (1, 3): (1, 0, 0),
    (2, 1): (0, 0, 0),
    (2, 2): (0, 0, 1),
    (2, 3): (0, -1, 0),
    (3, 1): (0, 0, 0),
    (3, 2): (0, 0, 0),
    (3, 3): (0, 0, 0),
}


def connection(i: int, j: int) -> FrameVec:
    """Frame components of nabla_{E_i} E_j."""
    try:
        return FrameVec(*(float(c) for c in CONNECTION_TABLE[(i, j)]))
    except KeyError:
        raise ValueError(f"frame indices must be in 1..3, got ({i}, {j})") from None


def lie_bracket_table(i: int, j: int) -> FrameVec:
    """[E_i, E_j] from the torsion-free identity nabla_{E_i}E_j - nabla_{E_j}E_i."""
    a = connection(i, j).as_array() - connection(j, i).as_array()
    return FrameVec(*a)


TRANSLATIONS = ("T1", "T2", "T3")


def translate(kind: str, c: float, p: Sol3Point) -> Sol3Point:
    if kind == "T1":
        return Sol3Point(p.x + c, p.y, p.z)
    if kind == "T2":
        return Sol3Point(p.x, p.y + c, p.z)
    if kind == "T3":
        return Sol3Point(math.exp(-c) * p.x, math.exp(c) * p.y, p.z + c)
    raise ValueError(f"unknown translation {kind!r}; expected one of {TRANSLATIONS}")


def pullback_defect(
    f: Callable[[np.ndarray], np.ndarray],
    p: np.ndarray,
    source_metric: Callable[[np.ndarray], np.ndarray],
    target_metric: Callable[[np.ndarray], np.ndarray],
    cfg: FDConfig = DEFAULT_FD,
) -> float:
    """Largest entry of J^T g_target(f(p)) J - g_source(p), J the numeric differential of f.

    Entry (i, j) is divided by sqrt(g_ii g_jj) of the source metric, so the
    measure does not grow with the exponential scale of the metric.
    """
    p = np.asarray(p, dtype=float)
    J = jacobian(f, p, cfg)
    pulled = J.T @ target_metric(f(p)) @ J
    g = source_metric(p)
    scale = np.sqrt(np.outer(np.abs(np.diag(g)), np.abs(np.diag(g))))
    return float(np.max(np.abs(pulled - g) / scale))


def ambient_metric(q: np.ndarray) -> np.ndarray:
    return metric_matrix(float(q[2]))


# -- leaves and their model isometries -------------------------------------------------


def _check_leaf(value: float, s: float, what: str) -> None:
    if abs(value - s) > LEAF_TOL:
        raise DomainError(f"point is not on the leaf {what}={s} (got {what}={value})")


def phi_s(s: float, p: Sol3Point) -> tuple[float, float]:
    """P_s -> upper half-plane, (s, y, z) -> (y, e^z)."""
    _check_leaf(p.x, s, "x")
    return (p.y, math.exp(p.z))


def phi_s_inv(s: float, w: tuple[float, float]) -> Sol3Point:
    u, v = w
    if v <= 0:
        raise DomainError(f"half-plane point must have positive second coordinate, got {v}")
    return Sol3Point(s, u, math.log(v))


def psi_s(s: float, p: Sol3Point) -> tuple[float, float]:
    """R_s -> Euclidean plane, (x, y, s) -> (e^s x, e^{-s} y)."""
    _check_leaf(p.z, s, "z")
    return (math.exp(s) * p.x, math.exp(-s) * p.y)


def psi_s_inv(s: float, w: tuple[float, float]) -> Sol3Point:
    return Sol3Point(math.exp(-s) * w[0], math.exp(s) * w[1], s)


def hyperbolic_metric(w: np.ndarray) -> np.ndarray:
    return np.eye(2) / (w[1] ** 2)


def euclidean_metric(w: np.ndarray) -> np.ndarray:
    return np.eye(2)


def induced_leaf_metric(foliation: str, s: float) -> Callable[[np.ndarray], np.ndarray]:
    """Metric induced on a leaf in its own two coordinates."""
    if foliation == "F1":
        return lambda uv: np.diag([math.exp(-2 * uv[1]), 1.0])
    if foliation == "F2":
        return lambda uv: np.diag([math.exp(2 * uv[1]), 1.0])
    if foliation == "F3":
        return lambda uv: np.diag([math.exp(2 * s), math.exp(-2 * s)])
    raise ValueError(f"unknown foliation {foliation!r}")


FOLIATIONS = ("F1", "F2", "F3")


def leaf_chart(foliation: str, s: float):
    """Chart of P_s (x=s), Q_s (y=s) or R_s (z=s) in the two remaining coordinates."""
    from solv.curvature import SurfaceChart
    from solv.symtrig import expr as E

    c = float(s)
    if foliation == "F1":
        comps = (c, E.S, E.T)
    elif foliation == "F2":
        comps = (E.S, c, E.T)
    elif foliation == "F3":
        comps = (E.S, E.T, c)
    else:
        raise ValueError(f"unknown foliation {foliation!r}; expected one of {FOLIATIONS}")
    return SurfaceChart(comps, s_domain=(-2.0, 2.0), t_domain=(-2.0, 2.0), label=f"leaf {foliation} s={s}")
