"""Central finite differences with optional Richardson extrapolation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class FDConfig:
    h: float = 1e-4
    scheme: str = "central"
    extrapolation: bool = True

    def __post_init__(self):
        if not 0.0 < self.h < 1e-2:
            raise ValueError(f"finite-difference step must lie in (0, 1e-2), got {self.h}")
        if self.scheme != "central":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


DEFAULT_FD = FDConfig()


def _richardson(fn: Callable[[float], np.ndarray], h: float, order: int, on: bool) -> np.ndarray:
    coarse = fn(h)
    if not on:
        return coarse
    fine = fn(h / 2)
    # both stencils have an h^2 leading error term
    return fine + (fine - coarse) / 3.0 if order == 2 else fine


def derivative(f: Callable[[float], np.ndarray | float], x: float, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """First derivative of a scalar- or vector-valued function of one variable."""

    def stencil(h):
        return (np.asarray(f(x + h), dtype=float) - np.asarray(f(x - h), dtype=float)) / (2 * h)

    return _richardson(stencil, cfg.h, 2, cfg.extrapolation)


def second_derivative(f: Callable[[float], np.ndarray | float], x: float, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    def stencil(h):
        mid = np.asarray(f(x), dtype=float)
        return (np.asarray(f(x + h), dtype=float) - 2 * mid + np.asarray(f(x - h), dtype=float)) / (h * h)

    return _richardson(stencil, cfg.h, 2, cfg.extrapolation)


def mixed_derivative(f: Callable[[float, float], np.ndarray | float], x: float, y: float, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    def stencil(h):
        pp = np.asarray(f(x + h, y + h), dtype=float)
        pm = np.asarray(f(x + h, y - h), dtype=float)
        mp = np.asarray(f(x - h, y + h), dtype=float)
        mm = np.asarray(f(x - h, y - h), dtype=float)
        return (pp - pm - mp + mm) / (4 * h * h)

    return _richardson(stencil, cfg.h, 2, cfg.extrapolation)


def jacobian(f: Callable[[np.ndarray], np.ndarray], x, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Jacobian matrix J[i, j] = d f_i / d x_j."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = 1.0
        cols.append(derivative(lambda u: f(x + u * e), 0.0, cfg))
    return np.stack(cols, axis=-1)
