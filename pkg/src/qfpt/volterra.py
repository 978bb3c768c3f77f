"""Direct numerical solution of the renewal (Schroedinger) integral equation.

The equation P_u(t) = P_r(t) + int_0^t K(t - t') P_fp(t') dt' is of the first
kind in P_fp.  Differentiating once and using K(0) = 0 gives the
well-conditioned second-kind form

    -P_u'(t) = P_fp(t) - int_0^t K'(t - t') P_fp(t') dt',

which is discretised with the trapezoidal product rule.  The first-kind
equation is re-checked on every node afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CallableRange, GridTooCoarse
from .propagator import TrigSum

RANGE_TOL = 1e-6
START_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    t_max: float
    h: float

    def __post_init__(self):
        if not (self.t_max > 0 and self.h > 0):
            raise ValueError("t_max and h must be positive")
        n = round(self.t_max / self.h)
        if n < 1 or abs(n * self.h - self.t_max) > 1e-12 * max(1.0, self.t_max):
            raise ValueError(f"t_max={self.t_max} is not an integer multiple of h={self.h}")

    @property
    def n_steps(self) -> int:
        return round(self.t_max / self.h)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.h


def _derivative(f, h: float) -> Callable:
    if isinstance(f, TrigSum):
        return f.derivative()
    d = h / 10.0

    def df(t):
        t = np.asarray(t, dtype=float)
        central = (_sample(f, t + d) - _sample(f, np.maximum(t - d, 0.0))) / (2 * d)
        # second-order one-sided stencil where t - d would leave the domain
        forward = (-3 * _sample(f, t) + 4 * _sample(f, t + d) - _sample(f, t + 2 * d)) / (2 * d)
        return np.where(t < d, forward, central)

    return df


def _sample(f, t: np.ndarray) -> np.ndarray:
    return np.asarray(f(t), dtype=float) * np.ones_like(t)


def _check_range(name: str, values: np.ndarray) -> None:
    lo, hi = values.min(), values.max()
    if lo < -RANGE_TOL or hi > 1 + RANGE_TOL:
        raise CallableRange(f"{name} leaves [0, 1]: range [{lo:.3g}, {hi:.3g}]")


def first_kind_residual(pu: np.ndarray, kernel: np.ndarray, pr: np.ndarray, pfp: np.ndarray, h: float) -> np.ndarray:
    """Nodewise P_u - P_r - (K * P_fp) with a trapezoidal convolution."""
    n = len(pu)
    res = np.empty(n)
    for i in range(n):
        w = kernel[i::-1] * pfp[: i + 1]
        conv = h * (w.sum() - 0.5 * (w[0] + w[-1])) if i else 0.0
        res[i] = pu[i] - pr[i] - conv
    return res


def solve_volterra(pu, kernel, grid: TimeGrid, dpu: Optional[Callable] = None, dkernel: Optional[Callable] = None,
                   check_residual: bool = True):
    """Solve for (P_r, P_fp) on ``grid`` given the unrestricted survival and return kernel.

    ``pu`` and ``kernel`` are callables of time (TrigSums work and supply exact
    derivatives).  Other callables are differentiated by central differences
    with step h/10 unless ``dpu``/``dkernel`` are given.
    """
    h = grid.h
    t = grid.nodes
    pu_t = _sample(pu, t)
    k_t = _sample(kernel, t)
    _check_range("P_u", pu_t)
    _check_range("K", k_t)
    if abs(pu_t[0] - 1.0) > START_TOL:
        raise ValueError(f"P_u(0) = {pu_t[0]!r}, expected 1")
    if abs(k_t[0]) > START_TOL:
        raise ValueError(f"K(0) = {k_t[0]!r}, expected 0")

    g = -_sample(dpu or _derivative(pu, h), t)
    kd = _sample(dkernel or _derivative(kernel, h), t)

    n = len(t)
    f = np.empty(n)
    f[0] = g[0]
    diag = 1.0 - 0.5 * h * kd[0]
    for i in range(1, n):
        acc = 0.5 * kd[i] * f[0]
        if i > 1:
            acc += kd[i - 1:0:-1] @ f[1:i]
        f[i] = (g[i] + h * acc) / diag

    pr = np.empty(n)
    pr[0] = 1.0
    pr[1:] = 1.0 - np.cumsum(0.5 * h * (f[1:] + f[:-1]))

    if check_residual:
        res = first_kind_residual(pu_t, k_t, pr, f, h)
        worst = np.max(np.abs(res))
        if worst > 10 * h * h:
            raise GridTooCoarse(f"first-kind residual {worst:.3g} exceeds 10 h^2 = {10 * h * h:.3g}")
    return pr, f


def classical_two_site(p: float, grid: TimeGrid):
    """Classical two-site hopping at rate ``p``: expect P_r = exp(-pt), P_fp = p exp(-pt)."""
    if not p > 0:
        raise ValueError("hopping rate must be positive")
    # master equation for two sites: occupation relaxes to 1/2 at rate 2p
    pu = lambda t: 0.5 * (1.0 + np.exp(-2 * p * np.asarray(t)))
    kernel = lambda t: 0.5 * (1.0 - np.exp(-2 * p * np.asarray(t)))
    dpu = lambda t: -p * np.exp(-2 * p * np.asarray(t))
    dkernel = lambda t: p * np.exp(-2 * p * np.asarray(t))
    return solve_volterra(pu, kernel, grid, dpu=dpu, dkernel=dkernel)
