"""Infinite 1D tight-binding lattice split between sites 0 and 1.

The unrestricted probabilities are Bessel-function closed forms,
(1 + J0(2t)^2)/2 for the survival in omega from site 0 and (1 - J0(2t)^2)/2
for the return kernel from site 1.  Their Laplace transforms involve the
complete elliptic integral K(m) in the parameter convention, through
L[J0(at)^2](s) = 2/(pi s) K(-4a^2/s^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DomainError, NonConvergent
from .volterra import TimeGrid, solve_volterra

VALIDATED_T_MAX = 4.0


# ---------------------------------------------------------------- special functions

def _bessel_series(n: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = half**n / math.factorial(n)
    out = term.copy()
    q = -half * half
    for k in range(1, 40):
        term = term * q / (k * (n + k))
        out = out + term
    return out


def bessel_j_all(n_max: int, x) -> np.ndarray:
    """J_0..J_{n_max} at each x >= 0; returns shape (n_max + 1,) + x.shape.

    Miller's backward recurrence normalised by J0 + 2 sum_k J_2k = 1 for x >= 1,
    ascending power series below.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("Bessel argument must be non-negative")
    flat = x.ravel()
    out = np.zeros((n_max + 1, flat.size))
    small = flat < 1.0
    if small.any():
        for n in range(n_max + 1):
            out[n, small] = _bessel_series(n, flat[small])
    big = ~small
    if big.any():
        xb = flat[big]
        top = max(n_max, int(xb.max()))
        m = top + 30 + int(math.sqrt(40 * top))
        m += m % 2
        j_next = np.zeros_like(xb)
        j_cur = np.full_like(xb, 1e-300)
        vals = np.zeros((n_max + 1, xb.size))
        norm = np.zeros_like(xb)
        for k in range(m, 0, -1):
            j_prev = (2 * k / xb) * j_cur - j_next
            j_next, j_cur = j_cur, j_prev
            # j_cur now holds (unnormalised) J_{k-1}
            if k - 1 <= n_max:
                vals[k - 1] = j_cur
            if (k - 1) % 2 == 0 and k - 1 > 0:
                norm += 2 * j_cur
            big_vals = np.abs(j_cur) > 1e250
            if big_vals.any():
                scale = np.where(big_vals, 1e-250, 1.0)
                j_cur, j_next, norm, vals = j_cur * scale, j_next * scale, norm * scale, vals * scale
        norm += j_cur
        out[:, big] = vals / norm
    return out.reshape((n_max + 1,) + x.shape)


def bessel_j(n: int, x):
    """Bessel function of the first kind J_n(x) for integer n >= 0, x >= 0."""
    if n < 0:
        raise DomainError("order must be non-negative")
    res = bessel_j_all(n, x)[n]
    return float(res) if np.ndim(res) == 0 else res


def _agm(a, b, iters: int = 64):
    for _ in range(iters):
        a_next = 0.5 * (a + b)
        g = np.sqrt(a * b)
        # keep the geometric mean on the branch closest to the arithmetic one
        g = np.where(np.abs(a_next - g) > np.abs(a_next + g), -g, g)
        if np.all(np.abs(a_next - g) <= 1e-15 * np.abs(a_next)):
            return a_next
        a, b = a_next, g
    return 0.5 * (a + b)


def elliptic_k(m):
    """Complete elliptic integral of the first kind, K(m) = int_0^{pi/2} (1 - m sin^2)^{-1/2}.

    Real m < 1; negative m goes through the imaginary-modulus transformation
    K(m) = K(-m/(1-m)) / sqrt(1-m) so the AGM always runs on [0, 1).
    """
    m = np.asarray(m, dtype=float)
    if np.any(m >= 1):
        raise DomainError("K(m) requires m < 1")
    neg = m < 0
    mm = np.where(neg, -m / (1 - m), m)
    k = np.pi / (2 * _agm(np.ones_like(mm), np.sqrt(1 - mm)))
    k = np.where(neg, k / np.sqrt(1 - m), k)
    return float(k) if k.ndim == 0 else k


def elliptic_k_complex(m):
    """K(m) for complex m off the cut [1, inf), via AGM(1, sqrt(1 - m)) on principal branches."""
    m = np.asarray(m, dtype=complex)
    return np.pi / (2 * _agm(np.ones_like(m), np.sqrt(1 - m)))


# ---------------------------------------------------------------- unrestricted probabilities

def lattice_survival(t):
    j0 = bessel_j(0, 2 * np.asarray(t, dtype=float))
    return 0.5 * (1 + j0 * j0)


def lattice_kernel(tau):
    j0 = bessel_j(0, 2 * np.asarray(tau, dtype=float))
    return 0.5 * (1 - j0 * j0)


def _j0j1(t):
    j = bessel_j_all(1, 2 * np.asarray(t, dtype=float))
    return j[0] * j[1]


def lattice_survival_derivative(t):
    return -2 * _j0j1(t)


def lattice_kernel_derivative(tau):
    return 2 * _j0j1(tau)


# ---------------------------------------------------------------- Laplace domain

def _agm_excess(m):
    """AGM(1, sqrt(1 - m)) - 1 without cancellation when m is small.

    Both means are carried as deviations from 1, so (2/pi) K(m) = 1/(1 + excess)
    keeps full relative accuracy in 1 - (2/pi) K(m) as m -> 0.
    """
    m = np.asarray(m, dtype=complex)
    root = np.sqrt(1 - m)
    da = np.zeros_like(m)
    db = -m / (1 + root)
    for _ in range(64):
        prod = da + db + da * db  # a*b - 1
        g = np.sqrt(1 + prod)
        da_next = 0.5 * (da + db)
        # geometric-mean branch closest to the arithmetic mean, as in _agm
        flip = np.abs(1 + da_next - g) > np.abs(1 + da_next + g)
        db_next = np.where(flip, -g - 1, prod / (g + 1))
        if np.all(np.abs(da_next - db_next) <= 1e-15 * np.abs(da_next)):
            return da_next
        da, db = da_next, db_next
    return 0.5 * (da + db)


def _excess_of_s(s, continued: bool):
    s = np.asarray(s, dtype=complex)
    if not continued and np.any(s.real <= 0):
        raise DomainError("lattice transforms are defined for Re(s) > 0")
    return _agm_excess(-16 / (s * s))


def laplace_pr(s, continued: bool = False):
    """L[P_r](s) = (4/s) K(-16/s^2) / (pi + 2 K(-16/s^2)).

    Evaluated as 2 / (s (2 + e)) with e = pi / (2K) - 1.  ``continued=True``
    allows the analytic continuation into Re(s) <= 0 (off the cut on the
    imaginary segment [-4i, 4i]) for contour inverters.
    """
    e = _excess_of_s(s, continued)
    val = 2 / (np.asarray(s, dtype=complex) * (2 + e))
    return _real_if_real_input(val, s)


def laplace_pfp(s, continued: bool = False):
    """L[P_fp](s) = (pi - 2 K(-16/s^2)) / (pi + 2 K(-16/s^2)), evaluated as e / (2 + e)."""
    e = _excess_of_s(s, continued)
    val = e / (2 + e)
    return _real_if_real_input(val, s)


def laplace_j0_squared(s, a: float):
    """2/(pi s) K(-4 a^2 / s^2), the transform of J0(a t)^2 for real s > 0."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise DomainError("requires s > 0")
    val = 2 / (np.pi * s) * elliptic_k(-4 * a * a / (s * s))
    return float(val) if np.ndim(val) == 0 else val


def _real_if_real_input(val, s):
    if np.isrealobj(s):
        val = np.real(val)
    return val.item() if np.ndim(val) == 0 else val


# ---------------------------------------------------------------- numerical inversion

def _euler_sum(F: Callable, t: np.ndarray, n_terms: int, a: float = 25.0, m: int = 11) -> np.ndarray:
    # Abate-Whitt Fourier series on Re(s) = a/(2t) with Euler acceleration; rows follow t
    k = np.arange(n_terms + m + 1)
    s = (a + 2j * np.pi * k) / (2 * t[:, None])
    fs = np.real(np.asarray(F(s), dtype=complex))
    terms = (-1.0) ** k * fs
    terms[:, 0] *= 0.5
    partial = np.cumsum(terms, axis=1)[:, n_terms:]
    binom = np.array([math.comb(m, j) for j in range(m + 1)]) / 2.0**m
    return np.exp(a / 2) / t * (partial @ binom)


def _talbot(F: Callable, t: np.ndarray, M: int, r_min: float = 0.0) -> np.ndarray:
    # fixed Talbot contour (Abate-Valko)
    r = np.maximum(2 * M / (5 * t), r_min)[:, None]
    theta = np.pi * np.arange(1, M) / M
    cot = np.cos(theta) / np.sin(theta)
    s = r * theta * (cot + 1j)
    sigma = theta + (theta * cot - 1) * cot
    tt = t[:, None]
    fk = np.asarray(F(s), dtype=complex)
    f0 = np.real(np.asarray(F(r + 0j), dtype=complex))
    total = 0.5 * f0 * np.exp(r * tt) + np.sum(np.real(np.exp(tt * s) * fk * (1 + 1j * sigma)), axis=1, keepdims=True)
    return (r / M * total)[:, 0]


def invert_laplace_numeric(F: Callable, t, method: str = "euler", nodes: int | None = None,
                           tol: float = 1e-6, r_min: float = 0.0):
    """f(t) from its transform F, checked against a second run with more nodes.

    ``t`` may be a scalar or an array of positive times.  ``euler`` (default)
    sums 32 and then 64 series terms and samples F only on a vertical line in
    Re(s) > 0.  ``talbot`` runs 24 and then 32 contour nodes; it needs F
    continued into the left half plane and a contour enclosing every
    singularity, and ``r_min`` bounds the contour from below.  Talbot cannot
    double to 64 nodes in double precision because exp(r t) amplifies roundoff.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(tt > 0):
        raise DomainError("numerical inversion needs t > 0")
    if nodes is None:
        nodes = 32 if method == "euler" else 24
    if nodes < 16:
        raise ValueError("use at least 16 nodes")
    if method == "euler":
        lo, hi = _euler_sum(F, tt, nodes), _euler_sum(F, tt, 2 * nodes)
    elif method == "talbot":
        lo, hi = _talbot(F, tt, nodes, r_min), _talbot(F, tt, 4 * nodes // 3, r_min)
    else:
        raise ValueError(f"unknown inversion method {method!r}")
    gap = np.abs(hi - lo)
    if not np.all(gap <= tol):
        worst = int(np.nanargmax(np.where(np.isfinite(gap), gap, np.inf)))
        raise NonConvergent(f"{method} inversion at t={tt[worst]:g}: {lo[worst]!r} vs {hi[worst]!r}")
    return float(hi[0]) if np.ndim(t) == 0 else hi


# ---------------------------------------------------------------- small-time series

def _k_series_coefficients(order: int) -> list[Fraction]:
    # (2/pi) K(m) = sum_n [(1/2)_n / n!]^2 m^n
    out, c = [], Fraction(1)
    for n in range(order + 1):
        out.append(c * c)
        c = c * Fraction(2 * n + 1, 2 * n + 2)
    return out


def small_time_series(order: int):
    """Taylor coefficients (ascending powers of t) of P_r and P_fp near t = 0.

    ``order`` is the number of terms kept in the large-s expansion of
    K(-16/s^2) in powers of 1/s^2; P_fp then has degree 2*order - 1 and P_r
    degree 2*order.  The algebra is done in exact rationals.
    """
    if not 1 <= order <= 20:
        raise ValueError("order must be in 1..20")
    g = [c * (-16) ** n for n, c in enumerate(_k_series_coefficients(order))]  # (2/pi) K(-16u)
    num = [-x for x in g]
    num[0] += 1  # 1 - g
    den = list(g)
    den[0] += 1  # 1 + g
    # power-series division in u = 1/s^2
    q = []
    for n in range(order + 1):
        acc = num[n] - sum(q[k] * den[n - k] for k in range(n))
        q.append(acc / den[0])
    pfp = [Fraction(0)] * (2 * order)
    pr = [Fraction(0)] * (2 * order + 1)
    pr[0] = Fraction(1)
    for n in range(1, order + 1):
        # u^n = s^{-2n} -> t^{2n-1}/(2n-1)!  and  s^{-2n-1} -> t^{2n}/(2n)!
        pfp[2 * n - 1] = q[n] / math.factorial(2 * n - 1)
        pr[2 * n] = -q[n] / math.factorial(2 * n)
    return np.array([float(c) for c in pr]), np.array([float(c) for c in pfp])


# ---------------------------------------------------------------- assembled solutions

@dataclass(frozen=True)
class LatticeSolution:
    grid: TimeGrid
    pr: np.ndarray
    pfp: np.ndarray
    method: str  # "SERIES" | "NUMERIC_INVERSION" | "VOLTERRA"

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes


def _check_window(grid: TimeGrid) -> None:
    if grid.t_max > VALIDATED_T_MAX + 1e-12:
        raise DomainError(f"lattice solutions are validated only up to t = {VALIDATED_T_MAX}")


def solve_lattice_series(grid: TimeGrid, order: int = 12) -> LatticeSolution:
    pr_c, pfp_c = small_time_series(order)
    t = grid.nodes
    return LatticeSolution(grid, np.polyval(pr_c[::-1], t), np.polyval(pfp_c[::-1], t), "SERIES")


def solve_lattice_inversion(grid: TimeGrid, method: str = "euler", nodes: int | None = None) -> LatticeSolution:
    _check_window(grid)
    t = grid.nodes
    pr = np.empty_like(t)
    pfp = np.empty_like(t)
    pr[0], pfp[0] = 1.0, 0.0  # initial values; inversion is only defined for t > 0
    kw = {"continued": method == "talbot"}
    r_min = 4.0 if method == "talbot" else 0.0  # contour must clear the cut up to |Im s| = 4
    pr[1:] = invert_laplace_numeric(lambda s: laplace_pr(s, **kw), t[1:], method, nodes, r_min=r_min)
    pfp[1:] = invert_laplace_numeric(lambda s: laplace_pfp(s, **kw), t[1:], method, nodes, r_min=r_min)
    return LatticeSolution(grid, pr, pfp, "NUMERIC_INVERSION")


def solve_lattice_volterra(grid: TimeGrid) -> LatticeSolution:
    _check_window(grid)
    pr, pfp = solve_volterra(
        lattice_survival,
        lattice_kernel,
        grid,
        dpu=lattice_survival_derivative,
        dkernel=lattice_kernel_derivative,
    )
    return LatticeSolution(grid, pr, pfp, "VOLTERRA")
