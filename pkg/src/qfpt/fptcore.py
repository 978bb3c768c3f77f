"""Time domain of definition, the three physical validity conditions, and summaries.

Solutions come either as exact TrigSums (finite chains) or as samples on a
uniform grid (Volterra, lattice, classical).  Violations are reported, never
raised: where the renewal method breaks down is itself worth measuring.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from .errors import Undefined
from .propagator import TrigSum

MONOTONE_TOL = 1e-9
POSITIVITY_TOL = 1e-6
NORMALIZATION_TOL = 1e-6
DEFAULT_SEARCH_MAX = 50.0
CHECK_NODES = 10_000

Curve = Union[TrigSum, np.ndarray]


def _scan_step(pr: TrigSum) -> float:
    w = pr.max_frequency
    return min(0.01, 2 * np.pi / w / 50) if w > 0 else 0.01


def find_time_domain(pr: Curve, search_max: float = DEFAULT_SEARCH_MAX, t: Optional[np.ndarray] = None,
                     zero_tol: Optional[float] = None):
    """First zero T of the restricted probability in (0, search_max], or None.

    TrigSums are scanned for a sign change and refined to 1e-10 with Brent's
    method.  Sampled curves (``t`` required) count as crossing zero only once
    they drop below ``-zero_tol`` (default h^2, above the O(h^2) quadrature
    error of the Volterra P_r); the crossing is then interpolated linearly.
    """
    if isinstance(pr, TrigSum):
        if abs(pr(0.0) - 1) > 1e-9:
            raise ValueError(f"P_r(0) = {pr(0.0)!r}, expected 1")
        step = _scan_step(pr)
        grid = np.arange(0.0, search_max + step, step)
        grid = grid[grid <= search_max]
        vals = pr(grid)
        hits = np.flatnonzero(vals[1:] <= 0)
        if not hits.size:
            return None
        i = hits[0] + 1
        if vals[i] == 0:
            return float(grid[i])
        return float(brentq(pr, grid[i - 1], grid[i], xtol=1e-12, rtol=4 * np.finfo(float).eps))
    if t is None:
        raise ValueError("sampled P_r needs its time nodes")
    pr = np.asarray(pr, dtype=float)
    t = np.asarray(t, dtype=float)
    if abs(pr[0] - 1) > 1e-9:
        raise ValueError(f"P_r(0) = {pr[0]!r}, expected 1")
    keep = t <= search_max
    pr, t = pr[keep], t[keep]
    if zero_tol is None:
        zero_tol = float(np.max(np.diff(t))) ** 2 if t.size > 1 else 0.0
    deep = np.flatnonzero(pr[1:] < -zero_tol)
    if not deep.size:
        return None
    # walk back from the first clearly negative node to the sign change
    i = deep[0] + 1
    while i > 1 and pr[i - 1] <= 0:
        i -= 1
    return float(t[i - 1] + (t[i] - t[i - 1]) * pr[i - 1] / (pr[i - 1] - pr[i]))


@dataclass
class ValidityReport:
    T: Optional[float]
    window_end: float
    normalization: float
    normalization_residual: float
    positivity_violation: float
    monotonicity_violation: float
    pfp_monotone: bool
    tail_mass: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def condition_a(self) -> bool:
        return self.monotonicity_violation <= MONOTONE_TOL

    @property
    def condition_b(self) -> bool:
        return self.positivity_violation >= -POSITIVITY_TOL and self.normalization_residual <= NORMALIZATION_TOL

    @property
    def condition_c(self) -> bool:
        return self.T is not None

    @property
    def ok(self) -> bool:
        return self.condition_a and self.condition_b

    def items(self) -> list[tuple[str, str]]:
        return [
            ("T", "none" if self.T is None else f"{self.T:.6f}"),
            ("window_end", f"{self.window_end:.6g}"),
            ("normalization", f"{self.normalization:.12g}"),
            ("normalization_residual", f"{self.normalization_residual:.3e}"),
            ("positivity_violation", f"{self.positivity_violation:.3e}"),
            ("monotonicity_violation", f"{self.monotonicity_violation:.3e}"),
            ("tail_mass", f"{self.tail_mass:.3e}"),
            ("condition_A", str(self.condition_a).lower()),
            ("condition_B", str(self.condition_b).lower()),
            ("condition_C", str(self.condition_c).lower()),
            ("pfp_monotone", str(self.pfp_monotone).lower()),
        ]


def _trapezoid_to(t: np.ndarray, f: np.ndarray, end: float) -> float:
    keep = t <= end
    tt, ff = t[keep], f[keep]
    total = float(np.sum(0.5 * (ff[1:] + ff[:-1]) * np.diff(tt)))
    if tt[-1] < end and keep.sum() < len(t):
        j = keep.sum()
        f_end = f[j - 1] + (f[j] - f[j - 1]) * (end - t[j - 1]) / (t[j] - t[j - 1])
        total += 0.5 * (f[j - 1] + f_end) * (end - t[j - 1])
    return total


def check_conditions(pr: Curve, pfp: Curve, T: Optional[float], t: Optional[np.ndarray] = None,
                     search_max: float = DEFAULT_SEARCH_MAX) -> ValidityReport:
    """Evaluate conditions (A) monotone P_r, (B) positive normalised P_fp, (C) finite domain on [0, T].

    With T = None the checks run over the whole available window instead and
    the normalisation is judged as mass balance against the remaining P_r.
    """
    notes = []
    exact = isinstance(pr, TrigSum)
    if exact:
        end = T if T is not None else search_max
        nodes = np.linspace(0.0, end, CHECK_NODES)
        pr_v, pfp_v = pr(nodes), pfp(nodes)
        integral = pfp.integral(0.0, end)
        pr_end = pr(end)
    else:
        if t is None:
            raise ValueError("sampled curves need their time nodes")
        t = np.asarray(t, dtype=float)
        end = T if T is not None else float(t[-1])
        keep = t <= end
        nodes, pr_v, pfp_v = t[keep], np.asarray(pr)[keep], np.asarray(pfp)[keep]
        integral = _trapezoid_to(t, np.asarray(pfp, dtype=float), end)
        pr_end = float(np.interp(end, t, pr))

    if T is not None:
        residual = abs(integral - 1.0)
        tail = 0.0
    else:
        residual = abs(integral - (1.0 - pr_end))
        tail = float(pr_end)
        notes.append(f"no zero of P_r found up to t={end:g}; time domain treated as unbounded")

    diffs = np.diff(pr_v)
    monotonicity = float(max(0.0, diffs.max())) if diffs.size else 0.0
    positivity = float(min(0.0, pfp_v.min()))
    d_pfp = np.diff(pfp_v)
    pfp_monotone = bool(np.all(d_pfp >= -MONOTONE_TOL) or np.all(d_pfp <= MONOTONE_TOL))
    if not pfp_monotone:
        notes.append("P_fp is positive but not monotonic on the domain")
    return ValidityReport(T, float(end), float(integral), float(residual), positivity, monotonicity,
                          pfp_monotone, tail, notes)


@dataclass
class FptSolution:
    """P_r and P_fp for one system, with their time domain and validity report."""

    system: str
    pr: Curve
    pfp: Curve
    T: Optional[float]
    report: ValidityReport
    t: Optional[np.ndarray] = None

    @property
    def normalization_residual(self) -> float:
        return self.report.normalization_residual

    @property
    def positivity_violation(self) -> float:
        return self.report.positivity_violation

    @property
    def monotonicity_violation(self) -> float:
        return self.report.monotonicity_violation

    def sample(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(self.pr, TrigSum):
            return self.pr(t), self.pfp(t)
        return np.interp(t, self.t, self.pr), np.interp(t, self.t, self.pfp)


def assemble(system: str, pr: Curve, pfp: Curve, t: Optional[np.ndarray] = None,
             search_max: float = DEFAULT_SEARCH_MAX) -> FptSolution:
    if t is not None:
        search_max = min(search_max, float(np.asarray(t)[-1]))
    T = find_time_domain(pr, search_max, t)
    report = check_conditions(pr, pfp, T, t, search_max)
    return FptSolution(system, pr, pfp, T, report, None if t is None else np.asarray(t, dtype=float))


def mean_fpt(solution: FptSolution, tail_tol: float = 1e-6) -> float:
    """Mean first-passage time over [0, T] (or the sampled window when P_r has no zero)."""
    if isinstance(solution.pfp, TrigSum):
        if solution.T is None:
            raise Undefined("exact solution has no finite time domain")
        return solution.pfp.first_moment(0.0, solution.T)
    t = solution.t
    if solution.T is None:
        tail = float(solution.pr[-1])
        if tail > tail_tol:
            raise Undefined(f"{tail:.3g} of the probability has not passed by t={t[-1]:g}")
        end = float(t[-1])
    else:
        end = solution.T
    return _trapezoid_to(t, t * np.asarray(solution.pfp), end)
