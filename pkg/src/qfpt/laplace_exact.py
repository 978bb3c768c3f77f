"""Exact pipeline: trigonometric sums -> rational Laplace transforms -> renewal algebra -> back.

Polynomials are numpy coefficient arrays, highest power first (``np.polyval``
order).  Everything is double precision; common factors are cancelled by
matching roots rather than by a symbolic GCD.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Degenerate, RepeatedPole, UnstablePole
from .model import InitialState, Partition, TightBindingChain, check_start, validate_doorway
from .propagator import FREQ_TOL, TrigSum, return_kernel_trigsum, survival_trigsum

ROOT_MATCH_TOL = 1e-8
POLE_RE_TOL = 1e-7
REPEAT_TOL = 1e-6
ZERO_POLE_TOL = 1e-9
TRIM_REL = 1e-11


def _trim(p: np.ndarray, rel: float = TRIM_REL) -> np.ndarray:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    scale = np.max(np.abs(p)) if p.size else 0.0
    if scale == 0.0:
        return np.zeros(1)
    k = 0
    while k < p.size - 1 and abs(p[k]) <= rel * scale:
        k += 1
    return p[k:]


def _clean_tail(p: np.ndarray, rel: float = TRIM_REL) -> np.ndarray:
    # roundoff in low-order coefficients splits a multiple root at s=0 into a
    # sqrt(eps)-sized cluster, so zero them before matching roots
    p = np.array(p, dtype=float)
    scale = np.max(np.abs(p))
    k = p.size - 1
    while k > 0 and abs(p[k]) <= rel * scale:
        p[k] = 0.0
        k -= 1
    return p


def _polish(p: np.ndarray, r: complex, iters: int = 8) -> complex:
    dp = np.polyder(p)
    best, best_res = r, abs(np.polyval(p, r))
    for _ in range(iters):
        d = np.polyval(dp, r)
        if d == 0:
            break
        r = r - np.polyval(p, r) / d
        res = abs(np.polyval(p, r))
        if res < best_res:
            best, best_res = r, res
        else:
            break
    return best


def poly_roots(p: np.ndarray) -> np.ndarray:
    """Companion-matrix roots refined by Newton polishing."""
    p = _trim(p)
    if p.size < 2:
        return np.zeros(0, dtype=complex)
    return np.array([_polish(p, r) for r in np.roots(p)], dtype=complex)


def _factor(r: complex) -> np.ndarray:
    # real factor for a real root, quadratic for a conjugate pair
    if abs(r.imag) <= ROOT_MATCH_TOL * max(1.0, abs(r)):
        return np.array([1.0, -r.real])
    return np.array([1.0, -2.0 * r.real, abs(r) ** 2])


def _deflate(p: np.ndarray, f: np.ndarray) -> np.ndarray:
    q, _ = np.polydiv(p, f)
    return q


@dataclass(frozen=True)
class RationalLaplace:
    """F(s) = numerator(s) / denominator(s) with a monic denominator."""

    numerator: np.ndarray
    denominator: np.ndarray

    def __post_init__(self):
        num = _trim(self.numerator)
        den = _trim(self.denominator)
        if not np.any(den):
            raise Degenerate("denominator is identically zero")
        lead = den[0]
        object.__setattr__(self, "numerator", num / lead)
        object.__setattr__(self, "denominator", den / lead)

    def __call__(self, s):
        return np.polyval(self.numerator, s) / np.polyval(self.denominator, s)

    @property
    def is_proper(self) -> bool:
        return not np.any(self.numerator) or self.numerator.size < self.denominator.size

    def poles(self) -> np.ndarray:
        return poly_roots(self.denominator)

    def reduced(self, tol: float = ROOT_MATCH_TOL) -> "RationalLaplace":
        """Cancel roots shared by numerator and denominator (within ``tol``)."""
        num, den = _clean_tail(self.numerator), _clean_tail(self.denominator)
        if not np.any(num):
            return RationalLaplace(np.zeros(1), np.ones(1))
        rn = list(poly_roots(num))
        for r in poly_roots(den):
            if r.imag < -ROOT_MATCH_TOL * max(1.0, abs(r)):
                continue  # handled with its conjugate
            hit = next((k for k, q in enumerate(rn) if abs(q - r) <= tol * max(1.0, abs(r))), None)
            if hit is None:
                continue
            f = _factor(r)
            rn.pop(hit)
            if f.size == 3:
                conj = next((k for k, q in enumerate(rn) if abs(q - np.conj(r)) <= tol * max(1.0, abs(r))), None)
                if conj is None:
                    continue
                rn.pop(conj)
            num = _deflate(num, f)
            den = _deflate(den, f)
        return RationalLaplace(num, den)


def _poly_from_factors(factors) -> np.ndarray:
    p = np.ones(1)
    for f in factors:
        p = np.polymul(p, f)
    return p


def trigsum_laplace(f: TrigSum) -> RationalLaplace:
    """Laplace transform of a TrigSum over the common denominator s^[c0!=0] * prod(s^2 + w^2)."""
    cos = dict((w, a) for a, w in f.cosine_terms)
    sin = dict((w, a) for a, w in f.sine_terms)
    freqs = f.frequencies
    factors = [np.array([1.0, 0.0, w * w]) for w in freqs]
    pieces = []  # (numerator, index of own factor)
    for k, w in enumerate(freqs):
        pieces.append((np.array([cos.get(w, 0.0), sin.get(w, 0.0) * w]), k))
    if f.constant != 0.0:
        factors.append(np.array([1.0, 0.0]))
        pieces.append((np.array([f.constant]), len(factors) - 1))
    if not pieces:
        return RationalLaplace(np.zeros(1), np.ones(1))
    den = _poly_from_factors(factors)
    num = np.zeros(1)
    for p, own in pieces:
        others = _poly_from_factors(fac for i, fac in enumerate(factors) if i != own)
        num = np.polyadd(num, np.polymul(p, others))
    return RationalLaplace(num, den)


def _common_denominator(a: RationalLaplace, b: RationalLaplace):
    """Rewrite a and b over one denominator (their lcm, found by root matching)."""
    da, db = a.denominator, b.denominator
    if da.size == db.size and np.allclose(da, db, rtol=1e-12, atol=1e-12):
        return a.numerator, b.numerator, da
    ra = list(poly_roots(da))
    extra_for_a = []
    for r in poly_roots(db):
        hit = next((k for k, q in enumerate(ra) if abs(q - r) <= ROOT_MATCH_TOL * max(1.0, abs(r))), None)
        if hit is None:
            extra_for_a.append(r)
        else:
            ra.pop(hit)
    # ra now holds roots of da missing from db
    qa = np.real(np.poly(extra_for_a)) if extra_for_a else np.ones(1)
    qb = np.real(np.poly(ra)) if ra else np.ones(1)
    den = np.polymul(da, qa)
    return np.polymul(a.numerator, qa), np.polymul(b.numerator, qb), den


def solve_fpt_laplace(l_start: RationalLaplace, l_kernel: RationalLaplace):
    """Transforms of the restricted probability and the first-passage density.

    From P_u = P_r + K * P_fp (convolution) and P_fp = -dP_r/dt with P_r(0)=1:
        L[P_r]  = (L[P_u] - L[K]) / (1 - s L[K])
        L[P_fp] = (1 - s L[P_u]) / (1 - s L[K])
    Both are returned reduced.
    """
    ns, nk, d = _common_denominator(l_start, l_kernel)
    s = np.array([1.0, 0.0])
    common = np.polysub(d, np.polymul(s, nk))  # d * (1 - s L[K])
    if not np.any(_trim(common, rel=1e-14)):
        raise Degenerate("1 - s L[K] vanishes identically")
    lr = RationalLaplace(np.polysub(ns, nk), common).reduced()
    lfp = RationalLaplace(np.polysub(d, np.polymul(s, ns)), common).reduced()
    return lr, lfp


def invert_rational(F: RationalLaplace) -> TrigSum:
    """Partial-fraction inversion for simple poles on the imaginary axis."""
    if not F.is_proper:
        raise ValueError("transform is not a proper rational function")
    if not np.any(F.numerator):
        return TrigSum()
    poles = F.poles()
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            if abs(poles[i] - poles[j]) <= REPEAT_TOL * max(1.0, abs(poles[i])):
                raise RepeatedPole(f"pole {poles[i]:.6g} is repeated")
    dden = np.polyder(F.denominator)
    constant = 0.0
    cosines, sines = [], []
    for p in poles:
        if abs(p) <= ZERO_POLE_TOL:
            constant += (np.polyval(F.numerator, 0.0) / np.polyval(dden, 0.0)).real
            continue
        if abs(p.real) > POLE_RE_TOL:
            # genuine for some partitions: the renewal solution then has a growing mode
            raise UnstablePole(f"pole {p:.6g} is off the imaginary axis; the Volterra pipeline still "
                               "covers [0, T] for such systems")
        if p.imag < 0:
            continue
        res = np.polyval(F.numerator, p) / np.polyval(dden, p)
        # r e^{i w t} + conj(r) e^{-i w t}
        cosines.append((2.0 * res.real, p.imag))
        sines.append((-2.0 * res.imag, p.imag))
    if sum(1 for p in poles if abs(p) > ZERO_POLE_TOL and p.imag < 0) != len(cosines):
        raise UnstablePole("poles do not come in conjugate pairs")
    return TrigSum.from_terms(constant, cosines, sines, tol=FREQ_TOL)


def solve_exact(chain: TightBindingChain, partition: Partition, start: InitialState):
    """Closed-form (P_r, P_fp) for a finite doorway chain."""
    validate_doorway(chain, partition)
    check_start(chain, partition, start)
    l_start = trigsum_laplace(survival_trigsum(chain, partition, start))
    l_kernel = trigsum_laplace(return_kernel_trigsum(chain, partition))
    lr, lfp = solve_fpt_laplace(l_start, l_kernel)
    return invert_rational(lr), invert_rational(lfp)
