"""Unrestricted quantum probabilities of finite chains as exact trigonometric sums."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import UnsupportedFiniteOp
from .model import (
    InitialState,
    Partition,
    SpectralDecomposition,
    TightBindingChain,
    build_hamiltonian,
    check_start,
    spectral_decompose,
    validate_doorway,
)

FREQ_TOL = 1e-9
AMP_DROP = 1e-12


def _collect(terms: Iterable[tuple[float, float]], tol: float) -> list[tuple[float, float]]:
    # merge (amplitude, frequency) pairs whose frequencies agree within tol
    terms = sorted(((float(a), abs(float(w))) for a, w in terms), key=lambda p: p[1])
    groups: list[list[tuple[float, float]]] = []
    for a, w in terms:
        if groups and w - groups[-1][-1][1] <= tol:
            groups[-1].append((a, w))
        else:
            groups.append([(a, w)])
    out = []
    for g in groups:
        amp = sum(a for a, _ in g)
        freq = float(np.mean([w for _, w in g]))
        out.append((amp, freq))
    return out


@dataclass(frozen=True)
class TrigSum:
    """f(t) = constant + sum_k c_k cos(w_k t) + sum_k s_k sin(w_k t).

    Terms are stored as ``(amplitude, frequency)`` with strictly increasing
    frequencies.  Build instances with :meth:`from_terms` so that repeated
    frequencies are merged and negligible amplitudes dropped.
    """

    constant: float = 0.0
    cosine_terms: tuple[tuple[float, float], ...] = ()
    sine_terms: tuple[tuple[float, float], ...] = ()

    @classmethod
    def from_terms(cls, constant=0.0, cosines=(), sines=(), tol=FREQ_TOL, drop=AMP_DROP) -> "TrigSum":
        constant = float(constant)
        cos_out = []
        for a, w in _collect(cosines, tol):
            if w <= tol:
                constant += a
            elif abs(a) > drop:
                cos_out.append((a, w))
        sin_out = [(a, w) for a, w in _collect(sines, tol) if w > tol and abs(a) > drop]
        if abs(constant) <= drop:
            constant = 0.0
        return cls(constant, tuple(cos_out), tuple(sin_out))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.constant)
        for a, w in self.cosine_terms:
            out = out + a * np.cos(w * t)
        for a, w in self.sine_terms:
            out = out + a * np.sin(w * t)
        return out if out.ndim else float(out)

    def __add__(self, other: "TrigSum") -> "TrigSum":
        return TrigSum.from_terms(
            self.constant + other.constant,
            self.cosine_terms + other.cosine_terms,
            self.sine_terms + other.sine_terms,
        )

    def scaled(self, factor: float) -> "TrigSum":
        return TrigSum.from_terms(
            factor * self.constant,
            [(factor * a, w) for a, w in self.cosine_terms],
            [(factor * a, w) for a, w in self.sine_terms],
        )

    @property
    def frequencies(self) -> list[float]:
        return sorted({w for _, w in self.cosine_terms} | {w for _, w in self.sine_terms})

    @property
    def max_frequency(self) -> float:
        freqs = self.frequencies
        return freqs[-1] if freqs else 0.0

    def derivative(self) -> "TrigSum":
        return TrigSum.from_terms(
            0.0,
            [(w * a, w) for a, w in self.sine_terms],
            [(-w * a, w) for a, w in self.cosine_terms],
        )

    def integral(self, a: float, b: float) -> float:
        """Exact integral of f over [a, b]."""
        total = self.constant * (b - a)
        for c, w in self.cosine_terms:
            total += c * (np.sin(w * b) - np.sin(w * a)) / w
        for s, w in self.sine_terms:
            total -= s * (np.cos(w * b) - np.cos(w * a)) / w
        return float(total)

    def first_moment(self, a: float, b: float) -> float:
        """Exact integral of t*f(t) over [a, b]."""

        def prim(t):
            val = 0.5 * self.constant * t * t
            for c, w in self.cosine_terms:
                val += c * (np.cos(w * t) / w**2 + t * np.sin(w * t) / w)
            for s, w in self.sine_terms:
                val += s * (np.sin(w * t) / w**2 - t * np.cos(w * t) / w)
            return val

        return float(prim(b) - prim(a))


def _decompose(chain: TightBindingChain) -> SpectralDecomposition:
    if chain.is_infinite:
        raise UnsupportedFiniteOp("use qfpt.lattice for the infinite chain")
    return spectral_decompose(build_hamiltonian(chain))


def evolve_amplitude(decomp: SpectralDecomposition, from_site: int, to_site: int, t):
    """<to|exp(-iHt)|from> for 1-based site indices; vectorised over t."""
    U, E = decomp.vectors, decomp.values
    weights = U[to_site - 1, :] * U[from_site - 1, :]
    t = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(t, E))
    return phases @ weights


def occupation_trigsum(decomp: SpectralDecomposition, sites: Iterable[int], source: int) -> TrigSum:
    """sum over m in ``sites`` of |<m|exp(-iHt)|source>|^2 as a cosine sum.

    With real eigenvectors the product of two amplitudes expands as
    sum_jk c_j c_k cos((E_j - E_k) t), so only cosine terms appear.
    """
    U, E = decomp.vectors, decomp.values
    rows = np.asarray(list(sites)) - 1
    c = U[rows, :] * U[source - 1, :]  # (len(sites), n_eig)
    weights = c.T @ c  # w[j, k] = sum_m c_mj c_mk
    n = len(E)
    terms = [(weights[j, k], E[j] - E[k]) for j in range(n) for k in range(n)]
    return TrigSum.from_terms(0.0, terms)


def survival_trigsum(chain: TightBindingChain, partition: Partition, start: InitialState) -> TrigSum:
    """Unrestricted probability of being in omega at t, having started at ``start``."""
    if chain.is_infinite:
        raise UnsupportedFiniteOp("use qfpt.lattice for the infinite chain")
    validate_doorway(chain, partition)
    check_start(chain, partition, start)
    return occupation_trigsum(_decompose(chain), partition.omega(chain), start.start_site)


def return_kernel_trigsum(chain: TightBindingChain, partition: Partition) -> TrigSum:
    """Probability of being in omega a time tau after sitting on the omega-bar doorway site."""
    if chain.is_infinite:
        raise UnsupportedFiniteOp("use qfpt.lattice for the infinite chain")
    validate_doorway(chain, partition)
    return occupation_trigsum(_decompose(chain), partition.omega(chain), partition.doorway[1])
