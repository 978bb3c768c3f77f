"""Tight-binding chains, the omega/omega-bar partition and the doorway check.

Finite chains are indexed 1..n.  The infinite lattice uses all integers with
omega = {..., -1, 0} and omega-bar = {1, 2, ...}.  Units have hbar = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import Disconnected, MultiDoorway, UnsupportedFiniteOp

INFINITE = "infinite"


@dataclass(frozen=True)
class TightBindingChain:
    """Nearest-neighbour chain with site energies and real hopping amplitudes.

    ``couplings[k]`` joins site ``k + 1`` to site ``k + 2`` (1-based sites).
    Omitted energies default to 0 and omitted couplings to 1.
    """

    n_sites: int | str
    site_energies: Optional[Sequence[float]] = None
    couplings: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.n_sites == INFINITE:
            if self.site_energies is not None or self.couplings is not None:
                raise ValueError("the infinite lattice only supports the uniform eps=0, gamma=1 case")
            return
        n = self.n_sites
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"n_sites must be a positive integer or {INFINITE!r}, got {n!r}")
        energies = (0.0,) * n if self.site_energies is None else tuple(float(e) for e in self.site_energies)
        couplings = (1.0,) * (n - 1) if self.couplings is None else tuple(float(g) for g in self.couplings)
        if len(energies) != n:
            raise ValueError(f"expected {n} site energies, got {len(energies)}")
        if len(couplings) != n - 1:
            raise ValueError(f"expected {n - 1} couplings, got {len(couplings)}")
        if not all(np.isfinite(energies)) or not all(np.isfinite(couplings)):
            raise ValueError("site energies and couplings must be finite")
        object.__setattr__(self, "n_sites", int(n))
        object.__setattr__(self, "site_energies", energies)
        object.__setattr__(self, "couplings", couplings)

    @property
    def is_infinite(self) -> bool:
        return self.n_sites == INFINITE

    @classmethod
    def infinite(cls) -> "TightBindingChain":
        return cls(INFINITE)


@dataclass(frozen=True)
class Partition:
    """Split of the chain at bond (b, b+1): omega holds sites <= b."""

    boundary_index: int

    @property
    def doorway(self) -> tuple[int, int]:
        return (self.boundary_index, self.boundary_index + 1)

    def omega(self, chain: TightBindingChain) -> list[int]:
        _check_boundary(chain, self)
        return list(range(1, self.boundary_index + 1))

    def omega_bar(self, chain: TightBindingChain) -> list[int]:
        _check_boundary(chain, self)
        return list(range(self.boundary_index + 1, chain.n_sites + 1))


@dataclass(frozen=True)
class InitialState:
    start_site: int


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a real symmetric matrix; column ``j`` of ``vectors`` pairs with ``values[j]``."""

    values: np.ndarray
    vectors: np.ndarray = field(repr=False)


def _check_boundary(chain: TightBindingChain, partition: Partition) -> None:
    b = partition.boundary_index
    if chain.is_infinite:
        if b != 0:
            raise ValueError("the infinite lattice is split between sites 0 and 1 (boundary_index=0)")
        return
    if not 1 <= b <= chain.n_sites - 1:
        raise ValueError(f"boundary {b} must leave at least one site on each side of a {chain.n_sites}-site chain")


def check_start(chain: TightBindingChain, partition: Partition, start: InitialState) -> None:
    _check_boundary(chain, partition)
    nu = start.start_site
    low = -np.inf if chain.is_infinite else 1
    if not low <= nu <= partition.boundary_index:
        raise ValueError(f"start site {nu} is not inside omega")


def build_hamiltonian(chain: TightBindingChain) -> np.ndarray:
    if chain.is_infinite:
        raise UnsupportedFiniteOp("the infinite lattice has no finite Hamiltonian matrix")
    H = np.diag(np.asarray(chain.site_energies, dtype=float))
    g = np.asarray(chain.couplings, dtype=float)
    idx = np.arange(chain.n_sites - 1)
    H[idx, idx + 1] = -g
    H[idx + 1, idx] = -g
    return H


def spectral_decompose(H: np.ndarray) -> SpectralDecomposition:
    """Eigen-decomposition with ascending eigenvalues and a fixed sign per eigenvector.

    Each eigenvector is flipped so that its first component larger than
    1e-12 in magnitude is positive, which makes the output deterministic.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(H, H.T, atol=0.0, rtol=0.0):
        raise ValueError("matrix is not symmetric")
    values, vectors = np.linalg.eigh(H)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        lead = np.flatnonzero(np.abs(col) > 1e-12)
        if lead.size and col[lead[0]] < 0:
            vectors[:, j] = -col
    return SpectralDecomposition(values, vectors)


def crossing_bonds(H: np.ndarray, omega: Sequence[int]) -> list[tuple[int, int]]:
    """Nonzero matrix elements coupling omega to its complement (1-based site pairs)."""
    H = np.asarray(H)
    inside = np.zeros(H.shape[0], dtype=bool)
    inside[np.asarray(omega) - 1] = True
    rows, cols = np.nonzero(H[np.ix_(inside, ~inside)])
    sites_in = np.flatnonzero(inside) + 1
    sites_out = np.flatnonzero(~inside) + 1
    return [(int(sites_in[r]), int(sites_out[c])) for r, c in zip(rows, cols)]


def validate_doorway(chain, partition: Partition) -> None:
    """Raise unless exactly one nonzero bond joins omega to omega-bar.

    ``chain`` may also be a raw symmetric matrix, in which case omega is taken
    to be sites 1..b; this is how graph-shaped inputs fail loudly.
    """
    if isinstance(chain, TightBindingChain):
        _check_boundary(chain, partition)
        if chain.is_infinite:
            return
        H = build_hamiltonian(chain)
    else:
        H = np.asarray(chain, dtype=float)
        if not 1 <= partition.boundary_index <= H.shape[0] - 1:
            raise ValueError(f"boundary {partition.boundary_index} out of range for a {H.shape[0]}-site matrix")
    bonds = crossing_bonds(H, range(1, partition.boundary_index + 1))
    if len(bonds) > 1:
        raise MultiDoorway(f"{len(bonds)} bonds cross the boundary: {bonds}")
    if not bonds:
        raise Disconnected(f"no nonzero coupling crosses the boundary after site {partition.boundary_index}")
