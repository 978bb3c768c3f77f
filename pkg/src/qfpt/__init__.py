"""Quantum first-passage times for tight-binding chains with a doorway bond."""
from .fptcore import FptSolution, assemble, check_conditions, find_time_domain, mean_fpt
from .laplace_exact import RationalLaplace, invert_rational, solve_exact, solve_fpt_laplace, trigsum_laplace
from .model import InitialState, Partition, TightBindingChain, build_hamiltonian, spectral_decompose, validate_doorway
from .propagator import TrigSum, evolve_amplitude, return_kernel_trigsum, survival_trigsum
from .volterra import TimeGrid, classical_two_site, solve_volterra

__all__ = [
    "FptSolution", "InitialState", "Partition", "RationalLaplace", "TightBindingChain", "TimeGrid", "TrigSum",
    "assemble", "build_hamiltonian", "check_conditions", "classical_two_site", "evolve_amplitude",
    "find_time_domain", "invert_rational", "mean_fpt", "return_kernel_trigsum", "solve_exact",
    "solve_fpt_laplace", "solve_volterra", "spectral_decompose", "survival_trigsum", "trigsum_laplace",
    "validate_doorway",
]
