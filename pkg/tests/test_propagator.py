import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from qfpt.errors import UnsupportedFiniteOp
from qfpt.model import InitialState, Partition, TightBindingChain, build_hamiltonian, spectral_decompose
from qfpt.propagator import (
    TrigSum,
    evolve_amplitude,
    occupation_trigsum,
    return_kernel_trigsum,
    survival_trigsum,
)

GRID = np.array([0.1, 0.5, 1.0, 2.0])


def _expm_occupation(H, sites, source, t):
    U = expm(-1j * H * t)
    return sum(abs(U[m - 1, source - 1]) ** 2 for m in sites)


def test_two_site_amplitudes():
    d = spectral_decompose(build_hamiltonian(TightBindingChain(2)))
    t = np.linspace(0, 3, 13)
    np.testing.assert_allclose(np.abs(evolve_amplitude(d, 1, 1, t)) ** 2, np.cos(t) ** 2, atol=1e-14)
    np.testing.assert_allclose(np.abs(evolve_amplitude(d, 2, 1, t)) ** 2, np.sin(t) ** 2, atol=1e-14)


def test_identity_at_time_zero():
    d = spectral_decompose(build_hamiltonian(TightBindingChain(5, couplings=[1, 2, 0.5, 1.5])))
    for nu in range(1, 6):
        assert evolve_amplitude(d, nu, nu, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_amplitude_matches_matrix_exponential():
    H = build_hamiltonian(TightBindingChain(4, [0.3, -0.2, 0.0, 0.1], [1.0, 0.7, 1.3]))
    d = spectral_decompose(H)
    for t in (0.3, 1.7, 4.2):
        U = expm(-1j * H * t)
        for m in range(1, 5):
            assert evolve_amplitude(d, 2, m, t) == pytest.approx(U[m - 1, 1], abs=1e-12)


def test_two_site_survival_is_cos_squared():
    f = survival_trigsum(TightBindingChain(2), Partition(1), InitialState(1))
    assert f.constant == pytest.approx(0.5, abs=1e-14)
    assert len(f.cosine_terms) == 1
    amp, w = f.cosine_terms[0]
    assert amp == pytest.approx(0.5, abs=1e-14)
    assert w == pytest.approx(2.0, abs=1e-14)
    assert f.sine_terms == ()


def test_three_site_survival_formula():
    f = survival_trigsum(TightBindingChain(3), Partition(2), InitialState(1))
    want = (3 - np.cos(np.sqrt(2) * GRID)) / 2 * np.cos(GRID / np.sqrt(2)) ** 2
    np.testing.assert_allclose(f(GRID), want, atol=1e-13)


def test_four_site_survival_starts_at_one():
    f = survival_trigsum(TightBindingChain(4), Partition(2), InitialState(1))
    assert f(0.0) == pytest.approx(1.0, abs=1e-12)
    assert f.constant + sum(a for a, _ in f.cosine_terms) == pytest.approx(1.0, abs=1e-10)


def test_two_site_kernel_is_sin_squared():
    k = return_kernel_trigsum(TightBindingChain(2), Partition(1))
    t = np.linspace(0, 5, 21)
    np.testing.assert_allclose(k(t), np.sin(t) ** 2, atol=1e-14)


def test_three_site_kernel_formula():
    k = return_kernel_trigsum(TightBindingChain(3), Partition(2))
    tau = np.linspace(0, 6, 25)
    want = (3 + np.cos(np.sqrt(2) * tau)) / 2 * np.sin(tau / np.sqrt(2)) ** 2
    np.testing.assert_allclose(k(tau), want, atol=1e-13)


@pytest.mark.parametrize("n, b", [(2, 1), (3, 2), (4, 2), (6, 3)])
def test_kernel_vanishes_at_zero(n, b):
    assert abs(return_kernel_trigsum(TightBindingChain(n), Partition(b))(0.0)) <= 1e-10


def test_infinite_chain_rejected():
    with pytest.raises(UnsupportedFiniteOp):
        survival_trigsum(TightBindingChain.infinite(), Partition(0), InitialState(0))


def test_start_outside_omega_rejected():
    with pytest.raises(ValueError):
        survival_trigsum(TightBindingChain(4), Partition(2), InitialState(3))


def test_trigsum_merges_and_drops():
    f = TrigSum.from_terms(0.1, [(0.2, 1.0), (0.3, 1.0 + 1e-11), (1e-14, 2.0), (0.4, 0.0)], [(0.5, 3.0)])
    assert f.constant == pytest.approx(0.5)
    assert len(f.cosine_terms) == 1 and f.cosine_terms[0][0] == pytest.approx(0.5)
    assert f.sine_terms == ((0.5, 3.0),)


def test_trigsum_calculus():
    f = TrigSum.from_terms(0.3, [(0.7, 1.3)], [(-0.2, 2.1)])
    t = np.linspace(0, 2, 2001)
    d = f.derivative()
    fd = (f(t + 1e-6) - f(t - 1e-6)) / 2e-6
    np.testing.assert_allclose(d(t), fd, atol=1e-8)
    from scipy.integrate import quad
    assert f.integral(0.2, 1.9) == pytest.approx(quad(f, 0.2, 1.9)[0], abs=1e-12)
    assert f.first_moment(0.0, 1.5) == pytest.approx(quad(lambda x: x * f(x), 0, 1.5)[0], abs=1e-12)


chain_cases = st.integers(2, 7).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.floats(-1, 1), min_size=n, max_size=n),
    st.lists(st.floats(0.3, 2.0), min_size=n - 1, max_size=n - 1),
    st.integers(1, n - 1),
    st.data(),
))


@given(chain_cases)
def test_probabilities_match_matrix_exponential(case):
    n, eps, gam, b, data = case
    nu = data.draw(st.integers(1, b))
    chain = TightBindingChain(n, eps, gam)
    H = build_hamiltonian(chain)
    omega = list(range(1, b + 1))
    surv = survival_trigsum(chain, Partition(b), InitialState(nu))
    kern = return_kernel_trigsum(chain, Partition(b))
    rng = np.random.default_rng(n * 100 + b)
    for t in rng.uniform(0, 20, 100):
        assert surv(t) == pytest.approx(_expm_occupation(H, omega, nu, t), abs=1e-9)
        assert kern(t) == pytest.approx(_expm_occupation(H, omega, b + 1, t), abs=1e-9)


@given(chain_cases)
def test_unitarity_and_complementarity(case):
    n, eps, gam, b, data = case
    nu = data.draw(st.integers(1, b))
    chain = TightBindingChain(n, eps, gam)
    d = spectral_decompose(build_hamiltonian(chain))
    t = np.linspace(0, 15, 61)
    total = sum(np.abs(evolve_amplitude(d, nu, m, t)) ** 2 for m in range(1, n + 1))
    np.testing.assert_allclose(total, 1.0, atol=1e-10)
    inside = survival_trigsum(chain, Partition(b), InitialState(nu))
    outside = occupation_trigsum(d, range(b + 1, n + 1), nu)
    np.testing.assert_allclose((inside + outside)(t), 1.0, atol=1e-10)
    assert np.all(inside(t) >= -1e-9) and np.all(inside(t) <= 1 + 1e-9)


def test_kernel_depends_only_on_time_difference():
    chain = TightBindingChain(4)
    H = build_hamiltonian(chain)
    k = return_kernel_trigsum(chain, Partition(2))
    for t_prime, t in [(0.0, 1.3), (0.7, 2.0), (2.5, 3.8)]:
        # place the particle on the doorway site at t', evolve to t
        U = expm(-1j * H * t) @ expm(1j * H * t_prime)
        direct = abs(U[0, 2]) ** 2 + abs(U[1, 2]) ** 2
        assert k(t - t_prime) == pytest.approx(direct, abs=1e-12)
