import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from conftest import REFERENCE_SYSTEMS, derivative_mismatch
from qfpt.errors import Degenerate, RepeatedPole, UnstablePole
from qfpt.laplace_exact import RationalLaplace, invert_rational, solve_exact, solve_fpt_laplace, trigsum_laplace
from qfpt.model import InitialState, Partition, TightBindingChain
from qfpt.propagator import TrigSum, return_kernel_trigsum, survival_trigsum

SQ2 = np.sqrt(2.0)


def _same_function(F: RationalLaplace, num, den, points=(0.7, 1.9, 3.3, 10.0)):
    for s in points:
        assert F(s) == pytest.approx(np.polyval(num, s) / np.polyval(den, s), rel=1e-12)


def test_cos_squared_transform():
    F = trigsum_laplace(TrigSum.from_terms(0.5, [(0.5, 2.0)]))
    # 1/(2s) + s/(2(s^2+4)) = (s^2 + 2) / (s (s^2 + 4))
    _same_function(F, [1, 0, 2], [1, 0, 4, 0])
    assert F.denominator.size == 4


def test_constant_transform():
    F = trigsum_laplace(TrigSum(1.0))
    np.testing.assert_allclose(F.numerator, [1.0])
    np.testing.assert_allclose(F.denominator, [1.0, 0.0])


def test_sin_squared_transform():
    F = trigsum_laplace(TrigSum.from_terms(0.5, [(-0.5, 2.0)]))
    _same_function(F, [2], [1, 0, 4, 0])


trig_terms = st.lists(
    st.tuples(st.integers(1, 40), st.floats(-1, 1), st.floats(-1, 1)),
    min_size=1, max_size=6, unique_by=lambda x: x[0],
)


def _trigsum_from(terms, constant):
    # frequencies on a 0.1 lattice stay well separated
    return TrigSum.from_terms(constant, [(c, k / 10) for k, c, _ in terms], [(s, k / 10) for k, _, s in terms])


@given(trig_terms, st.floats(-1, 1))
def test_transform_matches_quadrature(terms, constant):
    f = _trigsum_from(terms, constant)
    F = trigsum_laplace(f)
    for s in (0.8, 2.5):
        val = quad(lambda t: np.exp(-s * t) * f(t), 0, 60, limit=400)[0]
        assert F(s) == pytest.approx(val, abs=1e-9)


@given(trig_terms, st.floats(-1, 1))
def test_round_trip(terms, constant):
    f = _trigsum_from(terms, constant)
    g = invert_rational(trigsum_laplace(f))
    assert g.constant == pytest.approx(f.constant, abs=1e-8)
    for mine, theirs in [(f.cosine_terms, g.cosine_terms), (f.sine_terms, g.sine_terms)]:
        want = {round(w, 6): a for a, w in mine}
        got = {round(w, 6): a for a, w in theirs}
        for w in set(want) | set(got):
            assert got.get(w, 0.0) == pytest.approx(want.get(w, 0.0), abs=1e-8)


def test_two_site_restricted_transform():
    chain, part, start = REFERENCE_SYSTEMS[2]
    lr, lfp = solve_fpt_laplace(trigsum_laplace(survival_trigsum(chain, part, start)),
                                trigsum_laplace(return_kernel_trigsum(chain, part)))
    np.testing.assert_allclose(lr.numerator, [1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(lr.denominator, [1.0, 0.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(lfp.numerator, [2.0], atol=1e-12)
    np.testing.assert_allclose(lfp.denominator, [1.0, 0.0, 2.0], atol=1e-12)


def test_no_return_kernel():
    start = trigsum_laplace(TrigSum.from_terms(0.5, [(0.5, 2.0)]))
    _, lfp = solve_fpt_laplace(start, RationalLaplace(np.zeros(1), np.ones(1)))
    for s in (0.5, 1.5, 4.0):
        assert lfp(s) == pytest.approx(1 - s * start(s), rel=1e-12)


def test_degenerate_kernel():
    with pytest.raises(Degenerate):
        solve_fpt_laplace(RationalLaplace([1.0], [1.0, 0.0]), RationalLaplace([1.0], [1.0, 0.0]))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fpt_identity_holds_as_rational_functions(n):
    chain, part, start = REFERENCE_SYSTEMS[n]
    lr, lfp = solve_fpt_laplace(trigsum_laplace(survival_trigsum(chain, part, start)),
                                trigsum_laplace(return_kernel_trigsum(chain, part)))
    for s in (0.3, 1.1, 2.0, 7.5, 1 + 2j):
        assert lfp(s) == pytest.approx(1 - s * lr(s), rel=1e-10, abs=1e-12)


def test_three_site_restricted_poles():
    chain, part, start = REFERENCE_SYSTEMS[3]
    lr, _ = solve_fpt_laplace(trigsum_laplace(survival_trigsum(chain, part, start)),
                              trigsum_laplace(return_kernel_trigsum(chain, part)))
    poles = lr.poles()
    assert len(poles) == 4
    np.testing.assert_allclose(np.sort(np.abs(poles.imag)), [0.915, 0.915, 2.676, 2.676], atol=2e-3)
    assert np.max(np.abs(poles.real)) < 1e-9


def test_invert_cos_root_two():
    f = invert_rational(RationalLaplace([1.0, 0.0], [1.0, 0.0, 2.0]))
    assert f.constant == 0.0 and f.sine_terms == ()
    (a, w), = f.cosine_terms
    assert a == pytest.approx(1.0, abs=1e-14) and w == pytest.approx(SQ2, abs=1e-14)


def test_invert_root_two_sine():
    f = invert_rational(RationalLaplace([SQ2 * SQ2], [1.0, 0.0, 2.0]))
    assert f.cosine_terms == ()
    (a, w), = f.sine_terms
    assert a == pytest.approx(SQ2, abs=1e-14) and w == pytest.approx(SQ2, abs=1e-14)


def test_invert_one_over_s():
    f = invert_rational(RationalLaplace([1.0], [1.0, 0.0]))
    assert f == TrigSum(1.0)


def test_repeated_pole():
    with pytest.raises(RepeatedPole):
        invert_rational(RationalLaplace([1.0], np.polymul([1, 0, 1], [1, 0, 1])))


def test_unstable_pole():
    with pytest.raises(UnstablePole):
        invert_rational(RationalLaplace([1.0], [1.0, 1.0]))


def test_improper_rejected():
    with pytest.raises(ValueError):
        invert_rational(RationalLaplace([1.0, 0.0], [1.0, 1.0]))


def test_two_site_exact(exact_solutions):
    pr, pfp = exact_solutions[2]
    (a, w), = pr.cosine_terms
    assert a == pytest.approx(1.0, abs=1e-9) and w == pytest.approx(SQ2, abs=1e-9)
    (b, v), = pfp.sine_terms
    assert b == pytest.approx(SQ2, abs=1e-9) and v == pytest.approx(SQ2, abs=1e-9)


def test_three_site_exact(exact_solutions):
    pr, _ = exact_solutions[3]
    amps = [a for a, _ in pr.cosine_terms]
    freqs = [w for _, w in pr.cosine_terms]
    np.testing.assert_allclose(amps, [1.132, -0.132], atol=2e-3)
    np.testing.assert_allclose(freqs, [0.915, 2.676], atol=2e-3)


def test_four_site_exact(exact_solutions):
    _, pfp = exact_solutions[4]
    np.testing.assert_allclose([a for a, _ in pfp.sine_terms], [0.719, 0.165, -0.253], atol=2e-3)
    np.testing.assert_allclose([w for _, w in pfp.sine_terms], [0.754, 1.261, 2.973], atol=2e-3)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_structure_of_exact_solutions(exact_solutions, n):
    pr, pfp = exact_solutions[n]
    assert pr.constant == 0.0  # no forced constant term
    assert pr(0.0) == pytest.approx(1.0, abs=1e-9)
    assert pfp(0.0) == pytest.approx(0.0, abs=1e-12)
    assert derivative_mismatch(pr, pfp) <= 1e-9


stable_chains = st.sampled_from([(n, b) for n in range(2, 8) for b in range(1, n)
                                 if (n, b) not in {(4, 1), (6, 1), (6, 2), (6, 3), (7, 4)}])


@given(stable_chains, st.data())
def test_uniform_chains_solve_with_consistent_structure(nb, data):
    n, b = nb
    nu = data.draw(st.integers(1, b))
    try:
        pr, pfp = solve_exact(TightBindingChain(n), Partition(b), InitialState(nu))
    except UnstablePole:
        return  # checked separately: such poles sit far from the axis
    assert pr(0.0) == pytest.approx(1.0, abs=1e-8)
    assert abs(pfp(0.0)) <= 1e-8
    assert derivative_mismatch(pr, pfp) <= 1e-7


@pytest.mark.parametrize("n, b", [(4, 1), (6, 2), (7, 4)])
def test_growing_modes_are_structural(n, b):
    chain, part = TightBindingChain(n), Partition(b)
    lr, _ = solve_fpt_laplace(trigsum_laplace(survival_trigsum(chain, part, InitialState(1))),
                              trigsum_laplace(return_kernel_trigsum(chain, part)))
    assert np.max(np.abs(lr.poles().real)) > 1e-2
    with pytest.raises(UnstablePole):
        solve_exact(chain, part, InitialState(1))
