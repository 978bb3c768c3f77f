import hypothesis
import numpy as np
import pytest

from qfpt import InitialState, Partition, TightBindingChain, solve_exact

hypothesis.settings.register_profile("default", deadline=None, max_examples=40)
hypothesis.settings.load_profile("default")

REFERENCE_SYSTEMS = {
    2: (TightBindingChain(2), Partition(1), InitialState(1)),
    3: (TightBindingChain(3), Partition(2), InitialState(1)),
    4: (TightBindingChain(4), Partition(2), InitialState(1)),
}


@pytest.fixture(scope="session")
def exact_solutions():
    return {n: solve_exact(*args) for n, args in REFERENCE_SYSTEMS.items()}


def derivative_mismatch(pr, pfp):
    """Largest gap between P_fp's sine amplitudes and w * (cosine amplitudes of P_r)."""
    want = {round(w, 9): w * a for a, w in pr.cosine_terms}
    got = {round(w, 9): a for a, w in pfp.sine_terms}
    keys = set(want) | set(got)
    return max(abs(want.get(k, 0.0) - got.get(k, 0.0)) for k in keys) if keys else 0.0
