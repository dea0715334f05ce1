import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from cubeforms.forms import DiffForm, enumerate_sigma

settings.register_profile(
    "cubeforms",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("cubeforms")


def form_strategy(n: int, k: int, max_exp: int = 2, max_terms: int = 3):
    """Small polynomial k-forms with exact rational coefficients."""
    sigmas = enumerate_sigma(k, n)
    term = st.tuples(
        st.sampled_from(sigmas),
        st.tuples(*([st.integers(0, max_exp)] * n)),
        st.fractions(min_value=-3, max_value=3, max_denominator=3),
    )

    def build(terms):
        f = DiffForm.zero(n, k)
        for sigma, exps, c in terms:
            f = f + DiffForm.monomial_form(n, sigma, exps, c)
        return f

    return st.lists(term, min_size=0, max_size=max_terms).map(build)


def nk_pairs(max_n: int = 3):
    return [(n, k) for n in range(1, max_n + 1) for k in range(n + 1)]


@pytest.fixture
def rng():
    return random.Random(20240817)
