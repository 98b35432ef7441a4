import os
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from liecontract import catalog
from liecontract.exact import GaussianRational, Poly, Scalar

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=6)
gaussians = st.builds(GaussianRational, small_fracs, small_fracs)
VARS = ("a", "b", "eps")


@st.composite
def polys(draw, vars_=("a", "b"), max_terms=4, max_exp=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = tuple(sorted((v, e) for v in vars_ if (e := draw(st.integers(0, max_exp)))))
        terms[mono] = draw(gaussians)
    p = Poly()
    for mono, c in terms.items():
        t = Poly.const(c)
        for v, e in mono:
            t = t * Poly.var(v, e)
        p = p + t
    return p


@st.composite
def laurent(draw):
    """Polynomial in a, b times eps**k with k in [-2, 2]."""
    p = draw(polys(vars_=("a", "eps"), max_exp=2))
    return Scalar(p) * Scalar.eps(draw(st.integers(-2, 2)))


def random_invertible(rng: random.Random, n: int, entries=(-2, -1, 0, 1, 2)):
    from liecontract import linalg
    while True:
        P = [[Scalar(Fraction(rng.choice(entries))) for _ in range(n)] for _ in range(n)]
        if linalg.det(P):
            return P


def random_three_dim(rng: random.Random):
    """A verified three-dimensional algebra: a list entry in a random basis."""
    name = rng.choice(["C3", "n3", "r2+C", "r3", "r3lambda", "sl2"])
    if name == "r3lambda":
        lam = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 2, 3]))
        g = catalog.r3_lambda(lam)
    else:
        g = catalog.load(catalog.TABLE1_FILES[name])
    h = g.change_basis(random_invertible(rng, 3))
    h.verify()
    return h


@pytest.fixture
def sl2():
    return catalog.sl2()


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
