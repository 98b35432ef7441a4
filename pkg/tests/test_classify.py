import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liecontract import catalog
from liecontract.classify import (Class3Label, DimensionMismatch, IrrationalEigenvalueRatio,
                                  canonical_lambda, classify3, isomorphic3, j_of_lambda)
from liecontract.exact import GaussianRational, to_scalar
from liecontract.finite import FiniteLieAlgebra, NotALieAlgebra, abelian

from conftest import random_invertible

X = ["x1", "x2", "x3"]


def alg(**brackets):
    return FiniteLieAlgebra.from_brackets(X, {tuple(k.split("_")): v for k, v in brackets.items()}).verify()


@pytest.mark.parametrize("name", catalog.TABLE1)
def test_table1_labels(name):
    g = catalog.load(catalog.TABLE1_FILES[name])
    label = classify3(g)
    if name == "r3lambda":
        assert label.symbolic
        assert label.j == (1 + to_scalar("lambda")) ** 2 / to_scalar("lambda")
    else:
        assert str(label) == name


def test_examples():
    assert str(classify3(alg(x1_x2={"x2": 1}, x1_x3={"x3": 2}))) == "r3(lambda=1/2)"
    assert str(classify3(abelian(3))) == "C3"
    assert str(classify3(alg(x1_x2={"x2": 1}, x1_x3={"x2": 1, "x3": 1}))) == "r3"
    assert str(classify3(catalog.sl2())) == "sl2"


def test_errors():
    with pytest.raises(DimensionMismatch):
        classify3(abelian(2))
    bad = FiniteLieAlgebra.from_brackets(X, {("x1", "x2"): {"x3": 1}, ("x1", "x3"): {"x2": 1},
                                             ("x2", "x3"): {"x2": 1}})
    with pytest.raises(NotALieAlgebra):
        classify3(bad)
    with pytest.raises(IrrationalEigenvalueRatio) as info:
        classify3(alg(x1_x2={"x2": 1, "x3": 1}, x1_x3={"x2": 1}))
    assert info.value.j == -1


@given(st.fractions(min_value=-4, max_value=4, max_denominator=5),
       st.fractions(min_value=-4, max_value=4, max_denominator=5))
def test_canonical_lambda_invariants(re, im):
    z = GaussianRational(re, im)
    if not z:
        return
    c = canonical_lambda(z)
    assert c.norm() <= 1
    if c.norm() == 1:
        assert c.im >= 0
    assert canonical_lambda(z.inverse()) == c
    assert j_of_lambda(c) == j_of_lambda(z)


def test_unit_circle_pair():
    i = to_scalar("i")
    assert isomorphic3(catalog.r3_lambda(i), catalog.r3_lambda(-i))
    assert str(classify3(catalog.r3_lambda(-i))) == "r3(lambda=i)"


def test_r31_is_not_r3():
    assert not isomorphic3(catalog.r3_lambda(1), catalog.load("r3"))


def test_label_parse_round_trip():
    for text in ["C3", "n3", "r2+C", "r3", "sl2", "r3(lambda=-1)", "r3(lambda=1/2)", "r3(lambda=i)"]:
        assert str(Class3Label.parse(text)) == text
    assert str(Class3Label.parse("r3(lambda=2)")) == "r3(lambda=1/2)"


def test_basis_change_invariance():
    """Labels of list entries survive random integer basis changes."""
    rng = random.Random(3)
    lambdas = [Fraction(1, 2), Fraction(-1), Fraction(1), Fraction(-2, 3), Fraction(3)]
    for _ in range(40):
        name = rng.choice(catalog.TABLE1)
        if name == "r3lambda":
            lam = rng.choice(lambdas)
            g = catalog.r3_lambda(lam)
            want = f"r3(lambda={canonical_lambda(GaussianRational(lam))})"
        else:
            g = catalog.load(catalog.TABLE1_FILES[name])
            want = name
        h = g.change_basis(random_invertible(rng, 3))
        assert str(classify3(h)) == want
        assert isomorphic3(g, h)
