from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from liecontract.exact import (EPS, Divergent, GaussianRational, Poly, Scalar, UndeclaredParameter,
                               eps_order, laurent_limit, to_scalar)
from liecontract.parse import ExprSyntaxError, parse_expr

from conftest import gaussians, laurent, polys

I_ = sympy.I


def to_sympy(p: Poly):
    out = sympy.Integer(0)
    for mono, c in p.terms.items():
        t = sympy.Rational(c.re.numerator, c.re.denominator) + I_ * sympy.Rational(c.im.numerator, c.im.denominator)
        for v, e in mono:
            t *= sympy.Symbol(v) ** e
        out += t
    return sympy.expand(out)


# --- Q(i) ---------------------------------------------------------------------

@given(gaussians)
def test_gaussian_inverse(a):
    assert a + (-a) == 0
    if a:
        assert a * a.inverse() == 1


@given(gaussians, gaussians, gaussians)
def test_gaussian_distributive(a, b, c):
    assert a * (b + c) == a * b + a * c


@given(gaussians)
def test_gaussian_sqrt_squares_back(a):
    s = (a * a).sqrt()
    assert s is not None and s * s == a * a


def test_gaussian_sqrt_of_non_square():
    assert GaussianRational(2).sqrt() is None
    assert GaussianRational(-4).sqrt() in (GaussianRational(0, 2), GaussianRational(0, -2))


def test_gaussian_reduced_components():
    z = GaussianRational(Fraction(4, -6), Fraction(3, 9))
    assert (z.re, z.im) == (Fraction(-2, 3), Fraction(1, 3))


# --- polynomials ------------------------------------------------------------

@given(polys(), polys(), polys())
def test_ring_laws(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == Poly()


@given(polys(), polys())
def test_product_matches_sympy(p, q):
    assert sympy.expand(to_sympy(p * q) - to_sympy(p) * to_sympy(q)) == 0


@given(polys())
def test_zero_coefficients_never_stored(p):
    q = p - p.scale(GaussianRational(1, 0))
    assert q.terms == {}
    assert all(c for c in p.terms.values())


@given(polys(), polys(), st.integers(-3, 3), st.integers(-3, 3))
def test_substitution_is_a_homomorphism(p, q, a, b):
    vals = {"a": a, "b": Fraction(b, 2)}
    assert (p * q).subs(vals) == p.subs(vals) * q.subs(vals)
    assert (p + q).subs(vals) == p.subs(vals) + q.subs(vals)


@given(polys(), polys())
def test_exact_division_recovers_factor(p, q):
    if q.is_zero():
        return
    assert (p * q).exact_div(q) == p


def test_expansion_of_kn_coefficient():
    e1, e2 = Poly.var("e1"), Poly.var("e2")
    p = (e1 - e2) * (e1.scale(2) + e2)
    assert p == e1 * e1 * 2 - e1 * e2 - e2 * e2
    assert to_sympy(p) == sympy.expand((sympy.Symbol("e1") - sympy.Symbol("e2")) * (2 * sympy.Symbol("e1") + sympy.Symbol("e2")))


def test_degree_coefficient_substitution():
    n, m = Poly.var("n"), Poly.var("m")
    assert (m - n).subs({"m": 3, "n": 1}) == Poly.const(2)


# --- scalars and limits ---------------------------------------------------

def test_normalize_drops_zero_terms():
    x = parse_expr("eps^2*alpha^2 + 0*e1")
    assert x == Scalar.eps(2) * Scalar.var("alpha") ** 2
    assert x.normalize(["alpha"]) == x


def test_normalize_rejects_undeclared():
    with pytest.raises(UndeclaredParameter):
        parse_expr("alpha*beta").normalize(["alpha"])


def test_limit_examples():
    assert laurent_limit(parse_expr("1 + eps^2*alpha^2")) == 1
    assert laurent_limit(Scalar(3)) == 3
    with pytest.raises(Divergent) as info:
        laurent_limit(parse_expr("2*eps^-1"))
    assert info.value.order == -1 and info.value.coefficient == 2


@given(laurent())
def test_limit_band(x):
    """Limit is the eps^0 coefficient when the order is >= 0, else Divergent."""
    if x.is_zero():
        assert laurent_limit(x) == 0
        return
    k = eps_order(x)
    if k < 0:
        with pytest.raises(Divergent):
            laurent_limit(x)
    elif k > 0:
        assert laurent_limit(x) == 0
    else:
        expect = x.num.coefficient(EPS, 0) if x.is_polynomial() else None
        if expect is not None:
            assert laurent_limit(x) == Scalar(expect)


@given(laurent(), laurent())
def test_scalar_field_ops(x, y):
    assert x + y == y + x
    if y:
        assert (x / y) * y == x
        assert y * y.inverse() == 1


def test_rational_function_equality():
    a = Scalar.var("a")
    assert (a * a - 1) / (a - 1) == a + 1
    assert str(to_scalar("(a^2 - 1)/(a - 1)")) == str(a + 1)


def test_only_eps_takes_negative_powers():
    assert parse_expr("eps^-2") == Scalar.eps(-2)
    with pytest.raises(ExprSyntaxError):
        parse_expr("alpha^-1")


def test_parse_errors_carry_position():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("1 + * 2", line=4)
    assert info.value.lineno == 4


def test_imaginary_unit():
    assert parse_expr("i*i") == -1
    assert str(parse_expr("2 + 3*i").constant_value()) == "2+3*i"
