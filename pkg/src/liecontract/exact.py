"""Exact scalars.

Three layers, each immutable:

* ``GaussianRational`` -- elements of Q(i), two ``Fraction`` components.
* ``Poly`` -- sparse multivariate polynomials with Gaussian-rational
  coefficients, keyed by monomials ``((name, exp), ...)`` sorted by name.
* ``Scalar`` -- a quotient ``num / den`` of two polynomials.  Bracket
  tensors only ever need ``den == 1``; the quotient form exists for
  classification invariants, matrix inverses and Laurent series in ``eps``.

The distinguished contraction variable is called ``eps``.  A negative power
of ``eps`` is stored as a monomial denominator, so ``Scalar`` never holds a
negative exponent internally; ``laurent_limit`` reads the order off the
``eps``-adic valuations of numerator and denominator.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Iterable, Mapping, Union

EPS = "eps"

Number = Union[int, Fraction, "GaussianRational"]


class UndeclaredParameter(ValueError):
    pass


class Divergent(ArithmeticError):
    """Raised when an ``eps -> 0`` limit does not exist.

    ``order`` is the most negative ``eps`` exponent and ``coefficient`` its
    coefficient; ``where`` optionally names the offending entry.
    """

    def __init__(self, order, coefficient, where=None):
        self.order = order
        self.coefficient = coefficient
        self.where = where
        msg = f"divergent limit: order {order}, leading coefficient {coefficient}"
        if where is not None:
            msg += f" at {where}"
        super().__init__(msg)


def _frac_sqrt(q: Fraction):
    if q < 0:
        return None
    a, b = q.numerator, q.denominator
    ra, rb = isqrt(a), isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x)
        if isinstance(x, complex):
            raise TypeError("floating-point complex numbers are not exact")
        if isinstance(x, str):
            return GaussianRational(Fraction(x))
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussianRational")

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        if not o.im and not self.im:
            return GaussianRational(self.re * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def sqrt(self):
        """Square root in Q(i) with non-negative real part, or None."""
        r = _frac_sqrt(self.norm())
        if r is None:
            return None
        x = _frac_sqrt((self.re + r) / 2)
        if x is None:
            return None
        if x:
            return GaussianRational(x, self.im / (2 * x))
        y = _frac_sqrt(-self.re)
        if y is None:
            return None
        return GaussianRational(0, y)

    def __repr__(self):
        return f"GaussianRational({self})"

    def __str__(self):
        re, im = self.re, self.im
        if not im:
            return str(re)
        if im == 1:
            ims = "i"
        elif im == -1:
            ims = "-i"
        else:
            ims = f"{im}*i"
        if not re:
            return ims
        sign = "" if ims.startswith("-") else "+"
        return f"{re}{sign}{ims}"


ZERO_Q = GaussianRational(0)
ONE_Q = GaussianRational(1)
I = GaussianRational(0, 1)


# --- monomials --------------------------------------------------------------

Monomial = tuple  # ((name, exp), ...) sorted by name, exp > 0


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_div(a: Monomial, b: Monomial):
    d = dict(a)
    for v, e in b:
        r = d.get(v, 0) - e
        if r < 0:
            return None
        if r:
            d[v] = r
        else:
            d.pop(v, None)
    return tuple(sorted(d.items()))


def _mono_gcd(a: Monomial, b: Monomial) -> Monomial:
    db = dict(b)
    return tuple((v, min(e, db[v])) for v, e in a if v in db)


def _mono_str(m: Monomial) -> str:
    parts = []
    for v, e in m:
        parts.append(v if e == 1 else f"{v}^{e}")
    return "*".join(parts)


class Poly:
    """Sparse multivariate polynomial over Q(i). Zero coefficients are never stored."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = GaussianRational.coerce(c)
                if c:
                    clean[m] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c) -> "Poly":
        c = GaussianRational.coerce(c)
        return cls._raw({(): c} if c else {})

    @classmethod
    def var(cls, name: str, exp: int = 1) -> "Poly":
        if exp < 0:
            raise ValueError("negative exponent in a polynomial")
        if exp == 0:
            return cls.const(1)
        return cls._raw({((name, exp),): ONE_Q})

    @staticmethod
    def coerce(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        return Poly.const(x)

    # -- queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self) -> GaussianRational:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), ZERO_Q)

    def variables(self) -> frozenset:
        return frozenset(v for m in self.terms for v, _ in m)

    def degree(self, var: str) -> int:
        return max((dict(m).get(var, 0) for m in self.terms), default=0)

    def min_degree(self, var: str) -> int:
        return min((dict(m).get(var, 0) for m in self.terms), default=0)

    def coefficient(self, var: str, power: int) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            d = dict(m)
            if d.get(var, 0) == power:
                d.pop(var, None)
                out[tuple(sorted(d.items()))] = c
        return Poly._raw(out)

    def _order_key(self, variables):
        return lambda m: tuple(dict(m).get(v, 0) for v in variables)

    def leading_term(self, variables=None):
        """Lexicographic leading (monomial, coefficient) over sorted names."""
        if variables is None:
            variables = sorted(self.variables())
        m = max(self.terms, key=self._order_key(variables))
        return m, self.terms[m]

    def monomial_content(self) -> Monomial:
        it = iter(self.terms)
        g = next(it, ())
        for m in it:
            g = _mono_gcd(g, m)
            if not g:
                break
        return g

    # -- arithmetic
    def __add__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def scale(self, c) -> "Poly":
        c = GaussianRational.coerce(c)
        if not c:
            return Poly._raw({})
        return Poly._raw({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        if not self.terms or not other.terms:
            return Poly._raw({})
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m)
                out[m] = c1 * c2 if s is None else s + c1 * c2
        return Poly._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def mul_monomial(self, mono: Monomial, c=ONE_Q) -> "Poly":
        return Poly._raw({_mono_mul(m, mono): v * c for m, v in self.terms.items()})

    def div_monomial(self, mono: Monomial) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            q = _mono_div(m, mono)
            if q is None:
                raise ArithmeticError("monomial does not divide polynomial")
            out[q] = c
        return Poly._raw(out)

    def exact_div(self, d: "Poly"):
        """Quotient ``self / d`` if ``d`` divides exactly, else ``None``."""
        if d.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            return self
        if d.is_constant():
            return self.scale(d.constant_value().inverse())
        for v in d.variables():
            if d.degree(v) > self.degree(v):
                return None
        variables = sorted(self.variables() | d.variables())
        key = self._order_key(variables)
        lm_d = max(d.terms, key=key)
        lc_inv = d.terms[lm_d].inverse()
        rem = dict(self.terms)
        quot = {}
        while rem:
            lm = max(rem, key=key)
            t = _mono_div(lm, lm_d)
            if t is None:
                return None
            c = rem[lm] * lc_inv
            quot[t] = c
            for m, v in d.terms.items():
                mm = _mono_mul(m, t)
                s = rem.get(mm, ZERO_Q) - v * c
                if s:
                    rem[mm] = s
                else:
                    rem.pop(mm, None)
        return Poly._raw(quot)

    def subs(self, values: Mapping) -> "Poly":
        """Substitute numbers or polynomials for variables."""
        if not values:
            return self
        out = Poly._raw({})
        cache: dict = {}
        for m, c in self.terms.items():
            keep = []
            factor = Poly.const(c)
            scalar = c
            poly_factor = None
            for v, e in m:
                if v in values:
                    val = values[v]
                    if isinstance(val, Poly):
                        key = (v, e)
                        if key not in cache:
                            cache[key] = val ** e
                        poly_factor = cache[key] if poly_factor is None else poly_factor * cache[key]
                    else:
                        scalar = scalar * (GaussianRational.coerce(val) ** e)
                else:
                    keep.append((v, e))
            if not scalar:
                continue
            factor = Poly._raw({tuple(keep): scalar})
            if poly_factor is not None:
                factor = factor * poly_factor
            out = out + factor
        return out

    # -- comparisons
    def __eq__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def sorted_terms(self):
        variables = sorted(self.variables())
        key = self._order_key(variables)
        return sorted(self.terms.items(), key=lambda mc: key(mc[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for m, c in self.sorted_terms():
            cs = str(c)
            compound = c.re and c.im
            if not m:
                body = f"({cs})" if compound else cs
            elif c == 1:
                body = _mono_str(m)
            elif c == -1:
                body = "-" + _mono_str(m)
            else:
                body = (f"({cs})" if compound else cs) + "*" + _mono_str(m)
            out.append(body)
        s = out[0]
        for t in out[1:]:
            s += " - " + t[1:] if t.startswith("-") else " + " + t
        return s

    def __repr__(self):
        return f"Poly({self})"


def _univariate_gcd(a: Poly, b: Poly, var: str) -> Poly:
    while not b.is_zero():
        a, b = b, _univariate_rem(a, b, var)
    if a.is_zero():
        return a
    _, lc = a.leading_term([var])
    return a.scale(lc.inverse())


def _univariate_rem(a: Poly, b: Poly, var: str) -> Poly:
    db = b.degree(var)
    lc = b.coefficient(var, db).constant_value()
    while not a.is_zero() and a.degree(var) >= db:
        da = a.degree(var)
        c = a.coefficient(var, da).constant_value() / lc
        a = a - b.mul_monomial(((var, da - db),) if da > db else (), c)
    return a


class Scalar:
    """Exact coefficient: a rational function ``num / den`` over Q(i).

    Polynomial values (``den == 1``) are in fully canonical form.  Proper
    quotients are reduced by monomial content, exact division and, for
    univariate data, a polynomial gcd; equality is decided by
    cross-multiplication so it is exact either way.
    """

    __slots__ = ("num", "den")

    def __init__(self, value=0, den=None):
        if isinstance(value, Scalar) and den is None:
            self.num, self.den = value.num, value.den
            return
        num = Poly.coerce(value)
        if den is None:
            self.num, self.den = num, _ONE_POLY
            return
        n, d = _reduce(num, Poly.coerce(den))
        self.num, self.den = n, d

    @classmethod
    def _poly(cls, p: Poly) -> "Scalar":
        s = cls.__new__(cls)
        s.num = p
        s.den = _ONE_POLY
        return s

    @classmethod
    def var(cls, name: str) -> "Scalar":
        return cls._poly(Poly.var(name))

    @classmethod
    def eps(cls, power=1) -> "Scalar":
        if power >= 0:
            return cls._poly(Poly.var(EPS, power))
        s = cls.__new__(cls)
        s.num = _ONE_POLY
        s.den = Poly.var(EPS, -power)
        return s

    @staticmethod
    def coerce(x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        return Scalar(x)

    # -- queries
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den is _ONE_POLY or self.den == _ONE_POLY

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> GaussianRational:
        return self.num.constant_value() / self.den.constant_value()

    def variables(self) -> frozenset:
        return self.num.variables() | self.den.variables()

    def as_poly(self) -> Poly:
        if not self.is_polynomial():
            raise ValueError(f"{self} is not a polynomial")
        return self.num

    # -- arithmetic
    def __add__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        if self.den is _ONE_POLY and other.den is _ONE_POLY:
            return Scalar._poly(self.num + other.num)
        if self.den == other.den:
            return Scalar(self.num + other.num, self.den)
        return Scalar(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        s = Scalar.__new__(Scalar)
        s.num = -self.num
        s.den = self.den
        return s

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        if self.den is _ONE_POLY and other.den is _ONE_POLY:
            return Scalar._poly(self.num * other.num)
        return Scalar(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero scalar")
        return Scalar(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero scalar")
        if other.is_constant() and self.den is _ONE_POLY:
            return Scalar._poly(self.num.scale(other.constant_value().inverse()))
        return Scalar(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return Scalar.coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        if self.den is _ONE_POLY:
            return Scalar._poly(self.num ** k)
        return Scalar(self.num ** k, self.den ** k)

    def subs(self, values: Mapping) -> "Scalar":
        vals = {k: (v.as_poly() if isinstance(v, Scalar) and v.is_polynomial() else v)
                for k, v in values.items()}
        for k, v in vals.items():
            if isinstance(v, Scalar):
                return _subs_rational(self, values)
        num = self.num.subs(vals)
        if self.den is _ONE_POLY:
            return Scalar._poly(num)
        den = self.den.subs(vals)
        if den.is_zero():
            raise ZeroDivisionError(f"denominator of {self} vanishes under substitution")
        return Scalar(num, den)

    def normalize(self, registry: Iterable[str] | None = None) -> "Scalar":
        """Canonical form; checks every variable against ``registry`` if given."""
        if registry is not None:
            allowed = set(registry) | {EPS}
            for v in sorted(self.variables()):
                if v not in allowed:
                    raise UndeclaredParameter(v)
        if self.den is _ONE_POLY:
            return self
        return Scalar(self.num, self.den)

    # -- comparisons
    def __eq__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        if self.den == other.den:
            return self.num == other.num
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        if self.den == _ONE_POLY:
            return hash(self.num)
        return hash((self.num, self.den))

    def __str__(self):
        if self.den == _ONE_POLY:
            return str(self.num)
        n = str(self.num)
        if len(self.num.terms) > 1:
            n = f"({n})"
        return f"{n}/({self.den})"

    def __repr__(self):
        return f"Scalar({self})"


_ONE_POLY = Poly.const(1)


def _reduce(num: Poly, den: Poly):
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if num.is_zero():
        return num, _ONE_POLY
    if den.is_constant():
        return num.scale(den.constant_value().inverse()), _ONE_POLY
    g = _mono_gcd(num.monomial_content(), den.monomial_content())
    if g:
        num, den = num.div_monomial(g), den.div_monomial(g)
        if den.is_constant():
            return num.scale(den.constant_value().inverse()), _ONE_POLY
    q = num.exact_div(den)
    if q is not None:
        return q, _ONE_POLY
    q = den.exact_div(num)
    if q is not None:
        num, den = _ONE_POLY, q
    else:
        vs = num.variables() | den.variables()
        if len(vs) == 1:
            (v,) = vs
            g = _univariate_gcd(num, den, v)
            if not g.is_constant():
                num, den = num.exact_div(g), den.exact_div(g)
    _, lc = den.leading_term()
    if lc != 1:
        inv = lc.inverse()
        num, den = num.scale(inv), den.scale(inv)
    if den.is_constant():
        return num, _ONE_POLY
    return num, den


def _subs_rational(x: Scalar, values: Mapping) -> Scalar:
    def ev(p: Poly) -> Scalar:
        out = Scalar(0)
        for m, c in p.terms.items():
            t = Scalar(c)
            for v, e in m:
                t = t * (Scalar.coerce(values[v]) ** e if v in values else Scalar.var(v) ** e)
            out = out + t
        return out
    return ev(x.num) / ev(x.den)


def eps_order(x: Scalar) -> int:
    """eps-adic valuation of a nonzero scalar."""
    if x.is_zero():
        raise ValueError("order of zero is undefined")
    return x.num.min_degree(EPS) - x.den.min_degree(EPS)


def laurent_limit(x, where=None) -> Scalar:
    """The ``eps -> 0`` limit of ``x``; raises ``Divergent`` on a pole."""
    x = Scalar.coerce(x)
    if x.is_zero():
        return x
    on, od = x.num.min_degree(EPS), x.den.min_degree(EPS)
    lead = Scalar(x.num.coefficient(EPS, on), x.den.coefficient(EPS, od))
    order = on - od
    if order < 0:
        raise Divergent(order, lead, where)
    if order > 0:
        return Scalar(0)
    return lead


def to_scalar(x) -> Scalar:
    if isinstance(x, str):
        from .parse import parse_expr
        return parse_expr(x)
    return Scalar.coerce(x)


ZERO = Scalar(0)
ONE = Scalar(1)
