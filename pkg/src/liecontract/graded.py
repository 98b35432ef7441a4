"""Closed-form bracket templates for integer-indexed Lie algebras.

A template has basis families (``V``, or the basis symbols of a finite
algebra for loop-type algebras), each element ``family_degree``.  The
bracket of ``x_n`` and ``y_m`` is selected by the residues of ``n`` and
``m`` modulo the template modulus; each rule is a list of terms
``coeff(n, m) * target_{n + m + offset}``, optionally guarded by a linear
side condition ``a*n + b*m + c == 0`` (used for the central term).

Terms may also carry an ``eps`` exponent (an affine form in ``n``, ``m`` and
symbolic class exponents); such templates are the intermediate step of a
graded contraction and are resolved by ``template_limit``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations, product
from math import lcm
from typing import Mapping, Sequence

from .exact import Divergent, Poly, Scalar, to_scalar
from .finite import FiniteLieAlgebra, killing_form

N, M = "n", "m"
SCHEMA = "liecontract.template.v1"


class NoRuleMatches(LookupError):
    pass


class IllTypedExponent(ValueError):
    pass


class UnverifiedFiniteAlgebra(ValueError):
    pass


# --- affine exponents -------------------------------------------------------

class Affine:
    """``const + sum(c_v * v)`` with rational coefficients."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Mapping | None = None, const=0):
        self.coeffs = {v: Fraction(c) for v, c in (coeffs or {}).items() if c}
        self.const = Fraction(const)

    @classmethod
    def var(cls, name):
        return cls({name: 1})

    def __add__(self, other):
        other = other if isinstance(other, Affine) else Affine(const=other)
        d = dict(self.coeffs)
        for v, c in other.coeffs.items():
            d[v] = d.get(v, 0) + c
        return Affine(d, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return Affine({v: -c for v, c in self.coeffs.items()}, -self.const)

    def __sub__(self, other):
        other = other if isinstance(other, Affine) else Affine(const=other)
        return self + (-other)

    def scale(self, k):
        return Affine({v: c * k for v, c in self.coeffs.items()}, self.const * k)

    def subs(self, values: Mapping) -> "Affine":
        out = Affine(const=self.const)
        for v, c in self.coeffs.items():
            if v in values:
                val = values[v]
                out = out + (val.scale(c) if isinstance(val, Affine) else Affine(const=Fraction(val) * c))
            else:
                out = out + Affine({v: c})
        return out

    def is_constant(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, Affine):
            other = Affine(const=other)
        return self.coeffs == other.coeffs and self.const == other.const

    def __hash__(self):
        return hash((frozenset(self.coeffs.items()), self.const))

    def __str__(self):
        parts = []
        for v in sorted(self.coeffs):
            c = self.coeffs[v]
            parts.append(v if c == 1 else f"-{v}" if c == -1 else f"{c}*{v}")
        if self.const or not parts:
            parts.append(str(self.const))
        s = parts[0]
        for p in parts[1:]:
            s += " - " + p[1:] if p.startswith("-") else " + " + p
        return s

    def __repr__(self):
        return f"Affine({self})"

    @classmethod
    def parse(cls, text: str) -> "Affine":
        from .parse import parse_expr
        p = parse_expr(str(text)).as_poly()
        coeffs, const = {}, Fraction(0)
        for mono, c in p.terms.items():
            if c.im:
                raise ValueError("exponents must be real")
            if not mono:
                const = c.re
            elif len(mono) == 1 and mono[0][1] == 1:
                coeffs[mono[0][0]] = c.re
            else:
                raise ValueError(f"exponent {text!r} is not affine")
        return cls(coeffs, const)


ZERO_AFF = Affine()


# --- template data ----------------------------------------------------------

@dataclass(frozen=True)
class GradeGroup:
    moduli: tuple  # 0 stands for Z

    def reduce(self, g) -> tuple:
        return tuple(x % q if q else x for x, q in zip(g, self.moduli))

    def add(self, a, b) -> tuple:
        return self.reduce(tuple(x + y for x, y in zip(a, b)))

    def zero(self) -> tuple:
        return tuple(0 for _ in self.moduli)

    def name(self, g) -> str:
        parts = []
        for x, q in zip(self.reduce(g), self.moduli):
            parts.append(str(x - q if q and x > q // 2 else x))
        return "".join(parts)


@dataclass(frozen=True)
class Element:
    family: str
    degree: int

    def __str__(self):
        return f"{self.family}_{self.degree}"


@dataclass(frozen=True)
class Term:
    target: str
    offset: int
    coeff: Poly
    when: tuple | None = None  # (a, b, c): a*n + b*m + c == 0
    eps: Affine = ZERO_AFF

    def swapped(self) -> "Term":
        coeff = self.coeff.subs({N: Poly.var("_swap")}).subs({M: Poly.var(N)}).subs({"_swap": Poly.var(M)})
        when = None if self.when is None else (self.when[1], self.when[0], self.when[2])
        eps = self.eps.subs({N: Affine.var("_swap")}).subs({M: Affine.var(N)}).subs({"_swap": Affine.var(M)})
        return Term(self.target, self.offset, -coeff, when, eps)


@dataclass(frozen=True)
class Rule:
    x: str
    y: str
    residues: tuple
    terms: tuple


def _canonical_when(w):
    if w is None:
        return None
    a, b, c = w
    for v in (a, b, c):
        if v:
            s = 1 if v > 0 else -1
            break
    return (a * s, b * s, c * s)


def _on_condition(p: Poly, when) -> Poly:
    """Reduce ``p`` modulo the side condition by eliminating ``m`` (or ``n``)."""
    if when is None:
        return p
    a, b, c = when
    if b:
        return p.subs({M: (Poly.var(N).scale(a) + Poly.const(c)).scale(Fraction(-1, b))})
    if a:
        return p.subs({N: Poly.const(Fraction(-c, a))})
    return p


def _signature(terms) -> dict:
    sig: dict = {}
    for t in terms:
        w = _canonical_when(t.when)
        key = (t.target, t.offset, w, t.eps)
        sig[key] = sig.get(key, Poly()) + _on_condition(t.coeff, w)
    return {k: v for k, v in sig.items() if not v.is_zero()}


class BracketTemplate:
    """Closed-form brackets for families of degree-indexed basis elements.

    ``rules`` is keyed by ``(x_family, y_family, n mod modulus, m mod modulus)``
    and must cover every pair of non-central families.  ``family_grades`` and
    ``degree_moduli`` define the grading used by class exponent maps: the
    grade of ``x_n`` is ``family_grades[x] + (n mod q for q in degree_moduli)``.
    """

    def __init__(self, name: str, families: Sequence[str], modulus: int, rules: Mapping,
                 params: Sequence[str] = (), central: str | None = None,
                 family_grades: Mapping | None = None, family_moduli: Sequence[int] = (),
                 degree_moduli: Sequence[int] = ()):
        self.name = name
        self.families = tuple(families)
        self.modulus = modulus
        self.params = tuple(params)
        self.central = central
        if set(self.params) & {N, M}:
            raise ValueError("'n' and 'm' are reserved for degrees")
        self.family_moduli = tuple(family_moduli)
        self.degree_moduli = tuple(degree_moduli)
        self.family_grades = {f: tuple((family_grades or {}).get(f, (0,) * len(self.family_moduli)))
                              for f in self.all_families}
        self.rules = dict(rules)
        self._cache: dict = {}
        self._check_coverage()

    @property
    def all_families(self):
        return self.families + ((self.central,) if self.central else ())

    @property
    def grade_group(self) -> GradeGroup:
        return GradeGroup(self.family_moduli + self.degree_moduli)

    def grade(self, family: str, degree: int) -> tuple:
        if family == self.central:
            return self.grade_group.zero()
        g = self.family_grades[family] + tuple(degree % q if q else degree for q in self.degree_moduli)
        return self.grade_group.reduce(g)

    def _check_coverage(self):
        M_ = self.modulus
        for x, y in product(self.families, repeat=2):
            for r in product(range(M_), repeat=2):
                if (x, y) + r not in self.rules:
                    raise NoRuleMatches(f"{self.name}: no rule for ({x},{y}) residues {r}")
        extra = set(self.rules) - {(x, y) + r for x, y in product(self.families, repeat=2)
                                   for r in product(range(M_), repeat=2)}
        if extra:
            raise ValueError(f"rules for unknown families/residues: {sorted(extra)}")

    def rule(self, x: str, y: str, n: int, m: int) -> Rule:
        try:
            return self.rules[(x, y, n % self.modulus, m % self.modulus)]
        except KeyError:
            raise NoRuleMatches(f"no rule for ({x}_{n}, {y}_{m})") from None

    def has_eps(self) -> bool:
        return any(not t.eps.is_constant() or t.eps.const for r in self.rules.values() for t in r.terms)

    def canonical(self, modulus: int) -> "BracketTemplate":
        """Same template with rules split to a multiple of the current modulus."""
        if modulus % self.modulus:
            raise ValueError("new modulus must be a multiple of the old one")
        if modulus == self.modulus:
            return self
        rules = {}
        for x, y in product(self.families, repeat=2):
            for rx, ry in product(range(modulus), repeat=2):
                r = self.rules[(x, y, rx % self.modulus, ry % self.modulus)]
                rules[(x, y, rx, ry)] = Rule(x, y, (rx, ry), r.terms)
        return self._copy(rules=rules, modulus=modulus)

    def _copy(self, **kw) -> "BracketTemplate":
        args = dict(name=self.name, families=self.families, modulus=self.modulus, rules=self.rules,
                    params=self.params, central=self.central, family_grades=self.family_grades,
                    family_moduli=self.family_moduli, degree_moduli=self.degree_moduli)
        args.update(kw)
        return BracketTemplate(**args)

    def check_antisymmetry(self) -> list:
        bad = []
        for (x, y, rx, ry), r in self.rules.items():
            mirror = self.rules[(y, x, ry, rx)]
            if _signature(r.terms) != _signature([t.swapped() for t in mirror.terms]):
                bad.append((x, y, rx, ry))
        return bad

    def check_grading(self) -> list:
        """Rule terms whose target grade differs from the sum of the input grades."""
        bad = []
        G = self.grade_group
        for (x, y, rx, ry), r in self.rules.items():
            gx, gy = self.grade(x, rx), self.grade(y, ry)
            for t in r.terms:
                if t.target == self.central:
                    if t.when is None or (t.when[0], t.when[1]) != (t.when[0], t.when[0]) or not t.when[0]:
                        bad.append((x, y, rx, ry, t.target))
                    continue
                gt = self.grade(t.target, rx + ry + t.offset)
                if self.degree_moduli and any(q and self.modulus % q for q in self.degree_moduli):
                    continue
                if gt != G.add(gx, gy):
                    bad.append((x, y, rx, ry, t.target))
        return bad

    def __repr__(self):
        return f"<BracketTemplate {self.name}: families={self.families} modulus={self.modulus}>"

    # -- serialization
    def to_json(self) -> dict:
        rules = []
        for key in sorted(self.rules):
            r = self.rules[key]
            rules.append({
                "x": r.x, "y": r.y, "residues": list(r.residues),
                "terms": [{"target": t.target, "offset": t.offset, "coeff": str(t.coeff),
                           **({"when": list(t.when)} if t.when else {}),
                           **({"eps": str(t.eps)} if t.eps != ZERO_AFF else {})}
                          for t in r.terms]})
        return {"schema": SCHEMA, "name": self.name, "families": list(self.families),
                "central": self.central, "modulus": self.modulus, "params": list(self.params),
                "family_grades": {f: list(g) for f, g in self.family_grades.items() if f != self.central},
                "family_moduli": list(self.family_moduli), "degree_moduli": list(self.degree_moduli),
                "rules": rules}

    @classmethod
    def from_json(cls, data) -> "BracketTemplate":
        """Load a template; absent rules are mirrored from their partner or set to zero."""
        from .parse import parse_expr

        if isinstance(data, str):
            data = json.loads(data)
        if data.get("schema", SCHEMA) != SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        params = data.get("params", [])
        modulus = int(data.get("modulus", 1))
        families = data["families"]
        given = {}
        for r in data["rules"]:
            res = tuple(int(v) % modulus for v in r["residues"])
            terms = []
            for t in r["terms"]:
                coeff = parse_expr(str(t["coeff"]), params=list(params) + [N, M]).as_poly()
                when = tuple(t["when"]) if t.get("when") else None
                eps = Affine.parse(t["eps"]) if t.get("eps") not in (None, "0") else ZERO_AFF
                terms.append(Term(t["target"], int(t.get("offset", 0)), coeff, when, eps))
            key = (r["x"], r["y"]) + res
            if key in given:
                raise ValueError(f"duplicate rule {key}")
            given[key] = Rule(r["x"], r["y"], res, tuple(terms))
        rules = _complete_rules(families, modulus, given)
        return cls(data.get("name", "template"), families, modulus, rules, params=params,
                   central=data.get("central"),
                   family_grades={f: tuple(g) for f, g in data.get("family_grades", {}).items()},
                   family_moduli=data.get("family_moduli", []),
                   degree_moduli=data.get("degree_moduli", []))


def _complete_rules(families, modulus, given: Mapping) -> dict:
    rules = dict(given)
    for x, y in product(families, repeat=2):
        for rx, ry in product(range(modulus), repeat=2):
            key = (x, y, rx, ry)
            if key in rules:
                continue
            mirror = given.get((y, x, ry, rx))
            terms = tuple(t.swapped() for t in mirror.terms) if mirror else ()
            rules[key] = Rule(x, y, (rx, ry), terms)
    return rules


# --- constructors -----------------------------------------------------------

def _n():
    return Poly.var(N)


def _m():
    return Poly.var(M)


def _require(g: FiniteLieAlgebra):
    if not g.is_lie():
        raise UnverifiedFiniteAlgebra(f"{g!r} fails the Jacobi identity")


def witt() -> BracketTemplate:
    rules = {("l", "l", 0, 0): Rule("l", "l", (0, 0), (Term("l", 0, _m() - _n()),))}
    return BracketTemplate("witt", ["l"], 1, rules)


def kn_witt(alpha="alpha") -> BracketTemplate:
    """Krichever-Novikov deformation of Witt, symbolic in ``alpha`` by default."""
    a2 = (Poly.var(alpha) if isinstance(alpha, str) else to_scalar(alpha).as_poly()) ** 2
    params = [alpha] if isinstance(alpha, str) else []
    d = _m() - _n()
    given = {
        ("V", "V", 1, 1): Rule("V", "V", (1, 1), (Term("V", 0, d),)),
        ("V", "V", 0, 0): Rule("V", "V", (0, 0), (Term("V", 0, d), Term("V", -2, d * a2))),
        ("V", "V", 1, 0): Rule("V", "V", (1, 0), (Term("V", 0, d), Term("V", -2, (d - 1) * a2))),
    }
    return BracketTemplate("kn_witt", ["V"], 2, _complete_rules(["V"], 2, given),
                           params=params, degree_moduli=[2])


def _loop_terms(g: FiniteLieAlgebra, a: str, b: str, parts) -> tuple:
    i, j = g.index[a], g.index[b]
    terms = []
    for k, c in sorted(g.structure(i, j).items()):
        for offset, factor in parts:
            terms.append(Term(g.basis[k], offset, c.as_poly() * factor))
    return tuple(terms)


def _grading_kw(g, grading):
    if grading is None:
        return {}
    grades, moduli = grading
    return {"family_grades": {s: tuple(v) for s, v in grades.items()}, "family_moduli": list(moduli)}


def loop(g: FiniteLieAlgebra, grading=None, degree_moduli=()) -> BracketTemplate:
    return affinize(g, central=False, grading=grading, degree_moduli=degree_moduli)


def affinize(g: FiniteLieAlgebra, central: bool = True, grading=None,
             degree_moduli=(), central_name: str = "c") -> BracketTemplate:
    """``g (x) C[t, 1/t]``, plus ``n B(a,b) c`` on ``n + m = 0`` when ``central``.

    ``B`` is the Killing form of ``g``; ``grading`` is an optional
    ``(family_grades, family_moduli)`` pair for class exponent maps.
    """
    _require(g)
    cname = None
    B = None
    if central:
        cname = central_name
        while cname in g.basis:
            cname += "'"
        B = killing_form(g)
    rules = {}
    for a, b in product(g.basis, repeat=2):
        terms = list(_loop_terms(g, a, b, [(0, Poly.const(1))]))
        if central and B[g.index[a]][g.index[b]]:
            terms.append(Term(cname, 0, _n() * B[g.index[a]][g.index[b]].as_poly(), (1, 1, 0)))
        rules[(a, b, 0, 0)] = Rule(a, b, (0, 0), tuple(terms))
    T = BracketTemplate(f"affine({g.name or 'g'})" if central else f"loop({g.name or 'g'})",
                        g.basis, 1, rules, params=sorted(g.params), central=cname,
                        degree_moduli=degree_moduli, **_grading_kw(g, grading))
    if degree_moduli:
        T = T.canonical(lcm(*[q for q in degree_moduli if q]))
    return T


def kn_affinize(g: FiniteLieAlgebra, e1="e1", e2="e2", grading=None) -> BracketTemplate:
    """Krichever-Novikov type deformation of the loop algebra over ``g``."""
    _require(g)
    p1 = Poly.var(e1) if isinstance(e1, str) else to_scalar(e1).as_poly()
    p2 = Poly.var(e2) if isinstance(e2, str) else to_scalar(e2).as_poly()
    params = sorted(set(g.params) | {p for p in (e1, e2) if isinstance(p, str)})
    odd = [(0, Poly.const(1)), (-2, p1.scale(3)), (-4, (p1 - p2) * (p1.scale(2) + p2))]
    rules = {}
    for a, b in product(g.basis, repeat=2):
        for rx, ry in product(range(2), repeat=2):
            parts = odd if (rx, ry) == (1, 1) else [(0, Poly.const(1))]
            rules[(a, b, rx, ry)] = Rule(a, b, (rx, ry), _loop_terms(g, a, b, parts))
    return BracketTemplate(f"kn_affine({g.name or 'g'})", g.basis, 2, rules, params=params,
                           degree_moduli=[2], **_grading_kw(g, grading))


SL2_Z3 = ({"h": (0,), "e": (1,), "f": (-1,)}, (3,))


def make_template(kind: str, **params) -> BracketTemplate:
    kind = kind.replace("-", "_")
    if kind == "witt":
        return witt()
    if kind == "kn_witt":
        return kn_witt(params.get("alpha", "alpha"))
    if kind == "loop":
        return loop(params["g"], grading=params.get("grading"))
    if kind == "affine":
        return affinize(params["g"], central=params.get("central", True), grading=params.get("grading"))
    if kind == "kn_affine":
        return kn_affinize(params["g"], params.get("e1", "e1"), params.get("e2", "e2"),
                           grading=params.get("grading"))
    raise ValueError(f"unknown template kind {kind!r}")


# --- evaluation -------------------------------------------------------------

def _term_value(t: Term, n: int, m: int):
    if t.when is not None:
        a, b, c = t.when
        if a * n + b * m + c:
            return None
    coeff = t.coeff.subs({N: n, M: m})
    if coeff.is_zero():
        return None
    value = Scalar(coeff)
    if t.eps != ZERO_AFF:
        e = t.eps.subs({N: n, M: m})
        if not e.is_constant() or e.const.denominator != 1:
            raise ValueError(f"eps exponent {t.eps} is not an integer at n={n}, m={m}")
        value = value * Scalar.eps(int(e.const))
    return value


def template_bracket(T: BracketTemplate, x: Element, y: Element) -> dict:
    """``[x, y]`` as ``{Element: Scalar}``."""
    key = (x, y)
    hit = T._cache.get(key)
    if hit is not None:
        return hit
    out: dict = {}
    if x.family != T.central and y.family != T.central:
        r = T.rule(x.family, y.family, x.degree, y.degree)
        for t in r.terms:
            v = _term_value(t, x.degree, y.degree)
            if v is None:
                continue
            deg = 0 if t.target == T.central else x.degree + y.degree + t.offset
            el = Element(t.target, deg)
            s = out.get(el)
            out[el] = v if s is None else s + v
        out = {k: v for k, v in out.items() if v}
    T._cache[key] = out
    return out


def bracket_comb(T, u: Mapping, v: Mapping) -> dict:
    out: dict = {}
    for x, a in u.items():
        for y, b in v.items():
            for z, c in template_bracket(T, x, y).items():
                out[z] = out.get(z, Scalar(0)) + a * b * c
    return {k: w for k, w in out.items() if w}


def window(T: BracketTemplate, N_: int) -> list:
    els = [Element(f, d) for f in T.families for d in range(-N_, N_ + 1)]
    if T.central:
        els.append(Element(T.central, 0))
    return els


def template_jacobi_window(T: BracketTemplate, N_: int) -> dict:
    """Nonzero Jacobi sums over distinct triples of window elements."""
    if N_ < 2:
        raise ValueError("window size must be at least 2")
    els = window(T, N_)
    defects = {}
    one = Scalar(1)
    for x, y, z in combinations(els, 3):
        total: dict = {}
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            for k, v in bracket_comb(T, template_bracket(T, a, b), {c: one}).items():
                total[k] = total.get(k, Scalar(0)) + v
        total = {k: v for k, v in total.items() if v}
        if total:
            defects[(x, y, z)] = total
    return defects


# --- graded contractions ----------------------------------------------------

@dataclass(frozen=True)
class GradedExponentMap:
    """Either class exponents ``{grade: value}`` or fine maps ``{family: (slope, shift)}``.

    Class values may be rationals or symbol names (kept symbolic in the
    resulting eps exponents).
    """

    classes: Mapping | None = None
    fine: Mapping | None = None

    @classmethod
    def by_class(cls, mapping: Mapping) -> "GradedExponentMap":
        return cls(classes={tuple(k) if isinstance(k, (tuple, list)) else (k,): v
                            for k, v in mapping.items()})

    @classmethod
    def fine_map(cls, mapping: Mapping) -> "GradedExponentMap":
        return cls(fine={f: (Fraction(a), Fraction(b)) for f, (a, b) in mapping.items()})

    @classmethod
    def loop_lift(cls, exponents: Mapping) -> "GradedExponentMap":
        return cls.fine_map({f: (0, v) for f, v in exponents.items()})

    def value(self, T: BracketTemplate, family: str, residue: int, degree: Affine) -> Affine:
        if self.fine is not None:
            if family not in self.fine:
                if family == T.central:
                    return ZERO_AFF
                raise IllTypedExponent(f"no fine exponent for family {family}")
            a, b = self.fine[family]
            return degree.scale(a) + b
        G = T.grade_group
        key = T.grade(family, residue)
        table = {G.reduce(k): v for k, v in self.classes.items()}
        if key not in table:
            if family == T.central:
                return ZERO_AFF
            raise IllTypedExponent(f"class {G.name(key)} has no exponent")
        v = table[key]
        return Affine.var(v) if isinstance(v, str) else Affine(const=Fraction(v))


def graded_contract_template(T: BracketTemplate, E: GradedExponentMap) -> BracketTemplate:
    """Multiply each term by ``eps^(E(x) + E(y) - E(target))``."""
    if E.classes is not None:
        mod = lcm(T.modulus, *[q for q in T.degree_moduli if q]) if T.degree_moduli else T.modulus
        T = T.canonical(mod)
        bad = T.check_grading()
        if bad:
            raise IllTypedExponent(f"rules do not respect the grading: {bad[:3]}")
    n, m = Affine.var(N), Affine.var(M)
    rules = {}
    for (x, y, rx, ry), r in T.rules.items():
        ex = E.value(T, x, rx, n) + E.value(T, y, ry, m)
        terms = []
        for t in r.terms:
            tdeg = Affine(const=0) if t.target == T.central else n + m + t.offset
            e = ex - E.value(T, t.target, (rx + ry + t.offset) % T.modulus, tdeg)
            terms.append(replace(t, eps=t.eps + e))
        rules[(x, y, rx, ry)] = Rule(x, y, (rx, ry), tuple(terms))
    return T._copy(rules=rules, name=f"eps[{T.name}]")


def template_limit(T: BracketTemplate, values: Mapping | None = None) -> BracketTemplate:
    """``eps -> 0`` limit, rule by rule; ``values`` fixes symbolic exponents."""
    rules = {}
    for key, r in T.rules.items():
        terms = []
        for t in r.terms:
            e = t.eps.subs(values or {})
            if not e.is_constant():
                raise IllTypedExponent(f"eps exponent {e} of rule {key} is not a number")
            if e.const < 0:
                raise Divergent(e.const, t.coeff, where=f"rule {key} term {t.target}{t.offset:+d}")
            if e.const == 0:
                terms.append(replace(t, eps=ZERO_AFF))
        rules[key] = Rule(r.x, r.y, r.residues, tuple(terms))
    return T._copy(rules=rules, name=f"lim[{T.name}]")


def rule_exponents(T: BracketTemplate) -> dict:
    """``{rule key: sorted distinct eps exponents}`` for display."""
    out = {}
    for key, r in sorted(T.rules.items()):
        exps = sorted({str(t.eps) for t in r.terms})
        if exps:
            out[key] = exps
    return out


# --- comparison -------------------------------------------------------------

def structurally_equal(T1: BracketTemplate, T2: BracketTemplate, renaming: Mapping | None = None) -> bool:
    ren = dict(renaming or {})
    fam2 = {ren.get(f, f) for f in T2.families}
    if set(T1.families) != fam2:
        return False
    if (T1.central is None) != (T2.central is None):
        if _uses_central(T1) or _uses_central(T2):
            return False
    mod = lcm(T1.modulus, T2.modulus)
    A, B = T1.canonical(mod), T2.canonical(mod)
    c1 = T1.central
    ren_full = dict(ren)
    if T2.central:
        ren_full[T2.central] = c1 or T2.central
    for (x, y, rx, ry), r2 in B.rules.items():
        r1 = A.rules[(ren.get(x, x), ren.get(y, y), rx, ry)]
        terms2 = [replace(t, target=ren_full.get(t.target, t.target)) for t in r2.terms]
        if _signature(r1.terms) != _signature(terms2):
            return False
    return True


def _uses_central(T):
    return T.central is not None and any(t.target == T.central for r in T.rules.values() for t in r.terms)


def window_equal(T1, T2, N_: int, renaming: Mapping | None = None) -> bool:
    ren = dict(renaming or {})
    if T2.central:
        ren.setdefault(T2.central, T1.central or T2.central)

    def mapped(comb):
        return {Element(ren.get(k.family, k.family), k.degree): v for k, v in comb.items()}

    for x in window(T2, N_):
        for y in window(T2, N_):
            a = template_bracket(T2, x, y)
            x1 = Element(ren.get(x.family, x.family), x.degree)
            y1 = Element(ren.get(y.family, y.family), y.degree)
            if x1.family == T1.central or y1.family == T1.central or x1.family in T1.families:
                b = template_bracket(T1, x1, y1) if (x1.family in T1.all_families and
                                                    y1.family in T1.all_families) else None
            else:
                return False
            if b is None:
                return False
            ma = mapped(a)
            keys = set(ma) | set(b)
            if any(ma.get(k, Scalar(0)) != b.get(k, Scalar(0)) for k in keys):
                return False
    return True


def template_equal(T1: BracketTemplate, T2: BracketTemplate, N_: int = 4,
                   renaming: Mapping | None = None) -> bool:
    """Rule-by-rule equality (after ``renaming`` of T2's families), confirmed on a window."""
    s = structurally_equal(T1, T2, renaming)
    w = window_equal(T1, T2, N_, renaming) if not (T1.has_eps() or T2.has_eps()) else s
    if s != w:
        raise AssertionError("structural and window comparison disagree")
    return s


# --- exponent constraints and the finite/affine square ----------------------

def class_constraints(T: BracketTemplate, prefix: str = "n") -> dict:
    """``{"a+b->c": {var: coeff}}`` over the nonzero rule classes of ``T``.

    Variables are ``prefix + class name`` (e.g. ``n-10``); keys list the two
    source classes in sorted order.
    """
    mod = lcm(T.modulus, *[q for q in T.degree_moduli if q]) if T.degree_moduli else T.modulus
    T = T.canonical(mod)
    G = T.grade_group
    out = {}
    for (x, y, rx, ry), r in sorted(T.rules.items()):
        for t in r.terms:
            if t.target == T.central:
                continue
            cx, cy = T.grade(x, rx), T.grade(y, ry)
            ct = T.grade(t.target, rx + ry + t.offset)
            nx, ny = sorted([G.name(cx), G.name(cy)])
            key = f"{nx}+{ny}->{G.name(ct)}"
            form: dict = {}
            for name, s in ((nx, 1), (ny, 1), (G.name(ct), -1)):
                form[prefix + name] = form.get(prefix + name, 0) + s
            out[key] = {v: Fraction(c) for v, c in form.items() if c}
    return out


def class_variables(T: BracketTemplate, prefix: str = "n") -> list:
    G = T.grade_group
    names = set()
    for f in T.families:
        for r in range(max(T.modulus, 1)):
            names.add(prefix + G.name(T.grade(f, r)))
    return sorted(names)


def commute_check(g: FiniteLieAlgebra, spec, graded_E: GradedExponentMap | None = None,
                  central: bool = True, N_: int = 4) -> bool:
    """Affinize-then-contract agrees with contract-then-affinize.

    ``graded_E`` must be the loop lift of ``spec`` (degree-independent
    exponents equal to the finite ones); it is built when omitted.
    """
    from .contraction import contract_diagonal, prepared

    lift = GradedExponentMap.loop_lift(spec.exponents)
    if graded_E is None:
        graded_E = lift
    elif graded_E.fine != lift.fine:
        raise ValueError("graded exponent map is not the loop lift of the finite spec")
    lhs = affinize(contract_diagonal(g, spec), central=central)
    h = prepared(g, spec)
    h._verified = True
    rhs = template_limit(graded_contract_template(affinize(h, central=central), graded_E))
    return template_equal(lhs, rhs, N_)
