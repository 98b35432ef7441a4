import json
import random
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest
import sympy

from liecontract import catalog
from liecontract.contraction import ContractionSpec, enumerate_diagonal
from liecontract.exact import Divergent, Scalar, to_scalar
from liecontract.finite import abelian
from liecontract.graded import (SL2_Z3, Affine, BracketTemplate, Element, GradedExponentMap, IllTypedExponent,
                                NoRuleMatches, Rule, UnverifiedFiniteAlgebra, affinize, class_constraints,
                                commute_check, graded_contract_template, kn_affinize, kn_witt, loop,
                                make_template, template_bracket, template_equal, template_jacobi_window,
                                template_limit, window, witt)

from conftest import random_three_dim

F = Fraction


def comb(T, x, y):
    return {str(k): str(v) for k, v in template_bracket(T, x, y).items()}


def V(n):
    return Element("V", n)


def fixture_template(name):
    return BracketTemplate.from_json(catalog.load_json_fixture(name))


# --- construction and evaluation --------------------------------------------

def test_witt_example():
    assert comb(witt(), Element("l", 2), Element("l", 3)) == {"l_5": "1"}


def test_kn_witt_examples():
    K = kn_witt()
    assert comb(K, V(2), V(4)) == {"V_6": "2", "V_4": "2*alpha^2"}
    assert comb(K, V(1), V(2)) == {"V_3": "1"}
    assert comb(K, V(1), V(3)) == {"V_4": "2"}


def test_affine_central_term(sl2):
    A = affinize(sl2)
    assert comb(A, Element("e", 1), Element("f", -1)) == {"h_0": "2", "c_0": "4"}
    assert comb(A, Element("e", 1), Element("f", 0)) == {"h_1": "2"}
    assert comb(A, Element("h", 2), Element("h", -2)) == {"c_0": "4"}


def test_kn_affine_odd_odd_line(sl2):
    T = kn_affinize(sl2)
    got = template_bracket(T, Element("h", 1), Element("e", 1))
    e1, e2 = to_scalar("e1"), to_scalar("e2")
    assert got == {Element("e", 2): Scalar(1), Element("e", 0): 3 * e1,
                   Element("e", -2): (e1 - e2) * (2 * e1 + e2)}


def test_make_template_kinds(sl2):
    assert template_equal(make_template("witt"), witt())
    assert template_equal(make_template("kn-witt"), kn_witt())
    assert template_equal(make_template("kn_affine", g=sl2), kn_affinize(sl2))
    assert template_equal(make_template("loop", g=sl2), loop(sl2))
    with pytest.raises(ValueError):
        make_template("virasoro")


def test_unverified_algebra_rejected():
    from liecontract.finite import FiniteLieAlgebra
    bad = FiniteLieAlgebra.from_brackets(["x1", "x2", "x3"], {
        ("x1", "x2"): {"x3": 1}, ("x1", "x3"): {"x2": 1}, ("x2", "x3"): {"x2": 1}})
    with pytest.raises(UnverifiedFiniteAlgebra):
        affinize(bad)


def test_missing_rule_is_malformed():
    rules = {("V", "V", 0, 0): Rule("V", "V", (0, 0), ())}
    with pytest.raises(NoRuleMatches):
        BracketTemplate("broken", ["V"], 2, rules)


def all_templates():
    sl2 = catalog.sl2()
    return [witt(), kn_witt(), affinize(sl2), loop(sl2), kn_affinize(sl2, grading=SL2_Z3),
            kn_affinize(catalog.load("r3"))]


@pytest.mark.parametrize("T", all_templates(), ids=lambda T: T.name)
def test_structural_antisymmetry(T):
    assert T.check_antisymmetry() == []
    for x in window(T, 3):
        assert template_bracket(T, x, x) == {}


@pytest.mark.parametrize("T", all_templates(), ids=lambda T: T.name)
def test_jacobi_window(T):
    assert template_jacobi_window(T, 4) == {}


def test_jacobi_window_detects_defect():
    T = BracketTemplate.from_json({"families": ["V"], "modulus": 1, "rules": [
        {"x": "V", "y": "V", "residues": [0, 0], "terms": [{"target": "V", "offset": 0, "coeff": "m - n + 1"}]}]})
    # m - n + 1 is not antisymmetric under n <-> m
    assert T.check_antisymmetry() == [("V", "V", 0, 0)]
    assert template_bracket(T, V(1), V(1)) == {V(2): Scalar(1)}
    assert template_jacobi_window(T, 2)


def test_jacobi_window_needs_size():
    with pytest.raises(ValueError):
        template_jacobi_window(witt(), 1)


# --- independent oracles ----------------------------------------------------------

X, ALPHA = sympy.symbols("X alpha")


def field(n):
    """Coefficient of d/dX for V_n."""
    if n % 2 == 0:
        k = n // 2
        return X * (X - ALPHA) ** k * (X + ALPHA) ** k
    k = (n - 1) // 2
    return (X - ALPHA) ** (k + 1) * (X + ALPHA) ** (k + 1)


def test_kn_witt_matches_vector_fields():
    K = kn_witt()
    for n in range(-4, 5):
        for m in range(-4, 5):
            f, g = field(n), field(m)
            want = sympy.simplify(f * sympy.diff(g, X) - g * sympy.diff(f, X))
            got = 0
            for el, c in template_bracket(K, V(n), V(m)).items():
                got += sympy.sympify(str(c).replace("^", "**"), locals={"alpha": ALPHA}) * field(el.degree)
            assert sympy.simplify(want - got) == 0, (n, m)


E1, E2 = sympy.symbols("e1 e2")


def kn_product(n, m):
    """A^n A^m in the Laurent-type ring of the KN affine construction."""
    if n % 2 and m % 2:
        return {n + m: 1, n + m - 2: 3 * E1, n + m - 4: sympy.expand((E1 - E2) * (2 * E1 + E2))}
    return {n + m: 1}


def mul(u, v):
    out = {}
    for a, x in u.items():
        for b, y in v.items():
            for c, z in kn_product(a, b).items():
                out[c] = sympy.expand(out.get(c, 0) + x * y * z)
    return {k: w for k, w in out.items() if w != 0}


def test_kn_product_commutative_associative():
    for a in range(-3, 4):
        for b in range(-3, 4):
            assert kn_product(a, b) == kn_product(b, a)
            for c in range(-3, 4):
                assert mul(mul({a: 1}, {b: 1}), {c: 1}) == mul({a: 1}, mul({b: 1}, {c: 1}))


def test_kn_affine_is_g_tensor_product(sl2):
    T = kn_affinize(sl2)
    for a in sl2.basis:
        for b in sl2.basis:
            ab = sl2.bracket(sl2._to_vector([1 if s == a else 0 for s in sl2.basis]),
                             sl2._to_vector([1 if s == b else 0 for s in sl2.basis]))
            for n in range(-3, 4):
                for m in range(-3, 4):
                    want = {}
                    for deg, c in kn_product(n, m).items():
                        for s, k in ab.items():
                            key = f"{s}_{deg}"
                            want[key] = sympy.expand(want.get(key, 0) + c * sympy.sympify(str(k)))
                    want = {k: v for k, v in want.items() if v != 0}
                    got = {k: sympy.expand(sympy.sympify(v.replace("^", "**")))
                           for k, v in comb(T, Element(a, n), Element(b, m)).items()}
                    assert got == want


def test_brackets_land_in_grade_sum(sl2):
    T = kn_affinize(sl2, grading=SL2_Z3)
    G = T.grade_group
    assert T.check_grading() == []
    for x in window(T, 3):
        for y in window(T, 3):
            for z in template_bracket(T, x, y):
                assert T.grade(z.family, z.degree) == G.add(T.grade(x.family, x.degree),
                                                            T.grade(y.family, y.degree))


# --- graded contractions ----------------------------------------------------------------

def eps_of(T):
    return {key: sorted({(t.offset, str(t.eps)) for t in r.terms}) for key, r in T.rules.items()}


def test_fine_contraction_of_kn_witt():
    eT = graded_contract_template(kn_witt(), GradedExponentMap.fine_map({"V": (1, 0)}))
    ex = eps_of(eT)
    assert ex[("V", "V", 1, 0)] == [(-2, "2"), (0, "0")]
    assert ex[("V", "V", 0, 0)] == [(-2, "2"), (0, "0")]
    assert ex[("V", "V", 1, 1)] == [(0, "0")]
    assert template_equal(template_limit(eT), witt(), 5, {"l": "V"})


def test_class_contraction_powers():
    eT = graded_contract_template(kn_witt(), GradedExponentMap.by_class({0: "n0", 1: "n1"}))
    powers = {str(t.eps) for r in eT.rules.values() for t in r.terms}
    assert powers == {"-n0 + 2*n1", "n0"}


def test_zero_map_is_identity(sl2):
    for T in (kn_witt(), affinize(sl2)):
        Z = GradedExponentMap.fine_map({f: (0, 0) for f in T.families})
        assert template_equal(template_limit(graded_contract_template(T, Z)), T)


def test_limit_cases():
    K = kn_witt()
    case3 = template_limit(graded_contract_template(K, GradedExponentMap.by_class({0: 0, 1: 1})))
    assert template_equal(case3, fixture_template("knwitt-case3.json"))
    case4 = template_limit(graded_contract_template(K, GradedExponentMap.by_class({0: 2, 1: 1})))
    assert template_equal(case4, fixture_template("knwitt-case4.json"))
    assert comb(case4, V(1), V(3)) == {"V_4": "2"}
    assert comb(case4, V(2), V(4)) == {}


def test_limit_divergent():
    eT = graded_contract_template(kn_witt(), GradedExponentMap.by_class({0: 1, 1: 0}))
    with pytest.raises(Divergent) as info:
        template_limit(eT)
    assert info.value.order == -1


def test_limit_needs_numeric_exponents():
    eT = graded_contract_template(kn_witt(), GradedExponentMap.by_class({0: "n0", 1: "n1"}))
    with pytest.raises(IllTypedExponent):
        template_limit(eT)
    assert template_equal(template_limit(eT, {"n0": 0, "n1": 0}), kn_witt())


def test_class_map_must_cover():
    with pytest.raises(IllTypedExponent):
        graded_contract_template(kn_witt(), GradedExponentMap.by_class({0: 0}))


def test_template_inequalities():
    assert not template_equal(kn_witt(), witt(), renaming={"l": "V"})
    assert not template_equal(fixture_template("knwitt-case4.json"), witt(), renaming={"l": "V"})


def test_e_zero_reduces_to_loop(sl2):
    assert template_equal(kn_affinize(sl2, 0, 0), affinize(sl2, central=False))
    assert not template_equal(kn_affinize(sl2), affinize(sl2, central=False))


def test_affinize_abelian_is_zero():
    T = affinize(abelian(3))
    assert all(not r.terms for r in T.rules.values())


# --- commuting square -----------------------------------------------------------

def test_commute_examples(sl2):
    assert commute_check(sl2, ContractionSpec.of(h=0, e=1, f=1))
    assert commute_check(sl2, ContractionSpec.of(h=0, e=0, f=0))
    w = {d.label: d.spec for d in enumerate_diagonal(catalog.r3_lambda(2))}["n3"]
    assert commute_check(catalog.r3_lambda(2), w)


def test_commute_random_specs():
    rng = random.Random(17)
    vals = [F(0), F(1, 2), F(1), F(2)]
    done = 0
    while done < 8:
        g = random_three_dim(rng)
        spec = ContractionSpec({s: rng.choice(vals) for s in g.basis})
        from liecontract.contraction import validate_exponents
        if not validate_exponents(g, spec).valid:
            continue
        assert commute_check(g, spec, central=bool(done % 2))
        done += 1


def test_commute_requires_loop_lift(sl2):
    spec = ContractionSpec.of(h=0, e=1, f=1)
    with pytest.raises(ValueError):
        commute_check(sl2, spec, GradedExponentMap.fine_map({"h": (1, 0), "e": (0, 1), "f": (0, 1)}))


# --- class constraints and serialization ----------------------------------------------

def test_class_constraint_keys(sl2):
    cc = class_constraints(kn_affinize(sl2, grading=SL2_Z3))
    assert cc["-10+10->00"] == {"n-10": 1, "n10": 1, "n00": -1}
    assert cc["00+10->10"] == {"n00": 1}
    assert set(cc) == set(catalog.load_json_fixture("sec32-final.json")["pattern"])


def schema(name):
    path = resources.files("liecontract") / "schema" / "v1" / name
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.mark.parametrize("T", all_templates(), ids=lambda T: T.name)
def test_json_round_trip(T):
    data = T.to_json()
    jsonschema.validate(data, schema("template.schema.json"))
    back = BracketTemplate.from_json(json.loads(json.dumps(data)))
    assert template_equal(back, T)
    assert back.to_json() == data


def test_eps_template_round_trip():
    eT = graded_contract_template(kn_witt(), GradedExponentMap.by_class({0: "n0", 1: "n1"}))
    back = BracketTemplate.from_json(eT.to_json())
    assert template_equal(back, eT)


@pytest.mark.parametrize("name", ["knwitt-case3.json", "knwitt-case4.json", "kn-affine-sl2-limit.json"])
def test_fixture_templates_validate(name):
    jsonschema.validate(catalog.load_json_fixture(name), schema("template.schema.json"))


def test_affine_parse():
    a = Affine.parse("2*n1 - n0 + 1/2")
    assert a == Affine({"n1": 2, "n0": -1}, F(1, 2))
    with pytest.raises(ValueError):
        Affine.parse("n0*n1")
