"""Command-line front end.

Every command prints a JSON report ``{"command", "result", "diagnostics"}``
(or an aligned plaintext rendering with ``--pretty``).  Exit status is 0 on
success, 1 on a domain error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, catalog, graded
from .classify import classify3
from .contraction import (ContractionSpec, contract_diagonal, enumerate_diagonal, obstruction_check,
                          is_unimodular, solve_pattern, validate_exponents)
from .deformation import (DeformationFamily, TwoCochain, derivation_dim, h2, is_two_cocycle,
                          reverse_family_from_contraction, verify_family)
from .exact import Divergent
from .finite import FiniteLieAlgebra, derived_and_center
from .lie_format import parse_algebra, vector_from_text
from .parse import ExprSyntaxError


class UsageError(Exception):
    pass


# --- argument helpers -------------------------------------------------------

def load_algebra(ref: str, verify: bool = True) -> FiniteLieAlgebra:
    path = Path(ref)
    if path.is_file():
        return parse_algebra(path.read_text(encoding="utf-8"), verify=verify)
    return catalog.resolve(ref)


def parse_assignments(text: str) -> dict:
    """``a=0,b=1/2`` -> ``{"a": "0", "b": "1/2"}``."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise UsageError(f"expected name=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_spec(exp: str, pre_change: str | None) -> ContractionSpec:
    try:
        exps = {k: Fraction(v) for k, v in parse_assignments(exp).items()}
    except ValueError as e:
        raise UsageError(f"bad exponent list {exp!r}: {e}") from None
    return ContractionSpec(exps, pre_change or "identity")


def parse_cochain(text: str, g: FiniteLieAlgebra) -> TwoCochain:
    """``[a,b]=expr;[c,d]=expr`` as a 2-cochain on ``g``."""
    values = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        lhs, _, rhs = part.partition("=")
        lhs = lhs.strip()
        if not (lhs.startswith("[") and lhs.endswith("]") and "," in lhs):
            raise UsageError(f"expected [a,b]=expr, got {part!r}")
        a, b = (s.strip() for s in lhs[1:-1].split(","))
        values[(a, b)] = vector_from_text(rhs, g)
    return TwoCochain(g, values)


def load_template(ref: str) -> graded.BracketTemplate:
    """``witt``, ``kn-witt``, ``loop-ALG``, ``affine-ALG``, ``kn-affine-ALG`` or a JSON file."""
    path = Path(ref)
    if path.is_file():
        return graded.BracketTemplate.from_json(json.loads(path.read_text(encoding="utf-8")))
    fixture = catalog.fixture_dir() / f"{ref}.json"
    if fixture.is_file() and "rules" in (data := json.loads(fixture.read_text(encoding="utf-8"))):
        return graded.BracketTemplate.from_json(data)
    name = ref.replace("_", "-")
    if name == "witt":
        return graded.witt()
    if name == "kn-witt":
        return graded.kn_witt()
    for prefix, build in (("kn-affine-", lambda g, gr: graded.kn_affinize(g, grading=gr)),
                          ("affine-", lambda g, gr: graded.affinize(g, grading=gr)),
                          ("loop-", lambda g, gr: graded.loop(g, grading=gr))):
        if name.startswith(prefix):
            g = load_algebra(ref[len(prefix):])
            grading = graded.SL2_Z3 if tuple(g.basis) == ("h", "e", "f") else None
            return build(g, grading)
    raise UsageError(f"unknown template {ref!r}")


def parse_fine(text: str) -> tuple:
    """``n``, ``2*n+1``, ``0`` -> (slope, shift)."""
    a = graded.Affine.parse(text)
    extra = set(a.coeffs) - {"n"}
    if extra:
        raise UsageError(f"fine exponent must be affine in n, got {text!r}")
    return a.coeffs.get("n", Fraction(0)), a.const


def parse_class_map(text: str, T: graded.BracketTemplate) -> graded.GradedExponentMap:
    """``00=0,10=1,-10=1`` (class names as in ``class_constraints``)."""
    G = T.grade_group
    names = {}
    for f in T.all_families:
        for r in range(max(T.modulus, 2)):
            g = T.grade(f, r)
            names[G.name(g)] = g
    table = {}
    for k, v in parse_assignments(text).items():
        if k not in names:
            raise UsageError(f"unknown class {k!r}; known: {sorted(names)}")
        try:
            table[names[k]] = Fraction(v)
        except ValueError:
            table[names[k]] = v
    return graded.GradedExponentMap(classes=table)


# --- payload helpers --------------------------------------------------------

def algebra_payload(g: FiniteLieAlgebra) -> dict:
    return {"name": g.name, "basis": list(g.basis), "params": sorted(g.params),
            "brackets": {f"[{a},{b}]": v.format(g.basis) for (a, b), v in g.brackets().items()}}


def _term_text(t: graded.Term, central) -> str:
    target = t.target if t.target == central else (
        f"{t.target}_(n+m{t.offset:+d})" if t.offset else f"{t.target}_(n+m)")
    s = f"({t.coeff})*{target}"
    if t.when:
        a, b, c = t.when
        s += f" if {a}*n+{b}*m+{c}=0"
    if t.eps != graded.ZERO_AFF:
        s += f" * eps^({t.eps})"
    return s


def template_payload(T: graded.BracketTemplate) -> dict:
    rules = {}
    for (x, y, rx, ry), r in sorted(T.rules.items()):
        if T.families.index(x) > T.families.index(y) or not r.terms:
            continue
        key = f"[{x}_n,{y}_m] n={rx},m={ry} mod {T.modulus}"
        rules[key] = " + ".join(_term_text(t, T.central) for t in r.terms)
    return {"name": T.name, "families": list(T.families), "central": T.central,
            "modulus": T.modulus, "params": list(T.params), "rules": rules}


def render_pretty(obj, indent: int = 0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return pad + "(none)"
        width = max(len(str(k)) for k in obj)
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(render_pretty(v, indent + 2))
            else:
                lines.append(f"{pad}{str(k).ljust(width)} = {_scalar_text(v)}")
        return "\n".join(lines)
    if isinstance(obj, list):
        if not obj:
            return pad + "(none)"
        return "\n".join(render_pretty(v, indent) if isinstance(v, (dict, list))
                         else f"{pad}- {_scalar_text(v)}" for v in obj)
    return pad + _scalar_text(obj)


def _scalar_text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "-"
    if isinstance(v, (dict, list)):
        return "(none)"
    return str(v)


# --- commands ---------------------------------------------------------------

def cmd_check(args):
    g = load_algebra(args.algebra, verify=not args.no_verify)
    out = algebra_payload(g)
    out["dim"] = g.dim
    out["verified"] = not args.no_verify
    return out, []


def cmd_classify(args):
    g = load_algebra(args.algebra)
    return {"label": str(classify3(g))}, []


def cmd_invariants(args):
    g = load_algebra(args.algebra)
    rec = derived_and_center(g).as_dict()
    rec["derivation_dim"] = derivation_dim(g)
    rec["unimodular"] = is_unimodular(g)
    diags = [f"ranks drop on {p}" for p in rec.get("special_locus", [])]
    return rec, diags


def cmd_contract(args):
    g = load_algebra(args.algebra)
    spec = parse_spec(args.exp, args.pre_change)
    report = validate_exponents(g, spec)
    out = {"spec": spec.to_json(), "validation": report.as_dict()}
    if not report.valid:
        raise DomainError("exponent sums are negative on some entries", out)
    h = contract_diagonal(g, spec)
    out["algebra"] = algebra_payload(h)
    if args.classify:
        out["label"] = str(classify3(h))
    if args.target:
        out["obstructions"] = obstruction_check(g, load_algebra(args.target))
    return out, []


def cmd_enumerate(args):
    g = load_algebra(args.algebra)
    degs = enumerate_diagonal(g, bound=args.bound, max_den=args.max_den, jobs=args.jobs)
    return {"search": {"bound": args.bound, "max_den": args.max_den},
            "degenerations": [{"label": d.label, "witness": d.spec.to_json()} for d in degs]}, []


def cmd_solve_pattern(args):
    data = json.loads(Path(args.pattern).read_text(encoding="utf-8")) if Path(args.pattern).is_file() \
        else json.loads(args.pattern)
    pattern = data.get("pattern", data)
    try:
        target = load_algebra(args.target)
    except (FileNotFoundError, ValueError):
        target = graded.class_constraints(load_template(args.target))
    res = solve_pattern(target, pattern)
    return res.as_dict(), []


def cmd_h2(args):
    g = load_algebra(args.algebra)
    rep = h2(g, generic=args.generic)
    return rep.as_dict(), [f"ranks drop on {p}" for p in rep.special_locus]


def cmd_cocycle(args):
    g = load_algebra(args.algebra)
    F = parse_cochain(args.cochain, g)
    return {"cochain": F.as_dict(), "is_cocycle": is_two_cocycle(g, F)}, []


def cmd_family(args):
    g = load_algebra(args.algebra)
    fam = DeformationFamily(g, [parse_cochain(layer, g) for layer in args.layer])
    return {"family": fam.as_dict(), "report": verify_family(fam).as_dict()}, []


def cmd_reverse(args):
    g = load_algebra(args.algebra)
    spec = parse_spec(args.exp, args.pre_change)
    fam = reverse_family_from_contraction(g, spec)
    return {"family": fam.as_dict(), "report": verify_family(fam).as_dict()}, []


def cmd_template(args):
    T = load_template(args.template)
    diags = []
    out = {}
    if args.jacobi:
        defects = graded.template_jacobi_window(T, args.jacobi)
        out["jacobi_window"] = args.jacobi
        out["jacobi_defects"] = {" ".join(map(str, k)): {str(e): str(c) for e, c in v.items()}
                                 for k, v in defects.items()}
    if args.contract_fine is not None:
        slope, shift = parse_fine(args.contract_fine)
        E = graded.GradedExponentMap.fine_map({f: (slope, shift) for f in T.families})
        T = graded.graded_contract_template(T, E)
    if args.limit:
        T = graded.template_limit(T)
    if args.bracket:
        x, y = (graded.Element(s.split("_")[0], int(s.split("_", 1)[1])) for s in args.bracket.split(","))
        out["bracket"] = {str(k): str(v) for k, v in graded.template_bracket(T, x, y).items()}
    if args.equal:
        other = load_template(args.equal)
        ren = parse_assignments(args.rename) if args.rename else None
        if ren is None and len(T.families) == len(other.families) == 1:
            ren = {other.families[0]: T.families[0]}
        out["equal"] = graded.template_equal(T, other, args.window, ren)
    out["template"] = template_payload(T)
    return out, diags


def cmd_template_contract(args):
    T = load_template(args.template)
    E = parse_class_map(args.classes, T)
    eT = graded.graded_contract_template(T, E)
    out = {"exponents": {f"[{x},{y}] n={rx},m={ry}": v
                         for (x, y, rx, ry), v in graded.rule_exponents(eT).items()
                         if T.families.index(x) <= T.families.index(y)}}
    if args.limit:
        out["template"] = template_payload(graded.template_limit(eT))
    return out, []


def cmd_commute_check(args):
    g = load_algebra(args.algebra)
    spec = parse_spec(args.exp, args.pre_change)
    ok = graded.commute_check(g, spec, central=not args.no_central, N_=args.window)
    return {"spec": spec.to_json(), "central": not args.no_central, "commute": ok}, []


# --- dispatch ---------------------------------------------------------------

class DomainError(Exception):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


DOMAIN_ERRORS = (ValueError, LookupError, ArithmeticError, FileNotFoundError, ExprSyntaxError,
                 DomainError, Divergent)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liecontract", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--pretty", action="store_true", help="plaintext instead of JSON")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, algebra=True):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS)
        if algebra:
            s.add_argument("algebra", help=".lie file or fixture name (e.g. sl2, r3lambda:2)")
        s.set_defaults(func=func)
        return s

    s = add("check", cmd_check, "parse an algebra file and verify Jacobi")
    s.add_argument("--no-verify", action="store_true")
    add("classify", cmd_classify, "label in the three-dimensional list")
    add("invariants", cmd_invariants, "derived series, center, Killing rank, derivations")
    for name, func, help_ in (("contract", cmd_contract, "diagonal contraction"),
                              ("reverse", cmd_reverse, "jump deformation reversing a contraction"),
                              ("commute-check", cmd_commute_check, "affinize and contract in both orders")):
        s = add(name, func, help_)
        s.add_argument("--exp", required=True, help="exponents, e.g. h=0,e=1,f=1")
        s.add_argument("--pre-change", default="identity", help="identity, perm:..., shear:a+b, sl2-cartan")
        if name == "contract":
            s.add_argument("--classify", action="store_true")
            s.add_argument("--target", help="also list obstructions against this algebra")
        if name == "commute-check":
            s.add_argument("--no-central", action="store_true")
            s.add_argument("--window", type=int, default=4)
    s = add("enumerate", cmd_enumerate, "diagonal degenerations over an exponent grid")
    s.add_argument("--bound", type=int, default=2)
    s.add_argument("--max-den", type=int, default=2)
    s.add_argument("--jobs", type=int, default=1)
    s = add("solve-pattern", cmd_solve_pattern, "KEEP/KILL/FREE feasibility", algebra=False)
    s.add_argument("target", help="algebra or template (e.g. kn-affine-sl2)")
    s.add_argument("--pattern", required=True, help="JSON file or inline JSON")
    s = add("h2", cmd_h2, "second adjoint cohomology")
    s.add_argument("--generic", action="store_true", help="generic ranks for symbolic parameters")
    s = add("cocycle", cmd_cocycle, "test a 2-cochain for the cocycle condition")
    s.add_argument("--cochain", required=True, help="e.g. '[e,f]=h;[h,e]=0'")
    s = add("family", cmd_family, "check a polynomial deformation family")
    s.add_argument("--layer", action="append", default=[], help="t^k layer as a cochain; repeatable")
    s = add("template", cmd_template, "infinite-dimensional bracket templates", algebra=False)
    s.add_argument("template", help="witt, kn-witt, loop-ALG, affine-ALG, kn-affine-ALG or JSON")
    s.add_argument("--contract-fine", metavar="E", help="fine exponent a*n+b for every family")
    s.add_argument("--limit", action="store_true")
    s.add_argument("--equal", metavar="TEMPLATE")
    s.add_argument("--rename", help="family renaming applied to the --equal template, e.g. l=V")
    s.add_argument("--window", type=int, default=4)
    s.add_argument("--jacobi", type=int, metavar="N")
    s.add_argument("--bracket", help="e.g. V_2,V_4")
    s = add("template-contract", cmd_template_contract, "class-map graded contraction", algebra=False)
    s.add_argument("template")
    s.add_argument("--classes", required=True, help="class exponents, e.g. 0=0,1=1")
    s.add_argument("--limit", action="store_true")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    report = {"command": " ".join(argv), "result": None, "diagnostics": []}
    status = 0
    try:
        result, diags = args.func(args)
        report["result"], report["diagnostics"] = result, diags
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"liecontract: error: {e}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as e:
        status = 1
        report["result"] = getattr(e, "payload", None)
        report["diagnostics"] = [f"{type(e).__name__}: {e}"]
    if args.pretty:
        print(render_pretty(report["result"]))
        for d in report["diagnostics"]:
            print(f"! {d}")
    else:
        print(json.dumps(report, indent=2, ensure_ascii=False))
    return status


if __name__ == "__main__":
    sys.exit(main())
