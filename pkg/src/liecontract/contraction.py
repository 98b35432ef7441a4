"""Diagonal and curve contractions of finite-dimensional Lie algebras.

A diagonal contraction scales basis vector ``x_i`` by ``eps^{n_i}``.  The
entry ``C^k_ij`` then picks up ``eps^{n_i + n_j - n_k}``: it survives when the
exponent is zero, disappears when positive, and makes the limit diverge
when negative.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Mapping, Sequence

from . import fme, linalg
from .classify import classify3, isomorphic3
from .exact import ONE, GaussianRational, Scalar, laurent_limit
from .finite import FiniteLieAlgebra, derived_and_center

KEEP, KILL, FREE = "KEEP", "KILL", "FREE"


class InvalidSpec(ValueError):
    pass


class SingularCurve(ArithmeticError):
    pass


# --- basis-change fixtures --------------------------------------------------

def _sl2_cartan_matrix():
    # columns: h = i*x3, e = -i*x1 + x2, f = -i*x1 - x2 in the cyclic basis
    i = GaussianRational(0, 1)
    return [[0, -i, -i],
            [0, 1, -1],
            [i, 0, 0]]


def pre_change_matrix(name: str | None, g: FiniteLieAlgebra):
    """Matrix for a named basis change.

    ``identity``; ``perm:a,b,c`` (new i-th vector is the named old one);
    ``shear:a+b`` (replace ``a`` by ``a + b``); ``sl2-cartan`` (cyclic sl2
    basis to Cartan basis, three dimensions only).
    """
    n = g.dim
    if name in (None, "", "identity"):
        return linalg.identity(n)
    if name.startswith("perm:"):
        order = name[5:].split(",")
        if sorted(order) != sorted(g.basis):
            raise InvalidSpec(f"{name} is not a permutation of {g.basis}")
        P = linalg.zeros(n, n)
        for col, sym in enumerate(order):
            P[g.index[sym]][col] = ONE
        return P
    if name.startswith("shear:"):
        a, _, b = name[6:].partition("+")
        if a not in g.index or b not in g.index or a == b:
            raise InvalidSpec(f"bad shear {name}")
        P = linalg.identity(n)
        P[g.index[b]][g.index[a]] = ONE
        return P
    if name == "sl2-cartan":
        if n != 3:
            raise InvalidSpec("sl2-cartan needs dimension 3")
        return linalg.as_matrix(_sl2_cartan_matrix())
    raise InvalidSpec(f"unknown basis change {name!r}")


def fixture_changes(g: FiniteLieAlgebra) -> list:
    names = ["identity"]
    for perm in permutations(g.basis):
        if perm != g.basis:
            names.append("perm:" + ",".join(perm))
    for a in g.basis:
        for b in g.basis:
            if a != b:
                names.append(f"shear:{a}+{b}")
    if g.dim == 3:
        names.append("sl2-cartan")
    return names


# --- specs and reports ------------------------------------------------------

@dataclass(frozen=True)
class ContractionSpec:
    exponents: Mapping[str, Fraction]
    pre_change: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "exponents",
                           {k: Fraction(v) for k, v in self.exponents.items()})

    @classmethod
    def of(cls, pre_change="identity", **exponents) -> "ContractionSpec":
        return cls(exponents, pre_change)

    def check_covers(self, g: FiniteLieAlgebra):
        if set(self.exponents) != set(g.basis):
            raise InvalidSpec(f"exponents {sorted(self.exponents)} do not match basis {list(g.basis)}")

    def to_json(self) -> dict:
        return {"exponents": {k: str(v) for k, v in self.exponents.items()},
                "pre_change": self.pre_change or "identity"}

    @classmethod
    def from_json(cls, data) -> "ContractionSpec":
        if isinstance(data, str):
            data = json.loads(data)
        return cls({k: Fraction(v) for k, v in data["exponents"].items()},
                   data.get("pre_change", "identity"))

    def __hash__(self):
        return hash((tuple(sorted(self.exponents.items())), self.pre_change))


@dataclass
class ContractionReport:
    kept: set = field(default_factory=set)
    dropped: set = field(default_factory=set)
    violated: set = field(default_factory=set)

    @property
    def valid(self) -> bool:
        return not self.violated

    def as_dict(self):
        def fmt(s):
            return sorted(f"[{a},{b}]->{c}" for a, b, c in s)
        return {"valid": self.valid, "kept": fmt(self.kept), "dropped": fmt(self.dropped),
                "violated": fmt(self.violated)}


def prepared(g: FiniteLieAlgebra, spec: ContractionSpec) -> FiniteLieAlgebra:
    spec.check_covers(g)
    if spec.pre_change in (None, "", "identity"):
        return g
    return g.change_basis(pre_change_matrix(spec.pre_change, g))


def entry_exponent(g, spec, i, j, k) -> Fraction:
    n = spec.exponents
    b = g.basis
    return n[b[i]] + n[b[j]] - n[b[k]]


def validate_exponents(g: FiniteLieAlgebra, spec: ContractionSpec) -> ContractionReport:
    h = prepared(g, spec)
    rep = ContractionReport()
    for (i, j, k), _ in h.entries():
        s = entry_exponent(h, spec, i, j, k)
        key = (h.basis[i], h.basis[j], h.basis[k])
        (rep.kept if s == 0 else rep.dropped if s > 0 else rep.violated).add(key)
    return rep


def contract_diagonal(g: FiniteLieAlgebra, spec: ContractionSpec) -> FiniteLieAlgebra:
    g.require_verified()
    h = prepared(g, spec)
    tensor = {}
    for (i, j, k), c in h.entries():
        s = entry_exponent(h, spec, i, j, k)
        if s < 0:
            raise InvalidSpec(f"exponent sum {s} < 0 on [{h.basis[i]},{h.basis[j]}]->{h.basis[k]}")
        if s == 0:
            tensor.setdefault((i, j), {})[k] = c
    out = FiniteLieAlgebra(h.basis, tensor, params=h.params)
    defect = out.jacobi_defect()
    assert not defect, f"contraction broke the Jacobi identity: {defect}"
    out._verified = True
    return out


def contract_general(g: FiniteLieAlgebra, U) -> FiniteLieAlgebra:
    """Limit ``eps -> 0`` of ``U^-1 [U x, U y]`` for a curve ``U`` in ``eps``."""
    g.require_verified()
    U = linalg.as_matrix(U)
    if linalg.det(U).is_zero():
        raise SingularCurve("det U vanishes identically")
    h = g.change_basis(U)
    tensor = {}
    for (i, j, k), c in h.entries():
        where = f"[{h.basis[i]},{h.basis[j]}]->{h.basis[k]}"
        lim = laurent_limit(c, where)
        if lim:
            tensor.setdefault((i, j), {})[k] = lim
    out = FiniteLieAlgebra(g.basis, tensor, params=g.params)
    out.verify()
    return out


def diagonal_curve(g: FiniteLieAlgebra, exponents: Mapping[str, int]):
    n = g.dim
    U = linalg.zeros(n, n)
    for s, e in exponents.items():
        U[g.index[s]][g.index[s]] = Scalar.eps(int(e))
    return U


# --- enumeration ------------------------------------------------------------

@dataclass(frozen=True)
class Degeneration:
    label: str
    spec: ContractionSpec
    algebra: FiniteLieAlgebra = field(compare=False, hash=False)


def _label_of(h: FiniteLieAlgebra) -> str:
    if h.dim == 3:
        return str(classify3(h))
    return "tensor:" + (h.tensor_key() or "abelian")


def _scan_fixture(args):
    g, change, values = args
    found = {}
    try:
        h = prepared(g, ContractionSpec({s: 0 for s in g.basis}, change))
    except (InvalidSpec, linalg.SingularMatrix):
        return found
    entries = list(h.entries())
    seen_tensors = set()
    for combo in product(values, repeat=g.dim):
        ex = dict(zip(h.basis, combo))
        kept = []
        ok = True
        for (i, j, k), _ in entries:
            s = ex[h.basis[i]] + ex[h.basis[j]] - ex[h.basis[k]]
            if s < 0:
                ok = False
                break
            if s == 0:
                kept.append((i, j, k))
        if not ok:
            continue
        key = tuple(kept)
        if key in seen_tensors:
            continue
        seen_tensors.add(key)
        spec = ContractionSpec(ex, change)
        out = contract_diagonal(g, spec)
        label = _label_of(out)
        if label not in found:
            found[label] = (spec, out)
    return found


def enumerate_diagonal(g: FiniteLieAlgebra, bound: int = 2, max_den: int = 2,
                       changes: Sequence[str] | None = None, jobs: int = 1) -> list:
    """Distinct diagonal degenerations of ``g`` with one witness each.

    Exponents range over ``[-bound, bound]`` with denominators up to
    ``max_den``; basis changes come from ``fixture_changes`` unless given.
    The result depends only on the inputs, not on ``jobs``.
    """
    if g.dim > 4:
        raise ValueError("enumeration is limited to dimension <= 4")
    g.require_verified()
    values = fme.grid_values(bound, max_den)
    changes = list(changes) if changes is not None else fixture_changes(g)
    tasks = [(g, c, values) for c in changes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_scan_fixture, tasks))
    else:
        results = [_scan_fixture(t) for t in tasks]
    merged: dict = {}
    for found in results:
        for label, (spec, out) in found.items():
            if label not in merged:
                merged[label] = Degeneration(label, spec, out)
    return sorted(merged.values(), key=lambda d: d.label)


# --- pattern solving --------------------------------------------------------

def entry_key(a: str, b: str, c: str) -> str:
    return f"{a},{b}->{c}"


def finite_constraints(g: FiniteLieAlgebra) -> dict:
    """``{entry key: {symbol: coefficient}}`` of the exponent sums."""
    out = {}
    for (i, j, k), _ in g.entries():
        a, b, c = g.basis[i], g.basis[j], g.basis[k]
        coeffs: dict = {}
        for s, m in ((a, 1), (b, 1), (c, -1)):
            coeffs[s] = coeffs.get(s, 0) + m
        out[entry_key(a, b, c)] = {s: Fraction(m) for s, m in coeffs.items()}
    return out


@dataclass
class PatternResult:
    feasible: bool
    exponents: dict | None = None
    certificate: fme.Infeasible | None = None
    constraints: list = field(default_factory=list)

    def as_dict(self):
        if self.feasible:
            return {"feasible": True, "exponents": {k: str(v) for k, v in sorted(self.exponents.items())}}
        cert = self.certificate
        return {"feasible": False,
                "certificate": {
                    "multipliers": {cert.constraints[i].label: str(m)
                                    for i, m in sorted(cert.multipliers.items())},
                    "derived": f"0 >= {cert.rhs}",
                    "summary": cert.describe()}}


def pattern_constraints(forms: Mapping[str, Mapping[str, Fraction]], pattern: Mapping[str, str],
                        extra: Sequence[fme.Constraint] = ()) -> list:
    missing = set(forms) - set(pattern)
    unknown = set(pattern) - set(forms)
    if missing:
        raise ValueError(f"pattern does not cover {sorted(missing)}")
    if unknown:
        raise ValueError(f"pattern names unknown entries {sorted(unknown)}")
    cons = []
    for key in sorted(forms):
        mode = pattern[key].upper()
        form = forms[key]
        if mode == KEEP:
            cons.append(fme.Constraint(form, "==", Fraction(0), f"KEEP {key}"))
        elif mode == KILL:
            cons.append(fme.Constraint(form, ">=", Fraction(1), f"KILL {key}"))
        elif mode == FREE:
            cons.append(fme.Constraint(form, ">=", Fraction(0), f"FREE {key}"))
        else:
            raise ValueError(f"unknown pattern mode {mode!r}")
    return cons + list(extra)


def solve_pattern(target, pattern: Mapping[str, str], extra: Sequence[fme.Constraint] = (),
                  variables: Sequence[str] | None = None) -> PatternResult:
    """Exact feasibility of a KEEP/KILL/FREE pattern.

    ``target`` is a ``FiniteLieAlgebra`` or a ``{key: linear form}`` mapping
    such as ``graded.class_constraints`` returns; KILL is encoded as ``sum >= 1``, which
    loses nothing because the constraint cone is closed under scaling.
    """
    if isinstance(target, FiniteLieAlgebra):
        forms = finite_constraints(target)
        variables = list(target.basis)
    else:
        forms = dict(target)
    cons = pattern_constraints(forms, pattern, extra)
    res = fme.solve(cons, variables)
    if isinstance(res, fme.Infeasible):
        assert res.check()
        return PatternResult(False, certificate=res, constraints=cons)
    for key, form in forms.items():
        s = sum((c * res.get(v, 0) for v, c in form.items()), Fraction(0))
        mode = pattern[key].upper()
        assert (s == 0) if mode == KEEP else (s > 0) if mode == KILL else (s >= 0)
    return PatternResult(True, exponents=res, constraints=cons)


# --- obstructions -----------------------------------------------------------

def is_unimodular(g: FiniteLieAlgebra) -> bool:
    return all(not linalg.trace(g.ad_matrix(i)) for i in range(g.dim))


def obstruction_check(g: FiniteLieAlgebra, target: FiniteLieAlgebra) -> list:
    """Necessary conditions for ``g`` to contract to ``target`` that fail.

    Contraction can only shrink ``[g, g]`` and the Killing rank, grow the
    center, and grow the derivation algebra (strictly, for a proper
    contraction in dimension 3).  Unimodularity (``tr ad x = 0`` for all
    ``x``) is a closed condition and so passes to every contraction.
    """
    from .deformation import derivation_dim

    if g.dim != target.dim:
        raise ValueError("dimensions differ")
    a, b = derived_and_center(g), derived_and_center(target)
    out = []
    if b.derived_dims[0] > a.derived_dims[0]:
        out.append(f"dim[g',g'] = {b.derived_dims[0]} > dim[g,g] = {a.derived_dims[0]}")
    if b.center_dim < a.center_dim:
        out.append(f"center_dim(g') = {b.center_dim} < center_dim(g) = {a.center_dim}")
    if b.killing_rank > a.killing_rank:
        out.append(f"killing_rank(g') = {b.killing_rank} > killing_rank(g) = {a.killing_rank}")
    if is_unimodular(g) and not is_unimodular(target):
        out.append("g is unimodular but g' is not")
    da, db = derivation_dim(g), derivation_dim(target)
    proper = g.dim == 3 and not isomorphic3(g, target)
    if db < da or (proper and db == da):
        rel = "<=" if proper else "<"
        out.append(f"dim Der(g') = {db} {rel} dim Der(g) = {da}")
    return out
