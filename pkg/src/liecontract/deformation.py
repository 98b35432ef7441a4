"""Chevalley-Eilenberg cochains with adjoint coefficients, H^2 and deformation families.

Sign convention for the differentials::

    (d phi)(x, y)  = [x, phi y] - [y, phi x] - phi[x, y]
    (d F)(x, y, z) = [x, F(y,z)] - [y, F(x,z)] + [z, F(x,y)]
                     - F([x,y], z) + F([x,z], y) - F([y,z], x)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from . import linalg
from .classify import classify3
from .exact import ONE, ZERO, Poly, Scalar, to_scalar
from .finite import FiniteLieAlgebra, ParameterSpecializationNeeded, Vector

T = "t"


class NotALieFamily(ValueError):
    def __init__(self, triple, power, coefficient):
        self.triple = triple
        self.power = power
        self.coefficient = coefficient
        super().__init__(f"Jacobi fails on {triple}: coefficient of t^{power} is {coefficient}")


class TwoCochain:
    """Alternating bilinear map g x g -> g given on basis pairs ``a`` before ``b``."""

    def __init__(self, g: FiniteLieAlgebra, values: Mapping | None = None):
        self.g = g
        vals = {}
        for (a, b), v in (values or {}).items():
            if not isinstance(v, Vector):
                v = Vector(v)
            i, j = g.index[a], g.index[b]
            if i == j:
                if v:
                    raise ValueError("alternating cochain must vanish on (x, x)")
                continue
            if i > j:
                a, b, v = b, a, -v
            if v:
                vals[(a, b)] = v
        self.values = vals

    def __call__(self, a: str, b: str) -> Vector:
        if (a, b) in self.values:
            return self.values[(a, b)]
        if (b, a) in self.values:
            return -self.values[(b, a)]
        return Vector()

    def coords(self) -> list:
        g = self.g
        out = []
        for i, j in combinations(range(g.dim), 2):
            v = self(g.basis[i], g.basis[j])
            out.extend(v[s] for s in g.basis)
        return out

    @classmethod
    def from_coords(cls, g, coords) -> "TwoCochain":
        n = g.dim
        vals = {}
        for p, (i, j) in enumerate(combinations(range(n), 2)):
            vec = {g.basis[k]: coords[p * n + k] for k in range(n) if coords[p * n + k]}
            if vec:
                vals[(g.basis[i], g.basis[j])] = vec
        return cls(g, vals)

    def as_dict(self):
        return {f"[{a},{b}]": v.format(self.g.basis) for (a, b), v in sorted(
            self.values.items(), key=lambda kv: (self.g.index[kv[0][0]], self.g.index[kv[0][1]]))}

    def __repr__(self):
        return f"TwoCochain({self.as_dict()})"


def _pairs(n):
    return list(combinations(range(n), 2))


def _triples(n):
    return list(combinations(range(n), 3))


def _d1_column(g: FiniteLieAlgebra, phi) -> list:
    """Coordinates of d(phi) for phi given as a matrix (columns = images)."""
    n = g.dim
    E = linalg.identity(n)
    img = [[phi[r][c] for r in range(n)] for c in range(n)]
    out = []
    for i, j in _pairs(n):
        a = g.bracket_coords(E[i], img[j])
        b = g.bracket_coords(E[j], img[i])
        br = g.bracket_coords(E[i], E[j])
        c = linalg.matvec(phi, br)
        out.extend(x - y - z for x, y, z in zip(a, b, c))
    return out


def _apply_cochain(g, F_coords, u, v) -> list:
    """F(u, v) for coordinate vectors, F given by C^2 coordinates."""
    n = g.dim
    out = [ZERO] * n
    for p, (i, j) in enumerate(_pairs(n)):
        w = u[i] * v[j] - u[j] * v[i] if (u[i] or u[j]) and (v[i] or v[j]) else ZERO
        if w:
            for k in range(n):
                c = F_coords[p * n + k]
                if c:
                    out[k] = out[k] + w * c
    return out


def _d2_column(g, F) -> list:
    n = g.dim
    E = linalg.identity(n)
    out = []
    for i, j, l in _triples(n):
        x, y, z = E[i], E[j], E[l]
        terms = [
            (1, g.bracket_coords(x, _apply_cochain(g, F, y, z))),
            (-1, g.bracket_coords(y, _apply_cochain(g, F, x, z))),
            (1, g.bracket_coords(z, _apply_cochain(g, F, x, y))),
            (-1, _apply_cochain(g, F, g.bracket_coords(x, y), z)),
            (1, _apply_cochain(g, F, g.bracket_coords(x, z), y)),
            (-1, _apply_cochain(g, F, g.bracket_coords(y, z), x)),
        ]
        s = [ZERO] * n
        for sign, t in terms:
            s = [a + b if sign > 0 else a - b for a, b in zip(s, t)]
        out.extend(s)
    return out


def cochain_complex(g: FiniteLieAlgebra):
    """Matrices ``(d1, d2)`` of C^1 -> C^2 -> C^3 in the pair/triple bases.

    C^1 coordinates are ordered ``(source j, target k) -> j * N + k``.
    """
    g.require_verified()
    n = g.dim
    c1 = n * n
    c2 = n * len(_pairs(n))
    cols1 = []
    for j in range(n):
        for k in range(n):
            phi = linalg.zeros(n, n)
            phi[k][j] = ONE
            cols1.append(_d1_column(g, phi))
    cols2 = []
    for idx in range(c2):
        F = [ZERO] * c2
        F[idx] = ONE
        cols2.append(_d2_column(g, F))
    c3 = n * len(_triples(n))
    d1 = [[cols1[c][r] for c in range(c1)] for r in range(c2)]
    d2 = [[cols2[c][r] for c in range(c2)] for r in range(c3)]
    return d1, d2


@dataclass
class CohomologyReport:
    dim_Z2: int
    dim_B2: int
    dim_H2: int
    representatives: list = field(default_factory=list)
    special_locus: tuple = ()

    @property
    def infinitesimally_rigid(self) -> bool:
        return self.dim_H2 == 0

    def as_dict(self):
        return {"dim_Z2": self.dim_Z2, "dim_B2": self.dim_B2, "dim_H2": self.dim_H2,
                "infinitesimally_rigid": self.infinitesimally_rigid,
                "representatives": [r.as_dict() for r in self.representatives],
                "special_locus": [str(p) for p in self.special_locus]}


def _rank_locus(m):
    if not m or not m[0]:
        return 0, []
    return linalg.rank_with_locus(m)


def h2(g: FiniteLieAlgebra, generic: bool = False) -> CohomologyReport:
    g.require_verified()
    n = g.dim
    d1, d2 = cochain_complex(g)
    c2 = n * len(_pairs(n))
    r1, l1 = _rank_locus(d1)
    r2, l2 = _rank_locus(d2)
    locus = tuple(l1 + l2)
    if locus and not generic:
        raise ParameterSpecializationNeeded("a differential rank", list(locus))
    dim_z2 = c2 - r2
    reps = []
    if c2:
        Z = linalg.nullspace(d2, c2) if d2 else linalg.nullspace([], c2)
        span = linalg.span_basis(linalg.transpose(d1)) if d1 and d1[0] else []
        for z in Z:
            if linalg.rank(span + [z]) > len(span):
                span = span + [z]
                reps.append(TwoCochain.from_coords(g, z))
    rep = CohomologyReport(dim_z2, r1, dim_z2 - r1, reps, locus)
    assert len(reps) == rep.dim_H2
    return rep


def is_two_cocycle(g: FiniteLieAlgebra, F: TwoCochain) -> bool:
    g.require_verified()
    return not any(_d2_column(g, F.coords()))


def derivation_dim(g: FiniteLieAlgebra) -> int:
    d1, _ = cochain_complex(g)
    n = g.dim
    if not d1 or not d1[0]:
        return n * n
    return n * n - linalg.rank(d1)


# --- one-parameter families -------------------------------------------------

class DeformationFamily:
    """Bracket ``F0 + t F1 + t^2 F2 + ...`` on the base algebra's basis.

    ``reparam`` records a substitution ``t -> t^reparam`` applied when the
    family came from fractional contraction exponents.
    """

    def __init__(self, base: FiniteLieAlgebra, layers: Sequence[TwoCochain], reparam: int = 1):
        self.base = base
        self.layers = list(layers)
        self.reparam = reparam

    def algebra(self) -> FiniteLieAlgebra:
        g = self.base
        tensor = {}
        for (i, j, k), c in g.entries():
            tensor.setdefault((i, j), {})[k] = c
        t = Scalar.var(T)
        for power, F in enumerate(self.layers, start=1):
            tp = t ** power
            for (a, b), v in F.values.items():
                i, j = g.index[a], g.index[b]
                for s, c in v.items():
                    k = g.index[s]
                    col = tensor.setdefault((i, j), {})
                    col[k] = col.get(k, ZERO) + tp * c
        return FiniteLieAlgebra(g.basis, tensor, params=g.params | {T})

    def at(self, value) -> FiniteLieAlgebra:
        return self.algebra().subs({T: to_scalar(value).as_poly()})

    def as_dict(self):
        return {"base": {f"[{a},{b}]": v.format(self.base.basis) for (a, b), v in self.base.brackets().items()},
                "layers": [F.as_dict() for F in self.layers],
                "reparam": self.reparam}


@dataclass
class FamilyReport:
    is_lie: bool
    generic_label: str | None = None
    label_at_zero: str | None = None
    sampled: dict = field(default_factory=dict)
    jump: bool | None = None
    invariants: dict = field(default_factory=dict)

    def as_dict(self):
        return {"is_lie": self.is_lie, "generic_label": self.generic_label,
                "label_at_zero": self.label_at_zero, "sampled": self.sampled,
                "jump": self.jump, "invariants": self.invariants}


SAMPLES = (Fraction(1), Fraction(2), Fraction(-1), Fraction(1, 3), Fraction(-5, 2))


def verify_family(fam: DeformationFamily, samples=SAMPLES) -> FamilyReport:
    """Jacobi identity in t, then classes at generic t, t = 0 and sampled t."""
    G = fam.algebra()
    defect = G.jacobi_defect()
    if defect:
        triple, vec = next(iter(defect.items()))
        for s, c in vec.items():
            p = c.as_poly()
            lo = p.min_degree(T)
            raise NotALieFamily(triple, lo, f"{p.coefficient(T, lo)} on {s}")
    G._verified = True
    rep = FamilyReport(True)
    g0 = G.subs({T: Poly.const(0)})
    if G.dim == 3:
        generic = classify3(G)
        rep.generic_label = str(generic)
        rep.label_at_zero = str(classify3(g0))
        for v in samples:
            rep.sampled[str(v)] = str(classify3(G.subs({T: Poly.const(v)})))
        const = all(lab == rep.generic_label for lab in rep.sampled.values())
        rep.jump = const and rep.label_at_zero != rep.generic_label
    else:
        from .finite import derived_and_center
        rep.invariants = {"generic": derived_and_center(G).as_dict(),
                          "zero": derived_and_center(g0).as_dict()}
    return rep


def reverse_family_from_contraction(g: FiniteLieAlgebra, spec) -> DeformationFamily:
    """Family ``U_t^-1 [U_t a, U_t b]`` whose value at t = 0 is the contraction."""
    from .contraction import InvalidSpec, contract_diagonal, entry_exponent, prepared, validate_exponents
    from .fme import common_denominator

    if not validate_exponents(g, spec).valid:
        raise InvalidSpec("spec has violated entries")
    base = contract_diagonal(g, spec)
    h = prepared(g, spec)
    q = common_denominator(spec.exponents.values())
    layers: dict = {}
    for (i, j, k), c in h.entries():
        s = entry_exponent(h, spec, i, j, k) * q
        if s > 0:
            layers.setdefault(int(s), {}).setdefault((h.basis[i], h.basis[j]), {})[h.basis[k]] = c
    top = max(layers, default=0)
    cochains = [TwoCochain(base, layers.get(p, {})) for p in range(1, top + 1)]
    return DeformationFamily(base, cochains, reparam=q)
