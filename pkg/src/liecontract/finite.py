"""Finite-dimensional Lie algebras given by structure constants.

Only the entries ``C^k_ij`` with ``i < j`` are stored, so antisymmetry holds
by construction and cannot be violated by input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import linalg
from .exact import ONE, ZERO, Scalar, to_scalar


class UnknownBasisSymbol(KeyError):
    pass


class DuplicateBracket(ValueError):
    pass


class NotALieAlgebra(ValueError):
    def __init__(self, defect):
        self.defect = defect
        triples = ", ".join("(" + ",".join(t) + ")" for t in defect)
        super().__init__(f"Jacobi identity fails on {triples}")


class ParameterSpecializationNeeded(ValueError):
    def __init__(self, what, locus):
        self.locus = locus
        super().__init__(f"{what} is not constant in the parameters; "
                         f"rank may drop where {' * '.join(f'({p})' for p in locus)} = 0")


class Vector:
    """Linear combination of basis symbols with ``Scalar`` coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping | None = None):
        out = {}
        for k, v in (coeffs or {}).items():
            v = to_scalar(v)
            if v:
                out[k] = v
        self.coeffs = out

    @classmethod
    def basis(cls, sym: str) -> "Vector":
        return cls({sym: ONE})

    def __getitem__(self, sym):
        return self.coeffs.get(sym, ZERO)

    def items(self):
        return self.coeffs.items()

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __add__(self, other: "Vector") -> "Vector":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, ZERO) + v
        return Vector(out)

    def __neg__(self):
        return Vector({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Vector":
        c = to_scalar(c)
        return Vector({k: c * v for k, v in self.coeffs.items()})

    def subs(self, values) -> "Vector":
        return Vector({k: v.subs(values) for k, v in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, Vector):
            return NotImplemented
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self[k] == other[k] for k in keys)

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def format(self, order: Sequence[str] | None = None) -> str:
        keys = [k for k in order if k in self.coeffs] if order else sorted(self.coeffs)
        if not keys:
            return "0"
        parts = []
        for k in keys:
            c = self.coeffs[k]
            if c == 1:
                parts.append(k)
            elif c == -1:
                parts.append("-" + k)
            elif c.is_constant() and (c.constant_value().is_real() or not c.constant_value().re):
                parts.append(f"{c}*{k}")
            else:
                parts.append(f"({c})*{k}")
        s = parts[0]
        for p in parts[1:]:
            s += " - " + p[1:] if p.startswith("-") else " + " + p
        return s

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"Vector({self})"


@dataclass(frozen=True)
class InvariantRecord:
    dim: int
    derived_dims: tuple
    lower_central_dims: tuple
    center_dim: int
    killing_rank: int
    special_locus: tuple = field(default=(), compare=False)

    def as_dict(self):
        return {
            "dim": self.dim,
            "derived_dims": list(self.derived_dims),
            "lower_central_dims": list(self.lower_central_dims),
            "center_dim": self.center_dim,
            "killing_rank": self.killing_rank,
            "special_locus": [str(p) for p in self.special_locus],
        }


class FiniteLieAlgebra:
    """Structure-constant tensor on an ordered basis of symbol names."""

    def __init__(self, basis: Sequence[str], tensor: Mapping | None = None,
                 name: str | None = None, params: Iterable[str] = ()):
        self.basis = tuple(basis)
        if len(set(self.basis)) != len(self.basis):
            raise ValueError(f"repeated basis symbol in {self.basis}")
        self.index = {s: i for i, s in enumerate(self.basis)}
        self.name = name
        self._tensor: dict = {}
        for (i, j), col in (tensor or {}).items():
            if not i < j:
                raise ValueError("tensor entries must be stored with i < j")
            clean = {k: to_scalar(v) for k, v in col.items()}
            clean = {k: v for k, v in clean.items() if v}
            if clean:
                self._tensor[(i, j)] = clean
        declared = set(params)
        self.params = frozenset(declared | self._used_params())
        self._verified = None

    @classmethod
    def from_brackets(cls, basis: Sequence[str], brackets: Mapping, name=None,
                      params: Iterable[str] = ()) -> "FiniteLieAlgebra":
        """Build from ``{(a, b): rhs}``; ``rhs`` is a Vector or ``{sym: coeff}``."""
        index = {s: i for i, s in enumerate(basis)}
        tensor: dict = {}
        seen = set()
        for (a, b), rhs in brackets.items():
            for s in (a, b):
                if s not in index:
                    raise UnknownBasisSymbol(s)
            key = frozenset((a, b))
            if key in seen:
                raise DuplicateBracket(f"bracket [{a},{b}] given twice")
            seen.add(key)
            coeffs = rhs.coeffs if isinstance(rhs, Vector) else rhs
            for s in coeffs:
                if s not in index:
                    raise UnknownBasisSymbol(s)
            i, j = index[a], index[b]
            if i == j:
                if any(to_scalar(v) for v in coeffs.values()):
                    raise ValueError(f"[{a},{a}] must vanish")
                continue
            sign = ONE if i < j else -ONE
            tensor[(min(i, j), max(i, j))] = {index[s]: sign * to_scalar(v) for s, v in coeffs.items()}
        return cls(basis, tensor, name=name, params=params)

    def _used_params(self):
        out = set()
        for col in self._tensor.values():
            for v in col.values():
                out |= v.variables()
        return out

    @property
    def dim(self) -> int:
        return len(self.basis)

    def entries(self):
        """Nonzero ``((i, j, k), C^k_ij)`` with ``i < j``, in basis order."""
        for (i, j) in sorted(self._tensor):
            col = self._tensor[(i, j)]
            for k in sorted(col):
                yield (i, j, k), col[k]

    def structure(self, i: int, j: int) -> dict:
        if i == j:
            return {}
        if i < j:
            return self._tensor.get((i, j), {})
        return {k: -v for k, v in self._tensor.get((j, i), {}).items()}

    def coefficient(self, i: int, j: int, k: int) -> Scalar:
        return self.structure(i, j).get(k, ZERO)

    def _vec(self, v) -> list:
        if isinstance(v, str):
            v = Vector.basis(v)
        out = [ZERO] * self.dim
        for s, c in v.items():
            if s not in self.index:
                raise UnknownBasisSymbol(s)
            out[self.index[s]] = c
        return out

    def _to_vector(self, coords) -> Vector:
        return Vector({self.basis[k]: c for k, c in enumerate(coords) if c})

    def bracket_coords(self, v: Sequence[Scalar], w: Sequence[Scalar]) -> list:
        out = [ZERO] * self.dim
        for (i, j), col in self._tensor.items():
            a = v[i] * w[j] - v[j] * w[i] if (v[i] or v[j]) and (w[i] or w[j]) else ZERO
            if a:
                for k, c in col.items():
                    out[k] = out[k] + a * c
        return out

    def bracket(self, v, w) -> Vector:
        return self._to_vector(self.bracket_coords(self._vec(v), self._vec(w)))

    def ad_matrix(self, i: int) -> list:
        """Matrix of ``ad x_i``: entry ``[k][j] = C^k_ij``."""
        m = linalg.zeros(self.dim, self.dim)
        for j in range(self.dim):
            for k, c in self.structure(i, j).items():
                m[k][j] = c
        return m

    def jacobi_defect(self) -> dict:
        """``{(a, b, c): [[a,b],c] + [[b,c],a] + [[c,a],b]}`` for nonzero defects."""
        out = {}
        e = [[ONE if i == j else ZERO for j in range(self.dim)] for i in range(self.dim)]
        for i, j, k in combinations(range(self.dim), 3):
            s = [ZERO] * self.dim
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                ab = self.bracket_coords(e[a], e[b])
                t = self.bracket_coords(ab, e[c])
                s = [x + y for x, y in zip(s, t)]
            if any(s):
                out[(self.basis[i], self.basis[j], self.basis[k])] = self._to_vector(s)
        return out

    def is_lie(self) -> bool:
        if self._verified is None:
            self._verified = not self.jacobi_defect()
        return self._verified

    def verify(self) -> "FiniteLieAlgebra":
        d = self.jacobi_defect()
        self._verified = not d
        if d:
            raise NotALieAlgebra(d)
        return self

    @property
    def verified(self) -> bool:
        return bool(self._verified)

    def require_verified(self):
        if not self.is_lie():
            raise NotALieAlgebra(self.jacobi_defect())

    def change_basis(self, P) -> "FiniteLieAlgebra":
        """Algebra in the basis whose ``a``-th vector is column ``a`` of ``P``.

        The new basis keeps the old symbol names.
        """
        P = linalg.as_matrix(P)
        n = self.dim
        if len(P) != n or any(len(r) != n for r in P):
            raise ValueError("basis change must be a square matrix of the algebra's dimension")
        Pinv = linalg.inverse(P)
        cols = [[P[r][a] for r in range(n)] for a in range(n)]
        tensor = {}
        for a, b in combinations(range(n), 2):
            br = self.bracket_coords(cols[a], cols[b])
            if any(br):
                new = linalg.matvec(Pinv, br)
                tensor[(a, b)] = {k: c for k, c in enumerate(new) if c}
        g = FiniteLieAlgebra(self.basis, tensor, name=None, params=self.params)
        if self._verified is not None:
            g._verified = self._verified
        return g

    def subs(self, values) -> "FiniteLieAlgebra":
        tensor = {key: {k: v.subs(values) for k, v in col.items()} for key, col in self._tensor.items()}
        return FiniteLieAlgebra(self.basis, tensor, name=self.name,
                                params=self.params - set(values))

    def rename(self, mapping: Mapping[str, str]) -> "FiniteLieAlgebra":
        basis = [mapping.get(s, s) for s in self.basis]
        return FiniteLieAlgebra(basis, self._tensor, name=self.name, params=self.params)

    def brackets(self) -> dict:
        """``{(a, b): Vector}`` for the nonzero brackets with ``a`` before ``b``."""
        out = {}
        for (i, j), col in sorted(self._tensor.items()):
            out[(self.basis[i], self.basis[j])] = self._to_vector(
                [col.get(k, ZERO) for k in range(self.dim)])
        return out

    def is_abelian(self) -> bool:
        return not self._tensor

    def __eq__(self, other):
        if not isinstance(other, FiniteLieAlgebra):
            return NotImplemented
        if self.basis != other.basis:
            return False
        keys = set(self._tensor) | set(other._tensor)
        for key in keys:
            a, b = self._tensor.get(key, {}), other._tensor.get(key, {})
            for k in set(a) | set(b):
                if a.get(k, ZERO) != b.get(k, ZERO):
                    return False
        return True

    def __hash__(self):
        return hash((self.basis, self.tensor_key()))

    def tensor_key(self) -> str:
        return "; ".join(f"[{a},{b}]={v.format(self.basis)}" for (a, b), v in self.brackets().items())

    def __repr__(self):
        label = self.name or "g"
        return f"<FiniteLieAlgebra {label}: {self.tensor_key() or 'abelian'}>"


# --- subspace helpers -------------------------------------------------------

def _bracket_span(g: FiniteLieAlgebra, S, T) -> list:
    vecs = []
    for s in S:
        for t in T:
            b = g.bracket_coords(s, t)
            if any(b):
                vecs.append(b)
    return linalg.span_basis(vecs)


def _unit_vectors(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def derived_algebra(g: FiniteLieAlgebra) -> list:
    E = _unit_vectors(g.dim)
    return _bracket_span(g, E, E)


def center(g: FiniteLieAlgebra) -> list:
    rows = []
    for i in range(g.dim):
        rows.extend(g.ad_matrix(i))
    return linalg.nullspace(rows, g.dim)


def _series_dims(g, step):
    E = _unit_vectors(g.dim)
    cur = E
    dims = []
    while True:
        nxt = step(cur)
        dims.append(len(nxt))
        if len(nxt) == len(cur) or not nxt:
            return dims
        cur = nxt


def killing_form(g: FiniteLieAlgebra) -> list:
    """``B(x_i, x_j) = tr(ad x_i ad x_j)``."""
    g.require_verified()
    ads = [g.ad_matrix(i) for i in range(g.dim)]
    n = g.dim
    B = linalg.zeros(n, n)
    for i in range(n):
        for j in range(i, n):
            v = linalg.trace(linalg.matmul(ads[i], ads[j]))
            B[i][j] = B[j][i] = v
    return B


def derived_and_center(g: FiniteLieAlgebra, generic: bool = True) -> InvariantRecord:
    """Isomorphism invariants computed over the parameter field.

    With ``generic=False`` a non-constant pivot anywhere raises
    ``ParameterSpecializationNeeded``; otherwise the pivots are returned in
    ``special_locus``.
    """
    g.require_verified()
    E = _unit_vectors(g.dim)
    locus = []

    def collect(vectors):
        if vectors:
            _, extra = linalg.rank_with_locus(vectors)
            locus.extend(extra)

    derived = _series_dims(g, lambda S: _bracket_span(g, S, S))
    lower = _series_dims(g, lambda S: _bracket_span(g, E, S))
    ad_rows = [row for i in range(g.dim) for row in g.ad_matrix(i)]
    center_rank, extra = linalg.rank_with_locus(ad_rows)
    locus.extend(extra)
    k_rank, extra = linalg.rank_with_locus(killing_form(g))
    locus.extend(extra)
    brackets = [g.bracket_coords(a, b) for a, b in combinations(E, 2)]
    collect([b for b in brackets if any(b)])
    uniq = []
    for p in locus:
        if p not in uniq and -p not in uniq:
            uniq.append(p)
    if uniq and not generic:
        raise ParameterSpecializationNeeded("an invariant rank", uniq)
    return InvariantRecord(dim=g.dim, derived_dims=tuple(derived), lower_central_dims=tuple(lower),
                           center_dim=g.dim - center_rank, killing_rank=k_rank,
                           special_locus=tuple(uniq))


def direct_sum(g1: FiniteLieAlgebra, g2: FiniteLieAlgebra, name=None) -> FiniteLieAlgebra:
    """Block sum; clashing names from ``g2`` get primes appended."""
    taken = set(g1.basis)
    rename = {}
    for s in g2.basis:
        t = s
        while t in taken:
            t += "'"
        taken.add(t)
        rename[s] = t
    basis = list(g1.basis) + [rename[s] for s in g2.basis]
    off = g1.dim
    tensor = {}
    for (i, j, k), c in g1.entries():
        tensor.setdefault((i, j), {})[k] = c
    for (i, j, k), c in g2.entries():
        tensor.setdefault((i + off, j + off), {})[k + off] = c
    g = FiniteLieAlgebra(basis, tensor, name=name, params=g1.params | g2.params)
    if g1.is_lie() and g2.is_lie():
        g._verified = True
    return g


def abelian(n: int, names: Sequence[str] | None = None) -> FiniteLieAlgebra:
    names = list(names) if names else [f"x{i + 1}" for i in range(n)]
    g = FiniteLieAlgebra(names, {}, name=f"C{n}")
    g._verified = True
    return g
