"""Identification of three-dimensional complex Lie algebras.

Decision tree on the derived algebra D = [g, g]:

* dim D = 0, 3: abelian, sl2;
* dim D = 1: Heisenberg if D is central, otherwise r2 + C;
* dim D = 2: D is abelian and ``ad x`` restricted to D is invertible for any
  ``x`` outside D.  A Jordan block gives r3; otherwise the eigenvalue ratio
  is recovered from the scale-free ``J = tr^2 / det = (1 + lambda)^2 / lambda``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import linalg
from .exact import GaussianRational, Scalar
from .finite import FiniteLieAlgebra, NotALieAlgebra, derived_algebra

TAGS = ("C3", "n3", "r2+C", "r3", "r3lambda", "sl2")


class DimensionMismatch(ValueError):
    pass


class IrrationalEigenvalueRatio(ValueError):
    def __init__(self, j):
        self.j = j
        super().__init__(f"eigenvalue ratio is not in Q(i); J = {j}")


@dataclass(frozen=True)
class Class3Label:
    tag: str
    lam: GaussianRational | None = None
    j: Scalar | None = None  # set when lambda is not a Q(i) constant

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        if self.lam is not None:
            lam = self.lam
            if self.tag != "r3lambda":
                raise ValueError("lambda only for r3lambda")
            if not lam or lam.norm() > 1 or (lam.norm() == 1 and lam.im < 0):
                raise ValueError(f"non-canonical lambda {lam}")

    @property
    def symbolic(self) -> bool:
        return self.tag == "r3lambda" and self.lam is None

    def __str__(self):
        if self.tag != "r3lambda":
            return self.tag
        if self.lam is not None:
            return f"r3(lambda={self.lam})"
        return f"r3(J={self.j})"

    @classmethod
    def parse(cls, text: str) -> "Class3Label":
        text = text.strip()
        if text in TAGS and text != "r3lambda":
            return cls(text)
        m = re.fullmatch(r"r3\(lambda=(.+)\)", text)
        if m:
            from .parse import parse_expr
            v = parse_expr(m.group(1))
            return cls("r3lambda", canonical_lambda(v.constant_value()))
        raise ValueError(f"cannot parse label {text!r}")


def canonical_lambda(lam: GaussianRational) -> GaussianRational:
    """Representative of ``{lambda, 1/lambda}`` (and conjugate on the unit circle)."""
    if not lam:
        raise ValueError("lambda must be nonzero")
    cands = [lam, lam.inverse()]
    n = lam.norm()
    if n == 1:
        cands = [lam, lam.conjugate()]
        return max(cands, key=lambda z: z.im)
    return lam if n < 1 else lam.inverse()


def j_of_lambda(lam) -> Scalar:
    lam = Scalar.coerce(lam)
    return (1 + lam) ** 2 / lam


def lambda_from_j(j: GaussianRational) -> GaussianRational:
    b = j - 2
    s = (b * b - 4).sqrt()
    if s is None:
        raise IrrationalEigenvalueRatio(Scalar(j))
    root = (b + s) / 2
    if not root:
        root = (b - s) / 2
    return canonical_lambda(root)


def _in_span(basis_rows, v) -> bool:
    return linalg.rank(basis_rows + [v]) == len(basis_rows)


def _restricted_ad(g: FiniteLieAlgebra, x, D) -> list:
    A = linalg.transpose(D)
    cols = []
    for b in D:
        c = linalg.solve(A, g.bracket_coords(x, b))
        if c is None:
            raise AssertionError("derived algebra is not ad-invariant")
        cols.append(c)
    return linalg.transpose(cols)


def complement_elements(g: FiniteLieAlgebra, D):
    from .exact import ONE, ZERO
    units = [[ONE if i == j else ZERO for j in range(g.dim)] for i in range(g.dim)]
    return [u for u in units if not _in_span(D, u)]


def classify3(g: FiniteLieAlgebra, complement=None) -> Class3Label:
    """Label of ``g`` in the three-dimensional list.

    ``complement`` optionally fixes the element outside ``[g, g]`` used for
    the two-dimensional derived case.
    """
    if g.dim != 3:
        raise DimensionMismatch(f"expected dimension 3, got {g.dim}")
    if not g.is_lie():
        raise NotALieAlgebra(g.jacobi_defect())
    D = derived_algebra(g)
    d = len(D)
    if d == 0:
        return Class3Label("C3")
    if d == 3:
        return Class3Label("sl2")
    if d == 1:
        from .exact import ONE, ZERO
        units = [[ONE if i == j else ZERO for j in range(3)] for i in range(3)]
        central = all(not any(g.bracket_coords(u, D[0])) for u in units)
        return Class3Label("n3" if central else "r2+C")
    x = complement if complement is not None else complement_elements(g, D)[0]
    M = _restricted_ad(g, x, D)
    tr = M[0][0] + M[1][1]
    dt = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    if dt.is_zero():
        raise AssertionError("ad x is singular on the derived algebra")
    scalar = M[0][1].is_zero() and M[1][0].is_zero() and M[0][0] == M[1][1]
    disc = tr * tr - 4 * dt
    if not scalar and disc.is_zero():
        return Class3Label("r3")
    j = tr * tr / dt
    if j.is_constant():
        return Class3Label("r3lambda", lambda_from_j(j.constant_value()))
    return Class3Label("r3lambda", None, j)


def isomorphic3(g1: FiniteLieAlgebra, g2: FiniteLieAlgebra) -> bool:
    a, b = classify3(g1), classify3(g2)
    if a.tag != b.tag:
        return False
    if a.symbolic or b.symbolic:
        if a.symbolic and b.symbolic:
            return a.j == b.j
        return False
    return a.lam == b.lam
