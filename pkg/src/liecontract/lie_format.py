"""Reader and writer for ``.lie`` algebra definition files.

Grammar (one statement per line, ``#`` starts a comment)::

    algebra NAME [over C]
    param NAME [NAME ...]
    basis SYM [SYM ...]
    [SYM,SYM] = EXPR

``EXPR`` must be linear in the basis symbols; coefficients are polynomials in
the declared parameters over Q(i), and ``/`` may only divide by a nonzero
constant.  Pairs without a bracket line are zero.
"""

from __future__ import annotations

import re

from .exact import Poly, Scalar, UndeclaredParameter
from .finite import DuplicateBracket, FiniteLieAlgebra, Vector
from .parse import ExprSyntaxError, parse_expr

_IDENT = r"[A-Za-z_][A-Za-z0-9_']*"
_BRACKET = re.compile(rf"^\s*\[\s*({_IDENT})\s*,\s*({_IDENT})\s*\]\s*=\s*(.*)$")
_RESERVED = {"i", "eps", "algebra", "param", "basis", "over"}


class LieSyntaxError(ExprSyntaxError):
    pass


def _linear_in_basis(value: Scalar, basis, line, col, text) -> dict:
    if not value.is_polynomial():
        raise LieSyntaxError("bracket values must be polynomial", line, col, text)
    out: dict = {}
    bset = set(basis)
    for mono, c in value.num.terms.items():
        syms = [(v, e) for v, e in mono if v in bset]
        if len(syms) != 1 or syms[0][1] != 1:
            raise LieSyntaxError("right-hand side must be linear in the basis symbols",
                                 line, col, text)
        sym = syms[0][0]
        rest = tuple((v, e) for v, e in mono if v not in bset)
        out[sym] = out.get(sym, Scalar(0)) + Scalar(Poly._raw({rest: c}))
    return out


def parse_algebra(text: str, verify: bool = True) -> FiniteLieAlgebra:
    name = None
    params: list = []
    basis = None
    brackets = {}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        stripped = line.strip()
        col0 = len(line) - len(line.lstrip()) + 1
        head = stripped.split()[0]
        if head == "algebra":
            parts = stripped.split()
            if len(parts) not in (2, 4) or (len(parts) == 4 and (parts[2] != "over" or parts[3] != "C")):
                raise LieSyntaxError("expected 'algebra NAME [over C]'", lineno, col0, raw)
            name = parts[1]
            continue
        if head in ("param", "basis"):
            names = stripped.split()[1:]
            for n in names:
                if not re.fullmatch(_IDENT, n) or n in _RESERVED:
                    raise LieSyntaxError(f"invalid symbol {n!r}", lineno, raw.index(n) + 1, raw)
            if head == "param":
                params.extend(names)
            else:
                if basis is not None:
                    raise LieSyntaxError("basis declared twice", lineno, col0, raw)
                if len(set(names)) != len(names):
                    raise LieSyntaxError("repeated basis symbol", lineno, col0, raw)
                basis = names
            continue
        m = _BRACKET.match(line)
        if not m:
            raise LieSyntaxError("expected a bracket line '[a,b] = expr'", lineno, col0, raw)
        if basis is None:
            raise LieSyntaxError("bracket before basis declaration", lineno, col0, raw)
        a, b, rhs = m.group(1), m.group(2), m.group(3)
        for s, grp in ((a, 1), (b, 2)):
            if s not in basis:
                raise LieSyntaxError(f"unknown basis symbol {s!r}", lineno, m.start(grp) + 1, raw)
        key = frozenset((a, b))
        if key in seen:
            raise DuplicateBracket(f"line {lineno}: bracket [{a},{b}] already given on line {seen[key]}")
        seen[key] = lineno
        overlap = set(params) & set(basis)
        if overlap:
            raise LieSyntaxError(f"symbol used as both parameter and basis: {sorted(overlap)}",
                                 lineno, col0, raw)
        try:
            value = parse_expr(rhs, params=params, extra=basis, constant_division=True,
                               line=lineno, column=m.start(3))
        except UndeclaredParameter as exc:
            raise LieSyntaxError(f"undeclared symbol {exc}", lineno, m.start(3) + 1, raw) from None
        except ExprSyntaxError as exc:
            raise LieSyntaxError(exc.msg, exc.lineno, exc.offset, raw) from None
        brackets[(a, b)] = _linear_in_basis(value, basis, lineno, m.start(3) + 1, raw)
    if basis is None:
        raise LieSyntaxError("missing basis declaration", 1, 1, None)
    g = FiniteLieAlgebra.from_brackets(basis, brackets, name=name, params=params)
    if verify:
        g.verify()
    return g


def serialize_algebra(g: FiniteLieAlgebra) -> str:
    lines = [f"algebra {g.name or 'g'} over C"]
    if g.params:
        lines.append("param " + " ".join(sorted(g.params)))
    lines.append("basis " + " ".join(g.basis))
    for (a, b), v in g.brackets().items():
        lines.append(f"[{a},{b}] = {v.format(g.basis)}")
    return "\n".join(lines) + "\n"


def vector_from_text(text: str, g: FiniteLieAlgebra) -> Vector:
    value = parse_expr(text, params=g.params, extra=g.basis)
    return Vector(_linear_in_basis(value, g.basis, 1, 1, text))
