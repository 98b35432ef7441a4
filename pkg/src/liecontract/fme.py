"""Exact Fourier-Motzkin feasibility for rational linear systems.

Constraints are ``sum(a_v * x_v) (>=|==) b`` with ``Fraction`` data.  Every
derived row remembers the non-negative combination of input rows that
produced it, so an infeasible system comes back with a Farkas-style
certificate: multipliers whose combination reads ``0 >= b`` with ``b > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from math import lcm
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[str, Fraction]
    rel: str  # ">=" or "=="
    rhs: Fraction = Fraction(0)
    label: str = ""

    def value(self, x: Mapping[str, Fraction]) -> Fraction:
        return sum((Fraction(c) * Fraction(x.get(v, 0)) for v, c in self.coeffs.items()), Fraction(0))

    def holds(self, x) -> bool:
        v = self.value(x)
        return v == self.rhs if self.rel == "==" else v >= self.rhs

    def __str__(self):
        lhs = " + ".join(f"{c}*{v}" for v, c in sorted(self.coeffs.items()) if c) or "0"
        return f"{lhs} {self.rel} {self.rhs}"


@dataclass
class Infeasible:
    """Certificate: ``sum(multipliers[i] * row_i)`` gives ``0 >= rhs`` with ``rhs > 0``.

    Equalities enter with a sign (``+`` for ``>=``, ``-`` for ``<=``).
    """

    multipliers: dict
    rhs: Fraction
    constraints: list = field(default_factory=list)

    def check(self) -> bool:
        total: dict = {}
        rhs = Fraction(0)
        for i, m in self.multipliers.items():
            c = self.constraints[i]
            if c.rel == ">=" and m < 0:
                return False
            for v, a in c.coeffs.items():
                total[v] = total.get(v, Fraction(0)) + m * a
            rhs += m * c.rhs
        return all(v == 0 for v in total.values()) and rhs == self.rhs and rhs > 0

    def describe(self) -> str:
        parts = [f"{m} * ({self.constraints[i].label or self.constraints[i]})"
                 for i, m in sorted(self.multipliers.items())]
        return " + ".join(parts) + f"  =>  0 >= {self.rhs}"


class _Row:
    __slots__ = ("a", "b", "origin")

    def __init__(self, a: dict, b: Fraction, origin: dict):
        self.a = {v: c for v, c in a.items() if c}
        self.b = b
        self.origin = origin


def _combine(p: _Row, q: _Row, var: str) -> _Row:
    # p has positive, q negative coefficient on var
    cp, cq = p.a[var], -q.a[var]
    a = {}
    for v in set(p.a) | set(q.a):
        a[v] = cq * p.a.get(v, 0) + cp * q.a.get(v, 0)
    a.pop(var, None)
    origin = dict()
    for k, m in p.origin.items():
        origin[k] = origin.get(k, 0) + cq * m
    for k, m in q.origin.items():
        origin[k] = origin.get(k, 0) + cp * m
    return _Row(a, cq * p.b + cp * q.b, origin)


def _normalized_key(r: _Row):
    if not r.a:
        return None
    g = max(abs(c) for c in r.a.values())
    return tuple(sorted((v, c / g) for v, c in r.a.items())), r.b / g


def solve(constraints: Sequence[Constraint], variables: Iterable[str] | None = None,
          order: Sequence[str] | None = None):
    """Return a rational point ``{var: Fraction}`` or an ``Infeasible`` certificate."""
    constraints = list(constraints)
    vars_ = set(variables or ())
    for c in constraints:
        vars_ |= set(c.coeffs)
    elim_order = list(order) if order else sorted(vars_)
    elim_order += sorted(vars_ - set(elim_order))
    rows = []
    for i, c in enumerate(constraints):
        a = {v: Fraction(x) for v, x in c.coeffs.items()}
        rows.append(_Row(a, Fraction(c.rhs), {i: Fraction(1)}))
        if c.rel == "==":
            rows.append(_Row({v: -x for v, x in a.items()}, -Fraction(c.rhs), {i: Fraction(-1)}))
        elif c.rel != ">=":
            raise ValueError(f"unsupported relation {c.rel!r}")
    stages = []
    for var in elim_order:
        bad = _contradiction(rows, constraints)
        if bad is not None:
            return bad
        stages.append((var, rows))
        pos = [r for r in rows if r.a.get(var, 0) > 0]
        neg = [r for r in rows if r.a.get(var, 0) < 0]
        rest = [r for r in rows if not r.a.get(var, 0)]
        new = rest + [_combine(p, q, var) for p in pos for q in neg]
        rows = _dedupe(new)
    bad = _contradiction(rows, constraints)
    if bad is not None:
        return bad
    point: dict = {}
    for var, stage_rows in reversed(stages):
        lo, hi = None, None
        for r in stage_rows:
            a = r.a.get(var, 0)
            if not a:
                continue
            rest = sum((c * point.get(v, 0) for v, c in r.a.items() if v != var), Fraction(0))
            bound = (r.b - rest) / a
            if a > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
        point[var] = _pick(lo, hi)
    assert all(c.holds(point) for c in constraints)
    return point


def _pick(lo, hi) -> Fraction:
    if lo is not None and hi is not None:
        if lo > hi:
            raise AssertionError("back-substitution found an empty interval")
        if lo <= 0 <= hi:
            return Fraction(0)
        return lo if lo > 0 else hi
    if lo is not None:
        return max(lo, Fraction(0))
    if hi is not None:
        return min(hi, Fraction(0))
    return Fraction(0)


def _contradiction(rows, constraints):
    for r in rows:
        if not r.a and r.b > 0:
            return Infeasible({k: m for k, m in r.origin.items() if m}, r.b, constraints)
    return None


def _dedupe(rows):
    seen = {}
    out = []
    for r in rows:
        if not r.a:
            if r.b > 0:
                out.append(r)
            continue
        key = _normalized_key(r)
        if key in seen:
            continue
        seen[key] = True
        out.append(r)
    return out


def grid_values(bound: int, max_den: int) -> list:
    """All fractions in ``[-bound, bound]`` with denominator at most ``max_den``."""
    vals = {Fraction(p, q) for q in range(1, max_den + 1)
            for p in range(-bound * q, bound * q + 1)}
    return sorted(vals)


def grid_search(constraints: Sequence[Constraint], values: Sequence[Fraction],
                order: Sequence[str] | None = None):
    """Exhaustive backtracking over ``values`` for every variable.

    A constraint is checked as soon as all its variables are assigned, so
    the search is exact over the grid.  Returns the first point or ``None``.
    """
    vars_ = set()
    for c in constraints:
        vars_ |= {v for v, a in c.coeffs.items() if a}
    order = [v for v in (order or []) if v in vars_] + sorted(vars_ - set(order or []))
    pos = {v: i for i, v in enumerate(order)}
    by_level: dict = {i: [] for i in range(len(order))}
    for c in constraints:
        live = [v for v, a in c.coeffs.items() if a]
        if not live:
            if not c.holds({}):
                return None
            continue
        by_level[max(pos[v] for v in live)].append(c)
    point: dict = {}

    def rec(level):
        if level == len(order):
            return dict(point)
        var = order[level]
        for val in values:
            point[var] = val
            if all(c.holds(point) for c in by_level[level]):
                found = rec(level + 1)
                if found is not None:
                    return found
        del point[var]
        return None

    return rec(0)


def common_denominator(xs: Iterable[Fraction]) -> int:
    d = 1
    for x in xs:
        d = lcm(d, Fraction(x).denominator)
    return d
