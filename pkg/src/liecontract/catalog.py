"""Shipped fixture algebras (the three-dimensional complex list and sl2 bases)."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .exact import to_scalar
from .finite import FiniteLieAlgebra
from .lie_format import parse_algebra

TABLE1 = ("C3", "n3", "r2+C", "r3", "r3lambda", "sl2")
# fixture file for each list entry; sl2.lie itself is the h, e, f basis
TABLE1_FILES = {"C3": "C3", "n3": "n3", "r2+C": "r2+C", "r3": "r3", "r3lambda": "r3lambda",
                "sl2": "sl2-cyclic"}


def fixture_dir() -> Path:
    return Path(str(resources.files("liecontract") / "fixtures"))


def fixture_text(name: str) -> str:
    return (fixture_dir() / name).read_text(encoding="utf-8")


def load_json_fixture(name: str):
    return json.loads(fixture_text(name))


def load(name: str) -> FiniteLieAlgebra:
    if not name.endswith(".lie"):
        name += ".lie"
    return parse_algebra(fixture_text(name))


def r3_lambda(lam=None) -> FiniteLieAlgebra:
    """The r3,lambda family; symbolic in ``lambda`` when ``lam`` is None."""
    g = load("r3lambda")
    if lam is None:
        return g
    lam = to_scalar(lam)
    if lam.is_zero():
        raise ValueError("lambda must be nonzero")
    out = g.subs({"lambda": lam.as_poly()})
    out.name = f"r3({lam})"
    out.verify()
    return out


def sl2() -> FiniteLieAlgebra:
    """sl2 with basis h, e, f."""
    return load("sl2")


def table1() -> dict:
    return {name: load(TABLE1_FILES[name]) for name in TABLE1}


def resolve(ref: str) -> FiniteLieAlgebra:
    """A fixture name, ``r3lambda:VALUE``, or a path to a ``.lie`` file."""
    path = Path(ref)
    if path.suffix == ".lie" and path.is_file():
        return parse_algebra(path.read_text(encoding="utf-8"))
    if ref.startswith("r3lambda:"):
        return r3_lambda(ref.split(":", 1)[1])
    name = path.name[:-4] if path.name.endswith(".lie") else ref
    if not (fixture_dir() / f"{name}.lie").is_file():
        raise FileNotFoundError(f"no algebra file or fixture named {ref!r}")
    return load(name)
