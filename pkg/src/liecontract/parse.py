"""Recursive-descent parser for exact scalar expressions.

Syntax: integers, ``i``, identifiers, ``+ - * / ^`` (``**`` also accepted)
and parentheses.  ``eps`` (or ``ε``) is the contraction variable.
"""

from __future__ import annotations

import re
from typing import Iterable

from .exact import EPS, GaussianRational, Scalar, UndeclaredParameter

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_ε][A-Za-z0-9_'ε]*)|(\*\*|[-+*/^()]))")


class ExprSyntaxError(SyntaxError):
    def __init__(self, msg, line=1, column=1, text=None):
        self.msg = msg
        self.lineno = line
        self.offset = column
        self.text = text
        super().__init__(f"{msg} (line {line}, column {column})")


def _tokenize(text: str, line: int, col0: int):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            nonspace = len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[pos + nonspace]!r}",
                                  line, col0 + pos + nonspace + 1, text)
        num, ident, op = m.groups()
        start = m.start(m.lastindex)
        if num is not None:
            toks.append(("num", int(num), col0 + start + 1))
        elif ident is not None:
            toks.append(("id", ident, col0 + start + 1))
        else:
            toks.append(("op", op, col0 + start + 1))
        pos = m.end()
    toks.append(("end", None, col0 + len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text, params, extra, constant_division, line, col0):
        self.text = text
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.params = None if params is None else set(params)
        self.extra = set(extra or ())
        self.constant_division = constant_division
        self.line = line

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, self.line, tok[2], self.text)

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        v = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            tok = self.take()
            w = self.unary()
            if tok[1] == "*":
                v = v * w
            else:
                if w.is_zero():
                    self.error("division by zero", tok)
                if self.constant_division and not w.is_constant():
                    self.error("division only by nonzero constants", tok)
                v = v / w
        return v

    def unary(self):
        t = self.peek()
        if t[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if t[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] in (("op", "^"), ("op", "**")):
            self.take()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                sign = -1
            tok = self.take()
            if tok[0] != "num":
                self.error("exponent must be an integer literal", tok)
            k = sign * tok[1]
            if k < 0 and base.is_zero():
                self.error("negative power of zero", tok)
            if k < 0 and not (base.is_constant() or base.variables() <= {EPS}):
                self.error("only eps and constants may carry negative powers", tok)
            return base ** k
        return base

    def atom(self):
        tok = self.take()
        kind, val, col = tok
        if kind == "num":
            return Scalar(val)
        if kind == "id":
            if val == "i":
                return Scalar(GaussianRational(0, 1))
            if val in ("eps", "ε"):
                return Scalar.var(EPS)
            if self.params is not None and val not in self.params and val not in self.extra:
                raise UndeclaredParameter(f"{val} (line {self.line}, column {col})")
            return Scalar.var(val)
        if (kind, val) == ("op", "("):
            v = self.expr()
            if self.take()[:2] != ("op", ")"):
                self.error("expected ')'")
            return v
        self.error(f"unexpected token {val!r}" if val is not None else "unexpected end of input", tok)


def parse_expr(text: str, params: Iterable[str] | None = None,
               extra: Iterable[str] | None = None, constant_division: bool = False,
               line: int = 1, column: int = 0) -> Scalar:
    """Parse ``text`` into a ``Scalar``.

    ``params`` restricts identifiers to declared names (``None`` accepts any);
    ``extra`` adds names allowed alongside them, e.g. basis symbols.
    """
    return _Parser(text, params, extra, constant_division, line, column).parse()
