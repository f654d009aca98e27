"""Recursive-descent parser and printer for goal formulas.

Grammar (keywords are case-insensitive)::

    goal   := ["exists" var ("," var)* "."] fluent ("&" fluent)*
    fluent := "B(" phi "," prob ")" | "KRD(" term ")"
            | "BContents(" name "," prob ")" | "B(ExistsIn(" expr "," name ")," prob ")"
    phi    := "den(" expr "," term ")" | rel "(" term ("," term)* ")"
    expr   := "lambda" var "." body
    body   := rel "(" var ")" | "and(" body "," body ")" | "or(" body "," body ")"
            | "exists(" var "," body ")"
"""
from __future__ import annotations

import re

from .ast import (
    KRD,
    And,
    BBool,
    BContents,
    Const,
    Den,
    Exists,
    ExistsInRegion,
    GoalFormula,
    Lambda,
    Or,
    Rel,
    Var,
)


class GoalSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class UnboundVariableError(GoalSyntaxError):
    pass


class UnknownRelationError(GoalSyntaxError):
    pass


class DefiniteDescriptionError(GoalSyntaxError):
    pass


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.&])
""", re.VERBOSE)

_DEFINITE = {"the", "iota"}


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise GoalSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
        else:
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, vocab=None):
        self.toks = tokenize(text)
        self.i = 0
        self.vocab = vocab

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message, tok=None, cls=GoalSyntaxError):
        tok = tok or self.tok
        return cls(message, tok.line, tok.col)

    def advance(self) -> _Tok:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def is_kw(self, word: str, offset: int = 0) -> bool:
        t = self.toks[min(self.i + offset, len(self.toks) - 1)]
        return t.kind == "ident" and t.text.lower() == word

    def ident(self, what: str) -> _Tok:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}")
        return self.advance()

    def prob(self) -> float:
        tok = self.tok
        if tok.kind != "num":
            raise self.error("expected a probability")
        self.advance()
        p = float(tok.text)
        if not (0.0 < p <= 1.0):
            raise self.error(f"probability {p} outside (0, 1]", tok)
        return p

    def check_relation(self, tok: _Tok, arity: int) -> str:
        name = tok.text.lower()
        if self.vocab is not None:
            if not self.vocab.is_relation(name):
                raise self.error(f"unknown relation {tok.text!r}", tok, UnknownRelationError)
            if self.vocab.arity(name) != arity:
                raise self.error(f"{name} takes {self.vocab.arity(name)} argument(s), got {arity}", tok)
        return name

    # grammar
    def goal(self) -> GoalFormula:
        variables: list[str] = []
        if self.is_kw("exists") and self.toks[self.i + 1].text != "(":
            self.advance()
            variables.append(self.ident("variable").text)
            while self.tok.text == ",":
                self.advance()
                variables.append(self.ident("variable").text)
            self.expect(".")
        bound = frozenset(variables)
        fluents = [self.fluent(bound)]
        while self.tok.text == "&":
            self.advance()
            fluents.append(self.fluent(bound))
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return GoalFormula(tuple(variables), tuple(fluents))

    def fluent(self, bound):
        if self.is_kw("krd"):
            self.advance()
            self.expect("(")
            term = self.term(bound)
            self.expect(")")
            return KRD(term)
        if self.is_kw("bcontents"):
            self.advance()
            self.expect("(")
            region = self.ident("region name").text
            self.expect(",")
            p = self.prob()
            self.expect(")")
            return BContents(region, p)
        if self.is_kw("b"):
            self.advance()
            self.expect("(")
            if self.is_kw("existsin"):
                self.advance()
                self.expect("(")
                expr = self.expr()
                self.expect(",")
                region = self.ident("region name").text
                self.expect(")")
                self.expect(",")
                p = self.prob()
                self.expect(")")
                return ExistsInRegion(expr, region, p)
            phi = self.phi(bound)
            self.expect(",")
            p = self.prob()
            self.expect(")")
            return BBool(phi, p)
        raise self.error("expected a fluent (B, KRD or BContents)")

    def phi(self, bound):
        if self.is_kw("den"):
            self.advance()
            self.expect("(")
            expr = self.expr()
            self.expect(",")
            term = self.term(bound)
            self.expect(")")
            return Den(expr, term)
        tok = self.ident("relation")
        self.expect("(")
        args = [self.term(bound)]
        while self.tok.text == ",":
            self.advance()
            args.append(self.term(bound))
        self.expect(")")
        return Rel(self.check_relation(tok, len(args)), tuple(args), pos=(tok.line, tok.col))

    def term(self, bound):
        tok = self.ident("term")
        if tok.text in bound:
            return Var(tok.text, pos=(tok.line, tok.col))
        return Const(tok.text, pos=(tok.line, tok.col))

    def expr(self) -> Lambda:
        tok = self.tok
        if tok.kind == "ident" and tok.text.lower() in _DEFINITE:
            raise self.error("definite descriptions are not supported", tok, DefiniteDescriptionError)
        if not self.is_kw("lambda"):
            raise self.error("expected 'lambda'")
        self.advance()
        var = self.ident("variable").text
        self.expect(".")
        body = self.body(frozenset({var}))
        return Lambda(var, body, pos=(tok.line, tok.col))

    def body(self, bound):
        tok = self.tok
        if tok.kind == "ident" and tok.text.lower() in _DEFINITE:
            raise self.error("definite descriptions are not supported", tok, DefiniteDescriptionError)
        if (self.is_kw("and") or self.is_kw("or")) and self.toks[self.i + 1].text == "(":
            self.advance()
            self.expect("(")
            left = self.body(bound)
            self.expect(",")
            right = self.body(bound)
            self.expect(")")
            node = And if tok.text.lower() == "and" else Or
            return node(left, right, pos=(tok.line, tok.col))
        if self.is_kw("exists") and self.toks[self.i + 1].text == "(":
            self.advance()
            self.expect("(")
            var = self.ident("variable").text
            self.expect(",")
            inner = self.body(bound | {var})
            self.expect(")")
            return Exists(var, inner, pos=(tok.line, tok.col))
        rel = self.ident("relation")
        self.expect("(")
        vtok = self.ident("variable")
        if vtok.text not in bound:
            raise self.error(f"unbound variable {vtok.text!r}", vtok, UnboundVariableError)
        self.expect(")")
        name = self.check_relation(rel, 1)
        return Rel(name, (Var(vtok.text, pos=(vtok.line, vtok.col)),), pos=(rel.line, rel.col))


def parse_goal(text: str, vocab=None) -> GoalFormula:
    return _Parser(text, vocab).goal()


def parse_expr(text: str, vocab=None) -> Lambda:
    p = _Parser(text, vocab)
    expr = p.expr()
    if p.tok.kind != "end":
        raise p.error(f"unexpected {p.tok.text!r}")
    return expr


# Printing -------------------------------------------------------------------

def _fmt_p(p: float) -> str:
    return repr(float(p))


def expr_text(expr) -> str:
    if isinstance(expr, Lambda):
        return f"lambda {expr.var}. {expr_text(expr.body)}"
    if isinstance(expr, Rel):
        return f"{expr.name}({', '.join(term_text(a) for a in expr.args)})"
    if isinstance(expr, And):
        return f"and({expr_text(expr.left)}, {expr_text(expr.right)})"
    if isinstance(expr, Or):
        return f"or({expr_text(expr.left)}, {expr_text(expr.right)})"
    if isinstance(expr, Exists):
        return f"exists({expr.var}, {expr_text(expr.body)})"
    raise TypeError(f"not an expression: {expr!r}")


def term_text(term) -> str:
    return str(term)


def fluent_text(f) -> str:
    if isinstance(f, BBool):
        if isinstance(f.phi, Den):
            return f"B(den({expr_text(f.phi.expr)}, {term_text(f.phi.term)}), {_fmt_p(f.p)})"
        return f"B({expr_text(f.phi)}, {_fmt_p(f.p)})"
    if isinstance(f, KRD):
        return f"KRD({term_text(f.term)})"
    if isinstance(f, BContents):
        return f"BContents({f.region}, {_fmt_p(f.p)})"
    if isinstance(f, ExistsInRegion):
        return f"B(ExistsIn({expr_text(f.expr)}, {f.region}), {_fmt_p(f.p)})"
    describe = getattr(f, "describe", None)
    if describe is not None:
        return describe()
    raise TypeError(f"not a goal fluent: {f!r}")


def goal_text(goal: GoalFormula) -> str:
    body = " & ".join(fluent_text(f) for f in goal.fluents)
    if goal.variables:
        return f"exists {', '.join(goal.variables)}. {body}"
    return body


__all__ = [
    "GoalSyntaxError", "UnboundVariableError", "UnknownRelationError", "DefiniteDescriptionError",
    "parse_goal", "parse_expr", "expr_text", "fluent_text", "goal_text", "term_text",
]
