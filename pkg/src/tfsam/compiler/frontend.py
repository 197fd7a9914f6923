"""Lexer and parser for the ALE-subset grammar language.

Supported statements (each ends with ``.``)::

    t sub [t1,...,tn] intro [f1:r1,...].
    name rule Head ===> cat> D1, ..., cat> Dn, goal> g(X,Y,Z), ... .
    word ---> Desc.
    empty Desc.
    name(P1,...,Pk) macro Desc.
    start> Desc.

``%`` starts a comment. Variables begin with an upper-case letter or ``_``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ArityMismatch, SourceSyntaxError, UnknownMacro
from ..types import CharStatement


# ------------------------------------------------------------------ AST

@dataclass(frozen=True)
class TypeLit:
    name: str
    line: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    line: int = 0


@dataclass(frozen=True)
class Feat:
    feature: str
    value: object
    line: int = 0


@dataclass(frozen=True)
class Conj:
    items: tuple


@dataclass(frozen=True)
class MacroCall:
    name: str
    args: tuple
    line: int = 0


@dataclass(frozen=True)
class GoalDecl:
    name: str
    args: tuple
    line: int = 0


@dataclass
class RuleDecl:
    name: str
    head: object
    body: list
    goals: list
    line: int = 0


@dataclass
class LexEntry:
    word: str
    desc: object
    line: int = 0


@dataclass
class EmptyDecl:
    desc: object
    line: int = 0


@dataclass
class MacroDecl:
    name: str
    params: tuple
    body: object
    line: int = 0


@dataclass
class SourceGrammar:
    statements: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    lexicon: list = field(default_factory=list)
    empties: list = field(default_factory=list)
    macros: dict = field(default_factory=dict)
    start: object = None


# ---------------------------------------------------------------- lexer

_SPEC = [
    ("ws", r"[ \t\r\f]+"),
    ("nl", r"\n"),
    ("comment", r"%[^\n]*"),
    ("larrow", r"--->"),
    ("rarrow", r"===>"),
    ("kw", r"(?:cat|goal|start)>"),
    ("var", r"[A-Z_][A-Za-z0-9_]*"),
    ("id", r"[a-z0-9$^'][A-Za-z0-9_$^']*(?:-(?!-)[A-Za-z0-9_$^']+)*"),
    ("punct", r"[()\[\],.:@]"),
]
_LEX = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _SPEC))


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    out: list[Tok] = []
    pos, line, lstart = 0, 1, 0
    while pos < len(text):
        m = _LEX.match(text, pos)
        if not m:
            raise SourceSyntaxError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            lstart = m.end()
        elif kind not in ("ws", "comment"):
            val = m.group()
            if kind == "punct":
                kind = val
            elif kind == "kw":
                kind = val
            out.append(Tok(kind, val, line, pos - lstart + 1))
        pos = m.end()
    out.append(Tok("eof", "", line, pos - lstart + 1))
    return out


# --------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        return SourceSyntaxError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            raise self.error(f"expected {want!r}, found {t.text or t.kind!r}")
        self.i += 1
        return t

    def accept(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return True
        return False

    # descriptions
    def desc(self):
        items = [self.term()]
        while self.tok.kind == ",":
            self.i += 1
            items.append(self.term())
        return items[0] if len(items) == 1 else Conj(tuple(items))

    def term(self):
        t = self.tok
        if t.kind == "(":
            self.i += 1
            d = self.desc()
            self.expect(")")
            return d
        if t.kind == "@":
            self.i += 1
            name = self.expect("id")
            args = ()
            if self.accept("("):
                args = [self.term()]
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
                args = tuple(args)
            return MacroCall(name.text, args, name.line)
        if t.kind == "var":
            self.i += 1
            return Var(t.text, t.line)
        if t.kind == "id":
            self.i += 1
            if self.accept(":"):
                return Feat(t.text, self.term(), t.line)
            return TypeLit(t.text, t.line)
        raise self.error(f"expected a description, found {t.text or t.kind!r}")

    # statements
    def grammar(self) -> SourceGrammar:
        g = SourceGrammar()
        while self.tok.kind != "eof":
            self.statement(g)
        return g

    def statement(self, g: SourceGrammar):
        t = self.tok
        nxt = self.peek()
        if t.kind == "start>":
            self.i += 1
            if g.start is not None:
                raise self.error("start symbol declared twice", t)
            g.start = self.desc()
            self.expect(".")
            return
        if t.kind == "id" and t.text == "empty" and nxt.kind != "larrow":
            self.i += 1
            g.empties.append(EmptyDecl(self.desc(), t.line))
            self.expect(".")
            return
        if t.kind in ("id", "var") and nxt.kind == "larrow":
            self.i += 2
            g.lexicon.append(LexEntry(t.text, self.desc(), t.line))
            self.expect(".")
            return
        if t.kind == "id" and nxt.kind == "id" and nxt.text == "sub":
            g.statements.append(self.char_statement())
            return
        if t.kind == "id" and nxt.kind == "id" and nxt.text == "rule":
            g.rules.append(self.rule())
            return
        if t.kind == "id" and (nxt.kind == "(" or (nxt.kind == "id" and nxt.text == "macro")):
            m = self.macro()
            if m.name in g.macros:
                raise self.error(f"macro {m.name} defined twice", t)
            g.macros[m.name] = m
            return
        raise self.error(f"cannot parse statement starting with {t.text or t.kind!r}")

    def char_statement(self) -> CharStatement:
        subj = self.expect("id")
        self.expect("id", "sub")
        self.expect("[")
        subs = []
        if self.tok.kind != "]":
            subs.append(self.expect("id").text)
            while self.accept(","):
                subs.append(self.expect("id").text)
        self.expect("]")
        intros = []
        if self.accept("id", "intro"):
            self.expect("[")
            if self.tok.kind != "]":
                intros.append(self.intro())
                while self.accept(","):
                    intros.append(self.intro())
            self.expect("]")
        self.expect(".")
        return CharStatement(subj.text, tuple(subs), tuple(intros), subj.line)

    def intro(self):
        f = self.expect("id").text
        self.expect(":")
        return (f, self.expect("id").text)

    def rule(self) -> RuleDecl:
        name = self.expect("id")
        self.expect("id", "rule")
        head = self.desc()
        self.expect("rarrow")
        body, goals = [], []
        while True:
            t = self.tok
            if self.accept("cat>"):
                if goals:
                    raise self.error("goals must follow all body elements", t)
                body.append(self.term())
            elif self.accept("goal>"):
                gname = self.expect("id")
                self.expect("(")
                args = [self.term()]
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
                goals.append(GoalDecl(gname.text, tuple(args), gname.line))
            else:
                raise self.error("expected 'cat>' or 'goal>'")
            if self.accept("."):
                break
            self.expect(",")
        return RuleDecl(name.text, head, body, goals, name.line)

    def macro(self) -> MacroDecl:
        name = self.expect("id")
        params = []
        if self.accept("("):
            params.append(self.expect("var").text)
            while self.accept(","):
                params.append(self.expect("var").text)
            self.expect(")")
        self.expect("id", "macro")
        body = self.desc()
        self.expect(".")
        return MacroDecl(name.text, tuple(params), body, name.line)


def parse_source(text: str) -> SourceGrammar:
    g = _Parser(text).grammar()
    for m in g.macros.values():
        _check_macros(m.body, g.macros, ())
    return g


def parse_description(text: str):
    p = _Parser(text)
    d = p.desc()
    p.expect("eof")
    return d


def _check_macros(d, macros, stack):
    if isinstance(d, MacroCall):
        if d.name not in macros:
            raise UnknownMacro(f"macro {d.name} is not defined (line {d.line})", name=d.name)
        m = macros[d.name]
        if len(m.params) != len(d.args):
            raise ArityMismatch(f"macro {d.name} takes {len(m.params)} arguments, got {len(d.args)} (line {d.line})")
        if d.name in stack:
            raise UnknownMacro(f"recursive macro {d.name}", name=d.name)
        for a in d.args:
            _check_macros(a, macros, stack)
        _check_macros(m.body, macros, stack + (d.name,))
    elif isinstance(d, Feat):
        _check_macros(d.value, macros, stack)
    elif isinstance(d, Conj):
        for x in d.items:
            _check_macros(x, macros, stack)


def expand_macros(d, macros):
    """Replace macro calls by their bodies with positional substitution."""
    if isinstance(d, MacroCall):
        if d.name not in macros:
            raise UnknownMacro(f"macro {d.name} is not defined (line {d.line})", name=d.name)
        m = macros[d.name]
        if len(m.params) != len(d.args):
            raise ArityMismatch(f"macro {d.name} takes {len(m.params)} arguments, got {len(d.args)} (line {d.line})")
        sub = dict(zip(m.params, d.args))
        return expand_macros(_substitute(m.body, sub), macros)
    if isinstance(d, Feat):
        return Feat(d.feature, expand_macros(d.value, macros), d.line)
    if isinstance(d, Conj):
        return Conj(tuple(expand_macros(x, macros) for x in d.items))
    return d


def _substitute(d, sub):
    if isinstance(d, Var):
        return sub.get(d.name, d)
    if isinstance(d, Feat):
        return Feat(d.feature, _substitute(d.value, sub), d.line)
    if isinstance(d, Conj):
        return Conj(tuple(_substitute(x, sub) for x in d.items))
    if isinstance(d, MacroCall):
        return MacroCall(d.name, tuple(_substitute(a, sub) for a in d.args), d.line)
    return d
