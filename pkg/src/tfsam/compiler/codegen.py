"""Flattening and code generation.

Instructions are ``Instr(op, args)`` tuples. Registers are integers
(``X3`` is ``3``), labels are strings (``"L6"``), types are names.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from ..errors import ObjectFormatError
from ..graph import Mrs
from ..types import TypeHierarchy


class Instr(NamedTuple):
    op: str
    args: tuple = ()

    def __str__(self) -> str:
        return format_instr(self)


class Line(NamedTuple):
    label: str | None
    instr: Instr
    comment: str = ""


# operand kinds per mnemonic: t=type, n=arity, X=register, L=label, i=int, g=goal name
SIGNATURES = {
    "put_node": "tnX", "put_arc": "XiX", "put_var": "tX", "proceed": "X", "same_word": "X",
    "get_structure": "tnX", "get_var": "tX", "unify_variable": "X", "unify_value": "X",
    "build_str": "t", "build_ref": "i", "build_ref_and_unify": "i", "build_self_ref": "",
    "build_var": "t", "unify_feat": "i", "return": "",
    "put_rule": "L", "first_key": "", "next_key": "", "check_key": "L",
    "tst_active_edges": "L", "next_active_edge": "L", "tst_complete_edges": "L",
    "next_complete_edge": "L", "call": "", "load_fs": "X", "copy_active_edge": "L",
    "copy_complete_edge": "X", "end_of_program": "",
    # extensions (see README): register-register unification and goal built-ins
    "get_value": "XX", "goal": "gXXX",
}
CORE_INSTRUCTIONS = {
    "put_node", "put_arc", "proceed", "build_str", "build_ref_and_unify", "build_ref",
    "build_self_ref", "build_var", "unify_feat", "get_structure", "unify_variable",
    "unify_value", "put_rule", "first_key", "next_key", "check_key", "tst_active_edges",
    "next_active_edge", "tst_complete_edges", "next_complete_edge", "call", "load_fs",
    "copy_active_edge", "copy_complete_edge",
}
LAZY_AND_LEXICAL = {"put_var", "get_var", "same_word"}
CONTROL_EXTRA = {"return", "end_of_program"}
EXTENSIONS = {"get_value", "goal"}


def format_instr(ins: Instr) -> str:
    sig = SIGNATURES[ins.op]
    parts, k, i = [], 0, 0
    while i < len(sig):
        c = sig[i]
        if c == "t" and sig[i + 1: i + 2] == "n":
            parts.append(f"{ins.args[k]}/{ins.args[k + 1]}")
            k += 2
            i += 2
            continue
        a = ins.args[k]
        parts.append(f"X{a}" if c == "X" else str(a))
        k += 1
        i += 1
    return ins.op + (" " + ",".join(parts) if parts else "")


def parse_instr(text: str) -> Instr:
    text = text.strip()
    op, _, rest = text.partition(" ")
    if op not in SIGNATURES:
        raise ObjectFormatError(f"unknown mnemonic {op!r}")
    sig = SIGNATURES[op]
    toks = [t.strip() for t in rest.split(",")] if rest.strip() else []
    args: list = []
    want = [c for c in sig if c != "n"]
    if len(toks) != len(want):
        raise ObjectFormatError(f"{op} expects {len(want)} operands, got {len(toks)}: {text!r}")
    for c, tok in zip(want, toks):
        try:
            if c == "t" and "n" in sig:
                t, _, n = tok.rpartition("/")
                args.extend([t, int(n)])
            elif c == "X":
                if not tok.startswith("X"):
                    raise ValueError
                args.append(int(tok[1:]))
            elif c == "i":
                args.append(int(tok))
            else:
                args.append(tok)
        except ValueError:
            raise ObjectFormatError(f"bad operand {tok!r} in {text!r}") from None
    return Instr(op, tuple(args))


# ------------------------------------------------------------- flattening

class Equation(NamedTuple):
    reg: int
    type: str
    args: tuple | None  # None marks a partial (most general) sub-term


class Registers:
    """Rule-wide register allocation: one register per graph node."""

    def __init__(self, start: int = 1):
        self.of: dict[int, int] = {}
        self.next = start

    def fresh(self) -> int:
        r = self.next
        self.next += 1
        return r

    def get(self, q: int) -> int:
        if q not in self.of:
            self.of[q] = self.fresh()
        return self.of[q]


def flatten(g: Mrs, h: TypeHierarchy, root: int, regs: Registers | None = None, done: set | None = None):
    """Equations for the term rooted at node ``root`` of ``g``.

    Preorder: a node's equation comes first, registers for its new
    children are allocated in argument order, then the children are
    processed left to right. Nodes in ``done`` already have equations.
    """
    regs = regs or Registers()
    done = set() if done is None else done
    out: list[Equation] = []

    def visit(q):
        done.add(q)
        t = g.types[q]
        arcs = dict(g.arcs[q])
        feats = h.feature_names(t) if t in h else tuple(sorted(arcs))
        if not arcs:
            out.append(Equation(regs.get(q), t, () if not feats else None))
            return
        if set(arcs) != set(feats):
            feats = tuple(f for f in feats if f in arcs) + tuple(sorted(set(arcs) - set(feats)))
        kids = [arcs[f] for f in feats]
        out.append(Equation(regs.get(q), t, tuple(regs.get(c) for c in kids)))
        for c in kids:
            if c not in done:
                visit(c)

    if root not in done:
        visit(root)
    return out


def equations_str(eqs) -> list[str]:
    out = []
    for e in eqs:
        if e.args is None:
            out.append(f"X{e.reg} = {e.type}")
        elif e.args:
            out.append(f"X{e.reg} = {e.type}(" + ",".join(f"X{a}" for a in e.args) + ")")
        else:
            out.append(f"X{e.reg} = {e.type}")
    return out


def compile_query_term(eqs) -> list[Instr]:
    """Two streams: every put_node/put_var, then every put_arc."""
    nodes, arcs = [], []
    for e in eqs:
        if e.args is None:
            nodes.append(Instr("put_var", (e.type, e.reg)))
            continue
        nodes.append(Instr("put_node", (e.type, len(e.args), e.reg)))
        for j, a in enumerate(e.args, 1):
            arcs.append(Instr("put_arc", (e.reg, j, a)))
    return nodes + arcs


def compile_program_term(eqs, seen: set | None = None) -> list[Instr]:
    """get_structure per equation; unify_variable on a register's first use."""
    seen = set() if seen is None else seen
    out = []
    for e in eqs:
        seen.add(e.reg)
        if e.args is None:
            out.append(Instr("get_var", (e.type, e.reg)))
            continue
        out.append(Instr("get_structure", (e.type, len(e.args), e.reg)))
        for a in e.args:
            if a in seen:
                out.append(Instr("unify_value", (a,)))
            else:
                seen.add(a)
                out.append(Instr("unify_variable", (a,)))
    return out


def query_code(g: Mrs, h: TypeHierarchy, roots=None, regs: Registers | None = None, done=None):
    regs = regs or Registers()
    done = set() if done is None else done
    eqs = []
    for r in (g.roots if roots is None else roots):
        regs.get(r)
        eqs.extend(flatten(g, h, r, regs, done))
    return compile_query_term(eqs), regs


# -------------------------------------------------------- type unification

class _FailStub:
    def __repr__(self):
        return "FAIL"


FAIL_STUB = _FailStub()


class TypeTable:
    """The unify_type[t1,t2] functions, generated lazily and cached."""

    def __init__(self, h: TypeHierarchy):
        self.h = h
        self._cache: dict = {}

    def code(self, t1: str, t2: str):
        key = (t1, t2)
        c = self._cache.get(key)
        if c is None:
            c = self._cache[key] = _unify_type(self.h, t1, t2)
        return c

    def all(self) -> dict:
        return {(a, b): self.code(a, b) for a in self.h.types for b in self.h.types}


def compile_type_table(h: TypeHierarchy) -> TypeTable:
    return TypeTable(h)


def _unify_type(h: TypeHierarchy, t1: str, t2: str):
    """Code for unifying a program node of type t1 with a heap node of type t2."""
    t = h.lub(t1, t2)
    if t is None:
        return FAIL_STUB
    if t == t2:
        return tuple(Instr("unify_feat", (h.position(t2, f),)) for f in h.feature_names(t1)) + (Instr("return"),)
    out = [Instr("build_str", (t,))]
    f1, f2 = set(h.feature_names(t1)), set(h.feature_names(t2))
    for fs in h.features_of(t):
        f = fs.feature
        if f in f1 and f in f2:
            out.append(Instr("build_ref_and_unify", (h.position(t2, f),)))
        elif f in f1:
            out.append(Instr("build_self_ref"))
        elif f in f2:
            out.append(Instr("build_ref", (h.position(t2, f),)))
        else:
            out.append(Instr("build_var", (fs.restriction,)))
    out.append(Instr("return"))
    return tuple(out)


# ------------------------------------------------------------ object code

@dataclass
class Block:
    """A labelled instruction sequence."""

    lines: list = field(default_factory=list)

    def emit(self, ins: Instr, label: str | None = None, comment: str = ""):
        self.lines.append(Line(label, ins, comment))

    def extend(self, instrs, label: str | None = None):
        for k, ins in enumerate(instrs):
            self.emit(ins, label if k == 0 else None)

    def instrs(self):
        return [ln.instr for ln in self.lines]

    def text(self) -> str:
        out = []
        for ln in self.lines:
            lab = f"{ln.label}:" if ln.label else ""
            body = f"{lab:<6}{format_instr(ln.instr)}"
            out.append(f"{body:<34}; {ln.comment}" if ln.comment else body)
        return "\n".join(out)


@dataclass
class ObjectCode:
    h: TypeHierarchy
    program: Block
    lexicon: dict  # word -> Block (entries chained with same_word, ending in proceed)
    facts: list  # list of (root register, Block) built at every chart position
    start: tuple | None  # (root register, Block)

    def text(self) -> str:
        out = ["%% types", self.h.source(), "%% rules", self.program.text()]
        if self.start is not None:
            out += [f"%% start X{self.start[0]}", self.start[1].text()]
        for reg, blk in self.facts:
            out += [f"%% empty X{reg}", blk.text()]
        for w in sorted(self.lexicon):
            out += [f"%% lexicon word {w}", self.lexicon[w].text()]
        return "\n".join(s for s in out if s != "") + "\n"


# ------------------------------------------------------------------ rules

DRIVER_LABELS = ("L1", "L2", "L3", "L4", "L5")
FIRST_RULE_LABEL = 6


def compile_rule(rule, h: TypeHierarchy, first_label: int = FIRST_RULE_LABEL) -> Block:
    """Code for one rule; body element i is labelled ``L{first_label+i}``.

    Registers are allocated rule-wide, so a node shared between body
    elements is matched with unify_value in the later element and the head
    code only builds the nodes no body element mentions.
    """
    g = rule.graph
    regs, done, seen = Registers(), set(), set()
    blk = Block()
    for i in range(rule.body_len):
        root = g.roots[i]
        lab = f"L{first_label + i}"
        if root in regs.of:
            r = regs.fresh()
            blk.emit(Instr("load_fs", (r,)), lab, f"rule {rule.name}, element {i + 1}")
            blk.emit(Instr("get_value", (regs.of[root], r)))
        else:
            r = regs.get(root)
            blk.emit(Instr("load_fs", (r,)), lab, f"rule {rule.name}, element {i + 1}")
            blk.extend(compile_program_term(flatten(g, h, root, regs, done), seen))
        if i < rule.body_len - 1:
            blk.emit(Instr("copy_active_edge", (f"L{first_label + i + 1}",)))
    tail = [g.roots[rule.body_len]] + list(g.roots[rule.n:])
    eqs = []
    for q in tail:
        regs.get(q)
        eqs.extend(flatten(g, h, q, regs, done))
    blk.extend(compile_query_term(eqs))
    for gl in rule.goals:
        blk.emit(Instr("goal", (gl.name,) + tuple(regs.of[g.roots[a]] for a in gl.args)))
    blk.emit(Instr("copy_complete_edge", (regs.of[g.roots[rule.body_len]],)))
    return blk


def compile_term_block(g: Mrs, h: TypeHierarchy, root: int | None = None, goals=()) -> tuple[int, Block]:
    """Query code for a single structure (a fact, start symbol or lexical entry)."""
    root = g.roots[0] if root is None else root
    regs = Registers()
    instrs, _ = query_code(g, h, [root] + [q for q in g.roots[1:]], regs)
    blk = Block()
    blk.extend(instrs)
    for gl in goals:
        blk.emit(Instr("goal", (gl.name,) + tuple(regs.of[g.roots[a]] for a in gl.args)))
    return regs.of[root], blk


def compile_lexicon_entry(entries, h: TypeHierarchy) -> Block:
    """All senses of one word: same_word after each but the last, then proceed."""
    blk = Block()
    for k, g in enumerate(entries):
        reg, b = compile_term_block(g, h)
        blk.lines.extend(b.lines)
        blk.emit(Instr("proceed" if k == len(entries) - 1 else "same_word", (reg,)))
    return blk


def compile_grammar(gr) -> ObjectCode:
    from .grammar import expand_empty_categories, order_unit_rules

    h = gr.h
    original = [r for r in gr.rules if r.body_len > 0]
    derived, facts = expand_empty_categories(original, gr.empties, h)
    facts = [r for r in gr.rules if r.body_len == 0] + facts
    rules = order_unit_rules(original + derived, h)
    gr.expanded, gr.facts = derived, facts

    label, blocks, starts = FIRST_RULE_LABEL, [], []
    for r in rules:
        starts.append((f"L{label}", r.name))
        blocks.append(compile_rule(r, h, label))
        label += r.body_len
    prog = Block()
    for lab, name in starts:
        prog.emit(Instr("put_rule", (lab,)), comment=f"rule {name}")
    l1, l2, l3, l4, l5 = DRIVER_LABELS
    prog.emit(Instr("first_key"))
    prog.emit(Instr("next_key"), l1)
    prog.emit(Instr("tst_active_edges", (l5,)), l2)
    prog.emit(Instr("tst_complete_edges", (l4,)), l3)
    prog.emit(Instr("call"))
    prog.emit(Instr("next_complete_edge", (l3,)))
    prog.emit(Instr("next_active_edge", (l2,)), l4)
    prog.emit(Instr("check_key", (l1,)), l5)
    prog.emit(Instr("end_of_program"))
    for b in blocks:
        prog.lines.extend(b.lines)

    fact_blocks = [compile_term_block(e, h) for e in gr.empties]
    for r in facts:
        fact_blocks.append(compile_term_block(r.graph, h, r.graph.roots[0], r.goals))
    lexicon = {w: compile_lexicon_entry(es, h) for w, es in gr.lexicon.items()}
    start = compile_term_block(gr.start, h) if gr.start is not None else None
    return ObjectCode(h, prog, lexicon, fact_blocks, start)


# ------------------------------------------------------------ object files

def _parse_block(lines) -> Block:
    blk = Block()
    for lineno, raw in lines:
        text, _, comment = raw.partition(";")
        text = text.strip()
        if not text:
            continue
        label = None
        if ":" in text.split()[0]:
            label, _, text = text.partition(":")
            label = label.strip()
            text = text.strip()
        try:
            ins = parse_instr(text)
        except ObjectFormatError as e:
            raise ObjectFormatError(f"line {lineno}: {e.args[0]}") from None
        blk.emit(ins, label, comment.strip())
    return blk


def read_object(text: str) -> ObjectCode:
    """Inverse of :meth:`ObjectCode.text`."""
    from ..types import compile_hierarchy
    from .frontend import parse_source

    sections: list = []
    for n, line in enumerate(text.splitlines(), 1):
        if line.startswith("%%"):
            sections.append((line[2:].strip(), []))
        elif sections:
            sections[-1][1].append((n, line))
        elif line.strip():
            raise ObjectFormatError(f"line {n}: text before the first section")
    kinds = [s[0].split()[0] if s[0] else "" for s in sections]
    if "types" not in kinds or "rules" not in kinds:
        raise ObjectFormatError("object file needs %% types and %% rules sections")
    h = prog = start = None
    lexicon, facts = {}, []
    for head, body in sections:
        kind, *rest = head.split()
        if kind == "types":
            h = compile_hierarchy(parse_source("\n".join(l for _, l in body)).statements)
        elif kind == "rules":
            prog = _parse_block(body)
        elif kind == "start":
            start = (_reg(rest), _parse_block(body))
        elif kind == "empty":
            facts.append((_reg(rest), _parse_block(body)))
        elif kind == "lexicon" and len(rest) == 2 and rest[0] == "word":
            lexicon[rest[1]] = _parse_block(body)
        else:
            raise ObjectFormatError(f"unknown section %% {head}")
    code = ObjectCode(h, prog, lexicon, facts, start)
    validate(code)
    return code


def _reg(rest) -> int:
    if len(rest) != 1 or not rest[0].startswith("X"):
        raise ObjectFormatError(f"expected a register, got {' '.join(rest)!r}")
    return int(rest[0][1:])


def validate(code: ObjectCode) -> None:
    """Labels resolve and every type operand exists with the right arity."""
    labels = {ln.label for ln in code.program.lines if ln.label}
    blocks = [code.program] + list(code.lexicon.values()) + [b for _, b in code.facts]
    if code.start:
        blocks.append(code.start[1])
    for blk in blocks:
        for ln in blk.lines:
            ins, sig = ln.instr, SIGNATURES[ln.instr.op]
            k = 0
            for i, c in enumerate(sig):
                a = ins.args[k]
                if c == "t":
                    if a not in code.h:
                        raise ObjectFormatError(f"{format_instr(ins)}: unknown type {a}")
                    if sig[i + 1: i + 2] == "n" and ins.args[k + 1] != code.h.arity(a):
                        raise ObjectFormatError(f"{format_instr(ins)}: {a} has arity {code.h.arity(a)}")
                elif c == "L" and a not in labels:
                    raise ObjectFormatError(f"{format_instr(ins)}: undefined label {a}")
                elif c == "g":
                    from .grammar import GOALS
                    if a not in GOALS:
                        raise ObjectFormatError(f"{format_instr(ins)}: unknown goal {a}")
                k += 1
