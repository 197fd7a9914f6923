"""The abstract parsing machine.

Heap cells are tuples ``(tag, payload)`` with tags ``STR`` (payload: type),
``REF`` (payload: address) and ``VAR`` (payload: type). Address 0 holds a
sentinel so that the first real cell sits at address 1, which keeps heap
dumps aligned with hand-written layouts.

Control follows the compiled driver: keys ``(LEFT, MID, RIGHT)`` select an
active list ``chart[LEFT,MID]`` and a complete list ``chart[MID,RIGHT]``;
``call`` runs the code after an active edge's dot on the current complete
edge, and a successful run copies the result into ``chart[LEFT,RIGHT]``.
Bindings made while running are trailed and undone before the next
combination; copies sit above the trail mark and survive.
"""

from __future__ import annotations

import sys
import time
from collections import Counter
from dataclasses import dataclass, field

from .compiler.codegen import FAIL_STUB, Block, Instr, ObjectCode, TypeTable, format_instr
from .compiler.goals import eval_goal
from .errors import (
    FailAtTopLevel, InfiniteLoopGuard, InvalidInstruction, RegisterOutOfRange, UnknownWord,
)
from .graph import Mrs, canonical
from .types import BOTTOM

STR, REF, VAR = "STR", "REF", "VAR"
COPY, UNIFY = "copy", "unify"
POISON = (REF, None)  # arc slot not yet written by put_arc
DEFAULT_BUDGET = 10**8
DEFAULT_HEAP_LIMIT = 4 * 10**6  # cells; copies of growing structures outpace the step count


class _Fail(Exception):
    """Raised inside an instruction to transfer control to ``fail``."""


class EdgeList:
    """An edge list with a cursor; appends during iteration are visible."""

    __slots__ = ("items", "cur")

    def __init__(self):
        self.items: list = []
        self.cur: int | None = None

    def add(self, e):
        self.items.append(e)

    def init(self):
        self.cur = 0 if self.items else None

    def advance(self):
        if self.cur is not None:
            self.cur = self.cur + 1 if self.cur + 1 < len(self.items) else None

    def current(self):
        return self.items[self.cur]

    def exhausted(self) -> bool:
        return self.cur is None


class Entry:
    __slots__ = ("active", "complete")

    def __init__(self):
        self.active = EdgeList()
        self.complete = EdgeList()


@dataclass(frozen=True)
class ActiveEdge:
    label: str
    regs: tuple  # sorted (register, address) pairs


class Chart:
    def __init__(self):
        self.entries: dict[tuple[int, int], Entry] = {}

    def __getitem__(self, key) -> Entry:
        e = self.entries.get(key)
        if e is None:
            e = self.entries[key] = Entry()
        return e

    def counts(self) -> dict:
        return {k: (len(e.active.items), len(e.complete.items))
                for k, e in sorted(self.entries.items()) if e.active.items or e.complete.items}


@dataclass
class ParseOutcome:
    results: list  # normal-form graphs of successful spanning edges
    spanning: int  # complete edges in chart[0,LEN]
    steps: int
    counts: Counter
    chart: dict
    seconds: float = 0.0

    @property
    def success(self) -> bool:
        return bool(self.results)


def key_sequence(n: int):
    """The keys visited by first_key/next_key/check_key for LEN = n."""
    m = Machine.__new__(Machine)
    m.LEFT = m.MID = m.RIGHT = 0
    m.LEN = n
    out = []
    m.RIGHT, m.LEFT, m.MID = 0, -1, -1
    while True:
        m._next_key_regs()
        out.append((m.LEFT, m.MID, m.RIGHT))
        if m._key_done():
            return out


class Machine:
    def __init__(self, code: ObjectCode, budget: int = DEFAULT_BUDGET, trace=None,
                 heap_limit: int = DEFAULT_HEAP_LIMIT):
        self.code = code
        self.heap_limit = heap_limit
        self.h = code.h
        self.table = TypeTable(code.h)
        self.budget = budget
        self.trace = trace  # callable(machine, pc, instr) or None
        self.instrs: list[Instr] = code.program.instrs()
        self.labels = {ln.label: i for i, ln in enumerate(code.program.lines) if ln.label}
        self.reset()

    # --------------------------------------------------------------- state
    def reset(self):
        self.heap: list = [("NIL", None)]
        self.X: dict[int, int] = {}
        self.S: list = []
        self.trail: list = []
        self.ret: list = []
        self.mark = (0, 1)
        self.LEFT = self.MID = self.RIGHT = self.LEN = 0
        self.ADDR = 0
        self.chart = Chart()
        self.steps = 0
        self.counts: Counter = Counter()
        self.pc = 0
        self.halted = False

    @property
    def H(self) -> int:
        return len(self.heap)

    def reg(self, i: int) -> int:
        try:
            return self.X[i]
        except KeyError:
            raise RegisterOutOfRange(f"register X{i} is not set") from None

    # ------------------------------------------------------ heap primitives
    def deref(self, a: int) -> int:
        heap = self.heap
        while True:
            tag, v = heap[a]
            if tag != REF or v == a:
                return a
            if v is None:
                raise InvalidInstruction(f"read of uninitialized arc slot at {a}")
            a = v

    def write(self, a: int, cell):
        self.trail.append((a, self.heap[a]))
        self.heap[a] = cell

    def bind(self, a1: int, a2: int):
        self.write(a1, (REF, a2))

    def build_most_general_fs(self, t: str) -> int:
        a = self.H
        self.heap.append((STR, t))
        for fs in self.h.features_of(t):
            self.heap.append((VAR, fs.restriction))
        return a

    def _expand_var(self, a: int, t: str) -> int:
        b = self.build_most_general_fs(t)
        self.bind(a, b)
        return b

    def run_type_code(self, t1: str, t2: str, addr: int) -> bool:
        """Execute unify_type[t1,t2] on the heap node at ``addr`` (of type t2)."""
        code = self.table.code(t1, t2)
        if code is FAIL_STUB:
            return False
        heap, S = self.heap, self.S
        self.ADDR = addr
        base = len(S)
        for ins in code:
            op = ins.op
            self.counts[op] += 1
            if op == "build_str":
                n = len(heap)
                heap.append((STR, ins.args[0]))
                self.bind(addr, n)
            elif op == "build_ref":
                heap.append((REF, addr + ins.args[0]))
            elif op == "build_ref_and_unify":
                S.append((UNIFY, len(heap)))
                heap.append((REF, addr + ins.args[0]))
            elif op == "build_self_ref":
                n = len(heap)
                S.append((COPY, n))
                heap.append((REF, n))
            elif op == "build_var":
                heap.append((VAR, ins.args[0]))
            elif op == "unify_feat":
                S.append((UNIFY, addr + ins.args[0]))
            elif op == "return":
                S[base:] = S[base:][::-1]
            else:  # pragma: no cover
                raise InvalidInstruction(f"{op} in type unification code")
        return True

    def unify(self, a1: int, a2: int) -> bool:
        """Full heap unification; ``a1`` plays the program side."""
        heap = self.heap
        a1, a2 = self.deref(a1), self.deref(a2)
        if a1 == a2:
            return True
        (g1, t1), (g2, t2) = heap[a1], heap[a2]
        if g1 == REF:
            self.bind(a1, a2)
            return True
        if g2 == REF:
            self.bind(a2, a1)
            return True
        if g1 == VAR or g2 == VAR:
            t = self.h.lub(t1, t2)
            if t is None:
                return False
            if g1 == VAR and g2 == VAR:
                if t == t2:
                    self.bind(a1, a2)
                elif t == t1:
                    self.bind(a2, a1)
                else:
                    self.write(a2, (VAR, t))
                    self.bind(a1, a2)
                return True
            if g1 == VAR:
                if t == t2:
                    self.bind(a1, a2)
                    return True
                a1 = self._expand_var(a1, t1)
            else:
                if t == t1:
                    self.bind(a2, a1)
                    return True
                a2 = self._expand_var(a2, t2)
        if not self.run_type_code(t1, t2, a2):
            return False
        # bound before the arcs are visited so that cycles terminate
        self.bind(a1, a2)
        for i in range(1, self.h.arity(t1) + 1):
            action, a = self.S.pop()
            if action == COPY:
                self.write(a, (REF, a1 + i))
            elif not self.unify(a, a1 + i):
                return False
        return True

    # ------------------------------------------------------------- copying
    def copy_fs(self, root: int, seen: dict | None = None) -> int:
        seen = {} if seen is None else seen
        heap = self.heap
        out = self._copy_node(root, seen)
        work = [root]
        while work:
            a = self.deref(work.pop())
            tag, t = heap[a]
            if tag != STR:
                continue
            n = seen[a]
            for i in range(1, self.h.arity(t) + 1):
                c = self.deref(a + i)
                fresh = c not in seen
                heap[n + i] = (REF, self._copy_node(c, seen))
                if fresh:
                    work.append(c)
        return out

    def _copy_node(self, a: int, seen: dict) -> int:
        a = self.deref(a)
        n = seen.get(a)
        if n is not None:
            return n
        heap = self.heap
        tag, v = heap[a]
        n = len(heap)
        seen[a] = n
        if tag == STR:
            heap.append((STR, v))
            heap.extend([POISON] * self.h.arity(v))
        elif tag == VAR:
            heap.append((VAR, v))
        else:
            heap.append((REF, n))
        return n

    def copy_mrs(self) -> tuple:
        seen: dict = {}
        return tuple((r, self.copy_fs(a, seen)) for r, a in sorted(self.X.items()))

    # ------------------------------------------------------------- control
    def fail(self):
        self.unwind(self.mark[0])
        del self.heap[self.mark[1]:]
        self.S.clear()
        if not self.ret:
            raise FailAtTopLevel("unification failed outside of a rule")
        self.pc = self.ret.pop()

    def unwind(self, to: int):
        heap, trail = self.heap, self.trail
        while len(trail) > to:
            a, cell = trail.pop()
            if a < len(heap):
                heap[a] = cell

    def _next_key_regs(self):
        self.MID -= 1
        if self.MID < self.LEFT:
            self.LEFT -= 1
            if self.LEFT < 0:
                self.RIGHT += 1
                self.LEFT = self.RIGHT - 1
            self.MID = self.RIGHT - 1

    def _key_done(self) -> bool:
        return self.RIGHT >= self.LEN and self.LEFT == 0 and self.MID == self.LEFT

    def step(self):
        """Execute one program instruction."""
        pc = self.pc
        if pc >= len(self.instrs):
            raise InvalidInstruction(f"program counter {pc} outside the code")
        ins = self.instrs[pc]
        if self.trace:
            self.trace(self, pc, ins)
        self.pc = pc + 1
        try:
            self.exec(ins)
        except _Fail:
            self.fail()

    def run(self):
        while not self.halted:
            self.steps += 1
            if self.steps > self.budget:
                raise InfiniteLoopGuard(f"instruction budget of {self.budget} exhausted", steps=self.steps)
            if len(self.heap) > self.heap_limit:
                raise InfiniteLoopGuard(f"heap limit of {self.heap_limit} cells exhausted", steps=self.steps)
            self.step()

    def run_block(self, blk: Block):
        """Run straight-line query code (lexicon, facts, start symbol)."""
        for ins in blk.instrs():
            self.steps += 1
            if self.trace:
                self.trace(self, None, ins)
            try:
                self.exec(ins)
            except _Fail:
                return False
        return True

    def branch(self, label: str):
        try:
            self.pc = self.labels[label]
        except KeyError:
            raise InvalidInstruction(f"undefined label {label}") from None

    def exec(self, ins: Instr):
        op, args = ins
        self.counts[op] += 1
        heap = self.heap
        if op == "put_node":
            t, n, i = args
            self.X[i] = len(heap)
            heap.append((STR, t))
            heap.extend([POISON] * n)
        elif op == "put_arc":
            i, off, j = args
            heap[self.reg(i) + off] = (REF, self.reg(j))
        elif op == "put_var":
            t, i = args
            self.X[i] = len(heap)
            heap.append((VAR, t))
        elif op == "proceed":
            self.LEN += 1
            self.chart[self.LEN - 1, self.LEN].complete.add(self.reg(args[0]))
        elif op == "same_word":
            self.chart[self.LEN, self.LEN + 1].complete.add(self.reg(args[0]))
        elif op == "get_structure":
            self._get_structure(*args)
        elif op == "get_var":
            self._get_var(*args)
        elif op == "unify_variable":
            self.X[args[0]] = self.S.pop()[1]
        elif op == "unify_value":
            action, a = self.S.pop()
            x = self.reg(args[0])
            if action == COPY:
                self.write(a, (REF, x))
            elif not self.unify(a, x):
                raise _Fail
        elif op == "get_value":
            if not self.unify(self.reg(args[0]), self.reg(args[1])):
                raise _Fail
        elif op == "goal":
            name, *regs = args
            if not eval_goal(self, name, [self.reg(r) for r in regs]):
                raise _Fail
        elif op == "put_rule":
            for i in range(self.LEN + 1):
                self.chart[i, i].active.add(ActiveEdge(args[0], ()))
        elif op == "first_key":
            self.RIGHT, self.LEFT, self.MID = 0, -1, -1
        elif op == "next_key":
            self._next_key_regs()
            self.chart[self.LEFT, self.MID].active.init()
            self.chart[self.MID, self.RIGHT].complete.init()
        elif op == "check_key":
            if not self._key_done():
                self.branch(args[0])
        elif op == "tst_active_edges":
            if self.chart[self.LEFT, self.MID].active.exhausted():
                self.branch(args[0])
        elif op == "next_active_edge":
            self.chart[self.LEFT, self.MID].active.advance()
            self.branch(args[0])
        elif op == "tst_complete_edges":
            lst = self.chart[self.MID, self.RIGHT].complete
            if lst.exhausted():
                lst.init()
                self.branch(args[0])
        elif op == "next_complete_edge":
            self.unwind(self.mark[0])
            self.chart[self.MID, self.RIGHT].complete.advance()
            self.branch(args[0])
        elif op == "call":
            e1 = self.chart[self.LEFT, self.MID].active.current()
            self.X = dict(e1.regs)
            self.ADDR = self.chart[self.MID, self.RIGHT].complete.current()
            self.ret.append(self.pc)
            self.mark = (len(self.trail), len(heap))
            self.branch(e1.label)
        elif op == "load_fs":
            self.X[args[0]] = self.ADDR
        elif op == "copy_active_edge":
            regs = self.copy_mrs()
            self.chart[self.LEFT, self.RIGHT].active.add(ActiveEdge(args[0], regs))
            self.pc = self.ret.pop()
        elif op == "copy_complete_edge":
            a = self.copy_fs(self.reg(args[0]))
            self.chart[self.LEFT, self.RIGHT].complete.add(a)
            self.pc = self.ret.pop()
        elif op == "end_of_program":
            self.halted = True
        else:
            raise InvalidInstruction(f"{format_instr(ins)} cannot be executed here")

    def _get_structure(self, t: str, n: int, i: int):
        heap = self.heap
        addr = self.deref(self.reg(i))
        self.X[i] = addr
        tag, v = heap[addr]
        if tag == REF:
            h0 = len(heap)
            heap.append((STR, t))
            self.bind(addr, h0)
            heap.extend((REF, h0 + j) for j in range(1, n + 1))
            self.S.extend((COPY, h0 + j) for j in range(n, 0, -1))
            return
        if tag == VAR:
            u = self.h.lub(t, v)
            if u is None:
                raise _Fail
            addr = self._expand_var(addr, u)
            v = u
        if not self.run_type_code(t, v, addr):
            raise _Fail

    def _get_var(self, t: str, i: int):
        addr = self.deref(self.reg(i))
        self.X[i] = addr
        tag, v = self.heap[addr]
        if tag == REF:
            self.write(addr, (VAR, t))
            return
        u = self.h.lub(t, v)
        if u is None:
            raise _Fail
        if u == v:
            return
        if tag == VAR:
            self.write(addr, (VAR, u))
        elif not self.unify(self.build_most_general_fs(t), addr):
            raise _Fail

    # ------------------------------------------------------------ read-back
    def read(self, roots) -> Mrs:
        """The graph rooted at heap addresses ``roots`` (VAR cells as leaves)."""
        heap, h = self.heap, self.h
        num: dict[int, int] = {}
        types: list = []
        arcs: list = []

        def node(a):
            a = self.deref(a)
            q = num.get(a)
            if q is None:
                q = num[a] = len(types)
                tag, v = heap[a]
                types.append(v if tag in (STR, VAR) else BOTTOM)
                arcs.append(())
                if tag == STR:
                    work.append((a, q, v))
            return q

        work: list = []
        rs = [node(r) for r in roots]
        while work:
            a, q, t = work.pop()
            arcs[q] = tuple(sorted((fs.feature, node(a + fs.position)) for fs in h.features_of(t)))
        return canonical(Mrs(tuple(types), tuple(arcs), tuple(rs)))

    def dump(self, lo: int = 1, hi: int | None = None) -> str:
        hi = self.H - 1 if hi is None else hi
        out = []
        for a in range(lo, min(hi, self.H - 1) + 1):
            tag, v = self.heap[a]
            if tag == REF and v is None:
                v = "?"
            out.append(f"{a} | {tag} | {v}")
        return "\n".join(out)


# ------------------------------------------------------------------ driver

def assemble_query(code: ObjectCode, words) -> Block:
    blk = Block()
    for w in words:
        entry = code.lexicon.get(w)
        if entry is None:
            raise UnknownWord(f"word {w!r} is not in the lexicon", word=w)
        blk.lines.extend(entry.lines)
    return blk


def load(m: Machine, words):
    """Lexicon code, then the empty-category facts at every position."""
    if not m.run_block(assemble_query(m.code, words)):  # pragma: no cover - query code cannot fail
        raise FailAtTopLevel("lexical code failed")
    for reg, blk in m.code.facts:
        for i in range(m.LEN + 1):
            mark = (len(m.trail), m.H)
            m.X = {}
            if m.run_block(blk):
                m.chart[i, i].complete.add(m.reg(reg))
                m.trail.clear()
            else:
                m.unwind(mark[0])
                del m.heap[mark[1]:]
                m.S.clear()
    m.trail.clear()
    m.mark = (0, m.H)


def extract_results(m: Machine) -> list:
    out = []
    for a in m.chart[0, m.LEN].complete.items:
        mark = (len(m.trail), m.H)
        ok = True
        if m.code.start is not None:
            reg, blk = m.code.start
            m.X = {}
            m.run_block(blk)
            ok = m.unify(a, m.reg(reg))
        if ok:
            out.append(m.read([a]))
        m.unwind(mark[0])
        del m.heap[mark[1]:]
        m.S.clear()
    return out


def execute(code: ObjectCode, words, budget: int = DEFAULT_BUDGET, trace=None,
            heap_limit: int = DEFAULT_HEAP_LIMIT) -> ParseOutcome:
    t0 = time.perf_counter()
    m = Machine(code, budget, trace, heap_limit)
    load(m, words)
    m.run()
    res = extract_results(m)
    return ParseOutcome(res, len(m.chart[0, m.LEN].complete.items), m.steps, m.counts,
                        m.chart.counts(), time.perf_counter() - t0)


def run_query(code_or_h, instrs) -> Machine:
    """Run bare query/program instructions on a fresh machine (no grammar)."""
    from .types import TypeHierarchy

    if isinstance(code_or_h, TypeHierarchy):
        code_or_h = ObjectCode(code_or_h, Block(), {}, [], None)
    m = Machine(code_or_h)
    blk = Block()
    blk.extend(instrs)
    if not m.run_block(blk):
        raise FailAtTopLevel("query failed")
    return m


sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))
