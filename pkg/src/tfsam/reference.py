"""Declarative reference parser: items and the parsing-step operator.

An item ``[i, A, j, status]`` pairs a span with an abstract multi-rooted
structure, kept as a canonical normal-form graph. Active items hold rule
prefixes (possibly more specific than the rule), complete items hold one
structure. The parser iterates the step operator from the empty set until
nothing changes or a budget runs out; with the subsumption filter on, only
the most general item per ``(i, j, status)`` class survives.

Rules are applied with full unification over their graphs, so goal
arguments (extra roots of the rule graph) take part in every step and goals
run when a body is complete.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

from .compiler.goals import eval_goal_graph
from .compiler.grammar import Grammar, Rule
from .errors import InconsistentDescription, UnknownWord
from .graph import Builder, Mrs, canonical
from .normal import fill, filled, prune
from .types import TypeHierarchy

ACT, COMP = "ACT", "COMP"
LAMBDA = Mrs((), (), ())
NOT_APPLICABLE = None


class Item(NamedTuple):
    i: int
    A: Mrs
    j: int
    status: str


def canon(g: Mrs, h: TypeHierarchy) -> Mrs:
    """Representative of ``g`` up to alphabetic variance and lazy expansion."""
    return prune(filled(g, h), h)


# ----------------------------------------------------------- subsumption

def more_general(a: Mrs, b: Mrs, h: TypeHierarchy) -> bool:
    """a ⪯ b on normal-form graphs.

    A leaf of ``b`` stands for the most general structure of its type, so
    when ``a`` has arcs where ``b`` has a leaf, the leaf is expanded on the
    fly with fresh unshared nodes of the appropriate types.
    """
    if len(a.roots) != len(b.roots):
        return False
    btypes = list(b.types)
    barcs = [dict(x) for x in b.arcs]
    m: dict[int, int] = {}
    stack = list(zip(a.roots, b.roots))[::-1]
    while stack:
        x, y = stack.pop()
        if x in m:
            if m[x] != y:
                return False
            continue
        if not h.subsumes(a.types[x], btypes[y]):
            return False
        m[x] = y
        if a.arcs[x] and not barcs[y]:
            for fs in h.features_of(btypes[y]):
                btypes.append(fs.restriction)
                barcs.append({})
                barcs[y][fs.feature] = len(btypes) - 1
        for f, t in a.arcs[x]:
            u = barcs[y].get(f)
            if u is None:
                return False
            stack.append((t, u))
    return True


def most_general(graphs, h: TypeHierarchy) -> list:
    """Distinct ⪯-minimal members, in first-occurrence order."""
    uniq = list(dict.fromkeys(graphs))
    return [g for g in uniq if not any(o != g and more_general(o, g, h) and not more_general(g, o, h)
                                       for o in uniq)]


def equivalent_sets(xs, ys, h: TypeHierarchy) -> bool:
    """Equal up to ⪯-equivalence after keeping only the most general members."""
    xs, ys = most_general(xs, h), most_general(ys, h)
    if len(xs) != len(ys):
        return False
    left = list(ys)
    for x in xs:
        for k, y in enumerate(left):
            if more_general(x, y, h) and more_general(y, x, h):
                del left[k]
                break
        else:
            return False
    return True


# ---------------------------------------------------------------- grammar

@dataclass
class OracleGrammar:
    h: TypeHierarchy
    rules: list  # Rule with body_len >= 1
    facts: list  # Rule of length 1 (empty categories, empty-bodied rules)
    lexicon: dict
    start: Mrs | None

    @classmethod
    def of(cls, g: Grammar) -> "OracleGrammar":
        rules = [r for r in g.rules if r.body_len > 0]
        facts = [Rule(f"empty{k + 1}", e, 1) for k, e in enumerate(g.empties)]
        facts += [r for r in g.rules if r.body_len == 0]
        return cls(g.h, rules, facts, g.lexicon, g.start)


def _as_oracle(g) -> OracleGrammar:
    return g if isinstance(g, OracleGrammar) else OracleGrammar.of(g)


def pre_terminals(g, w, j: int, k: int) -> set:
    """Abstract sentential forms of ``w[j..k]`` (1-based, inclusive)."""
    g = _as_oracle(g)
    if j > k:
        return {LAMBDA}
    choices = []
    for word in w[j - 1:k]:
        cats = g.lexicon.get(word)
        if not cats:
            raise UnknownWord(f"word {word!r} is not in the lexicon", word=word)
        choices.append(cats)
    out = set()
    for combo in itertools.product(*choices):
        types, arcs, roots = [], [], []
        for c in combo:
            off = len(types)
            types.extend(c.types)
            arcs.extend(tuple((f, t + off) for f, t in a) for a in c.arcs)
            roots.extend(r + off for r in c.roots)
        out.add(canonical(Mrs(tuple(types), tuple(arcs), tuple(roots))))
    return out


def _unify(h: TypeHierarchy, rule: Rule, parts):
    """Unify structures into rule roots; ``parts`` is ``[(graph, [root index, ...])]``."""
    b = Builder(h)
    R = rule.graph
    ir = b.add_mrs(R)
    for G, idx in parts:
        ig = b.add_mrs(G)
        for pos, ri in enumerate(idx):
            if not b.union(ir[R.roots[ri]], ig[G.roots[pos]]):
                return None
    try:
        fill(b)
    except InconsistentDescription:
        return None
    return b, ir


def _run_goals(h: TypeHierarchy, rule: Rule, b: Builder, ir) -> bool:
    if not rule.goals:
        return True
    R = rule.graph
    for gl in rule.goals:
        if not eval_goal_graph(b, gl.name, [ir[R.roots[a]] for a in gl.args]):
            return False
    try:
        fill(b)
    except InconsistentDescription:
        return False
    return True


def _freeze(b: Builder, ir, R: Mrs, idx, h) -> Mrs:
    return prune(b.freeze([ir[R.roots[k]] for k in idx]), h)


def dot_move(h, rule: Rule, act: Mrs, comp: Mrs):
    """Case 1: the item after moving the dot of ``act`` over ``comp`` in ``rule``."""
    k = len(act.roots)
    res = _unify(h, rule, [(act, list(range(k))), (comp, [k])])
    if res is None:
        return None
    b, ir = res
    return _freeze(b, ir, rule.graph, range(k + 1), h)


def complete(h, rule: Rule, act: Mrs):
    """Case 2: the head of ``rule`` once ``act`` covers its whole body."""
    res = _unify(h, rule, [(act, list(range(rule.body_len)))])
    if res is None:
        return None
    b, ir = res
    if not _run_goals(h, rule, b, ir):
        return None
    return _freeze(b, ir, rule.graph, [rule.body_len], h)


def fact(h, rule: Rule):
    """Case 4: the structure of a length-1 rule (goals evaluated)."""
    res = _unify(h, rule, [])
    if res is None:
        return None
    b, ir = res
    if not _run_goals(h, rule, b, ir):
        return None
    return _freeze(b, ir, rule.graph, [0], h)


# ------------------------------------------------------------- operator

def _constant_items(g: OracleGrammar, w) -> set:
    n, h = len(w), g.h
    out = {Item(i, LAMBDA, i, ACT) for i in range(n + 1)}
    for r in g.facts:
        a = fact(h, r)
        if a is not None:
            out.update(Item(i, a, i, COMP) for i in range(n + 1))
    for i, word in enumerate(w, 1):
        cats = g.lexicon.get(word)
        if not cats:
            raise UnknownWord(f"word {word!r} is not in the lexicon", word=word)
        out.update(Item(i - 1, canon(c, h), i, COMP) for c in cats)
    return out


def _derived(g: OracleGrammar, acts, comps, memo: dict | None = None) -> set:
    """Cases 1 and 2 over the given active/complete item collections.

    ``memo`` caches rule applications by structure; the same structures
    recur at many spans of one input.
    """
    h = g.h
    memo = {} if memo is None else memo
    out = set()
    by_left: dict[int, list] = {}
    for c in comps:
        by_left.setdefault(c.i, []).append(c)
    for a in acts:
        k = len(a.A.roots)
        for ri, r in enumerate(g.rules):
            if k < r.body_len:
                for c in by_left.get(a.j, ()):
                    key = (ri, a.A, c.A)
                    x = memo[key] if key in memo else memo.setdefault(key, dot_move(h, r, a.A, c.A))
                    if x is not None:
                        out.add(Item(a.i, x, c.j, ACT))
            elif k == r.body_len:
                key = (ri, a.A)
                x = memo[key] if key in memo else memo.setdefault(key, complete(h, r, a.A))
                if x is not None:
                    out.add(Item(a.i, x, a.j, COMP))
    return out


def tgw_step(g, w, I) -> set:
    """One application of the step operator to the item set ``I``."""
    g = _as_oracle(g)
    I = set(I)
    acts = [x for x in I if x.status == ACT]
    comps = [x for x in I if x.status == COMP]
    return _constant_items(g, w) | _derived(g, acts, comps)


def apply_filter(I, h: TypeHierarchy) -> set:
    """Drop items for which a strictly more general item of the same class exists."""
    groups: dict = {}
    for x in I:
        groups.setdefault((x.i, x.j, x.status, len(x.A.roots)), []).append(x)
    out = set()
    for xs in groups.values():
        for x in xs:
            if not any(y.A != x.A and more_general(y.A, x.A, h) and not more_general(x.A, y.A, h) for y in xs):
                out.add(x)
    return out


@dataclass
class FixpointResult:
    items: set
    success: bool
    exhausted: bool
    iterations: int
    results: list = field(default_factory=list)

    @property
    def complete_items(self):
        return [x for x in self.items if x.status == COMP]


def fixpoint_parse(g, w, max_iterations: int = 1000, max_items: int = 20000,
                   filter: bool = False) -> FixpointResult:
    """Iterate the step operator from the empty set (semi-naively).

    Each round only combines pairs that involve an item added in the
    previous round; by monotonicity this yields the same sequence of sets
    as re-applying the operator to the whole set.
    """
    g = _as_oracle(g)
    w = list(w)
    h = g.h
    I: set = set()
    delta = _constant_items(g, w)
    if filter:
        delta = apply_filter(delta, h)
    it, exhausted = 1, False
    memo: dict = {}
    while delta:
        I |= delta
        if it >= max_iterations or len(I) > max_items:
            exhausted = True
            break
        acts = [x for x in I if x.status == ACT]
        comps = [x for x in I if x.status == COMP]
        new_a = [x for x in delta if x.status == ACT]
        new_c = [x for x in delta if x.status == COMP]
        cand = _derived(g, new_a, comps, memo) | _derived(g, acts, new_c, memo)
        nxt = I | cand
        if filter:
            nxt = apply_filter(nxt, h)
        delta = nxt - I
        if filter:
            I &= nxt
        it += 1
    res = results_of(g, I, len(w))
    return FixpointResult(I, bool(res), exhausted, it, res)


def results_of(g: OracleGrammar, I, n: int) -> list:
    h = g.h
    out = []
    for x in I:
        if x.status != COMP or x.i != 0 or x.j != n:
            continue
        if g.start is None:
            out.append(x.A)
            continue
        b = Builder(h)
        ia = b.add_mrs(x.A)
        isg = b.add_mrs(g.start)
        if not b.union(ia[x.A.roots[0]], isg[g.start.roots[0]]):
            continue
        try:
            fill(b)
        except InconsistentDescription:
            continue
        out.append(prune(b.freeze([ia[x.A.roots[0]]]), h))
    return sorted(out, key=lambda m: (m.types, m.arcs, m.roots))


def strong_derive(a: Mrs, j: int, rule: Rule, h: TypeHierarchy):
    """Replace element ``j`` (1-based) of ``a`` by the body of ``rule``.

    The rule's head is unified with ``a``'s j-th element first; the result
    is NOT_APPLICABLE when that fails.
    """
    b = Builder(h)
    ia = b.add_mrs(a)
    R = rule.graph
    ir = b.add_mrs(R)
    if not b.union(ia[a.roots[j - 1]], ir[R.roots[rule.body_len]]):
        return NOT_APPLICABLE
    try:
        fill(b)
    except InconsistentDescription:
        return NOT_APPLICABLE
    roots = ([ia[r] for r in a.roots[:j - 1]] + [ir[r] for r in R.roots[:rule.body_len]]
             + [ia[r] for r in a.roots[j:]])
    return prune(b.freeze(roots), h)
