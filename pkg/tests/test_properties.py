"""Algebraic laws of the abstract structures, checked on random inputs."""

from hypothesis import assume, given, settings
from hypothesis import strategies as st
from strategies import H, afs, shared_terms, structures

from tfsam.afs import FAIL, abs_, afs_subsumes, conc, strictly_subsumes, unify_afs
from tfsam.graph import Builder, Mrs
from tfsam.tfs import alphabetic_variants, parse_tfs, rank

N = 1000
law = settings(max_examples=N, deadline=None)


def u(a, b):
    if a is FAIL or b is FAIL:
        return FAIL
    return unify_afs(a, b, H)


def leq(a, b):
    return afs_subsumes(a, b, H)


def plus_one(t):
    return H.depth(t) + 1


def total(a):
    """Totally well-typed closure: every node carries all its features."""
    b = Builder(H)
    ids = b.add_mrs(a)
    changed = True
    while changed:
        changed = False
        for x in range(len(b.parent)):
            if b.find(x) != x:
                continue
            for fs in H.features_of(b.type[x]):
                if fs.feature not in b.arcs[x]:
                    y = b.child(x, fs.feature)
                    assert b.set_type(y, fs.restriction)
                    changed = True
    return abs_(b.freeze([ids[a.roots[0]]]))


# ------------------------------------------------------------ unification

@law
@given(structures, structures)
def test_unification_commutes(a, b):
    assert u(a, b) == u(b, a)


@law
@given(structures, structures, structures)
def test_unification_associates(a, b, c):
    assert u(u(a, b), c) == u(a, u(b, c))


@law
@given(structures, structures, structures)
def test_unification_is_monotone(a, d, c):
    b = u(a, d)
    assume(b is not FAIL)
    assert leq(a, b)
    bc = u(b, c)
    if bc is not FAIL:
        ac = u(a, c)
        assert ac is not FAIL and leq(ac, bc)


@law
@given(structures, structures)
def test_unification_absorbs(a, b):
    assert u(a, a) == a
    ab = u(a, b)
    if ab is not FAIL:
        assert u(a, ab) == ab
        assert u(ab, b) == ab


@law
@given(structures, structures)
def test_operands_subsume_their_unification(a, b):
    ab = u(a, b)
    if ab is not FAIL:
        assert leq(a, ab) and leq(b, ab)


@law
@given(structures, structures, structures)
def test_unification_is_least(a, b, x):
    # any common upper bound of a and b lies above a ⊔ b
    c = u(a, b)
    assume(c is not FAIL)
    for upper in (x, total(c), u(x, c)):
        if upper is FAIL:
            continue
        if leq(a, upper) and leq(b, upper):
            assert leq(c, upper)


# ------------------------------------------------------------- subsumption

@law
@given(structures)
def test_subsumption_is_reflexive(a):
    assert leq(a, a) and not strictly_subsumes(a, a, H)


@law
@given(structures, structures, structures)
def test_subsumption_is_transitive(a, x, y):
    b = u(a, x)
    assume(b is not FAIL)
    c = u(b, y)
    assume(c is not FAIL)
    assert leq(a, b) and leq(b, c)
    assert leq(a, c)


@law
@given(structures, structures)
def test_subsumption_is_antisymmetric(a, b):
    if leq(a, b) and leq(b, a):
        assert a == b


# ----------------------------------------------------------------- bridge

@law
@given(structures)
def test_abs_after_conc_is_identity(a):
    assert abs_(conc(a)) == a


@law
@given(shared_terms())
def test_conc_after_abs_is_a_variant(text):
    g = parse_tfs(text, H)
    assert alphabetic_variants(conc(abs_(g)), g)


# ------------------------------------------------------------------- rank

@law
@given(structures, structures)
def test_rank_strict_on_totally_typed_structures(a, d):
    b = u(a, d)
    assume(b is not FAIL)
    ta, tb = total(a), total(b)
    assume(strictly_subsumes(ta, tb, H))
    assert rank(conc(ta), H) < rank(conc(tb), H)


@law
@given(structures, structures)
def test_rank_strict_with_positive_bottom_rank(a, d):
    b = u(a, d)
    assume(b is not FAIL and strictly_subsumes(a, b, H))
    assert rank(conc(a), H, plus_one) < rank(conc(b), H, plus_one)


def test_rank_with_zero_bottom_rank_is_not_strict_on_partial_structures():
    # one extra arc to a bot leaf: strictly more specific, same rank
    a, b = afs("a"), afs("a(d,bot)")
    small = abs_(Mrs(("a", "d"), ((("f3", 1),), ()), (0,)))
    assert strictly_subsumes(small, b, H)
    assert rank(conc(small), H) == rank(conc(b), H)
    assert rank(conc(small), H, plus_one) < rank(conc(b), H, plus_one)
    assert leq(a, b)


def generalize(a, choice):
    """One strictly more general neighbour of ``a``, or None at the top.

    Moves: raise a leaf's type to an immediate supertype, cut an unshared
    bot leaf, or give one parent of a shared leaf its own copy.
    """
    types, arcs = list(a.types), [dict(x) for x in a.arcs]
    indeg = {}
    for q, x in enumerate(arcs):
        for f, t in x.items():
            indeg.setdefault(t, []).append((q, f))
    moves = []
    for q, t in enumerate(types):
        if arcs[q]:
            continue
        for p in H.types:
            if p != t and H.subsumes(p, t) and not any(
                    v not in (p, t) and H.subsumes(p, v) and H.subsumes(v, t) for v in H.types):
                moves.append(("raise", q, p))
        ins = indeg.get(q, [])
        if len(ins) == 1 and t == "bot":
            moves.append(("cut", q, ins[0]))
        if len(ins) > 1:
            moves.append(("split", q, ins[0]))
    if not moves:
        return None
    kind, q, x = moves[choice % len(moves)]
    if kind == "raise":
        types[q] = x
    elif kind == "cut":
        del arcs[x[0]][x[1]]
    else:
        types.append(types[q])
        arcs.append({})
        arcs[x[0]][x[1]] = len(types) - 1
    g = Mrs(tuple(types), tuple(tuple(sorted(d.items())) for d in arcs), a.roots)
    return abs_(g)


@law
@given(structures, st.lists(st.integers(0, 50), min_size=1, max_size=200))
def test_descending_chains_terminate(a, choices):
    budget = rank(conc(a), H, plus_one)
    chain = [a]
    for c in choices:
        nxt = generalize(chain[-1], c)
        if nxt is None:
            break
        assert strictly_subsumes(nxt, chain[-1], H)
        assert rank(conc(nxt), H, plus_one) < rank(conc(chain[-1]), H, plus_one)
        chain.append(nxt)
    assert len(chain) <= budget + 1
    # exhausting the moves always reaches the single bot node
    x = chain[-1]
    steps = 0
    while (y := generalize(x, 0)) is not None:
        x, steps = y, steps + 1
        assert steps <= budget
    assert x == afs("bot")
