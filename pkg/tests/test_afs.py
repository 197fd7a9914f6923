import pytest

from tfsam.afs import (
    FAIL, LAMBDA, abs_, abs_mrs, afs_subsumes, concat, normalize, substructure, unify_afs,
    unify_in_context,
)
from tfsam.errors import IndexOutOfRange
from tfsam.graph import make_mrs
from tfsam.reference import pre_terminals
from tfsam.tfs import parse_term, parse_tfs

E = ()


def A(text, h):
    return abs_(parse_tfs(text, h))


def M(text, h):
    return abs_mrs(parse_term(text, h))


def test_normalize_fusion_closure(running):
    f = normalize([E, ("f1",), ("f2",), ("f1", "f3")], {}, [(("f1",), ("f2",))], running)
    assert ("f2", "f3") in f.pi
    assert f.equiv(("f1", "f3"), ("f2", "f3"))


def test_normalize_type_join(running):
    f = normalize([E, ("f1",), ("f2",)], {("f1",): "a", ("f2",): "b"}, [(("f1",), ("f2",))], running)
    assert f.theta(("f1",)) == "c" and f.theta(("f2",)) == "c"


def test_normalize_idempotent(running):
    f = A("a([1]d1,[1])", running)
    again = normalize(f.pi, {p: f.theta(p) for p in f.pi},
                      [(p, q) for c in f.classes() for p in c for q in c], running)
    assert again == f


def test_normalize_clash(running):
    assert normalize([E, ("f1",)], {E: "g", ("f1",): "d"}, [(E, ("f1",))], running) is FAIL


def test_unify_examples(running):
    a = A("a([1]d1,[1])", running)
    assert unify_afs(a, a, running) == a
    u = unify_afs(a, A("b(d,d)", running), running)
    assert u.theta(E) == "c"
    assert u.equiv(("f3",), ("f1",)) and u.theta(("f3",)) == "d1"
    assert u.theta(("f2",)) == "d"
    assert ("f4",) not in u.pi  # totality is the callers' business
    assert unify_afs(A("g", running), A("d", running), running) is FAIL


def test_unify_is_least_upper_bound(running):
    a, b = A("a(d,bot)", running), A("b(d1,bot)", running)
    u = unify_afs(a, b, running)
    assert afs_subsumes(a, u, running) and afs_subsumes(b, u, running)
    assert unify_afs(u, a, running) == u  # a ⪯ u


def test_substructure_and_concat(running):
    m = M("a([1]d1,d), [1], b(d2,bot)", running)
    assert substructure(m, 1, 3) == m
    mid = substructure(m, 2, 2)
    assert len(mid) == 1 and mid.theta((1, E)) == "d1"
    assert substructure(m, 2, 1) == LAMBDA
    with pytest.raises(IndexOutOfRange):
        substructure(m, 0, 2)
    head = substructure(m, 1, 2)
    assert head.equiv((1, ("f3",)), (2, E))
    assert concat(m, LAMBDA) == m == concat(LAMBDA, m)
    assert len(concat(head, mid)) == 3


def test_pre_terminal_concatenation(example):
    w = ["john", "loves", "her"]
    for i in range(1, 4):
        for j in range(i, 4):
            for k in range(j + 1, 4):
                left = pre_terminals(example, w, i, j)
                right = pre_terminals(example, w, j + 1, k)
                whole = pre_terminals(example, w, i, k)
                for x in left:
                    for y in right:
                        assert concat(abs_mrs(x), abs_mrs(y)) in {abs_mrs(z) for z in whole}


def test_unify_in_context(running):
    m = M("a([1]d,bot), b([1],bot)", running)
    assert unify_in_context(m, [1, 2], m, running) == m
    spec = A("a(d1,bot)", running)
    r = unify_in_context(m, [1], spec, running)
    assert r.theta((2, ("f3",))) == "d1"  # the shared node specialises in both roots
    assert afs_subsumes(m, r, running)
    assert unify_in_context(m, [2], A("d", running), running) is FAIL


def test_afs_subsumption_via_graph_agrees(running):
    pairs = [("d", "d1"), ("a(d,bot)", "a([1]d1,[1])"), ("g", "c(d,bot,bot,bot)"), ("d1", "d2")]
    for x, y in pairs:
        a, b = A(x, running), A(y, running)
        expected = a.pi <= b.pi and all(running.subsumes(a.theta(p), b.theta(p)) for p in a.pi) and all(
            b.equiv(p, q) for c in a.classes() for p in c for q in c)
        assert afs_subsumes(a, b, running) == expected


def test_make_mrs_is_canonical(running):
    x = make_mrs(["a", "d1"], [{"f3": 1, "f1": 1}, {}], [0])
    y = make_mrs(["d1", "a"], [{}, {"f1": 0, "f3": 0}], [1])
    assert x == y
