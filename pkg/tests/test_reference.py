import pytest
from conftest import grammar

from tfsam.errors import UnknownWord
from tfsam.reference import (
    ACT, COMP, LAMBDA, NOT_APPLICABLE, OracleGrammar, apply_filter, equivalent_sets,
    fixpoint_parse, more_general, pre_terminals, strong_derive, tgw_step,
)
from tfsam.tfs import parse_term, term_str


def naive_fixpoint(g, w, limit=50):
    I = set()
    for _ in range(limit):
        J = tgw_step(g, w, I)
        if J == I:
            return I
        I = J
    raise AssertionError("no fixpoint within limit")


def test_pre_terminals(example):
    w = "john loves her".split()
    assert pre_terminals(example, w, 2, 1) == {LAMBDA}
    (one,) = pre_terminals(example, w, 1, 3)
    assert len(one.roots) == 3
    assert len(pre_terminals(grammar("ambig"), ["p", "p"], 1, 2)) == 4
    with pytest.raises(UnknownWord):
        pre_terminals(example, ["john", "sings"], 1, 2)


def test_first_step_holds_only_constants(example):
    w = "john loves her".split()
    I1 = tgw_step(example, w, set())
    lam = {x for x in I1 if x.status == ACT}
    assert lam == {type(x)(i, LAMBDA, i, ACT) for i in range(4) for x in [next(iter(lam))]}
    comps = sorted((x.i, x.j) for x in I1 if x.status == COMP)
    assert comps == [(0, 1), (1, 2), (2, 3)]


def test_step_is_monotone(example):
    w = "john loves her".split()
    chain = [set()]
    for _ in range(6):
        chain.append(tgw_step(example, w, chain[-1]))
    for a, b in zip(chain, chain[1:]):
        assert a <= b
    for a, b in zip(chain, chain[1:]):
        assert tgw_step(example, w, a) <= tgw_step(example, w, b)


@pytest.mark.parametrize("name,words", [
    ("example", "john loves her"), ("anbn", "a a b b"), ("ambig", "p p q"),
    ("toy", "x y"), ("eps_unit", "u v"), ("eps_list", "the dog"),
])
def test_semi_naive_matches_naive(name, words):
    g, w = grammar(name), words.split()
    assert fixpoint_parse(g, w).items == naive_fixpoint(g, w)


def test_example_results(example):
    r = fixpoint_parse(example, "john loves her".split())
    assert r.success and not r.exhausted
    assert [term_str(x, example.h) for x in r.results] == ["phrase(s,agr(third,sg),sem(love,john,she))"]
    assert not fixpoint_parse(example, "her loves john".split()).success


@pytest.mark.parametrize("n", range(1, 5))
def test_anbn(n):
    g = grammar("anbn")
    assert len(fixpoint_parse(g, ["a"] * n + ["b"] * n).results) == 1
    assert not fixpoint_parse(g, ["a"] * n + ["b"] * (n + 1)).success


@pytest.mark.parametrize("name,words", [("ambig", "p p q"), ("toy", "x y"), ("toy", "w"),
                                        ("example", "john loves her")])
def test_filter_keeps_most_general_results(name, words):
    g, w = grammar(name), words.split()
    plain, filt = fixpoint_parse(g, w), fixpoint_parse(g, w, filter=True)
    assert len(filt.items) <= len(plain.items)
    assert equivalent_sets(plain.results, filt.results, g.h)


def test_filter_drops_strictly_less_general(running):
    from tfsam.reference import Item
    gen = parse_term("a(d,bot)", running)
    spec = parse_term("a(d1,bot)", running)
    assert more_general(gen, spec, running)
    kept = apply_filter({Item(0, gen, 1, COMP), Item(0, spec, 1, COMP), Item(1, spec, 2, COMP)}, running)
    assert kept == {Item(0, gen, 1, COMP), Item(1, spec, 2, COMP)}


def test_budget_reports_exhaustion():
    g = grammar("olp")
    r = fixpoint_parse(g, ["w"], max_iterations=30)
    assert r.exhausted
    assert fixpoint_parse(g, ["w"], filter=True).success


def test_strong_derive():
    g = grammar("anbn")
    h = g.h
    s_ab = next(r for r in g.rules if r.name == "s_ab")
    s_asb = next(r for r in g.rules if r.name == "s_asb")
    form = parse_term("s", h)
    step = strong_derive(form, 1, s_asb, h)
    assert [step.types[r] for r in step.roots] == ["a", "s", "b"]
    done = strong_derive(step, 2, s_ab, h)
    assert [done.types[r] for r in done.roots] == ["a", "a", "b", "b"]
    assert strong_derive(done, 1, s_ab, h) is NOT_APPLICABLE


def test_oracle_works_on_unexpanded_grammar():
    # empty categories become facts; no compiled epsilon-derived rules are consulted
    og = OracleGrammar.of(grammar("eps_unit"))
    assert [r.name for r in og.facts] == ["empty1"]
    assert [r.name for r in og.rules] == ["xy", "yz", "y_only"]
