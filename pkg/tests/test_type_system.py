import itertools

import pytest
from conftest import hierarchy

from tfsam.errors import (
    ApproprNonMonotone, DuplicateCharacterization, FeatureIntroductionViolation,
    FeatureRedeclaredOnSubtype, NotBoundedComplete, UndeclaredType,
)
from tfsam.types import BOTTOM, TOP

ORDER = ["bot", "g", "d", "a", "b", "c", "e", "d1", "d2"]

# rows/columns in ORDER; "-" marks an inconsistent pair
LUB_TABLE = """
bot g d a b c e d1 d2
g g - a b c e - -
d - d - - - - d1 d2
a a - a c c - - -
b b - c b c e - -
c c - c c c - - -
e e - - e - e - -
d1 - d1 - - - - d1 -
d2 - d2 - - - - - d2
"""


def lub_rows():
    rows = [ln.split() for ln in LUB_TABLE.strip().splitlines()]
    out = {}
    for t1, row in zip(ORDER, rows):
        assert len(row) == 9
        for t2, v in zip(ORDER, row):
            out[t1, t2] = None if v == "-" else v
    return out


def test_running_hierarchy_shape(running):
    assert set(running.types) == set(ORDER)
    assert TOP not in running.types
    assert running.arity("c") == 4


def test_lub_table_cells(running):
    table = lub_rows()
    assert len(table) == 81
    for (t1, t2), v in table.items():
        assert running.lub(t1, t2) == v, (t1, t2)


@pytest.mark.parametrize("t,feats", [
    ("bot", []), ("g", ["f3:d"]), ("d", []), ("a", ["f3:d", "f1:bot"]), ("b", ["f3:d", "f2:bot"]),
    ("c", ["f3:d", "f1:bot", "f4:bot", "f2:bot"]), ("e", ["f3:d", "f2:bot"]), ("d1", []), ("d2", []),
])
def test_approp_column(running, t, feats):
    assert [f"{fs.feature}:{fs.restriction}" for fs in running.features_of(t)] == feats
    assert running.arity(t) == len(feats)
    assert [fs.position for fs in running.features_of(t)] == list(range(1, len(feats) + 1))


def test_lub_examples(running):
    assert running.lub("a", "b") == "c"
    assert running.lub(BOTTOM, "d") == "d"
    assert running.lub("g", "d") is None


def test_singleton_hierarchy():
    h = hierarchy("t sub [].")
    assert set(h.types) == {BOTTOM, "t"}
    assert h.lub("t", "t") == "t"


def test_not_bounded_complete_names_witnesses():
    with pytest.raises(NotBoundedComplete) as ei:
        hierarchy("bot sub [x,y]. x sub [p,q]. y sub [p,q]. p sub []. q sub [].")
    assert {ei.value.t1, ei.value.t2} == {"x", "y"}
    assert set(ei.value.witnesses) == {"p", "q"}


def test_hierarchy_errors():
    with pytest.raises(DuplicateCharacterization):
        hierarchy("bot sub [t]. t sub []. t sub [].")
    with pytest.raises(UndeclaredType):
        hierarchy("bot sub [t]. t sub [u].")
    with pytest.raises(FeatureIntroductionViolation):
        hierarchy("bot sub [p,q]. p sub [] intro [f:bot]. q sub [] intro [f:bot].")
    with pytest.raises((ApproprNonMonotone, FeatureRedeclaredOnSubtype)):
        hierarchy("bot sub [p,x,y]. x sub [y]. y sub []. p sub [q] intro [f:y]. q sub [] intro [f:x].")


def test_glb(running):
    assert running.glb({"a", "b"}) == "g"
    assert running.glb({"d"}) == "d"
    assert running.glb({"g", "d"}) == BOTTOM


def test_approp_loops(running):
    assert running.detect_approp_loops() == []
    assert hierarchy("t sub [] intro [f:t].").detect_approp_loops() == [["t"]]
    assert hierarchy("p sub [] intro [f:q]. q sub [] intro [g:p].").detect_approp_loops() == [["p", "q"]]


def test_lub_algebra_exhaustive(running):
    ts = running.types
    for t in ts:
        assert running.lub(BOTTOM, t) == t
        assert running.lub(t, t) == t
    for t1, t2 in itertools.product(ts, repeat=2):
        assert running.lub(t1, t2) == running.lub(t2, t1)
    for t1, t2, t3 in itertools.product(ts, repeat=3):
        l12, l23 = running.lub(t1, t2), running.lub(t2, t3)
        left = None if l12 is None else running.lub(l12, t3)
        right = None if l23 is None else running.lub(t1, l23)
        assert left == right
        if running.subsumes(t1, t2):
            a, b = running.lub(t1, t3), running.lub(t2, t3)
            if a is not None and b is not None:
                assert running.subsumes(a, b)


def test_lub_is_least_upper_bound_by_brute_force(running):
    ts = running.types
    for t1, t2 in itertools.product(ts, repeat=2):
        ubs = [u for u in ts if running.subsumes(t1, u) and running.subsumes(t2, u)]
        least = [u for u in ubs if all(running.subsumes(u, v) for v in ubs)]
        assert running.lub(t1, t2) == (least[0] if least else None)


def test_appropriateness_is_inherited(running):
    for t in running.types:
        for fs in running.features_of(t):
            for u in running.upper_bounds(t):
                r = running.approp(fs.feature, u)
                assert r is not None and running.subsumes(fs.restriction, r)


def test_statement_order_does_not_matter():
    src = ["bot sub [g,d].", "g sub [a,b] intro [f3:d].", "a sub [c] intro [f1:bot].",
           "c sub [] intro [f4:bot].", "b sub [c,e] intro [f2:bot].", "e sub [].",
           "d sub [d1,d2].", "d1 sub [].", "d2 sub []."]
    h1 = hierarchy(" ".join(src))
    h2 = hierarchy(" ".join(src[:1] + src[1:][::-1]))
    for t1, t2 in itertools.product(h1.types, repeat=2):
        assert h1.lub(t1, t2) == h2.lub(t1, t2)
    for t in h1.types:
        assert h1.features_of(t) == h2.features_of(t)
