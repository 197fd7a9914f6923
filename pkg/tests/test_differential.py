import pytest
from harness import compare, inputs, sentences

from conftest import grammar


@pytest.mark.parametrize("name,n", [
    ("anbn", 6), ("eps_list", 6), ("eps_unit", 6), ("example", 4), ("toy", 3), ("ambig", 3),
])
def test_short_inputs_agree(name, n):
    bad = [" ".join(w) for w in inputs(name, n) if compare(name, w)[0] != "equal"]
    assert bad == []


@pytest.mark.parametrize("name", ["hebrew", "hebrew_fixed"])
def test_hebrew_sentences_agree(name):
    for w in sentences("hebrew.txt"):
        assert compare(name, w)[0] == "equal", w


@pytest.mark.parametrize("words,plain,fixed", [
    ("dan $ar", 1, 2), ("dana $ara", 1, 2), ("dan ^akal sepr", 2, 4), ("sepr ^adomm", 0, 2),
    ("dan natan sepr dana", 0, 8), ("dan ^akal ha-sepr", 2, 4), ("dan ^akal sepr gadol", 0, 4),
])
def test_hebrew_result_counts(words, plain, fixed):
    w = words.split()
    assert len(compare("hebrew", w)[1].results) == plain
    assert len(compare("hebrew_fixed", w)[1].results) == fixed


def test_ambiguity_is_counted_not_collapsed():
    verdict, o, r = compare("ambig", ["p", "p", "q"])
    assert verdict == "equal" and len(o.results) >= 2


def test_epsilon_fixture_uses_empty_determiner():
    verdict, o, _ = compare("eps_list", ["dog", "dog"])
    assert verdict == "equal" and o.success
    assert grammar("eps_list").empties
