"""Machine-versus-oracle comparison over the bundled corpus."""

import itertools
import time

from conftest import CORPUS, code, grammar

from tfsam.machine import execute
from tfsam.reference import equivalent_sets, fixpoint_parse

# grammar -> longest exhaustive input; small vocabularies go further
EXHAUSTIVE = {"anbn": 8, "eps_list": 8, "eps_unit": 8, "example": 6, "toy": 5, "ambig": 4}
SENTENCES = {"hebrew": "hebrew.txt", "hebrew_fixed": "hebrew.txt"}


def inputs(name, max_len):
    words = grammar(name).words()
    for n in range(1, max_len + 1):
        yield from (list(w) for w in itertools.product(words, repeat=n))


def sentences(fname):
    lines = (CORPUS / fname).read_text().splitlines()
    return [ln.split() for ln in lines if ln.strip() and not ln.startswith("#")]


def compare(name, words):
    """'equal', 'differ' or 'oracle-budget' for one input."""
    g = grammar(name)
    o = execute(code(name), words)
    r = fixpoint_parse(g, words)
    if r.exhausted:
        return "oracle-budget", o, r
    same = o.success == r.success and equivalent_sets(o.results, r.results, g.h)
    return ("equal" if same else "differ"), o, r


def sweep(name, corpus_inputs):
    """Counts of verdicts and the list of differing inputs."""
    tally, bad, hits = {"equal": 0, "differ": 0, "oracle-budget": 0}, [], 0
    for w in corpus_inputs:
        verdict, o, _ = compare(name, w)
        tally[verdict] += 1
        hits += o.success
        if verdict != "equal":
            bad.append(" ".join(w))
    return tally, bad, hits


def full_sweep():
    t0 = time.perf_counter()
    report = {}
    for name, n in EXHAUSTIVE.items():
        report[name] = sweep(name, inputs(name, n))
    for name, fname in SENTENCES.items():
        report[name] = sweep(name, sentences(fname))
    return report, time.perf_counter() - t0
