"""Regenerate the golden files under tests/golden.

Run after an intentional change to code generation or the driver, then
review the diff before committing:

    python3 scripts/regen_golden.py
"""

import json
from pathlib import Path

from tfsam.compiler import build_grammar, compile_grammar
from tfsam.compiler.codegen import compile_rule, compile_type_table, format_instr
from tfsam.machine import execute

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"


def grammar(name):
    return build_grammar((ROOT / "corpus" / f"{name}.ale").read_text())


def main():
    GOLDEN.mkdir(exist_ok=True)
    ex = grammar("example")
    (GOLDEN / "example_rule1.txt").write_text(compile_rule(ex.rules[0], ex.h).text() + "\n")

    h = grammar("running").h
    ab = compile_type_table(h).code("a", "b")
    (GOLDEN / "unify_type_a_b.txt").write_text("".join(format_instr(i) + "\n" for i in ab))

    code = compile_grammar(grammar("anbn"))
    counts = {}
    for n in range(1, 9):
        out = execute(code, ["a"] * n + ["b"] * n)
        counts[str(n)] = out.steps
    (GOLDEN / "anbn_steps.json").write_text(json.dumps(counts, indent=1) + "\n")
    print("wrote", ", ".join(sorted(p.name for p in GOLDEN.iterdir())))


if __name__ == "__main__":
    main()
