from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import pytest

from tfsam.compiler import build_grammar, compile_grammar, parse_source
from tfsam.types import compile_hierarchy

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"


@lru_cache(maxsize=None)
def grammar(name: str):
    return build_grammar((CORPUS / f"{name}.ale").read_text())


@lru_cache(maxsize=None)
def code(name: str):
    return compile_grammar(grammar(name))


def hierarchy(text: str):
    return compile_hierarchy(parse_source(text).statements)


@pytest.fixture(scope="session")
def running():
    return grammar("running").h


@pytest.fixture(scope="session")
def example():
    return grammar("example")


# criterion -> (passed, detail), filled by test_acceptance and printed at the end
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abc")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:<3} {'PASS' if ok else 'FAIL'}  {detail}")
