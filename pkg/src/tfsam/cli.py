"""Command-line interface.

Exit codes: 0 success, 1 no parse (or a machine/oracle mismatch for
``diff``), 2 bad input, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .compiler import build_grammar, compile_grammar, compile_query_term, flatten, read_object
from .compiler.codegen import Block, ObjectCode, format_instr
from .errors import FailAtTopLevel, InfiniteLoopGuard, TfsError
from .graph import Mrs
from .machine import DEFAULT_BUDGET, Machine, execute, load
from .reference import equivalent_sets, fixpoint_parse
from .tfs import avm_str, json_str, parse_term, term_str

EXIT_OK, EXIT_NO_PARSE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


@dataclass
class RunConfig:
    grammar: Path | None = None
    obj: Path | None = None
    words: list = field(default_factory=list)
    budget_steps: int = DEFAULT_BUDGET
    budget_items: int = 20000
    filter: bool = False
    format: str = "term"
    trace: int = 0

    def __post_init__(self):
        if self.budget_steps <= 0 or self.budget_items <= 0:
            raise ValueError("budgets must be positive")


@dataclass
class ParseReport:
    results: list
    counts: dict
    steps: int
    seconds: float

    @property
    def success(self) -> bool:
        return bool(self.results)


# ------------------------------------------------------------------ loading

def _is_object(text: str) -> bool:
    return text.lstrip().startswith("%% types")


def load_grammar(path):
    return build_grammar(Path(path).read_text())


def load_code(path) -> ObjectCode:
    """An object file as is, or a grammar file compiled on the fly."""
    text = Path(path).read_text()
    if _is_object(text):
        return read_object(text)
    return compile_grammar(build_grammar(text))


def render(g: Mrs, h, fmt: str) -> str:
    if fmt == "avm":
        return avm_str(g, h)
    if fmt == "jsonl":
        return json.dumps({"result": json.loads(json_str(g, h))})
    return term_str(g, h)


def _report(out, rep: ParseReport, h, fmt: str, extra: dict | None = None):
    for r in rep.results:
        print(render(r, h, fmt), file=out)
    summary = {"success": rep.success, "results": len(rep.results), "steps": rep.steps,
               "seconds": round(rep.seconds, 6), **(extra or {})}
    if fmt == "jsonl":
        summary["chart"] = {f"{i},{j}": list(v) for (i, j), v in rep.counts.items()}
        print(json.dumps(summary), file=out)
        return
    print(f"% {'success' if rep.success else 'failure'}: {len(rep.results)} result(s), "
          f"{rep.steps} steps, {rep.seconds:.4f} s", file=out)
    for k, v in (extra or {}).items():
        print(f"% {k}: {v}", file=out)
    if rep.counts:
        cells = " ".join(f"[{i},{j}]={a}/{c}" for (i, j), (a, c) in rep.counts.items())
        print(f"% edges (active/complete): {cells}", file=out)


def _tracer(level: int, out):
    if not level:
        return None

    def trace(m, pc, ins):
        where = f"{pc:5d}" if pc is not None else "    q"
        line = f"{where}  {format_instr(ins)}"
        if level > 1:
            line += f"   H={m.H} X={dict(sorted(m.X.items()))}"
        print(line, file=out)
    return trace


# ----------------------------------------------------------------- commands

def cmd_check(args, out) -> int:
    g = load_grammar(args.grammar)
    code = compile_grammar(g)
    info = {"types": len(g.h.types), "rules": len(g.rules), "derived_rules": len(g.expanded),
            "words": len(g.lexicon), "instructions": len(code.program.lines)}
    if args.format == "jsonl":
        print(json.dumps({"ok": True, **info}), file=out)
    else:
        print("OK " + " ".join(f"{k}={v}" for k, v in info.items()), file=out)
    return EXIT_OK


def cmd_compile(args, out) -> int:
    text = compile_grammar(load_grammar(args.grammar)).text()
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_disasm(args, out) -> int:
    code = load_code(args.file)
    for pc, ln in enumerate(code.program.lines):
        lab = f"{ln.label}:" if ln.label else ""
        body = f"{pc:5d}  {lab:<6}{format_instr(ln.instr)}"
        print(f"{body:<44}; {ln.comment}" if ln.comment else body, file=out)
    if code.start is not None:
        print(f"%% start X{code.start[0]}", file=out)
        print(code.start[1].text(), file=out)
    for reg, blk in code.facts:
        print(f"%% empty X{reg}", file=out)
        print(blk.text(), file=out)
    for w in sorted(code.lexicon):
        print(f"%% lexicon word {w}", file=out)
        print(code.lexicon[w].text(), file=out)
    return EXIT_OK


def cmd_parse(args, out) -> int:
    code = load_code(args.file)
    o = execute(code, args.words, budget=args.budget_steps, trace=_tracer(args.trace, sys.stderr))
    rep = ParseReport(o.results, o.chart, o.steps, o.seconds)
    _report(out, rep, code.h, args.format)
    return EXIT_OK if rep.success else EXIT_NO_PARSE


def cmd_oracle(args, out) -> int:
    g = load_grammar(args.grammar)
    t0 = time.perf_counter()
    r = fixpoint_parse(g, args.words, max_items=args.budget_items, filter=args.filter)
    counts: dict = {}
    for x in r.items:
        a, c = counts.get((x.i, x.j), (0, 0))
        counts[x.i, x.j] = (a + (x.status == "ACT"), c + (x.status == "COMP"))
    rep = ParseReport(r.results, dict(sorted(counts.items())), r.iterations, time.perf_counter() - t0)
    _report(out, rep, g.h, args.format, {"items": len(r.items), "exhausted": r.exhausted})
    if r.exhausted:
        return EXIT_BUDGET
    return EXIT_OK if rep.success else EXIT_NO_PARSE


def _sentences(args) -> list:
    if args.sentences:
        lines = Path(args.sentences).read_text().splitlines()
        return [ln.split() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    return [args.words]


def cmd_diff(args, out) -> int:
    g = load_grammar(args.grammar)
    code = compile_grammar(g)
    worst = EXIT_OK
    for words in _sentences(args):
        o = execute(code, words, budget=args.budget_steps)
        r = fixpoint_parse(g, words, max_items=args.budget_items, filter=args.filter)
        if r.exhausted:
            verdict, rc = "oracle-budget", EXIT_BUDGET
        elif o.success == r.success and equivalent_sets(o.results, r.results, g.h):
            verdict, rc = "equal", EXIT_OK
        else:
            verdict, rc = "differ", EXIT_NO_PARSE
        worst = max(worst, rc) if rc != EXIT_OK else worst
        sent = " ".join(words)
        if args.format == "jsonl":
            print(json.dumps({"input": sent, "verdict": verdict, "machine": len(o.results),
                              "oracle": len(r.results)}), file=out)
        else:
            print(f"{verdict:<13} machine={len(o.results):<4} oracle={len(r.results):<4} {sent}", file=out)
    return worst


# -------------------------------------------------------------------- debug

DEBUG_HELP = """commands:
  step [n]        execute n instructions (default 1)
  run             run until a breakpoint or the end
  break L         stop before the instruction labelled L
  regs            show registers and machine registers
  heap a b        dump heap cells a..b
  chart l r       list the edges of chart entry [l,r]
  stack           show the unification stack and return addresses
  trail           show the trail
  quit            leave"""


class Debugger:
    """A stepping session over one machine."""

    def __init__(self, m: Machine, out):
        self.m = m
        self.out = out
        self.breaks: set = set()
        self.label_at = {v: k for k, v in m.labels.items()}

    @property
    def done(self) -> bool:
        return self.m.halted or self.m.pc >= len(self.m.instrs)

    def say(self, s: str = ""):
        print(s, file=self.out)

    def where(self):
        if self.done:
            self.say("-- halted")
            return
        m = self.m
        lab = self.label_at.get(m.pc)
        self.say(f"-- {m.pc}{' ' + lab + ':' if lab else ''} {format_instr(m.instrs[m.pc])}")

    def step1(self):
        self.m.steps += 1
        if self.m.steps > self.m.budget:
            raise InfiniteLoopGuard(f"instruction budget of {self.m.budget} exhausted")
        self.m.step()

    def command(self, line: str) -> bool:
        """Run one command; False ends the session."""
        try:
            parts = shlex.split(line)
        except ValueError:
            parts = line.split()
        if not parts:
            return True
        cmd, rest = parts[0], parts[1:]
        m = self.m
        try:
            if cmd in ("quit", "q", "exit"):
                return False
            if cmd in ("help", "?"):
                self.say(DEBUG_HELP)
            elif cmd in ("step", "s"):
                for _ in range(int(rest[0]) if rest else 1):
                    if self.done:
                        break
                    self.step1()
                self.where()
            elif cmd in ("run", "r", "continue", "c"):
                first = True
                while not self.done:
                    if not first and self.label_at.get(m.pc) in self.breaks:
                        self.say(f"-- breakpoint {self.label_at[m.pc]}")
                        break
                    first = False
                    self.step1()
                self.where()
            elif cmd in ("break", "b"):
                (lab,) = rest
                if lab not in m.labels:
                    self.say(f"no label {lab}")
                else:
                    self.breaks.add(lab)
                    self.say(f"breakpoint at {lab} ({m.labels[lab]})")
            elif cmd == "regs":
                self.say("X: " + " ".join(f"X{k}={v}" for k, v in sorted(m.X.items())))
                self.say(f"LEFT={m.LEFT} MID={m.MID} RIGHT={m.RIGHT} LEN={m.LEN} "
                         f"ADDR={m.ADDR} H={m.H} pc={m.pc}")
            elif cmd == "heap":
                lo, hi = (int(rest[0]), int(rest[1])) if len(rest) == 2 else (1, m.H - 1)
                self.say(m.dump(lo, hi))
            elif cmd == "chart":
                l, r = int(rest[0]), int(rest[1])
                e = m.chart.entries.get((l, r))
                if e is None:
                    self.say("(empty)")
                else:
                    for k, a in enumerate(e.active.items):
                        mark = "*" if e.active.cur == k else " "
                        self.say(f"{mark}active   {a.label} " + " ".join(f"X{x}={y}" for x, y in a.regs))
                    for k, a in enumerate(e.complete.items):
                        mark = "*" if e.complete.cur == k else " "
                        self.say(f"{mark}complete {a}: {term_str(m.read([a]), m.h)}")
            elif cmd == "stack":
                self.say("S: " + " ".join(f"{act}:{a}" for act, a in reversed(m.S)))
                self.say("return: " + " ".join(str(p) for p in reversed(m.ret)))
            elif cmd == "trail":
                self.say(f"mark: trail={m.mark[0]} heap={m.mark[1]}")
                for a, (tag, v) in m.trail:
                    self.say(f"{a} | {tag} | {v}")
            else:
                self.say(f"unknown command {cmd!r}")
                self.say(DEBUG_HELP)
        except (ValueError, IndexError):
            self.say(f"bad arguments for {cmd}")
            self.say(DEBUG_HELP)
        except FailAtTopLevel as e:
            self.say(str(e))
            m.halted = True
        return True

    def loop(self, inp):
        self.where()
        interactive = hasattr(inp, "isatty") and inp.isatty()
        while True:
            if interactive:
                print("(debug) ", end="", file=self.out, flush=True)
            line = inp.readline()
            if not line:
                return
            if not interactive:
                self.say(f"(debug) {line.rstrip()}")
            if not self.command(line):
                return


def query_machine(h, text: str, budget: int) -> Machine:
    """A machine whose program is the query code for one term."""
    g = parse_term(text, h)
    blk = Block()
    blk.extend(compile_query_term(flatten(g, h, g.roots[0])))
    return Machine(ObjectCode(h, blk, {}, [], None), budget)


def cmd_debug(args, out, inp=None) -> int:
    inp = sys.stdin if inp is None else inp
    if args.query:
        text = Path(args.file).read_text()
        h = read_object(text).h if _is_object(text) else build_grammar(text).h
        m = query_machine(h, args.query, args.budget_steps)
    else:
        m = Machine(load_code(args.file), args.budget_steps)
        load(m, args.words)
    Debugger(m, out).loop(inp)
    return EXIT_OK


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-steps", type=int, default=DEFAULT_BUDGET, metavar="N")
    common.add_argument("--budget-items", type=int, default=20000, metavar="N")
    common.add_argument("--format", choices=("term", "avm", "jsonl"), default="term")
    common.add_argument("--trace", type=int, default=0, metavar="N")

    p = argparse.ArgumentParser(prog="tfsam", description="Typed feature structure grammar compiler and parsing machine.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="validate a grammar")
    s.add_argument("grammar")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("compile", parents=[common], help="write the object code of a grammar")
    s.add_argument("grammar")
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_compile)

    s = sub.add_parser("disasm", parents=[common], help="list object code with addresses")
    s.add_argument("file")
    s.set_defaults(fn=cmd_disasm)

    s = sub.add_parser("parse", parents=[common], help="parse with the machine")
    s.add_argument("file", help="object file or grammar")
    s.add_argument("words", nargs="*")
    s.set_defaults(fn=cmd_parse)

    s = sub.add_parser("oracle", parents=[common], help="parse with the reference fixpoint parser")
    s.add_argument("grammar")
    s.add_argument("words", nargs="*")
    s.add_argument("--filter", action="store_true", help="keep only most general items")
    s.set_defaults(fn=cmd_oracle)

    s = sub.add_parser("diff", parents=[common], help="compare machine and reference results")
    s.add_argument("grammar")
    s.add_argument("words", nargs="*")
    s.add_argument("--sentences", help="file with one input per line")
    s.add_argument("--filter", action="store_true")
    s.set_defaults(fn=cmd_diff)

    s = sub.add_parser("debug", parents=[common], help="step through the machine")
    s.add_argument("file", help="object file or grammar")
    s.add_argument("words", nargs="*")
    s.add_argument("--query", help="debug the query code of one term instead of a parse")
    s.set_defaults(fn=cmd_debug)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        RunConfig(budget_steps=args.budget_steps, budget_items=args.budget_items)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.fn(args, out)
    except InfiniteLoopGuard as e:
        _diag(args, e)
        return EXIT_BUDGET
    except TfsError as e:
        _diag(args, e)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


def _diag(args, e: TfsError):
    if getattr(args, "format", "term") == "jsonl":
        info = {k: (list(v) if isinstance(v, tuple) else v) for k, v in e.info.items()}
        for k in ("line", "col", "t1", "t2", "witnesses"):
            if hasattr(e, k):
                v = getattr(e, k)
                info[k] = list(v) if isinstance(v, tuple) else v
        print(json.dumps({"error": e.code, "message": str(e), **info}, default=str), file=sys.stderr)
    else:
        print(str(e), file=sys.stderr)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
