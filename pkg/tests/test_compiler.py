import pytest
from conftest import CORPUS, GOLDEN, code, grammar, hierarchy

from tfsam.compiler import build_grammar, compile_grammar
from tfsam.compiler.codegen import (
    FAIL_STUB, Block, ObjectCode, compile_program_term, compile_query_term, compile_rule, compile_type_table,
    equations_str, flatten, format_instr, parse_instr, read_object, validate,
)
from tfsam.compiler.goals import eval_goal, eval_goal_graph
from tfsam.errors import (
    NotAList, NotASet, ObjectFormatError, SourceSyntaxError, UnknownGoal, UnknownMacro, UnknownWord,
)
from tfsam.graph import Builder
from tfsam.machine import Machine, execute
from tfsam.normal import fill
from tfsam.tfs import parse_term, term_str


def fmt(instrs):
    return [format_instr(i) for i in instrs]


def eqs(text, h):
    g = parse_term(text, h)
    return flatten(g, h, g.roots[0])


def test_flatten_golden(running):
    assert equations_str(eqs("b(b([1]d,[1]),d)", running)) == [
        "X1 = b(X2,X3)", "X2 = b(X4,X4)", "X4 = d", "X3 = d"]
    assert equations_str(eqs("a([3]d1,[3])", running)) == ["X1 = a(X2,X2)", "X2 = d1"]


def test_query_and_program_code(running):
    e = eqs("b(b([1]d,[1]),d)", running)
    assert fmt(compile_query_term(e)) == [
        "put_node b/2,X1", "put_node b/2,X2", "put_node d/0,X4", "put_node d/0,X3",
        "put_arc X1,1,X2", "put_arc X1,2,X3", "put_arc X2,1,X4", "put_arc X2,2,X4"]
    assert fmt(compile_program_term(eqs("a([3]d1,[3])", running))) == [
        "get_structure a/2,X1", "unify_variable X2", "unify_value X2", "get_structure d1/0,X2"]


def test_partial_subterm_uses_var(running):
    assert fmt(compile_query_term(eqs("a(d,bot)", running)))[:3] == [
        "put_node a/2,X1", "put_node d/0,X2", "put_node bot/0,X3"]
    e = flatten(parse_term("a", running), running, 0)
    assert fmt(compile_query_term(e)) == ["put_var a,X1"]
    assert fmt(compile_program_term(e)) == ["get_var a,X1"]


def test_unify_type_golden(running):
    t = compile_type_table(running)
    assert fmt(t.code("a", "b")) == [
        "build_str c", "build_ref_and_unify 1", "build_self_ref", "build_var bot", "build_ref 2", "return"]
    assert t.code("g", "d") is FAIL_STUB
    assert fmt(t.code("a", "c")) == ["unify_feat 1", "unify_feat 2", "return"]
    assert fmt(t.code("bot", "d1")) == ["return"]
    assert len(t.all()) == 81


def test_driver_shape():
    lines = code("example").program.text().splitlines()[:11]
    ops = [ln.split(";")[0].split() for ln in lines]
    assert ops == [
        ["put_rule", "L6"], ["put_rule", "L8"], ["first_key"], ["L1:", "next_key"],
        ["L2:", "tst_active_edges", "L5"], ["L3:", "tst_complete_edges", "L4"], ["call"],
        ["next_complete_edge", "L3"], ["L4:", "next_active_edge", "L2"], ["L5:", "check_key", "L1"],
        ["end_of_program"],
    ]


def test_rule_golden(example):
    got = compile_rule(example.rules[0], example.h).text() + "\n"
    assert got == (GOLDEN / "example_rule1.txt").read_text()


def test_instruction_round_trip():
    for text in ["put_node b/2,X1", "put_arc X1,2,X3", "get_var agr,X3", "copy_active_edge L7",
                 "build_ref_and_unify 1", "return"]:
        assert format_instr(parse_instr(text)) == text


@pytest.mark.parametrize("name", ["example", "anbn", "eps_list", "eps_unit", "hebrew"])
def test_object_file_round_trip(name):
    c = code(name)
    text = c.text()
    again = read_object(text)
    validate(again)
    assert again.text() == text


def test_object_code_runs_the_same_after_reading():
    c = code("example")
    w = "john loves her".split()
    assert execute(read_object(c.text()), w).results == execute(c, w).results


def test_validate_rejects_bad_objects():
    text = code("example").text()
    with pytest.raises(ObjectFormatError):
        validate(read_object(text.replace("copy_active_edge L7", "copy_active_edge L99")))
    with pytest.raises(ObjectFormatError):
        validate(read_object(text.replace("get_structure sign/3,X1", "get_structure sign/2,X1", 1)))
    with pytest.raises(ObjectFormatError):
        read_object("%% rules\nfrobnicate X1\n")


def test_compilation_is_deterministic():
    text = (CORPUS / "hebrew.ale").read_text()
    assert compile_grammar(build_grammar(text)).text() == compile_grammar(build_grammar(text)).text()


def test_epsilon_expansion_hebrew():
    g = grammar("hebrew")
    code("hebrew")
    assert [r.name for r in g.expanded] == [
        "subject_head-e1.1", "head_complement-e2.1", "marker_head-e1.1", "head_adjunct-e1.1"]
    assert all(r.derived_from and r.n == next(o.n for o in g.rules if o.name == r.derived_from) - 1
               for r in g.expanded)


def test_epsilon_expansion_single_level():
    g = grammar("eps_loop")
    code("eps_loop")
    assert g.expanded == []
    assert [(r.name, term_str(r.graph, g.h)) for r in g.facts] == [("cons-e1.1", "ne_list(a,e_list)")]


def test_epsilon_unit_rules():
    g = grammar("eps_unit")
    code("eps_unit")
    assert [r.name for r in g.expanded] == ["xy-e2.1", "yz-e1.1"]
    assert [r.name for r in g.facts] == ["y_only-e1.1"]


def list_h():
    return hierarchy("""
    bot sub [list,tok,set].
    list sub [e_list,ne_list]. e_list sub []. ne_list sub [] intro [hd:tok,tl:list].
    tok sub [p,q]. p sub []. q sub [].
    set sub [e_set,ne_set]. e_set sub []. ne_set sub [] intro [elt:tok,elts:set].
    """)


def run_goal(h, name, *args):
    """Evaluate a goal on the heap and on a graph builder; both results."""
    m = Machine(ObjectCode(h, Block(), {}, [], None))
    roots = []
    for text in args:
        g = parse_term(text, h)
        blk = Block()
        blk.extend(compile_query_term(flatten(g, h, g.roots[0])))
        m.X = {}
        assert m.run_block(blk)
        roots.append(m.reg(1))
    ok_m = eval_goal(m, name, roots)
    heap_out = term_str(m.read([roots[2]]), h) if ok_m else None

    b = Builder(h)
    nodes = []
    for text in args:
        g = parse_term(text, h)
        idx = b.add_mrs(g)
        nodes.append(idx[g.roots[0]])
    ok_g = eval_goal_graph(b, name, nodes)
    if ok_g:
        fill(b)
    graph_out = term_str(b.freeze([nodes[2]]), h) if ok_g else None
    return heap_out, graph_out


def test_append_on_heap_and_graph():
    h = list_h()
    heap, graph = run_goal(h, "append", "ne_list(p,ne_list(q,e_list))", "ne_list(p,e_list)", "list")
    assert heap == graph == "ne_list(p,ne_list(q,ne_list(p,e_list)))"
    assert run_goal(h, "append", "e_list", "ne_list(q,e_list)", "list") == ("ne_list(q,e_list)",) * 2
    assert run_goal(h, "append", "ne_list(p,e_list)", "e_list", "ne_list(q,list)") == (None, None)
    # an open first argument cannot be walked
    assert run_goal(h, "append", "list", "e_list", "list") == (None, None)


def test_union_keeps_duplicates():
    h = list_h()
    heap, graph = run_goal(h, "union", "ne_set(p,e_set)", "ne_set(p,e_set)", "set")
    assert heap == graph == "ne_set(p,ne_set(p,e_set))"


def test_goal_argument_errors():
    h = list_h()
    with pytest.raises(NotAList):
        run_goal(h, "append", "p", "e_list", "list")
    with pytest.raises(NotASet):
        run_goal(h, "union", "e_list", "e_set", "set")
    with pytest.raises(UnknownGoal):
        run_goal(h, "reverse", "e_list", "e_list", "list")


def test_goal_needs_list_types():
    with pytest.raises(NotAList):
        build_grammar("bot sub [t]. t sub []. r rule t ===> cat> t, cat> t, goal> append(t,t,t). x ---> t.")


def test_source_errors():
    with pytest.raises(SourceSyntaxError):
        build_grammar("bot sub [t]. t sub []. r rule t ===> .")
    with pytest.raises(UnknownMacro):
        build_grammar("bot sub [t]. t sub []. x ---> @nope.")


def test_unknown_word_at_parse_time():
    with pytest.raises(UnknownWord):
        execute(code("example"), ["john", "sings"])
