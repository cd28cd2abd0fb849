import pytest

from dslicer.agraph import (AssignmentGraph, TranslationError, build_graph, export_dot,
                            node_method, translate_instruction)
from dslicer.hierarchy import build_hierarchy
from dslicer.ir import BinOp, SsConfig, parse_program

# every flow of the worked example, through the three-address temporaries
P1_EDGES = {
    ("SRC:Api.source", "L:C.m2.v"), ("L:C.m2.v", "R:C.m2"), ("R:C.m2", "L:C.m1.v"),
    ("SRC:Api.source", "L:C.m3.v"), ("L:C.m3.v", "F:C.v1"), ("F:C.v1", "L:C.m4.v"),
    ("L:C.m4.v", "F:C.v2"), ("F:C.v2", "L:C.m5.v"), ("L:C.m5.v", "SNK:Api.sink"),
    ("K:0", "L:C.m1.t"), ("L:C.m1.t", "SNK:Api.sink"),
}


def instr_at(p, cls, method, index):
    return p.get_class(cls).method(method).body[index]


def test_return_edge(p1, cfg):
    h = build_hierarchy(p1)
    ret = instr_at(p1, "C", "m2", 1)
    assert translate_instruction(ret, ("C", "m2"), h, cfg) == {("L:C.m2.v", "R:C.m2")}


def test_binop_edges():
    p = parse_program("class C { method m(this : C) { var v1 : int; var v2 : int; var v3 : int; "
                      "v1 = binop v2 v3; } }")
    h = build_hierarchy(p)
    edges = translate_instruction(BinOp("v1", "v2", "v3"), ("C", "m"), h, SsConfig())
    assert edges == {("L:C.m.v2", "L:C.m.v1"), ("L:C.m.v3", "L:C.m.v1")}


def test_virtual_call_edges(p1, cfg):
    h = build_hierarchy(p1)
    call = instr_at(p1, "C", "m1", 0)
    assert translate_instruction(call, ("C", "m1"), h, cfg) == {
        ("L:C.m1.this", "L:C.m2.this"), ("R:C.m2", "L:C.m1.v")}


def test_source_call_edges(p1, cfg):
    h = build_hierarchy(p1)
    call = instr_at(p1, "C", "m3", 0)
    assert translate_instruction(call, ("C", "m3"), h, cfg) == {("SRC:Api.source", "L:C.m3.v")}


def test_p1_graph_contains_worked_example_flows(p1, cfg):
    g = build_graph(p1, build_hierarchy(p1), cfg)
    assert P1_EDGES <= g.edges
    assert g.source_nodes == {"SRC:Api.source"}
    assert g.sink_nodes == {"SNK:Api.sink"}
    assert g.unresolved == []
    # the only other flows are receivers and the allocation in main
    assert g.edges - P1_EDGES == {
        ("N:C", "L:A.main.o"), ("L:A.main.o", "L:C.m1.this"), ("L:A.main.o", "L:C.m3.this"),
        ("L:A.main.o", "L:C.m4.this"), ("L:A.main.o", "L:C.m5.this"),
        ("L:C.m1.this", "L:C.m2.this")}


def test_empty_program_graph():
    g = build_graph(parse_program(""), build_hierarchy(parse_program("")), SsConfig())
    assert g.nodes == set() and g.edges == set()


API_TEXT = """
class K {{
  field f;
  method m(this : K, a : int) {{
    var x : int; var y : int; var r : int;
    {body}
  }}
  method callee(this : K, p : int) {{ return p; }}
}}
class S extends K {{ method callee(this : S, p : int) {{ var t : int; return t; }} }}
"""


def edges_of(body, cfg=SsConfig({"Api.src"}, {"Api.snk"})):
    p = parse_program(API_TEXT.format(body=body))
    g = build_graph(p, build_hierarchy(p), cfg)
    return {e for e in g.edges if e[0].startswith(("L:K.m.", "SRC", "R:", "K:", "N:", "F:"))
            and not e[0].startswith("L:K.callee") and not e[0].startswith("L:S.")}, g


def test_source_arguments_receive_taint():
    edges, g = edges_of("r = scall Api.src(x, y);")
    assert edges == {("SRC:Api.src", "L:K.m.r"), ("SRC:Api.src", "L:K.m.x"),
                     ("SRC:Api.src", "L:K.m.y")}


def test_sink_call_ignores_lvalue():
    edges, g = edges_of("r = scall Api.snk(x, y);")
    assert g.edges == {("L:K.m.x", "SNK:Api.snk"), ("L:K.m.y", "SNK:Api.snk"),
                       ("L:K.callee.p", "R:K.callee"), ("L:S.callee.t", "R:S.callee")}


def test_signature_both_source_and_sink():
    cfg = SsConfig({"Api.x"}, {"Api.x"})
    _, g = edges_of("r = scall Api.x(a);", cfg)
    assert {("SRC:Api.x", "L:K.m.r"), ("SRC:Api.x", "L:K.m.a"), ("L:K.m.a", "SNK:Api.x")} <= g.edges


def test_config_takes_precedence_over_bodies():
    cfg = SsConfig({"K.callee"}, set())
    _, g = edges_of("r = vcall K.callee(this, a);", cfg)
    assert ("SRC:K.callee", "L:K.m.r") in g.edges
    assert not any(b.startswith("L:K.callee") for _, b in g.edges)


def test_zero_argument_sink_is_isolated_node():
    _, g = edges_of("scall Api.snk();")
    assert "SNK:Api.snk" in g.nodes and g.sink_nodes == {"SNK:Api.snk"}


def test_cha_call_reaches_every_override():
    _, g = edges_of("r = vcall K.callee(this, a);")
    assert {("L:K.m.a", "L:K.callee.p"), ("L:K.m.a", "L:S.callee.p"),
            ("L:K.m.this", "L:K.callee.this"), ("L:K.m.this", "L:S.callee.this"),
            ("R:K.callee", "L:K.m.r"), ("R:S.callee", "L:K.m.r")} <= g.edges


def test_unresolved_virtual_call_model():
    _, g = edges_of("r = vcall K.missing(this, a, x);")
    model = {("L:K.m.this", "L:K.m.r"), ("L:K.m.a", "L:K.m.r"), ("L:K.m.x", "L:K.m.r"),
             ("L:K.m.a", "L:K.m.this"), ("L:K.m.x", "L:K.m.this")}
    assert model <= g.edges
    assert [str(s) for s in g.unresolved] == ["K.m[0] -> K.missing"]


def test_unresolved_static_call_model():
    _, g = edges_of("scall Lib.log(a); r = scall Lib.id(x);")
    assert ("L:K.m.x", "L:K.m.r") in g.edges
    assert not any(e[0] == "L:K.m.a" for e in g.edges)
    assert len(g.unresolved) == 2


def test_arrays_collapse_index():
    p = parse_program("class K { method m(this : K) { var a : int[]; var i : int; var v : int; "
                      "a[i] = v; v = a[i]; } }")
    g = build_graph(p, build_hierarchy(p), SsConfig())
    assert g.edges == {("L:K.m.v", "L:K.m.a"), ("L:K.m.a", "L:K.m.v")}


def test_fields_unify_across_receivers_and_subclasses():
    p = parse_program("""
    class C { field f; }
    class D extends C { }
    class U {
      method w(this : U, o1 : C, o2 : C, o3 : D, x : int) { o1.f = x; o2.f = x; o3.f = x; }
    }""")
    g = build_graph(p, build_hierarchy(p), SsConfig())
    assert {b for _, b in g.edges} == {"F:C.f"}


def test_unresolved_call_in_p1_is_flagged(p1_text, cfg):
    p = parse_program(p1_text.replace("vcall C.m5(o);", "vcall C.m5(o);\n    vcall C.m9(o);"))
    g = build_graph(p, build_hierarchy(p), cfg)
    assert [str(s) for s in g.unresolved] == ["A.main[5] -> C.m9"]


def test_arity_mismatch_names_call_site():
    p = parse_program("class K { method m(this : K) { vcall K.m(this, this); } }")
    with pytest.raises(TranslationError, match=r"K\.m\[0\]"):
        build_graph(p, build_hierarchy(p), SsConfig())


def test_node_method():
    assert node_method("L:C.m.v") == ("C", "m")
    assert node_method("R:C.m") == ("C", "m")
    assert node_method("F:C.f") is None
    assert node_method("K:3.5") is None
    assert node_method("L:broken") is None


def test_dot_export(p1, cfg):
    g = build_graph(p1, build_hierarchy(p1), cfg)
    dot = export_dot(g)
    assert dot.startswith("digraph {\n") and dot.endswith("}\n")
    assert '"SRC:Api.source" -> "L:C.m3.v";' in dot
    assert '"L:C.m3.v" -> "F:C.v1";' in dot
    assert '"SRC:Api.source" [label="SRC:Api.source", shape=box' in dot
    assert export_dot(g) == dot
    assert dot.count(" -> ") == len(g.edges)


def test_dot_empty_graph():
    assert export_dot(AssignmentGraph()) == "digraph {\n}\n"


def test_dot_escapes_quotes():
    g = AssignmentGraph.from_edges([('K:"x"', "L:C.m.v")])
    assert '"K:\\"x\\"" -> "L:C.m.v";' in export_dot(g)
