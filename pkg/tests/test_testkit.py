import csv
import io

import pytest

from dslicer.agraph import AssignmentGraph, build_graph, translate_instruction
from dslicer.hierarchy import build_hierarchy
from dslicer.ir import Call, parse_program, serialize_program, validate_program
from dslicer.slicer import slice_program
from dslicer.testkit import (CSV_HEADER, DEFAULT_CONFIG, BenchRow, GenParams, OracleCapExceeded,
                             closure_oracle, gen_program, oracle_backward, oracle_forward,
                             plot_corpus, rows_to_csv, run_corpus, small_corpus, small_params)


def test_oracle_reflexive_case():
    g = AssignmentGraph(nodes={"X"}, source_nodes={"X"}, sink_nodes={"X"})
    assert closure_oracle(g) == {"X"}


def test_oracle_no_sink():
    g = AssignmentGraph.from_edges([("SRC:A.s", "L:C.m.a"), ("L:C.m.a", "L:C.m.b")])
    assert closure_oracle(g) == set()


def test_oracle_cap():
    g = AssignmentGraph.from_edges([(f"L:C.m.v{i}", f"L:C.m.v{i + 1}") for i in range(10)])
    with pytest.raises(OracleCapExceeded):
        closure_oracle(g, cap=5)


def test_oracle_p1(p1, cfg):
    g = build_graph(p1, build_hierarchy(p1), cfg)
    assert closure_oracle(g) == slice_program(p1, cfg).relevant_nodes


def test_generation_is_deterministic():
    params = GenParams(classes=2, methods_per_class=2, instrs_per_method=5, seed=1)
    assert serialize_program(gen_program(params)) == serialize_program(gen_program(params))


def test_generated_programs_are_valid_and_cover_all_kinds():
    kinds = set()
    for seed in range(300):
        p = gen_program(small_params(seed))
        assert validate_program(p) == []
        assert parse_program(serialize_program(p)) == p
        kinds.update(type(i).__name__ for _, m in p.iter_methods() for i in m.body)
    assert len(kinds) == 11


def test_zero_densities_give_empty_slice():
    p = gen_program(GenParams(classes=4, methods_per_class=3, instrs_per_method=8,
                              source_density=0, sink_density=0, seed=3))
    assert slice_program(p, DEFAULT_CONFIG).relevant_methods == set()


@pytest.mark.parametrize("bad", [dict(classes=-1), dict(call_density=1.5),
                                 dict(source_density=0.5, sink_density=0.5, call_density=0.5)])
def test_params_validate(bad):
    with pytest.raises(ValueError):
        GenParams(**bad)


def test_small_corpus_respects_node_cap():
    for _, _, g in small_corpus(50, max_nodes=30):
        assert len(g.nodes) <= 30


def test_method_level_soundness():
    # any method holding an instruction whose edge lies on a leak path is relevant
    for seed, p, g in small_corpus(200):
        h = build_hierarchy(p)
        fwd, bwd = oracle_forward(g), oracle_backward(g)
        relevant = slice_program(p, DEFAULT_CONFIG).relevant_methods
        for c, m in p.iter_methods():
            for instr in m.body:
                edges = translate_instruction(instr, (c.name, m.name), h, DEFAULT_CONFIG)
                if any(a in fwd and b in bwd for a, b in edges):
                    assert (c.name, m.name) in relevant, seed


def test_run_corpus_and_csv(p1, cfg, tmp_path):
    broken = parse_program("class K { method m(this : K) { vcall K.m(this, this); } }")
    rows = run_corpus([("p1", p1), ("broken", broken)], cfg)
    assert [r.program_id for r in rows] == ["broken", "p1"]
    assert rows[0].error and "K.m[0]" in rows[0].error
    assert rows[1].relevant == 3 and rows[1].methods == 6
    assert rows[1].reduction_pct == pytest.approx(50.0)
    table = list(csv.reader(io.StringIO(rows_to_csv(rows))))
    assert table[0] == CSV_HEADER == ["program_id", "methods", "nodes", "edges", "build_ms",
                                      "slice_ms", "check_ms", "relevant", "reduction_pct"]
    assert table[1][0] == "broken" and table[1][-1] == "ERROR"
    plot_corpus(rows, tmp_path / "fig.svg")
    assert (tmp_path / "fig.svg").read_text().lstrip().startswith("<?xml")


def test_empty_corpus_is_header_only():
    assert rows_to_csv(run_corpus([], DEFAULT_CONFIG)) == ",".join(CSV_HEADER) + "\n"


def test_reduction_matches_relevant_count():
    row = run_corpus([("g", gen_program(GenParams(classes=10, methods_per_class=5, seed=2)))],
                     DEFAULT_CONFIG)[0]
    assert row.reduction_pct == pytest.approx(100 * (1 - row.relevant / row.methods))
