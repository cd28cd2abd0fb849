import pytest

from dslicer.agraph import build_graph
from dslicer.hierarchy import build_hierarchy
from dslicer.ir import parse_program, serialize_program, validate_program
from dslicer.slicer import slice_program
from dslicer.testkit import DEFAULT_CONFIG, gen_program, oracle_backward, oracle_forward, small_params
from dslicer.transform import reduce_program


def test_reduce_p1(p1, cfg):
    reduced, report = reduce_program(p1, {("C", "m3"), ("C", "m4"), ("C", "m5")})
    assert [m.name for m in reduced.get_class("C").methods] == ["m3", "m4", "m5"]
    assert reduced.get_class("A").methods == ()
    assert reduced.get_class("C").fields == ("v1", "v2")
    assert report.removed == {("A", "main"), ("C", "m1"), ("C", "m2")}
    assert report.reduction_pct == pytest.approx(50.0)
    assert validate_program(reduced) == []
    assert parse_program(serialize_program(reduced)) == reduced


def test_reduce_identity_and_annihilation(p1):
    same, report = reduce_program(p1, p1.method_ids())
    assert same == p1 and report.reduction_pct == 0.0
    empty, report = reduce_program(p1, set())
    assert all(not c.methods for c in empty.classes)
    assert [c.name for c in empty.classes] == ["A", "C"]
    assert report.reduction_pct == 100.0


def test_reduce_rejects_foreign_methods(p1):
    with pytest.raises(ValueError, match="Z.q"):
        reduce_program(p1, {("Z", "q")})


def test_reslicing_reduced_p1(p1, cfg):
    relevant = slice_program(p1, cfg).relevant_methods
    reduced, _ = reduce_program(p1, relevant)
    assert slice_program(reduced, cfg).relevant_methods == relevant


def test_dangling_calls_become_unresolved(p1, cfg):
    reduced, _ = reduce_program(p1, {("A", "main"), ("C", "m3")})
    g = build_graph(reduced, build_hierarchy(reduced), cfg)
    assert [str(s) for s in g.unresolved] == ["A.main[1] -> C.m1", "A.main[3] -> C.m4",
                                             "A.main[4] -> C.m5"]


@pytest.mark.parametrize("seed", range(40))
def test_leak_paths_survive_reduction(seed):
    p = gen_program(small_params(seed))
    result = slice_program(p, DEFAULT_CONFIG)
    reduced, _ = reduce_program(p, result.relevant_methods)
    g = result.graph
    g2 = build_graph(reduced, build_hierarchy(reduced), DEFAULT_CONFIG)
    fwd, bwd = oracle_forward(g), oracle_backward(g)
    on_paths = {(a, b) for a, b in g.edges if a in fwd and b in bwd}
    assert on_paths <= g2.edges
