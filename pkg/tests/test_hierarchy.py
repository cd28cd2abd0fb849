import pytest
from hypothesis import given, settings, strategies as st

from dslicer.hierarchy import HierarchyError, build_hierarchy, declaring_class, resolve_virtual
from dslicer.ir import ClassDef, MethodDef, Program, parse_program

TWO_LEVEL = """
class C { field f; method m(this : C) { } method only(this : C) { } }
class B extends C { method m(this : B) { } }
class D extends C { field g; }
class E extends D { method m(this : E) { } }
"""


def test_p1_hierarchy(p1):
    h = build_hierarchy(p1)
    assert h.parent == {"A": None, "C": None}
    assert set(h.method_index) == {("A", "main")} | {("C", f"m{i}") for i in range(1, 6)}
    assert all(not kids for kids in h.children.values())


def test_flat_single_class():
    h = build_hierarchy(parse_program("class K { method m(this : K) { } }"))
    assert h.children == {"K": frozenset()}


def test_inherited_field_resolves_to_declaring_ancestor():
    h = build_hierarchy(parse_program(TWO_LEVEL))
    assert h.field_index[("D", "f")] == "C"
    assert declaring_class(h, "E", "f") == "C"
    assert declaring_class(h, "E", "g") == "D"
    assert declaring_class(h, "C", "f") == "C"


def test_declaring_class_p1(p1):
    assert declaring_class(build_hierarchy(p1), "C", "v1") == "C"


def test_declaring_class_errors():
    h = build_hierarchy(parse_program(TWO_LEVEL))
    with pytest.raises(HierarchyError, match="B.*g|g.*B"):
        declaring_class(h, "B", "g")
    with pytest.raises(HierarchyError, match="Nope"):
        declaring_class(h, "Nope", "f")


def test_resolve_p1(p1):
    h = build_hierarchy(p1)
    assert resolve_virtual(h, "C", "m1") == {("C", "m1")}
    assert resolve_virtual(h, "C", "m9") == frozenset()


def test_resolve_overrides():
    h = build_hierarchy(parse_program(TWO_LEVEL))
    assert resolve_virtual(h, "C", "m") == {("C", "m"), ("B", "m"), ("E", "m")}
    assert resolve_virtual(h, "B", "m") == {("B", "m")}
    # D inherits C.m and E overrides it
    assert resolve_virtual(h, "D", "m") == {("C", "m"), ("E", "m")}
    assert resolve_virtual(h, "E", "only") == {("C", "only")}


def test_resolve_unknown_class():
    h = build_hierarchy(parse_program(TWO_LEVEL))
    with pytest.raises(HierarchyError, match="Ghost"):
        resolve_virtual(h, "Ghost", "m")


@st.composite
def hierarchies(draw):
    n = draw(st.integers(1, 10))
    names = [f"K{i}" for i in range(n)]
    parents = [None] + [draw(st.one_of(st.none(), st.sampled_from(names[:i]))) for i in range(1, n)]
    classes = []
    for name, par in zip(names, parents):
        defs = draw(st.sets(st.sampled_from(["a", "b", "c"])))
        methods = tuple(MethodDef(m, False, (("this", name),)) for m in sorted(defs))
        classes.append(ClassDef(name, par, (), methods))
    return Program(tuple(classes))


def brute_force_targets(p, declared, name):
    parent = {c.name: c.superclass for c in p.classes}
    defines = {c.name: {m.name for m in c.methods} for c in p.classes}

    def chain(c):
        out = []
        while c is not None:
            out.append(c)
            c = parent[c]
        return out

    out = {(c, name) for c in parent if declared in chain(c) and name in defines[c]}
    if name not in defines[declared]:
        for anc in chain(declared)[1:]:
            if name in defines[anc]:
                out.add((anc, name))
                break
    return out


@settings(max_examples=200, deadline=None)
@given(hierarchies(), st.data())
def test_resolve_matches_brute_force(p, data):
    h = build_hierarchy(p)
    cls = data.draw(st.sampled_from([c.name for c in p.classes]))
    for name in "abcz":
        assert resolve_virtual(h, cls, name) == brute_force_targets(p, cls, name)


@settings(max_examples=200, deadline=None)
@given(hierarchies(), st.data())
def test_resolve_monotone_down_the_hierarchy(p, data):
    h = build_hierarchy(p)
    sub = data.draw(st.sampled_from([c.name for c in p.classes]))
    sup = h.parent[sub]
    if sup is None:
        return
    for name in "abc":
        inherited = set()
        for anc in h.ancestors(sub):
            if (anc, name) in h.method_index:
                inherited.add((anc, name))
                break
        assert resolve_virtual(h, sub, name) <= resolve_virtual(h, sup, name) | inherited
