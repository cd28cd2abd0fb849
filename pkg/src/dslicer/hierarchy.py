"""Class hierarchy and class-hierarchy analysis (CHA) of virtual calls."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .ir import MethodDef, Program

MethodId = tuple[str, str]


class HierarchyError(LookupError):
    pass


@dataclass
class Hierarchy:
    parent: dict[str, Optional[str]]
    children: dict[str, frozenset]
    method_index: dict[MethodId, MethodDef]
    # (class, field) -> declaring class, for declared and inherited fields
    field_index: dict[tuple[str, str], str]
    _descendants: dict = field(default_factory=dict, repr=False)
    _dispatch: dict = field(default_factory=dict, repr=False)

    def __contains__(self, cls):
        return cls in self.parent

    def ancestors(self, cls):
        """``cls`` followed by its superclasses, nearest first."""
        while cls is not None:
            yield cls
            cls = self.parent.get(cls)

    def descendants(self, cls) -> frozenset:
        """``cls`` and every transitive subclass."""
        found = self._descendants.get(cls)
        if found is None:
            out, stack = {cls}, [cls]
            while stack:
                for child in self.children.get(stack.pop(), ()):
                    if child not in out:
                        out.add(child)
                        stack.append(child)
            found = self._descendants[cls] = frozenset(out)
        return found

    def is_subclass(self, sub, sup) -> bool:
        return sup in self.ancestors(sub)


def build_hierarchy(p: Program) -> Hierarchy:
    parent = {c.name: c.superclass for c in p.classes}
    children = {c.name: set() for c in p.classes}
    for c in p.classes:
        if c.superclass is not None:
            children[c.superclass].add(c.name)
    method_index = {(c.name, m.name): m for c, m in p.iter_methods()}
    declared = {c.name: c.fields for c in p.classes}
    field_index = {}
    for c in p.classes:
        for anc in _chain(parent, c.name):
            for f in declared[anc]:
                field_index.setdefault((c.name, f), anc)
    return Hierarchy(parent, {k: frozenset(v) for k, v in children.items()},
                     method_index, field_index)


def _chain(parent, cls):
    while cls is not None:
        yield cls
        cls = parent.get(cls)


def resolve_virtual(h: Hierarchy, declared: str, name: str) -> frozenset:
    """All possible runtime targets of a virtual call on a ``declared``-typed receiver.

    Every definition of ``name`` in ``declared`` or one of its subclasses, plus
    the nearest inherited definition when ``declared`` does not define it
    itself. An empty result means the call is unresolved.
    """
    if declared not in h:
        raise HierarchyError(f"unknown class {declared}")
    key = (declared, name)
    targets = h._dispatch.get(key)
    if targets is None:
        found = {(c, name) for c in h.descendants(declared) if (c, name) in h.method_index}
        if key not in h.method_index:
            for anc in h.ancestors(h.parent[declared]):
                if (anc, name) in h.method_index:
                    found.add((anc, name))
                    break
        targets = h._dispatch[key] = frozenset(found)
    return targets


def declaring_class(h: Hierarchy, cls: str, field_name: str) -> str:
    if cls not in h:
        raise HierarchyError(f"unknown class {cls}")
    try:
        return h.field_index[(cls, field_name)]
    except KeyError:
        raise HierarchyError(f"no class at or above {cls} declares field {field_name}") from None
