"""Bidirectional marking over the assignment graph and method-level slices."""
from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .agraph import (AssignmentGraph, NodeId, build_graph, field_node, gc_paused, node_method)
from .hierarchy import Hierarchy, build_hierarchy, declaring_class
from .ir import FieldToVar, Program, SsConfig, VarToField

MethodId = tuple[str, str]


class SliceMode(enum.Enum):
    BOTH = "both"
    FORWARD = "fwd"
    BACKWARD = "bwd"

    @classmethod
    def parse(cls, text):
        return cls(text) if not isinstance(text, cls) else text


@dataclass(frozen=True)
class Marking:
    plus: frozenset = frozenset()
    minus: frozenset = frozenset()

    def mark_of(self, n: NodeId) -> str:
        p, m = n in self.plus, n in self.minus
        if p and m:
            return "±"
        return "+" if p else ("-" if m else "0")


@dataclass
class SliceResult:
    relevant_nodes: frozenset
    relevant_methods: frozenset
    via_locals: frozenset
    via_fields: frozenset
    marking: Marking
    mode: SliceMode = SliceMode.BOTH
    graph: Optional[AssignmentGraph] = field(default=None, repr=False)
    hierarchy: Optional[Hierarchy] = field(default=None, repr=False)

    def irrelevant_methods(self, p: Program) -> list[MethodId]:
        return sorted(set(p.method_ids()) - self.relevant_methods)


class _Worklist:
    """FIFO by default; with a seed, pops uniformly at random instead."""

    def __init__(self, items, seed=None):
        self._rng = random.Random(seed) if seed is not None else None
        self._items = list(items) if self._rng else deque(items)

    def __bool__(self):
        return bool(self._items)

    def push(self, item):
        self._items.append(item)

    def pop(self):
        if self._rng is None:
            return self._items.popleft()
        i = self._rng.randrange(len(self._items))
        self._items[i], self._items[-1] = self._items[-1], self._items[i]
        return self._items.pop()


def _propagate(roots, neighbours, admit, seed):
    marked = set(roots)
    work = _Worklist(sorted(marked), seed)
    while work:
        n = work.pop()
        for nxt in neighbours(n):
            if nxt not in marked and admit(nxt):
                marked.add(nxt)
                work.push(nxt)
    return frozenset(marked)


def compute_marking(g: AssignmentGraph, mode: SliceMode = SliceMode.BOTH,
                    seed: Optional[int] = None) -> Marking:
    """Mark nodes reachable from sources (+) and, among those, nodes reaching sinks (-).

    ``seed`` randomises the worklist order; the result is the same least
    fixpoint for any order.
    """
    mode = SliceMode.parse(mode)
    always = lambda n: True  # noqa: E731
    if mode is SliceMode.BACKWARD:
        return Marking(minus=_propagate(g.sink_nodes, g.predecessors, always, seed))
    plus = _propagate(g.source_nodes, g.successors, always, seed)
    if mode is SliceMode.FORWARD:
        return Marking(plus=plus)
    minus = _propagate(g.sink_nodes, g.predecessors, plus.__contains__, seed)
    return Marking(plus, minus)


def relevant_nodes(m: Marking, mode: SliceMode = SliceMode.BOTH) -> frozenset:
    mode = SliceMode.parse(mode)
    if mode is SliceMode.FORWARD:
        return m.plus
    if mode is SliceMode.BACKWARD:
        return m.minus
    return m.plus & m.minus


def relevant_methods(p: Program, ids, h: Hierarchy) -> tuple[frozenset, frozenset]:
    """Methods owning a relevant local/return node, and methods accessing a relevant field.

    Returns ``(via_locals, via_fields)``.
    """
    via_locals = set()
    for n in ids:
        owner = node_method(n)
        if owner is not None:
            via_locals.add(owner)
    via_fields = set()
    if any(n.startswith("F:") for n in ids):
        for c, m in p.iter_methods():
            types = m.var_types
            for instr in m.body:
                if isinstance(instr, (VarToField, FieldToVar)):
                    decl = declaring_class(h, types[instr.obj], instr.field)
                    if field_node(decl, instr.field) in ids:
                        via_fields.add((c.name, m.name))
                        break
    return frozenset(via_locals), frozenset(via_fields)


def slice_program(p: Program, cfg: SsConfig, mode: SliceMode = SliceMode.BOTH) -> SliceResult:
    mode = SliceMode.parse(mode)
    h = build_hierarchy(p)
    g = build_graph(p, h, cfg)
    return slice_graph(p, h, g, mode)


def slice_graph(p: Program, h: Hierarchy, g: AssignmentGraph,
                mode: SliceMode = SliceMode.BOTH) -> SliceResult:
    """Slice an already built graph; split out so callers can time the phases."""
    mode = SliceMode.parse(mode)
    with gc_paused():
        marking = compute_marking(g, mode)
        ids = relevant_nodes(marking, mode)
        via_locals, via_fields = relevant_methods(p, ids, h)
    return SliceResult(ids, via_locals | via_fields, via_locals, via_fields,
                       marking, mode, g, h)
