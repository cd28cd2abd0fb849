"""Assignment graph: a flow-insensitive flattening of a program.

Nodes are identified by their canonical rendering, a plain string whose
prefix gives the node kind:

=========  ==================  ==========================================
prefix     example             meaning
=========  ==================  ==========================================
``L:``     ``L:C.m.v``         local or parameter ``v`` of method ``C.m``
``R:``     ``R:C.m``           return value of ``C.m``
``F:``     ``F:C.f``           field ``f``, keyed by its declaring class
``K:``     ``K:0``             constant literal
``N:``     ``N:C``             allocation of class ``C``
``SRC:``   ``SRC:Api.read``    source API
``SNK:``   ``SNK:Api.send``    sink API
=========  ==================  ==========================================

An edge ``a -> b`` means data may flow from ``a`` into ``b``.
"""
from __future__ import annotations

import gc
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .hierarchy import Hierarchy, declaring_class, resolve_virtual
from .ir import (ArrayToVar, BinOp, Call, ConstToVar, FieldToVar, MethodDef, New,
                 Program, Return, SsConfig, UniOp, VarToArray, VarToField, VarToVar)

NodeId = str
Edge = tuple[NodeId, NodeId]


def local_node(cls, method, var) -> NodeId:
    return f"L:{cls}.{method}.{var}"


def ret_node(cls, method) -> NodeId:
    return f"R:{cls}.{method}"


def field_node(cls, fname) -> NodeId:
    return f"F:{cls}.{fname}"


def const_node(literal) -> NodeId:
    return f"K:{literal}"


def alloc_node(cls) -> NodeId:
    return f"N:{cls}"


def source_node(signature) -> NodeId:
    return f"SRC:{signature}"


def sink_node(signature) -> NodeId:
    return f"SNK:{signature}"


def node_kind(node: NodeId) -> str:
    return node.split(":", 1)[0]


def node_method(node: NodeId) -> Optional[tuple[str, str]]:
    """The ``(class, method)`` owning a local or return node, else None."""
    kind, _, rest = node.partition(":")
    parts = rest.split(".", 2)
    if kind == "L" and len(parts) == 3 or kind == "R" and len(parts) == 2:
        return parts[0], parts[1]
    return None


class TranslationError(ValueError):
    pass


@dataclass(frozen=True)
class CallSite:
    cls: str
    method: str
    index: int
    signature: str

    def __str__(self):
        return f"{self.cls}.{self.method}[{self.index}] -> {self.signature}"


@dataclass
class AssignmentGraph:
    nodes: set = field(default_factory=set)
    edges: set = field(default_factory=set)
    succ: dict = field(default_factory=lambda: defaultdict(set))
    pred: dict = field(default_factory=lambda: defaultdict(set))
    source_nodes: set = field(default_factory=set)
    sink_nodes: set = field(default_factory=set)
    unresolved: list = field(default_factory=list)

    def add_node(self, n: NodeId):
        if n not in self.nodes:
            self.nodes.add(n)
            kind = node_kind(n)
            if kind == "SRC":
                self.source_nodes.add(n)
            elif kind == "SNK":
                self.sink_nodes.add(n)

    def add_edge(self, a: NodeId, b: NodeId):
        if (a, b) in self.edges:
            return
        self.add_node(a)
        self.add_node(b)
        self.edges.add((a, b))
        self.succ[a].add(b)
        self.pred[b].add(a)

    def successors(self, n):
        return self.succ.get(n, ())

    def predecessors(self, n):
        return self.pred.get(n, ())

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], nodes: Iterable[NodeId] = ()):
        g = cls()
        for n in nodes:
            g.add_node(n)
        for a, b in edges:
            g.add_edge(a, b)
        return g


def call_targets(call: Call, method: MethodDef, h: Hierarchy) -> list:
    """Resolved ``(class, method)`` targets of a non-API call, sorted."""
    if call.is_virtual:
        rtype = method.var_types.get(call.args[0]) if call.args else None
        declared = rtype if rtype in h else call.cls
        if declared not in h:
            return []
        return sorted(resolve_virtual(h, declared, call.name))
    key = (call.cls, call.name)
    return [key] if key in h.method_index else []


def translate_instruction(instr, ctx: tuple[str, str], h: Hierarchy,
                          cfg: SsConfig) -> set:
    """Edges contributed by one instruction of method ``ctx``."""
    cls, mname = ctx

    def loc(v):
        return local_node(cls, mname, v)

    if isinstance(instr, ConstToVar):
        return {(const_node(instr.literal), loc(instr.dst))}
    if isinstance(instr, (VarToVar, UniOp)):
        return {(loc(instr.src), loc(instr.dst))}
    if isinstance(instr, BinOp):
        return {(loc(instr.lhs), loc(instr.dst)), (loc(instr.rhs), loc(instr.dst))}
    if isinstance(instr, VarToArray):
        # the whole array absorbs the value; the index carries no flow
        return {(loc(instr.src), loc(instr.array))}
    if isinstance(instr, ArrayToVar):
        return {(loc(instr.array), loc(instr.dst))}
    if isinstance(instr, New):
        return {(alloc_node(instr.cls), loc(instr.dst))}
    if isinstance(instr, Return):
        return {(loc(instr.value), ret_node(cls, mname))} if instr.value else set()

    method = h.method_index[ctx]
    if isinstance(instr, (VarToField, FieldToVar)):
        otype = method.var_types[instr.obj]
        fnode = field_node(declaring_class(h, otype, instr.field), instr.field)
        if isinstance(instr, VarToField):
            return {(loc(instr.src), fnode)}
        return {(fnode, loc(instr.dst))}

    if isinstance(instr, Call):
        return _translate_call(instr, cls, mname, method, h, cfg, loc)
    raise TypeError(f"not an instruction: {instr!r}")


def _translate_call(call, cls, mname, method, h, cfg, loc):
    edges = set()
    sig = call.signature
    is_source, is_sink = sig in cfg.sources, sig in cfg.sinks
    if is_source:
        src = source_node(sig)
        if call.lvalue:
            edges.add((src, loc(call.lvalue)))
        edges.update((src, loc(a)) for a in call.args)
    if is_sink:
        snk = sink_node(sig)
        edges.update((loc(a), snk) for a in call.args)
    if is_source or is_sink:
        return edges

    targets = call_targets(call, method, h)
    if not targets:
        # unavailable code: the result depends on every argument, and the
        # receiver may absorb the remaining arguments
        if call.lvalue:
            edges.update((loc(a), loc(call.lvalue)) for a in call.args)
        if call.is_virtual:
            edges.update((loc(a), loc(call.args[0])) for a in call.args[1:])
        return edges

    for tcls, tname in targets:
        formals = h.method_index[(tcls, tname)].param_names
        if len(formals) != len(call.args):
            raise TranslationError(
                f"call {call} in {cls}.{mname} passes {len(call.args)} argument(s) "
                f"but {tcls}.{tname} takes {len(formals)}")
        edges.update((loc(a), local_node(tcls, tname, x)) for a, x in zip(call.args, formals))
        if call.lvalue:
            edges.add((ret_node(tcls, tname), loc(call.lvalue)))
    return edges


@contextmanager
def gc_paused():
    """Suspend the cyclic collector; graph work allocates no reference cycles."""
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def build_graph(p: Program, h: Hierarchy, cfg: SsConfig) -> AssignmentGraph:
    with gc_paused():
        return _build_graph(p, h, cfg)


def _build_graph(p, h, cfg):
    g = AssignmentGraph()
    for c, m in p.iter_methods():
        ctx = (c.name, m.name)
        for index, instr in enumerate(m.body):
            try:
                edges = translate_instruction(instr, ctx, h, cfg)
            except TranslationError as exc:
                raise TranslationError(f"{c.name}.{m.name}[{index}]: {exc}") from None
            for a, b in edges:
                g.add_edge(a, b)
            if isinstance(instr, Call):
                sig = instr.signature
                if sig in cfg.sources:
                    g.add_node(source_node(sig))
                if sig in cfg.sinks:
                    g.add_node(sink_node(sig))
                if (sig not in cfg.sources and sig not in cfg.sinks
                        and not call_targets(instr, m, h)):
                    g.unresolved.append(CallSite(c.name, m.name, index, sig))
    return g


def _dot_quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: AssignmentGraph, highlight: Iterable[NodeId] = ()) -> str:
    """Render ``g`` as a Graphviz digraph, nodes and edges in lexicographic order.

    Source nodes are drawn as green boxes, sinks as red boxes; any node in
    ``highlight`` (e.g. the relevant nodes of a slice) is drawn bold.
    """
    highlight = set(highlight)
    lines = ["digraph {"]
    for n in sorted(g.nodes):
        attrs = [f"label={_dot_quote(n)}"]
        kind = node_kind(n)
        if kind == "SRC":
            attrs += ["shape=box", "style=filled", 'fillcolor="#b7e4c7"']
        elif kind == "SNK":
            attrs += ["shape=box", "style=filled", 'fillcolor="#f4a3a3"']
        if n in highlight:
            attrs.append("penwidth=2")
        lines.append(f"  {_dot_quote(n)} [{', '.join(attrs)}];")
    for a, b in sorted(g.edges):
        lines.append(f"  {_dot_quote(a)} -> {_dot_quote(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
