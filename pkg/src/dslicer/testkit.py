"""Oracles, random program generation and corpus benchmarking.

The closure oracle deliberately shares nothing with the slicer's worklist:
it builds a dense boolean reachability matrix with Floyd-Warshall and reads
the answer off rows and columns.
"""
from __future__ import annotations

import csv
import io
import logging
import random
import time
from dataclasses import dataclass, fields as dc_fields
from typing import Iterable, Optional

import numpy as np

from .agraph import AssignmentGraph, build_graph, translate_instruction
from .certificate import Certificate, check_marking, emit_certificate
from .hierarchy import build_hierarchy
from .ir import (ArrayToVar, BinOp, Call, ClassDef, ConstToVar, FieldToVar, MethodDef,
                 New, Program, Return, SsConfig, UniOp, VarToArray, VarToField, VarToVar)
from .slicer import SliceMode, slice_graph

log = logging.getLogger(__name__)

ORACLE_CAP = 2048

DEFAULT_CONFIG = SsConfig(sources={"Api.source", "Api.read"}, sinks={"Api.sink", "Api.send"})


class OracleCapExceeded(ValueError):
    pass


def reachability_matrix(g: AssignmentGraph, cap: int = ORACLE_CAP):
    """``(order, R)`` with ``R[i, j]`` true iff ``order[j]`` is reachable from ``order[i]``.

    Reflexive. Cubic time; refuses graphs above ``cap`` nodes.
    """
    order = sorted(g.nodes)
    n = len(order)
    if n > cap:
        raise OracleCapExceeded(f"{n} nodes exceeds oracle cap {cap}")
    index = {v: i for i, v in enumerate(order)}
    reach = np.eye(n, dtype=bool)
    for a, b in g.edges:
        reach[index[a], index[b]] = True
    for k in range(n):
        reach |= np.outer(reach[:, k], reach[k, :])
    return order, reach


def closure_oracle(g: AssignmentGraph, cap: int = ORACLE_CAP) -> frozenset:
    """Nodes reachable from some source that also reach some sink."""
    order, reach = reachability_matrix(g, cap)
    if not order:
        return frozenset()
    src = [i for i, v in enumerate(order) if v in g.source_nodes]
    snk = [j for j, v in enumerate(order) if v in g.sink_nodes]
    from_src = reach[src, :].any(axis=0) if src else np.zeros(len(order), bool)
    to_snk = reach[:, snk].any(axis=1) if snk else np.zeros(len(order), bool)
    return frozenset(order[i] for i in np.flatnonzero(from_src & to_snk))


def oracle_forward(g: AssignmentGraph, cap: int = ORACLE_CAP) -> frozenset:
    order, reach = reachability_matrix(g, cap)
    src = [i for i, v in enumerate(order) if v in g.source_nodes]
    if not src:
        return frozenset()
    return frozenset(order[i] for i in np.flatnonzero(reach[src, :].any(axis=0)))


def oracle_backward(g: AssignmentGraph, cap: int = ORACLE_CAP) -> frozenset:
    order, reach = reachability_matrix(g, cap)
    snk = [j for j, v in enumerate(order) if v in g.sink_nodes]
    if not snk:
        return frozenset()
    return frozenset(order[i] for i in np.flatnonzero(reach[:, snk].any(axis=1)))


# -- random programs ---------------------------------------------------------

@dataclass(frozen=True)
class GenParams:
    classes: int = 3
    methods_per_class: int = 2
    instrs_per_method: int = 6
    # defaults leave roughly 35-45% of methods relevant on large programs
    call_density: float = 0.2
    field_density: float = 0.14
    source_density: float = 0.02
    sink_density: float = 0.02
    inheritance_depth: int = 2
    seed: int = 0

    def __post_init__(self):
        for f in ("classes", "methods_per_class", "instrs_per_method", "inheritance_depth"):
            if getattr(self, f) < 0:
                raise ValueError(f"{f} must be >= 0")
        for f in ("call_density", "field_density", "source_density", "sink_density"):
            if not 0.0 <= getattr(self, f) <= 1.0:
                raise ValueError(f"{f} must lie in [0, 1]")
        if self.source_density + self.sink_density + self.call_density + self.field_density > 1.0:
            raise ValueError("densities must sum to at most 1")


def small_params(seed: int) -> GenParams:
    """Parameters for tiny, source/sink-dense programs (oracle campaigns)."""
    rng = random.Random(seed)
    return GenParams(classes=rng.randint(1, 3), methods_per_class=rng.randint(1, 2),
                     instrs_per_method=rng.randint(2, 7), call_density=0.25,
                     field_density=0.2, source_density=0.15, sink_density=0.15,
                     inheritance_depth=2, seed=seed)


def small_corpus(count: int, max_nodes: int = 64, cfg: SsConfig = DEFAULT_CONFIG,
                 start_seed: int = 0):
    """``count`` programs from consecutive seeds whose graphs have at most ``max_nodes`` nodes.

    Yields ``(seed, program, graph)``; oversized draws are skipped.
    """
    seed = start_seed
    while count > 0:
        p = gen_program(small_params(seed))
        g = build_graph(p, build_hierarchy(p), cfg)
        if len(g.nodes) <= max_nodes:
            yield seed, p, g
            count -= 1
        seed += 1


_INT_LOCALS = ("x0", "x1", "x2", "x3")
_LITERALS = ("0", "1", "42")


def gen_program(params: GenParams) -> Program:
    """A random valid program; identical params give an identical program.

    Calls to ``Api.source``/``Api.read`` and ``Api.sink``/``Api.send`` are
    planted with the configured densities (see ``DEFAULT_CONFIG``), alongside
    resolvable virtual and static calls and a few calls into unknown code.
    """
    rng = random.Random(params.seed)
    names = [f"C{i}" for i in range(params.classes)]
    parent, depth = {}, {}
    for i, cname in enumerate(names):
        eligible = [names[j] for j in range(i) if depth[names[j]] < params.inheritance_depth]
        if eligible and rng.random() < 0.5:
            parent[cname] = rng.choice(eligible)
            depth[cname] = depth[parent[cname]] + 1
        else:
            parent[cname] = None
            depth[cname] = 0
    class_fields = {c: tuple(f"f{i}{s}" for s in "ab"[:1 + (rng.random() < 0.5)])
                    for i, c in enumerate(names)}

    # signatures: shared names are virtual with a fixed arity so overrides agree
    sigs = {c: {} for c in names}  # class -> name -> (is_static, arity)
    for i, cname in enumerate(names):
        for k in range(params.methods_per_class):
            if rng.random() < 0.5:
                sigs[cname][f"m{k}"] = (False, k % 3)
            else:
                sigs[cname][f"u{i}_{k}"] = (rng.random() < 0.25, rng.randrange(3))

    children = {c: [] for c in names}
    for c, par in parent.items():
        if par is not None:
            children[par].append(c)

    def ancestors(c):
        while c is not None:
            yield c
            c = parent[c]

    def subtree(c):
        out, stack = [], [c]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(children[x])
        return out

    visible_methods, visible_fields = {}, {}
    for c in names:
        related = set(ancestors(c)) | set(subtree(c))
        visible_methods[c] = sorted({n for k in related for n, (st, _) in sigs[k].items()
                                     if not st})
        visible_fields[c] = [f for a in ancestors(c) for f in class_fields[a]]
    arity = {n: a for table in sigs.values() for n, (_, a) in table.items()}
    statics = sorted((c, n) for c, table in sigs.items() for n, (st, _) in table.items() if st)

    classes = []
    for cname in names:
        methods = []
        for mname, (is_static, n_params) in sigs[cname].items():
            methods.append(_gen_method(rng, params, cname, mname, is_static, n_params,
                                       names, subtree, visible_methods, visible_fields,
                                       arity, statics))
        classes.append(ClassDef(cname, parent[cname], class_fields[cname], tuple(methods)))
    return Program(tuple(classes))


def _gen_method(rng, params, cname, mname, is_static, n_params, names, subtree,
                visible_methods, visible_fields, arity, statics):
    fparams = [] if is_static else [("this", cname)]
    fparams += [(f"p{j}", "int") for j in range(n_params)]
    objs = [(f"o{j}", rng.choice(names)) for j in range(2)] if names else []
    locals_ = [(v, "int") for v in _INT_LOCALS] + [("arr", "int[]")] + objs
    ints = [p for p, _ in fparams[0 if is_static else 1:]] + list(_INT_LOCALS)
    obj_types = dict(objs)
    if not is_static:
        obj_types["this"] = cname
    obj_vars = sorted(obj_types)

    def int_var():
        return rng.choice(ints)

    body = []
    d = params
    for _ in range(params.instrs_per_method):
        r = rng.random()
        if r < d.source_density:
            if rng.random() < 0.7:
                body.append(Call(int_var(), "static", "Api", "source", ()))
            else:
                body.append(Call(None, "static", "Api", "read", (int_var(),)))
            continue
        r -= d.source_density
        if r < d.sink_density:
            if rng.random() < 0.7:
                body.append(Call(None, "static", "Api", "sink", (int_var(),)))
            else:
                body.append(Call(int_var() if rng.random() < 0.3 else None, "static", "Api",
                                 "send", (int_var(), int_var())))
            continue
        r -= d.sink_density
        if r < d.call_density:
            body.append(_gen_call(rng, obj_vars, obj_types, visible_methods, arity,
                                  statics, int_var))
            continue
        r -= d.call_density
        if r < d.field_density and obj_vars:
            o = rng.choice(obj_vars)
            flds = visible_fields[obj_types[o]]
            if flds:
                f = rng.choice(flds)
                if rng.random() < 0.5:
                    body.append(VarToField(o, f, int_var()))
                else:
                    body.append(FieldToVar(int_var(), o, f))
                continue
        kind = rng.randrange(8)
        if kind == 0:
            body.append(ConstToVar(int_var(), rng.choice(_LITERALS)))
        elif kind == 1:
            body.append(VarToVar(int_var(), int_var()))
        elif kind == 2:
            body.append(UniOp(int_var(), int_var()))
        elif kind == 3:
            body.append(BinOp(int_var(), int_var(), int_var()))
        elif kind == 4:
            body.append(VarToArray("arr", int_var(), int_var()))
        elif kind == 5:
            body.append(ArrayToVar(int_var(), "arr", int_var()))
        elif kind == 6 and objs:
            o, t = rng.choice(objs)
            body.append(New(o, rng.choice(subtree(t))))
        else:
            body.append(Return(int_var()))
    return MethodDef(mname, is_static, tuple(fparams), tuple(locals_), tuple(body))


def _gen_call(rng, obj_vars, obj_types, visible_methods, arity, statics, int_var):
    lvalue = int_var() if rng.random() < 0.6 else None
    r = rng.random()
    if r < 0.1:
        # call into code outside the program
        if obj_vars and rng.random() < 0.5:
            o = rng.choice(obj_vars)
            return Call(lvalue, "virtual", obj_types[o], "ext", (o, int_var()))
        return Call(lvalue, "static", "Lib", "ext", (int_var(),))
    if r < 0.35 and statics:
        cls, name = rng.choice(statics)
        return Call(lvalue, "static", cls, name, tuple(int_var() for _ in range(arity[name])))
    candidates = [o for o in obj_vars if visible_methods[obj_types[o]]]
    if not candidates:
        return Call(lvalue, "static", "Lib", "ext", (int_var(),))
    o = rng.choice(candidates)
    name = rng.choice(visible_methods[obj_types[o]])
    args = (o,) + tuple(int_var() for _ in range(arity[name]))
    return Call(lvalue, "virtual", obj_types[o], name, args)


# -- certificate mutations ----------------------------------------------------

def required_edges(p: Program, cfg: SsConfig) -> dict:
    """Every edge the translation rules demand, mapped to one instruction location."""
    h = build_hierarchy(p)
    out = {}
    for c, m in p.iter_methods():
        for index, instr in enumerate(m.body):
            for e in sorted(translate_instruction(instr, (c.name, m.name), h, cfg)):
                out.setdefault(e, f"{c.name}.{m.name}[{index}]")
    return out


def mutate_certificate(p: Program, cert: Certificate, cfg: SsConfig,
                       rng: random.Random) -> Optional[tuple[Certificate, str]]:
    """One random single-point corruption of ``cert``, or None if nothing qualifies.

    Either flips the mark of a node lying on a source-to-sink path (a ``±``
    node) or deletes one edge the translation rules require.
    """
    relevant = sorted(n for n, mark in cert.marks.items() if mark == "±")
    required = sorted(e for e in required_edges(p, cfg) if e in cert.edges)
    choices = (["flip"] if relevant else []) + (["delete"] if required else [])
    if not choices:
        return None
    marks, edges = dict(cert.marks), set(cert.edges)
    if rng.choice(choices) == "flip":
        n = rng.choice(relevant)
        marks[n] = rng.choice(["+", "-", "0"])
        what = f"flip {n} ± -> {marks[n]}"
    else:
        e = rng.choice(required)
        edges.discard(e)
        what = f"delete {e[0]} -> {e[1]}"
    return Certificate(cert.digest, marks, edges, cert.mode, cert.digest_algo), what


# -- benchmarking -------------------------------------------------------------

@dataclass
class BenchRow:
    program_id: str
    methods: Optional[int] = None
    nodes: Optional[int] = None
    edges: Optional[int] = None
    build_ms: Optional[float] = None
    slice_ms: Optional[float] = None
    check_ms: Optional[float] = None
    relevant: Optional[int] = None
    reduction_pct: Optional[float] = None
    error: Optional[str] = None

    def csv_values(self):
        if self.error is not None:
            return [self.program_id] + [""] * 7 + ["ERROR"]
        return [self.program_id, self.methods, self.nodes, self.edges,
                f"{self.build_ms:.3f}", f"{self.slice_ms:.3f}", f"{self.check_ms:.3f}",
                self.relevant, f"{self.reduction_pct:.4f}"]


CSV_HEADER = [f.name for f in dc_fields(BenchRow) if f.name != "error"]
TIMING_COLUMNS = ("build_ms", "slice_ms", "check_ms")


def bench_program(program_id: str, p: Program, cfg: SsConfig) -> BenchRow:
    t0 = time.perf_counter()
    h = build_hierarchy(p)
    g = build_graph(p, h, cfg)
    t1 = time.perf_counter()
    result = slice_graph(p, h, g, SliceMode.BOTH)
    t2 = time.perf_counter()
    cert = emit_certificate(p, g, result.marking, SliceMode.BOTH)
    t3 = time.perf_counter()
    verdict = check_marking(cert, cfg)
    t4 = time.perf_counter()
    if not verdict.valid:
        raise AssertionError(f"marking certificate rejected: {verdict.violations[:3]}")
    methods = p.num_methods()
    relevant = len(result.relevant_methods)
    pct = 100.0 * (1 - relevant / methods) if methods else 0.0
    return BenchRow(program_id, methods, len(g.nodes), len(g.edges), (t1 - t0) * 1e3,
                    (t2 - t1) * 1e3, (t4 - t3) * 1e3, relevant, pct)


def run_corpus(programs: Iterable, cfg: SsConfig) -> list[BenchRow]:
    """Benchmark each ``(program_id, program)`` pair; failures become error rows."""
    rows = []
    for program_id, p in programs:
        try:
            rows.append(bench_program(program_id, p, cfg))
        except Exception as exc:  # one bad program must not end the run
            log.warning("program %s failed: %s", program_id, exc)
            rows.append(BenchRow(program_id, error=str(exc)))
    rows.sort(key=lambda r: r.program_id)
    return rows


def rows_to_csv(rows: Iterable[BenchRow], columns=None) -> str:
    columns = list(columns or CSV_HEADER)
    keep = [CSV_HEADER.index(c) for c in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        values = row.csv_values()
        writer.writerow([values[i] for i in keep])
    return buf.getvalue()


REFERENCE_NOTE = ("reference figures from a large real-app study, not reproduced here: "
                  "36% average method reduction, about 5 s average analysis time, 10600 apps")


def summarize_corpus(rows: Iterable[BenchRow]) -> str:
    """Short text summary of a benchmark run, ending with the reference note."""
    rows = list(rows)
    ok = [r for r in rows if r.error is None]
    lines = [f"programs: {len(rows)} ({len(rows) - len(ok)} error(s))"]
    if ok:
        mean_red = sum(r.reduction_pct for r in ok) / len(ok)
        mean_s = sum(r.build_ms + r.slice_ms for r in ok) / len(ok) / 1e3
        lines.append(f"mean method reduction: {mean_red:.2f}%")
        lines.append(f"mean analysis time: {mean_s:.3f} s")
    lines.append(REFERENCE_NOTE)
    return "\n".join(lines) + "\n"


def plot_corpus(rows: Iterable[BenchRow], path) -> None:
    """Scatter analysis time and reduction against method count, as SVG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ok = [r for r in rows if r.error is None]
    methods = [r.methods for r in ok]
    fig, (ax_t, ax_r) = plt.subplots(1, 2, figsize=(10, 4))
    ax_t.scatter(methods, [(r.build_ms + r.slice_ms) / 1e3 for r in ok], s=12)
    ax_t.set_xlabel("number of methods")
    ax_t.set_ylabel("analysis time (s)")
    ax_r.scatter(methods, [r.reduction_pct for r in ok], s=12)
    ax_r.set_xlabel("number of methods")
    ax_r.set_ylabel("irrelevant methods (%)")
    ax_r.set_ylim(0, 100)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def scaling_corpus(sizes=(1000, 2000, 4000, 8000, 16000), methods_per_class=10,
                   instrs_per_method=8, seed=0, **densities):
    """``(program_id, program)`` pairs of the requested method counts, fixed per-method size."""
    for n in sizes:
        params = GenParams(classes=n // methods_per_class, methods_per_class=methods_per_class,
                           instrs_per_method=instrs_per_method, seed=seed + n, **densities)
        yield f"gen-{n:06d}", gen_program(params)
