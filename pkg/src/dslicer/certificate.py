"""Slice certificates: emission, canonical file format and independent checking.

A certificate has two parts. The *translation* part is the full assignment
graph, checked by re-translating every instruction of the program and looking
each required edge up. The *analysis* part is the per-node marking, checked
by one pass over the nodes and one over the edges.

File layout::

    DSLICE-CERT 1
    DIGEST sha256 <hex>
    MODE both
    NODES
    <node> <+|-|±|0>
    ...
    EDGES
    <node> -> <node>
    ...
    END
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .agraph import AssignmentGraph, sink_node, source_node, translate_instruction
from .hierarchy import build_hierarchy
from .ir import Call, Program, SsConfig, serialize_program
from .slicer import Marking, SliceMode, relevant_methods

VERSION = "1"
DIGEST_ALGO = "sha256"
MARKS = ("+", "-", "±", "0")

VIOLATION_KINDS = ("missing-edge", "unmarked-source", "unmarked-sink", "forward-violation",
                   "backward-violation", "digest-mismatch", "unknown-node")


class CertificateFormatError(ValueError):
    pass


def program_digest(p: Program, algo: str = DIGEST_ALGO) -> str:
    return hashlib.new(algo, serialize_program(p).encode("utf-8")).hexdigest()


@dataclass
class Certificate:
    digest: str
    marks: dict  # node -> one of MARKS
    edges: set
    mode: SliceMode = SliceMode.BOTH
    digest_algo: str = DIGEST_ALGO

    def has_plus(self, n):
        return self.marks.get(n) in ("+", "±")

    def has_minus(self, n):
        return self.marks.get(n) in ("-", "±")

    def to_text(self) -> str:
        lines = [f"DSLICE-CERT {VERSION}", f"DIGEST {self.digest_algo} {self.digest}",
                 f"MODE {self.mode.value}", "NODES"]
        lines += [f"{n} {self.marks[n]}" for n in sorted(self.marks)]
        lines.append("EDGES")
        lines += [f"{a} -> {b}" for a, b in sorted(self.edges)]
        lines.append("END")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        return parse_certificate(text)


def emit_certificate(p: Program, g: AssignmentGraph, m: Marking,
                     mode: SliceMode = SliceMode.BOTH) -> Certificate:
    marks = {n: m.mark_of(n) for n in g.nodes}
    return Certificate(program_digest(p), marks, set(g.edges), SliceMode.parse(mode))


def parse_certificate(text: str) -> Certificate:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    def fail(lineno, msg):
        raise CertificateFormatError(f"line {lineno}: {msg}")

    if len(lines) < 5:
        raise CertificateFormatError("truncated certificate")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "DSLICE-CERT":
        fail(1, "missing DSLICE-CERT header")
    if head[1] != VERSION:
        fail(1, f"unsupported certificate version {head[1]}")
    digest_line = lines[1].split()
    if len(digest_line) != 3 or digest_line[0] != "DIGEST":
        fail(2, "expected 'DIGEST <algo> <hex>'")
    if digest_line[1] not in hashlib.algorithms_available:
        fail(2, f"unknown digest algorithm {digest_line[1]}")
    mode_line = lines[2].split()
    if len(mode_line) != 2 or mode_line[0] != "MODE" or mode_line[1] not in ("both", "fwd", "bwd"):
        fail(3, "expected 'MODE both|fwd|bwd'")
    if lines[3] != "NODES":
        fail(4, "expected NODES section")

    marks, edges = {}, set()
    i = 4
    while i < len(lines) and lines[i] != "EDGES":
        node, sep, mark = lines[i].rpartition(" ")
        if not sep or not node or mark not in MARKS:
            fail(i + 1, f"malformed node line {lines[i]!r}")
        if node in marks:
            fail(i + 1, f"duplicate node {node}")
        marks[node] = mark
        i += 1
    if i == len(lines):
        fail(i, "missing EDGES section")
    i += 1
    while i < len(lines) and lines[i] != "END":
        a, sep, b = lines[i].partition(" -> ")
        if not sep:
            fail(i + 1, f"malformed edge line {lines[i]!r}")
        for n in (a, b):
            if n not in marks:
                fail(i + 1, f"edge over undeclared node {n}")
        edges.add((a, b))
        i += 1
    if i == len(lines):
        fail(i, "missing END")
    if i != len(lines) - 1:
        fail(i + 2, "content after END")
    return Certificate(digest_line[2], marks, edges, SliceMode(mode_line[1]), digest_line[1])


@dataclass(frozen=True)
class Violation:
    kind: str
    location: str

    def __str__(self):
        return f"{self.kind}: {self.location}"


@dataclass
class Verdict:
    violations: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid


def check_translation(p: Program, c: Certificate, cfg: SsConfig) -> Verdict:
    """Re-translate every instruction of ``p`` and require its edges in ``c``.

    Extra certificate edges are tolerated and counted under
    ``info["extra_edges"]``.
    """
    if program_digest(p, c.digest_algo) != c.digest:
        return Verdict([Violation("digest-mismatch",
                                  f"certificate digest {c.digest[:16]}... does not cover this program")])
    h = build_hierarchy(p)
    violations, required = [], set()
    for cls, m in p.iter_methods():
        for index, instr in enumerate(m.body):
            for a, b in sorted(translate_instruction(instr, (cls.name, m.name), h, cfg)):
                required.add((a, b))
                if (a, b) not in c.edges:
                    violations.append(Violation(
                        "missing-edge", f"{cls.name}.{m.name}[{index}]: {a} -> {b}"))
            if isinstance(instr, Call):
                # API nodes must be listed even when the call has no arguments
                sig = instr.signature
                for n, wanted in ((source_node(sig), sig in cfg.sources),
                                  (sink_node(sig), sig in cfg.sinks)):
                    if wanted and n not in c.marks:
                        violations.append(Violation(
                            "unknown-node", f"{cls.name}.{m.name}[{index}]: {n} not listed"))
    return Verdict(violations, {"required_edges": len(required),
                                "extra_edges": len(c.edges - required)})


def check_marking(c: Certificate, cfg: SsConfig) -> Verdict:
    """Verify the marking is closed, in one pass over nodes and one over edges.

    Backward closure is conditioned on the predecessor carrying ``+``; in the
    one-directional modes only the matching closure and endpoint rule apply.
    """
    mode = c.mode
    fwd = mode in (SliceMode.BOTH, SliceMode.FORWARD)
    bwd = mode in (SliceMode.BOTH, SliceMode.BACKWARD)
    conditioned = mode is SliceMode.BOTH
    violations = []
    plus, minus = set(), set()
    node_visits = edge_visits = 0
    for n, mark in c.marks.items():
        node_visits += 1
        if mark == "±":
            plus.add(n)
            minus.add(n)
        elif mark == "+":
            plus.add(n)
        elif mark == "-":
            minus.add(n)
        if n[0] != "S":
            continue
        if n.startswith("SRC:"):
            if n[4:] not in cfg.sources:
                violations.append(Violation("unknown-node", f"{n} is not a configured source"))
            if fwd and n not in plus:
                violations.append(Violation("unmarked-source", n))
        elif n.startswith("SNK:"):
            if n[4:] not in cfg.sinks:
                violations.append(Violation("unknown-node", f"{n} is not a configured sink"))
            if bwd and n not in minus:
                violations.append(Violation("unmarked-sink", n))
    if not fwd:
        plus = set()
    for a, b in c.edges:
        edge_visits += 1
        if a in plus:
            if b not in plus:
                violations.append(Violation("forward-violation", f"{a} -> {b}"))
            if bwd and b in minus and a not in minus:
                violations.append(Violation("backward-violation", f"{a} -> {b}"))
        elif bwd and not conditioned and b in minus and a not in minus:
            violations.append(Violation("backward-violation", f"{a} -> {b}"))
    return Verdict(violations, {"node_visits": node_visits, "edge_visits": edge_visits})


def certified_nodes(c: Certificate) -> frozenset:
    """Nodes the certificate's marks declare relevant under its mode."""
    wanted = {SliceMode.BOTH: ("±",), SliceMode.FORWARD: ("+", "±"),
              SliceMode.BACKWARD: ("-", "±")}[c.mode]
    return frozenset(n for n, mark in c.marks.items() if mark in wanted)


def check_certificate(p: Program, c: Certificate, cfg: SsConfig) -> Verdict:
    """Translation and marking checks together.

    A valid verdict carries ``info["relevant_methods"]``, re-derived from the
    certificate's own marks rather than taken from the slicer.
    """
    translation = check_translation(p, c, cfg)
    if any(v.kind == "digest-mismatch" for v in translation.violations):
        return translation
    marking = check_marking(c, cfg)
    verdict = Verdict(translation.violations + marking.violations,
                      {**translation.info, **marking.info})
    via_locals, via_fields = relevant_methods(p, certified_nodes(c), build_hierarchy(p))
    verdict.info["relevant_methods"] = sorted(via_locals | via_fields)
    return verdict
