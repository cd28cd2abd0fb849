"""Program reduction: drop every method outside a slice."""
from __future__ import annotations

from dataclasses import dataclass, replace

from .ir import Program

MethodId = tuple[str, str]


@dataclass(frozen=True)
class ReductionReport:
    kept: frozenset
    removed: frozenset

    @property
    def reduction_pct(self) -> float:
        total = len(self.kept) + len(self.removed)
        return 100.0 * len(self.removed) / total if total else 0.0

    def to_text(self) -> str:
        lines = [f"kept methods ({len(self.kept)}):"]
        lines += [f"  {c}.{m}" for c, m in sorted(self.kept)]
        lines.append(f"removed methods ({len(self.removed)}):")
        lines += [f"  {c}.{m}" for c, m in sorted(self.removed)]
        lines.append(f"reduction: {self.reduction_pct:.2f}%")
        return "\n".join(lines) + "\n"


def reduce_program(p: Program, relevant) -> tuple[Program, ReductionReport]:
    """Keep only ``relevant`` methods.

    Classes and fields always survive so field identities are stable. Calls
    into removed methods stay in place and become unresolved calls when the
    reduced program is analysed again.
    """
    relevant = set(relevant)
    unknown = relevant - set(p.method_ids())
    if unknown:
        raise ValueError("not methods of the program: "
                         + ", ".join(f"{c}.{m}" for c, m in sorted(unknown)))
    classes, kept, removed = [], set(), set()
    for c in p.classes:
        methods = []
        for m in c.methods:
            key = (c.name, m.name)
            if key in relevant:
                methods.append(m)
                kept.add(key)
            else:
                removed.add(key)
        classes.append(replace(c, methods=tuple(methods)))
    return Program(tuple(classes)), ReductionReport(frozenset(kept), frozenset(removed))
