"""dslicer: data-flow guided, flow-insensitive slicing of object-oriented programs.

Typical use::

    from dslicer import parse_program, parse_config, slice_program

    result = slice_program(parse_program(text), parse_config(cfg_text))
    result.relevant_methods   # {("C", "m3"), ...}
"""
from importlib import resources

from .agraph import AssignmentGraph, build_graph, export_dot, translate_instruction
from .certificate import (Certificate, Verdict, check_certificate, check_marking,
                          check_translation, emit_certificate, parse_certificate)
from .hierarchy import Hierarchy, build_hierarchy, declaring_class, resolve_virtual
from .ir import (IRError, Program, SsConfig, parse_config, parse_program,
                 serialize_config, serialize_program, validate_program)
from .slicer import (Marking, SliceMode, SliceResult, compute_marking, relevant_methods,
                     relevant_nodes, slice_program)
from .transform import ReductionReport, reduce_program

__version__ = "0.1.0"


def fixture_text(name: str) -> str:
    """Text of a bundled fixture, e.g. ``"p1.ir"`` or ``"p1.cfg"``."""
    return resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")


def load_p1() -> tuple[Program, SsConfig]:
    """The two-class worked example and its source/sink configuration."""
    return parse_program(fixture_text("p1.ir")), parse_config(fixture_text("p1.cfg"))


__all__ = [
    "AssignmentGraph", "Certificate", "Hierarchy", "IRError", "Marking", "Program",
    "ReductionReport", "SliceMode", "SliceResult", "SsConfig", "Verdict",
    "build_graph", "build_hierarchy", "check_certificate", "check_marking",
    "check_translation", "compute_marking", "declaring_class", "emit_certificate",
    "export_dot", "fixture_text", "load_p1", "parse_certificate", "parse_config",
    "parse_program", "reduce_program", "relevant_methods", "relevant_nodes",
    "resolve_virtual", "serialize_config", "serialize_program", "slice_program",
    "translate_instruction", "validate_program",
]
