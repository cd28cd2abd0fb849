"""``dslicer`` command line.

Exit status: 0 success or valid certificate, 1 invalid certificate or failed
analysis, 2 usage or input errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .agraph import TranslationError, build_graph, export_dot
from .certificate import CertificateFormatError, check_certificate, emit_certificate, parse_certificate
from .hierarchy import build_hierarchy
from .ir import ConfigError, IRError, parse_config, parse_program, serialize_program
from .slicer import SliceMode, slice_graph, slice_program
from .testkit import BenchRow, GenParams, gen_program, plot_corpus, rows_to_csv, run_corpus, summarize_corpus
from .transform import reduce_program

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class InputError(Exception):
    pass


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")


def _parse_program_file(path):
    try:
        return parse_program(_read(path))
    except IRError as exc:
        raise InputError("\n".join(f"{path}:{d}" for d in exc.diagnostics)) from None


def _load(args):
    return _parse_program_file(args.program), parse_config(_read(args.config))


def format_slice_report(program, result) -> str:
    relevant = sorted(result.relevant_methods)
    irrelevant = result.irrelevant_methods(program)
    lines = [f"mode: {result.mode.value}", f"relevant methods ({len(relevant)}):"]
    lines += [f"  {c}.{m}" for c, m in relevant]
    lines.append(f"irrelevant methods ({len(irrelevant)}):")
    lines += [f"  {c}.{m}" for c, m in irrelevant]
    if result.graph is not None and result.graph.unresolved:
        lines.append(f"unresolved calls ({len(result.graph.unresolved)}):")
        lines += [f"  {site}" for site in result.graph.unresolved]
    return "\n".join(lines) + "\n"


def cmd_slice(args):
    program, cfg = _load(args)
    result = slice_program(program, cfg, SliceMode(args.mode))
    report = format_slice_report(program, result)
    sys.stdout.write(report)
    if args.report:
        _write(args.report, report)
    if args.cert:
        cert = emit_certificate(program, result.graph, result.marking, result.mode)
        _write(args.cert, cert.to_text())
    return EXIT_OK


def cmd_check(args):
    program, cfg = _load(args)
    cert = parse_certificate(_read(args.cert))
    verdict = check_certificate(program, cert, cfg)
    if verdict.valid:
        print("VALID")
        for c, m in verdict.info["relevant_methods"]:
            print(f"  relevant {c}.{m}")
        return EXIT_OK
    print("INVALID")
    for v in verdict.violations:
        print(f"  {v}")
    return EXIT_FAIL


def cmd_reduce(args):
    program, cfg = _load(args)
    result = slice_program(program, cfg, SliceMode.BOTH)
    reduced, report = reduce_program(program, result.relevant_methods)
    _write(args.output, serialize_program(reduced))
    text = report.to_text()
    sys.stdout.write(text)
    if args.report:
        _write(args.report, text)
    return EXIT_OK


def cmd_gen(args):
    params = GenParams(classes=args.classes, methods_per_class=args.methods,
                       instrs_per_method=args.instrs, call_density=args.call_density,
                       field_density=args.field_density, source_density=args.source_density,
                       sink_density=args.sink_density, inheritance_depth=args.inheritance_depth,
                       seed=args.seed)
    _write(args.output, serialize_program(gen_program(params)))
    return EXIT_OK


def cmd_bench(args):
    cfg = parse_config(_read(args.config))
    directory = Path(args.directory)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    programs, broken = [], []
    for path in sorted(directory.glob("*.ir")):
        try:
            programs.append((path.stem, _parse_program_file(path)))
        except InputError as exc:
            broken.append(BenchRow(path.stem, error=str(exc)))
    rows = sorted(run_corpus(programs, cfg) + broken, key=lambda r: r.program_id)
    _write(args.csv, rows_to_csv(rows))
    if args.plot:
        plot_corpus(rows, args.plot)
    sys.stdout.write(summarize_corpus(rows))
    return EXIT_FAIL if any(r.error is not None for r in rows) else EXIT_OK


def cmd_dot(args):
    program, cfg = _load(args)
    h = build_hierarchy(program)
    g = build_graph(program, h, cfg)
    result = slice_graph(program, h, g, SliceMode.BOTH)
    _write(args.output, export_dot(g, highlight=result.relevant_nodes))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dslicer", description="Data-flow guided method slicing.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("slice", help="list relevant and irrelevant methods")
    p.add_argument("program")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=[m.value for m in SliceMode], default="both")
    p.add_argument("--cert", help="write a certificate here")
    p.add_argument("--report", help="also write the report here")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("check", help="validate a certificate against a program")
    p.add_argument("program")
    p.add_argument("cert")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="write the program without irrelevant methods")
    p.add_argument("program")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("gen", help="generate a random program")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--methods", type=int, required=True, help="methods per class")
    p.add_argument("--instrs", type=int, required=True, help="instructions per method")
    p.add_argument("--seed", type=int, required=True)
    defaults = GenParams()
    for flag in ("call", "field", "source", "sink"):
        p.add_argument(f"--{flag}-density", type=float,
                       default=getattr(defaults, f"{flag}_density"))
    p.add_argument("--inheritance-depth", type=int, default=defaults.inheritance_depth)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="benchmark every *.ir file in a directory")
    p.add_argument("directory")
    p.add_argument("--config", required=True)
    p.add_argument("--csv", required=True)
    p.add_argument("--plot", help="write an SVG scatter plot here")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dot", help="export the assignment graph as Graphviz DOT")
    p.add_argument("program")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_dot)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except TranslationError as exc:
        print(f"dslicer: analysis failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (InputError, IRError, ConfigError, CertificateFormatError, ValueError) as exc:
        print(f"dslicer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
