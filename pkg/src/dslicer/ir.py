"""Mini-IR: a Jimple-like three-address language for object-oriented programs.

The textual form is free-form (whitespace and ``#`` comments are ignored)::

    class C extends B {
      field f;
      method m(this : C, x : int) {
        var t : int;
        t = binop x x;
        this.f = t;
        return t;
      }
    }

Programs are immutable trees of frozen dataclasses. Source/sink configuration
lives here too since it shares the ``Class.method`` signature syntax.
"""
from __future__ import annotations

import re
from functools import cached_property
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

__all__ = [
    "ArrayToVar", "BinOp", "Call", "ClassDef", "ConfigError", "ConstToVar",
    "Diagnostic", "FieldToVar", "IRError", "Instruction", "MethodDef", "New",
    "Program", "Return", "SsConfig", "UniOp", "VarToArray", "VarToField",
    "VarToVar", "PRIMITIVE_TYPES", "RESERVED", "is_class_type",
    "parse_config", "parse_program", "serialize_config", "serialize_program",
    "validate_program",
]

PRIMITIVE_TYPES = frozenset(
    {"int", "long", "short", "byte", "char", "boolean", "float", "double", "void"}
)
RESERVED = frozenset(
    {"class", "extends", "field", "static", "method", "var", "const", "unop",
     "binop", "vcall", "scall", "new", "return"}
)

Pos = Optional[tuple[int, int]]


def _pos():
    # source positions are diagnostics metadata, not structure
    return field(default=None, compare=False, repr=False)


# -- instructions ----------------------------------------------------------

@dataclass(frozen=True)
class ConstToVar:
    dst: str
    literal: str
    pos: Pos = _pos()

    def variables(self):
        return (self.dst,)

    def __str__(self):
        return f"{self.dst} = const {self.literal};"


@dataclass(frozen=True)
class VarToVar:
    dst: str
    src: str
    pos: Pos = _pos()

    def variables(self):
        return (self.dst, self.src)

    def __str__(self):
        return f"{self.dst} = {self.src};"


@dataclass(frozen=True)
class UniOp:
    dst: str
    src: str
    pos: Pos = _pos()

    def variables(self):
        return (self.dst, self.src)

    def __str__(self):
        return f"{self.dst} = unop {self.src};"


@dataclass(frozen=True)
class BinOp:
    dst: str
    lhs: str
    rhs: str
    pos: Pos = _pos()

    def variables(self):
        return (self.dst, self.lhs, self.rhs)

    def __str__(self):
        return f"{self.dst} = binop {self.lhs} {self.rhs};"


@dataclass(frozen=True)
class VarToArray:
    """``array[index] = src``"""
    array: str
    index: str
    src: str
    pos: Pos = _pos()

    def variables(self):
        return (self.array, self.index, self.src)

    def __str__(self):
        return f"{self.array}[{self.index}] = {self.src};"


@dataclass(frozen=True)
class ArrayToVar:
    """``dst = array[index]``"""
    dst: str
    array: str
    index: str
    pos: Pos = _pos()

    def variables(self):
        return (self.dst, self.array, self.index)

    def __str__(self):
        return f"{self.dst} = {self.array}[{self.index}];"


@dataclass(frozen=True)
class VarToField:
    """``obj.field = src``"""
    obj: str
    field: str
    src: str
    pos: Pos = _pos()

    def variables(self):
        return (self.obj, self.src)

    def __str__(self):
        return f"{self.obj}.{self.field} = {self.src};"


@dataclass(frozen=True)
class FieldToVar:
    """``dst = obj.field``"""
    dst: str
    obj: str
    field: str
    pos: Pos = _pos()

    def variables(self):
        return (self.dst, self.obj)

    def __str__(self):
        return f"{self.dst} = {self.obj}.{self.field};"


@dataclass(frozen=True)
class Call:
    """Method invocation. For ``virtual`` calls ``args[0]`` is the receiver."""
    lvalue: Optional[str]
    kind: str  # "virtual" | "static"
    cls: str
    name: str
    args: tuple[str, ...] = ()
    pos: Pos = _pos()

    @property
    def signature(self) -> str:
        return f"{self.cls}.{self.name}"

    @property
    def is_virtual(self) -> bool:
        return self.kind == "virtual"

    def variables(self):
        return ((self.lvalue,) if self.lvalue else ()) + self.args

    def __str__(self):
        op = "vcall" if self.is_virtual else "scall"
        text = f"{op} {self.cls}.{self.name}({', '.join(self.args)});"
        return f"{self.lvalue} = {text}" if self.lvalue else text


@dataclass(frozen=True)
class Return:
    value: Optional[str] = None
    pos: Pos = _pos()

    def variables(self):
        return (self.value,) if self.value else ()

    def __str__(self):
        return f"return {self.value};" if self.value else "return;"


@dataclass(frozen=True)
class New:
    dst: str
    cls: str
    pos: Pos = _pos()

    def variables(self):
        return (self.dst,)

    def __str__(self):
        return f"{self.dst} = new {self.cls};"


Instruction = Union[ConstToVar, VarToVar, UniOp, BinOp, VarToArray, ArrayToVar,
                    VarToField, FieldToVar, Call, Return, New]


# -- declarations -----------------------------------------------------------

@dataclass(frozen=True)
class MethodDef:
    name: str
    is_static: bool = False
    params: tuple[tuple[str, str], ...] = ()
    locals: tuple[tuple[str, str], ...] = ()
    body: tuple[Instruction, ...] = ()
    pos: Pos = _pos()

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.params)

    @cached_property
    def var_types(self) -> dict[str, str]:
        types = dict(self.locals)
        types.update(self.params)
        return types


@dataclass(frozen=True)
class ClassDef:
    name: str
    superclass: Optional[str] = None
    fields: tuple[str, ...] = ()
    methods: tuple[MethodDef, ...] = ()
    pos: Pos = _pos()

    def method(self, name: str) -> Optional[MethodDef]:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass(frozen=True)
class Program:
    classes: tuple[ClassDef, ...] = ()

    def get_class(self, name: str) -> Optional[ClassDef]:
        for c in self.classes:
            if c.name == name:
                return c
        return None

    def iter_methods(self) -> Iterator[tuple[ClassDef, MethodDef]]:
        for c in self.classes:
            for m in c.methods:
                yield c, m

    def method_ids(self) -> list[tuple[str, str]]:
        return [(c.name, m.name) for c, m in self.iter_methods()]

    def num_methods(self) -> int:
        return sum(len(c.methods) for c in self.classes)


def is_class_type(type_name: str) -> bool:
    return type_name not in PRIMITIVE_TYPES and not type_name.endswith("]")


# -- diagnostics ------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    kind: str  # syntax | duplicate | undeclared | cycle | type
    message: str
    where: str = ""
    line: Optional[int] = None
    col: Optional[int] = None

    def __str__(self):
        loc = f"{self.line}:{self.col}: " if self.line is not None else ""
        where = f" [{self.where}]" if self.where else ""
        return f"{loc}{self.kind}: {self.message}{where}"


class IRError(ValueError):
    """Raised by :func:`parse_program` with every diagnostic collected."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# -- lexer ------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<id>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<num>-?[0-9][A-Za-z0-9_.]*)
  | (?P<str>"[^"\s]*")
  | (?P<punct>[{}()\[\],;:=.])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str  # id | num | str | punct | eof
    text: str
    line: int
    col: int


def _tokenize(text, diags):
    toks = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            diags.append(Diagnostic("syntax", f"unexpected character {text[i]!r}",
                                    line=line, col=i - line_start + 1))
            i += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, i - line_start + 1))
        i = m.end()
    toks.append(_Tok("eof", "", line, i - line_start + 1))
    return toks


class _Syntax(Exception):
    def __init__(self, tok, msg):
        super().__init__(msg)
        self.tok = tok


class _Parser:
    def __init__(self, text):
        self.diags: list[Diagnostic] = []
        self.toks = _tokenize(text, self.diags)
        self.i = 0

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text, k=0):
        t = self.peek(k)
        return t.kind in ("id", "punct") and t.text == text

    def advance(self):
        t = self.peek()
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text):
        t = self.peek()
        if not self.at(text):
            raise _Syntax(t, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return self.advance()

    def ident(self, what="identifier"):
        t = self.peek()
        if t.kind != "id" or t.text in RESERVED:
            raise _Syntax(t, f"expected {what}, found {t.text or 'end of input'!r}")
        return self.advance().text

    def type_name(self):
        name = self.ident("type")
        while self.at("["):
            self.advance()
            self.expect("]")
            name += "[]"
        return name

    def error(self, exc):
        self.diags.append(Diagnostic("syntax", str(exc), line=exc.tok.line, col=exc.tok.col))

    def recover(self, stops):
        # skip past the next ';' or stop before a closing brace
        while self.peek().kind != "eof":
            if self.at(";"):
                self.advance()
                return
            if any(self.at(s) for s in stops):
                return
            self.advance()

    def skip_member(self):
        depth = 0
        while self.peek().kind != "eof":
            if depth == 0 and any(self.at(k) for k in ("field", "method", "static")):
                return
            if self.at("{"):
                depth += 1
            elif self.at("}"):
                if depth == 0:
                    return
                depth -= 1
            self.advance()

    # grammar
    def program(self):
        classes = []
        while self.peek().kind != "eof":
            try:
                classes.append(self.classdef())
            except _Syntax as exc:
                self.error(exc)
                # resynchronise on the next class keyword
                self.advance()
                while self.peek().kind != "eof" and not self.at("class"):
                    self.advance()
        return Program(tuple(classes))

    def classdef(self):
        start = self.expect("class")
        name = self.ident("class name")
        superclass = None
        if self.at("extends"):
            self.advance()
            superclass = self.ident("class name")
        self.expect("{")
        fields, methods = [], []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise _Syntax(self.peek(), f"unterminated class {name}")
            try:
                if self.at("field"):
                    self.advance()
                    fields.append(self.ident("field name"))
                    self.expect(";")
                else:
                    methods.append(self.methoddef())
            except _Syntax as exc:
                self.error(exc)
                self.skip_member()
        self.expect("}")
        return ClassDef(name, superclass, tuple(fields), tuple(methods),
                        pos=(start.line, start.col))

    def methoddef(self):
        start = self.peek()
        is_static = False
        if self.at("static"):
            self.advance()
            is_static = True
        self.expect("method")
        name = self.ident("method name")
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.param())
            while self.at(","):
                self.advance()
                params.append(self.param())
        self.expect(")")
        self.expect("{")
        decls, body = [], []
        while self.at("var"):
            try:
                self.advance()
                decls.append(self.param())
                self.expect(";")
            except _Syntax as exc:
                self.error(exc)
                self.recover(("}",))
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise _Syntax(self.peek(), f"unterminated method {name}")
            try:
                body.append(self.instr())
            except _Syntax as exc:
                self.error(exc)
                self.recover(("}",))
        self.expect("}")
        return MethodDef(name, is_static, tuple(params), tuple(decls), tuple(body),
                         pos=(start.line, start.col))

    def param(self):
        name = self.ident("variable name")
        self.expect(":")
        return (name, self.type_name())

    def call_tail(self, lvalue, start):
        kind = "virtual" if self.advance().text == "vcall" else "static"
        cls = self.ident("class name")
        self.expect(".")
        name = self.ident("method name")
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.ident("argument"))
            while self.at(","):
                self.advance()
                args.append(self.ident("argument"))
        self.expect(")")
        self.expect(";")
        return Call(lvalue, kind, cls, name, tuple(args), pos=start)

    def instr(self):
        t = self.peek()
        start = (t.line, t.col)
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.ident("variable")
            self.expect(";")
            return Return(value, pos=start)
        if self.at("vcall") or self.at("scall"):
            return self.call_tail(None, start)
        first = self.ident("variable")
        if self.at("["):
            self.advance()
            index = self.ident("index variable")
            self.expect("]")
            self.expect("=")
            src = self.ident("variable")
            self.expect(";")
            return VarToArray(first, index, src, pos=start)
        if self.at("."):
            self.advance()
            fname = self.ident("field name")
            self.expect("=")
            src = self.ident("variable")
            self.expect(";")
            return VarToField(first, fname, src, pos=start)
        self.expect("=")
        if self.at("vcall") or self.at("scall"):
            return self.call_tail(first, start)
        if self.at("const"):
            self.advance()
            lit = self.peek()
            if lit.kind not in ("num", "str", "id"):
                raise _Syntax(lit, f"expected literal, found {lit.text or 'end of input'!r}")
            self.advance()
            self.expect(";")
            return ConstToVar(first, lit.text, pos=start)
        if self.at("unop"):
            self.advance()
            src = self.ident("variable")
            self.expect(";")
            return UniOp(first, src, pos=start)
        if self.at("binop"):
            self.advance()
            lhs = self.ident("variable")
            rhs = self.ident("variable")
            self.expect(";")
            return BinOp(first, lhs, rhs, pos=start)
        if self.at("new"):
            self.advance()
            cls = self.ident("class name")
            self.expect(";")
            return New(first, cls, pos=start)
        src = self.ident("variable")
        if self.at("["):
            self.advance()
            index = self.ident("index variable")
            self.expect("]")
            self.expect(";")
            return ArrayToVar(first, src, index, pos=start)
        if self.at("."):
            self.advance()
            fname = self.ident("field name")
            self.expect(";")
            return FieldToVar(first, src, fname, pos=start)
        self.expect(";")
        return VarToVar(first, src, pos=start)


def parse_program(text: str, validate: bool = True) -> Program:
    """Parse mini-IR text.

    Syntax errors are collected with recovery at statement granularity; when
    ``validate`` is set the well-formedness diagnostics of
    :func:`validate_program` are appended. Any diagnostic raises
    :class:`IRError` carrying the full list.
    """
    parser = _Parser(text)
    program = parser.program()
    diags = parser.diags
    if validate:
        diags = diags + validate_program(program)
    if diags:
        raise IRError(diags)
    return program


# -- validation -------------------------------------------------------------

def _at(node, kind, message, where):
    pos = getattr(node, "pos", None)
    if pos:
        return Diagnostic(kind, message, where, pos[0], pos[1])
    return Diagnostic(kind, message, where)


def validate_program(p: Program) -> list[Diagnostic]:
    diags = []
    classes = {}
    for c in p.classes:
        if c.name in classes:
            diags.append(_at(c, "duplicate", f"duplicate class {c.name}", c.name))
        else:
            classes[c.name] = c

    for c in p.classes:
        if c.superclass is not None and c.superclass not in classes:
            diags.append(_at(c, "undeclared",
                             f"class {c.name} extends undeclared class {c.superclass}", c.name))

    # each cycle reported once, at its lexicographically smallest member
    reported = set()
    for c in p.classes:
        seen, cur = [], c.name
        while cur is not None and cur in classes and cur not in seen:
            seen.append(cur)
            cur = classes[cur].superclass
        if cur is not None and cur in seen:
            cycle = seen[seen.index(cur):]
            key = min(cycle)
            if key not in reported:
                reported.add(key)
                diags.append(_at(classes[key], "cycle",
                                 "inheritance cycle: " + " -> ".join(cycle + [cur]), key))

    def field_declared(cls, fname):
        seen = set()
        while cls is not None and cls in classes and cls not in seen:
            seen.add(cls)
            if fname in classes[cls].fields:
                return True
            cls = classes[cls].superclass
        return False

    for c in p.classes:
        if len(set(c.fields)) != len(c.fields):
            dups = sorted({f for f in c.fields if c.fields.count(f) > 1})
            diags.append(_at(c, "duplicate", f"duplicate field(s) {', '.join(dups)}", c.name))
        names = set()
        for m in c.methods:
            where = f"{c.name}.{m.name}"
            if m.name in names:
                diags.append(_at(m, "duplicate", f"duplicate method {m.name}", where))
            names.add(m.name)
            diags.extend(_validate_method(m, where, classes, field_declared))
    return diags


def _validate_method(m, where, classes, field_declared):
    diags = []
    declared = {}
    for name, typ in m.params + m.locals:
        if name in declared:
            diags.append(_at(m, "duplicate", f"variable {name} declared twice", where))
        declared[name] = typ
    for instr in m.body:
        for var in instr.variables():
            if var not in declared:
                diags.append(_at(instr, "undeclared", f"undeclared variable {var}", where))
        if isinstance(instr, (VarToField, FieldToVar)):
            otype = declared.get(instr.obj)
            if otype is None:
                continue
            if otype not in classes:
                diags.append(_at(instr, "type",
                                 f"field receiver {instr.obj} has non-class type {otype}", where))
            elif not field_declared(otype, instr.field):
                diags.append(_at(instr, "undeclared",
                                 f"class {otype} has no field {instr.field}", where))
        elif isinstance(instr, Call) and instr.is_virtual:
            if not instr.args:
                diags.append(_at(instr, "syntax", "virtual call without receiver", where))
            else:
                rtype = declared.get(instr.args[0])
                if rtype is not None and not is_class_type(rtype):
                    diags.append(_at(instr, "type",
                                     f"receiver {instr.args[0]} has non-class type {rtype}", where))
    return diags


# -- serialization ----------------------------------------------------------

def _fmt_vars(pairs):
    return ", ".join(f"{n} : {t}" for n, t in pairs)


def serialize_program(p: Program) -> str:
    """Canonical text; stable across runs and round-trips through the parser."""
    blocks = []
    for c in p.classes:
        head = f"class {c.name}" + (f" extends {c.superclass}" if c.superclass else "")
        lines = [head + " {"]
        lines += [f"  field {f};" for f in c.fields]
        for m in c.methods:
            prefix = "static method" if m.is_static else "method"
            lines.append(f"  {prefix} {m.name}({_fmt_vars(m.params)}) {{")
            lines += [f"    var {n} : {t};" for n, t in m.locals]
            lines += [f"    {instr}" for instr in m.body]
            lines.append("  }")
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# -- source/sink configuration ---------------------------------------------

_SIG_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*\.[A-Za-z_$][A-Za-z0-9_$]*")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SsConfig:
    sources: frozenset = frozenset()
    sinks: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "sources", frozenset(self.sources))
        object.__setattr__(self, "sinks", frozenset(self.sinks))
        for sig in self.sources | self.sinks:
            if not _SIG_RE.fullmatch(sig):
                raise ConfigError(f"malformed signature {sig!r}")


def parse_config(text: str) -> SsConfig:
    sources, sinks, errors = set(), set(), []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("source", "sink"):
            errors.append(f"line {lineno}: expected 'source C.m' or 'sink C.m'")
        elif not _SIG_RE.fullmatch(parts[1]):
            errors.append(f"line {lineno}: malformed signature {parts[1]!r}")
        else:
            (sources if parts[0] == "source" else sinks).add(parts[1])
    if errors:
        raise ConfigError("\n".join(errors))
    return SsConfig(frozenset(sources), frozenset(sinks))


def serialize_config(cfg: SsConfig) -> str:
    lines = [f"source {s}" for s in sorted(cfg.sources)]
    lines += [f"sink {s}" for s in sorted(cfg.sinks)]
    return "".join(line + "\n" for line in lines)
