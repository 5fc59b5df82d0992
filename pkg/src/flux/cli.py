"""Command-line frontend: ``flux check|run|normalize|analyze|fuzz``.

Exit codes: 0 success, 1 syntax error, 2 type error, 3 runtime error
(stuck or out of fuel), 64 usage error (missing file, bad option),
70 internal soundness violation found by ``fuzz``.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import core_typing as ct
from . import core_update as c
from . import path_error as pe
from . import query_lang as q
from . import sampling
from . import source_lang as sl
from . import source_typing as st
from . import syntax
from . import type_algebra as ta
from . import xmlio
from .errors import FluxError, FluxRuntimeError, FluxSyntaxError, FluxTypeError

EXIT_OK, EXIT_SYNTAX, EXIT_TYPE, EXIT_RUNTIME = 0, 1, 2, 3
EXIT_USAGE, EXIT_SOFTWARE = 64, 70
SCHEMA_PATH_VAR = "FLUX_SCHEMA_PATH"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    schema_path: Optional[Path]
    script_path: Path
    input_doc_path: Optional[Path] = None
    output_doc_path: Optional[Path] = None
    core: bool = False
    fuel: int = c.DEFAULT_FUEL
    json: bool = False
    enable_transform: bool = False
    optimize: bool = False
    unchecked: bool = False
    seed: int = 0
    count: int = 100
    format: str = "xml"


@dataclass
class Loaded:
    """A parsed schema and script."""
    E: ta.Signature
    doc_type: object
    procs: c.ProcEnv
    core: c.Statement
    source: Optional[sl.SourceStmt]


# --------------------------------------------------------------- loading


def resolve_schema(name) -> Path:
    p = Path(name)
    if p.exists():
        return p
    if not p.is_absolute():
        for d in os.environ.get(SCHEMA_PATH_VAR, "").split(os.pathsep):
            if d and (Path(d) / p).exists():
                return Path(d) / p
    raise UsageError(f"schema file not found: {name}")


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None


def load(cfg: RunConfig) -> Loaded:
    if cfg.schema_path is None:
        raise UsageError("no schema given (use --schema)")
    E, doc_type = syntax.parse_schema(_read(resolve_schema(cfg.schema_path)))
    if doc_type is None:
        raise FluxSyntaxError("schema file has no 'schema <type>' line", 1, 1)
    ta.check_signature(E)
    ta.check_type(doc_type, E)
    text = _read(cfg.script_path)
    if cfg.core:
        procs, s = syntax.parse_core_script(text, enable_transform=cfg.enable_transform)
        return Loaded(E, doc_type, procs, s, None)
    src = syntax.parse_source(text, enable_transform=cfg.enable_transform)
    return Loaded(E, doc_type, c.EMPTY_PROCS, sl.normalize_stmt(src), src)


def typecheck(ld: Loaded, warnings=None):
    """Output document type of the script (placeholder-free)."""
    ct.check_declarations(ld.procs, ld.E)
    if ld.source is not None:
        out = st.check_source_script(ld.doc_type, ld.source, ld.E, ld.procs, warnings=warnings)
    else:
        out = st.check_core_script(ld.doc_type, ld.core, ld.E, ld.procs)
    return ta.simplify(out)


# -------------------------------------------------------------- commands


def cmd_check(cfg, out):
    ld = load(cfg)
    warnings = []
    t = typecheck(ld, warnings)
    if cfg.json:
        for span, msg in warnings:
            emit(out, {"kind": "warning", "span": _span(span), "message": msg,
                       "expected": None, "found": None})
        emit(out, {"kind": "result", "type": ta.show_type(t)})
    else:
        for span, msg in warnings:
            print(f"warning at {_span(span)}: {msg}", file=sys.stderr)
        print(ta.show_type(t), file=out)
    return EXIT_OK


def cmd_run(cfg, out):
    ld = load(cfg)
    if not cfg.unchecked:
        typecheck(ld)
    if cfg.input_doc_path is None:
        raise UsageError("run needs --input")
    doc = xmlio.read_document(_read(cfg.input_doc_path))
    result = c.run_document(doc, ld.core, ld.procs, cfg.fuel)
    text = xmlio.write_xml(result) if cfg.format == "xml" else syntax.show_value(result)
    _write_output(cfg, out, text)
    return EXIT_OK


def cmd_normalize(cfg, out):
    ld = load(cfg)
    _write_output(cfg, out, syntax.show_core_script(ld.procs, ld.core).rstrip("\n"))
    return EXIT_OK


def cmd_analyze(cfg, out):
    ld = load(cfg)
    typecheck(ld)
    ls = pe.label_statement(ld.core)
    _, L = pe.analyze(q.EMPTY_ENV, ct.PLURAL, st.document_type(ld.doc_type), ls, ld.procs, ld.E)
    found = [(n, "") for n in _outermost(ls, set(pe.report_errors(ls, L)))]
    for d, dls, dL in pe.analyze_procedures(ld.procs, ld.E):
        found += [(n, f"in procedure {d.name}")
                  for n in _outermost(dls, set(pe.report_errors(dls, dL)))]
    shown = ta.show_type(ld.doc_type)
    for n, where in found:
        msg = f"subexpression `{syntax.show_stmt(n.node)}` is dead under input type {shown}"
        if where:
            msg += f" ({where})"
        if cfg.json:
            emit(out, {"kind": "path-error", "span": _span(n.node.span), "label": n.label,
                       "message": msg, "expected": None, "found": None})
        else:
            print(f"path-error at {_span(n.node.span)}: {msg}", file=out)
    if cfg.optimize:
        opt = pe.optimize(ls, L)
        text = syntax.show_core_script(ld.procs, opt).rstrip("\n")
        if cfg.output_doc_path is not None:
            Path(cfg.output_doc_path).write_text(text + "\n", encoding="utf-8")
        else:
            print(text, file=out)
    if not found and not cfg.json:
        print("no path-errors", file=sys.stderr)
    return EXIT_OK


def cmd_fuzz(cfg, out):
    """Run the script on random schema members and check the result type."""
    ld = load(cfg)
    t = typecheck(ld)
    rng = random.Random(cfg.seed)
    bad = 0
    for i in range(cfg.count):
        doc = sampling.sample(ld.doc_type, ld.E, rng)
        if doc is None:
            break
        try:
            res = c.run_document(doc, ld.core, ld.procs, cfg.fuel)
        except FluxRuntimeError as err:
            bad += 1
            print(f"case {i}: {syntax.show_value(doc)} raised {err.message}", file=out)
            continue
        if not ta.member(res, t, ld.E):
            bad += 1
            print(f"case {i}: {syntax.show_value(doc)} gave {syntax.show_value(res)} "
                  f"outside {ta.show_type(t)}", file=out)
    print(f"{cfg.count} cases, {bad} violations", file=out)
    return EXIT_SOFTWARE if bad else EXIT_OK


COMMANDS = {"check": cmd_check, "run": cmd_run, "normalize": cmd_normalize,
            "analyze": cmd_analyze, "fuzz": cmd_fuzz}


# --------------------------------------------------------------- helpers


def _span(span):
    return None if span is None else str(span)


def _outermost(ls, reported):
    """Reported nodes none of whose ancestors is reported."""
    out = []

    def go(n):
        if n.label in reported:
            out.append(n)
            return
        for ch in n.children:
            go(ch)

    go(ls)
    return out


def _write_output(cfg, out, text):
    if cfg.output_doc_path is not None:
        Path(cfg.output_doc_path).write_bytes(text.encode("utf-8"))
    else:
        print(text, file=out)


def emit(out, record):
    print(json.dumps(record, sort_keys=True), file=out)


def exit_code(err) -> int:
    if isinstance(err, FluxSyntaxError):
        return EXIT_SYNTAX
    if isinstance(err, FluxTypeError):
        return EXIT_TYPE
    if isinstance(err, FluxRuntimeError):
        return EXIT_RUNTIME
    return EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser():
    ap = _Parser(prog="flux", description="Typecheck, run and analyze FLUX XML updates.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [("check", "print the output type of a script"),
                        ("run", "apply a script to a document"),
                        ("normalize", "print the core form of a source script"),
                        ("analyze", "report dead subexpressions (path-errors)"),
                        ("fuzz", "run a script on random schema members")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--schema", help=f"schema file (searched in ${SCHEMA_PATH_VAR} if relative)")
        p.add_argument("--script", required=True, help="update script")
        p.add_argument("--input", help="input document (XML or value syntax)")
        p.add_argument("--output", help="write the result here instead of stdout")
        p.add_argument("--core", action="store_true", help="the script is in core syntax")
        p.add_argument("--fuel", type=int, default=c.DEFAULT_FUEL, help="evaluation step limit")
        p.add_argument("--json", action="store_true", help="one JSON record per diagnostic")
        p.add_argument("--enable-transform", action="store_true",
                       help="allow transform expressions in queries")
        p.add_argument("--optimize", action="store_true",
                       help="(analyze) also print the script with path-errors replaced by skip")
        p.add_argument("--unchecked", action="store_true", help="(run) skip typechecking")
        p.add_argument("--format", choices=["xml", "value"], default="xml",
                       help="(run) output document format")
        p.add_argument("--seed", type=int, default=0, help="(fuzz) random seed")
        p.add_argument("--count", type=int, default=100, help="(fuzz) number of cases")
    return ap


def config_from_args(ns) -> RunConfig:
    schema = ns.schema or os.environ.get("FLUX_SCHEMA")
    return RunConfig(
        schema_path=Path(schema) if schema else None,
        script_path=Path(ns.script),
        input_doc_path=Path(ns.input) if ns.input else None,
        output_doc_path=Path(ns.output) if ns.output else None,
        core=ns.core, fuel=ns.fuel, json=ns.json, enable_transform=ns.enable_transform,
        optimize=ns.optimize, unchecked=ns.unchecked, seed=ns.seed, count=ns.count,
        format=ns.format)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    try:
        return COMMANDS[ns.command](cfg, out)
    except FluxError as err:
        if cfg.json:
            emit(out, err.record())
        else:
            print(f"{err.kind} error: {err.message}", file=sys.stderr)
        return exit_code(err)
    except UsageError as err:
        if cfg.json:
            emit(out, {"kind": "usage", "message": str(err), "span": None,
                       "expected": None, "found": None})
        else:
            print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except RecursionError:
        print("runtime error: recursion too deep", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
