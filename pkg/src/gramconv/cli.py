"""Command-line front end.

Subcommands: recover, unparse, mutate, transform, prodsig, metrics, converge.
All file inputs and outputs are UTF-8; grammars travel in the JSON
interchange format, notations as `.edd` files, scripts as JSON step lists.

Exit codes are uniform: 0 success, 1 domain error (recovery failure, violated
precondition, malformed content), 2 usage error (bad flags, unreadable
files), 3 convergence finished with a non-empty residue.  Commands are
deterministic: identical inputs produce byte-identical outputs.  Set
GRAMCONV_COLOR=0 to disable ANSI color on diagnostics.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import converge as cv
from . import interchange, notation, recovery
from .grammar import Grammar
from .mutate import MUTATION_KINDS, Mutation, MutationError, mutate
from .transform import (
    ScriptError,
    TransformError,
    apply_script,
    script_from_json,
    script_to_json,
)

USAGE_ERROR = 2
DOMAIN_ERROR = 1
RESIDUE = 3


def _color_enabled() -> bool:
    return os.environ.get("GRAMCONV_COLOR", "1") != "0" and sys.stderr.isatty()


def _fail(message: str, code: int) -> int:
    prefix = "\x1b[31merror:\x1b[0m" if _color_enabled() else "error:"
    print(f"{prefix} {message}", file=sys.stderr)
    return code


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _load_grammar(path: str) -> Grammar:
    return interchange.deserialize(_read_text(path))


def _load_notation(path: str) -> notation.NotationSpec:
    return notation.parse_spec(_read_text(path))


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def cmd_recover(args) -> int:
    spec = _load_notation(args.notation)
    report = recovery.recover(_read_text(args.text), spec)
    for line, message in report.warnings:
        print(f"{args.text}:{line}: warning: {message}", file=sys.stderr)
    if args.verbose:
        for event in report.heuristics:
            print(f"{args.text}:{event.line}: heuristic {event.name}: {event.detail}",
                  file=sys.stderr)
    _write_text(args.out, interchange.serialize(report.grammar))
    if args.report:
        _write_text(args.report, _dump_json({
            "warnings": [{"line": line, "message": message}
                         for line, message in report.warnings],
            "heuristics": [{"line": event.line, "name": event.name,
                            "detail": event.detail}
                           for event in report.heuristics],
        }))
    return 0


def cmd_unparse(args) -> int:
    spec = _load_notation(args.notation)
    text = recovery.unparse(_load_grammar(args.grammar), spec)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _parse_mutation(text: str) -> Mutation:
    kind, _, raw = text.partition(":")
    if kind not in MUTATION_KINDS:
        raise MutationError(f"unknown mutation kind {kind!r}")
    params: dict = {}
    if kind == "disciplined-rename":
        if not raw:
            raise MutationError("disciplined-rename needs a convention, "
                                "e.g. disciplined-rename:lower")
        params["convention"] = raw
    elif kind == "extract-subgrammar":
        if not raw:
            raise MutationError("extract-subgrammar needs root names, "
                                "e.g. extract-subgrammar:expr,stmt")
        params["roots"] = [name.strip() for name in raw.split(",") if name.strip()]
    elif raw:
        raise MutationError(f"mutation {kind!r} takes no argument")
    return Mutation(kind, params)


def cmd_mutate(args) -> int:
    mutation = _parse_mutation(args.mutation)
    result = mutate(_load_grammar(args.grammar), mutation)
    _write_text(args.out, interchange.serialize(result.grammar))
    _write_text(args.out + ".trace", _dump_json(script_to_json(result.trace)))
    print(f"{mutation.kind}: {result.changed_count} change(s)", file=sys.stderr)
    return 0


def cmd_transform(args) -> int:
    steps = script_from_json(json.loads(_read_text(args.script)))
    result = apply_script(_load_grammar(args.grammar), steps)
    _write_text(args.out, interchange.serialize(result))
    _write_text(args.out + ".trace", _dump_json(script_to_json(steps)))
    return 0


def cmd_prodsig(args) -> int:
    print(cv.render_prodsig_table(_load_grammar(args.grammar)))
    return 0


def cmd_metrics(args) -> int:
    metrics = cv.sig_metrics(_load_grammar(args.grammar))
    print(f"productions: {metrics.productions}")
    print(f"distinct footprints: {metrics.distinct_footprints}")
    for fp, count in metrics.footprint_histogram.items():
        print(f"footprint {fp}: {count}")
    shown = " ".join(f"{lhs}={size}" for lhs, size in metrics.signature_sizes)
    print(f"signature sizes: {shown}".rstrip())
    return 0


def cmd_converge(args) -> int:
    master = _load_grammar(args.master)
    servant = _load_grammar(args.servant)

    observer = None
    if args.verbose:
        def observer(phase: str, g: Grammar) -> None:
            print(f"--- {phase} ---", file=sys.stderr)
            sys.stderr.write(interchange.serialize(g))

    report = cv.guided_converge(master, servant, observer=observer)
    for message in report.warnings:
        print(f"warning: {message}", file=sys.stderr)
    sys.stdout.write(cv.render_match_report(report))
    if args.report:
        _write_text(args.report, _dump_json(cv.report_to_json(report)))
    return RESIDUE if report.residue else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramconv",
        description="Recover, transform, mutate and converge grammars.")
    sub = parser.add_subparsers(dest="command", required=True)

    cmd = sub.add_parser("recover", help="parse grammar text in an EBNF dialect")
    cmd.add_argument("text", help="grammar text file")
    cmd.add_argument("--notation", required=True, help="notation spec (.edd)")
    cmd.add_argument("--out", required=True, help="output grammar file")
    cmd.add_argument("--report", help="warning/heuristic report file")
    cmd.add_argument("-v", dest="verbose", action="store_true")
    cmd.set_defaults(run=cmd_recover)

    cmd = sub.add_parser("unparse", help="render a grammar in an EBNF dialect")
    cmd.add_argument("grammar")
    cmd.add_argument("--notation", required=True)
    cmd.add_argument("--out")
    cmd.set_defaults(run=cmd_unparse)

    cmd = sub.add_parser("mutate", help="apply a grammar mutation")
    cmd.add_argument("grammar")
    cmd.add_argument("--mutation", required=True,
                     help="kind[:args], e.g. normalize-anf or disciplined-rename:lower")
    cmd.add_argument("--out", required=True)
    cmd.set_defaults(run=cmd_mutate)

    cmd = sub.add_parser("transform", help="apply a transformation script")
    cmd.add_argument("grammar")
    cmd.add_argument("--script", required=True, help="JSON list of steps")
    cmd.add_argument("--out", required=True)
    cmd.set_defaults(run=cmd_transform)

    cmd = sub.add_parser("prodsig", help="print production rules with signatures")
    cmd.add_argument("grammar")
    cmd.set_defaults(run=cmd_prodsig)

    cmd = sub.add_parser("metrics", help="print signature statistics")
    cmd.add_argument("grammar")
    cmd.set_defaults(run=cmd_metrics)

    cmd = sub.add_parser("converge", help="converge a servant grammar onto a master")
    cmd.add_argument("master")
    cmd.add_argument("servant")
    cmd.add_argument("--report", help="write the match report as JSON")
    cmd.add_argument("-v", dest="verbose", action="store_true",
                     help="dump intermediate grammars of the convergence phases")
    cmd.set_defaults(run=cmd_converge)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except FileNotFoundError as exc:
        return _fail(f"cannot open {exc.filename}", USAGE_ERROR)
    except IsADirectoryError as exc:
        return _fail(f"{exc.filename} is a directory", USAGE_ERROR)
    except json.JSONDecodeError as exc:
        return _fail(f"malformed JSON: {exc}", DOMAIN_ERROR)
    except (recovery.RecoveryError, recovery.UnparseError, notation.NotationError,
            interchange.InterchangeError, MutationError, ScriptError,
            TransformError, cv.ResolutionError, cv.MatchError,
            ValueError) as exc:
        return _fail(str(exc), DOMAIN_ERROR)


if __name__ == "__main__":
    sys.exit(main())
