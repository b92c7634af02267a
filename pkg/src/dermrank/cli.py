"""Command line front end: validate, rank, generate, check, serve.

Exit codes are a stable contract: 0 success, 1 validation errors found,
2 usage or I/O error, 3 engine/oracle disagreement.  Diagnostics and ranking
output go to stdout as JSON (one JSON-lines object per diagnostic); human
notes go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from enum import IntEnum
from pathlib import Path

from dermrank.engine import RankingConfig, rank_all, ranking_to_documents, select_diagnoses
from dermrank.kb.model import (
    CaseParseError,
    KbParseError,
    KnowledgeBase,
    NoSignalError,
    TemplateError,
)
from dermrank.kb.parse import dump_diagnostics, dump_kb, parse_case, parse_kb, parse_template
from dermrank.kb.synth import (
    default_category_template,
    full_scale_template,
    generate_synthetic_case,
    generate_synthetic_kb,
)
from dermrank.kb.validate import has_errors, validate_kb
from dermrank.oracle import (
    LengthMismatchError,
    OracleUnderflowError,
    compare_orderings,
    oracle_rank_all,
)

KB_ENV_VAR = "DERMRANK_KB"


class ExitStatus(IntEnum):
    OK = 0
    INVALID = 1
    USAGE = 2
    DISAGREEMENT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dermrank",
        description="Rank candidate skin diseases against observed symptoms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="check a knowledge-base document")
    _add_kb_path(validate)

    rank = sub.add_parser("rank", help="rank diseases for a patient case")
    _add_kb_path(rank)
    rank.add_argument("case_path", help="patient case document (JSON)")
    rank.add_argument("--top", type=int, default=None, help="maximum number of diagnoses")
    rank.add_argument("--similarity-threshold", type=float, default=None, help="log-domain similarity cutoff")
    rank.add_argument("--rank-threshold", type=float, default=None, help="log-domain rank cutoff")
    rank.add_argument(
        "--weight",
        action="append",
        default=[],
        metavar="CATEGORY=W",
        help="per-category weight override (repeatable)",
    )
    rank.add_argument("--show-scores", action="store_true", help="include log score fields in the output")
    rank.add_argument("--text", action="store_true", help="aligned text output instead of JSON")

    generate = sub.add_parser("generate", help="write a synthetic knowledge base")
    generate.add_argument("--n", type=int, required=True, help="number of diseases")
    generate.add_argument("--seed", type=int, default=0, help="generator seed")
    generate.add_argument("--template", default=None, help="category template document (JSON)")
    generate.add_argument(
        "--full-scale",
        action="store_true",
        help="use the built-in 133-symptom template instead of the compact one",
    )
    generate.add_argument("--out", required=True, help="output path, or '-' for stdout")

    check = sub.add_parser("check", help="cross-check the engine against the linear reference")
    _add_kb_path(check)
    check.add_argument("--cases", type=int, default=100, help="number of synthetic cases")
    check.add_argument("--seed", type=int, default=0, help="base seed for case generation")
    check.add_argument("--noise", type=float, default=0.25, help="case noise level in [0,1]")
    check.add_argument(
        "--max-categories",
        type=int,
        default=12,
        help="cap on observed categories per case (keeps the reference in range)",
    )

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--kb", default=None, help=f"knowledge base path (default: ${KB_ENV_VAR})")
    serve.add_argument("--listen", default="127.0.0.1:8000", metavar="HOST:PORT")
    serve.add_argument("--expose-scores", action="store_true", help="include log scores in responses")
    serve.add_argument("--static-dir", default=None, help="directory with the built UI bundle")

    return parser


def _add_kb_path(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "kb_path",
        nargs="?",
        default=None,
        help=f"knowledge base document (default: ${KB_ENV_VAR})",
    )


def _resolve_kb_path(path: str | None) -> str | None:
    return path if path is not None else os.environ.get(KB_ENV_VAR)


def _read_file(path: str) -> bytes | None:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        print(f"dermrank: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
        return None


def _load_kb(path: str | None) -> KnowledgeBase | int:
    if path is None:
        print(f"dermrank: no knowledge base given (argument or ${KB_ENV_VAR})", file=sys.stderr)
        return int(ExitStatus.USAGE)
    raw = _read_file(path)
    if raw is None:
        return int(ExitStatus.USAGE)
    try:
        return parse_kb(raw)
    except KbParseError as exc:
        sys.stdout.write(dump_diagnostics(exc.diagnostics))
        return int(ExitStatus.INVALID)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else int(ExitStatus.USAGE)

    handlers = {
        "validate": _cmd_validate,
        "rank": _cmd_rank,
        "generate": _cmd_generate,
        "check": _cmd_check,
        "serve": _cmd_serve,
    }
    return handlers[args.command](args)


def entry() -> None:
    raise SystemExit(main())


def _cmd_validate(args: argparse.Namespace) -> int:
    path = _resolve_kb_path(args.kb_path)
    if path is None:
        print(f"dermrank: no knowledge base given (argument or ${KB_ENV_VAR})", file=sys.stderr)
        return int(ExitStatus.USAGE)
    raw = _read_file(path)
    if raw is None:
        return int(ExitStatus.USAGE)
    try:
        kb = parse_kb(raw)
    except KbParseError as exc:
        sys.stdout.write(dump_diagnostics(exc.diagnostics))
        return int(ExitStatus.INVALID)
    findings = validate_kb(kb)
    sys.stdout.write(dump_diagnostics(findings))
    return int(ExitStatus.INVALID) if has_errors(findings) else int(ExitStatus.OK)


def _parse_weights(specs: list[str], kb: KnowledgeBase) -> dict[str, float] | None:
    weights: dict[str, float] = {}
    known = {c.id for c in kb.categories}
    for spec in specs:
        category_id, sep, value = spec.partition("=")
        if not sep:
            print(f"dermrank: --weight expects CATEGORY=W, got {spec!r}", file=sys.stderr)
            return None
        if category_id not in known:
            print(f"dermrank: unknown category {category_id!r} in --weight", file=sys.stderr)
            return None
        try:
            weights[category_id] = float(value)
        except ValueError:
            print(f"dermrank: weight for {category_id!r} is not a number: {value!r}", file=sys.stderr)
            return None
    return weights


def _cmd_rank(args: argparse.Namespace) -> int:
    kb = _load_kb(_resolve_kb_path(args.kb_path))
    if isinstance(kb, int):
        return kb
    raw = _read_file(args.case_path)
    if raw is None:
        return int(ExitStatus.USAGE)
    try:
        case = parse_case(raw, kb)
    except CaseParseError as exc:
        sys.stdout.write(dump_diagnostics(exc.diagnostics))
        return int(ExitStatus.INVALID)

    weights = _parse_weights(args.weight, kb)
    if weights is None:
        return int(ExitStatus.USAGE)
    defaults = RankingConfig()
    try:
        config = RankingConfig(
            category_weights=weights,
            similarity_threshold=(
                args.similarity_threshold
                if args.similarity_threshold is not None
                else defaults.similarity_threshold
            ),
            rank_threshold=(
                args.rank_threshold if args.rank_threshold is not None else defaults.rank_threshold
            ),
            max_results=args.top if args.top is not None else defaults.max_results,
        )
    except ValueError as exc:
        print(f"dermrank: {exc}", file=sys.stderr)
        return int(ExitStatus.USAGE)

    diagnoses = select_diagnoses(rank_all(kb, case, config), config)
    documents = ranking_to_documents(kb, diagnoses, include_scores=args.show_scores)
    if args.text:
        names = {d.id: d.name for d in kb.diseases}
        width = max((len(r.disease) for r in diagnoses), default=2)
        for position, r in enumerate(diagnoses, start=1):
            marker = " !" if r.severe else ""
            scores = (
                f"  sim={r.log_similarity:.6f} rank={r.log_rank:.6f}" if args.show_scores else ""
            )
            print(f"{position:3d}  {r.disease:<{width}}  {names[r.disease]}{scores}{marker}")
    else:
        sys.stdout.write(json.dumps(documents, indent=2, ensure_ascii=False) + "\n")
    return int(ExitStatus.OK)


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.n < 1:
        print("dermrank: --n must be at least 1", file=sys.stderr)
        return int(ExitStatus.USAGE)
    if args.template is not None and args.full_scale:
        print("dermrank: --template and --full-scale are mutually exclusive", file=sys.stderr)
        return int(ExitStatus.USAGE)

    if args.template is not None:
        raw = _read_file(args.template)
        if raw is None:
            return int(ExitStatus.USAGE)
        try:
            template = parse_template(raw)
        except TemplateError as exc:
            sys.stdout.write(dump_diagnostics(exc.diagnostics))
            return int(ExitStatus.INVALID)
    elif args.full_scale:
        template = full_scale_template()
    else:
        template = default_category_template()

    kb = generate_synthetic_kb(args.n, template, seed=args.seed)
    text = dump_kb(kb)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"dermrank: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
            return int(ExitStatus.USAGE)
    return int(ExitStatus.OK)


def _cmd_check(args: argparse.Namespace) -> int:
    if args.cases < 1:
        print("dermrank: --cases must be at least 1", file=sys.stderr)
        return int(ExitStatus.USAGE)
    kb = _load_kb(_resolve_kb_path(args.kb_path))
    if isinstance(kb, int):
        return kb

    disagreements = 0
    max_error = 0.0
    first_failure: dict | None = None
    for i in range(args.cases):
        case = None
        target_index = i
        for _ in range(len(kb.diseases)):
            target = kb.diseases[target_index % len(kb.diseases)].id
            try:
                case = generate_synthetic_case(
                    kb, target, noise=args.noise, seed=args.seed + i,
                    max_categories=args.max_categories,
                )
                break
            except NoSignalError:
                target_index += 1
        if case is None:
            print("dermrank: no disease in this knowledge base has a 'yes' symptom", file=sys.stderr)
            return int(ExitStatus.USAGE)

        engine_output = rank_all(kb, case)
        try:
            oracle_output = oracle_rank_all(kb, case)
            report = compare_orderings(engine_output, oracle_output)
        except OracleUnderflowError as exc:
            print(
                f"dermrank: linear reference underflowed ({exc}); "
                "reduce --max-categories or use a smaller knowledge base",
                file=sys.stderr,
            )
            return int(ExitStatus.USAGE)
        except LengthMismatchError as exc:
            report = None
            disagreements += 1
            if first_failure is None:
                first_failure = {"case": i, "reason": str(exc)}
        if report is not None:
            max_error = max(max_error, report.max_relative_value_error)
            if not report.agree:
                disagreements += 1
                if first_failure is None:
                    position, engine_id, oracle_id = report.first_divergence
                    first_failure = {
                        "case": i,
                        "position": position,
                        "engine": engine_id,
                        "oracle": oracle_id,
                    }

    summary = {
        "cases": args.cases,
        "agreements": args.cases - disagreements,
        "disagreements": disagreements,
        "max_relative_value_error": max_error,
    }
    if first_failure is not None:
        summary["first_disagreement"] = first_failure
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return int(ExitStatus.DISAGREEMENT) if disagreements else int(ExitStatus.OK)


def _cmd_serve(args: argparse.Namespace) -> int:
    path = _resolve_kb_path(args.kb)
    if path is None:
        print(f"dermrank: no knowledge base given (--kb or ${KB_ENV_VAR})", file=sys.stderr)
        return int(ExitStatus.USAGE)
    raw = _read_file(path)
    if raw is None:
        return int(ExitStatus.USAGE)
    try:
        kb = parse_kb(raw)
    except KbParseError as exc:
        sys.stdout.write(dump_diagnostics(exc.diagnostics))
        print("dermrank: refusing to serve an invalid knowledge base", file=sys.stderr)
        return int(ExitStatus.USAGE)

    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"dermrank: --listen expects HOST:PORT, got {args.listen!r}", file=sys.stderr)
        return int(ExitStatus.USAGE)
    port = int(port_text)

    import socket

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        print(f"dermrank: cannot bind {args.listen}: {exc.strerror or exc}", file=sys.stderr)
        return int(ExitStatus.USAGE)
    finally:
        probe.close()

    from dermrank.service import ServiceState, create_app, install_reload_handler

    state = ServiceState(kb=kb, kb_path=path, expose_scores=args.expose_scores)
    app = create_app(state, static_dir=args.static_dir)
    install_reload_handler(state)

    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")
    return int(ExitStatus.OK)


if __name__ == "__main__":
    entry()
