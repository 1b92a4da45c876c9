"""Batch entry point: ingest corpora, analyze models, diff surfaces, serve.

Machine-parseable results go to stdout; diagnostics and summaries go to
stderr. Exit codes: 0 success (or empty diff), 1 input error, 2 usage
error, 3 non-empty diff.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis as analysis_mod
from .corpus import (
    build_corpus,
    dump_snapshot,
    load_snapshot,
    parse_attack_patterns,
    parse_vulnerabilities,
    parse_weaknesses,
)
from .errors import WorkbenchError
from .model import parse_model
from .retrieval import (
    AssociationConfig,
    associate,
    build_index,
    surface_from_json,
    surface_to_json,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threatscope",
        description="Associate attack vector corpora to architectural system models.")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="normalize corpora into a snapshot")
    ingest.add_argument("--capec", help="attack pattern catalog (XML)")
    ingest.add_argument("--cwe", help="weakness catalog (XML)")
    ingest.add_argument("--cve", help="vulnerability feed (JSON)")
    ingest.add_argument("--out", required=True, help="snapshot output path")

    analyze = sub.add_parser("analyze", help="compute the attack surface of a model")
    analyze.add_argument("--model", required=True, help="GraphML model file")
    analyze.add_argument("--corpus", required=True, help="corpus snapshot file")
    analyze.add_argument("--config", help="association config JSON file")
    analyze.add_argument("--format", choices=("csv", "json"), default="csv")
    analyze.add_argument("--surface-out", help="also write the full surface as JSON")

    diff = sub.add_parser("diff", help="compare two saved surfaces")
    diff.add_argument("--before", required=True)
    diff.add_argument("--after", required=True)
    diff.add_argument("--format", choices=("text", "json"), default="text")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--listen", default="127.0.0.1:8080", help="host:port")
    serve.add_argument("--corpus", required=True, help="corpus snapshot to preload")
    serve.add_argument("--persist", help="write-through directory for models/analyses")
    return parser


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_ingest(args) -> int:
    if not (args.capec or args.cwe or args.cve):
        print("usage error: ingest requires at least one of --capec/--cwe/--cve",
              file=sys.stderr)
        return 2
    warnings: list[str] = []
    docs = []
    if args.capec:
        docs.extend(parse_attack_patterns(_read(args.capec), warnings=warnings))
    if args.cwe:
        docs.extend(parse_weaknesses(_read(args.cwe), warnings=warnings))
    if args.cve:
        docs.extend(parse_vulnerabilities(_read(args.cve), warnings=warnings))
    corpus = build_corpus(docs, warnings=warnings)
    Path(args.out).write_text(dump_snapshot(corpus), encoding="utf-8")
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {len(corpus)} documents to {args.out} "
          f"({len(corpus.dangling_refs)} dangling refs, build stamp "
          f"{corpus.build_stamp})", file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    corpus = load_snapshot(_read(args.corpus))
    model = parse_model(_read(args.model))
    config = AssociationConfig.from_json(
        json.loads(_read(args.config)) if args.config else None)
    index = build_index(corpus)
    surface = associate(model, index, corpus, config)
    report = analysis_mod.exposure_report(surface)
    if args.surface_out:
        Path(args.surface_out).write_text(
            json.dumps(surface_to_json(surface), indent=2) + "\n", encoding="utf-8")
    if args.format == "csv":
        sys.stdout.write(report.to_csv())
    else:
        sys.stdout.write(json.dumps(report.to_json(), indent=2) + "\n")
    return 0


def cmd_diff(args) -> int:
    before = surface_from_json(json.loads(_read(args.before)))
    after = surface_from_json(json.loads(_read(args.after)))
    diff = analysis_mod.compare_surfaces(before, after)
    if args.format == "json":
        sys.stdout.write(json.dumps(diff.to_json(), indent=2) + "\n")
    else:
        for (entity, key), delta in sorted(diff.per_attribute.items()):
            terms = [f"+{d}" for d in delta.added] + [f"-{d}" for d in delta.removed]
            print(f"attribute {entity}/{key}: {' '.join(terms)}")
        for entity, value in sorted(diff.per_component.items()):
            print(f"component {entity}: {value:+d}")
        print(f"net {diff.net_delta:+d}")
    if diff.empty:
        print("surfaces are identical", file=sys.stderr)
        return 0
    return 3


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionState, create_app

    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"error: --listen must be host:port, got {args.listen!r}", file=sys.stderr)
        return 2
    state = SessionState(persist_dir=args.persist)
    summary = state.load_corpus(_read(args.corpus))
    print(f"loaded corpus: {summary['doc_count']} documents "
          f"(stamp {summary['build_stamp']})", file=sys.stderr)
    app = create_app(state)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"error: failed to serve on {args.listen}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"ingest": cmd_ingest, "analyze": cmd_analyze,
                "diff": cmd_diff, "serve": cmd_serve}
    try:
        return handlers[args.command](args)
    except WorkbenchError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        if exc.code == "INVALID_MODEL":
            for item in exc.detail or ():
                print(f"  {item['code']}: {item['message']}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
