"""Command-line entry point: serve the app, generate fixtures, or run
ad-hoc offline queries for debugging."""
from __future__ import annotations

import argparse
import json
import sys

from .config import ServiceConfig, load_config


def _cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app

    config = load_config()
    if args.mode:
        config = _with(config, mode=args.mode)
    if args.fixture:
        config = _with(config, fixture_path=args.fixture)
    if args.script:
        config = _with(config, script_path=args.script)
    if args.static:
        config = _with(config, static_dir=args.static)
    app = create_app(config)
    uvicorn.run(app, host=args.host or config.host, port=args.port or config.port)
    return 0


def _with(config: ServiceConfig, **changes) -> ServiceConfig:
    import dataclasses
    return dataclasses.replace(config, **changes)


def _cmd_fixture_gen(args) -> int:
    from .clients.fixtures import generate_fixture, save_fixture

    store = generate_fixture(seed=args.seed, count=args.count)
    save_fixture(store, args.out)
    print(f"wrote {len(store.records)} records, {len(store.name_table)} name pairs, "
          f"{len(store.places)} places to {args.out}")
    return 0


def _cmd_query(args) -> int:
    from .clients.fixtures import load_fixture
    from .clients.offline import OfflineOccurrenceClient
    from .filters import make_query, parse_clause
    from .orchestrator import facets_payload, summarize_record

    store = load_fixture(args.fixture)
    clauses = [parse_clause(text) for text in args.fq]
    query = make_query(clauses, page_size=args.page_size,
                       facet_fields=tuple(args.facets.split(",")) if args.facets else ())
    response = OfflineOccurrenceClient(store).search_occurrences(query)
    out = {
        "total_records": response.total_records,
        "specimens": [summarize_record(r) for r in response.records],
        "facets": facets_payload(response.facets),
    }
    json.dump(out, sys.stdout, indent=2, ensure_ascii=False)
    print()
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="collection-explorer",
        description="Specimen-collection explorer service")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--mode", choices=("offline", "live"), default=None)
    serve.add_argument("--fixture", help="fixture directory for offline mode")
    serve.add_argument("--script", help="chat script file for offline demos")
    serve.add_argument("--static", help="directory with the built web UI")
    serve.set_defaults(func=_cmd_serve)

    gen = sub.add_parser("fixture-gen", help="generate the offline dataset")
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--count", type=int, default=5000)
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=_cmd_fixture_gen)

    query = sub.add_parser("query", help="run one offline query and print results")
    query.add_argument("--fixture", required=True)
    query.add_argument("--fq", action="append", default=[],
                       help="filter clause, e.g. 'stateProvince:\"Queensland\"'")
    query.add_argument("--page-size", type=int, default=10)
    query.add_argument("--facets", default="",
                       help="comma-separated facet fields")
    query.set_defaults(func=_cmd_query)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
