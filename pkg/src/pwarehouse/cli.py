"""The ``pw`` command line: serve, ingest, golden regeneration, view purge."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .catalog import WarehouseCatalog
from .errors import WarehouseError
from .metadata import MetadataStore
from .views import ViewMode


def _cmd_init(args: argparse.Namespace) -> int:
    catalog = WarehouseCatalog(Path(args.data_dir))
    if catalog.is_initialized() and not args.force:
        print(f"warehouse already initialized under {catalog.dir}", file=sys.stderr)
        return 1
    schema_text = Path(args.schema).read_text(encoding="utf-8")
    catalog.initialize(schema_text)
    print(f"initialized warehouse under {catalog.dir}")
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    catalog = WarehouseCatalog(Path(args.data_dir))
    ds = catalog.load()
    csv_content = Path(args.csv).read_text(encoding="utf-8")
    count = catalog.apply_ingest(ds, args.table, csv_content)
    store = MetadataStore(Path(args.data_dir))
    flagged = store.mark_stale(ds.ingest_generation)
    print(
        f"ingested {count} rows into {args.table} "
        f"(generation {ds.ingest_generation}, {flagged} views now stale)"
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Path(args.data_dir), ViewMode(args.view_mode))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_oracle_run(args: argparse.Namespace) -> int:
    from .corpus import write_goldens

    written = write_goldens(Path(args.golden_dir), count=args.count)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_purge_views(args: argparse.Namespace) -> int:
    store = MetadataStore(Path(args.data_dir))
    count = store.purge_views(owner=args.owner)
    print(f"purged {count} stored views")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pw", description="personalized warehouse service and tooling"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_init = sub.add_parser("init", help="create a warehouse directory from a schema file")
    p_init.add_argument("--data-dir", required=True)
    p_init.add_argument("--schema", required=True)
    p_init.add_argument("--force", action="store_true")
    p_init.set_defaults(func=_cmd_init)

    p_ingest = sub.add_parser("ingest", help="append a CSV batch to a table")
    p_ingest.add_argument("--data-dir", required=True)
    p_ingest.add_argument("--table", required=True)
    p_ingest.add_argument("--csv", required=True, help="path to the CSV file")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--data-dir", required=True)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--view-mode", choices=["full", "ids"], default="ids")
    p_serve.set_defaults(func=_cmd_serve)

    p_oracle = sub.add_parser(
        "oracle-run", help="regenerate golden files from the reference oracle"
    )
    p_oracle.add_argument("--golden-dir", default="tests/golden")
    p_oracle.add_argument("--count", type=int, default=None)
    p_oracle.set_defaults(func=_cmd_oracle_run)

    p_purge = sub.add_parser("purge-views", help="delete stored view envelopes")
    p_purge.add_argument("--data-dir", required=True)
    p_purge.add_argument("--owner", default=None)
    p_purge.set_defaults(func=_cmd_purge_views)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "oracle-run" and args.count is None:
        from .corpus import DEFAULT_CASE_COUNT

        args.count = DEFAULT_CASE_COUNT
    try:
        return args.func(args)
    except WarehouseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
