"""Command-line surface: simulate, analyze, diff, callgraph, export.

Reports go to standard output (or ``-o``); diagnostics go to standard
error, so pipelines compose.  Exit status 0 means no error; argparse
usage errors exit 2; everything else exits 1 with a message.
"""

from __future__ import annotations

import argparse
import sys

from . import cct, report, snapshot, workload
from .components import (component_utilization, default_hr_catalog,
                         load_catalog_file)
from .filters import (ATTRIBUTE_TO_PARENT, DROP_SUBTREE, FilterSet,
                      apply_filter, apply_filter_forest)
from .metrics import hotspots, total_time_table
from .trace import TraceError, events_to_jsonl, iter_trace

_FILTER_MODES = {"attribute": ATTRIBUTE_TO_PARENT, "drop": DROP_SUBTREE}


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _write_output(text: str, path: str | None) -> None:
    if text and not text.endswith("\n"):
        text += "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _filter_set(args) -> FilterSet:
    return FilterSet.from_patterns(includes=args.include or (),
                                   excludes=args.exclude or ())


def _catalog(args):
    if getattr(args, "catalog", None):
        return load_catalog_file(args.catalog)
    return default_hr_catalog()


def _add_filter_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--include", action="append", metavar="PATTERN",
                   help="keep only methods matching PATTERN (repeatable; trailing * = prefix)")
    p.add_argument("--exclude", action="append", metavar="PATTERN",
                   help="reject methods matching PATTERN (repeatable)")
    p.add_argument("--filter-mode", choices=sorted(_FILTER_MODES), default="attribute",
                   help="attribute: splice filtered frames into parents; drop: remove subtrees")


def _build_forest_from_file(path: str, lenient: bool) -> cct.CctForest:
    with open(path, "r", encoding="utf-8") as fh:
        return cct.build_forest(iter_trace(fh), lenient=lenient,
                                warn=_warn if lenient else None)


def cmd_simulate(args) -> int:
    if bool(args.preset) == bool(args.spec):
        raise ValueError("exactly one of --preset or --spec is required")
    if args.preset:
        maker = workload.PRESETS.get(args.preset)
        if maker is None:
            known = ", ".join(sorted(workload.PRESETS))
            raise ValueError(f"unknown preset {args.preset!r} (known: {known})")
        spec = maker()
    else:
        spec = workload.load_workload_spec_file(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    text = workload.simulate(spec)
    events = sum(1 for line in text.splitlines() if line and not line.startswith("#"))
    digest = snapshot.trace_digest(text.encode("utf-8"))
    _write_output(text, args.output)
    summary = f"events={events} sha256={digest}"
    if args.output in (None, "-"):
        print(summary, file=sys.stderr)
    else:
        print(summary)
    return 0


def _analysis_tables(root, catalog) -> report.AnalysisTables:
    hot = hotspots(root)
    return report.AnalysisTables(
        hot_spots=hot,
        total_time=total_time_table(root),
        components=component_utilization(hot, catalog),
    )


def cmd_analyze(args) -> int:
    catalog = _catalog(args)
    filter_set = _filter_set(args)
    mode = _FILTER_MODES[args.filter_mode]
    if args.snapshot_out:
        # snapshot wants the raw bytes for its provenance digest
        with open(args.trace, "rb") as fh:
            data = fh.read()
        snap = snapshot.take_snapshot(
            label=args.label or args.trace,
            user_count=args.user_count,
            trace_bytes=data,
            filter_set=filter_set,
            catalog=catalog,
            filter_mode=mode,
            lenient=args.lenient,
        )
        snapshot.save_snapshot(snap, args.snapshot_out)
        print(f"snapshot written to {args.snapshot_out}", file=sys.stderr)
        forest = cct.build_forest(iter_trace(data.decode("utf-8").splitlines()),
                                  lenient=args.lenient,
                                  warn=_warn if args.lenient else None)
    else:
        forest = _build_forest_from_file(args.trace, args.lenient)
    if args.per_thread:
        if not filter_set.is_identity():
            forest = apply_filter_forest(forest, filter_set, mode)
        sections = {
            f"thread {tid}": _analysis_tables(forest.roots[tid], catalog)
            for tid in forest.tids()
        }
        if not sections:
            sections = {"merged": _analysis_tables(forest.merged(), catalog)}
    else:
        merged = forest.merged()
        if not filter_set.is_identity():
            merged = apply_filter(merged, filter_set, mode)
        sections = {"merged": _analysis_tables(merged, catalog)}
    _write_output(report.render_analysis(sections, args.format), args.output)
    return 0


def cmd_diff(args) -> int:
    snap_a = snapshot.load_snapshot_file(args.snapshot_a)
    snap_b = snapshot.load_snapshot_file(args.snapshot_b)
    rows = snapshot.diff(snap_a, snap_b)
    _write_output(report.render_diff(rows, snap_a, snap_b, args.format), args.output)
    return 0


def cmd_callgraph(args) -> int:
    forest = _build_forest_from_file(args.trace, args.lenient)
    merged = forest.merged()
    filter_set = _filter_set(args)
    if not filter_set.is_identity():
        merged = apply_filter(merged, filter_set, _FILTER_MODES[args.filter_mode])
    if args.format == "edges":
        text = report.render_edges(cct.project_call_graph(merged))
    else:
        text = "\n".join(cct.folded_stacks(merged))
    _write_output(text, args.output)
    return 0


def cmd_export(args) -> int:
    if args.format == "jsonl":
        # stream events straight through without building a tree
        with open(args.trace, "r", encoding="utf-8") as fh:
            text = "\n".join(events_to_jsonl(iter_trace(fh)))
        _write_output(text, args.output)
        return 0
    forest = _build_forest_from_file(args.trace, args.lenient)
    if args.format == "forest":
        text = cct.serialize_forest(forest)
    elif args.format == "cct":
        text = cct.serialize_cct(forest.merged())
    else:  # folded
        text = "\n".join(cct.folded_stacks(forest.merged()))
    _write_output(text, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cct-lens",
        description="Calling-context-tree toolkit: simulate workloads, analyze "
                    "enter/exit traces, diff load-level snapshots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a deterministic synthetic trace")
    p.add_argument("--preset", help="built-in workload name (e.g. figure8)")
    p.add_argument("--spec", help="workload spec file (JSON)")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("-o", "--output", help="trace file (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="hot-spot, total-time, and component tables")
    p.add_argument("trace", help="trace file")
    p.add_argument("--format", choices=report.REPORT_FORMATS, default="text")
    _add_filter_flags(p)
    p.add_argument("--catalog", help="component catalog file (default: built-in HR catalog)")
    p.add_argument("--per-thread", action="store_true",
                   help="one report section per thread instead of the merged view")
    p.add_argument("--lenient", action="store_true",
                   help="repair defective traces instead of aborting")
    p.add_argument("--snapshot-out", metavar="FILE", help="persist the analysis as a snapshot")
    p.add_argument("--label", help="snapshot label (default: trace path)")
    p.add_argument("--user-count", type=int, default=0, help="snapshot load-level metadata")
    p.add_argument("-o", "--output", help="report file (default: stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("diff", help="compare two snapshots per method")
    p.add_argument("snapshot_a", help="baseline snapshot file")
    p.add_argument("snapshot_b", help="comparison snapshot file")
    p.add_argument("--format", choices=report.REPORT_FORMATS, default="text")
    p.add_argument("-o", "--output", help="report file (default: stdout)")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("callgraph", help="project the trace to a call graph")
    p.add_argument("trace", help="trace file")
    p.add_argument("--format", choices=("edges", "folded"), default="edges")
    _add_filter_flags(p)
    p.add_argument("--lenient", action="store_true")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_callgraph)

    p = sub.add_parser("export", help="convert a trace to other representations")
    p.add_argument("trace", help="trace file")
    p.add_argument("--format", choices=("cct", "forest", "folded", "jsonl"), default="cct")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TraceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
