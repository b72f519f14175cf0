"""Dynamic call trace format: one method enter/exit event per line.

The on-disk format is UTF-8 text, tab separated, four fields per line::

    <ts> TAB <tid> TAB <E|X> TAB <method>

``ts`` is integer nanoseconds on a monotonic clock with an arbitrary
per-run origin, ``tid`` is a non-negative thread id, ``E``/``X`` marks
method enter/exit, and ``method`` is a fully qualified method name that
contains no whitespace.  Lines starting with ``#`` are comments; blank
lines are ignored.  Per thread, timestamps must be non-decreasing and
enters/exits must nest like a stack.

A JSON-lines rendering with keys ``ts``/``tid``/``ev``/``m`` is supported
as an interchange convenience; the tab-separated form is canonical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, NamedTuple

ENTER = "E"
EXIT = "X"


class TraceError(ValueError):
    """Base class for trace format and trace structure problems."""


class TraceParseError(TraceError):
    """A line that does not conform to the trace grammar."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TraceStructureError(TraceError):
    """A structurally broken trace: bad nesting or timestamp regression.

    Raised only in strict mode; lenient consumers repair or drop the
    offending events instead.
    """

    def __init__(self, message: str, tid: int | None = None, lineno: int | None = None):
        self.tid = tid
        self.lineno = lineno
        where = []
        if tid is not None:
            where.append(f"tid {tid}")
        if lineno is not None:
            where.append(f"line {lineno}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class TraceEvent(NamedTuple):
    ts: int
    tid: int
    kind: str  # ENTER or EXIT
    method: str


def _check_method(method: str, lineno: int | None) -> None:
    if not method:
        raise TraceParseError("empty method name", lineno)
    if " " in method or "\t" in method or "\n" in method:
        raise TraceParseError(f"method name contains whitespace: {method!r}", lineno)


def parse_trace_line(line: str, lineno: int | None = None) -> TraceEvent | None:
    """Parse one line of canonical trace text.

    Returns None for blank lines and ``#`` comments.  Raises
    TraceParseError on malformed input, naming the offending line.
    """
    line = line.rstrip()
    if not line or line.startswith("#"):
        return None
    parts = line.split("\t")
    if len(parts) != 4:
        raise TraceParseError(f"expected 4 tab-separated fields, got {len(parts)}", lineno)
    raw_ts, raw_tid, kind, method = parts
    try:
        ts = int(raw_ts)
    except ValueError:
        raise TraceParseError(f"bad timestamp {raw_ts!r}", lineno) from None
    try:
        tid = int(raw_tid)
    except ValueError:
        raise TraceParseError(f"bad thread id {raw_tid!r}", lineno) from None
    if tid < 0:
        raise TraceParseError(f"negative thread id {tid}", lineno)
    if kind != ENTER and kind != EXIT:
        raise TraceParseError(f"bad event kind {kind!r} (expected E or X)", lineno)
    _check_method(method, lineno)
    return TraceEvent(ts, tid, kind, method)


def format_trace_line(event: TraceEvent) -> str:
    """Render an event in canonical tab-separated form (no newline)."""
    return f"{event.ts}\t{event.tid}\t{event.kind}\t{event.method}"


def iter_trace(lines: Iterable[str]) -> Iterator[TraceEvent]:
    """Yield events from trace text, skipping comments and blank lines.

    Streams: suitable for arbitrarily large inputs.  Structural checks
    (nesting, timestamp order) are left to the consumer.
    """
    for lineno, line in enumerate(lines, 1):
        event = parse_trace_line(line, lineno)
        if event is not None:
            yield event


def read_trace(
    lines: Iterable[str],
    lenient: bool = False,
    warn: Callable[[str], None] | None = None,
) -> dict[int, list[TraceEvent]]:
    """Read trace text into per-thread event sequences, preserving file order.

    Threads appear in the returned dict in order of first appearance.  A
    per-thread timestamp regression raises TraceStructureError in strict
    mode; in lenient mode it is reported through ``warn`` and the event is
    kept as-is (the tree builder clamps it during construction).
    """
    by_tid: dict[int, list[TraceEvent]] = {}
    last_ts: dict[int, int] = {}
    for lineno, line in enumerate(lines, 1):
        event = parse_trace_line(line, lineno)
        if event is None:
            continue
        prev = last_ts.get(event.tid)
        if prev is not None and event.ts < prev:
            if not lenient:
                raise TraceStructureError(
                    f"timestamp regression {prev} -> {event.ts}",
                    tid=event.tid,
                    lineno=lineno,
                )
            if warn is not None:
                warn(f"tid {event.tid}, line {lineno}: timestamp regression {prev} -> {event.ts}")
        else:
            last_ts[event.tid] = event.ts
        by_tid.setdefault(event.tid, []).append(event)
    return by_tid


def read_trace_file(path, lenient: bool = False, warn: Callable[[str], None] | None = None):
    with open(path, "r", encoding="utf-8") as fh:
        return read_trace(fh, lenient=lenient, warn=warn)


def write_trace(events: Iterable[TraceEvent], fh) -> int:
    """Write events as canonical trace lines; returns the event count."""
    n = 0
    for event in events:
        fh.write(format_trace_line(event))
        fh.write("\n")
        n += 1
    return n


@dataclass
class TraceValidationReport:
    """Defect counts from a structural scan of a parsed trace."""

    event_count: int = 0
    thread_count: int = 0
    orphan_exits: dict[int, int] = field(default_factory=dict)
    unmatched_enters: dict[int, int] = field(default_factory=dict)
    ordering_violations: dict[int, int] = field(default_factory=dict)

    @property
    def well_formed(self) -> bool:
        return not (self.orphan_exits or self.unmatched_enters or self.ordering_violations)

    def summary(self) -> str:
        if self.well_formed:
            return f"well-formed: {self.event_count} events on {self.thread_count} thread(s)"
        parts = [f"{self.event_count} events on {self.thread_count} thread(s)"]
        if self.orphan_exits:
            parts.append(f"orphan exits: {dict(sorted(self.orphan_exits.items()))}")
        if self.unmatched_enters:
            parts.append(f"unmatched enters: {dict(sorted(self.unmatched_enters.items()))}")
        if self.ordering_violations:
            parts.append(f"ordering violations: {dict(sorted(self.ordering_violations.items()))}")
        return "; ".join(parts)


def validate_trace(by_tid: dict[int, list[TraceEvent]]) -> TraceValidationReport:
    """Scan per-thread sequences for stack and ordering defects.

    An exit that does not match the innermost open frame counts as an
    orphan exit and is ignored for matching purposes, so the frames it
    failed to close surface as unmatched enters as well.
    """
    report = TraceValidationReport(thread_count=len(by_tid))
    for tid, events in by_tid.items():
        stack: list[str] = []
        prev_ts: int | None = None
        for event in events:
            report.event_count += 1
            if prev_ts is not None and event.ts < prev_ts:
                report.ordering_violations[tid] = report.ordering_violations.get(tid, 0) + 1
            else:
                prev_ts = event.ts
            if event.kind == ENTER:
                stack.append(event.method)
            elif not stack or stack[-1] != event.method:
                report.orphan_exits[tid] = report.orphan_exits.get(tid, 0) + 1
            else:
                stack.pop()
        if stack:
            report.unmatched_enters[tid] = len(stack)
    return report


def events_to_jsonl(events: Iterable[TraceEvent]) -> Iterator[str]:
    """Render events as JSON-lines text, one object per line."""
    for event in events:
        yield json.dumps(
            {"ts": event.ts, "tid": event.tid, "ev": event.kind, "m": event.method}
        )


def events_from_jsonl(lines: Iterable[str]) -> Iterator[TraceEvent]:
    """Parse JSON-lines events; same field constraints as the canonical form."""
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceParseError(f"bad JSON: {exc}", lineno) from None
        if not isinstance(obj, dict):
            raise TraceParseError("expected a JSON object", lineno)
        try:
            ts, tid, kind, method = obj["ts"], obj["tid"], obj["ev"], obj["m"]
        except KeyError as exc:
            raise TraceParseError(f"missing field {exc.args[0]!r}", lineno) from None
        # bool is an int subclass; reject it explicitly
        if isinstance(ts, bool) or not isinstance(ts, int):
            raise TraceParseError(f"bad timestamp {ts!r}", lineno)
        if isinstance(tid, bool) or not isinstance(tid, int) or tid < 0:
            raise TraceParseError(f"bad thread id {tid!r}", lineno)
        if kind != ENTER and kind != EXIT:
            raise TraceParseError(f"bad event kind {kind!r} (expected E or X)", lineno)
        if not isinstance(method, str):
            raise TraceParseError(f"bad method name {method!r}", lineno)
        _check_method(method, lineno)
        yield TraceEvent(ts, tid, kind, method)
