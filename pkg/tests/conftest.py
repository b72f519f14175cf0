"""Shared helpers: seeded random well-formed traces and a naive replay oracle.

The oracle deliberately avoids every tree abstraction from the package: it
replays raw events against plain per-thread stacks and accumulates per-method
self time, total time, and invocation counts. Tree-based aggregation must
agree with it exactly.
"""

from __future__ import annotations

import random
from collections import defaultdict

from cct_lens.trace import ENTER, EXIT, TraceEvent


def random_balanced_events(
    rng: random.Random,
    tid: int,
    max_events: int = 60,
    methods=("a", "b", "c"),
    max_depth: int = 24,
) -> list[TraceEvent]:
    """Well-formed single-thread event list: balanced, nondecreasing timestamps."""
    events: list[TraceEvent] = []
    ts = rng.randrange(0, 5)
    stack: list[str] = []
    frames_left = rng.randrange(0, max_events // 2 + 1)
    while frames_left > 0 or stack:
        opening = frames_left > 0 and len(stack) < max_depth
        if opening and (not stack or rng.random() < 0.55):
            method = rng.choice(methods)
            events.append(TraceEvent(ts, tid, ENTER, method))
            stack.append(method)
            frames_left -= 1
        else:
            events.append(TraceEvent(ts, tid, EXIT, stack.pop()))
        # zero increments keep timestamp ties in play
        ts += rng.randrange(0, 7)
    return events


def random_trace(
    rng: random.Random,
    max_events: int = 200,
    max_methods: int = 8,
    max_tids: int = 4,
) -> list[TraceEvent]:
    """Multi-thread well-formed trace in a random file-order interleaving."""
    methods = tuple(f"m{i}()" for i in range(rng.randrange(1, max_methods + 1)))
    tid_count = rng.randrange(1, max_tids + 1)
    streams: list[list[TraceEvent]] = []
    remaining = max_events
    for tid in range(1, tid_count + 1):
        share = remaining // (tid_count - tid + 1)
        if share < 2:
            break
        events = random_balanced_events(rng, tid, share, methods)
        remaining -= len(events)
        if events:
            streams.append(events)
    interleaved: list[TraceEvent] = []
    cursors = [iter(s) for s in streams]
    pending = [(next(c), c) for c in cursors]
    while pending:
        idx = rng.randrange(len(pending))
        event, cursor = pending[idx]
        interleaved.append(event)
        nxt = next(cursor, None)
        if nxt is None:
            pending.pop(idx)
        else:
            pending[idx] = (nxt, cursor)
    return interleaved


def trace_lines(events) -> list[str]:
    return [f"{e.ts}\t{e.tid}\t{e.kind}\t{e.method}" for e in events]


def replay_totals(events):
    """Stack-replay oracle: method -> self ns / total ns / invocation count."""
    self_ns: dict[str, int] = defaultdict(int)
    total_ns: dict[str, int] = defaultdict(int)
    calls: dict[str, int] = defaultdict(int)
    stacks: dict[int, list[list]] = {}
    for event in events:
        stack = stacks.setdefault(event.tid, [])
        if event.kind == ENTER:
            stack.append([event.method, event.ts, 0])
        else:
            method, entered, child_time = stack.pop()
            assert method == event.method, "oracle requires well-formed input"
            duration = event.ts - entered
            self_ns[method] += duration - child_time
            total_ns[method] += duration
            calls[method] += 1
            if stack:
                stack[-1][2] += duration
    assert all(not s for s in stacks.values()), "oracle requires balanced input"
    return dict(self_ns), dict(total_ns), dict(calls)


def events_1tid(*steps, tid: int = 1) -> list[TraceEvent]:
    """Compact builder: steps are (ts, kind, method) triples on one thread."""
    return [TraceEvent(ts, tid, kind, method) for ts, kind, method in steps]
