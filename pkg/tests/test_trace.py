"""Trace line grammar, per-thread partitioning, validation, JSONL interchange."""

import io
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cct_lens.trace import (
    ENTER,
    EXIT,
    TraceEvent,
    TraceParseError,
    TraceStructureError,
    events_from_jsonl,
    events_to_jsonl,
    format_trace_line,
    iter_trace,
    parse_trace_line,
    read_trace,
    read_trace_file,
    validate_trace,
    write_trace,
)

from conftest import random_trace, trace_lines


class TestParseTraceLine:
    def test_enter(self):
        assert parse_trace_line("0\t1\tE\ta") == TraceEvent(0, 1, ENTER, "a")

    def test_exit(self):
        assert parse_trace_line("10\t1\tX\ta") == TraceEvent(10, 1, EXIT, "a")

    def test_unknown_event_kind(self):
        with pytest.raises(TraceParseError, match="event kind"):
            parse_trace_line("10\t1\tQ\ta")

    def test_comment_and_blank(self):
        assert parse_trace_line("# a comment") is None
        assert parse_trace_line("") is None
        assert parse_trace_line("   \n") is None

    def test_field_count(self):
        with pytest.raises(TraceParseError, match="4 tab-separated fields"):
            parse_trace_line("0\t1\tE")
        with pytest.raises(TraceParseError):
            parse_trace_line("0\t1\tE\ta\textra")

    def test_bad_timestamp(self):
        with pytest.raises(TraceParseError, match="timestamp"):
            parse_trace_line("soon\t1\tE\ta")

    def test_bad_tid(self):
        with pytest.raises(TraceParseError, match="thread id"):
            parse_trace_line("0\tx\tE\ta")
        with pytest.raises(TraceParseError, match="thread id"):
            parse_trace_line("0\t-1\tE\ta")

    def test_bad_method(self):
        with pytest.raises(TraceParseError, match="method"):
            parse_trace_line("0\t1\tE\ta b")

    def test_error_names_line_number(self):
        with pytest.raises(TraceParseError, match="line 7"):
            parse_trace_line("0\t1\tQ\ta", lineno=7)
        try:
            parse_trace_line("0\t1\tQ\ta", lineno=7)
        except TraceParseError as exc:
            assert exc.lineno == 7

    def test_negative_timestamp_allowed(self):
        # clock origin is arbitrary
        assert parse_trace_line("-5\t1\tE\ta").ts == -5

    def test_method_with_signature(self):
        line = "0\t1\tE\tgetConnection(java.lang.String,java.lang.String,java.lang.String)"
        event = parse_trace_line(line)
        assert event.method.startswith("getConnection(")


valid_methods = st.text(
    alphabet="abcdefghijklmnop._()<>$0123456789,", min_size=1, max_size=40
)


class TestRoundTrip:
    @given(
        ts=st.integers(min_value=-(10**15), max_value=10**18),
        tid=st.integers(min_value=0, max_value=10**6),
        kind=st.sampled_from([ENTER, EXIT]),
        method=valid_methods,
    )
    def test_format_then_parse_is_identity(self, ts, tid, kind, method):
        event = TraceEvent(ts, tid, kind, method)
        assert parse_trace_line(format_trace_line(event)) == event

    def test_write_then_iter(self):
        events = [TraceEvent(0, 1, ENTER, "a"), TraceEvent(4, 1, EXIT, "a")]
        buf = io.StringIO()
        assert write_trace(events, buf) == 2
        assert list(iter_trace(buf.getvalue().splitlines())) == events


class TestReadTrace:
    def test_single_thread_partition(self):
        lines = ["0\t1\tE\ta", "1\t1\tE\tb", "2\t1\tX\tb", "3\t1\tX\ta"]
        by_tid = read_trace(lines)
        assert list(by_tid) == [1]
        assert len(by_tid[1]) == 4

    def test_interleaved_partition_keeps_file_order(self):
        lines = ["0\t1\tE\ta", "1\t2\tE\tb", "5\t1\tX\ta", "6\t2\tX\tb"]
        by_tid = read_trace(lines)
        assert list(by_tid) == [1, 2]
        assert [e.method for e in by_tid[1]] == ["a", "a"]
        assert [e.ts for e in by_tid[2]] == [1, 6]

    def test_timestamp_regression_strict(self):
        lines = ["5\t1\tE\ta", "3\t1\tX\ta"]
        with pytest.raises(TraceStructureError, match="tid 1, line 2"):
            read_trace(lines)
        try:
            read_trace(lines)
        except TraceStructureError as exc:
            assert exc.tid == 1 and exc.lineno == 2

    def test_timestamp_regression_lenient_warns(self):
        lines = ["5\t1\tE\ta", "3\t1\tX\ta"]
        warnings: list[str] = []
        by_tid = read_trace(lines, lenient=True, warn=warnings.append)
        assert len(by_tid[1]) == 2
        assert len(warnings) == 1 and "regression" in warnings[0]

    def test_cross_thread_regression_is_fine(self):
        # per-tid clocks are independent
        lines = ["100\t1\tE\ta", "5\t2\tE\tb", "110\t1\tX\ta", "9\t2\tX\tb"]
        by_tid = read_trace(lines)
        assert len(by_tid) == 2

    def test_parse_error_carries_line_number(self):
        lines = ["0\t1\tE\ta", "broken line"]
        with pytest.raises(TraceParseError, match="line 2"):
            read_trace(lines)

    def test_comments_do_not_shift_line_numbers(self):
        lines = ["# header", "", "0\t1\tQ\ta"]
        with pytest.raises(TraceParseError, match="line 3"):
            read_trace(lines)

    def test_file_reader(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("# c\n0\t1\tE\ta\n2\t1\tX\ta\n", encoding="utf-8")
        by_tid = read_trace_file(path)
        assert [e.kind for e in by_tid[1]] == [ENTER, EXIT]


class TestValidateTrace:
    def test_balanced_trace_all_zero(self):
        by_tid = read_trace(["0\t1\tE\ta", "1\t1\tE\tb", "2\t1\tX\tb", "3\t1\tX\ta"])
        report = validate_trace(by_tid)
        assert report.well_formed
        assert report.event_count == 4
        assert report.thread_count == 1
        assert "well-formed" in report.summary()

    def test_mismatched_exit_is_orphan(self):
        by_tid = read_trace(["0\t1\tE\ta", "1\t1\tE\tb", "2\t1\tX\ta"])
        report = validate_trace(by_tid)
        assert report.orphan_exits == {1: 1}
        # the ignored exit leaves both enters open
        assert report.unmatched_enters == {1: 2}
        assert not report.well_formed

    def test_unmatched_enter(self):
        report = validate_trace(read_trace(["0\t1\tE\ta"]))
        assert report.unmatched_enters == {1: 1}

    def test_exit_on_empty_stack(self):
        report = validate_trace(read_trace(["0\t1\tX\ta"]))
        assert report.orphan_exits == {1: 1}
        assert report.unmatched_enters == {}

    def test_ordering_violation_counted(self):
        by_tid = read_trace(["5\t1\tE\ta", "3\t1\tX\ta"], lenient=True)
        report = validate_trace(by_tid)
        assert report.ordering_violations == {1: 1}

    @given(st.integers(min_value=0, max_value=10**6))
    def test_interleaving_insensitive(self, seed):
        rng = random.Random(seed)
        events = random_trace(rng, max_events=80)
        by_tid: dict[int, list[TraceEvent]] = {}
        for event in events:
            by_tid.setdefault(event.tid, []).append(event)
        baseline = validate_trace(by_tid)
        # same per-tid groups presented in reversed thread order
        shuffled = {tid: by_tid[tid] for tid in reversed(list(by_tid))}
        report = validate_trace(shuffled)
        assert report.orphan_exits == baseline.orphan_exits
        assert report.unmatched_enters == baseline.unmatched_enters
        assert report.ordering_violations == baseline.ordering_violations
        assert report.event_count == baseline.event_count
        assert baseline.well_formed

    @given(st.integers(min_value=0, max_value=10**6))
    def test_random_interleavings_read_identically(self, seed):
        rng = random.Random(seed)
        events = random_trace(rng, max_events=60)
        lines_a = trace_lines(events)
        by_tid_order: dict[int, list[TraceEvent]] = {}
        for event in events:
            by_tid_order.setdefault(event.tid, []).append(event)
        # a second interleaving: thread groups concatenated wholesale
        lines_b = [
            line for tid in by_tid_order for line in trace_lines(by_tid_order[tid])
        ]
        # per-tid content is what matters, not dict order
        a, b = read_trace(lines_a), read_trace(lines_b)
        assert {t: tuple(v) for t, v in a.items()} == {t: tuple(v) for t, v in b.items()}


class TestJsonl:
    def test_round_trip(self):
        events = [
            TraceEvent(0, 1, ENTER, "a()"),
            TraceEvent(7, 1, EXIT, "a()"),
            TraceEvent(2, 2, ENTER, "b.<init>()"),
            TraceEvent(3, 2, EXIT, "b.<init>()"),
        ]
        lines = list(events_to_jsonl(events))
        assert all(line.startswith("{") for line in lines)
        assert list(events_from_jsonl(lines)) == events

    @given(
        ts=st.integers(min_value=-(10**12), max_value=10**15),
        tid=st.integers(min_value=0, max_value=999),
        kind=st.sampled_from([ENTER, EXIT]),
        method=valid_methods,
    )
    def test_round_trip_property(self, ts, tid, kind, method):
        event = TraceEvent(ts, tid, kind, method)
        assert list(events_from_jsonl(events_to_jsonl([event]))) == [event]

    def test_rejects_non_integer_fields(self):
        with pytest.raises(TraceParseError, match="timestamp"):
            list(events_from_jsonl(['{"ts": true, "tid": 1, "ev": "E", "m": "a"}']))
        with pytest.raises(TraceParseError, match="timestamp"):
            list(events_from_jsonl(['{"ts": 1.5, "tid": 1, "ev": "E", "m": "a"}']))
        with pytest.raises(TraceParseError, match="thread id"):
            list(events_from_jsonl(['{"ts": 0, "tid": -2, "ev": "E", "m": "a"}']))

    def test_rejects_missing_field_and_bad_json(self):
        with pytest.raises(TraceParseError, match="missing field 'm'"):
            list(events_from_jsonl(['{"ts": 0, "tid": 1, "ev": "E"}']))
        with pytest.raises(TraceParseError, match="bad JSON"):
            list(events_from_jsonl(["{nope"]))
        with pytest.raises(TraceParseError, match="object"):
            list(events_from_jsonl(["[1, 2]"]))

    def test_rejects_whitespace_method(self):
        with pytest.raises(TraceParseError, match="whitespace"):
            list(events_from_jsonl(['{"ts": 0, "tid": 1, "ev": "E", "m": "a b"}']))
