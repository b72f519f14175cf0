"""Chain templates, the latency model, and the deterministic simulator."""

import hashlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cct_lens import workload as wl
from cct_lens.cct import build_forest, merge_ccts
from cct_lens.metrics import format_ms, hotspots
from cct_lens.trace import read_trace, validate_trace


def analyze(text: str):
    by_tid = read_trace(text.splitlines())
    events = [e for evs in by_tid.values() for e in evs]
    return merge_ccts(build_forest(events))


class TestChains:
    def test_five_use_cases(self):
        assert set(wl.hr_scenarios()) == {
            "register",
            "login",
            "add_interview_result",
            "recruit",
            "view_result",
        }

    def test_register_has_exactly_two_getconnection_frames(self):
        methods = wl.hr_scenarios()["register"].methods()
        assert methods.count(wl.GET_CONNECTION) == 2

    def test_login_has_one_getconnection_frame(self):
        methods = wl.hr_scenarios()["login"].methods()
        assert methods.count(wl.GET_CONNECTION) == 1

    def test_login_dao_frame_is_authenticate_employee(self):
        methods = wl.hr_scenarios()["login"].methods()
        dao_calls = [m for m in methods if ".dao.EmployeeDAO." in m and "<init>" not in m]
        assert dao_calls == [wl.DAO_AUTHENTICATE_EMPLOYEE]

    def test_recruit_bean_frame(self):
        methods = wl.hr_scenarios()["recruit"].methods()
        assert wl.BEAN_RECRUIT in methods
        assert wl.DAO_RECRUIT_EMPLOYEE in methods

    def test_every_chain_reaches_the_database(self):
        for name, chain in wl.hr_scenarios().items():
            assert wl.GET_CONNECTION in chain.methods(), name

    def test_chain_methods_contain_no_whitespace(self):
        for chain in wl.standard_chains().values():
            for method in chain.methods():
                assert " " not in method and "\t" not in method

    def test_register_nesting_order(self):
        methods = wl.hr_scenarios()["register"].methods()
        jsp = methods.index(wl.REGISTER_JSP)
        servlet = methods.index(wl.REGISTRATION_SERVLET_PROCESS_REQUEST)
        stub = methods.index(wl.STUB_ADD_CANDIDATE_PROFILE)
        wrapper = methods.index(wl.WRAPPER_ADD_CANDIDATE_PROFILE)
        bean = methods.index(wl.BEAN_ADD_CANDIDATE_PROFILE)
        dao = methods.index(wl.DAO_ADD_CANDIDATE_PROFILE)
        assert jsp < servlet < stub < wrapper < bean < dao

    def test_frame_count_matches_methods(self):
        for chain in wl.standard_chains().values():
            assert chain.frame_count() == len(chain.methods())


class TestLatencyModel:
    def test_zero_jitter_returns_base(self):
        model = wl.LatencyModel(base_ns={"a": 500}, default_base_ns=7)
        assert model.self_duration_ns("a", 1, "register", 0, 0) == 500
        assert model.self_duration_ns("unknown", 1, "register", 0, 0) == 7

    def test_jitter_bounds(self):
        model = wl.LatencyModel(base_ns={"a": 1_000_000}, jitter=0.1)
        for i in range(200):
            d = model.self_duration_ns("a", 3, "register", i, 0)
            assert 900_000 <= d <= 1_100_000

    def test_jitter_deterministic(self):
        model = wl.LatencyModel(base_ns={"a": 1_000_000}, jitter=0.25)
        a = [model.self_duration_ns("a", 9, "login", i, j) for i in range(5) for j in range(5)]
        b = [model.self_duration_ns("a", 9, "login", i, j) for i in range(5) for j in range(5)]
        assert a == b

    def test_jitter_varies_across_frames(self):
        model = wl.LatencyModel(base_ns={"a": 1_000_000}, jitter=0.3)
        draws = {model.self_duration_ns("a", 5, "register", 0, j) for j in range(30)}
        assert len(draws) > 1

    def test_invalid_jitter(self):
        with pytest.raises(ValueError, match="jitter"):
            wl.LatencyModel(base_ns={}, jitter=1.0)
        with pytest.raises(ValueError, match="jitter"):
            wl.LatencyModel(base_ns={}, jitter=-0.1)

    def test_negative_base_rejected(self):
        with pytest.raises(ValueError, match="negative base"):
            wl.LatencyModel(base_ns={"a": -1})


class TestSimulate:
    def test_reference_invocation_counts(self):
        spec = wl.WorkloadSpec(
            executions={"register": 20, "login": 10},
            seed=1,
            latency=wl.calibrated_latency(),
            thread_count=4,
        )
        merged = analyze(wl.simulate(spec))
        inv = {r.method: r.invocations for r in hotspots(merged)}
        assert inv[wl.GET_CONNECTION] == 50
        assert inv[wl.DAO_ADD_CANDIDATE_PROFILE] == 20
        assert inv[wl.DAO_ADD_EMPLOYEE_CREDENTIALS] == 20
        assert inv[wl.DAO_AUTHENTICATE_EMPLOYEE] == 10

    def test_empty_workload_is_comments_only(self):
        spec = wl.WorkloadSpec(executions={"register": 0, "login": 0})
        text = wl.simulate(spec)
        lines = text.splitlines()
        assert lines and all(line.startswith("#") for line in lines)

    def test_byte_identical_across_runs(self):
        spec_a = wl.figure8_preset()
        spec_b = wl.figure8_preset()
        assert wl.simulate(spec_a) == wl.simulate(spec_b)

    def test_seed_changes_output_with_jitter(self):
        def text(seed):
            spec = wl.load_preset(2, jitter=0.2, seed=seed)
            return wl.simulate(spec)

        assert text(1) != text(2)

    def test_all_generated_traces_validate_clean(self):
        for spec in (
            wl.figure8_preset(),
            wl.load_preset(3, jitter=0.1),
            wl.WorkloadSpec(executions={"recruit": 5, "view_result": 2}, thread_count=2),
        ):
            report = validate_trace(read_trace(wl.simulate(spec).splitlines()))
            assert report.well_formed, report.summary()

    def test_linearity_of_invocation_counts(self):
        def counts(n):
            spec = wl.WorkloadSpec(
                executions={"register": n}, latency=wl.calibrated_latency(), thread_count=3
            )
            merged = analyze(wl.simulate(spec))
            return {r.method: r.invocations for r in hotspots(merged)}

        once, thrice = counts(4), counts(12)
        assert set(once) == set(thrice)
        for method, n in once.items():
            assert thrice[method] == 3 * n

    def test_round_robin_uses_all_threads(self):
        spec = wl.WorkloadSpec(executions={"login": 8}, thread_count=4)
        by_tid = read_trace(wl.simulate(spec).splitlines())
        assert sorted(by_tid) == [1, 2, 3, 4]

    def test_per_tid_timestamps_nondecreasing_and_nested(self):
        spec = wl.load_preset(5, jitter=0.3, seed=2)
        by_tid = read_trace(wl.simulate(spec).splitlines())
        for events in by_tid.values():
            assert all(a.ts <= b.ts for a, b in zip(events, events[1:]))
        assert validate_trace(by_tid).well_formed

    def test_executions_on_one_tid_do_not_overlap(self):
        spec = wl.WorkloadSpec(
            executions={"login": 6},
            thread_count=2,
            latency=wl.LatencyModel(base_ns={}, default_base_ns=1000),
        )
        by_tid = read_trace(wl.simulate(spec).splitlines())
        for events in by_tid.values():
            depth = 0
            spans = []
            for e in events:
                if e.kind == "E":
                    if depth == 0:
                        start = e.ts
                    depth += 1
                else:
                    depth -= 1
                    if depth == 0:
                        spans.append((start, e.ts))
            for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                assert e1 <= s2

    def test_unknown_use_case_rejected(self):
        spec = wl.WorkloadSpec(executions={"nonsense": 1})
        with pytest.raises(ValueError, match="unknown use case"):
            wl.simulate(spec)

    def test_negative_count_rejected(self):
        spec = wl.WorkloadSpec(executions={"login": -1})
        with pytest.raises(ValueError, match="negative execution count"):
            wl.simulate(spec)

    def test_bad_thread_count_rejected(self):
        spec = wl.WorkloadSpec(executions={}, thread_count=0)
        with pytest.raises(ValueError, match="thread_count"):
            wl.simulate(spec)

    @given(
        register=st.integers(min_value=0, max_value=6),
        login=st.integers(min_value=0, max_value=6),
        threads=st.integers(min_value=1, max_value=4),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    @settings(max_examples=40, deadline=None)
    def test_structure_independent_of_seed_and_jitter(self, register, login, threads, seed):
        def structure(jitter):
            spec = wl.WorkloadSpec(
                executions={"register": register, "login": login},
                seed=seed,
                latency=wl.calibrated_latency(jitter),
                thread_count=threads,
            )
            by_tid = read_trace(wl.simulate(spec).splitlines())
            assert validate_trace(by_tid).well_formed
            return {
                tid: [(e.kind, e.method) for e in events] for tid, events in by_tid.items()
            }

        assert structure(0.0) == structure(0.4)


class TestFigure8Preset:
    def setup_method(self):
        self.merged = analyze(wl.simulate(wl.figure8_preset()))
        self.rows = {r.method: r for r in hotspots(self.merged)}

    def test_top_row_self_time(self):
        assert format_ms(self.rows[wl.GET_CONNECTION].self_time) == "1267 ms"

    def test_add_candidate_profile_row(self):
        row = self.rows[wl.DAO_ADD_CANDIDATE_PROFILE]
        assert format_ms(row.self_time) == "946 ms"
        assert row.invocations == 20

    def test_authenticate_avg(self):
        row = self.rows[wl.DAO_AUTHENTICATE_EMPLOYEE]
        assert format_ms(row.self_time) == "85.8 ms"
        assert row.avg_per_invocation == 8_580_000

    def test_every_reference_row_reproduced(self):
        for method, self_ms, invocations in wl.FIGURE8_TABLE:
            row = self.rows[method]
            assert row.invocations == invocations, method
            assert format_ms(row.self_time) == format_ms(round(self_ms * 1e6)), method

    def test_self_times_exact_at_nanosecond_resolution(self):
        # jitter 0: every aggregate equals base * invocations exactly
        for method, _self_ms, invocations in wl.FIGURE8_TABLE:
            expected = wl._CALIBRATED_BASE_NS[method] * invocations
            assert self.rows[method].self_time == expected, method

    def test_only_uncalibrated_extras_are_registration_frames(self):
        extras = set(self.rows) - {m for m, _, _ in wl.FIGURE8_TABLE}
        assert extras == {wl.REGISTER_JSP, wl.REGISTRATION_SERVLET_PROCESS_REQUEST}
        assert all(self.rows[m].self_time == 0 for m in extras)


class TestLoadPreset:
    def test_scales_volume_not_latency(self):
        a = wl.load_preset(1)
        b = wl.load_preset(20)
        assert b.executions["register"] == 20 * a.executions["register"]
        assert a.latency.base_ns == b.latency.base_ns

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError, match="user_count"):
            wl.load_preset(0)
        with pytest.raises(ValueError, match="repeats"):
            wl.load_preset(1, repeats=0)

    def test_presets_registry(self):
        assert "figure8" in wl.PRESETS
        spec = wl.PRESETS["figure8"]()
        assert spec.executions["register"] == 20


class TestSpecFiles:
    def test_round_trip(self):
        spec = wl.WorkloadSpec(
            executions={"register": 3, "login": 1},
            seed=77,
            latency=wl.LatencyModel(base_ns={"a": 10}, default_base_ns=5, jitter=0.25),
            thread_count=2,
        )
        again = wl.load_workload_spec(wl.dump_workload_spec(spec))
        assert again.executions == spec.executions
        assert again.seed == spec.seed
        assert again.thread_count == spec.thread_count
        assert again.latency.jitter == spec.latency.jitter
        assert again.latency.base_ns == spec.latency.base_ns
        assert again.latency.default_base_ns == spec.latency.default_base_ns

    def test_round_trip_simulates_identically(self):
        spec = wl.WorkloadSpec(
            executions={"recruit": 4},
            seed=5,
            latency=wl.LatencyModel(base_ns={}, default_base_ns=100, jitter=0.5),
            thread_count=3,
        )
        again = wl.load_workload_spec(wl.dump_workload_spec(spec))
        assert wl.simulate(again) == wl.simulate(spec)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown workload spec keys: sede"):
            wl.load_workload_spec('{"executions": {}, "sede": 1}')

    def test_missing_executions_rejected(self):
        with pytest.raises(ValueError, match="executions"):
            wl.load_workload_spec('{"seed": 3}')

    def test_bad_json_rejected(self):
        with pytest.raises(ValueError, match="bad workload spec"):
            wl.load_workload_spec("{nope")
        with pytest.raises(ValueError, match="JSON object"):
            wl.load_workload_spec("[1]")

    def test_non_integer_count_rejected(self):
        with pytest.raises(ValueError, match="must be an integer"):
            wl.load_workload_spec('{"executions": {"login": 1.5}}')

    def test_unknown_use_case_in_file(self):
        with pytest.raises(ValueError, match="unknown use case"):
            wl.load_workload_spec('{"executions": {"bogus": 1}}')

    def test_file_loader(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(wl.dump_workload_spec(wl.figure8_preset()), encoding="utf-8")
        spec = wl.load_workload_spec_file(path)
        digest_a = hashlib.sha256(wl.simulate(spec).encode()).hexdigest()
        digest_b = hashlib.sha256(wl.simulate(wl.figure8_preset()).encode()).hexdigest()
        assert digest_a == digest_b
