import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load
from invgen.checker import CheckerConfig
from invgen.houdini import houdini_fixpoint
from invgen.ir import Candidate
from invgen.orchestrator import (
    H, EngineId, RefutationPool, RunConfig, run_engine, run_parallel, run_sequential,
)
from invgen.parser import parse
from invgen.rulegen import generate_candidates
from invgen.transforms import strip_invariants

FAST = ["fig3", "fig4", "evens", "countdown", "nested", "noaccess", "block_range", "strided",
        "reduction", "scan", "clamp"]


def fig4_nonzero():
    p = strip_invariants(load("fig4"))
    e = parse("kernel t width 6 { local i : bv; assert i != 0; }").body[0].cond
    return p, [Candidate(0, "pragma", "L0", e)]


def baseline(name):
    p = load(name)
    cands = generate_candidates(p)
    return p, cands, houdini_fixpoint(p, cands).proved


class TestEngineId:
    @pytest.mark.parametrize("text", ["H", "SBASE", "SSTEP", "DYN", "LU(1)", "LU(3)"])
    def test_round_trip(self, text):
        assert str(EngineId.parse(text)) == text

    def test_case_insensitive(self):
        assert EngineId.parse("lu(2)") == EngineId("LU", 2)

    @pytest.mark.parametrize("text", ["LU", "LU(0)", "FOO", ""])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            EngineId.parse(text)


class TestPool:
    def test_drain_cursor(self):
        pool = RefutationPool()
        pool.publish(1, "A")
        recs, cur = pool.drain(0)
        assert [r.candidate for r in recs] == [1] and cur == 1
        pool.publish(2, "B")
        recs, cur = pool.drain(cur)
        assert [r.candidate for r in recs] == [2] and cur == 2
        assert pool.drain(cur) == ([], 2)

    def test_first_publisher_wins(self):
        pool = RefutationPool()
        pool.publish(4, "DYN")
        pool.publish(4, "SBASE")
        assert len(pool) == 2
        assert pool.attribution() == {4: "DYN"}

    def test_concurrent_publish(self):
        pool = RefutationPool()

        def work(k):
            for i in range(200):
                pool.publish(i, f"E{k}")

        threads = [threading.Thread(target=work, args=(k,)) for k in range(4)]
        for t in threads:
            t.start()
        sizes = []
        while any(t.is_alive() for t in threads):
            sizes.append(len(pool))
        for t in threads:
            t.join()
        assert len(pool) == 800
        assert sizes == sorted(sizes)
        offsets = [r.offset for r in pool.records()]
        assert offsets == sorted(offsets)


class TestRunEngine:
    def test_sbase_fig3(self):
        p = load("fig3")
        assert run_engine("SBASE", p, generate_candidates(p)).refuted == {1, 3}

    def test_sstep_misses_base_only_failure(self):
        p, cands = fig4_nonzero()
        assert run_engine("SSTEP", p, cands).refuted == frozenset()

    def test_lu1_catches_first_iteration(self):
        p, cands = fig4_nonzero()
        assert run_engine("LU(1)", p, cands).refuted == {0}

    def test_houdini_is_not_an_engine(self):
        with pytest.raises(ValueError):
            run_engine(H, load("fig4"), [])

    def test_oversized_unroll_reports_error(self):
        p = load("nested")
        out = run_engine(EngineId("LU", 5000), p, generate_candidates(p))
        assert out.error and out.error.startswith("TransformError")
        assert out.refuted == frozenset() and out.count == 0

    def test_timeout_reported(self):
        p = load("transpose")
        cfg = RunConfig(checker=CheckerConfig(timeout=1e-6))
        out = run_engine("SBASE", p, generate_candidates(p), cfg)
        assert out.error.startswith("CheckTimeout")

    @pytest.mark.parametrize("name", FAST)
    @pytest.mark.parametrize("engine", ["SBASE", "SSTEP", "LU(1)", "LU(2)", "DYN"])
    def test_under_approximation(self, name, engine):
        p, cands, proved = baseline(name)
        out = run_engine(engine, p, cands)
        assert out.error is None
        assert out.refuted.isdisjoint(proved)
        assert out.count == len(out.refuted)


class TestSequential:
    def test_empty_prelude_is_baseline(self):
        p, cands, proved = baseline("fig3")
        res = run_sequential([], p, cands)
        assert res.proved == proved
        assert res.houdini.rounds_table() == {1: [1, 3], 2: [0, 6], 3: [4]}

    def test_dyn_then_houdini_fig4(self):
        p, cands, proved = baseline("fig4")
        assert run_sequential(["DYN"], p, cands).proved == proved

    def test_sbase_preseeds_fig3(self):
        p, cands, proved = baseline("fig3")
        res = run_sequential(["SBASE"], p, cands)
        assert res.proved == {2, 5}
        by_engine = {r.candidate: (r.engine, r.round) for r in res.houdini.refuted}
        assert by_engine[1] == by_engine[3] == ("SBASE", 1)
        assert by_engine[0][0] == by_engine[6][0] == "H"
        assert res.per_engine["SBASE"].refuted == {1, 3}

    def test_rejects_houdini_in_prelude(self):
        with pytest.raises(ValueError):
            run_sequential(["H"], load("fig4"), [])

    def test_user_failures_recorded(self):
        p = load("clamp")
        res = run_sequential(["SBASE"], p, [])
        assert res.user_failures["SBASE"] == {"a1"}
        assert not res.houdini.verified

    @pytest.mark.parametrize("name", FAST)
    def test_each_refutation_attributed_once(self, name):
        p, cands, proved = baseline(name)
        res = run_sequential(["DYN", "SBASE", "SSTEP", "LU(1)"], p, cands)
        ids = [r.candidate for r in res.houdini.refuted]
        assert len(ids) == len(set(ids))
        assert res.proved == proved


class TestParallel:
    @pytest.mark.parametrize("name", FAST)
    def test_same_proved_set(self, name):
        p, cands, proved = baseline(name)
        assert run_parallel(["DYN", "SBASE"], p, cands).proved == proved

    @settings(max_examples=15, deadline=None)
    @given(st.sampled_from(["fig3", "fig4", "evens", "noaccess", "reduction"]), st.integers(0, 10 ** 6),
           st.lists(st.sampled_from(["DYN", "SBASE", "SSTEP", "LU(1)", "LU(2)"]), max_size=4, unique=True))
    def test_any_schedule_same_result(self, name, seed, engines):
        p, cands, proved = baseline(name)
        res = run_parallel(engines, p, cands, RunConfig(scheduler_seed=seed, max_jitter=0.002))
        assert res.proved == proved
        for e, out in res.per_engine.items():
            assert out.refuted.isdisjoint(proved)

    def test_no_engines_matches_baseline(self):
        p, cands, proved = baseline("fig3")
        res = run_parallel([], p, cands)
        assert res.proved == proved
        assert res.houdini.rounds_table() == {1: [1, 3], 2: [0, 6], 3: [4]}

    def test_engines_joined_and_reported(self):
        p, cands, _ = baseline("fig4")
        res = run_parallel(["DYN", "SBASE"], p, cands, RunConfig(scheduler_seed=1))
        assert set(res.per_engine) == {"DYN", "SBASE"}
        assert res.completion_time > 0

    def test_rejects_houdini(self):
        with pytest.raises(ValueError):
            run_parallel([H], load("fig4"), [])
