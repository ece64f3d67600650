import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corpus_path, load
from invgen.checker import CheckerConfig, failing_asserts
from invgen.houdini import HoudiniError, HoudiniResult, houdini_fixpoint, is_provable
from invgen.ir import Candidate
from invgen.orchestrator import RefutationPool
from invgen.parser import parse
from invgen.rulegen import RuleConfig, generate_candidates
from invgen.transforms import candidate_of_tag, cut_loops

FAST = ["fig3", "fig4", "evens", "countdown", "nested", "noaccess", "block_range", "strided",
        "reduction", "scan"]


def fig4_pragmas(drop_first=False):
    src = corpus_path("fig4").read_text().replace("invariant", "candidate")
    if drop_first:
        src = src.replace("    candidate j == 2 * i && i <= j;\n", "")
    p = parse(src)
    return p, generate_candidates(p, RuleConfig(enabled=frozenset()))


def baseline(name):
    p = load(name)
    cands = generate_candidates(p)
    return p, cands, houdini_fixpoint(p, cands)


class TestExamples:
    def test_fig3_trace(self):
        p, cands, res = baseline("fig3")
        assert res.rounds_table() == {1: [1, 3], 2: [0, 6], 3: [4]}
        assert res.proved == {2, 5}
        assert res.rounds == 4
        assert res.verified

    def test_empty_candidate_set(self):
        p = load("fig4")
        res = houdini_fixpoint(p, [])
        assert res.proved == frozenset() and res.refuted == [] and res.rounds == 1

    def test_fig4_pair_proved(self):
        p, cands = fig4_pragmas()
        res = houdini_fixpoint(p, cands)
        assert res.proved == {0, 1}
        assert res.verified

    def test_fig4_bound_alone_refuted(self):
        p, cands = fig4_pragmas(drop_first=True)
        res = houdini_fixpoint(p, cands)
        assert res.proved == frozenset()
        assert not res.verified
        assert "a0" in res.verdict_after.failing

    def test_is_provable(self):
        p = load("fig3")
        cands = generate_candidates(p)
        assert is_provable(p, cands, 5)
        assert not is_provable(p, cands, 6)
        with pytest.raises(KeyError):
            is_provable(p, cands, 99)

    def test_vacuous_loop(self):
        p = parse("""kernel k width 4 { local i : bv; i := 5;
            while (i < 3) candidate i == 5; candidate i == 4; { } }""")
        cands = generate_candidates(p, RuleConfig(enabled=frozenset()))
        assert is_provable(p, cands, 0)
        assert not is_provable(p, cands, 1)

    def test_status(self):
        p, cands, res = baseline("fig3")
        assert res.status(2) == ("proved",)
        assert res.status(4) == ("refuted", "H", 3)
        assert HoudiniResult(frozenset()).status(0) == ("pending",)

    def test_timeout_covers_whole_fixpoint(self):
        p = load("transpose")
        with pytest.raises(HoudiniError) as exc:
            houdini_fixpoint(p, generate_candidates(p), cfg=CheckerConfig(timeout=1e-6))
        assert exc.value.kind == "timeout"
        assert exc.value.partial.verdict_after is None

    def test_resource(self):
        p = load("fig4")
        with pytest.raises(HoudiniError) as exc:
            houdini_fixpoint(p, generate_candidates(p), cfg=CheckerConfig(max_states=2))
        assert exc.value.kind == "resource"

    def test_on_round_callback(self):
        p = load("fig3")
        seen = []
        houdini_fixpoint(p, generate_candidates(p), on_round=lambda r, bad: seen.append((r, set(bad))))
        assert seen == [(1, {1, 3}), (2, {0, 6}), (3, {4}), (4, set())]


class TestInvariants:
    @pytest.mark.parametrize("name", FAST)
    def test_partition_and_round_order(self, name):
        p, cands, res = baseline(name)
        ref = [r.candidate for r in res.refuted]
        assert res.proved.isdisjoint(ref)
        assert res.proved | set(ref) == {c.id for c in cands}
        assert len(ref) == len(set(ref))
        rounds = [r.round for r in res.refuted]
        assert rounds == sorted(rounds)

    @pytest.mark.parametrize("name", FAST)
    def test_active_set_shrinks_each_round(self, name):
        p, cands, res = baseline(name)
        table = res.rounds_table()
        assert all(table.get(r) for r in range(1, res.rounds))
        assert res.rounds not in table

    @pytest.mark.parametrize("name", FAST)
    def test_proved_set_is_inductive(self, name):
        p, cands, res = baseline(name)
        v = failing_asserts(cut_loops(p, cands, res.proved).program)
        assert not {candidate_of_tag(t) for t in v.failing} - {None}
        assert v.failing == res.verdict_after.failing

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(["fig3", "fig4", "evens", "noaccess", "reduction", "block_range"]), st.data())
    def test_preseeded_pool_changes_nothing(self, name, data):
        p, cands, res = baseline(name)
        unprovable = sorted({c.id for c in cands} - res.proved)
        seed = data.draw(st.sets(st.sampled_from(unprovable))) if unprovable else set()
        pool = RefutationPool()
        for cid in sorted(seed):
            pool.publish(cid, "X")
        again = houdini_fixpoint(p, cands, pool)
        assert again.proved == res.proved
        assert {r.candidate for r in again.refuted if r.engine == "X"} == seed

    def test_all_unprovable_preseeded_takes_one_round(self):
        p, cands, res = baseline("noaccess")
        pool = RefutationPool()
        for cid in sorted({c.id for c in cands} - res.proved):
            pool.publish(cid, "X")
        assert houdini_fixpoint(p, cands, pool).rounds == 1

    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from(["fig3", "fig4", "evens", "noaccess", "reduction", "nested"]), st.randoms())
    def test_order_insensitive(self, name, rnd):
        p, cands, res = baseline(name)
        perm = list(range(len(cands)))
        rnd.shuffle(perm)
        shuffled = [Candidate(perm[k], c.rule, c.loop_id, c.expr) for k, c in enumerate(cands)]
        shuffled.sort(key=lambda c: c.id)
        again = houdini_fixpoint(p, shuffled)
        assert {c.key for c in shuffled if c.id in again.proved} == {c.key for c in cands if c.id in res.proved}

    def test_user_asserts_checked_with_proved_set(self):
        p, cands, res = baseline("evens")
        assert res.verified
        without = houdini_fixpoint(p, [c for c in cands if c.rule != "r10"])
        assert not without.verified


class TestBruteForce:
    @pytest.mark.parametrize("name", ["fig3", "fig4", "evens", "countdown"])
    def test_unique_maximal_inductive_subset(self, name):
        p, cands, res = baseline(name)
        ids = [c.id for c in cands]
        inductive_sets = []
        for mask in range(1 << len(ids)):
            s = {ids[k] for k in range(len(ids)) if mask >> k & 1}
            v = failing_asserts(cut_loops(p, cands, s).program)
            if not ({candidate_of_tag(t) for t in v.failing} & s):
                inductive_sets.append(s)
        assert set(res.proved) in inductive_sets
        assert all(s <= res.proved for s in inductive_sets)


def test_config_not_mutated():
    cfg = CheckerConfig(timeout=100.0)
    houdini_fixpoint(load("fig4"), [], cfg=cfg)
    assert cfg == dataclasses.replace(cfg) and cfg.timeout == 100.0
