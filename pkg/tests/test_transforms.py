import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load
from invgen.checker import failing_asserts
from invgen.ir import (
    Assert, Assume, AssumeViolation, BoolLit, BudgetExhausted, Candidate, Havoc, If, Interpreter,
    While, eval_expr, initial_state, walk,
)
from invgen.parser import parse
from invgen.prng import SplitMix64
from invgen.rulegen import generate_candidates
from invgen.transforms import (
    TransformError, candidate_of_tag, compute_modset, cut_loops, instrument_assert,
    is_loop_free, parse_tag, slice_base, slice_step, strip_invariants, unroll,
)

FIG2 = parse("""
kernel fig2 width 4 {
  local i : bv;
  local n : bv;
  n := 5;
  while (i < n)
    invariant i <= n;
  {
    i := i + 1;
  }
}
""")

NESTED = parse("""
kernel nest width 4 {
  local i : bv;
  local j : bv;
  local k : bv;
  while (i < 3) {
    j := 0;
    while (j < 2) {
      k := k + j;
      j := j + 1;
    }
    i := i + 1;
  }
}
""")

DETERMINISTIC = ["countdown", "evens", "fig3", "fig4", "reduction"]


def fig4_with(exprs):
    """fig4 without user invariants, with the given candidate pragmas."""
    p = strip_invariants(load("fig4"))
    cands = []
    for k, text in enumerate(exprs):
        e = parse(f"kernel t width 6 {{ local i : bv; local j : bv; assert {text}; }}").body[0].cond
        cands.append(Candidate(k, "pragma", "L0", e))
    return p, cands


def failing(prog):
    return set(failing_asserts(prog).failing)


class TestTags:
    def test_parse(self):
        assert parse_tag("base:L0:c3") == ("base", "L0", "c", 3)
        assert parse_tag("step:L2:u0") == ("step", "L2", "u", 0)
        assert parse_tag("a0") is None

    def test_candidate_of_tag(self):
        assert candidate_of_tag("unroll:L1:c12") == 12
        assert candidate_of_tag("base:L0:u1") is None


class TestModset:
    def test_fig4_body(self):
        w = [s for s in load("fig4").body if isinstance(s, While)][0]
        assert compute_modset(w.body) == {"i", "j"}

    def test_log_write_adds_ghosts(self):
        p = parse("kernel k width 4 { local i : bv; array out; while (i < 2) { log_write out[i]; i := i + 1; } }")
        w = p.body[0]
        assert compute_modset(w.body) == {"i", "write_has_occurred(out)", "write_offset(out)"}

    def test_empty_body(self):
        assert compute_modset(()) == frozenset()

    @pytest.mark.parametrize("name", ["fig3", "fig4", "nested", "reduction", "evens", "scan", "strided"])
    def test_body_changes_nothing_else(self, name):
        p = load(name)
        for w in [s for s in walk(p.body) if isinstance(s, While)]:
            mod = compute_modset(w.body)
            for seed in range(20):
                rng = SplitMix64(seed)
                interp = Interpreter(p, rng, iteration_budget=50)
                s = initial_state(p, {d.name: rng.below(1 << p.bit_width) for d in p.params})
                for k in s.env:
                    if not isinstance(s.env[k], bool):
                        s.env[k] = rng.below(1 << p.bit_width)
                before = dict(s.env)
                try:
                    interp.exec_block(w.body, s)
                except (AssumeViolation, BudgetExhausted):
                    continue
                changed = {k for k in s.env if s.env[k] != before[k]}
                assert changed <= mod


class TestCutLoops:
    def test_single_invariant_scaffold(self):
        out = cut_loops(FIG2, [], []).program.body
        assert [type(s).__name__ for s in out] == ["Assign", "Assert", "Havoc", "Assume", "If"]
        base, havoc, assume, branch = out[1:]
        assert base.tag == "base:L0:u0"
        assert [t.name for t in havoc.targets] == ["i"]
        assert assume.cond == base.cond
        assert branch.cond == FIG2.body[1].guard
        assert [type(s).__name__ for s in branch.then] == ["Assign", "Assert", "Assume"]
        assert branch.then[1].tag == "step:L0:u0"
        assert branch.then[2] == Assume(BoolLit(False))
        assert branch.orelse == ()

    def test_no_invariants(self):
        p = strip_invariants(FIG2)
        out = cut_loops(p, [], []).program.body
        assert [type(s).__name__ for s in out] == ["Assign", "Havoc", "If"]
        assert out[2].then[-1] == Assume(BoolLit(False))

    def test_nested_inner_first(self):
        c = cut_loops(NESTED, [], [])
        outer_havoc = c.program.body[0]
        assert isinstance(outer_havoc, Havoc)
        inner = [w for w in walk(NESTED.body) if isinstance(w, While)][1]
        assert compute_modset(inner.body) <= {t.name for t in outer_havoc.targets}
        assert is_loop_free(c.program)

    def test_inactive_candidates_absent(self):
        p, cands = fig4_with(["i <= 10", "j <= 20"])
        c = cut_loops(p, cands, [1])
        tags = {s.tag for s in walk(c.program.body) if isinstance(s, Assert)}
        assert "base:L0:c1" in tags and "base:L0:c0" not in tags
        assert c.assume_sites == {"L0": (1,)}
        assert set(c.check_sites) == {1}

    def test_unknown_loop(self):
        with pytest.raises(TransformError):
            cut_loops(FIG2, [Candidate(0, "pragma", "L7", BoolLit(True))], [0])

    @pytest.mark.parametrize("name", ["fig3", "fig4", "nested", "transpose", "scan", "noaccess"])
    def test_corpus_output_is_loop_free(self, name):
        p = load(name)
        cands = generate_candidates(p)
        c = cut_loops(p, cands, [x.id for x in cands])
        assert is_loop_free(c.program)
        tags = [s.tag for s in walk(c.program.body) if isinstance(s, Assert)]
        for x in cands:
            assert tags.count(f"base:{x.loop_id}:c{x.id}") == 1
            assert tags.count(f"step:{x.loop_id}:c{x.id}") == 1


class TestSlices:
    def test_base_slice_drops_step_asserts(self):
        p, cands = fig4_with(["i <= 0"])
        c = slice_base(cut_loops(p, cands, [0]))
        tags = {s.tag for s in walk(c.program.body) if isinstance(s, Assert)}
        assert tags == {"base:L0:c0", "a0"}

    def test_step_only_failure_invisible_to_base(self):
        p, cands = fig4_with(["i <= 0"])
        c = cut_loops(p, cands, [0])
        assert "step:L0:c0" in failing(c.program)
        assert not {t for t in failing(slice_base(c).program) if t.endswith("c0")}

    def test_base_only_failure_invisible_to_step(self):
        p, cands = fig4_with(["i != 0"])
        c = cut_loops(p, cands, [0])
        assert "base:L0:c0" in failing(c.program)
        assert not {t for t in failing(slice_step(c).program) if t.endswith("c0")}

    def test_loop_free_program_unchanged(self):
        p = load("clamp")
        c = cut_loops(p, [], [])
        assert slice_base(c).program == p
        assert slice_step(c).program == p

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(["fig3", "fig4", "evens", "countdown", "noaccess", "block_range"]), st.data())
    def test_slices_under_approximate(self, name, data):
        p = load(name)
        cands = generate_candidates(p)
        active = data.draw(st.sets(st.sampled_from([c.id for c in cands]))) if cands else set()
        c = cut_loops(p, cands, active)
        whole = failing(c.program)
        assert failing(slice_base(c).program) | failing(slice_step(c).program) <= whole


def concrete_unroll_failures(p, cands, k):
    """Tags an unrolled check should flag, from one concrete run of a
    deterministic single-loop program."""
    out = set()
    visits = {}

    def hook(w, s):
        n = visits.get(w.loop_id, 0)
        visits[w.loop_id] = n + 1
        if n >= k or not eval_expr(w.guard, s, None):
            return
        for idx, inv in enumerate(w.user_invariants):
            if not eval_expr(inv.expr, s, None):
                out.add(f"unroll:{w.loop_id}:u{idx}")
        for c in cands:
            if c.loop_id == w.loop_id and not eval_expr(c.expr, s, None):
                out.add(f"unroll:{w.loop_id}:c{c.id}")

    s = Interpreter(p, SplitMix64(0), loop_hook=hook).run({})
    return out | {t for t in s.failures if ":" not in t}


class TestUnroll:
    def test_first_iteration_refutes_nonzero(self):
        p, cands = fig4_with(["i != 0"])
        assert "unroll:L0:c0" in failing(unroll(p, 1, cands, [0]))

    def test_guard_initially_false(self):
        p = parse("kernel k width 4 { local i : bv; i := 5; while (i < 3) candidate i == 0; { i := i + 1; } }")
        cands = generate_candidates(p)
        assert failing(unroll(p, 2, cands, [c.id for c in cands])) == set()

    def test_depth_two_structure(self):
        p = strip_invariants(FIG2)
        out = unroll(p, 2, [], [])
        first = out.body[1]
        assert isinstance(first, If)
        second = first.then[-1]
        assert isinstance(second, If) and second.cond == first.cond
        stop = second.then[-1]
        assert stop.then == (Assume(BoolLit(False)),)

    def test_size_guard(self):
        p = load("nested")
        with pytest.raises(TransformError):
            unroll(p, 40, [], [], limit=500)

    def test_depth_must_be_positive(self):
        with pytest.raises(TransformError):
            unroll(FIG2, 0, [], [])

    @pytest.mark.parametrize("name", DETERMINISTIC)
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_matches_concrete_runs(self, name, k):
        p = load(name)
        cands = generate_candidates(p)
        got = failing(unroll(p, k, cands, [c.id for c in cands]))
        assert got == concrete_unroll_failures(p, cands, k)


class TestInstrumentAssert:
    def test_single_assert_unchanged(self):
        p = load("fig4")
        assert instrument_assert(p, "a0") == p

    def test_other_asserts_become_assumes(self):
        p = load("clamp")
        out = instrument_assert(p, "a1")
        kinds = [(type(s).__name__, getattr(s, "tag", None)) for s in out.body[-2:]]
        assert kinds == [("Assume", None), ("Assert", "a1")]

    def test_drop_mode(self):
        out = instrument_assert(load("clamp"), "a1", others="drop")
        assert [getattr(s, "tag", None) for s in out.body if isinstance(s, (Assert, Assume))][-1:] == ["a1"]

    def test_isolated_base_tag(self):
        p, cands = fig4_with(["i != 0", "j <= 20"])
        cut = cut_loops(p, cands, [0, 1]).program
        iso = instrument_assert(cut, "base:L0:c0", others="drop")
        assert failing(iso) == {"base:L0:c0"}

    def test_unknown_tag(self):
        with pytest.raises(TransformError):
            instrument_assert(load("fig4"), "a9")


def test_strip_invariants_removes_all():
    p = strip_invariants(load("fig3"))
    assert all(not w.invariants for w in walk(p.body) if isinstance(w, While))
