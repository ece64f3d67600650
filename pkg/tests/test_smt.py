import pytest
from hypothesis import given, settings

from conftest import load, solver_command
from invgen.checker import CheckerConfig, CheckerError, failing_asserts, run_solver
from invgen.parser import parse
from invgen.rulegen import generate_candidates
from invgen.smt import emit_smt
from invgen.transforms import cut_loops, strip_invariants
from progs import loop_free_programs

SOLVER = solver_command()
needs_solver = pytest.mark.skipif(SOLVER is None, reason="no SMT solver available")


def fig4_cut_with_bound():
    """fig4 with its invariants replaced by the r9 candidates."""
    p = strip_invariants(load("fig4"))
    cands = [c for c in generate_candidates(p) if c.rule == "r9"]
    return cut_loops(p, cands, [c.id for c in cands]), cands


class TestEmit:
    def test_script_shape(self):
        s = emit_smt(parse("kernel k width 4 { local x : bv; havoc x; assert x < 3; }"), "a0")
        assert "(set-logic QF_BV)" in s
        assert "(_ BitVec 4)" in s
        assert s.rstrip().endswith("(check-sat)")

    def test_unknown_tag(self):
        with pytest.raises(KeyError):
            emit_smt(load("clamp"), "a7")

    def test_deterministic(self):
        cut, cands = fig4_cut_with_bound()
        tag = f"base:L0:c{cands[0].id}"
        assert emit_smt(cut.program, tag) == emit_smt(cut.program, tag)


@needs_solver
class TestSolver:
    def test_assert_false_is_sat(self):
        assert run_solver(SOLVER, emit_smt(parse("kernel k width 4 { assert false; }"), "a0")) == "sat"

    def test_reflexive_equality_is_unsat(self):
        p = parse("kernel k width 4 { local x : bv; havoc x; assert x == x; }")
        assert run_solver(SOLVER, emit_smt(p, "a0")) == "unsat"

    def test_fig4_lower_bound_base_case(self):
        cut, cands = fig4_cut_with_bound()
        lower_i = [c for c in cands if c.expr == parse(
            "kernel t width 6 { local i : bv; assert 0 <= i; }").body[0].cond][0]
        assert run_solver(SOLVER, emit_smt(cut.program, f"base:L0:c{lower_i.id}")) == "unsat"

    def test_later_assume_does_not_hide_failure(self):
        p = parse("kernel k width 4 { local x : bv; havoc x; assert x < 3; assume x < 3; }")
        assert run_solver(SOLVER, emit_smt(p, "a0")) == "sat"

    def test_assume_in_branch_narrows_later_paths(self):
        p = parse("""kernel k width 4 { local x : bv; havoc x;
            if (x < 8) { assume x == 2; } else { assume false; } assert x == 2; }""")
        assert run_solver(SOLVER, emit_smt(p, "a0")) == "unsat"

    def test_bad_command(self):
        with pytest.raises(CheckerError):
            run_solver("/nonexistent/solver -in", "(check-sat)\n")

    @pytest.mark.parametrize("name", ["clamp", "fig4", "evens", "noaccess", "scan"])
    def test_backends_agree_on_corpus(self, name):
        p = load(name)
        cands = generate_candidates(p)
        cut = cut_loops(p, cands, [c.id for c in cands]).program
        smt = failing_asserts(cut, CheckerConfig(backend=f"smt:{SOLVER}"))
        assert smt.failing == failing_asserts(cut).failing

    @settings(max_examples=30, deadline=None)
    @given(loop_free_programs())
    def test_backends_agree_on_random_programs(self, p):
        smt = failing_asserts(p, CheckerConfig(backend=f"smt:{SOLVER}"))
        assert smt.failing == failing_asserts(p).failing
