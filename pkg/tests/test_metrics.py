import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN, load, validate
from invgen.checker import CheckerConfig
from invgen.metrics import (
    INTERVALS, PARALLEL, MetricsConfig, analyze_program, classify_trivial, influence_csv, jaccard,
    rule_essentiality, rule_generality, rule_hit_rate, speedup_interval, speedup_ratio,
    speedup_report, strip_timing, throughput, to_json, to_text,
)
from invgen.parser import parse
from invgen.rulegen import RULE_IDS

small_sets = st.sets(st.integers(0, 20), max_size=10)


def program(name, counts, provable=None, trivial=False, essential=()):
    rc = {r: 0 for r in RULE_IDS}
    rc.update(counts)
    pv = None if provable is None else {r: provable.get(r, 0) for r in RULE_IDS}
    return {"name": name, "trivial": trivial, "rule_counts": rc, "provable": pv,
            "essential": list(essential)}


class TestTrivial:
    def test_fig4_needs_invariants(self):
        assert not classify_trivial(load("fig4"))

    def test_loop_without_asserts(self):
        p = parse("kernel k width 4 { local i : bv; while (i < 3) { i := i + 1; } }")
        assert classify_trivial(p)

    def test_loop_free_passing_assert(self):
        p = parse("kernel k width 4 { local x : bv; havoc x; assert x + 0 == x; }")
        assert classify_trivial(p)

    def test_timeout_is_nontrivial(self):
        assert not classify_trivial(load("transpose"), CheckerConfig(timeout=1e-6))


class TestJaccard:
    def test_examples(self):
        assert jaccard({1, 2}, {2, 3}) == Fraction(1, 3)
        assert jaccard({1, 2}, {1, 2}) == 1
        assert jaccard({1}, {2}) == 0
        assert jaccard(set(), set()) is None

    @given(small_sets, small_sets)
    def test_symmetric_and_bounded(self, a, b):
        j = jaccard(a, b)
        assert j == jaccard(b, a)
        if a or b:
            assert 0 <= j <= 1
            assert (j == 1) == (a == b)


class TestThroughput:
    def test_examples(self):
        assert throughput([(10, 5.0)]) == 2.0
        assert throughput([(4, 1.0), (6, 4.0)]) == 2.0
        assert throughput([(0, 3.0)]) == 0.0
        assert throughput([]) == 0.0

    def test_zero_duration(self):
        assert throughput([(3, 0.0)]) > 0


class TestSpeedup:
    @pytest.mark.parametrize("b,c,iv", [
        (10.0, 4.0, "(2,inf)"), (1.0, 1.0, "[1,1]"), (2.0, 4.0, "[-2,-1)"),
        (3.0, 2.0, "(1,2]"), (1.0, 5.0, "(-inf,-2)"), (0.0, 0.0, "[1,1]"),
    ])
    def test_intervals(self, b, c, iv):
        assert speedup_interval(speedup_ratio(b, c)) == iv

    def test_report_split(self):
        hist = speedup_report({"a": 10.0, "b": 1.0, "c": None}, {"a": 4.0, "b": 1.0, "c": None})
        assert hist["(2,inf)"] == {"fast": 0, "slow": 1}
        assert hist["[1,1]"] == {"fast": 1, "slow": 1}

    def test_timeout_in_config_only(self):
        hist = speedup_report({"a": 1.0}, {"a": None})
        assert hist["(-inf,-2)"]["fast"] == 1

    @given(st.dictionaries(st.text(max_size=3),
                           st.tuples(st.none() | st.floats(0, 100), st.none() | st.floats(0, 100))))
    def test_partition(self, times):
        hist = speedup_report({k: b for k, (b, _) in times.items()}, {k: c for k, (_, c) in times.items()})
        assert set(hist) == set(INTERVALS)
        assert sum(v["fast"] + v["slow"] for v in hist.values()) == len(times)


class TestAggregates:
    def test_hit_rate(self):
        progs = [program("p", {"r9": 3}, {"r9": 2})]
        rates = rule_hit_rate(progs)
        assert rates["r9"] == 66.7
        assert rates["r0"] == "n/a"

    def test_hit_rate_skips_unfinished(self):
        progs = [program("p", {"r9": 3}, {"r9": 2}), program("q", {"r9": 5}, None)]
        assert rule_hit_rate(progs)["r9"] == 66.7

    def test_generality(self):
        progs = [program("a", {"r9": 1}), program("b", {"r9": 2}, trivial=True), program("c", {})]
        g = rule_generality(progs)
        assert g["r9"] == {"nontrivial": 1, "trivial": 1, "total": 2}
        assert g["r0"] == {"nontrivial": 0, "trivial": 0, "total": 0}

    def test_essentiality(self):
        progs = [program("a", {}, essential=["r9"]), program("b", {}, essential=["r9", "r10"])]
        e = rule_essentiality(progs)
        assert e["r9"] == 2 and e["r10"] == 1 and e["r0"] == 0

    def test_fig4_r9(self):
        pr = analyze_program(load("fig4"), MetricsConfig(engines=()))
        assert pr["rule_counts"]["r9"] == 4
        assert rule_hit_rate([pr])["r9"] == 50.0
        assert pr["essential"] == []

    def test_disabled_rule_never_emitted(self):
        cfg = MetricsConfig(engines=(), rules=frozenset(RULE_IDS) - {"r9"})
        pr = analyze_program(load("fig4"), cfg)
        assert pr["rule_counts"]["r9"] == 0
        assert rule_generality([pr])["r9"]["total"] == 0

    def test_evens_influence(self):
        pr = analyze_program(load("evens"), MetricsConfig(engines=()))
        assert pr["influence"] == {"r10": ["r9"]}
        assert pr["influence_increases"] == []
        assert pr["essential"] == ["r9", "r10"]


class TestCorpusReport:
    def test_schema(self, metrics_report):
        validate(metrics_report)

    def test_golden(self, metrics_report):
        golden = json.loads((GOLDEN / "metrics_seed0.json").read_text())
        assert json.loads(to_json(strip_timing(metrics_report))) == golden

    def test_hit_rate_consistency(self, metrics_report):
        progs = [pr for pr in metrics_report["programs"] if pr["provable"] is not None]
        by_rule = sum(sum(pr["provable"].values()) for pr in progs)
        by_candidate = sum(1 for pr in progs for c in pr["candidates"] if c["proved"] and c["rule"] != "pragma")
        assert by_rule == by_candidate

    def test_histograms_partition_corpus(self, metrics_report):
        n = len(metrics_report["programs"])
        for hist in metrics_report["timing"]["speedup"].values():
            assert sum(v["fast"] + v["slow"] for v in hist.values()) == n
        assert PARALLEL in metrics_report["timing"]["speedup"]

    def test_generality_matches_counts(self, metrics_report):
        for r, g in metrics_report["generality"].items():
            assert g["total"] == sum(1 for pr in metrics_report["programs"] if pr["rule_counts"][r])

    def test_influence_diagonal_absent(self, metrics_report):
        for r, row in metrics_report["influence"].items():
            assert r not in row

    def test_csv(self, metrics_report):
        lines = influence_csv(metrics_report).splitlines()
        assert lines[0] == "disabled," + ",".join(RULE_IDS)
        assert len(lines) == len(RULE_IDS) + 1
        assert all(len(line.split(",")) == len(RULE_IDS) + 1 for line in lines)

    def test_text(self, metrics_report):
        text = to_text(metrics_report)
        assert text.startswith(f"{len(metrics_report['programs'])} programs")
        for r in RULE_IDS:
            assert f"\n{r} " in text
