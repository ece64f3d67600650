"""Corpus experiments: triviality, rule generality, hit rate, essentiality,
influence, precision gain, engine similarity, throughput and speedups."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Union

from . import __version__
from .checker import Cancelled, CheckerConfig, CheckTimeout, failing_asserts
from .houdini import HoudiniError, HoudiniResult, houdini_fixpoint
from .ir import Program
from .orchestrator import EngineId, RunConfig, run_engine, run_parallel, run_sequential
from .dynrunner import DynConfig
from .parser import expr_str, parse_file
from .rulegen import RULE_IDS, RuleConfig, generate_candidates
from .transforms import cut_loops, strip_invariants

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
INTERVALS = ("(-inf,-2)", "[-2,-1)", "[1,1]", "(1,2]", "(2,inf)")
PARALLEL = "DYN||SBASE||H"
DEFAULT_ENGINES = ("SBASE", "SSTEP", "LU", "DYN")


@dataclass(frozen=True)
class MetricsConfig:
    seed: int = 0
    timeout: Optional[float] = 600.0
    bit_width: Optional[int] = None
    rules: frozenset = frozenset(RULE_IDS)
    engines: tuple = DEFAULT_ENGINES  # "LU" means LU(unroll_depth)
    unroll_depth: int = 1
    backend: str = "enumerate"
    fast_threshold: float = 2.0
    parallel: bool = True

    def checker(self) -> CheckerConfig:
        return CheckerConfig(timeout=self.timeout, backend=self.backend)

    def engine_ids(self) -> list[EngineId]:
        out = []
        for e in self.engines:
            eid = EngineId("LU", self.unroll_depth) if str(e).upper() == "LU" else EngineId.parse(str(e))
            if eid not in out:
                out.append(eid)
        return out


# ------------------------------------------------------------- single values


def classify_trivial(p: Program, cfg: Optional[CheckerConfig] = None) -> bool:
    """True iff the program verifies with every invariant and candidate
    dropped. A timeout or resource exhaustion counts as non-trivial."""
    bare = cut_loops(strip_invariants(p), [], []).program
    try:
        return failing_asserts(bare, cfg).valid
    except (CheckTimeout, Cancelled):
        return False


def jaccard(a: Iterable, b: Iterable) -> Optional[Fraction]:
    """|A ∩ B| / |A ∪ B|; None when both sets are empty."""
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return None
    return Fraction(len(a & b), len(union))


def _ratio(num: int, den: int) -> Union[float, str]:
    return "n/a" if den == 0 else round(100.0 * num / den, 1)


def speedup_ratio(baseline: float, config: float) -> float:
    """Signed ratio: a speedup s >= 1 is +s, a slowdown is -(config/baseline)."""
    if config <= 0 and baseline <= 0:
        return 1.0
    if config <= baseline:
        return baseline / config if config > 0 else float("inf")
    return -(config / baseline) if baseline > 0 else float("-inf")


def speedup_interval(ratio: float) -> str:
    if ratio == 1.0:
        return "[1,1]"
    if ratio > 2:
        return "(2,inf)"
    if ratio > 1:
        return "(1,2]"
    if ratio < -2:
        return "(-inf,-2)"
    return "[-2,-1)"


def speedup_report(baseline: dict, config: dict, threshold: float = 2.0) -> dict:
    """Histogram over the five intervals, split by baseline <= threshold (fast)
    or above (slow). Times of None mean a timeout; two timeouts are a break-even."""
    hist = {iv: {"fast": 0, "slow": 0} for iv in INTERVALS}
    for name, b in baseline.items():
        c = config.get(name)
        if b is None and c is None:
            iv, speed = "[1,1]", "slow"
        else:
            iv = speedup_interval(speedup_ratio(float("inf") if b is None else b,
                                                float("inf") if c is None else c))
            speed = "slow" if b is None or b > threshold else "fast"
        hist[iv][speed] += 1
    return hist


def throughput(runs: Iterable[tuple[int, float]]) -> float:
    """Refutations per second over (count, duration) pairs."""
    count = 0
    total = 0.0
    for n, d in runs:
        count += n
        total += d
    if count == 0:
        return 0.0
    return count / max(total, time.get_clock_info("monotonic").resolution)


# ------------------------------------------------------------- per program


def _houdini(p: Program, cands, cfg: CheckerConfig):
    start = time.monotonic()
    try:
        res = houdini_fixpoint(p, cands, None, cfg)
    except HoudiniError as exc:
        log.info("%s: %s", p.name, exc)
        return None, exc.kind, time.monotonic() - start
    return res, ("verified" if res.verified else "failed"), res.check_time


def _provable_by_rule(cands, res: Optional[HoudiniResult]) -> Optional[dict]:
    if res is None:
        return None
    out: dict[str, int] = {}
    for c in cands:
        out[c.rule] = out.get(c.rule, 0) + (1 if c.id in res.proved else 0)
    return out


def analyze_program(p: Program, cfg: Optional[MetricsConfig] = None, source: str = "") -> dict:
    """Run the whole experiment matrix on one program.

    Returns a JSON-ready dict; everything that depends on wall-clock time is
    under its ``timing`` key.
    """
    cfg = cfg or MetricsConfig()
    if cfg.bit_width is not None:
        p = p.with_width(cfg.bit_width)
    ccfg = cfg.checker()
    rcfg = RuleConfig(enabled=frozenset(cfg.rules))
    cands = generate_candidates(p, rcfg)
    timing: dict = {"engines": {}}
    out: dict = {"name": p.name, "file": source, "bit_width": p.bit_width}
    out["trivial"] = classify_trivial(p, ccfg)

    base, outcome, t_base = _houdini(p, cands, ccfg)
    timing["H"] = t_base if base is not None else None
    out["outcome"] = outcome
    out["candidates"] = [
        {"id": c.id, "rule": c.rule, "loop": c.loop_id, "expr": expr_str(c.expr),
         "proved": (c.id in base.proved) if base is not None else None}
        for c in cands
    ]
    counts = {r: 0 for r in RULE_IDS}
    for c in cands:
        if c.rule in counts:
            counts[c.rule] += 1
    out["rule_counts"] = counts
    provable = _provable_by_rule(cands, base)
    out["provable"] = None if provable is None else {r: provable.get(r, 0) for r in RULE_IDS}
    if base is not None:
        out["houdini"] = {"rounds": base.rounds,
                          "refuted": [[r.candidate, r.round, r.engine] for r in base.refuted],
                          "failing_user_asserts": sorted(base.verdict_after.failing)}

    # each rule disabled in turn: essentiality and influence
    essential: list[str] = []
    influence: dict[str, list[str]] = {}
    increases: list[list[str]] = []
    if base is not None:
        for r in RULE_IDS:
            if counts[r] == 0:
                continue
            sub = generate_candidates(p, rcfg.without(r))
            res, oc, _ = _houdini(p, sub, ccfg)
            if outcome == "verified" and oc != "verified":
                essential.append(r)
            after = _provable_by_rule(sub, res)
            if after is None:
                continue
            changed = [s for s in RULE_IDS if s != r and counts[s] and after.get(s, 0) != provable.get(s, 0)]
            if changed:
                influence[r] = changed
            increases += [[r, s] for s in changed if after.get(s, 0) > provable.get(s, 0)]
    out["essential"] = essential
    out["influence"] = influence
    out["influence_increases"] = increases

    # no generation rules at all: the precision baseline
    bare = generate_candidates(p, RuleConfig(enabled=frozenset()))
    _, oc_none, _ = _houdini(p, bare, ccfg)
    out["verified_without_rules"] = oc_none == "verified"

    # refutation engines and configurations
    rc = RunConfig(checker=ccfg, dyn=DynConfig(seed=cfg.seed))
    engines: dict = {}
    agree: dict = {}
    config_times: dict = {}
    for e in cfg.engine_ids():
        o = run_engine(e, p, cands, rc)
        engines[str(e)] = {"refuted": sorted(o.refuted), "error": o.error}
        timing["engines"][str(e)] = {"duration": o.duration, "count": o.count}
        if base is None:
            continue
        start = time.monotonic()
        try:
            seq = run_sequential([e], p, cands, rc)
        except HoudiniError:
            config_times[f"{e};H"] = None
            continue
        config_times[f"{e};H"] = time.monotonic() - start
        agree[f"{e};H"] = seq.proved == base.proved
    if cfg.parallel and base is not None:
        try:
            par = run_parallel(["DYN", "SBASE"], p, cands, dataclasses.replace(rc, scheduler_seed=cfg.seed))
            config_times[PARALLEL] = par.completion_time
            agree[PARALLEL] = par.proved == base.proved
        except HoudiniError:
            config_times[PARALLEL] = None
    out["engines"] = engines
    out["configurations_agree"] = agree
    timing["configurations"] = config_times
    out["timing"] = timing
    return out


# ------------------------------------------------------------- aggregation


def rule_generality(programs: list[dict], rules: Iterable[str] = RULE_IDS) -> dict:
    table = {r: {"nontrivial": 0, "trivial": 0, "total": 0} for r in rules}
    for pr in programs:
        for r in table:
            if pr["rule_counts"].get(r, 0) > 0:
                table[r]["trivial" if pr["trivial"] else "nontrivial"] += 1
                table[r]["total"] += 1
    return table


def rule_hit_rate(programs: list[dict], rules: Iterable[str] = RULE_IDS) -> dict:
    """Provable over emitted candidates per rule, over programs whose
    baseline run completed."""
    out = {}
    for r in rules:
        emitted = proved = 0
        for pr in programs:
            if pr["provable"] is None:
                continue
            emitted += pr["rule_counts"].get(r, 0)
            proved += pr["provable"].get(r, 0)
        out[r] = _ratio(proved, emitted)
    return out


def rule_essentiality(programs: list[dict], rules: Iterable[str] = RULE_IDS) -> dict:
    out = {r: 0 for r in rules}
    for pr in programs:
        for r in pr["essential"]:
            if r in out:
                out[r] += 1
    return out


def rule_influence(programs: list[dict], rules: Iterable[str] = RULE_IDS) -> dict:
    """(r, s) -> number of programs where disabling r changed the hit rate of s."""
    rules = list(rules)
    out = {r: {s: 0 for s in rules if s != r} for r in rules}
    for pr in programs:
        for r, changed in pr["influence"].items():
            for s in changed:
                if r in out and s in out[r]:
                    out[r][s] += 1
    return out


def precision_gain(programs: list[dict]) -> dict:
    out = {"rules_disabled": {"trivial": 0, "nontrivial": 0},
           "rules_enabled": {"trivial": 0, "nontrivial": 0}}
    for pr in programs:
        kind = "trivial" if pr["trivial"] else "nontrivial"
        if pr["verified_without_rules"]:
            out["rules_disabled"][kind] += 1
        if pr["outcome"] == "verified":
            out["rules_enabled"][kind] += 1
    out["net_gain"] = (sum(out["rules_enabled"].values()) - sum(out["rules_disabled"].values()))
    return out


def engine_refutations(programs: list[dict], engine: str) -> set:
    """Refuted candidates of one engine as (program, candidate) pairs. "H"
    stands for every candidate baseline Houdini did not prove."""
    out = set()
    for pr in programs:
        if engine == "H":
            if pr["provable"] is None:
                continue
            out |= {(pr["name"], c["id"]) for c in pr["candidates"] if not c["proved"]}
        elif engine in pr["engines"]:
            out |= {(pr["name"], cid) for cid in pr["engines"][engine]["refuted"]}
    return out


def jaccard_table(programs: list[dict], engines: list[str]) -> dict:
    names = list(engines) + ["H"]
    out = {}
    sets = {e: engine_refutations(programs, e) for e in names}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            j = jaccard(sets[a], sets[b])
            out[f"{a}/{b}"] = "n/a" if j is None else round(float(j), 6)
    return out


def build_report(programs: list[dict], cfg: MetricsConfig, warnings: Optional[list] = None,
                 total_time: float = 0.0) -> dict:
    engines = [str(e) for e in cfg.engine_ids()]
    timing_programs = {}
    stripped = []
    for pr in programs:
        pr = dict(pr)
        timing_programs[pr["name"]] = pr.pop("timing")
        stripped.append(pr)
    thr = {}
    for e in engines:
        runs = [(t["engines"][e]["count"], t["engines"][e]["duration"])
                for t in timing_programs.values() if e in t["engines"]]
        thr[e] = throughput(runs)
    base_times = {n: t["H"] for n, t in timing_programs.items()}
    speedups = {}
    config_names = [f"{e};H" for e in engines] + ([PARALLEL] if cfg.parallel else [])
    for c in config_names:
        speedups[c] = speedup_report(base_times, {n: t["configurations"].get(c)
                                                  for n, t in timing_programs.items()},
                                     cfg.fast_threshold)
    return {
        "kind": "metrics",
        "schema_version": SCHEMA_VERSION,
        "tool": f"invgen {__version__}",
        "config": {
            "seed": cfg.seed, "timeout": cfg.timeout, "bit_width": cfg.bit_width,
            "rules": sorted(cfg.rules, key=RULE_IDS.index), "engines": engines,
            "unroll_depth": cfg.unroll_depth, "backend": cfg.backend,
            "fast_threshold": cfg.fast_threshold,
        },
        "programs": stripped,
        "generality": rule_generality(stripped),
        "hit_rate": rule_hit_rate(stripped),
        "essentiality": rule_essentiality(stripped),
        "influence": rule_influence(stripped),
        "influence_increases": [[pr["name"]] + inc for pr in stripped for inc in pr["influence_increases"]],
        "precision": precision_gain(stripped),
        "jaccard": jaccard_table(stripped, engines),
        "warnings": list(warnings or []),
        "timing": {"total": total_time, "programs": timing_programs,
                   "throughput": thr, "speedup": speedups},
    }


def _analyze_file(args) -> dict:
    path, cfg = args
    return analyze_program(parse_file(path), cfg, source=Path(path).name)


def analyze_corpus(paths: Iterable[Union[str, Path]], cfg: Optional[MetricsConfig] = None,
                   workers: int = 1) -> dict:
    """Analyze every program (one per worker process) and aggregate."""
    cfg = cfg or MetricsConfig()
    paths = sorted(str(p) for p in paths)
    warnings = []
    if not paths:
        warnings.append("no .mvl programs found")
    start = time.monotonic()
    jobs = [(p, cfg) for p in paths]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            programs = list(ex.map(_analyze_file, jobs))
    else:
        programs = [_analyze_file(j) for j in jobs]
    return build_report(programs, cfg, warnings, time.monotonic() - start)


def corpus_files(directory: Union[str, Path]) -> list[Path]:
    return sorted(Path(directory).glob("*.mvl"))


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


# ------------------------------------------------------------- output


def strip_timing(report: dict) -> dict:
    """Copy of a report without wall-clock fields, for comparisons."""
    out = dict(report)
    out.pop("timing", None)
    return out


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def influence_csv(report: dict) -> str:
    rules = list(RULE_IDS)
    lines = ["disabled," + ",".join(rules)]
    for r in rules:
        row = report["influence"].get(r, {})
        lines.append(r + "," + ",".join("" if s == r else str(row.get(s, 0)) for s in rules))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.1f}%"
    return str(v)


def to_text(report: dict) -> str:
    lines = [f"{len(report['programs'])} programs", ""]
    lines.append(f"{'rule':<6}{'nontriv':>9}{'trivial':>9}{'total':>7}{'hit':>9}{'essential':>11}")
    for r in RULE_IDS:
        g = report["generality"][r]
        lines.append(f"{r:<6}{g['nontrivial']:>9}{g['trivial']:>9}{g['total']:>7}"
                     f"{_fmt(report['hit_rate'][r]):>9}{report['essentiality'][r]:>11}")
    lines.append("")
    lines.append(f"{'program':<16}{'trivial':>8}{'outcome':>10}{'cands':>7}{'proved':>8}")
    for pr in report["programs"]:
        proved = sum(1 for c in pr["candidates"] if c["proved"])
        lines.append(f"{pr['name']:<16}{str(pr['trivial']).lower():>8}{pr['outcome']:>10}"
                     f"{len(pr['candidates']):>7}{proved:>8}")
    pg = report["precision"]
    lines += ["", "verified without rules: {} trivial, {} non-trivial".format(
        pg["rules_disabled"]["trivial"], pg["rules_disabled"]["nontrivial"]),
        "verified with all rules: {} trivial, {} non-trivial".format(
        pg["rules_enabled"]["trivial"], pg["rules_enabled"]["nontrivial"]), ""]
    lines.append("jaccard")
    for pair, v in report["jaccard"].items():
        lines.append(f"  {pair:<16}{v}")
    t = report.get("timing")
    if t:
        lines.append("")
        lines.append("throughput (refutations/s)")
        for e, v in t["throughput"].items():
            lines.append(f"  {e:<16}{v:.1f}")
        lines.append("")
        lines.append("speedup over H  " + "  ".join(f"{iv:>11}" for iv in INTERVALS))
        for c, hist in t["speedup"].items():
            cells = "  ".join(f"{hist[iv]['fast']:>5}/{hist[iv]['slow']:<5}" for iv in INTERVALS)
            lines.append(f"  {c:<14}{cells}")
        lines.append("  (cells are fast/slow counts)")
    for w in report["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"
