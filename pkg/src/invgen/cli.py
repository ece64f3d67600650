"""Command-line interface: check, infer, metrics and emit-smt."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .checker import CheckerConfig, CheckerError, CheckTimeout, all_tags, emit_smt, failing_asserts
from .houdini import HoudiniError
from .ir import Program
from .metrics import (
    MetricsConfig, analyze_corpus, corpus_files, default_workers, influence_csv, to_json, to_text,
    classify_trivial,
)
from .orchestrator import EngineId, RunConfig, run_parallel, run_sequential
from .dynrunner import DynConfig
from .parser import ParseError, expr_str, parse_file
from .rulegen import RULE_IDS, RuleConfig, generate_candidates
from .transforms import TransformError, cut_loops

log = logging.getLogger("invgen")

EXIT_OK, EXIT_FAILED, EXIT_RESOURCE, EXIT_USAGE = 0, 1, 2, 3
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def _engines(text: Optional[str], depth: int) -> list[EngineId]:
    if not text:
        return []
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            e = EngineId("LU", depth) if part.upper() == "LU" else EngineId.parse(part)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if e.kind == "H":
            continue
        if e not in out:
            out.append(e)
    return out


def _backend(arg: Optional[str]) -> str:
    if arg is None or arg == "enumerate":
        return "enumerate"
    if arg == "smt":
        cmd = os.environ.get("INVGEN_SOLVER")
        if not cmd:
            raise UsageError("--backend smt needs a command: use smt:<command> or set INVGEN_SOLVER")
        return f"smt:{cmd}"
    if arg.startswith("smt:") and len(arg) > 4:
        return arg
    raise UsageError(f"unknown backend '{arg}' (expected enumerate, smt or smt:<command>)")


def _rules(disabled: Sequence[str]) -> frozenset:
    bad = [r for r in disabled if r not in RULE_IDS]
    if bad:
        raise UsageError(f"unknown rule(s): {', '.join(bad)}")
    return frozenset(RULE_IDS) - set(disabled)


def _load(path: str, width: Optional[int]) -> Program:
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    p = parse_file(path)
    if width is not None:
        if not 1 <= width <= 16:
            raise UsageError("--bit-width must lie between 1 and 16")
        p = p.with_width(width)
    return p


def _timeout(args) -> Optional[float]:
    return None if args.timeout is not None and args.timeout <= 0 else args.timeout


def _emit(args, report: dict, text: str) -> None:
    body = to_json(report) if args.format == "json" else text
    if args.out:
        Path(args.out).write_text(body)
    else:
        sys.stdout.write(body)


# ------------------------------------------------------------------ check


def cmd_check(args) -> int:
    p = _load(args.file, args.bit_width)
    cfg = CheckerConfig(timeout=_timeout(args), backend=_backend(args.backend))
    start = time.monotonic()
    trivial = classify_trivial(p, cfg)
    cut = cut_loops(p, [], []).program
    try:
        v = failing_asserts(cut, cfg)
    except CheckTimeout:
        status = "timeout"
        v = None
    else:
        status = {"valid": "verified", "failing": "failed"}.get(v.status, v.status)
    report = {
        "kind": "check", "schema_version": SCHEMA_VERSION, "tool": f"invgen {__version__}",
        "program": p.name, "trivial": trivial, "status": status,
        "failing": [] if v is None else sorted(v.failing, key=all_tags(cut).index),
        "counterexamples": {} if v is None else
        {t: w.render() for t, w in v.witnesses.items() if w is not None},
        "timing": {"check": time.monotonic() - start},
    }
    lines = [f"{p.name}: {status}" + (" (trivial)" if trivial else "")]
    for t in report["failing"]:
        lines.append(report["counterexamples"].get(t, f"assert {t} fails"))
    _emit(args, report, "\n".join(lines) + "\n")
    if status == "verified":
        return EXIT_OK
    return EXIT_FAILED if status == "failed" else EXIT_RESOURCE


# ------------------------------------------------------------------ infer


def _invariant_text(p: Program, cands, proved) -> str:
    lines = []
    for L in sorted({c.loop_id for c in cands}, key=lambda s: int(s[1:])):
        mine = [c for c in cands if c.loop_id == L and c.id in proved]
        lines.append(f"// {L}")
        lines += [f"invariant {expr_str(c.expr)};" for c in mine]
    return "\n".join(lines)


def cmd_infer(args) -> int:
    p = _load(args.file, args.bit_width)
    ccfg = CheckerConfig(timeout=_timeout(args), backend=_backend(args.backend))
    engines = _engines(args.engines, args.unroll_depth)
    cands = generate_candidates(p, RuleConfig(enabled=_rules(args.disable_rule)))
    rc = RunConfig(checker=ccfg, dyn=DynConfig(seed=args.seed), scheduler_seed=args.seed)
    try:
        if args.mode == "par":
            res = run_parallel(engines, p, cands, rc)
        else:
            res = run_sequential(engines, p, cands, rc)
    except HoudiniError as exc:
        msg = f"{p.name}: {exc.kind} after {len(exc.partial.refuted)} refutations"
        report = {"kind": "infer", "schema_version": SCHEMA_VERSION, "tool": f"invgen {__version__}",
                  "program": p.name, "status": exc.kind, "candidates": [], "proved": [],
                  "rounds": exc.partial.rounds,
                  "refuted": [[r.candidate, r.round, r.engine] for r in exc.partial.refuted],
                  "engines": {}, "failing_user_asserts": [], "invariants": "", "timing": {}}
        _emit(args, report, msg + "\n")
        return EXIT_RESOURCE
    h = res.houdini
    status = "verified" if h.verified else "failed"
    cand_rows = []
    for c in cands:
        st = h.status(c.id)
        row = {"id": c.id, "rule": c.rule, "loop": c.loop_id, "expr": expr_str(c.expr),
               "status": st[0]}
        if st[0] == "refuted":
            row["engine"], row["round"] = st[1], st[2]
        cand_rows.append(row)
    inv = _invariant_text(p, cands, h.proved)
    report = {
        "kind": "infer", "schema_version": SCHEMA_VERSION, "tool": f"invgen {__version__}",
        "program": p.name, "status": status, "mode": args.mode,
        "candidates": cand_rows, "proved": sorted(h.proved), "rounds": h.rounds,
        "refuted": [[r.candidate, r.round, r.engine] for r in h.refuted],
        "engines": {e: {"refuted": sorted(o.refuted), "error": o.error}
                    for e, o in sorted(res.per_engine.items())},
        "failing_user_asserts": sorted(h.verdict_after.failing),
        "invariants": inv,
        "timing": {"completion": res.completion_time, "houdini": h.check_time,
                   "engines": {e: o.duration for e, o in sorted(res.per_engine.items())}},
    }
    lines = [f"{p.name}: {len(cands)} candidates, {len(h.proved)} proved, {h.rounds} rounds, {status}"]
    for rnd, ids in sorted(h.rounds_table().items()):
        who = {r.candidate: r.engine for r in h.refuted}
        lines.append(f"round {rnd}: " + " ".join(f"C{i}[{who[i]}]" for i in ids))
    for e, o in sorted(res.per_engine.items()):
        extra = f" ({o.error})" if o.error else ""
        lines.append(f"{e}: refuted {sorted(o.refuted)} in {o.duration:.3f}s{extra}")
    for t in report["failing_user_asserts"]:
        lines.append(f"failing: {t}")
    lines.append("proved invariants:")
    lines.append(inv)
    _emit(args, report, "\n".join(lines) + "\n")
    return EXIT_OK if h.verified else EXIT_FAILED


# ------------------------------------------------------------------ metrics


def cmd_metrics(args) -> int:
    d = Path(args.corpus)
    if not d.is_dir():
        raise UsageError(f"not a directory: {args.corpus}")
    engines = _engines(args.engines, args.unroll_depth) if args.engines else None
    cfg = MetricsConfig(
        seed=args.seed, timeout=_timeout(args), bit_width=args.bit_width,
        rules=_rules(args.disable_rule),
        engines=tuple(str(e) for e in engines) if engines is not None else MetricsConfig.engines,
        unroll_depth=args.unroll_depth, backend=_backend(args.backend),
    )
    files = corpus_files(d)
    if not files:
        log.warning("no .mvl files in %s", d)
    workers = args.workers if args.workers is not None else default_workers()
    report = analyze_corpus(files, cfg, workers=workers)
    _emit(args, report, to_text(report))
    if args.out and args.format == "json":
        Path(args.out).with_suffix(".csv").write_text(influence_csv(report))
    return EXIT_OK


# ------------------------------------------------------------------ emit-smt


def cmd_emit_smt(args) -> int:
    p = _load(args.file, args.bit_width)
    if args.generated:
        cands = generate_candidates(p, RuleConfig(enabled=_rules(args.disable_rule)))
    else:
        cands = generate_candidates(p, RuleConfig(enabled=frozenset()))
    cut = cut_loops(p, cands, [c.id for c in cands]).program
    tags = all_tags(cut)
    if args.tag is not None:
        if args.tag not in tags:
            raise UsageError(f"unknown assert tag '{args.tag}' (known: {', '.join(tags)})")
        tags = [args.tag]
    scripts = {t: emit_smt(cut, t) for t in tags}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for t, s in scripts.items():
            (out / f"{p.name}.{t.replace(':', '_')}.smt2").write_text(s)
        log.info("wrote %d scripts to %s", len(scripts), out)
    else:
        sys.stdout.write("\n".join(scripts.values()))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bit-width", type=int, default=None, help="override the program width")
    common.add_argument("--timeout", type=float, default=600.0,
                        help="seconds per program (0 disables; default 600)")
    common.add_argument("--seed", type=int, default=0, help="seed for DYN and the scheduler")
    common.add_argument("--disable-rule", action="append", default=[], metavar="RULE",
                        help="disable a generation rule (repeatable)")
    common.add_argument("--engines", default=None,
                        help="comma list of SBASE, SSTEP, LU, LU(k), DYN")
    common.add_argument("--mode", choices=("seq", "par"), default="seq")
    common.add_argument("--unroll-depth", type=int, default=1, help="k for LU (default 1)")
    common.add_argument("--backend", default=None, help="enumerate (default), smt or smt:<command>")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--out", default=None, help="write the report here")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="invgen", description="Candidate-based loop invariant inference")
    ap.add_argument("--version", action="version", version=f"invgen {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="check a program with its user invariants")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    i = sub.add_parser("infer", parents=[common], help="infer invariants with Houdini")
    i.add_argument("file")
    i.set_defaults(func=cmd_infer)

    m = sub.add_parser("metrics", parents=[common], help="run the corpus experiments")
    m.add_argument("corpus", help="directory of .mvl programs")
    m.add_argument("--workers", type=int, default=None, help="worker processes (default: CPUs)")
    m.set_defaults(func=cmd_metrics)

    s = sub.add_parser("emit-smt", parents=[common], help="write SMT-LIB2 scripts per check site")
    s.add_argument("file")
    s.add_argument("--tag", default=None, help="only this assert tag")
    s.add_argument("--generated", action="store_true",
                   help="install generated candidates too, not just candidate pragmas")
    s.set_defaults(func=cmd_emit_smt)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.unroll_depth < 1:
        print("invgen: --unroll-depth must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"invgen: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        for d in exc.diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_USAGE
    except (CheckerError, TransformError) as exc:
        print(f"invgen: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"invgen: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
