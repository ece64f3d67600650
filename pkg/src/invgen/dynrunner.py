"""Dynamic refutation: run the program concretely and drop candidates that are
false at some loop head reached on a feasible path."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from math import prod
from typing import Callable, Iterable, Optional, Union

from .ir import (
    AssumeViolation, BinOp, BudgetExhausted, BvLit, Candidate, ExecState, Expr, Ghost,
    Interpreter, Program, Var, While, block_count, conjuncts, eval_expr, ghost_pair, subexprs,
)
from .prng import SplitMix64

log = logging.getLogger(__name__)

DYN = "DYN"


@dataclass(frozen=True)
class DynConfig:
    seed: int = 0
    max_executions: int = 5
    loop_iteration_budget: int = 1000
    tuple_samples: int = 5
    coverage_target: float = 1.0
    max_attempts: int = 10_000

    def __post_init__(self) -> None:
        for name in ("max_executions", "loop_iteration_budget", "tuple_samples", "max_attempts"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.coverage_target <= 1.0:
            raise ValueError("coverage_target must lie in (0, 1]")


@dataclass
class DynReport:
    refuted: set[int] = field(default_factory=set)
    order: list[int] = field(default_factory=list)  # refutations in discovery order
    executions: int = 0
    coverage: float = 0.0
    interpreted_statements: int = 0
    loop_iterations: int = 0
    diagnostics: list[str] = field(default_factory=list)


class _NoReads:
    def below(self, n: int) -> int:
        raise ValueError("candidate expressions may not read arrays")


def _param_box(p: Program) -> dict[str, tuple[int, int]]:
    """Per-parameter sampling range [lo, hi) from conjuncts of the shape
    ``x == k``, ``x < k`` and ``x <= k``; everything else is left to rejection."""
    box = {d.name: (0, 2 if d.kind == "bool" else 1 << p.bit_width) for d in p.params}
    for pre in p.preconditions:
        for c in conjuncts(pre):
            if not isinstance(c, BinOp):
                continue
            lhs, rhs = c.lhs, c.rhs
            if isinstance(rhs, Var) and isinstance(lhs, BvLit) and c.op == "==":
                lhs, rhs = rhs, lhs
            if not (isinstance(lhs, Var) and lhs.name in box and isinstance(rhs, BvLit)):
                continue
            lo, hi = box[lhs.name]
            k = rhs.value & p.mask
            if c.op == "==":
                lo, hi = max(lo, k), min(hi, k + 1)
            elif c.op == "<":
                hi = min(hi, k)
            elif c.op == "<=":
                hi = min(hi, k + 1)
            box[lhs.name] = (lo, hi)
    return box


def generate_inputs(p: Program, rng: SplitMix64, max_attempts: int) -> Optional[dict]:
    """Parameter values satisfying every precondition, or None after
    ``max_attempts`` rejected draws."""
    box = _param_box(p)
    if any(lo >= hi for lo, hi in box.values()):
        return None
    for _ in range(max_attempts):
        vals: dict[str, Union[int, bool]] = {}
        for d in p.params:
            lo, hi = box[d.name]
            v = lo + rng.below(hi - lo)
            vals[d.name] = bool(v) if d.kind == "bool" else v
        probe = ExecState(p.bit_width, dict(vals))
        if all(eval_expr(pre, probe, _NoReads()) for pre in p.preconditions):
            return vals
    return None


def _ghost_keys(e: Expr) -> list[tuple[str, str]]:
    keys: list[tuple[str, str]] = []
    for x in subexprs(e):
        if isinstance(x, Ghost) and (x.array, x.direction) not in keys:
            keys.append((x.array, x.direction))
    return keys


def _holds(c: Candidate, s: ExecState, rng: SplitMix64, samples: int) -> bool:
    """False when some consistent ghost state makes the candidate false.

    The no-access state is always tried. Then up to ``samples`` tuples drawn
    from the offsets logged so far, one offset per ghost pair.
    """
    keys = _ghost_keys(c.expr)
    if not eval_expr(c.expr, s, _NoReads()):
        return False
    if not keys:
        return True
    lists = [s.observed.get(k, []) for k in keys]
    live = [(k, l) for k, l in zip(keys, lists) if l]
    if not live:
        return True
    total = prod(len(l) for _, l in live)
    probe = ExecState(s.width, dict(s.env))
    for idx in rng.sample(total, samples):
        for (array, d), offs in live:
            idx, r = divmod(idx, len(offs))
            has, off = ghost_pair(array, d)
            probe.env[has.name] = True
            probe.env[off.name] = offs[r]
        if not eval_expr(c.expr, probe, _NoReads()):
            return False
    return True


def basic_block_coverage(p: Program, traces: Iterable[Iterable[str]]) -> float:
    seen: set[str] = set()
    for t in traces:
        seen.update(t)
    return len(seen) / block_count(p.body)


def dyn_refute(p: Program, candidates: Iterable[Candidate], cfg: Optional[DynConfig] = None, *,
               on_refute: Optional[Callable[[int], None]] = None,
               cancel: Optional[threading.Event] = None) -> DynReport:
    """Run ``p`` up to ``cfg.max_executions`` times and refute candidates.

    Runs stop early once basic-block coverage reaches the target. A run that
    hits an infeasible assume or the iteration budget keeps the refutations
    found before that point.
    """
    cfg = cfg or DynConfig()
    by_loop: dict[str, list[Candidate]] = {}
    for c in candidates:
        by_loop.setdefault(c.loop_id, []).append(c)
    root = SplitMix64(cfg.seed)
    report = DynReport()
    refuted = report.refuted
    blocks: set[str] = set()
    total_blocks = block_count(p.body)

    for run in range(cfg.max_executions):
        if cancel is not None and cancel.is_set():
            report.diagnostics.append("cancelled")
            break
        stream = root.derive(run)
        params = generate_inputs(p, stream.derive(0), cfg.max_attempts)
        if params is None:
            report.diagnostics.append(
                f"no input satisfying the preconditions after {cfg.max_attempts} attempts")
            break
        tuples = stream.derive(1)

        def hook(w: While, s: ExecState) -> None:
            for c in by_loop.get(w.loop_id, ()):
                if c.id in refuted:
                    continue
                if not _holds(c, s, tuples, cfg.tuple_samples):
                    refuted.add(c.id)
                    report.order.append(c.id)
                    if on_refute is not None:
                        on_refute(c.id)

        interp = Interpreter(p, stream.derive(2), log_mode="observe", loop_hook=hook,
                             iteration_budget=cfg.loop_iteration_budget)
        try:
            interp.run(params)
        except AssumeViolation:
            pass
        except BudgetExhausted:
            report.diagnostics.append(f"run {run}: loop iteration budget exhausted")
        s = interp.state
        report.executions += 1
        if s is not None:
            blocks.update(s.trace)
            report.interpreted_statements += s.statements
            report.loop_iterations += s.loop_iterations
        report.coverage = len(blocks) / total_blocks
        if report.coverage >= cfg.coverage_target:
            break
    log.debug("%s: DYN refuted %s in %d runs", p.name, report.order, report.executions)
    return report
