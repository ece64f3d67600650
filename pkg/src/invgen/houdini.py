"""The Houdini fixpoint over loop-cut programs."""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .checker import Cancelled, CheckerConfig, CheckTimeout, Verdict, failing_asserts
from .ir import Candidate, Program
from .transforms import candidate_of_tag, cut_loops

log = logging.getLogger(__name__)

HOUDINI = "H"


@dataclass(frozen=True)
class Refutation:
    candidate: int
    round: int
    engine: str


@dataclass
class HoudiniResult:
    proved: frozenset
    refuted: list = field(default_factory=list)
    rounds: int = 0
    check_time: float = 0.0
    verdict_after: Optional[Verdict] = None

    @property
    def verified(self) -> bool:
        return self.verdict_after is not None and self.verdict_after.valid

    def rounds_table(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for r in self.refuted:
            out.setdefault(r.round, []).append(r.candidate)
        return out

    def status(self, cid: int) -> tuple:
        if cid in self.proved:
            return ("proved",)
        for r in self.refuted:
            if r.candidate == cid:
                return ("refuted", r.engine, r.round)
        return ("pending",)


class HoudiniError(Exception):
    """The fixpoint stopped early; ``partial`` holds the refutations so far."""

    def __init__(self, kind: str, partial: HoudiniResult, detail: str = "") -> None:
        super().__init__(f"houdini {kind}: {detail}" if detail else f"houdini {kind}")
        self.kind = kind  # "timeout", "resource" or "cancelled"
        self.partial = partial


def houdini_fixpoint(p: Program, candidates: Iterable[Candidate], pool=None,
                     cfg: Optional[CheckerConfig] = None, *,
                     on_round: Optional[Callable[[int, frozenset], None]] = None) -> HoudiniResult:
    """Refute candidates round by round until the survivors are inductive.

    Each round drains ``pool`` (anything with ``drain(cursor)``), cuts the
    loops with the active candidates installed, and removes every candidate
    whose base or step assert fails. The last round is the check of the final
    invariant; its verdict is ``verdict_after``.
    """
    cfg = cfg or CheckerConfig()
    cands = list(candidates)
    start = time.monotonic()
    deadline = None if cfg.timeout is None else start + cfg.timeout
    inner = dataclasses.replace(cfg, timeout=None)
    active = {c.id for c in cands}
    refuted: list[Refutation] = []
    cursor = 0
    rnd = 0

    def partial() -> HoudiniResult:
        return HoudiniResult(frozenset(active), list(refuted), rnd, time.monotonic() - start, None)

    while True:
        rnd += 1
        if pool is not None:
            records, cursor = pool.drain(cursor)
            for rec in records:
                if rec.candidate in active:
                    active.discard(rec.candidate)
                    refuted.append(Refutation(rec.candidate, rnd, rec.engine))
        cut = cut_loops(p, cands, active)
        try:
            verdict = failing_asserts(cut.program, inner, deadline)
        except CheckTimeout as exc:
            raise HoudiniError("timeout", partial(), str(exc)) from None
        except Cancelled:
            raise HoudiniError("cancelled", partial()) from None
        if verdict.status == "resource_exceeded":
            raise HoudiniError("resource", partial(), f"state space {verdict.state_space}")
        bad = {candidate_of_tag(t) for t in verdict.failing} & active
        if on_round is not None:
            on_round(rnd, frozenset(bad))
        if not bad:
            res = HoudiniResult(frozenset(active), refuted, rnd, time.monotonic() - start, verdict)
            log.debug("%s: fixpoint after %d rounds, %d proved", p.name, rnd, len(active))
            return res
        for cid in sorted(bad):
            refuted.append(Refutation(cid, rnd, HOUDINI))
        active -= bad


def is_provable(p: Program, candidates: Iterable[Candidate], cid: int,
                cfg: Optional[CheckerConfig] = None) -> bool:
    cands = list(candidates)
    if cid not in {c.id for c in cands}:
        raise KeyError(f"no candidate {cid}")
    return cid in houdini_fixpoint(p, cands, None, cfg).proved
