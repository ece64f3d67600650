"""Refutation engines, the shared refutation pool, and the sequential and
parallel ways of running them alongside Houdini."""

from __future__ import annotations

import dataclasses
import logging
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from .checker import Cancelled, CheckerConfig, CheckerError, CheckTimeout, failing_asserts
from .dynrunner import DynConfig, dyn_refute
from .houdini import HoudiniResult, houdini_fixpoint
from .ir import Candidate, Program
from .prng import SplitMix64
from .transforms import TransformError, candidate_of_tag, cut_loops, slice_base, slice_step, unroll

log = logging.getLogger(__name__)

_ENGINE_RE = re.compile(r"^(H|SBASE|SSTEP|DYN|LU\((\d+)\))$")


@dataclass(frozen=True)
class EngineId:
    kind: str          # H, SBASE, SSTEP, LU or DYN
    depth: int = 0     # unroll depth for LU

    def __post_init__(self) -> None:
        if self.kind not in ("H", "SBASE", "SSTEP", "LU", "DYN"):
            raise ValueError(f"unknown engine '{self.kind}'")
        if self.kind == "LU" and self.depth < 1:
            raise ValueError("LU depth must be at least 1")

    def __str__(self) -> str:
        return f"LU({self.depth})" if self.kind == "LU" else self.kind

    @classmethod
    def parse(cls, text: str) -> "EngineId":
        m = _ENGINE_RE.match(text.strip().upper())
        if m is None:
            raise ValueError(f"unknown engine '{text}' (expected H, SBASE, SSTEP, LU(k) or DYN)")
        if m.group(2) is not None:
            return cls("LU", int(m.group(2)))
        return cls(m.group(1))


H = EngineId("H")
EngineLike = Union[EngineId, str]


def _engine(e: EngineLike) -> EngineId:
    return e if isinstance(e, EngineId) else EngineId.parse(e)


@dataclass(frozen=True)
class RefutationRecord:
    candidate: int
    engine: str
    offset: float  # seconds since the pool was created


class RefutationPool:
    """Append-only record of refutations shared between engines and Houdini."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._records: list[RefutationRecord] = []
        self._t0 = time.monotonic()

    def publish(self, cid: int, engine: str) -> RefutationRecord:
        with self._lock:
            rec = RefutationRecord(cid, engine, time.monotonic() - self._t0)
            self._records.append(rec)
            return rec

    def drain(self, cursor: int) -> tuple[list[RefutationRecord], int]:
        """Records published since ``cursor`` and the new cursor."""
        with self._lock:
            out = self._records[cursor:]
            return out, cursor + len(out)

    def records(self) -> list[RefutationRecord]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def attribution(self) -> dict[int, str]:
        """First publisher of each candidate."""
        out: dict[int, str] = {}
        for r in self.records():
            out.setdefault(r.candidate, r.engine)
        return out


@dataclass(frozen=True)
class RunConfig:
    checker: CheckerConfig = field(default_factory=CheckerConfig)
    dyn: DynConfig = field(default_factory=DynConfig)
    scheduler_seed: Optional[int] = None  # parallel runs only: random start and drain delays
    max_jitter: float = 0.005


@dataclass
class EngineOutcome:
    refuted: frozenset
    duration: float
    count: int
    error: Optional[str] = None


@dataclass
class RunResult:
    houdini: HoudiniResult
    per_engine: dict = field(default_factory=dict)  # engine name -> EngineOutcome
    completion_time: float = 0.0
    user_failures: dict = field(default_factory=dict)  # engine name -> failing user tags

    @property
    def proved(self) -> frozenset:
        return self.houdini.proved


def _slice_engine(p: Program, cands: list[Candidate], cfg: CheckerConfig, slicer,
                  publish: Callable[[int], None], users: set) -> set[int]:
    """Check one slice of the cut program repeatedly, dropping failing
    candidates, until nothing more fails."""
    active = {c.id for c in cands}
    refuted: set[int] = set()
    while True:
        prog = slicer(cut_loops(p, cands, active)).program
        v = failing_asserts(prog, cfg)
        if v.status == "resource_exceeded":
            raise CheckerError(f"state space {v.state_space} exceeds the limit")
        bad = set()
        for t in v.failing:
            cid = candidate_of_tag(t)
            if cid is None:
                users.add(t)
            elif cid in active:
                bad.add(cid)
        if not bad:
            return refuted
        for cid in sorted(bad):
            publish(cid)
        refuted |= bad
        active -= bad


def _unroll_engine(p: Program, cands: list[Candidate], k: int, cfg: CheckerConfig,
                   publish: Callable[[int], None], users: set) -> set[int]:
    prog = unroll(p, k, cands, [c.id for c in cands])
    v = failing_asserts(prog, cfg)
    if v.status == "resource_exceeded":
        raise CheckerError(f"state space {v.state_space} exceeds the limit")
    ids = {c.id for c in cands}
    refuted = set()
    for t in v.failing:
        cid = candidate_of_tag(t)
        if cid is None:
            users.add(t)
        elif cid in ids and cid not in refuted:
            refuted.add(cid)
            publish(cid)
    return refuted


def _run_engine(e: EngineId, p: Program, cands: list[Candidate], cfg: RunConfig,
                pool: Optional[RefutationPool], cancel: Optional[threading.Event]):
    name = str(e)
    published: list[int] = []
    users: set = set()

    def publish(cid: int) -> None:
        published.append(cid)
        if pool is not None:
            pool.publish(cid, name)

    ccfg = dataclasses.replace(cfg.checker, cancel=cancel) if cancel is not None else cfg.checker
    start = time.monotonic()
    error = None
    try:
        if e.kind == "SBASE":
            _slice_engine(p, cands, ccfg, slice_base, publish, users)
        elif e.kind == "SSTEP":
            _slice_engine(p, cands, ccfg, slice_step, publish, users)
        elif e.kind == "LU":
            _unroll_engine(p, cands, e.depth, ccfg, publish, users)
        elif e.kind == "DYN":
            dyn_refute(p, cands, cfg.dyn, on_refute=publish, cancel=cancel)
        else:
            raise ValueError("Houdini is not a refutation engine")
    except (CheckTimeout, Cancelled, CheckerError, TransformError) as exc:
        error = f"{type(exc).__name__}: {exc}"
        log.info("engine %s on %s stopped: %s", name, p.name, error)
    out = EngineOutcome(frozenset(published), time.monotonic() - start, len(published), error)
    return out, frozenset(users)


def run_engine(e: EngineLike, p: Program, candidates: Iterable[Candidate],
               cfg: Optional[RunConfig] = None) -> EngineOutcome:
    """Run one refutation engine on its own. A failing engine keeps only the
    refutations it made before the failure, all of which are sound."""
    e = _engine(e)
    if e == H:
        raise ValueError("Houdini is not a refutation engine")
    out, _ = _run_engine(e, p, list(candidates), cfg or RunConfig(), None, None)
    return out


def run_sequential(prelude: Iterable[EngineLike], p: Program, candidates: Iterable[Candidate],
                   cfg: Optional[RunConfig] = None) -> RunResult:
    """Engines one after the other, each seeding the pool; then Houdini."""
    cfg = cfg or RunConfig()
    engines = [_engine(e) for e in prelude]
    if H in engines:
        raise ValueError("the prelude may not contain H")
    cands = list(candidates)
    pool = RefutationPool()
    per_engine: dict[str, EngineOutcome] = {}
    users: dict[str, frozenset] = {}
    start = time.monotonic()
    for e in engines:
        per_engine[str(e)], users[str(e)] = _run_engine(e, p, cands, cfg, pool, None)
    hcfg = cfg.checker
    if hcfg.timeout is not None:
        hcfg = dataclasses.replace(hcfg, timeout=max(hcfg.timeout - (time.monotonic() - start), 0.0))
    res = houdini_fixpoint(p, cands, pool, hcfg)
    return RunResult(res, per_engine, time.monotonic() - start, users)


class _JitteredPool:
    """Pool view for Houdini that waits a random moment before each drain."""

    def __init__(self, pool: RefutationPool, rng: SplitMix64, max_jitter: float) -> None:
        self.pool = pool
        self.rng = rng
        self.max_jitter = max_jitter

    def drain(self, cursor: int):
        time.sleep(self.max_jitter * self.rng.below(1001) / 1000)
        return self.pool.drain(cursor)


def run_parallel(engines: Iterable[EngineLike], p: Program, candidates: Iterable[Candidate],
                 cfg: Optional[RunConfig] = None) -> RunResult:
    """Start every engine and Houdini together; Houdini drains the pool at
    each round start. Engines still running when Houdini finishes are
    cancelled; ``completion_time`` stops at Houdini's termination."""
    cfg = cfg or RunConfig()
    ids = [_engine(e) for e in engines]
    if H in ids:
        raise ValueError("engines may not contain H")
    cands = list(candidates)
    pool = RefutationPool()
    cancel = threading.Event()
    rng = SplitMix64(cfg.scheduler_seed) if cfg.scheduler_seed is not None else None
    per_engine: dict[str, EngineOutcome] = {}
    users: dict[str, frozenset] = {}
    lock = threading.Lock()

    def worker(e: EngineId, delay: float) -> None:
        if delay:
            time.sleep(delay)
        out = _run_engine(e, p, cands, cfg, pool, cancel)
        with lock:
            per_engine[str(e)], users[str(e)] = out

    threads = []
    for n, e in enumerate(ids):
        delay = cfg.max_jitter * rng.derive(n).below(1001) / 1000 if rng is not None else 0.0
        threads.append(threading.Thread(target=worker, args=(e, delay), daemon=True,
                                        name=f"engine-{e}"))
    hpool = _JitteredPool(pool, rng.derive(len(ids)), cfg.max_jitter) if rng is not None else pool
    start = time.monotonic()
    for t in threads:
        t.start()
    try:
        res = houdini_fixpoint(p, cands, hpool, cfg.checker)
        elapsed = time.monotonic() - start
    finally:
        cancel.set()
        for t in threads:
            t.join()
    return RunResult(res, dict(per_engine), elapsed, dict(users))


__all__ = [
    "EngineId", "EngineOutcome", "H", "RefutationPool", "RefutationRecord", "RunConfig",
    "RunResult", "run_engine", "run_parallel", "run_sequential",
]
