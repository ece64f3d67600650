"""Complete checking of loop-free programs.

The enumerate backend explores every parameter assignment, havoc value, log
choice and array-read value. It runs breadth-first over a frontier of
executions held in numpy columns, so one sweep reports every failing assert.
Havocs are fused with the assumes that follow them and variables are bound one
at a time, filtering as soon as a conjunct is fully bound.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from .ir import (
    ArrayRead, Assert, Assign, Assume, BoolLit, BvLit, Expr, Ghost, Havoc, If,
    LogRead, LogWrite, Not, Program, Stmt, Var, While, array_reads, conjuncts, free_vars,
    ghost_pair, havoc_units, log_direction, walk,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 1 << 22


class CheckTimeout(TimeoutError):
    pass


class Cancelled(Exception):
    pass


class CheckerError(Exception):
    pass


@dataclass
class CheckerConfig:
    max_states: int = DEFAULT_MAX_STATES
    timeout: Optional[float] = None
    backend: str = "enumerate"  # or "smt:<command>"
    cancel: Optional[threading.Event] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")


@dataclass(frozen=True)
class Counterexample:
    tag: str
    choices: tuple[int, ...]
    params: tuple[tuple[str, Union[int, bool]], ...] = ()
    havocs: tuple[tuple[str, Union[int, bool]], ...] = ()
    log_choices: tuple[bool, ...] = ()
    array_reads: tuple[int, ...] = ()

    def render(self) -> str:
        lines = [f"assert {self.tag} fails with"]
        for k, v in self.params:
            lines.append(f"  param {k} = {v}")
        for k, v in self.havocs:
            lines.append(f"  havoc {k} = {v}")
        if self.log_choices:
            lines.append("  log choices " + " ".join("log" if c else "skip" for c in self.log_choices))
        if self.array_reads:
            lines.append("  array reads " + " ".join(map(str, self.array_reads)))
        return "\n".join(lines)


@dataclass(frozen=True)
class Verdict:
    status: str  # "valid", "failing" or "resource_exceeded"
    failing: frozenset = frozenset()
    witnesses: Mapping[str, Optional[Counterexample]] = field(default_factory=dict)
    state_space: int = 0
    vacuous: bool = False

    @property
    def valid(self) -> bool:
        return self.status == "valid"

    @staticmethod
    def ok(vacuous: bool = False) -> "Verdict":
        return Verdict("valid", vacuous=vacuous)


class ResourceExceeded(Exception):
    def __init__(self, state_space: int) -> None:
        super().__init__(f"state space too large ({state_space} states)")
        self.state_space = state_space


# ----------------------------------------------------------------- sites


@dataclass(frozen=True)
class _Site:
    kind: str   # "param", "havoc", "log" or "read"
    label: tuple[str, ...]
    domain: int


def _site_table(p: Program) -> tuple[list[_Site], dict[tuple, list[int]]]:
    """Number every choice point in program order, keyed by statement path."""
    kinds = p.var_kinds()
    W = p.bit_width
    sites: list[_Site] = []
    at: dict[tuple, list[int]] = {}
    for d in p.params:
        sites.append(_Site("param", (d.name,), 2 if d.kind == "bool" else 1 << W))

    def add(path, site):
        at.setdefault(path, []).append(len(sites))
        sites.append(site)

    def go(stmts, path):
        for i, st in enumerate(stmts):
            here = path + (i,)
            if isinstance(st, While):
                raise CheckerError("the checker only accepts loop-free programs")
            if isinstance(st, Havoc):
                for names, dom in havoc_units(st.targets, kinds, W):
                    add(here, _Site("havoc", names, dom))
                continue
            for e in _direct_exprs(st):
                for r in array_reads(e):
                    add(here, _Site("read", (r.array,), 1 << W))
            if isinstance(st, (LogWrite, LogRead)):
                add(here, _Site("log", (st.array, log_direction(st)), 2))
            if isinstance(st, If):
                go(st.then, here + ("t",))
                go(st.orelse, here + ("e",))

    go(p.body, ())
    return sites, at


def _direct_exprs(st: Stmt) -> list[Expr]:
    if isinstance(st, Assign):
        return [st.value]
    if isinstance(st, (Assert, Assume)):
        return [st.cond]
    if isinstance(st, If):
        return [st.cond]
    if isinstance(st, (LogWrite, LogRead)):
        return [st.offset]
    return []


def state_space_size(p: Program) -> int:
    """Product of the domains of every parameter and choice point."""
    sites, _ = _site_table(p)
    n = 1
    for s in sites:
        n *= s.domain
    return n


# -------------------------------------------------------------- liveness


def _live_before(st: Stmt, after: frozenset) -> frozenset:
    if isinstance(st, Assign):
        return (after - {st.target}) | free_vars(st.value)
    if isinstance(st, Havoc):
        return after - {t.name for t in st.targets}
    if isinstance(st, (Assert, Assume)):
        return after | free_vars(st.cond)
    if isinstance(st, If):
        return free_vars(st.cond) | _live_block(st.then, after) | _live_block(st.orelse, after)
    if isinstance(st, (LogWrite, LogRead)):
        return after | free_vars(st.offset)
    raise CheckerError("the checker only accepts loop-free programs")


def _live_block(stmts, after: frozenset) -> frozenset:
    for st in reversed(stmts):
        after = _live_before(st, after)
    return after


def _live_after_each(stmts, after: frozenset) -> list[frozenset]:
    out = [after] * len(stmts)
    cur = after
    for i in range(len(stmts) - 1, -1, -1):
        out[i] = cur
        cur = _live_before(stmts[i], cur)
    return out


def _has_assert(stmts) -> bool:
    return any(isinstance(s, Assert) for s in walk(stmts))


# -------------------------------------------------------------- frontier


class _Frontier:
    __slots__ = ("n", "env", "hist")

    def __init__(self, n: int, env: dict, hist: dict) -> None:
        self.n = n
        self.env = env
        self.hist = hist

    def take(self, idx: np.ndarray) -> "_Frontier":
        n = int(idx.sum()) if idx.dtype == bool else len(idx)
        return _Frontier(n, {k: v[idx] for k, v in self.env.items()},
                         {k: v[idx] for k, v in self.hist.items()})

    @staticmethod
    def concat(parts: list["_Frontier"]) -> "_Frontier":
        parts = [f for f in parts if f.n > 0] or parts[:1]
        if len(parts) == 1:
            return parts[0]
        env = {k: np.concatenate([f.env[k] for f in parts]) for k in parts[0].env}
        keys = sorted(set().union(*(f.hist.keys() for f in parts)))
        hist = {}
        for k in keys:
            hist[k] = np.concatenate([f.hist[k] if k in f.hist else np.full(f.n, -1, np.int32)
                                      for f in parts])
        return _Frontier(sum(f.n for f in parts), env, hist)


class _Overflow(Exception):
    pass


def _as_array(x, n: int, dtype=None) -> np.ndarray:
    a = np.asarray(x, dtype=dtype)
    if a.shape != (n,):
        a = np.broadcast_to(a, (n,)).copy()
    return a


class _Enumerator:
    def __init__(self, p: Program, cfg: CheckerConfig, deadline: Optional[float]) -> None:
        self.p = p
        self.cfg = cfg
        self.deadline = deadline
        self.W = p.bit_width
        self.mask = p.mask
        self.kinds = p.var_kinds()
        self.sites, self.sites_at = _site_table(p)
        self.witness: dict[str, tuple[int, ...]] = {}

    # bookkeeping
    def tick(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise CheckTimeout("checker timeout")
        if self.cfg.cancel is not None and self.cfg.cancel.is_set():
            raise Cancelled()

    def record(self, tag: str, fr: _Frontier, fail: np.ndarray) -> None:
        rows = np.flatnonzero(fail)
        if len(rows) == 0:
            return
        keys = sorted(fr.hist)
        if keys and len(rows) > 1:
            cols = [fr.hist[k][rows] for k in keys]
            best = rows[np.lexsort(cols[::-1])[0]]
        else:
            best = rows[0]
        full = [-1] * len(self.sites)
        for k in keys:
            full[k] = int(fr.hist[k][best])
        w = tuple(full)
        old = self.witness.get(tag)
        if old is None or w < old:
            self.witness[tag] = w

    # vector evaluation
    def veval(self, e: Expr, fr: _Frontier, reads: list):
        if isinstance(e, BvLit):
            return e.value & self.mask
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, (Var, Ghost)):
            return fr.env[e.name]
        if isinstance(e, Not):
            return np.logical_not(self.veval(e.operand, fr, reads))
        if isinstance(e, ArrayRead):
            self.veval(e.offset, fr, reads)
            return fr.env[reads.pop(0)]
        a = self.veval(e.lhs, fr, reads)
        b = self.veval(e.rhs, fr, reads)
        op = e.op
        m = self.mask
        if op == "+":
            return (a + b) & m
        if op == "-":
            return (a - b) & m
        if op == "*":
            return ((np.asarray(a, np.int64) * b) & m).astype(np.int32)
        if op == "/":
            bz = np.equal(b, 0)
            return np.where(bz, m, a // np.where(bz, 1, b)).astype(np.int32)
        if op == "%":
            bz = np.equal(b, 0)
            return np.where(bz, m, a % np.where(bz, 1, b)).astype(np.int32)
        if op == "<<":
            big = np.greater_equal(b, self.W)
            sh = np.where(big, 0, b)
            return np.where(big, 0, (np.asarray(a, np.int64) << sh) & m).astype(np.int32)
        if op == ">>":
            big = np.greater_equal(b, self.W)
            return np.where(big, 0, a >> np.where(big, 0, b)).astype(np.int32)
        if op == "&":
            return np.bitwise_and(a, b)
        if op == "|":
            return np.bitwise_or(a, b)
        if op == "^":
            return np.bitwise_xor(a, b)
        if op == "==":
            return np.equal(a, b)
        if op == "!=":
            return np.not_equal(a, b)
        if op == "<":
            return np.less(a, b)
        if op == "<=":
            return np.less_equal(a, b)
        if op == "&&":
            return np.logical_and(a, b)
        if op == "||":
            return np.logical_or(a, b)
        if op == "==>":
            return np.logical_or(np.logical_not(a), b)
        raise CheckerError(f"unknown operator {op}")

    def cond(self, e: Expr, fr: _Frontier, reads: list) -> np.ndarray:
        return _as_array(self.veval(e, fr, reads), fr.n, bool)

    # expansion
    def expand(self, fr: _Frontier, site: int, names: tuple[str, ...], filters) -> _Frontier:
        """Bind one choice unit to every value of its domain, then apply the
        conjuncts in ``filters`` that it completes. Works in chunks so no more
        than max_states rows are materialized at once."""
        dom = self.sites[site].domain
        limit = self.cfg.max_states
        if fr.n * dom <= limit:
            return self._expand_chunk(fr, site, names, filters, dom)
        if not filters:
            raise _Overflow()
        step = max(1, limit // dom)
        parts = []
        total = 0
        for lo in range(0, fr.n, step):
            self.tick()
            part = self._expand_chunk(fr.take(np.arange(lo, min(lo + step, fr.n))), site, names,
                                      filters, dom)
            total += part.n
            if total > limit:
                raise _Overflow()
            parts.append(part)
        return _Frontier.concat(parts)

    def _expand_chunk(self, fr, site, names, filters, dom) -> _Frontier:
        out = fr.take(np.repeat(np.arange(fr.n), dom))
        vals = np.tile(np.arange(dom, dtype=np.int32), fr.n)
        out.hist[site] = vals
        self._assign(out, names, vals)
        for f in filters:
            if out.n == 0:
                break
            keep = self.cond(f, out, [])
            if not keep.all():
                out = out.take(keep)
        return out

    def _assign(self, fr: _Frontier, names, vals) -> None:
        if len(names) == 2:
            fr.env[names[0]] = vals > 0
            fr.env[names[1]] = np.maximum(vals - 1, 0).astype(np.int32)
        elif self.kinds.get(names[0]) == "bool":
            fr.env[names[0]] = vals.astype(bool)
        else:
            fr.env[names[0]] = vals

    def bind_const(self, fr: _Frontier, site: int, names) -> None:
        """Bind a unit nobody reads to its first value without expanding."""
        vals = np.zeros(fr.n, np.int32)
        fr.hist[site] = vals
        self._assign(fr, names, vals)

    def bind(self, fr: _Frontier, units, conds: list[Expr], live: frozenset) -> _Frontier:
        """Fused havoc: ``units`` is a list of (site, names); ``conds`` are the
        assumed conjuncts that follow."""
        unit_of = {}
        for idx, (_, names) in enumerate(units):
            for nm in names:
                unit_of[nm] = idx
        pending = []
        ready = []
        for c in conds:
            deps = {unit_of[v] for v in free_vars(c) if v in unit_of}
            (pending if deps else ready).append((c, deps))
        for c, _ in ready:
            if fr.n == 0:
                break
            keep = self.cond(c, fr, [])
            if not keep.all():
                fr = fr.take(keep)
        todo = []
        for idx, (site, names) in enumerate(units):
            if any(nm in live for nm in names):
                todo.append(idx)
            else:
                self.bind_const(fr, site, names)
        remaining = set(todo)
        while remaining:
            self.tick()
            if fr.n == 0:
                for idx in sorted(remaining):
                    self.bind_const(fr, *units[idx])
                break

            def score(idx):
                done = sum(1 for _, d in pending if d == {idx})
                return (-done, self.sites[units[idx][0]].domain, idx)

            idx = min(remaining, key=score)
            remaining.discard(idx)
            now = [c for c, d in pending if d == {idx}]
            pending = [(c, d - {idx}) for c, d in pending if d != {idx}]
            site, names = units[idx]
            fr = self.expand(fr, site, names, now)
        return fr

    def expand_reads(self, fr: _Frontier, st: Stmt, path, skip: bool = False):
        """Materialize the ArrayRead values a statement draws; returns the
        frontier and the names of the temporary value columns."""
        cols = []
        for site in self.sites_at.get(path, []):
            s = self.sites[site]
            if s.kind != "read":
                continue
            nm = f"#read{site}"
            cols.append(nm)
            if skip:
                self.bind_const(fr, site, (nm,))
                continue
            if fr.n * s.domain > self.cfg.max_states:
                raise _Overflow()
            fr = self._expand_chunk(fr, site, (nm,), [], s.domain)
        return fr, cols

    # statements
    def block(self, stmts, fr: _Frontier, path, live_out: frozenset, tail_asserts: bool) -> _Frontier:
        lives = _live_after_each(stmts, live_out)
        has_after = [False] * (len(stmts) + 1)
        has_after[len(stmts)] = tail_asserts
        for i in range(len(stmts) - 1, -1, -1):
            has_after[i] = has_after[i + 1] or _has_assert([stmts[i]])
        i = 0
        while i < len(stmts):
            self.tick()
            if fr.n == 0 or not has_after[i]:
                return fr.take(np.zeros(fr.n, bool))
            st = stmts[i]
            here = path + (i,)
            if isinstance(st, Havoc):
                j = i + 1
                conds: list[Expr] = []
                while j < len(stmts) and isinstance(stmts[j], Assume) and not array_reads(stmts[j].cond):
                    conds.extend(conjuncts(stmts[j].cond))
                    j += 1
                live = lives[j - 1]
                # A cut loop leaves an If whose else side reaches no assert:
                # rows failing its guard are dead, so filter them while binding.
                nxt = stmts[j] if j < len(stmts) else None
                if (isinstance(nxt, If) and not array_reads(nxt.cond)
                        and not _has_assert(nxt.orelse) and not has_after[j + 1]):
                    conds.extend(conjuncts(nxt.cond))
                for c in conds:
                    live = live | free_vars(c)
                units = list(zip(self.sites_at.get(here, []),
                                 [u for u, _ in havoc_units(st.targets, self.kinds, self.W)]))
                fr = self.bind(fr, units, conds, live)
                i = j
                continue
            fr = self.stmt(st, fr, here, lives[i], has_after[i + 1])
            i += 1
        return fr

    def stmt(self, st: Stmt, fr: _Frontier, path, live_after: frozenset, tail_asserts: bool) -> _Frontier:
        if isinstance(st, Assign):
            dead = st.target not in live_after
            fr, cols = self.expand_reads(fr, st, path, skip=dead)
            if not dead:
                v = self.veval(st.value, fr, list(cols))
                kind = self.kinds[st.target]
                fr.env[st.target] = _as_array(v, fr.n, bool if kind == "bool" else np.int32)
            for c in cols:
                del fr.env[c]
            return fr
        if isinstance(st, Assert):
            fr, cols = self.expand_reads(fr, st, path)
            fail = ~self.cond(st.cond, fr, list(cols))
            self.record(st.tag, fr, fail)
            for c in cols:
                del fr.env[c]
            return fr
        if isinstance(st, Assume):
            if isinstance(st.cond, BoolLit) and not st.cond.value:
                return fr.take(np.zeros(fr.n, bool))
            fr, cols = self.expand_reads(fr, st, path)
            keep = self.cond(st.cond, fr, list(cols))
            fr = fr.take(keep) if not keep.all() else fr
            for c in cols:
                del fr.env[c]
            return fr
        if isinstance(st, If):
            fr, cols = self.expand_reads(fr, st, path)
            c = self.cond(st.cond, fr, list(cols))
            for nm in cols:
                del fr.env[nm]
            t = self.block(st.then, fr.take(c), path + ("t",), live_after, tail_asserts)
            e = self.block(st.orelse, fr.take(~c), path + ("e",), live_after, tail_asserts)
            return _Frontier.concat([t, e])
        if isinstance(st, (LogWrite, LogRead)):
            has, off = ghost_pair(st.array, log_direction(st))
            dead = has.name not in live_after and off.name not in live_after
            fr, cols = self.expand_reads(fr, st, path, skip=dead)
            log_site = [s for s in self.sites_at[path] if self.sites[s].kind == "log"][0]
            if dead:
                fr.hist[log_site] = np.zeros(fr.n, np.int32)
            else:
                v = _as_array(self.veval(st.offset, fr, list(cols)), fr.n, np.int32)
                if fr.n * 2 > self.cfg.max_states:
                    raise _Overflow()
                fr.env["#logoff"] = v
                fr = fr.take(np.repeat(np.arange(fr.n), 2))
                choice = np.tile(np.array([0, 1], np.int32), fr.n // 2)
                fr.hist[log_site] = choice
                on = choice == 1
                fr.env[has.name] = np.logical_or(fr.env[has.name], on)
                fr.env[off.name] = np.where(on, fr.env["#logoff"], fr.env[off.name]).astype(np.int32)
                del fr.env["#logoff"]
            for c in cols:
                del fr.env[c]
            return fr
        if isinstance(st, Havoc):
            return self.bind(fr, list(zip(self.sites_at.get(path, []),
                                          [u for u, _ in havoc_units(st.targets, self.kinds, self.W)])),
                             [], live_after)
        raise CheckerError(f"unsupported statement {type(st).__name__}")

    # driver
    def run(self) -> tuple[bool, dict[str, tuple[int, ...]]]:
        p = self.p
        env = {}
        for d in p.locals:
            env[d.name] = np.zeros(1, bool if d.kind == "bool" else np.int32)
        for a in p.arrays:
            for g in a.ghosts:
                env[g.name] = np.zeros(1, bool if g.is_flag else np.int32)
        for d in p.params:
            env[d.name] = np.zeros(1, bool if d.kind == "bool" else np.int32)
        root = _Frontier(1, env, {})
        live = _live_block(p.body, frozenset())
        units = [(i, (d.name,)) for i, d in enumerate(p.params)]
        conds = [c for pre in p.preconditions for c in conjuncts(pre)]
        for c in conds:
            live = live | free_vars(c)
        try:
            start = self.bind(root, units, conds, live)
        except _Overflow:
            raise ResourceExceeded(state_space_size(p)) from None
        if start.n == 0:
            return True, {}
        self.partition(start)
        return False, self.witness

    def partition(self, fr: _Frontier) -> None:
        try:
            self.block(self.p.body, fr, (), frozenset(), False)
        except _Overflow:
            if fr.n <= 1:
                raise ResourceExceeded(state_space_size(self.p)) from None
            half = fr.n // 2
            log.debug("splitting %d parameter rows", fr.n)
            self.partition(fr.take(np.arange(half)))
            self.partition(fr.take(np.arange(half, fr.n)))

    def counterexample(self, tag: str, w: tuple[int, ...]) -> Counterexample:
        params, havocs, logs, reads, choices = [], [], [], [], []
        for site, v in enumerate(w):
            if v < 0:
                continue
            s = self.sites[site]
            choices.append(v)
            if s.kind == "param":
                val = bool(v) if self.kinds[s.label[0]] == "bool" else v
                params.append((s.label[0], val))
            elif s.kind == "havoc":
                if len(s.label) == 2:
                    havocs.append((s.label[0], v > 0))
                    havocs.append((s.label[1], max(v - 1, 0)))
                else:
                    val = bool(v) if self.kinds[s.label[0]] == "bool" else v
                    havocs.append((s.label[0], val))
            elif s.kind == "log":
                logs.append(bool(v))
            else:
                reads.append(v)
        return Counterexample(tag, tuple(choices), tuple(params), tuple(havocs), tuple(logs),
                              tuple(reads))


def all_tags(p: Program) -> list[str]:
    out: list[str] = []
    for st in walk(p.body):
        if isinstance(st, Assert) and st.tag not in out:
            out.append(st.tag)
    return out


def failing_asserts(p: Program, cfg: Optional[CheckerConfig] = None,
                    deadline: Optional[float] = None) -> Verdict:
    """Every assert tag that fails on some feasible execution of ``p``.

    ``deadline`` is an absolute ``time.monotonic()`` value; it is combined with
    ``cfg.timeout``. Raises CheckTimeout and Cancelled. Resource exhaustion is
    reported as a ResourceExceeded verdict.
    """
    cfg = cfg or CheckerConfig()
    if any(isinstance(s, While) for s in walk(p.body)):
        raise CheckerError("the checker only accepts loop-free programs")
    if cfg.timeout is not None:
        own = time.monotonic() + cfg.timeout
        deadline = own if deadline is None else min(deadline, own)
    if cfg.backend.startswith("smt:"):
        return _failing_smt(p, cfg, deadline)
    if cfg.backend != "enumerate":
        raise CheckerError(f"unknown backend '{cfg.backend}'")
    en = _Enumerator(p, cfg, deadline)
    try:
        vacuous, found = en.run()
    except ResourceExceeded as exc:
        return Verdict("resource_exceeded", state_space=exc.state_space)
    if vacuous:
        log.warning("%s: preconditions reject every input; reporting valid", p.name)
        return Verdict.ok(vacuous=True)
    if not found:
        return Verdict.ok()
    order = {t: i for i, t in enumerate(all_tags(p))}
    tags = sorted(found, key=lambda t: order.get(t, len(order)))
    wit = {t: en.counterexample(t, found[t]) for t in tags}
    return Verdict("failing", frozenset(tags), wit)


# -------------------------------------------------------- external solver


def run_solver(command: str, script: str, timeout: Optional[float] = None) -> str:
    """Run an SMT solver on ``script``; returns "sat", "unsat" or "unknown"."""
    try:
        res = subprocess.run(shlex.split(command), input=script, capture_output=True, text=True,
                             timeout=timeout)
    except subprocess.TimeoutExpired:
        raise CheckTimeout("solver timeout") from None
    except OSError as exc:
        raise CheckerError(f"cannot run solver '{command}': {exc}") from exc
    for line in res.stdout.splitlines():
        line = line.strip()
        if line in ("sat", "unsat", "unknown"):
            return line
    raise CheckerError(f"unexpected solver output: {res.stdout.strip()[:200]!r} {res.stderr.strip()[:200]!r}")


def _failing_smt(p: Program, cfg: CheckerConfig, deadline: Optional[float]) -> Verdict:
    from .smt import emit_smt
    command = cfg.backend[4:]
    failing = []
    for tag in all_tags(p):
        if cfg.cancel is not None and cfg.cancel.is_set():
            raise Cancelled()
        remaining = None
        if deadline is not None:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise CheckTimeout("checker timeout")
        answer = run_solver(command, emit_smt(p, tag), remaining)
        if answer == "sat":
            failing.append(tag)
    if not failing:
        return Verdict.ok()
    return Verdict("failing", frozenset(failing), {t: None for t in failing})


from .smt import emit_smt  # noqa: E402  (re-export)

__all__ = [
    "Cancelled", "CheckTimeout", "CheckerConfig", "CheckerError", "Counterexample",
    "ResourceExceeded", "Verdict", "all_tags", "emit_smt", "failing_asserts", "run_solver",
    "state_space_size",
]
