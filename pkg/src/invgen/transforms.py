"""Loop cutting, base/step slicing, bounded unrolling and assert isolation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .ir import (
    FALSE, Assert, Assign, Assume, Candidate, Ghost, Havoc, If, LogRead, LogWrite,
    Program, Stmt, While, ghost_pair, location, log_direction, walk,
)

UNROLL_LIMIT = 50_000


class TransformError(Exception):
    pass


@dataclass(frozen=True)
class CheckSite:
    base_tag: str
    step_tag: str


@dataclass(frozen=True)
class CutProgram:
    program: Program
    check_sites: dict = field(default_factory=dict)   # candidate id -> CheckSite
    assume_sites: dict = field(default_factory=dict)  # loop id -> candidate ids assumed there
    user_sites: dict = field(default_factory=dict)    # loop id -> CheckSites of user invariants


def candidate_tag(kind: str, loop_id: str, cid: int) -> str:
    return f"{kind}:{loop_id}:c{cid}"


def user_tag(kind: str, loop_id: str, idx: int) -> str:
    return f"{kind}:{loop_id}:u{idx}"


def parse_tag(tag: str) -> Optional[tuple[str, str, str, int]]:
    """``base:L0:c3`` -> ("base", "L0", "c", 3); None for plain assert tags."""
    parts = tag.split(":")
    if len(parts) != 3 or not parts[2][1:].isdigit() or parts[2][0] not in "cu":
        return None
    return parts[0], parts[1], parts[2][0], int(parts[2][1:])


def candidate_of_tag(tag: str) -> Optional[int]:
    t = parse_tag(tag)
    return t[3] if t is not None and t[2] == "c" else None


def modset_order(body: Iterable[Stmt]) -> list[str]:
    """Modified variables in first-occurrence order; ghost pairs stay adjacent."""
    out: list[str] = []

    def add(name: str) -> None:
        if name not in out:
            out.append(name)

    for st in walk(body):
        if isinstance(st, Assign):
            add(st.target)
        elif isinstance(st, Havoc):
            for t in st.targets:
                if isinstance(t, Ghost):
                    for g in ghost_pair(t.array, t.direction):
                        add(g.name)
                else:
                    add(t.name)
        elif isinstance(st, (LogWrite, LogRead)):
            for g in ghost_pair(st.array, log_direction(st)):
                add(g.name)
    return out


def compute_modset(body: Iterable[Stmt]) -> frozenset[str]:
    return frozenset(modset_order(body))


def _locations(names: Iterable[str]):
    return tuple(location(n) for n in names)


def cut_loops(p: Program, candidates: Iterable[Candidate], active: Iterable[int]) -> CutProgram:
    """Replace every loop, innermost first, by its base/havoc/assume/step scaffold."""
    cands = list(candidates)
    active = set(active)
    loop_ids = {w.loop_id for w in _loops(p.body)}
    by_loop: dict[str, list[Candidate]] = {}
    for c in cands:
        if c.loop_id not in loop_ids:
            raise TransformError(f"candidate {c.id} names unknown loop '{c.loop_id}'")
        if c.id in active:
            by_loop.setdefault(c.loop_id, []).append(c)
    check_sites: dict[int, CheckSite] = {}
    assume_sites: dict[str, tuple[int, ...]] = {}
    user_sites: dict[str, tuple[CheckSite, ...]] = {}

    def cut_block(stmts) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for st in stmts:
            if isinstance(st, While):
                out.extend(cut_loop(st))
            elif isinstance(st, If):
                out.append(If(st.cond, cut_block(st.then), cut_block(st.orelse), span=st.span))
            else:
                out.append(st)
        return tuple(out)

    def cut_loop(w: While) -> list[Stmt]:
        body = cut_block(w.body)
        L = w.loop_id
        users = [inv.expr for inv in w.user_invariants]
        mine = by_loop.get(L, [])
        base: list[Stmt] = []
        step: list[Stmt] = []
        assumes: list[Stmt] = []
        sites = []
        for k, e in enumerate(users):
            site = CheckSite(user_tag("base", L, k), user_tag("step", L, k))
            sites.append(site)
            base.append(Assert(e, site.base_tag, span=w.span))
            step.append(Assert(e, site.step_tag, span=w.span))
            assumes.append(Assume(e))
        for c in mine:
            site = CheckSite(candidate_tag("base", L, c.id), candidate_tag("step", L, c.id))
            check_sites[c.id] = site
            base.append(Assert(c.expr, site.base_tag, span=w.span))
            step.append(Assert(c.expr, site.step_tag, span=w.span))
            assumes.append(Assume(c.expr))
        assume_sites[L] = tuple(c.id for c in mine)
        user_sites[L] = tuple(sites)
        havoc = modset_order(w.body)
        out: list[Stmt] = list(base)
        if havoc:
            out.append(Havoc(_locations(havoc), span=w.span))
        out.extend(assumes)
        out.append(If(w.guard, body + tuple(step) + (Assume(FALSE),), (), span=w.span))
        return out

    prog = p.with_body(cut_block(p.body))
    return CutProgram(prog, check_sites, assume_sites, user_sites)


def _loops(stmts) -> list[While]:
    return [s for s in walk(stmts) if isinstance(s, While)]


def _drop_asserts(stmts, drop) -> tuple[Stmt, ...]:
    out: list[Stmt] = []
    for st in stmts:
        if isinstance(st, Assert) and drop(st.tag):
            continue
        if isinstance(st, If):
            st = If(st.cond, _drop_asserts(st.then, drop), _drop_asserts(st.orelse, drop), span=st.span)
        elif isinstance(st, While):
            st = While(st.guard, st.invariants, _drop_asserts(st.body, drop), st.loop_id, span=st.span)
        out.append(st)
    return tuple(out)


def slice_base(c: CutProgram) -> CutProgram:
    """Keep base cases only: every step-case assert is deleted."""
    body = _drop_asserts(c.program.body, lambda t: t.startswith("step:"))
    return CutProgram(c.program.with_body(body), c.check_sites, c.assume_sites, c.user_sites)


def slice_step(c: CutProgram) -> CutProgram:
    body = _drop_asserts(c.program.body, lambda t: t.startswith("base:"))
    return CutProgram(c.program.with_body(body), c.check_sites, c.assume_sites, c.user_sites)


def unroll(p: Program, k: int, candidates: Iterable[Candidate], active: Iterable[int],
           limit: int = UNROLL_LIMIT) -> Program:
    """Unroll every loop k times. Invariants are asserted only under the guard,
    so a candidate that fails only when a loop runs zero times is not caught.
    All copies of one assert share its ``unroll:`` tag."""
    if k < 1:
        raise TransformError("unroll depth must be at least 1")
    active = set(active)
    by_loop: dict[str, list[Candidate]] = {}
    for c in candidates:
        if c.id in active:
            by_loop.setdefault(c.loop_id, []).append(c)

    def checks(w: While) -> list[Stmt]:
        out: list[Stmt] = []
        for i, inv in enumerate(w.user_invariants):
            out.append(Assert(inv.expr, user_tag("unroll", w.loop_id, i), span=w.span))
        for c in by_loop.get(w.loop_id, []):
            out.append(Assert(c.expr, candidate_tag("unroll", w.loop_id, c.id), span=w.span))
        return out

    def size(stmts) -> int:
        n = 0
        for st in stmts:
            n += 1
            if isinstance(st, If):
                n += size(st.then) + size(st.orelse)
            elif isinstance(st, While):
                n += k * (len(checks(st)) + size(st.body)) + 1
            if n > limit:
                break
        return n

    # refuse before building anything
    if size(p.body) > limit:
        raise TransformError(f"unrolled program exceeds {limit} statements")

    def block(stmts) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for st in stmts:
            if isinstance(st, While):
                out.append(layers(st))
            elif isinstance(st, If):
                out.append(If(st.cond, block(st.then), block(st.orelse), span=st.span))
            else:
                out.append(st)
        return tuple(out)

    def layers(w: While) -> Stmt:
        # built inside out so deep unrolling does not recurse
        node: Stmt = If(w.guard, (Assume(FALSE),), (), span=w.span)
        head = tuple(checks(w))
        for _ in range(k):
            node = If(w.guard, head + block(w.body) + (node,), (), span=w.span)
        return node

    return p.with_body(block(p.body))


def instrument_assert(p: Program, site: str, *, others: str = "assume") -> Program:
    """Isolate one assert; the others become assumes.

    With ``others="drop"`` the other asserts are deleted instead. That variant
    keeps the failing set of ``site`` unchanged, because asserts do not block
    execution, whereas an assume inserted ahead of ``site`` can prune the very
    paths on which it fails.
    """
    found = [False]

    def go(stmts) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for st in stmts:
            if isinstance(st, Assert):
                if st.tag == site:
                    found[0] = True
                    out.append(st)
                elif others == "assume":
                    out.append(Assume(st.cond, span=st.span))
                continue
            if isinstance(st, If):
                st = If(st.cond, go(st.then), go(st.orelse), span=st.span)
            elif isinstance(st, While):
                st = While(st.guard, st.invariants, go(st.body), st.loop_id, span=st.span)
            out.append(st)
        return tuple(out)

    body = go(p.body)
    if not found[0]:
        raise TransformError(f"unknown assert tag '{site}'")
    return p.with_body(body)


def strip_invariants(p: Program) -> Program:
    """Drop every user invariant and candidate pragma."""
    def go(stmts) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for st in stmts:
            if isinstance(st, If):
                st = If(st.cond, go(st.then), go(st.orelse), span=st.span)
            elif isinstance(st, While):
                st = While(st.guard, (), go(st.body), st.loop_id, span=st.span)
            out.append(st)
        return tuple(out)
    return p.with_body(go(p.body))


def is_loop_free(p: Program) -> bool:
    return not _loops(p.body)


__all__ = [
    "CheckSite", "CutProgram", "TransformError", "candidate_of_tag", "candidate_tag",
    "compute_modset", "cut_loops", "instrument_assert", "is_loop_free", "modset_order",
    "parse_tag", "slice_base", "slice_step", "strip_invariants", "unroll", "user_tag",
]
