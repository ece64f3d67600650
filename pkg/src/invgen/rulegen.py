"""Candidate-generation rules: syntactic guesses of loop invariants.

Every rule inspects one loop at a time. Candidate ids are assigned loop by
loop in document order; within a loop, candidate pragmas come first and then
the rules in catalog order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .ir import (
    Assign, BinOp, BoolLit, BvLit, Candidate, Expr, Ghost, Havoc, If, LogRead, LogWrite, Not,
    Program, Var, While, conjuncts, free_vars, ghost_pair, log_direction, subexprs, walk,
)
from .parser import RULE_IDS
from .transforms import compute_modset, modset_order

PRAGMA_RULE = "pragma"
DEFAULT_CAP = 64


@dataclass(frozen=True)
class RuleConfig:
    enabled: frozenset = frozenset(RULE_IDS)
    caps: dict = field(default_factory=dict)
    default_cap: int = DEFAULT_CAP

    def __post_init__(self) -> None:
        unknown = set(self.enabled) - set(RULE_IDS)
        if unknown:
            raise ValueError(f"unknown rules: {sorted(unknown)}")
        if self.default_cap < 1 or any(c < 1 for c in self.caps.values()):
            raise ValueError("rule caps must be at least 1")

    def cap(self, rule: str) -> int:
        return self.caps.get(rule, self.default_cap)

    def without(self, *rules: str) -> "RuleConfig":
        return RuleConfig(self.enabled - set(rules), self.caps, self.default_cap)


# ------------------------------------------------------------ expression kit


def _lit(v: int, W: int) -> BvLit:
    return BvLit(v & ((1 << W) - 1))


def _op(op: str, a: Expr, b: Expr, W: int) -> Expr:
    """Build a binary expression, folding literal operands."""
    if isinstance(a, BvLit) and isinstance(b, BvLit):
        from .ir import apply_binop
        v = apply_binop(op, a.value, b.value, W)
        return BoolLit(v) if isinstance(v, bool) else BvLit(v)
    if op == "+" and isinstance(b, BvLit) and b.value == 0:
        return a
    if op == "+" and isinstance(a, BvLit) and a.value == 0:
        return b
    if op in ("*", "/") and isinstance(b, BvLit) and b.value == 1:
        return a
    if op == "*" and isinstance(a, BvLit) and a.value == 1:
        return b
    return BinOp(op, a, b)


def _sum(terms: list[Expr], W: int) -> Expr:
    if not terms:
        return BvLit(0)
    out = terms[0]
    for t in terms[1:]:
        out = _op("+", out, t, W)
    return out


def _summands(e: Expr) -> list[Expr]:
    if isinstance(e, BinOp) and e.op == "+":
        return _summands(e.lhs) + _summands(e.rhs)
    return [e]


def _vars_in_order(e: Expr) -> list[str]:
    out: list[str] = []
    for x in subexprs(e):
        if isinstance(x, Var) and x.name not in out:
            out.append(x.name)
    return out


# ------------------------------------------------------------ loop analysis


@dataclass
class _LoopInfo:
    loop: While
    modset: frozenset
    mod_order: list
    inits: dict          # var -> initial expression before the loop
    strides: dict        # var -> signed stride constant
    doubling: list
    halving: list


def _classify_update(v: str, e: Expr, W: int):
    """Return ("stride", d), ("double",) or ("halve",) for a recognised update."""
    if isinstance(e, BinOp):
        a, b = e.lhs, e.rhs
        if e.op == "+" and a == Var(v) and isinstance(b, BvLit) and b.value != 0:
            return ("stride", b.value)
        if e.op == "+" and b == Var(v) and isinstance(a, BvLit) and a.value != 0:
            return ("stride", a.value)
        if e.op == "-" and a == Var(v) and isinstance(b, BvLit) and b.value != 0:
            return ("stride", -b.value)
        if e.op == "<<" and a == Var(v) and b == BvLit(1):
            return ("double",)
        if e.op == "*" and ((a == Var(v) and b == BvLit(2)) or (b == Var(v) and a == BvLit(2))):
            return ("double",)
        if e.op == "+" and a == Var(v) and b == Var(v):
            return ("double",)
        if e.op in (">>", "/") and a == Var(v) and (b == BvLit(1) if e.op == ">>" else b == BvLit(2)):
            return ("halve",)
    return None


def _updates(body, modset) -> dict:
    kinds: dict[str, set] = {}
    for st in walk(body):
        if isinstance(st, Assign):
            kinds.setdefault(st.target, set()).add(_classify_update(st.target, st.value, 16))
        elif isinstance(st, Havoc):
            for t in st.targets:
                kinds.setdefault(t.name, set()).add(None)
    return {v: next(iter(k)) for v, k in kinds.items() if len(k) == 1 and None not in k}


def _find_init(stmts, idx: int, v: str, loop_mod: frozenset) -> Optional[Expr]:
    """Syntactic value of ``v`` on entry to ``stmts[idx]``, searching backwards
    through the enclosing statement list only."""
    touched: set[str] = set()
    for st in reversed(stmts[:idx]):
        if isinstance(st, Assign) and st.target == v:
            e = st.value
            fv = free_vars(e)
            if any(isinstance(x, (Ghost,)) for x in subexprs(e)):
                return None
            from .ir import array_reads
            if array_reads(e) or fv & (touched | loop_mod):
                return None
            return e
        mod = compute_modset([st])
        if v in mod:
            return None
        touched |= mod
    return None


def _loop_infos(p: Program) -> list[_LoopInfo]:
    out: list[_LoopInfo] = []

    def go(stmts):
        for i, st in enumerate(stmts):
            if isinstance(st, While):
                mods = modset_order(st.body)
                mset = frozenset(mods)
                kinds = p.var_kinds()
                upd = _updates(st.body, mset)
                inits = {}
                for v in mods:
                    if kinds.get(v) == "bv":
                        e = _find_init(stmts, i, v, mset)
                        if e is not None:
                            inits[v] = e
                strides = {v: u[1] for v, u in upd.items() if u[0] == "stride" and kinds.get(v) == "bv"}
                dbl = [v for v in mods if upd.get(v) == ("double",)]
                hlv = [v for v in mods if upd.get(v) == ("halve",)]
                out.append(_LoopInfo(st, mset, mods, inits, strides, dbl, hlv))
                go(st.body)
            elif isinstance(st, If):
                go(st.then)
                go(st.orelse)

    go(p.body)
    return out


def _log_stmts(body) -> list:
    return [st for st in walk(body) if isinstance(st, (LogWrite, LogRead))]


def _single_defs(p: Program) -> dict:
    """Locals assigned exactly once, outside every loop."""
    counts: dict[str, int] = {}
    in_loop: set[str] = set()
    defs: dict[str, Expr] = {}

    def go(stmts, looped):
        for st in stmts:
            if isinstance(st, Assign):
                counts[st.target] = counts.get(st.target, 0) + 1
                defs[st.target] = st.value
                if looped:
                    in_loop.add(st.target)
            elif isinstance(st, Havoc):
                for t in st.targets:
                    counts[t.name] = counts.get(t.name, 0) + 2
            elif isinstance(st, If):
                go(st.then, looped)
                go(st.orelse, looped)
            elif isinstance(st, While):
                go(st.body, True)

    go(p.body, False)
    return {v: defs[v] for v, n in counts.items() if n == 1 and v not in in_loop}


def _substitute(e: Expr, defs: dict, depth: int = 0) -> Expr:
    if depth > 16:
        return e
    if isinstance(e, Var) and e.name in defs:
        return _substitute(defs[e.name], defs, depth + 1)
    if isinstance(e, BinOp):
        return BinOp(e.op, _substitute(e.lhs, defs, depth), _substitute(e.rhs, defs, depth))
    if isinstance(e, Not):
        return Not(_substitute(e.operand, defs, depth))
    return e


def _poly(e: Expr, W: int) -> Optional[dict]:
    """Normalize +, -, * over literals and variables to {monomial: coefficient}."""
    m = (1 << W) - 1
    if isinstance(e, BvLit):
        return {(): e.value & m} if e.value & m else {}
    if isinstance(e, Var):
        return {(e.name,): 1}
    if isinstance(e, BinOp) and e.op in ("+", "-", "*"):
        a, b = _poly(e.lhs, W), _poly(e.rhs, W)
        if a is None or b is None:
            return None
        out: dict = {}
        if e.op == "*":
            for ka, va in a.items():
                for kb, vb in b.items():
                    k = tuple(sorted(ka + kb))
                    out[k] = (out.get(k, 0) + va * vb) & m
        else:
            out = dict(a)
            sign = 1 if e.op == "+" else -1
            for kb, vb in b.items():
                out[kb] = (out.get(kb, 0) + sign * vb) & m
        return {k: v for k, v in out.items() if v}
    return None


# -------------------------------------------------------------------- rules


class _Ctx:
    def __init__(self, p: Program, info: _LoopInfo) -> None:
        self.p = p
        self.W = p.bit_width
        self.info = info
        self.kinds = p.var_kinds()
        self.threads = {d.name: d.thread for d in p.params if d.thread is not None}

    def lit(self, v: int) -> BvLit:
        return _lit(v, self.W)

    def op(self, o: str, a: Expr, b: Expr) -> Expr:
        return _op(o, a, b, self.W)

    def invariant_expr(self, e: Expr) -> bool:
        return not (free_vars(e) & self.info.modset)


def _rule_r0(c: _Ctx) -> list[Expr]:
    defs = _single_defs(c.p)
    out: list[Expr] = []
    for st in _log_stmts(c.info.loop.body):
        poly = _poly(_substitute(st.offset, defs), c.W)
        if not poly:
            continue
        has, off = ghost_pair(st.array, log_direction(st))
        parts = _break_access(c, poly)
        if parts is None:
            continue
        for pitch, comps, counter in parts:
            ctx: Expr = off
            if pitch is not None:
                ctx = c.op(pitch[0], off, Var(pitch[1]))
            ordered = sorted(comps, key=lambda t: -t[1])
            for k, (comp, coeff) in enumerate(ordered):
                if k == 0:
                    ext = c.op("/", ctx, c.lit(coeff))
                else:
                    ext = c.op("/", c.op("%", ctx, c.lit(ordered[k - 1][1])), c.lit(coeff))
                if k == len(ordered) - 1 and counter is not None and coeff == 1:
                    d = abs(c.info.strides[counter])
                    if d > 1:
                        ext = c.op("%", ext, c.lit(d))
                out.append(BinOp("==>", has, BinOp("==", ext, Var(comp))))
    return out


def _break_access(c: _Ctx, poly: dict):
    """Split an offset polynomial into an outer part scaled by a pitch variable
    and an inner part. Returns [(pitch-op, components, counter)] or None."""
    outer: list[tuple[str, int]] = []
    inner: list[tuple[str, int]] = []
    pitch: Optional[str] = None
    counter: Optional[str] = None
    for mono, coeff in poly.items():
        comps = [v for v in mono if v in c.threads]
        rest = [v for v in mono if v not in c.threads]
        if not mono:
            return None
        if not comps:
            if len(rest) == 1 and rest[0] in c.info.strides and coeff == 1 and counter is None:
                counter = rest[0]
                continue
            return None
        if len(comps) != 1:
            return None
        if not rest:
            inner.append((comps[0], coeff))
            continue
        if len(rest) != 1 or rest[0] in c.info.modset or c.kinds.get(rest[0]) != "bv":
            return None
        if pitch is not None and rest[0] != pitch:
            return None
        pitch = rest[0]
        outer.append((comps[0], coeff))
    if not outer and not inner:
        return None
    for part in (outer, inner):
        coeffs = [k for _, k in part]
        if len(set(coeffs)) != len(coeffs):
            return None
    res = []
    if outer:
        res.append((("/", pitch), outer, None))
        if inner:
            res.append((("%", pitch), inner, counter))
    else:
        res.append((None, inner, counter))
    return res


def _rule_r1(c: _Ctx) -> list[Expr]:
    out: list[Expr] = []
    for st in _log_stmts(c.info.loop.body):
        terms = _summands(st.offset)
        moving = [t for t in terms if free_vars(t) & c.info.modset]
        if len(moving) != 1:
            continue
        base_terms = [t for t in terms if t is not moving[0] and t not in moving]
        if any(not c.invariant_expr(t) for t in base_terms):
            continue
        t = moving[0]
        has, off = ghost_pair(st.array, log_direction(st))
        base = _sum(base_terms, c.W)
        if isinstance(t, Var) and t.name in c.info.strides and t.name in c.info.inits:
            d = abs(c.info.strides[t.name])
            if d < 2:
                continue
            mod = c.lit(d)
            rhs = c.op("%", c.op("+", base, c.info.inits[t.name]), mod)
        elif isinstance(t, BinOp) and t.op == "*":
            a, b = t.lhs, t.rhs
            if isinstance(b, Var) and b.name in c.info.strides:
                a, b = b, a
            if not (isinstance(a, Var) and a.name in c.info.strides and c.invariant_expr(b)):
                continue
            if b == BvLit(1):
                continue
            mod = b
            rhs = c.op("%", base, mod)
        else:
            continue
        out.append(BinOp("==>", has, BinOp("==", c.op("%", off, mod), rhs)))
    return out


def _block_ranges(c: _Ctx):
    guard_bounds = set()
    for g in conjuncts(c.info.loop.guard):
        if isinstance(g, BinOp) and g.op == "<" and isinstance(g.lhs, Var) and isinstance(g.rhs, BvLit):
            guard_bounds.add((g.lhs.name, g.rhs.value))
    for st in _log_stmts(c.info.loop.body):
        terms = _summands(st.offset)
        if len(terms) != 2:
            continue
        for scaled, idx in (terms, terms[::-1]):
            if not (isinstance(idx, Var) and idx.name in c.info.modset):
                continue
            if not (isinstance(scaled, BinOp) and scaled.op == "*"):
                continue
            a, b = scaled.lhs, scaled.rhs
            if isinstance(a, Var) and isinstance(b, BvLit):
                a, b = b, a
            if not (isinstance(a, BvLit) and a.value > 1 and isinstance(b, Var) and c.invariant_expr(b)):
                continue
            if (idx.name, a.value) not in guard_bounds:
                continue
            yield st, a, b
            break


def _rule_r2(c: _Ctx) -> list[Expr]:
    out = []
    for st, C, b in _block_ranges(c):
        has, off = ghost_pair(st.array, log_direction(st))
        out.append(BinOp("==>", has, BinOp("<=", c.op("*", C, b), off)))
    return out


def _rule_r3(c: _Ctx) -> list[Expr]:
    out = []
    for st, C, b in _block_ranges(c):
        has, off = ghost_pair(st.array, log_direction(st))
        out.append(BinOp("==>", has, BinOp("<", off, c.op("*", C, c.op("+", b, c.lit(1))))))
    return out


def _rule_r8(c: _Ctx) -> list[Expr]:
    return [BinOp("<=", c.lit(0), Var(v)) for v in _vars_in_order(c.info.loop.guard)
            if v in c.info.modset and c.kinds.get(v) == "bv"]


def _rule_r9(c: _Ctx) -> list[Expr]:
    out = []
    for v in c.info.mod_order:
        if v in c.info.inits:
            e = c.info.inits[v]
            out += [BinOp("<=", e, Var(v)), BinOp("<=", Var(v), e)]
    return out


def _rule_r10(c: _Ctx) -> list[Expr]:
    out = []
    for v in c.info.mod_order:
        if v in c.info.strides and v in c.info.inits:
            d = c.lit(abs(c.info.strides[v]))
            out.append(BinOp("==", BinOp("%", Var(v), d), c.op("%", c.info.inits[v], d)))
    return out


def _no_access(c: _Ctx, direction: str) -> list[Expr]:
    inside = {(st.array, log_direction(st)) for st in _log_stmts(c.info.loop.body)}
    anywhere = {(st.array, log_direction(st)) for st in _log_stmts(c.p.body)}
    out = []
    for a in c.p.arrays:
        key = (a.name, direction)
        if key in anywhere and key not in inside:
            has, _ = ghost_pair(a.name, direction)
            out.append(BinOp("==", has, BoolLit(False)))
    return out


def _rule_r12(c: _Ctx) -> list[Expr]:
    return _no_access(c, "read")


def _rule_r13(c: _Ctx) -> list[Expr]:
    return _no_access(c, "write")


def _pow2(c: _Ctx, v: str, with_zero: bool) -> Expr:
    vals = ([0] if with_zero else []) + [1 << k for k in range(c.W)]
    out: Optional[Expr] = None
    for x in vals:
        eq = BinOp("==", Var(v), c.lit(x))
        out = eq if out is None else BinOp("||", out, eq)
    return out


def _rule_r14(c: _Ctx) -> list[Expr]:
    return [_pow2(c, v, True) for v in c.info.mod_order if v in c.info.doubling + c.info.halving]


def _rule_r15(c: _Ctx) -> list[Expr]:
    return [_pow2(c, v, False) for v in c.info.mod_order if v in c.info.doubling + c.info.halving]


def _rule_r17(c: _Ctx) -> list[Expr]:
    out = []
    for u in c.info.doubling:
        for v in c.info.halving:
            if u in c.info.inits and v in c.info.inits:
                rhs = c.op("*", c.info.inits[u], c.info.inits[v])
                out.append(BinOp("==", BinOp("*", Var(u), Var(v)), rhs))
    return out


RULES: dict[str, Callable[[_Ctx], list[Expr]]] = {
    "r0": _rule_r0, "r1": _rule_r1, "r2": _rule_r2, "r3": _rule_r3, "r8": _rule_r8,
    "r9": _rule_r9, "r10": _rule_r10, "r12": _rule_r12, "r13": _rule_r13, "r14": _rule_r14,
    "r15": _rule_r15, "r17": _rule_r17,
}
assert tuple(RULES) == RULE_IDS


def generate_candidates(p: Program, cfg: Optional[RuleConfig] = None) -> list[Candidate]:
    """Candidate pragmas plus every enabled rule's guesses, with sequential ids."""
    cfg = cfg or RuleConfig()
    enabled = set(cfg.enabled) - set(p.disabled_rules)
    out: list[Candidate] = []
    for info in _loop_infos(p):
        L = info.loop.loop_id
        for inv in info.loop.invariants:
            if inv.origin == "candidate":
                out.append(Candidate(len(out), PRAGMA_RULE, L, inv.expr))
        ctx = _Ctx(p, info)
        for rule in RULE_IDS:
            if rule not in enabled:
                continue
            seen: list[Expr] = []
            for e in RULES[rule](ctx):
                if e in seen:
                    continue
                if len(seen) >= cfg.cap(rule):
                    break
                seen.append(e)
                out.append(Candidate(len(out), rule, L, e))
    return out


def rule_trigger_report(p: Program, cfg: Optional[RuleConfig] = None) -> dict[str, int]:
    counts = {r: 0 for r in RULE_IDS}
    for c in generate_candidates(p, cfg):
        if c.rule in counts:
            counts[c.rule] += 1
    return counts
