"""SMT-LIB2 (QF_BV) encoding of loop-free programs, one script per assert."""

from __future__ import annotations

from .ir import (
    ArrayRead, Assert, Assign, Assume, BoolLit, BvLit, Expr, Ghost, Havoc, If,
    LogRead, LogWrite, Not, Program, Var, While, ghost_pair, havoc_units, log_direction, walk,
)

_BV_OPS = {"+": "bvadd", "-": "bvsub", "*": "bvmul", "/": "bvudiv", "<<": "bvshl",
           ">>": "bvlshr", "&": "bvand", "|": "bvor", "^": "bvxor", "<": "bvult",
           "<=": "bvule", "==": "=", "&&": "and", "||": "or", "==>": "=>"}


class _Encoder:
    def __init__(self, p: Program, tag: str) -> None:
        self.p = p
        self.tag = tag
        self.W = p.bit_width
        self.kinds = p.var_kinds()
        self.lines: list[str] = ["(set-logic QF_BV)"]
        self.fresh = 0
        self.goals: list[tuple[str, str]] = []

    def sort(self, kind: str) -> str:
        return "Bool" if kind == "bool" else f"(_ BitVec {self.W})"

    def lit(self, v: int) -> str:
        return f"(_ bv{v & ((1 << self.W) - 1)} {self.W})"

    def name(self, base: str) -> str:
        self.fresh += 1
        return f"|{base}@{self.fresh}|"

    def declare(self, base: str, kind: str) -> str:
        nm = self.name(base)
        self.lines.append(f"(declare-const {nm} {self.sort(kind)})")
        return nm

    def define(self, base: str, kind: str, term: str) -> str:
        if term.startswith("|") or term in ("true", "false") or term.startswith("(_ bv"):
            return term
        nm = self.name(base)
        self.lines.append(f"(define-fun {nm} () {self.sort(kind)} {term})")
        return nm

    def expr(self, e: Expr, env: dict) -> str:
        if isinstance(e, BvLit):
            return self.lit(e.value)
        if isinstance(e, BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, (Var, Ghost)):
            return env[e.name]
        if isinstance(e, Not):
            return f"(not {self.expr(e.operand, env)})"
        if isinstance(e, ArrayRead):
            self.expr(e.offset, env)
            return self.declare(f"read_{e.array}", "bv")
        a = self.expr(e.lhs, env)
        b = self.expr(e.rhs, env)
        if e.op == "%":
            b = self.define("divisor", "bv", b)
            ones = self.lit(-1)
            return f"(ite (= {b} {self.lit(0)}) {ones} (bvurem {a} {b}))"
        if e.op == "!=":
            return f"(distinct {a} {b})"
        return f"({_BV_OPS[e.op]} {a} {b})"

    def block(self, stmts, env: dict, pc: str) -> tuple[dict, str]:
        for st in stmts:
            env, pc = self.stmt(st, env, pc)
        return env, pc

    def stmt(self, st, env: dict, pc: str) -> tuple[dict, str]:
        """Encode one statement; ``pc`` holds on the paths that reach it with
        every earlier assume satisfied. Assumes only narrow the paths after
        them, since a failure before an assume still counts."""
        if isinstance(st, Assign):
            env = dict(env)
            env[st.target] = self.define(st.target, self.kinds[st.target], self.expr(st.value, env))
        elif isinstance(st, Havoc):
            env = dict(env)
            for names, _ in havoc_units(st.targets, self.kinds, self.W):
                if len(names) == 2:
                    has = self.declare(names[0], "bool")
                    off = self.declare(names[1], "bv")
                    self.lines.append(f"(assert (=> (not {has}) (= {off} {self.lit(0)})))")
                    env[names[0]], env[names[1]] = has, off
                else:
                    env[names[0]] = self.declare(names[0], self.kinds[names[0]])
        elif isinstance(st, Assert):
            c = self.expr(st.cond, env)
            if st.tag == self.tag:
                self.goals.append((pc, c))
        elif isinstance(st, Assume):
            c = self.expr(st.cond, env)
            pc = self.define("pc", "bool", f"(and {pc} {c})")
        elif isinstance(st, If):
            c = self.define("cond", "bool", self.expr(st.cond, env))
            pt = self.define("pc", "bool", f"(and {pc} {c})")
            pe = self.define("pc", "bool", f"(and {pc} (not {c}))")
            te, pt = self.block(st.then, env, pt)
            ee, pe = self.block(st.orelse, env, pe)
            env = dict(env)
            for k in env:
                if te[k] != ee[k]:
                    env[k] = self.define(k, self.kinds[k], f"(ite {c} {te[k]} {ee[k]})")
            pc = self.define("pc", "bool", f"(or {pt} {pe})")
        elif isinstance(st, (LogWrite, LogRead)):
            env = dict(env)
            off = self.define("offset", "bv", self.expr(st.offset, env))
            ch = self.declare(f"log_{st.array}", "bool")
            has, offg = ghost_pair(st.array, log_direction(st))
            env[has.name] = self.define(has.name, "bool", f"(or {env[has.name]} {ch})")
            env[offg.name] = self.define(offg.name, "bv", f"(ite {ch} {off} {env[offg.name]})")
        elif isinstance(st, While):
            raise ValueError("emit_smt only accepts loop-free programs")
        return env, pc

    def run(self) -> str:
        env: dict[str, str] = {}
        for d in self.p.params:
            env[d.name] = self.declare(d.name, d.kind)
        for d in self.p.locals:
            env[d.name] = "false" if d.kind == "bool" else self.lit(0)
        for a in self.p.arrays:
            for g in a.ghosts:
                env[g.name] = "false" if g.is_flag else self.lit(0)
        for pre in self.p.preconditions:
            self.lines.append(f"(assert {self.expr(pre, env)})")
        self.block(self.p.body, env, "true")
        parts = [f"(=> {pc} {c})" for pc, c in self.goals]
        vc = parts[0] if len(parts) == 1 else ("(and " + " ".join(parts) + ")" if parts else "true")
        self.lines.append(f"; target {self.tag}")
        self.lines.append(f"(assert (not {vc}))")
        self.lines.append("(check-sat)")
        return "\n".join(self.lines) + "\n"


def emit_smt(p: Program, tag: str) -> str:
    """Script that is ``sat`` iff the assert(s) tagged ``tag`` can fail."""
    if not any(isinstance(s, Assert) and s.tag == tag for s in walk(p.body)):
        raise KeyError(f"unknown assert tag '{tag}'")
    return _Encoder(p, tag).run()
