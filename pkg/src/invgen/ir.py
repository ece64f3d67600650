"""MVL: a small verification language with structured loops and ghost access logs.

Expressions and statements are immutable dataclasses. Bit-vector arithmetic is
unsigned and wraps at the program's bit width; division and remainder by zero
yield the all-ones value.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Protocol, Union

GHOST_FIELDS = ("write_has_occurred", "write_offset", "read_has_occurred", "read_offset")
ARITH_OPS = ("+", "-", "*", "/", "%", "<<", ">>", "&", "|", "^")
CMP_OPS = ("<", "<=")
EQ_OPS = ("==", "!=")
LOGIC_OPS = ("&&", "||", "==>")
BINARY_OPS = ARITH_OPS + CMP_OPS + EQ_OPS + LOGIC_OPS
MAX_WIDTH = 16


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class BvLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Ghost:
    field: str
    array: str

    @property
    def name(self) -> str:
        return f"{self.field}({self.array})"

    @property
    def is_flag(self) -> bool:
        return self.field.endswith("has_occurred")

    @property
    def direction(self) -> str:
        return self.field.split("_", 1)[0]


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class ArrayRead:
    array: str
    offset: "Expr"


Expr = Union[BvLit, BoolLit, Var, Ghost, BinOp, Not, ArrayRead]
Location = Union[Var, Ghost]

TRUE = BoolLit(True)
FALSE = BoolLit(False)


def ghost_pair(array: str, direction: str) -> tuple[Ghost, Ghost]:
    return Ghost(f"{direction}_has_occurred", array), Ghost(f"{direction}_offset", array)


def ghost_from_name(name: str) -> Optional[Ghost]:
    if name.endswith(")") and "(" in name:
        fld, arr = name[:-1].split("(", 1)
        if fld in GHOST_FIELDS:
            return Ghost(fld, arr)
    return None


def location(name: str) -> Location:
    g = ghost_from_name(name)
    return g if g is not None else Var(name)


def conj(parts: Iterable[Expr]) -> Expr:
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = BinOp("&&", out, p)
    return out


def conjuncts(e: Expr) -> list[Expr]:
    if isinstance(e, BinOp) and e.op == "&&":
        return conjuncts(e.lhs) + conjuncts(e.rhs)
    return [e]


def subexprs(e: Expr) -> Iterator[Expr]:
    """Post-order traversal; this is also the order ArrayReads are drawn in."""
    if isinstance(e, BinOp):
        yield from subexprs(e.lhs)
        yield from subexprs(e.rhs)
    elif isinstance(e, Not):
        yield from subexprs(e.operand)
    elif isinstance(e, ArrayRead):
        yield from subexprs(e.offset)
    yield e


@functools.lru_cache(maxsize=65536)
def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Ghost):
        return frozenset((e.name,))
    if isinstance(e, BinOp):
        return free_vars(e.lhs) | free_vars(e.rhs)
    if isinstance(e, Not):
        return free_vars(e.operand)
    if isinstance(e, ArrayRead):
        return free_vars(e.offset)
    return frozenset()


def array_reads(e: Expr) -> list[ArrayRead]:
    return [x for x in subexprs(e) if isinstance(x, ArrayRead)]


def has_ghost(e: Expr) -> bool:
    return any(isinstance(x, Ghost) for x in subexprs(e))


# ----------------------------------------------------------------- statements

def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class Havoc:
    targets: tuple[Location, ...]
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class Assert:
    cond: Expr
    tag: str
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class Assume:
    cond: Expr
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class Invariant:
    expr: Expr
    origin: str = "user"  # "user" or "candidate" (a candidate pragma)
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class While:
    guard: Expr
    invariants: tuple[Invariant, ...]
    body: tuple["Stmt", ...]
    loop_id: str
    span: Optional[SourceSpan] = _span_field()

    @property
    def user_invariants(self) -> tuple[Invariant, ...]:
        return tuple(i for i in self.invariants if i.origin == "user")


@dataclass(frozen=True)
class LogWrite:
    array: str
    offset: Expr
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class LogRead:
    array: str
    offset: Expr
    span: Optional[SourceSpan] = _span_field()


Stmt = Union[Assign, Havoc, Assert, Assume, If, While, LogWrite, LogRead]
LogStmt = (LogWrite, LogRead)


def log_direction(st: Union[LogWrite, LogRead]) -> str:
    return "write" if isinstance(st, LogWrite) else "read"


def stmt_exprs(st: Stmt) -> list[Expr]:
    """Expressions evaluated directly by a statement (not nested statements)."""
    if isinstance(st, Assign):
        return [st.value]
    if isinstance(st, (Assert, Assume)):
        return [st.cond]
    if isinstance(st, If):
        return [st.cond]
    if isinstance(st, While):
        return [st.guard]
    if isinstance(st, (LogWrite, LogRead)):
        return [st.offset]
    return []


def walk(stmts: Iterable[Stmt]) -> Iterator[Stmt]:
    """Pre-order walk over a statement list, descending into ifs and loops."""
    for st in stmts:
        yield st
        if isinstance(st, If):
            yield from walk(st.then)
            yield from walk(st.orelse)
        elif isinstance(st, While):
            yield from walk(st.body)


def loops(stmts: Iterable[Stmt]) -> list[While]:
    return [st for st in walk(stmts) if isinstance(st, While)]


def asserts(stmts: Iterable[Stmt]) -> list[Assert]:
    return [st for st in walk(stmts) if isinstance(st, Assert)]


def stmt_count(stmts: Iterable[Stmt]) -> int:
    return sum(1 for _ in walk(stmts))


# ------------------------------------------------------------------- programs


@dataclass(frozen=True)
class ThreadComponent:
    dim: str
    kind: str  # "thread" or "block"


@dataclass(frozen=True)
class VarDecl:
    name: str
    kind: str  # "bv" or "bool"
    thread: Optional[ThreadComponent] = None
    span: Optional[SourceSpan] = _span_field()


@dataclass(frozen=True)
class ArrayDecl:
    name: str
    span: Optional[SourceSpan] = _span_field()

    @property
    def ghosts(self) -> tuple[Ghost, ...]:
        return tuple(Ghost(f, self.name) for f in GHOST_FIELDS)


@dataclass(frozen=True)
class Program:
    name: str
    bit_width: int
    params: tuple[VarDecl, ...] = ()
    locals: tuple[VarDecl, ...] = ()
    arrays: tuple[ArrayDecl, ...] = ()
    preconditions: tuple[Expr, ...] = ()
    body: tuple[Stmt, ...] = ()
    disabled_rules: frozenset[str] = frozenset()

    @property
    def mask(self) -> int:
        return (1 << self.bit_width) - 1

    def decl(self, name: str) -> Optional[VarDecl]:
        for d in self.params + self.locals:
            if d.name == name:
                return d
        return None

    def var_kinds(self) -> dict[str, str]:
        kinds = {d.name: d.kind for d in self.params + self.locals}
        for a in self.arrays:
            for g in a.ghosts:
                kinds[g.name] = "bool" if g.is_flag else "bv"
        return kinds

    def with_body(self, body: Iterable[Stmt]) -> "Program":
        return Program(self.name, self.bit_width, self.params, self.locals, self.arrays,
                       self.preconditions, tuple(body), self.disabled_rules)

    def with_width(self, width: int) -> "Program":
        return Program(self.name, width, self.params, self.locals, self.arrays,
                       self.preconditions, self.body, self.disabled_rules)


@dataclass(frozen=True)
class Candidate:
    """A speculated invariant. Status lives in HoudiniResult, not here."""

    id: int
    rule: str
    loop_id: str
    expr: Expr

    @property
    def key(self) -> tuple[str, str, Expr]:
        return (self.rule, self.loop_id, self.expr)


# ---------------------------------------------------------------- typechecking


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: Optional[SourceSpan] = None

    def __str__(self) -> str:
        return f"{self.span}: {self.message}" if self.span else self.message


class _Typer:
    def __init__(self, p: Program, derived: bool) -> None:
        self.p = p
        self.derived = derived
        self.kinds = p.var_kinds()
        self.arrays = {a.name for a in p.arrays}
        self.diags: list[Diagnostic] = []

    def err(self, msg: str, span: Optional[SourceSpan]) -> None:
        self.diags.append(Diagnostic(msg, span))

    def type_of(self, e: Expr, span, *, ghosts_ok: bool, reads_ok: bool = True,
                scope: Optional[set[str]] = None) -> Optional[str]:
        if isinstance(e, BvLit):
            if not 0 <= e.value <= self.p.mask:
                self.err(f"literal {e.value} does not fit in {self.p.bit_width} bits", span)
            return "bv"
        if isinstance(e, BoolLit):
            return "bool"
        if isinstance(e, Var):
            if e.name not in self.kinds or ghost_from_name(e.name):
                self.err(f"undeclared variable '{e.name}'", span)
                return None
            if scope is not None and e.name not in scope:
                self.err(f"variable '{e.name}' not allowed here", span)
            return self.kinds[e.name]
        if isinstance(e, Ghost):
            if e.array not in self.arrays:
                self.err(f"undeclared array '{e.array}'", span)
                return None
            if not ghosts_ok:
                self.err(f"ghost '{e.name}' may only appear in asserts and invariants", span)
            return "bool" if e.is_flag else "bv"
        if isinstance(e, ArrayRead):
            if e.array not in self.arrays:
                self.err(f"undeclared array '{e.array}'", span)
            if not reads_ok:
                self.err("array reads are not allowed here", span)
            self.expect(e.offset, "bv", span, ghosts_ok=ghosts_ok, reads_ok=reads_ok, scope=scope)
            return "bv"
        if isinstance(e, Not):
            self.expect(e.operand, "bool", span, ghosts_ok=ghosts_ok, reads_ok=reads_ok, scope=scope)
            return "bool"
        if isinstance(e, BinOp):
            kw = dict(ghosts_ok=ghosts_ok, reads_ok=reads_ok, scope=scope)
            if e.op in ARITH_OPS:
                self.expect(e.lhs, "bv", span, **kw)
                self.expect(e.rhs, "bv", span, what=("shift amount" if e.op in ("<<", ">>") else None), **kw)
                return "bv"
            if e.op in CMP_OPS:
                self.expect(e.lhs, "bv", span, **kw)
                self.expect(e.rhs, "bv", span, **kw)
                return "bool"
            if e.op in EQ_OPS:
                lt = self.type_of(e.lhs, span, **kw)
                rt = self.type_of(e.rhs, span, **kw)
                if lt and rt and lt != rt:
                    self.err(f"operands of '{e.op}' have types {lt} and {rt}", span)
                return "bool"
            if e.op in LOGIC_OPS:
                self.expect(e.lhs, "bool", span, **kw)
                self.expect(e.rhs, "bool", span, **kw)
                return "bool"
            self.err(f"unknown operator '{e.op}'", span)
            return None
        self.err(f"not an expression: {e!r}", span)
        return None

    def expect(self, e: Expr, kind: str, span, what: Optional[str] = None, **kw) -> None:
        t = self.type_of(e, span, **kw)
        if t is not None and t != kind:
            label = what or "operand"
            self.err(f"{label} must be {kind}, found {t}", span)

    def block(self, stmts, loop_ids: set, tags: set) -> None:
        for st in stmts:
            self.stmt(st, loop_ids, tags)

    def stmt(self, st: Stmt, loop_ids: set, tags: set) -> None:
        sp = st.span
        g = self.derived
        if isinstance(st, Assign):
            if st.target not in self.kinds or ghost_from_name(st.target):
                self.err(f"undeclared variable '{st.target}'", sp)
                return
            if any(d.name == st.target for d in self.p.params):
                self.err(f"cannot assign to parameter '{st.target}'", sp)
            self.expect(st.value, self.kinds[st.target], sp, ghosts_ok=g)
        elif isinstance(st, Havoc):
            for t in st.targets:
                if isinstance(t, Ghost):
                    if not g:
                        self.err(f"cannot havoc ghost '{t.name}'", sp)
                    if t.array not in self.arrays:
                        self.err(f"undeclared array '{t.array}'", sp)
                elif t.name not in self.kinds:
                    self.err(f"undeclared variable '{t.name}'", sp)
                elif any(d.name == t.name for d in self.p.params):
                    self.err(f"cannot havoc parameter '{t.name}'", sp)
        elif isinstance(st, Assert):
            self.expect(st.cond, "bool", sp, ghosts_ok=True)
            if st.tag in tags and not g:
                self.err(f"duplicate assert tag '{st.tag}'", sp)
            tags.add(st.tag)
        elif isinstance(st, Assume):
            self.expect(st.cond, "bool", sp, ghosts_ok=g)
        elif isinstance(st, If):
            self.expect(st.cond, "bool", sp, ghosts_ok=g)
            self.block(st.then, loop_ids, tags)
            self.block(st.orelse, loop_ids, tags)
        elif isinstance(st, While):
            if st.loop_id in loop_ids:
                self.err(f"duplicate loop id '{st.loop_id}'", sp)
            loop_ids.add(st.loop_id)
            self.expect(st.guard, "bool", sp, ghosts_ok=g)
            for inv in st.invariants:
                self.expect(inv.expr, "bool", inv.span or sp, ghosts_ok=True, reads_ok=False)
            self.block(st.body, loop_ids, tags)
        elif isinstance(st, (LogWrite, LogRead)):
            if st.array not in self.arrays:
                self.err(f"undeclared array '{st.array}'", sp)
            self.expect(st.offset, "bv", sp, ghosts_ok=g)
        else:
            self.err(f"not a statement: {st!r}", None)


def typecheck(p: Program, *, derived: bool = False) -> list[Diagnostic]:
    """Check declarations, scoping and typing.

    ``derived`` relaxes the rules that only source programs must obey: ghost
    havocs and ghost assumes (inserted by loop cutting) and repeated tags
    (unrolled copies share a tag).
    """
    t = _Typer(p, derived)
    if not 1 <= p.bit_width <= MAX_WIDTH:
        t.err(f"bit width must be between 1 and {MAX_WIDTH}, got {p.bit_width}", None)
        return t.diags
    seen: set[str] = set()
    for d in list(p.params) + list(p.locals) + list(p.arrays):
        if d.name in seen:
            t.err(f"duplicate declaration of '{d.name}'", d.span)
        seen.add(d.name)
        if isinstance(d, VarDecl) and d.kind not in ("bv", "bool"):
            t.err(f"unknown kind '{d.kind}' for '{d.name}'", d.span)
        if isinstance(d, VarDecl) and d.thread is not None and d not in p.params:
            t.err(f"thread_param only applies to parameters ('{d.name}')", d.span)
    params = {d.name for d in p.params}
    for e in p.preconditions:
        t.expect(e, "bool", None, ghosts_ok=False, reads_ok=False, scope=params)
    t.block(p.body, set(), set())
    return t.diags


def typecheck_candidate(p: Program, expr: Expr) -> list[Diagnostic]:
    t = _Typer(p, False)
    t.expect(expr, "bool", None, ghosts_ok=True, reads_ok=False)
    return t.diags


# ------------------------------------------------------------ concrete eval


class Chooser(Protocol):
    def below(self, n: int) -> int: ...


class ScriptedChooser:
    """Replays a fixed list of choices; used to replay counterexamples."""

    def __init__(self, choices: Iterable[int]) -> None:
        self.choices = list(choices)
        self.pos = 0

    def below(self, n: int) -> int:
        if self.pos >= len(self.choices):
            raise IndexError("choice script exhausted")
        v = self.choices[self.pos]
        self.pos += 1
        if not 0 <= v < n:
            raise ValueError(f"scripted choice {v} outside [0, {n})")
        return v


class ExhaustiveChooser:
    """Depth-first odometer over every choice sequence of a program.

    Call ``below`` during a run and ``advance`` between runs; ``advance``
    returns False once every sequence has been produced.
    """

    def __init__(self) -> None:
        self.prefix: list[int] = []
        self.domains: list[int] = []
        self.pos = 0

    def below(self, n: int) -> int:
        if self.pos < len(self.prefix):
            v = self.prefix[self.pos]
        else:
            v = 0
            self.prefix.append(0)
            self.domains.append(n)
        self.pos += 1
        return v

    def advance(self) -> bool:
        del self.prefix[self.pos:]
        del self.domains[self.pos:]
        self.pos = 0
        while self.prefix:
            if self.prefix[-1] + 1 < self.domains[-1]:
                self.prefix[-1] += 1
                return True
            self.prefix.pop()
            self.domains.pop()
        return False


class AssertionFailure(Exception):
    def __init__(self, tag: str, state: "ExecState") -> None:
        super().__init__(tag)
        self.tag = tag
        self.state = state


class AssumeViolation(Exception):
    """The current path is infeasible."""


class BudgetExhausted(Exception):
    """A concrete run hit its loop-iteration budget."""


@dataclass
class ExecState:
    width: int
    env: dict[str, Union[int, bool]]
    trace: list[str] = field(default_factory=list)
    loop_iterations: int = 0
    statements: int = 0
    failures: list[str] = field(default_factory=list)
    observed: dict[tuple[str, str], list[int]] = field(default_factory=dict)

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    def ghost(self, array: str) -> dict[str, Union[int, bool]]:
        return {f: self.env[f"{f}({array})"] for f in GHOST_FIELDS}

    def copy(self) -> "ExecState":
        return ExecState(self.width, dict(self.env), list(self.trace), self.loop_iterations,
                         self.statements, list(self.failures),
                         {k: list(v) for k, v in self.observed.items()})


def initial_state(p: Program, param_values: dict[str, Union[int, bool]]) -> ExecState:
    """Params from ``param_values``; locals 0 or false; ghosts (false, 0)."""
    env: dict[str, Union[int, bool]] = {}
    for d in p.params:
        env[d.name] = param_values[d.name]
    for d in p.locals:
        env[d.name] = False if d.kind == "bool" else 0
    for a in p.arrays:
        for g in a.ghosts:
            env[g.name] = False if g.is_flag else 0
    return ExecState(p.bit_width, env)


def apply_binop(op: str, a, b, width: int):
    """Concrete semantics of one binary operator at ``width`` bits."""
    m = (1 << width) - 1
    if op == "+":
        return (a + b) & m
    if op == "-":
        return (a - b) & m
    if op == "*":
        return (a * b) & m
    if op == "/":
        return m if b == 0 else a // b
    if op == "%":
        return m if b == 0 else a % b
    if op == "<<":
        return 0 if b >= width else (a << b) & m
    if op == ">>":
        return 0 if b >= width else a >> b
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == "&&":
        return a and b
    if op == "||":
        return a or b
    if op == "==>":
        return (not a) or b
    raise ValueError(f"unknown operator {op}")


def eval_expr(e: Expr, s: ExecState, rng: Chooser):
    """Evaluate ``e`` in ``s``. Both operands are always evaluated, so the
    number and order of ArrayRead draws depends only on the expression."""
    if isinstance(e, BvLit):
        return e.value & s.mask
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, (Var, Ghost)):
        return s.env[e.name]
    if isinstance(e, BinOp):
        a = eval_expr(e.lhs, s, rng)
        b = eval_expr(e.rhs, s, rng)
        return apply_binop(e.op, a, b, s.width)
    if isinstance(e, Not):
        return not eval_expr(e.operand, s, rng)
    if isinstance(e, ArrayRead):
        eval_expr(e.offset, s, rng)
        return rng.below(1 << s.width)
    raise TypeError(f"not an expression: {e!r}")


def havoc_units(targets: Iterable[Location], kinds: dict[str, str], width: int) -> list[tuple[tuple[str, ...], int]]:
    """Group havoc targets into choice units.

    A ghost (has, offset) pair is always one unit with the canonical domain
    (false, 0) or (true, v): choice 0 is no access and choice v+1 is offset v.
    """
    units: list[tuple[tuple[str, ...], int]] = []
    seen: set[str] = set()
    for t in targets:
        if t.name in seen:
            continue
        if isinstance(t, Ghost):
            has, off = ghost_pair(t.array, t.direction)
            seen.update((has.name, off.name))
            units.append(((has.name, off.name), (1 << width) + 1))
        else:
            seen.add(t.name)
            units.append(((t.name,), 2 if kinds[t.name] == "bool" else 1 << width))
    return units


def assign_unit(env: dict, names: tuple[str, ...], choice: int, kinds: dict[str, str]) -> None:
    if len(names) == 2:
        env[names[0]] = choice > 0
        env[names[1]] = max(choice - 1, 0)
    elif kinds[names[0]] == "bool":
        env[names[0]] = bool(choice)
    else:
        env[names[0]] = choice


def block_count(body: tuple[Stmt, ...]) -> int:
    return 1 + 3 * sum(1 for st in walk(body) if isinstance(st, (If, While)))


def block_ids(body: tuple[Stmt, ...]) -> dict[int, tuple[str, ...]]:
    """Basic blocks of a program: ``entry`` plus three per If/While.

    Returns a map from ``id(stmt)`` to the block labels the statement owns:
    (then, else, join) for If and (head, body, exit) for While.
    """
    out: dict[int, tuple[str, ...]] = {}

    def go(stmts, path):
        for i, st in enumerate(stmts):
            here = f"{path}.{i}"
            if isinstance(st, If):
                out[id(st)] = (f"{here}.then", f"{here}.else", f"{here}.join")
                go(st.then, here + "t")
                go(st.orelse, here + "e")
            elif isinstance(st, While):
                out[id(st)] = (f"{here}.head", f"{here}.body", f"{here}.exit")
                go(st.body, here + "b")

    go(body, "s")
    return out


LoopHook = Callable[[While, ExecState], None]


class Interpreter:
    """Concrete interpreter.

    ``log_mode="choose"`` draws a binary choice for every log statement, as the
    checker does. ``log_mode="observe"`` leaves ghosts untouched and records the
    logged offsets in ``state.observed``; DYN uses this.
    Failing asserts are recorded in ``state.failures`` and execution continues,
    unless ``strict`` is set.
    """

    def __init__(self, p: Program, chooser: Chooser, *, log_mode: str = "choose",
                 loop_hook: Optional[LoopHook] = None, iteration_budget: Optional[int] = None,
                 strict: bool = False) -> None:
        self.p = p
        self.rng = chooser
        self.kinds = p.var_kinds()
        self.log_mode = log_mode
        self.loop_hook = loop_hook
        self.budget = iteration_budget
        self.strict = strict
        self.blocks = block_ids(p.body)
        self.state: Optional[ExecState] = None

    def draw_params(self) -> dict[str, Union[int, bool]]:
        vals: dict[str, Union[int, bool]] = {}
        for d in self.p.params:
            if d.kind == "bool":
                vals[d.name] = bool(self.rng.below(2))
            else:
                vals[d.name] = self.rng.below(1 << self.p.bit_width)
        return vals

    def run(self, params: Optional[dict] = None) -> ExecState:
        """Run the program; raises AssumeViolation on infeasible paths
        (including a violated precondition) and BudgetExhausted."""
        if params is None:
            params = self.draw_params()
        s = initial_state(self.p, params)
        self.state = s
        for pre in self.p.preconditions:
            if not eval_expr(pre, s, self.rng):
                raise AssumeViolation()
        s.trace.append("entry")
        self.exec_block(self.p.body, s)
        return s

    def exec_block(self, stmts, s: ExecState) -> None:
        for st in stmts:
            self.step(st, s)

    def step(self, st: Stmt, s: ExecState) -> None:
        s.statements += 1
        if isinstance(st, Assign):
            s.env[st.target] = eval_expr(st.value, s, self.rng)
        elif isinstance(st, Havoc):
            for names, dom in havoc_units(st.targets, self.kinds, s.width):
                assign_unit(s.env, names, self.rng.below(dom), self.kinds)
        elif isinstance(st, Assert):
            if not eval_expr(st.cond, s, self.rng):
                if self.strict:
                    raise AssertionFailure(st.tag, s)
                s.failures.append(st.tag)
        elif isinstance(st, Assume):
            if not eval_expr(st.cond, s, self.rng):
                raise AssumeViolation()
        elif isinstance(st, If):
            then_b, else_b, join_b = self.blocks.get(id(st), ("?", "?", "?"))
            if eval_expr(st.cond, s, self.rng):
                s.trace.append(then_b)
                self.exec_block(st.then, s)
            else:
                s.trace.append(else_b)
                self.exec_block(st.orelse, s)
            s.trace.append(join_b)
        elif isinstance(st, (LogWrite, LogRead)):
            off = eval_expr(st.offset, s, self.rng)
            d = log_direction(st)
            if self.log_mode == "observe":
                seen = s.observed.setdefault((st.array, d), [])
                if off not in seen:
                    seen.append(off)
            elif self.rng.below(2):
                has, offg = ghost_pair(st.array, d)
                s.env[has.name] = True
                s.env[offg.name] = off
        elif isinstance(st, While):
            head_b, body_b, exit_b = self.blocks.get(id(st), ("?", "?", "?"))
            while True:
                s.trace.append(head_b)
                if self.loop_hook is not None:
                    self.loop_hook(st, s)
                if not eval_expr(st.guard, s, self.rng):
                    break
                if self.budget is not None and s.loop_iterations >= self.budget:
                    raise BudgetExhausted()
                s.loop_iterations += 1
                s.trace.append(body_b)
                self.exec_block(st.body, s)
            s.trace.append(exit_b)
        else:
            raise TypeError(f"not a statement: {st!r}")


def step_stmt(st: Stmt, s: ExecState, rng: Chooser, p: Program) -> ExecState:
    """Execute one loop-free statement on a copy of ``s``.

    Raises AssertionFailure when an assert fails and AssumeViolation when the
    path becomes infeasible.
    """
    if isinstance(st, While) or any(isinstance(x, While) for x in walk([st])):
        raise ValueError("step_stmt only executes loop-free statements")
    out = s.copy()
    Interpreter(p, rng, strict=True).step(st, out)
    return out
