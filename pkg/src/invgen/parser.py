"""Text frontend for .mvl files and the matching pretty-printer."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ir import (
    GHOST_FIELDS, ArrayDecl, ArrayRead, Assert, Assign, Assume, BinOp, BoolLit, BvLit,
    Diagnostic, Expr, Ghost, Havoc, If, Invariant, LogRead, LogWrite, Not, Program,
    SourceSpan, Stmt, ThreadComponent, Var, VarDecl, While, typecheck,
)

RULE_IDS = ("r0", "r1", "r2", "r3", "r8", "r9", "r10", "r12", "r13", "r14", "r15", "r17")

KEYWORDS = {
    "kernel", "width", "param", "local", "array", "bv", "bool", "requires", "disable",
    "havoc", "assert", "assume", "if", "else", "while", "invariant", "candidate",
    "log_write", "log_read", "true", "false",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>0[xX][0-9a-fA-F]+|[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==>|:=|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^<>!(){}\[\];:,=])
""", re.VERBOSE)

# binary operator precedence, loosest first; ==> is right associative
_LEVELS = [("==>",), ("||",), ("&&",), ("|",), ("^",), ("&",), ("==", "!="),
           ("<", "<=", ">", ">="), ("<<", ">>"), ("+", "-"), ("*", "/", "%")]
_PREC = {op: i for i, ops in enumerate(_LEVELS) for op in ops}


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        super().__init__("\n".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str, file: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError([Diagnostic(f"unexpected character {text[pos]!r}",
                                         SourceSpan(file, line, col))])
        kind = m.lastgroup
        val = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                if kind == "ident" and val in KEYWORDS:
                    kind = "kw"
                toks.append(_Tok(kind, val, line, col))
            col += len(val)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str, file: str) -> None:
        self.file = file
        self.toks = _lex(text, file)
        self.i = 0
        self.tag_count = 0
        self.loop_count = 0
        self.arrays: set[str] = set()

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def span(self, t: Optional[_Tok] = None) -> SourceSpan:
        t = t or self.tok
        return SourceSpan(self.file, t.line, t.col, max(len(t.text), 1))

    def fail(self, msg: str, t: Optional[_Tok] = None):
        raise ParseError([Diagnostic(msg, self.span(t))])

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected '{text}', found '{found}'")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.fail(f"expected identifier, found '{self.tok.text or 'end of input'}'")
        t = self.tok
        self.i += 1
        return t.text

    def integer(self) -> int:
        if self.tok.kind != "int":
            self.fail(f"expected integer, found '{self.tok.text or 'end of input'}'")
        t = self.tok
        self.i += 1
        return int(t.text, 0)

    # program structure
    def program(self) -> Program:
        if not self.at("kernel"):
            self.fail("expected program header 'kernel NAME width N {'")
        self.i += 1
        name = self.ident()
        self.expect("width")
        width = self.integer()
        self.expect("{")
        params: list[VarDecl] = []
        locs: list[VarDecl] = []
        arrays: list[ArrayDecl] = []
        pres: list[Expr] = []
        disabled: list[str] = []
        names: set[str] = set()
        while True:
            t = self.tok
            if self.accept("param") or self.accept("local"):
                d = self.var_decl(t, t.text == "param")
                if d.name in names:
                    self.fail(f"duplicate declaration of '{d.name}'", t)
                names.add(d.name)
                (params if t.text == "param" else locs).append(d)
            elif self.accept("array"):
                nm = self.ident()
                self.expect(";")
                if nm in names:
                    self.fail(f"duplicate declaration of '{nm}'", t)
                names.add(nm)
                self.arrays.add(nm)
                arrays.append(ArrayDecl(nm, span=self.span(t)))
            elif self.accept("requires"):
                pres.append(self.expr())
                self.expect(";")
            elif self.accept("disable"):
                while True:
                    rt = self.tok
                    r = self.ident()
                    if r not in RULE_IDS:
                        self.fail(f"unknown rule '{r}' in disable pragma", rt)
                    disabled.append(r)
                    if not self.accept(","):
                        break
                self.expect(";")
            else:
                break
        body = self.stmts_until("}")
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail(f"unexpected '{self.tok.text}' after program")
        return Program(name, width, tuple(params), tuple(locs), tuple(arrays), tuple(pres),
                       tuple(body), frozenset(disabled))

    def var_decl(self, t: _Tok, is_param: bool) -> VarDecl:
        nm = self.ident()
        self.expect(":")
        kind_tok = self.tok
        if not (self.accept("bv") or self.accept("bool")):
            self.fail("expected 'bv' or 'bool'")
        thread = None
        if self.accept("["):
            at = self.tok
            if self.ident() != "thread_param":
                self.fail("expected 'thread_param'", at)
            attrs = {"dim": "x", "kind": "thread"}
            while not self.at("]"):
                at = self.tok
                key = self.ident()
                if key not in attrs:
                    self.fail(f"unknown thread_param attribute '{key}'", at)
                self.expect("=")
                attrs[key] = self.ident()
            self.expect("]")
            if attrs["kind"] not in ("thread", "block"):
                self.fail("thread_param kind must be 'thread' or 'block'", at)
            if not is_param:
                self.fail("thread_param only applies to parameters", t)
            thread = ThreadComponent(attrs["dim"], attrs["kind"])
        self.expect(";")
        return VarDecl(nm, kind_tok.text, thread, span=self.span(t))

    def stmts_until(self, end: str) -> list[Stmt]:
        out = []
        while not self.at(end) and self.tok.kind != "eof":
            out.append(self.stmt())
        return out

    def block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        body = self.stmts_until("}")
        self.expect("}")
        return tuple(body)

    def stmt(self) -> Stmt:
        t = self.tok
        sp = self.span(t)
        if self.accept("havoc"):
            targets = [self.location()]
            while self.accept(","):
                targets.append(self.location())
            self.expect(";")
            return Havoc(tuple(targets), span=sp)
        if self.accept("assert"):
            e = self.expr()
            self.expect(";")
            tag = f"a{self.tag_count}"
            self.tag_count += 1
            return Assert(e, tag, span=sp)
        if self.accept("assume"):
            e = self.expr()
            self.expect(";")
            return Assume(e, span=sp)
        if self.accept("if"):
            self.expect("(")
            c = self.expr()
            self.expect(")")
            then = self.block()
            orelse: tuple[Stmt, ...] = ()
            if self.accept("else"):
                orelse = (self.stmt(),) if self.at("if") else self.block()
            return If(c, then, orelse, span=sp)
        if self.accept("while"):
            loop_id = f"L{self.loop_count}"
            self.loop_count += 1
            self.expect("(")
            g = self.expr()
            self.expect(")")
            invs = []
            while self.at("invariant") or self.at("candidate"):
                it = self.tok
                self.i += 1
                e = self.expr()
                self.expect(";")
                origin = "user" if it.text == "invariant" else "candidate"
                invs.append(Invariant(e, origin, span=self.span(it)))
            body = self.block()
            return While(g, tuple(invs), body, loop_id, span=sp)
        if self.accept("log_write") or self.accept("log_read"):
            arr = self.ident()
            self.expect("[")
            off = self.expr()
            self.expect("]")
            self.expect(";")
            cls = LogWrite if t.text == "log_write" else LogRead
            return cls(arr, off, span=sp)
        if self.tok.kind == "ident":
            target = self.ident()
            self.expect(":=")
            e = self.expr()
            self.expect(";")
            return Assign(target, e, span=sp)
        self.fail(f"expected statement, found '{t.text or 'end of input'}'")

    def location(self):
        nm = self.ident()
        if nm in GHOST_FIELDS and self.accept("("):
            arr = self.ident()
            self.expect(")")
            return Ghost(nm, arr)
        return Var(nm)

    # expressions
    def expr(self, level: int = 0) -> Expr:
        if level == len(_LEVELS):
            return self.unary()
        ops = _LEVELS[level]
        lhs = self.expr(level + 1)
        if ops == ("==>",):
            if self.accept("==>"):
                return BinOp("==>", lhs, self.expr(level))
            return lhs
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.tok.text
            self.i += 1
            rhs = self.expr(level + 1)
            if op == ">":
                lhs = BinOp("<", rhs, lhs)
            elif op == ">=":
                lhs = BinOp("<=", rhs, lhs)
            else:
                lhs = BinOp(op, lhs, rhs)
        return lhs

    def unary(self) -> Expr:
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("-"):
            return BinOp("-", BvLit(0), self.unary())
        return self.atom()

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            return BvLit(self.integer())
        if self.accept("true"):
            return BoolLit(True)
        if self.accept("false"):
            return BoolLit(False)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            nm = self.ident()
            if nm in GHOST_FIELDS and self.accept("("):
                arr = self.ident()
                self.expect(")")
                return Ghost(nm, arr)
            if self.accept("["):
                off = self.expr()
                self.expect("]")
                return ArrayRead(nm, off)
            return Var(nm)
        self.fail(f"expected expression, found '{t.text or 'end of input'}'")


def parse(text: str, file: str = "<input>") -> Program:
    """Parse and typecheck MVL source. Raises ParseError with diagnostics."""
    p = _Parser(text, file).program()
    diags = typecheck(p)
    if diags:
        raise ParseError(diags)
    return p


def parse_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), str(path))


# ------------------------------------------------------------ pretty printing


def expr_str(e: Expr, parent: int = -1) -> str:
    if isinstance(e, BvLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, (Var, Ghost)):
        return e.name
    if isinstance(e, ArrayRead):
        return f"{e.array}[{expr_str(e.offset)}]"
    if isinstance(e, Not):
        return "!" + expr_str(e.operand, len(_LEVELS))
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        if e.op == "==>":
            s = f"{expr_str(e.lhs, prec + 1)} ==> {expr_str(e.rhs, prec)}"
        else:
            s = f"{expr_str(e.lhs, prec)} {e.op} {expr_str(e.rhs, prec + 1)}"
        return f"({s})" if prec < parent else s
    raise TypeError(f"not an expression: {e!r}")


def _stmt_lines(st: Stmt, ind: str, auto_tags: list[int]) -> list[str]:
    if isinstance(st, Assign):
        return [f"{ind}{st.target} := {expr_str(st.value)};"]
    if isinstance(st, Havoc):
        return [f"{ind}havoc {', '.join(t.name for t in st.targets)};"]
    if isinstance(st, Assert):
        expected = f"a{auto_tags[0]}"
        auto_tags[0] += 1
        note = "" if st.tag == expected else f"  // {st.tag}"
        return [f"{ind}assert {expr_str(st.cond)};{note}"]
    if isinstance(st, Assume):
        return [f"{ind}assume {expr_str(st.cond)};"]
    if isinstance(st, (LogWrite, LogRead)):
        kw = "log_write" if isinstance(st, LogWrite) else "log_read"
        return [f"{ind}{kw} {st.array}[{expr_str(st.offset)}];"]
    if isinstance(st, If):
        lines = [f"{ind}if ({expr_str(st.cond)}) {{"]
        for s in st.then:
            lines += _stmt_lines(s, ind + "  ", auto_tags)
        if st.orelse:
            lines.append(f"{ind}}} else {{")
            for s in st.orelse:
                lines += _stmt_lines(s, ind + "  ", auto_tags)
        lines.append(f"{ind}}}")
        return lines
    if isinstance(st, While):
        lines = [f"{ind}while ({expr_str(st.guard)})"]
        for inv in st.invariants:
            kw = "invariant" if inv.origin == "user" else "candidate"
            lines.append(f"{ind}  {kw} {expr_str(inv.expr)};")
        if st.invariants:
            lines.append(f"{ind}{{")
        else:
            lines[-1] += " {"
        for s in st.body:
            lines += _stmt_lines(s, ind + "  ", auto_tags)
        lines.append(f"{ind}}}")
        return lines
    raise TypeError(f"not a statement: {st!r}")


def pretty_print(p: Program) -> str:
    lines = [f"kernel {p.name} width {p.bit_width} {{"]
    for kw, decls in (("param", p.params), ("local", p.locals)):
        for d in decls:
            attr = ""
            if d.thread is not None:
                attr = f" [thread_param dim={d.thread.dim} kind={d.thread.kind}]"
            lines.append(f"  {kw} {d.name} : {d.kind}{attr};")
    for a in p.arrays:
        lines.append(f"  array {a.name};")
    for e in p.preconditions:
        lines.append(f"  requires {expr_str(e)};")
    if p.disabled_rules:
        ordered = [r for r in RULE_IDS if r in p.disabled_rules]
        lines.append(f"  disable {', '.join(ordered)};")
    counter = [0]
    for st in p.body:
        lines += _stmt_lines(st, "  ", counter)
    lines.append("}")
    return "\n".join(lines) + "\n"
