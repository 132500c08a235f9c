"""Parser and type checker for the imperative heap-list language.

Concrete syntax::

    function Name
      input ref curr;  input data v;
      output ref result := curr;  output bool b := 0;
      local ref prev;
      lbl: while (curr != nil) & (curr.data = v) { curr := curr.next; b := 1 };
      ...

Statements are separated by ``;`` (extra separators are ignored) and may
carry a ``label:`` prefix; unlabeled statements are numbered s1, s2, ...
Identifiers that are not declared denote tag constants where a tag is
expected.  ``≠ ≤ ≥ ⊥`` may be written ``!= <= >= bot``.
"""
from __future__ import annotations

import re
from typing import List, Optional

from .ast import (And, Assign, BoolConst, Cmp, Decl, Field, If, ImpProgram, MODES, New, NextAssign,
                  NextRead, Nil, Not, Or, Pos, TYPES, TagConst, Var, While)


class ImpSyntaxError(ValueError):
    def __init__(self, message: str, pos: Optional[Pos] = None):
        self.pos = pos
        super().__init__(f"{pos}: {message}" if pos else message)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|//[^\n]*|\n)
  | (?P<op>:=|!=|<=|>=|≠|≤|≥|[<>=&|!(){};,.:⊥¬∧∨])
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

_CANON = {"≠": "!=", "≤": "<=", "≥": ">=", "¬": "!", "∧": "&", "∨": "|"}
KEYWORDS = {"function", "input", "output", "local", "if", "then", "else", "while", "new", "nil",
            "true", "false", "bot"} | set(TYPES)


def tokenize(text: str):
    out = []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ImpSyntaxError(f"unexpected character {text[i]!r}", Pos(line, col))
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            out.append((kind, _CANON.get(s, s), Pos(line, col)))
        for ch in s:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        i = m.end()
    out.append(("eof", "", Pos(line, col)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.labels: List[str] = []

    # -- token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value, k=0):
        t = self.peek(k)
        return t[1] == value and t[0] in ("op", "id")

    def take(self, value=None):
        t = self.peek()
        if value is not None and not self.at(value):
            raise ImpSyntaxError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2])
        self.i += 1
        return t

    def ident(self):
        t = self.peek()
        if t[0] != "id" or t[1] in KEYWORDS:
            raise ImpSyntaxError(f"expected an identifier, found {t[1] or 'end of input'!r}", t[2])
        self.i += 1
        return t[1]

    # -- program
    def program(self) -> ImpProgram:
        self.take("function")
        name = self.ident()
        decls = []
        while self.peek()[1] in MODES:
            decls.append(self.decl())
            while self.at(";"):
                self.take()
        body = self.seq()
        if self.at("."):
            self.take()
        t = self.peek()
        if t[0] != "eof":
            raise ImpSyntaxError(f"unexpected {t[1]!r}", t[2])
        return ImpProgram(name, decls, body)

    def decl(self) -> Decl:
        pos = self.peek()[2]
        mode = self.take()[1]
        t = self.take()
        if t[1] not in TYPES:
            raise ImpSyntaxError(f"unknown type {t[1]!r}", t[2])
        name = self.ident()
        init = None
        if self.at(":="):
            self.take()
            init = self.operand()
        return Decl(name, t[1], mode, init, pos)

    def seq(self):
        out = []
        while True:
            while self.at(";"):
                self.take()
            if self.at("}") or self.at(".") or self.peek()[0] == "eof":
                return out
            out.append(self.stmt())

    def block(self):
        if self.at("{"):
            self.take("{")
            body = self.seq()
            self.take("}")
            return body
        return [self.stmt()]

    def stmt(self):
        pos = self.peek()[2]
        label = ""
        if self.peek()[0] == "id" and self.peek()[1] not in KEYWORDS and self.at(":", 1):
            label = self.ident()
            self.take(":")
        if self.at("{"):
            if label:
                raise ImpSyntaxError("a block cannot carry a label", pos)
            body = self.block()
            return body[0] if len(body) == 1 else If("", BoolConst(True), body, [], pos)
        if self.at("if"):
            self.take()
            cond = self.bexpr()
            self.take("then")
            then = self.block()
            orelse = []
            if self.at("else"):
                self.take()
                orelse = self.block()
            return If(label, cond, then, orelse, pos)
        if self.at("while"):
            self.take()
            cond = self.bexpr()
            if self.at("do"):
                self.take()
            self.take("{")
            body = self.seq()
            self.take("}")
            return While(label, cond, body, pos)
        target = self.ident()
        if self.at("."):
            self.take()
            self.take("next")
            self.take(":=")
            return NextAssign(label, target, self.operand(), pos)
        self.take(":=")
        if self.at("new"):
            self.take()
            self.take("(")
            te = self.operand()
            self.take(",")
            de = self.operand()
            self.take(",")
            re_ = self.operand()
            self.take(")")
            return New(label, target, te, de, re_, pos)
        if self.peek()[0] == "id" and self.at(".", 1) and self.peek(2)[1] == "next":
            src = self.ident()
            self.take(".")
            self.take("next")
            return NextRead(label, target, src, pos)
        return Assign(label, target, self.bexpr(), pos)

    # -- expressions
    def bexpr(self):
        f = self.conj()
        while self.at("|"):
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.at("&"):
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        if self.at("!"):
            self.take()
            return Not(self.unary())
        if self.at("("):
            self.take()
            f = self.bexpr()
            self.take(")")
            return f
        left = self.operand()
        if self.peek()[1] in ("=", "!=", "<", "<=", ">", ">="):
            op = self.take()[1]
            return Cmp(op, left, self.operand())
        return left

    def operand(self):
        t = self.peek()
        if t[0] == "num":
            self.take()
            if t[1] not in ("0", "1"):
                raise ImpSyntaxError("only 0 and 1 are numeric constants", t[2])
            return BoolConst(t[1] == "1")
        if self.at("true") or self.at("false"):
            self.take()
            return BoolConst(t[1] == "true")
        if self.at("nil"):
            self.take()
            return Nil()
        if self.at("⊥") or self.at("bot"):
            self.take()
            return Var("⊥")
        if self.at("("):
            self.take()
            e = self.operand()
            self.take(")")
            return e
        name = self.ident()
        if self.at(".") and self.peek(1)[1] in ("data", "tag"):
            self.take()
            return Field(name, self.take()[1])
        return Var(name)


# -- type checking -----------------------------------------------------------------

class _Checker:
    def __init__(self, prog: ImpProgram):
        self.p = prog
        self.types = {}
        self.tags = []
        for d in prog.decls:
            if d.name in self.types:
                raise ImpSyntaxError(f"duplicate declaration of {d.name!r}", d.pos)
            self.types[d.name] = d.type

    def tag_const(self, name):
        if name not in self.tags:
            self.tags.append(name)
        return TagConst(name)

    def expr(self, e, want: Optional[str], pos):
        """Resolve identifiers in ``e``; returns (expr, type)."""
        if isinstance(e, Var):
            if e.name == "⊥":
                if want not in (None, "data"):
                    raise ImpSyntaxError("⊥ is only a data value", pos)
                return e, "data"
            t = self.types.get(e.name)
            if t is None:
                if want == "tag":
                    return self.tag_const(e.name), "tag"
                raise ImpSyntaxError(f"unknown identifier {e.name!r}", pos)
            return e, t
        if isinstance(e, Field):
            if self.types.get(e.ref) != "ref":
                raise ImpSyntaxError(f"{e.ref!r} is not a ref variable", pos)
            return e, e.field
        if isinstance(e, Nil):
            return e, "ref"
        if isinstance(e, BoolConst):
            return e, "bool"
        if isinstance(e, TagConst):
            return e, "tag"
        if isinstance(e, Not):
            a = self.bool(e.arg, pos)
            return Not(a), "bool"
        if isinstance(e, (And, Or)):
            return type(e)(self.bool(e.left, pos), self.bool(e.right, pos)), "bool"
        if isinstance(e, Cmp):
            return self.cmp(e, pos), "bool"
        raise ImpSyntaxError(f"unexpected expression {e!r}", pos)

    def cmp(self, e: Cmp, pos):
        left, right = e.left, e.right
        lt = self._guess(left)
        rt = self._guess(right)
        kind = lt or rt
        if kind is None:
            raise ImpSyntaxError("cannot determine the type of a comparison", pos)
        left, lt = self.expr(left, kind, pos)
        right, rt = self.expr(right, kind, pos)
        if lt != rt:
            raise ImpSyntaxError(f"comparison of {lt} with {rt}", pos)
        if kind != "data" and e.op not in ("=", "!="):
            raise ImpSyntaxError(f"{kind} values only support = and !=", pos)
        if isinstance(left, Var) and left.name == "⊥" or isinstance(right, Var) and right.name == "⊥":
            raise ImpSyntaxError("⊥ cannot be compared", pos)
        return Cmp(e.op, left, right, kind)

    def _guess(self, e):
        if isinstance(e, Var):
            return self.types.get(e.name) if e.name != "⊥" else "data"
        if isinstance(e, Field):
            return e.field
        if isinstance(e, Nil):
            return "ref"
        if isinstance(e, BoolConst):
            return "bool"
        return None

    def bool(self, e, pos):
        e, t = self.expr(e, "bool", pos)
        if t != "bool":
            raise ImpSyntaxError(f"expected a boolean expression, found {t}", pos)
        return e

    def var(self, name, pos, kind=None):
        t = self.types.get(name)
        if t is None:
            raise ImpSyntaxError(f"unknown identifier {name!r}", pos)
        if kind and t != kind:
            raise ImpSyntaxError(f"{name!r} has type {t}, expected {kind}", pos)
        return t

    def typed(self, e, want, pos):
        e, t = self.expr(e, want, pos)
        if t != want:
            raise ImpSyntaxError(f"expected a {want} expression, found {t}", pos)
        return e

    def stmts(self, body):
        out = []
        for s in body:
            out.append(self.stmt(s))
        return out

    def stmt(self, s):
        pos = s.pos
        if isinstance(s, Assign):
            t = self.var(s.target, pos)
            if t == "bool":
                e = self.bool(s.expr, pos)
            else:
                if isinstance(s.expr, (And, Or, Not, Cmp)):
                    raise ImpSyntaxError(f"cannot assign a boolean to {t} variable {s.target!r}", pos)
                e = self.typed(s.expr, t, pos)
                if t == "data" and isinstance(e, Var) and e.name == "⊥":
                    raise ImpSyntaxError("⊥ cannot be assigned", pos)
            return Assign(s.label, s.target, e, pos)
        if isinstance(s, NextAssign):
            self.var(s.ref, pos, "ref")
            return NextAssign(s.label, s.ref, self.typed(s.expr, "ref", pos), pos)
        if isinstance(s, NextRead):
            self.var(s.target, pos, "ref")
            self.var(s.source, pos, "ref")
            return s
        if isinstance(s, New):
            self.var(s.target, pos, "ref")
            data = self.typed(s.data, "data", pos)
            if isinstance(data, Var) and data.name == "⊥":
                raise ImpSyntaxError("⊥ cannot be stored in a new node", pos)
            return New(s.label, s.target, self.typed(s.tag, "tag", pos), data,
                       self.typed(s.next, "ref", pos), pos)
        if isinstance(s, If):
            return If(s.label, self.bool(s.cond, pos), self.stmts(s.then), self.stmts(s.orelse), pos)
        if isinstance(s, While):
            return While(s.label, self.bool(s.cond, pos), self.stmts(s.body), pos)
        raise ImpSyntaxError(f"unexpected statement {s!r}", pos)

    def decls(self):
        out = []
        for d in self.p.decls:
            init = d.init
            if init is not None:
                if isinstance(init, Var) and init.name == "⊥":
                    if d.type != "data":
                        raise ImpSyntaxError("⊥ is only a data value", d.pos)
                    init = None
                else:
                    init = self.typed(init, d.type, d.pos)
            out.append(Decl(d.name, d.type, d.mode, init, d.pos))
        return out


def _assign_labels(body, used, counter):
    for s in body:
        if not s.label:
            while True:
                counter[0] += 1
                name = f"s{counter[0]}"
                if name not in used:
                    break
            s.label = name
            used.add(name)
        if isinstance(s, If):
            _assign_labels(s.then, used, counter)
            _assign_labels(s.orelse, used, counter)
        elif isinstance(s, While):
            _assign_labels(s.body, used, counter)


def parse_imp(text: str) -> ImpProgram:
    """Parse and type-check a program; raises ImpSyntaxError with a position."""
    raw = _Parser(text).program()
    checker = _Checker(raw)
    decls = checker.decls()
    body = checker.stmts(raw.body)
    prog = ImpProgram(raw.name, decls, body, (), dict(checker.types))
    used = set()
    for s in prog.statements():
        if s.label:
            if s.label in used or s.label == "exit":
                raise ImpSyntaxError(f"duplicate label {s.label!r}", s.pos)
            used.add(s.label)
    _assign_labels(prog.body, used, [0])
    prog.tags = tuple(checker.tags)
    return prog
