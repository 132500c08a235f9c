"""Parser and type checker for the functional list language.

Concrete syntax::

    fun l:list. d:data.
      letrec F: (list × data → list × bool)
        = fun l:list. fun d:data.
          if (isnil l) then {nil, false}
          else if (head l).data = d
            then let {r, b} = (F (tail l) d) in {r, true}
            else let {r, b} = (F (tail l) d) in {cons (head l) r, b}
      in (F l d)

``{t, ...}`` builds tuples and (tag × data) pairs; pattern ``let`` binds
the components of a tuple.  Identifiers that are not bound denote tag
constants where a tag is expected; ``#name`` is always the tag ``name``.  ``undef`` is the undefined value.
"""
from __future__ import annotations

import re
from typing import Dict, List, Optional

from ..imp.ast import Pos
from .ast import (And, Append, BoolLit, Call, Cmp, Cons, FuncProgram, Head, If, IsNil, Let, NilLit, Not, Or,
                  Proj, Tail, TagLit, Tuple_, Undef, Var)

TYPES = ("bool", "tag", "data", "list")


class FuncSyntaxError(ValueError):
    def __init__(self, message: str, pos: Optional[Pos] = None):
        self.pos = pos
        super().__init__(f"{pos}: {message}" if pos else message)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<op>->|!=|<=|>=|→|×|≠|≤|≥|¬|∧|∨|[(){},.:=<>&|!*])
  | (?P<num>\d+)
  | (?P<tag>\#[A-Za-z_][A-Za-z0-9_']*)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

_CANON = {"→": "->", "×": "*", "≠": "!=", "≤": "<=", "≥": ">=", "¬": "!", "∧": "&", "∨": "|",
          "not": "!", "and": "&", "or": "|"}
KEYWORDS = {"fun", "letrec", "in", "if", "then", "else", "let", "cons", "append", "isnil", "head", "tail",
            "isTrue", "isFalse", "true", "false", "nil", "undef", "not", "and", "or"} | set(TYPES)
_PREFIX = {"cons": 2, "append": 2, "isnil": 1, "head": 1, "tail": 1, "isTrue": 1, "isFalse": 1, "!": 1}


def tokenize(text: str):
    out, line, col, i = [], 1, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise FuncSyntaxError(f"unexpected character {text[i]!r}", Pos(line, col))
        s = m.group()
        if m.lastgroup != "ws":
            out.append((m.lastgroup, _CANON.get(s, s), Pos(line, col)))
        for ch in s:
            line, col = (line + 1, 1) if ch == "\n" else (line, col + 1)
        i = m.end()
    out.append(("eof", "", Pos(line, col)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.fname = None

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value, k=0):
        t = self.peek(k)
        return t[1] == value and t[0] in ("op", "id")

    def take(self, value=None):
        t = self.peek()
        if value is not None and not self.at(value):
            raise FuncSyntaxError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2])
        self.i += 1
        return t

    def ident(self):
        t = self.peek()
        if t[0] != "id" or t[1] in KEYWORDS:
            raise FuncSyntaxError(f"expected an identifier, found {t[1] or 'end of input'!r}", t[2])
        self.i += 1
        return t[1]

    def type_(self):
        t = self.take()
        if t[1] not in TYPES:
            raise FuncSyntaxError(f"unknown type {t[1]!r}", t[2])
        return t[1]

    def binders(self):
        out = []
        self.take("fun")
        while True:
            name = self.ident()
            self.take(":")
            out.append((name, self.type_()))
            self.take(".")
            if self.at("fun"):
                self.take()
            elif not (self.peek()[0] == "id" and self.peek()[1] not in KEYWORDS and self.at(":", 1)):
                return out

    def program(self) -> FuncProgram:
        inputs = self.binders()
        self.take("letrec")
        self.fname = self.ident()
        self.take(":")
        self.take("(")
        arg_types = [self.type_()]
        while self.at("*"):
            self.take()
            arg_types.append(self.type_())
        self.take("->")
        results = [self.type_()]
        while self.at("*"):
            self.take()
            results.append(self.type_())
        self.take(")")
        self.take("=")
        params = self.binders()
        body = self.term()
        self.take("in")
        self.take("(")
        pos = self.peek()[2]
        if self.ident() != self.fname:
            raise FuncSyntaxError(f"the initial call must apply {self.fname}", pos)
        init = []
        while not self.at(")"):
            init.append(self.postfix())
        self.take(")")
        t = self.peek()
        if t[0] != "eof":
            raise FuncSyntaxError(f"unexpected {t[1]!r}", t[2])
        return FuncProgram(self.fname, inputs, params, results, body, tuple(init), arg_types=arg_types)

    # -- terms
    def term(self):
        pos = self.peek()[2]
        if self.at("if"):
            self.take()
            c = self.term()
            self.take("then")
            a = self.term()
            self.take("else")
            return If(c, a, self.term(), pos)
        if self.at("let"):
            self.take()
            if self.at("{"):
                self.take()
                names = [self.ident()]
                while self.at(","):
                    self.take()
                    names.append(self.ident())
                self.take("}")
                pattern = True
            else:
                names, pattern = [self.ident()], False
            self.take("=")
            bound = self.term()
            self.take("in")
            return Let(tuple(names), bound, self.term(), pattern, pos)
        if self.at("fun") or self.at("letrec"):
            raise FuncSyntaxError("nested function definitions are not allowed", pos)
        return self.disj()

    def disj(self):
        f = self.conj()
        while self.at("|"):
            pos = self.take()[2]
            f = Or(f, self.conj(), pos)
        return f

    def conj(self):
        f = self.rel()
        while self.at("&"):
            pos = self.take()[2]
            f = And(f, self.rel(), pos)
        return f

    def rel(self):
        left = self.app()
        if self.peek()[0] == "op" and self.peek()[1] in ("=", "!=", "<", "<=", ">", ">="):
            _, op, pos = self.take()
            return Cmp(op, left, self.app(), pos=pos)
        return left

    def starts_atom(self):
        t = self.peek()
        if t[0] == "id":
            return t[1] not in KEYWORDS or t[1] in ("true", "false", "nil", "undef")
        return t[1] in ("(", "{")

    def app(self):
        t = self.peek()
        pos = t[2]
        if t[1] in _PREFIX and t[0] in ("id", "op"):
            self.take()
            args = [self.postfix() for _ in range(_PREFIX[t[1]])]
            op = t[1]
            if op == "cons":
                return Cons(args[0], args[1], pos)
            if op == "append":
                return Append(args[0], args[1], pos)
            if op == "isnil":
                return IsNil(args[0], pos)
            if op == "head":
                return Head(args[0], pos)
            if op == "tail":
                return Tail(args[0], pos)
            if op == "isFalse" or op == "!":
                return Not(args[0], pos)
            return args[0]  # isTrue
        if t[0] == "id" and t[1] == self.fname:
            self.take()
            args = []
            while self.starts_atom():
                args.append(self.postfix())
            return Call(t[1], tuple(args), pos)
        return self.postfix()

    def postfix(self):
        e = self.atom()
        while self.at(".") and (self.peek(1)[1] in ("tag", "data", "1", "2")):
            pos = self.take()[2]
            f = self.take()[1]
            e = Proj(e, {"1": "tag", "2": "data"}.get(f, f), pos)
        return e

    def atom(self):
        t = self.peek()
        pos = t[2]
        if self.at("("):
            self.take()
            e = self.term()
            self.take(")")
            return e
        if self.at("{"):
            self.take()
            items = [self.term()]
            while self.at(","):
                self.take()
                items.append(self.term())
            self.take("}")
            return Tuple_(tuple(items), pos)
        if t[0] == "tag":
            self.take()
            return TagLit(t[1][1:], pos)
        if t[0] == "id":
            if t[1] in ("true", "false"):
                self.take()
                return BoolLit(t[1] == "true", pos)
            if t[1] == "nil":
                self.take()
                return NilLit(pos)
            if t[1] == "undef":
                self.take()
                return Undef(pos)
            return Var(self.ident(), pos)
        raise FuncSyntaxError(f"unexpected {t[1] or 'end of input'!r}", pos)


# -- type checking ------------------------------------------------------------------
# Types are "bool", "tag", "data", "list", "pair" (a list element) or a tuple of types.

class _Typer:
    def __init__(self, prog: FuncProgram):
        self.p = prog
        self.tags: List[str] = []
        rt = prog.results
        self.result = rt[0] if len(rt) == 1 else tuple(rt)

    def fail(self, msg, e):
        raise FuncSyntaxError(msg, getattr(e, "pos", None))

    def tag(self, name):
        if name not in self.tags:
            self.tags.append(name)

    def check(self, e, env: Dict[str, object], want=None):
        """Returns (resolved term, type); ``want`` guides tag constants and undef."""
        if isinstance(e, Var):
            if e.name in env:
                return e, env[e.name]
            if want == "tag":
                self.tag(e.name)
                return TagLit(e.name, e.pos), "tag"
            self.fail(f"unknown identifier {e.name!r}", e)
        if isinstance(e, BoolLit):
            return e, "bool"
        if isinstance(e, TagLit):
            self.tag(e.tag)
            return e, "tag"
        if isinstance(e, NilLit):
            return e, "list"
        if isinstance(e, Undef):
            if want is None:
                self.fail("cannot determine the type of undef", e)
            return e, want
        if isinstance(e, Cons):
            h = self.expect(e.head, env, "pair")
            return Cons(h, self.expect(e.tail, env, "list"), e.pos), "list"
        if isinstance(e, Append):
            return Append(self.expect(e.left, env, "list"), self.expect(e.right, env, "list"), e.pos), "list"
        if isinstance(e, IsNil):
            return IsNil(self.expect(e.arg, env, "list"), e.pos), "bool"
        if isinstance(e, Head):
            return Head(self.expect(e.arg, env, "list"), e.pos), "pair"
        if isinstance(e, Tail):
            return Tail(self.expect(e.arg, env, "list"), e.pos), "list"
        if isinstance(e, Proj):
            return Proj(self.expect(e.arg, env, "pair"), e.field, e.pos), e.field
        if isinstance(e, Tuple_):
            if want == "pair":
                want = ("tag", "data")
            if isinstance(want, tuple):
                if len(want) != len(e.items):
                    self.fail(f"expected a {len(want)}-tuple", e)
                items = tuple(self.expect(x, env, w) for x, w in zip(e.items, want))
                return Tuple_(items, e.pos), ("pair" if want == ("tag", "data") else want)
            pairs = [self.check(x, env) for x in e.items]
            return Tuple_(tuple(x for x, _ in pairs), e.pos), tuple(t for _, t in pairs)
        if isinstance(e, Cmp):
            left, right = e.left, e.right
            try:
                left, lt = self.check(left, env)
                right, rt = self.check(right, env, lt)
            except FuncSyntaxError:
                right, rt = self.check(e.right, env)
                left, lt = self.check(e.left, env, rt)
            if lt != rt or lt not in ("bool", "tag", "data"):
                self.fail(f"cannot compare {lt} with {rt}", e)
            if lt != "data" and e.op not in ("=", "!="):
                self.fail(f"{lt} values only support = and !=", e)
            return Cmp(e.op, left, right, lt, e.pos), "bool"
        if isinstance(e, Not):
            return Not(self.expect(e.arg, env, "bool"), e.pos), "bool"
        if isinstance(e, (And, Or)):
            return type(e)(self.expect(e.left, env, "bool"), self.expect(e.right, env, "bool"), e.pos), "bool"
        if isinstance(e, If):
            c = self.expect(e.cond, env, "bool")
            if want is None:
                a, ta = self.check(e.then, env)
                b = self.expect(e.orelse, env, ta)
                return If(c, a, b, e.pos), ta
            return If(c, self.expect(e.then, env, want), self.expect(e.orelse, env, want), e.pos), want
        if isinstance(e, Let):
            bound, bt = self.check(e.bound, env)
            inner = dict(env)
            if e.pattern:
                if not isinstance(bt, tuple) or len(bt) != len(e.names):
                    self.fail(f"cannot bind {len(e.names)} names to a value of type {bt}", e)
                inner.update(zip(e.names, bt))
            else:
                inner[e.names[0]] = bt
            body, t = self.check(e.body, inner, want)
            return Let(e.names, bound, body, e.pattern, e.pos), t
        if isinstance(e, Call):
            types = [t for _, t in self.p.params]
            if len(e.args) != len(types):
                self.fail(f"{e.func} takes {len(types)} arguments, {len(e.args)} given", e)
            args = tuple(self.expect(a, env, t) for a, t in zip(e.args, types))
            return Call(e.func, args, e.pos), self.result
        self.fail(f"unexpected term {e!r}", e)

    def expect(self, e, env, want):
        e2, t = self.check(e, env, want)
        if t != want and not (want == "pair" and t == ("tag", "data")):
            self.fail(f"expected {_show(want)}, found {_show(t)}", e)
        return e2


def _show(t) -> str:
    return " × ".join(t) if isinstance(t, tuple) else str(t)


def parse_func(text: str) -> FuncProgram:
    """Parse and type-check; raises FuncSyntaxError with a position."""
    prog = _Parser(text).program()
    params = prog.params
    if [t for _, t in params] != prog.arg_types:
        raise FuncSyntaxError(f"the parameters of {prog.name} do not match its declared type")
    names = [n for n, _ in params]
    if len(set(names)) != len(names) or len({n for n, _ in prog.inputs}) != len(prog.inputs):
        raise FuncSyntaxError("duplicate parameter name")
    typer = _Typer(prog)
    env = dict(params)
    prog.body = typer.expect(prog.body, env, typer.result)
    wrap = dict(prog.inputs)
    call = typer.expect(Call(prog.name, prog.init), wrap, typer.result)
    prog.init = call.args
    prog.tags = tuple(typer.tags)
    return prog
