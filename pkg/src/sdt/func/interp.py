"""Call-by-value interpreter for single-pass functional programs.

Recursion is unwound with an explicit stack of pending caller contexts, so
long inputs do not hit Python's recursion limit.  The traversed list is
represented by a position into the input.
"""
from __future__ import annotations

import operator
import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

from ..datastring import InputError
from .ast import (And, Append, BoolLit, Call, Cmp, Cons, FuncProgram, Head, If, IsNil, Let, NilLit, Not, Or,
                  Proj, Tail, TagLit, Tuple_, Undef, Var)
from .check import Leaf, subterms, tail_leaves

_OPS = {"=": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
        ">": operator.gt, ">=": operator.ge}


class Stuck(Exception):
    """No evaluation rule applies."""


class _Budget(Exception):
    pass


@dataclass
class FuncOutcome:
    status: str                      # "ok", "undefined" or "budget"
    output: Optional[tuple] = None
    outputs: Dict[str, object] = field(default_factory=dict)
    reason: str = ""
    steps: int = 0

    @property
    def defined(self) -> bool:
        return self.status == "ok"


class _Pos(int):
    """The traversed list, as an index into the input."""


class _Eval:
    def __init__(self, p: FuncProgram, w: Sequence, budget: int):
        self.p = p
        self.w = w
        self.budget = budget
        self.steps = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise _Budget()

    def ev(self, e, env):
        self.tick()
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, TagLit):
            return e.tag
        if isinstance(e, NilLit):
            return ()
        if isinstance(e, Undef):
            return None
        if isinstance(e, Cons):
            return (tuple(self.ev(e.head, env)),) + self.ev(e.tail, env)
        if isinstance(e, Append):
            return self.ev(e.left, env) + self.ev(e.right, env)
        if isinstance(e, IsNil):
            return self.ev(e.arg, env) >= len(self.w)
        if isinstance(e, Head):
            i = self.ev(e.arg, env)
            if i >= len(self.w):
                raise Stuck("head of an empty list")
            return tuple(self.w[i])
        if isinstance(e, Tail):
            i = self.ev(e.arg, env)
            if i >= len(self.w):
                raise Stuck("tail of an empty list")
            return _Pos(i + 1)
        if isinstance(e, Proj):
            pair = self.ev(e.arg, env)
            return pair[0] if e.field == "tag" else pair[1]
        if isinstance(e, Tuple_):
            return tuple(self.ev(x, env) for x in e.items)
        if isinstance(e, Cmp):
            a, b = self.ev(e.left, env), self.ev(e.right, env)
            if a is None or b is None:
                raise Stuck("comparison with an undefined value")
            return _OPS[e.op](a, b)
        if isinstance(e, Not):
            return not self.ev(e.arg, env)
        if isinstance(e, And):
            return self.ev(e.left, env) and self.ev(e.right, env)
        if isinstance(e, Or):
            return self.ev(e.left, env) or self.ev(e.right, env)
        if isinstance(e, If):
            return self.ev(e.then if self.ev(e.cond, env) else e.orelse, env)
        if isinstance(e, Let):
            return self.ev(e.body, bind(e, self.ev(e.bound, env), env))
        raise Stuck(f"cannot evaluate {type(e).__name__} here")

    def tail(self, e, env):
        """Evaluate a tail position: ("value", v) or ("call", args, leaf, env)."""
        while True:
            self.tick()
            if isinstance(e, If):
                e = e.then if self.ev(e.cond, env) else e.orelse
                continue
            if isinstance(e, Let) and not isinstance(e.bound, Call):
                env = bind(e, self.ev(e.bound, env), env)
                e = e.body
                continue
            break
        if isinstance(e, Undef):
            raise Stuck("the result is undef")
        leaf = next(iter(tail_leaves(e, len(self.p.results))))
        if not isinstance(leaf, Leaf) or leaf.call is None:
            return ("value", self.ev(e, env))
        args = [self.ev(a, env) for a in leaf.call.args]
        return ("call", args, leaf, env)

    def run(self, args):
        names = [n for n, _ in self.p.params]
        stack = []
        while True:
            kind, *rest = self.tail(self.p.body, dict(zip(names, args)))
            if kind == "value":
                value = rest[0]
                break
            args, leaf, env = rest
            stack.append((leaf, env))
        for leaf, env in reversed(stack):
            inner = dict(env)
            if len(leaf.names) == 1:
                inner[leaf.names[0]] = value
            else:
                inner.update(zip(leaf.names, value))
            value = self.ev(leaf.body, inner)
        return value


def bind(let: Let, value, env):
    inner = dict(env)
    if let.pattern:
        inner.update(zip(let.names, value))
    else:
        inner[let.names[0]] = value
    return inner


def default_budget(p: FuncProgram, n: int) -> int:
    env = os.environ.get("SDT_BUDGET")
    if env:
        return int(env)
    size = sum(1 for _ in subterms(p.body)) + len(p.init)
    return 10 * (n + 1) * (size + 1) * 4


def run_func(p: FuncProgram, w: Sequence, params: Optional[Dict[str, object]] = None,
             budget: Optional[int] = None) -> FuncOutcome:
    params = params or {}
    wrap = {p.inputs[0][0]: _Pos(0)}
    for name, typ in p.input_params:
        if name not in params:
            raise InputError(f"missing value for input parameter {name!r}")
        wrap[name] = bool(params[name]) if typ == "bool" else params[name]
    ev = _Eval(p, tuple(w), budget if budget is not None else default_budget(p, len(w)))
    try:
        args = [ev.ev(a, wrap) for a in p.init]
        value = ev.run(args)
    except Stuck as exc:
        return FuncOutcome("undefined", reason=f"stuck: {exc}", steps=ev.steps)
    except _Budget:
        return FuncOutcome("budget", reason=f"step budget of {ev.budget} exhausted", steps=ev.steps)
    if len(p.results) == 1:
        out, scalars = value, ()
    else:
        out, scalars = value[0], value[1:]
    if any(d is None for _, d in out):
        return FuncOutcome("undefined", reason="the result list holds an undefined data value", steps=ev.steps)
    outputs = {name: v for (name, _), v in zip(p.output_params, scalars)}
    return FuncOutcome("ok", tuple(out), outputs, steps=ev.steps)
