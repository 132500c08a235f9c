"""Reference interpreter: small-step execution over an explicit heap."""
from __future__ import annotations

import operator
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from ..datastring import InputError
from .ast import (And, Assign, BoolConst, Cmp, Field, If, ImpProgram, New, NextAssign, NextRead, Nil, Not,
                  Or, TagConst, Var, While)
from .cfg import EXIT, build_cfg


_OPS = {"=": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
        ">": operator.gt, ">=": operator.ge}


class ImpRuntimeError(Exception):
    """The current configuration has no successor."""

    def __init__(self, kind: str, message: str, ref: str = ""):
        self.kind = kind
        self.ref = ref
        super().__init__(message)


@dataclass
class ImpOutcome:
    status: str                      # "ok", "undefined" or "budget"
    output: Optional[tuple] = None
    outputs: Dict[str, object] = field(default_factory=dict)
    reason: str = ""
    steps: int = 0
    error: str = ""                  # runtime error kind, e.g. "nilDeref"
    error_ref: str = ""              # the reference variable involved, if any

    @property
    def defined(self) -> bool:
        return self.status == "ok"


def default_alphabet(prog: ImpProgram, extra=()) -> tuple:
    tags = {"a"} | set(prog.tags) | set(extra)
    return tuple(sorted(tags))


def default_budget(prog: ImpProgram, n: int) -> int:
    env = os.environ.get("SDT_BUDGET")
    if env:
        return int(env)
    kb = len(prog.of("bool"))
    kt = len(prog.of("tag"))
    kr = len(prog.of("ref"))
    locs = sum(1 for _ in prog.statements()) + 1
    sigma = len(default_alphabet(prog))
    shapes = (2 * kr) ** kr
    return 10 * (n + 1) * locs * (2 ** kb) * (sigma ** kt) * shapes


class Machine:
    """Mutable execution state of one run."""

    def __init__(self, prog: ImpProgram, w: Sequence, params: Dict[str, object]):
        self.prog = prog
        self.cfg = build_cfg(prog)
        self.heap: Dict[int, List] = {}
        for i, (tag, val) in enumerate(w):
            self.heap[i + 1] = [tag, val, i + 2 if i + 1 < len(w) else None]
        self.fresh = len(w) + 1
        self.env: Dict[str, object] = {}
        curr = prog.curr
        for d in prog.decls:
            if d.mode == "input":
                if d.type == "ref":
                    self.env[d.name] = 1 if w else None
                    continue
                if d.name not in params:
                    raise InputError(f"missing value for input parameter {d.name!r}")
                v = params[d.name]
                self.env[d.name] = bool(v) if d.type == "bool" else v
        for d in prog.decls:
            if d.mode == "input":
                continue
            if d.init is None:
                self.env[d.name] = False if d.type == "bool" else None
            elif isinstance(d.init, Var):
                self.env[d.name] = self.env[d.init.name] if d.init.name != curr else self.env[curr]
            else:
                self.env[d.name] = self.value(d.init)
        self.loc = self.cfg.entry

    # -- expressions
    def node(self, r: str, what: str):
        n = self.env[r]
        if n is None:
            raise ImpRuntimeError("nilDeref", f"{r}.{what} with {r} = nil", r)
        return self.heap[n]

    def value(self, e):
        if isinstance(e, Var):
            return self.env[e.name]
        if isinstance(e, Field):
            cell = self.node(e.ref, e.field)
            return cell[0] if e.field == "tag" else cell[1]
        if isinstance(e, Nil):
            return None
        if isinstance(e, TagConst):
            return e.tag
        if isinstance(e, BoolConst):
            return e.value
        if isinstance(e, Not):
            return not self.value(e.arg)
        if isinstance(e, And):
            return self.value(e.left) and self.value(e.right)
        if isinstance(e, Or):
            return self.value(e.left) or self.value(e.right)
        if isinstance(e, Cmp):
            a, b = self.value(e.left), self.value(e.right)
            if e.kind in ("data", "tag") and (a is None or b is None):
                raise ImpRuntimeError("undefinedValue", f"comparison reads an undefined {e.kind} value")
            return _OPS[e.op](a, b)
        raise TypeError(e)

    # -- statements
    def step(self):
        node = self.cfg.nodes[self.loc]
        s = node.stmt
        if isinstance(s, (If, While)):
            self.loc = node.yes if self.value(s.cond) else node.no
            return
        if isinstance(s, Assign):
            self.env[s.target] = self.value(s.expr)
        elif isinstance(s, NextAssign):
            n = self.env[s.ref]
            if n is None:
                raise ImpRuntimeError("nilDeref", f"{s.ref}.next := ... with {s.ref} = nil", s.ref)
            if n == self.env[self.prog.curr]:
                raise ImpRuntimeError("currAlias", f"{s.ref}.next := ... while {s.ref} points to the "
                                                   f"node of {self.prog.curr}")
            self.heap[n][2] = self.value(s.expr)
        elif isinstance(s, NextRead):
            cell = self.node(s.source, "next")
            self.env[s.target] = cell[2]
        elif isinstance(s, New):
            n = self.fresh
            self.fresh += 1
            tag = self.value(s.tag)
            if tag is None:
                raise ImpRuntimeError("undefinedValue", "new node with an undefined tag")
            self.heap[n] = [tag, self.value(s.data), self.value(s.next)]
            self.env[s.target] = n
        self.loc = node.next

    def chain(self, start):
        out, seen, n = [], set(), start
        while n is not None:
            if n in seen:
                return None, "the output list is cyclic"
            seen.add(n)
            tag, val, nxt = self.heap[n]
            if val is None:
                return None, "the output list holds an undefined data value"
            out.append((tag, val))
            n = nxt
        return tuple(out), ""

    def aliases(self, x: str, y: str) -> bool:
        return self.env.get(x) is not None and self.env.get(x) == self.env.get(y)

    def has_cycle(self) -> bool:
        """Whether the nodes reachable from reference variables contain a cycle."""
        state = {}
        refs = [self.env[d.name] for d in self.prog.decls if d.type == "ref"]
        for start in refs:
            n, path = start, []
            while n is not None and n not in state:
                state[n] = 1
                path.append(n)
                n = self.heap[n][2]
            if n is not None and state.get(n) == 1:
                return True
            for p in path:
                state[p] = 2
        return False


Observer = Callable[[Machine], Optional[bool]]


def run_imp(prog: ImpProgram, w: Sequence, params: Optional[Dict[str, object]] = None,
            budget: Optional[int] = None, observer: Optional[Observer] = None) -> ImpOutcome:
    """Run the program on input list ``w``; ``observer`` sees every configuration.

    An observer returning True stops the run early (status "stopped").
    """
    m = Machine(prog, w, params or {})
    limit = budget if budget is not None else default_budget(prog, len(w))
    steps = 0
    try:
        while m.loc != EXIT:
            if observer is not None and observer(m):
                return ImpOutcome("stopped", reason=f"observer stopped at {m.loc}", steps=steps)
            if steps >= limit:
                return ImpOutcome("budget", reason=f"step budget of {limit} exhausted", steps=steps)
            m.step()
            steps += 1
    except ImpRuntimeError as exc:
        return ImpOutcome("undefined", reason=f"runtime error at {m.loc}: {exc}", steps=steps,
                          error=exc.kind, error_ref=exc.ref)
    if observer is not None and observer(m):
        return ImpOutcome("stopped", reason="observer stopped at exit", steps=steps)
    out, why = m.chain(m.env.get(prog.result))
    if out is None:
        return ImpOutcome("undefined", reason=why, steps=steps)
    outputs = {d.name: m.env[d.name] for d in prog.output_params}
    return ImpOutcome("ok", out, outputs, steps=steps)
