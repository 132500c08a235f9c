"""Generating a tail-recursive functional program from an ε-free transducer.

The control state is binary-encoded in boolean arguments, data variables
become data arguments and string variables become list arguments.  A data
variable read by some guard carries a definedness flag, since a guard over
an undefined value never holds while a comparison with ``undef`` is stuck.
Each transition is one branch ``state & tag & guard`` that recurses on
``(tail l)``; the base case dispatches on the state to the output
expression and falls back to ``undef``.
"""
from __future__ import annotations

from typing import List

from .. import formula as fm
from ..machine import CURR, Sdst, Sym
from .ast import FuncProgram
from .parser import parse_func


class _Writer:
    def __init__(self, S: Sdst, name: str):
        if S.has_eps:
            raise ValueError("program generation needs an ε-free transducer")
        self.S = S
        self.name = name
        self.states = [S.initial] + [q for q in S.states if q != S.initial]
        self.nbits = max(1, (len(self.states) - 1).bit_length())
        self.dname = {v: f"d{i}" for i, v in enumerate(v for v in S.data_vars if v != CURR)}
        self.sname = {x: f"x{i}" for i, x in enumerate(S.string_vars)}
        read = set()
        for t in S.transitions:
            read |= fm.variables(t.guard)
        changed = True
        while changed:
            changed = False
            for t in S.transitions:
                for v, src in t.dmap.items():
                    if v in read and src not in read:
                        read.add(src)
                        changed = True
        self.tracked = [v for v in self.dname if v in read]
        self.params = ([(f"q{b}", "bool") for b in range(self.nbits)]
                       + [(d, "data") for d in self.dname.values()]
                       + [(f"def_{self.dname[v]}", "bool") for v in self.tracked]
                       + [(x, "list") for x in self.sname.values()])

    def value(self, v: str) -> str:
        return "(head l).data" if v == CURR else self.dname[v]

    def state_test(self, q) -> str:
        i = self.states.index(q)
        return " & ".join(f"q{b}" if i >> b & 1 else f"!q{b}" for b in range(self.nbits))

    def guard(self, f) -> str:
        op = f[0]
        if op in ("true", "false"):
            return op
        if op == "lt":
            return f"{self.value(f[1])} < (head l).data"
        if op == "gt":
            return f"(head l).data < {self.value(f[1])}"
        if op == "not":
            return f"!({self.guard(f[1])})"
        sep = " & " if op == "and" else " | "
        return f"({self.guard(f[1])}){sep}({self.guard(f[2])})"

    def expr(self, e) -> str:
        """A list term for a string expression (right-nested cons/append)."""
        out = "nil"
        for item in reversed(tuple(e)):
            if isinstance(item, Sym):
                out = f"cons {{#{item.tag}, {self.value(item.var)}}} ({out})" if out != "nil" \
                    else f"cons {{#{item.tag}, {self.value(item.var)}}} nil"
            else:
                out = self.sname[item] if out == "nil" else f"append {self.sname[item]} ({out})"
        return out

    def call(self, t) -> str:
        i = self.states.index(t.dst)
        args = ["(tail l)"] + [("true" if i >> b & 1 else "false") for b in range(self.nbits)]
        dmap, smap = t.dmap, t.smap
        for v, d in self.dname.items():
            args.append(self.value(dmap.get(v, v)))
        for v in self.tracked:
            src = dmap.get(v, v)
            args.append("true" if src == CURR else f"def_{self.dname[src]}")
        for x, n in self.sname.items():
            args.append(f"({self.expr(smap.get(x, (x,)))})")
        return f"({self.name} {' '.join(args)})"

    def cases(self, branches: List[tuple]) -> str:
        out = "undef"
        for cond, body in reversed(branches):
            out = f"if {cond}\n        then {body}\n        else {out}"
        return out

    def write(self) -> str:
        S = self.S
        base = [(f"({self.state_test(q)})", f"({self.expr(S.output[q])})")
                for q in self.states if q in S.output]
        step = []
        for t in S.transitions:
            conds = [f"({self.state_test(t.src)})", f"(head l).tag = #{t.tag}"]
            needed = [v for v in sorted(fm.variables(t.guard)) if v != CURR]
            conds += [f"def_{self.dname[v]}" for v in needed]
            if t.guard != fm.TRUE:
                conds.append(f"({self.guard(t.guard)})")
            step.append((" & ".join(conds), self.call(t)))
        sig = " × ".join(["list"] + [typ for _, typ in self.params])
        binders = " ".join(["fun l:list."] + [f"fun {n}:{typ}." for n, typ in self.params])
        init = ["false"] * self.nbits + ["undef"] * len(self.dname) + ["false"] * len(self.tracked) \
            + ["nil"] * len(self.sname)
        return (f"fun l:list.\n"
                f"  letrec {self.name}: ({sig} → list)\n"
                f"    = {binders}\n"
                f"      if (isnil l)\n      then {self.cases(base)}\n"
                f"      else {self.cases(step)}\n"
                f"  in ({self.name} l {' '.join(init)})\n")


def func_source_from_sdst(S: Sdst, name: str = "Generated") -> str:
    return _Writer(S, name).write()


def func_from_sdst(S: Sdst, name: str = "Generated") -> FuncProgram:
    """A tail-recursive program computing the same transduction as ``S``."""
    return parse_func(func_source_from_sdst(S, name))
