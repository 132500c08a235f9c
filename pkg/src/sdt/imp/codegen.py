"""Generating a single-pass heap program from an ε-free transducer.

Every string variable x is kept as a heap segment with references to its
first and last node (``xNf``/``xNl``); concatenation splices segments with
``last.next := first`` so each assignment touches a constant number of
pointers.  The control state is binary-encoded in boolean variables, data
variables become data variables, and a variable that guards may read
carries a definedness flag because guards over undefined values never hold.
A missing transition or output aborts via ``curr.next := nil``, which is a
runtime error both mid-list (curr aliases itself) and at the end (nil).
"""
from __future__ import annotations

from typing import Dict, List

from .. import formula as fm
from ..machine import CURR, Sdst, Sym
from .ast import ImpProgram
from .parser import KEYWORDS, parse_imp

ABORT = "curr.next := nil"


class _Writer:
    def __init__(self, S: Sdst):
        if S.has_eps:
            raise ValueError("program generation needs an ε-free transducer")
        for tag in set(S.input_alphabet) | set(S.output_alphabet):
            if not tag.isidentifier() or tag in KEYWORDS:
                raise ValueError(f"tag {tag!r} cannot be written as a program identifier")
        self.S = S
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
        self.tracked = sorted(read - {CURR})

    # -- expressions
    def value(self, v: str) -> str:
        return "curr.data" if v == CURR else self.dname[v]

    def state_test(self, q) -> str:
        i = self.states.index(q)
        return " & ".join(f"q{b}" if i >> b & 1 else f"!q{b}" for b in range(self.nbits))

    def set_state(self, q) -> List[str]:
        i = self.states.index(q)
        return [f"q{b} := {i >> b & 1}" for b in range(self.nbits)]

    def guard(self, f) -> str:
        op = f[0]
        if op == "true":
            return "1"
        if op == "false":
            return "0"
        if op == "lt":
            return f"{self.value(f[1])} < curr.data"
        if op == "gt":
            return f"curr.data < {self.value(f[1])}"
        if op == "not":
            return f"!({self.guard(f[1])})"
        sep = " & " if op == "and" else " | "
        return f"({self.guard(f[1])}){sep}({self.guard(f[2])})"

    # -- statements
    def build(self, target_f: str, target_l: str, expr) -> List[str]:
        out = [f"{target_f} := nil", f"{target_l} := nil"]
        for item in expr:
            if isinstance(item, Sym):
                out.append(f"node := new({item.tag}, {self.value(item.var)}, nil)")
                out.append(f"if {target_f} = nil then {{ {target_f} := node }} else {{ {target_l}.next := node }}")
                out.append(f"{target_l} := node")
            else:
                y = self.sname[item]
                out.append(f"if {y}f != nil then {{ if {target_f} = nil then {{ {target_f} := {y}f }} "
                           f"else {{ {target_l}.next := {y}f }}; {target_l} := {y}l }}")
        return out

    def body(self, t) -> List[str]:
        out = []
        for x, e in t.string_assign:
            n = self.sname[x]
            out += self.build(f"{n}nf", f"{n}nl", e)
        for x, _ in t.string_assign:
            n = self.sname[x]
            out += [f"{n}f := {n}nf", f"{n}l := {n}nl"]
        for a, b in t.data_assign:
            out.append(f"n{self.dname[a]} := {self.value(b)}")
            if a in self.tracked:
                flag = "1" if b == CURR else f"def_{self.dname[b]}"
                out.append(f"ndef_{self.dname[a]} := {flag}")
        for a, _ in t.data_assign:
            out.append(f"{self.dname[a]} := n{self.dname[a]}")
            if a in self.tracked:
                out.append(f"def_{self.dname[a]} := ndef_{self.dname[a]}")
        return out + self.set_state(t.dst)

    def condition(self, t) -> str:
        parts = [self.state_test(t.src), f"curr.tag = {t.tag}"]
        parts += [f"def_{self.dname[v]}" for v in sorted(fm.variables(t.guard))]
        if t.guard != fm.TRUE:
            parts.append(f"({self.guard(t.guard)})")
        return " & ".join(parts)

    def chain(self, cases) -> str:
        """Nested if/else over (condition, statements); the final else aborts."""
        text = f"{{ {ABORT} }}"
        for cond, stmts in reversed(cases):
            inner = ";  ".join(stmts)
            text = f"if {cond} then {{ {inner} }} else {text}"
            text = f"{{ {text} }}"
        return text[2:-2] if cases else ABORT

    def program(self, name: str) -> str:
        decls = ["input ref curr", "output ref result"]
        decls += [f"local bool q{b}" for b in range(self.nbits)]
        for v in self.dname.values():
            decls += [f"local data {v}", f"local data n{v}"]
        for v in self.tracked:
            decls += [f"local bool def_{self.dname[v]}", f"local bool ndef_{self.dname[v]}"]
        for n in self.sname.values():
            decls += [f"local ref {n}{s}" for s in ("f", "l", "nf", "nl")]
        decls += ["local ref rl", "local ref node"]
        steps = [(self.condition(t), self.body(t)) for t in self.S.transitions]
        finals = [(self.state_test(q), self.build("result", "rl", e)) for q, e in self.S.output.items()]
        lines = [f"function {name}"]
        lines += [f"  {d};" for d in decls]
        lines.append("  while curr != nil {")
        lines.append(f"    {self.chain(steps)};")
        lines.append("    curr := curr.next;")
        lines.append("  };")
        lines.append(f"  {self.chain(finals)}.")
        return "\n".join(lines) + "\n"


def imp_source_from_sdst(S: Sdst, name: str = "Generated") -> str:
    return _Writer(S).program(name)


def imp_from_sdst(S: Sdst, name: str = "Generated") -> ImpProgram:
    """A single-pass heap program computing the same transduction as ``S``."""
    return parse_imp(imp_source_from_sdst(S, name))
