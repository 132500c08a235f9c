"""Concrete interpretation of transducers and acceptors.

String variables hold ropes (nested concatenation nodes), so every
transition costs time independent of how much output has accumulated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

from . import ecorder as ec
from . import formula as fm
from .datastring import DataString, InputError
from .machine import CURR, Sdst, Sym, expr_syms

# Rope nodes: () is the empty string, ("s", tag, value) a single symbol,
# ("c", left, right) a concatenation.  None stands for an undefined string.
EMPTY = ()


class NondeterminismError(RuntimeError):
    """Two transitions were enabled at once; the machine is not a valid SDST."""


def concat(parts):
    out = EMPTY
    for p in reversed(parts):
        if p is None:
            return None
        if p == EMPTY:
            continue
        out = p if out == EMPTY else ("c", p, out)
    return out


def flatten(rope) -> DataString:
    out = []
    stack = [rope]
    while stack:
        node = stack.pop()
        if not node:
            continue
        if node[0] == "s":
            out.append((node[1], node[2]))
        else:
            stack.append(node[2])
            stack.append(node[1])
    return tuple(out)


def eval_expr(expr, data: Dict[str, int], strings: Dict[str, object]):
    parts = []
    for item in expr:
        if isinstance(item, Sym):
            v = data.get(item.var)
            if v is None:
                return None
            parts.append(("s", item.tag, v))
        else:
            parts.append(strings.get(item, EMPTY))
    return concat(parts)


@dataclass
class Outcome:
    """Result of a run: ``output`` is None when the transduction is undefined."""

    output: Optional[DataString]
    reason: str = ""
    state: object = None
    steps: int = 0

    @property
    def defined(self) -> bool:
        return self.output is not None


def _enabled(S: Sdst, q, tag, data):
    ts = S.by_key.get((q, tag), ())
    if not ts:
        return None
    found = None
    for t in ts:
        g = t.guard
        if g == fm.TRUE:
            ok = True
        else:
            c = data.get(CURR)

            def cmp(v):
                x = data.get(v)
                if x is None or c is None:
                    return None
                return (x > c) - (x < c)

            ok = fm.evaluate(g, cmp) is True
        if ok:
            if found is not None:
                raise NondeterminismError(f"state {q!r}: two transitions enabled on {tag!r}")
            found = t
    return found


def _fire(S: Sdst, t, data, strings):
    new_data = dict(data)
    for a, b in t.data_assign:
        x = data.get(b)
        if x is None:
            new_data.pop(a, None)
        else:
            new_data[a] = x
    new_strings = dict(strings)
    for x, e in t.string_assign:
        new_strings[x] = eval_expr(e, data, strings)
    return new_data, new_strings


def _eps_closure(S: Sdst, q, data, strings):
    """Follow ε-transitions; returns (state, data, strings, status)."""
    if q not in S.eps_states:
        return q, data, strings, "ok"
    seen = set()
    while q in S.eps_states:
        key = (q, ec.from_values(data))
        if key in seen:
            return q, data, strings, "diverged"
        seen.add(key)
        t = _enabled(S, q, None, data)
        if t is None:
            return q, data, strings, "stuck"
        data, strings = _fire(S, t, data, strings)
        q = t.dst
    return q, data, strings, "ok"


def trace_sdst(S: Sdst, w: Sequence, check_bound: bool = False) -> Outcome:
    for tag, _ in w:
        if tag not in S.input_alphabet:
            raise InputError(f"tag {tag!r} is not in the input alphabet {list(S.input_alphabet)}")
    q = S.initial
    data: Dict[str, int] = {}
    strings: Dict[str, object] = {x: EMPTY for x in S.string_vars}
    q, data, strings, status = _eps_closure(S, q, data, strings)
    if status == "diverged":
        return Outcome(None, f"ε-divergence at state {q!r}", q, 0)
    for i, (tag, value) in enumerate(w):
        data[CURR] = value
        t = _enabled(S, q, tag, data)
        if t is None:
            return Outcome(None, f"no transition from state {q!r} on ({tag},{value}) at position {i}", q, i)
        data, strings = _fire(S, t, data, strings)
        q = t.dst
        q, data, strings, status = _eps_closure(S, q, data, strings)
        if status == "diverged":
            return Outcome(None, f"ε-divergence at state {q!r}", q, i + 1)
    if q not in S.output:
        return Outcome(None, f"no output at state {q}", q, len(w))
    rope = eval_expr(S.output[q], data, strings)
    if rope is None:
        return Outcome(None, f"output at state {q} reads an undefined variable", q, len(w))
    out = flatten(rope)
    if check_bound:
        a, b = output_bound(S)
        assert len(out) <= a * len(w) + b, "output exceeds the copyless length bound"
    return Outcome(out, "", q, len(w))


def run_sdst(S: Sdst, w: Sequence) -> Optional[DataString]:
    return trace_sdst(S, w).output


def run_acceptor(A: Sdst, w: Sequence) -> bool:
    return trace_sdst(A, w).output is not None


def output_bound(S: Sdst):
    """(A, B): defined outputs satisfy |out| <= A*|w| + B for ε-free machines.

    A is the largest number of symbols emitted by one transition and B the
    largest number emitted by an output expression.
    """
    a = max((sum(len(expr_syms(e)) for _, e in t.string_assign) for t in S.transitions), default=0)
    b = max((len(expr_syms(e)) for e in S.output.values()), default=0)
    return a, b
