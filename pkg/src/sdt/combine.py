"""Conditional combination: run an acceptor and two transducers in lockstep."""
from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from . import ecorder as ec
from . import formula as fm
from .epsilon import eliminate_epsilon
from .machine import CURR, Sdst, Sym, Transition, make_sdst


class AlphabetMismatch(ValueError):
    pass


def rename_formula(f, prefix: str):
    op = f[0]
    if op in ("true", "false"):
        return f
    if op in ("lt", "gt"):
        return (op, f[1] if f[1] == CURR else prefix + f[1])
    return (op,) + tuple(rename_formula(g, prefix) for g in f[1:])


def restrict_defined(f, defined):
    """Partially evaluate ``f`` where variables outside ``defined`` are undefined.

    An atom over an undefined variable makes the whole test undefined, which
    never enables a transition; the result is FALSE in that case.
    """
    if fm.variables(f) - {CURR} <= set(defined):
        return f
    return fm.FALSE


def _rename_item(item, prefix):
    if isinstance(item, Sym):
        return Sym(item.tag, item.var if item.var == CURR else prefix + item.var)
    return prefix + item


def _step_defined(defined: frozenset, t: Transition) -> frozenset:
    out = set()
    for v in defined | set(t.dmap):
        src = t.dmap.get(v, v)
        if src == CURR or src in defined:
            out.add(v)
    return frozenset(out - {CURR})


def combine_if(L: Sdst, S1: Sdst, S2: Sdst) -> Sdst:
    """F(w) = S1(w) when L accepts w, else S2(w).

    Product states record, per component, its state (None once it is stuck)
    and which of its data variables are defined, so that a stuck component is
    told apart from one whose test reads an undefined variable.
    """
    if not (set(L.input_alphabet) == set(S1.input_alphabet) == set(S2.input_alphabet)):
        raise AlphabetMismatch("combine_if needs a common input alphabet")
    if set(S1.output_alphabet) != set(S2.output_alphabet):
        raise AlphabetMismatch("combine_if needs a common output alphabet")
    parts = [(eliminate_epsilon(M), p) for M, p in ((L, "L_"), (S1, "A_"), (S2, "B_"))]

    def options(M: Sdst, prefix, q, defined, tag):
        if q is None:
            return [(None, fm.TRUE)]
        ts = M.by_key.get((q, tag), ())
        guards = [rename_formula(restrict_defined(t.guard, defined), prefix) for t in ts]
        opts = [(t, g) for t, g in zip(ts, guards) if g != fm.FALSE]
        rest = fm.neg(fm.disj(*[g for _, g in opts])) if opts else fm.TRUE
        if ec.satisfiable(rest) is not None:
            opts.append((None, rest))
        return opts

    init = tuple((M.initial, frozenset()) for M, _ in parts)
    states, trans, output = [init], [], {}
    seen = {init}
    work = [init]
    while work:
        node = work.pop()
        (qL, _), (q1, _), (q2, _) = node
        if qL is not None and qL in parts[0][0].output:
            chosen, prefix, q = parts[1][0], "A_", q1
        else:
            chosen, prefix, q = parts[2][0], "B_", q2
        if q is not None and q in chosen.output:
            output[node] = tuple(_rename_item(i, prefix) for i in chosen.output[q])
        for tag in L.input_alphabet:
            combos: List[Tuple[list, list]] = [([], [])]
            for (M, p), (q, d) in zip(parts, node):
                combos = [(ts + [t], gs + [g]) for ts, gs in combos for t, g in options(M, p, q, d, tag)]
            for ts, gs in combos:
                guard = fm.conj(*gs)
                if ec.satisfiable(guard) is None:
                    continue
                nxt, data, strings = [], {}, {}
                for (M, p), (q, d), t in zip(parts, node, ts):
                    if t is None:
                        nxt.append((None, frozenset()))
                        continue
                    nxt.append((t.dst, _step_defined(d, t)))
                    for a, b in t.data_assign:
                        data[p + a] = b if b == CURR else p + b
                    for x, e in t.string_assign:
                        strings[p + x] = tuple(_rename_item(i, p) for i in e)
                target = tuple(nxt)
                trans.append(Transition(node, tag, guard, target, tuple(sorted(data.items())),
                                        tuple(sorted(strings.items()))))
                if target not in seen:
                    seen.add(target)
                    states.append(target)
                    work.append(target)
    dvars = [p + v for M, p in parts for v in M.data_vars if v != CURR]
    svars = [p + x for M, p in parts for x in M.string_vars]
    return make_sdst(L.input_alphabet, S1.output_alphabet, states, init, dvars, svars, output, trans)
