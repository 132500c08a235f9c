"""Symbolic composition of assignments and ε-transition elimination."""
from __future__ import annotations

from typing import Dict, Optional, Tuple

from . import ecorder as ec
from . import formula as fm
from .machine import CURR, Sdst, Sym, Transition, live_variables, make_sdst

DIVERGED = "⊥diverged"


class Subst:
    """A composed parallel assignment, expressed over the values at its start.

    ``data[v]`` is the start-variable whose value v now holds (None: undefined).
    ``strings[x]`` is a tuple of items over start variables, or None when the
    content is known to be undefined.
    """

    __slots__ = ("data", "strings")

    def __init__(self, data: Dict[str, Optional[str]], strings: Dict[str, Optional[tuple]]):
        self.data = data
        self.strings = strings

    @classmethod
    def identity(cls, S: Sdst) -> "Subst":
        return cls({v: v for v in S.data_vars}, {x: (x,) for x in S.string_vars})

    def then(self, t: Transition) -> "Subst":
        data = {v: self.data.get(t.dmap.get(v, v)) for v in self.data}
        strings = dict(self.strings)
        for x, e in t.string_assign:
            strings[x] = self.expand(e)
        return Subst(data, strings)

    def expand(self, e) -> Optional[tuple]:
        out = []
        for item in e:
            if isinstance(item, Sym):
                src = self.data.get(item.var)
                if src is None:
                    return None
                out.append(Sym(item.tag, src))
            else:
                c = self.strings.get(item, (item,))
                if c is None:
                    return None
                out.extend(c)
        return tuple(out)

    def key(self):
        return (tuple(sorted(self.data.items(), key=lambda kv: kv[0])),
                tuple(sorted(self.strings.items(), key=lambda kv: kv[0])))


def eliminate_epsilon(S: Sdst) -> Sdst:
    """An equivalent SDST without ε-transitions.

    States of the result pair an original state with the ec-order of the
    variables that guards may still read, plus the set of string variables
    made undefined before the first input symbol.  ε-chains are followed
    deterministically and their assignments composed; a chain that revisits a
    (state, ec-order) pair diverges and yields no transition.
    """
    if not S.has_eps:
        return S
    glive = live_variables(S, guards_only=True)

    def settle(q, rho, sub: Subst):
        """Run the ε-chain from q; returns (state, rho, subst) or None on divergence."""
        seen = set()
        while q in S.eps_states:
            if (q, rho) in seen:
                return None
            seen.add((q, rho))
            enabled = None
            for t in S.by_key.get((q, None), ()):
                if ec.evaluate(rho, t.guard) is True:
                    enabled = t
                    break
            if enabled is None:
                break
            rho = ec.restrict(ec.apply(rho, enabled.dmap), glive[enabled.dst])
            sub = sub.then(enabled)
            q = enabled.dst
        return q, rho, sub

    def strip_undef(sub: Subst, undef: frozenset):
        """Turn a composed string assignment into (assignment, undefined-set)."""
        strings, new_undef = {}, set()
        for x, content in sub.strings.items():
            if content is None or any((not isinstance(i, Sym)) and i in undef for i in content):
                new_undef.add(x)
                strings[x] = ()
            else:
                strings[x] = content
        return strings, frozenset(new_undef)

    start = settle(S.initial, ec.EMPTY, Subst.identity(S))
    states, trans, output = [], [], {}
    if start is None:
        init = DIVERGED
        states.append(DIVERGED)
    else:
        q0, rho0, sub0 = start
        undef0 = frozenset(x for x, c in sub0.strings.items() if c is None or any(isinstance(i, Sym) for i in c))
        init = (q0, rho0, undef0)
        states.append(init)
    seen = set(states)
    work = list(states)
    while work:
        node = work.pop()
        if node == DIVERGED:
            continue
        q, rho, undef = node
        if q in S.output and not any(i in undef for i in S.output[q] if not isinstance(i, Sym)):
            output[node] = S.output[q]
        if q in S.eps_states:
            continue  # stuck ε-state: rests here, consumes nothing
        base = ec.drop(rho, {CURR})
        for tag in S.input_alphabet:
            ts = S.by_key.get((q, tag), ())
            if not ts:
                continue
            groups: Dict[object, list] = {}
            placements = ec.ec_extend(base, CURR)
            for pi in placements:
                fired = [t for t in ts if ec.evaluate(pi, t.guard) is True]
                if not fired:
                    continue
                t = fired[0]
                rho1 = ec.restrict(ec.apply(pi, t.dmap), glive[t.dst])
                res = settle(t.dst, rho1, Subst.identity(S).then(t))
                if res is None:
                    target, strings = DIVERGED, {}
                    key = (DIVERGED,)
                else:
                    q2, rho2, sub = res
                    strings, undef2 = strip_undef(sub, undef)
                    target = (q2, rho2, undef2)
                    key = (target, sub.key(), tuple(sorted(strings.items())))
                groups.setdefault(key, [target, sub if res else None, strings, []])[3].append(pi)
            for key, (target, sub, strings, pis) in groups.items():
                if target == DIVERGED:
                    continue  # divergence: no transition at all
                if len(pis) == len(placements):
                    guard = fm.TRUE
                else:
                    guard = fm.disj(*(ec.sign_guard(p) for p in pis))
                data = {v: s for v, s in sub.data.items() if s is not None and s != v}
                # targets that become undefined: copy from a variable that is
                # undefined is impossible to express, so they are simply not
                # tracked further (guards never read them: restricted above)
                trans.append(Transition(node, tag, guard, target, tuple(sorted(data.items())),
                                        tuple(sorted((x, e) for x, e in strings.items() if e != (x,)))))
                if target not in seen:
                    seen.add(target)
                    states.append(target)
                    work.append(target)
    return make_sdst(S.input_alphabet, S.output_alphabet, states, init, S.data_vars, S.string_vars,
                     output, trans)
