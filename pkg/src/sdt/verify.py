"""Pre/post conditions, total correctness and heap assertions.

Hoare triples are decided in two ways.  ``summary`` mode is an exact search
over a product of the pre-acceptor, the body and a summary of the
post-acceptor per string variable: each non-empty string variable carries a
guessed piece of the post run (entry state and registers, exit state and
registers) whose registers live in the same ec-order as everything else.
Concatenations check that adjacent pieces meet; at the end of the input the
output expression is fed to the post-acceptor from its initial state.
``bounded`` mode enumerates every order pattern of inputs up to a length and
runs the machines concretely.

Assertions search the abstract configuration graph of a compiled heap
program in product with a pre-acceptor.  Every witness is replayed
concretely before it is returned.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from . import ecorder as ec
from . import formula as fm
from .encoding import decode_input, encode_input
from .epsilon import eliminate_epsilon
from .equiv.product import AlphabetMismatch
from .equiv.witness import ContractViolation, choose_value
from .machine import CURR, Sdst, Sym
from .run import run_acceptor, run_sdst, trace_sdst


@dataclass(frozen=True)
class Holds:
    pass


@dataclass(frozen=True)
class BoundedHolds:
    bound: int


@dataclass(frozen=True)
class Violation:
    input: tuple
    reason: str = ""


@dataclass(frozen=True)
class Safe:
    pass


@dataclass(frozen=True)
class Witness:
    input: tuple
    event: str = ""


@dataclass
class HoareTriple:
    pre: Sdst
    body: Sdst
    post: Sdst


class _Step(NamedTuple):
    tag: Optional[str]            # None for a step that reads no input
    placed: tuple                 # ec-order including the step's fresh variables
    fresh: Tuple[str, ...]        # variables that get new values here (curr first)
    assign: Dict[str, Optional[str]]


def realize(steps: Sequence[_Step]) -> tuple:
    """A concrete input following an abstract path; values are ranked to 1, 2, ..."""
    values: Dict[str, Fraction] = {}
    chosen = []
    for k, step in enumerate(steps):
        for f in step.fresh:
            sub = ec.restrict(step.placed, set(values) | {f})
            values[f] = choose_value(sub, values, f)
        live = ec.defined(step.placed)
        missing = [v for v in live if v not in values]
        if missing:
            raise ContractViolation(f"step {k}: {sorted(missing)} have no value")
        if ec.from_values({v: values[v] for v in live}) != tuple(step.placed):
            raise ContractViolation(f"step {k}: values do not realise {ec.show(step.placed)}")
        if step.tag is not None:
            chosen.append((step.tag, values[CURR]))
        new = {v: x for v, x in values.items() if v in live and v not in step.assign and v not in step.fresh}
        for a, b in step.assign.items():
            if b is not None and b in values and b in live:
                new[a] = values[b]
        values = new
    rank = {x: i + 1 for i, x in enumerate(sorted({x for _, x in chosen}))}
    return tuple((tag, rank[x]) for tag, x in chosen)


def _enabled(S: Sdst, q, tag, rho, prefix: str, curr: str = CURR):
    """The transition of S enabled under ``rho`` (None if none); S's variables carry ``prefix``."""
    for t in S.by_key.get((q, tag), ()):
        if ec.evaluate(rho, t.guard, curr, rename=lambda v: prefix + v) is True:
            return t
    return None


# -- Hoare triples, summary mode ---------------------------------------------------------------

DEAD = "⊥dead"
_BOT = "⊥undefined"


class _HoareSearch:
    def __init__(self, t: HoareTriple, total: bool):
        self.pre, self.post = t.pre, t.post
        self.body = eliminate_epsilon(t.body) if t.body.has_eps else t.body
        if not set(self.body.input_alphabet) <= set(self.pre.input_alphabet):
            raise AlphabetMismatch("the pre-condition must read the body's input alphabet")
        if not set(self.body.output_alphabet) <= set(self.post.input_alphabet):
            raise AlphabetMismatch("the post-condition must read the body's output alphabet")
        self.total = total
        self.pv = [v for v in self.post.data_vars if v != CURR]
        self.X = list(self.body.string_vars)
        self.post_states = list(self.post.states) + [DEAD]
        self.none = (None,) * len(self.pv)

    # names in the shared ec-order
    def inn(self, x, j):
        return f"x.{x}.in.{j}"

    def out(self, x, j):
        return f"x.{x}.out.{j}"

    def post_step(self, p, E, tag, n, pos):
        if p == DEAD:
            return DEAD, self.none
        c = pos.get(n)
        for t in self.post.by_key.get((p, tag), ()):
            def cmp(v):
                i = pos.get(E[self.pv.index(v)]) if v in self.pv else None
                return None if i is None or c is None else (i > c) - (i < c)
            if fm.evaluate(t.guard, cmp) is True:
                dm = t.dmap
                return t.dst, tuple(n if dm.get(v, v) == CURR else E[self.pv.index(dm.get(v, v))]
                                    for v in self.pv)
        return DEAD, self.none

    def walk(self, items, cur, pos, summ, symname):
        """Feed ``items`` to the post run from ``cur``: ("ok", cur) / ("poison",) / ("bad",)."""
        for item in items:
            if isinstance(item, Sym):
                n = symname(item.var)
                if n not in pos:
                    return ("poison",)
                cur = self.post_step(cur[0], cur[1], item.tag, n, pos)
                continue
            s = summ[self.X.index(item)]
            if s is None:
                continue
            if s == "poison":
                return ("poison",)
            pin, pout = s
            ins = tuple(self.inn(item, j) for j in range(len(self.pv)))
            if cur[0] != pin or any(pos.get(e) != pos.get(i) for e, i in zip(cur[1], ins)):
                return ("bad",)
            cur = (pout, tuple(self.out(item, j) for j in range(len(self.pv))))
        return ("ok", cur)

    def flush(self, state) -> Optional[str]:
        qa, qs, summ, rho = state
        if not self.pre.accepting(qa):
            return None
        if qs == _BOT:
            return "the body is undefined" if self.total else None
        o = self.body.output.get(qs)
        if o is None:
            return "the body is undefined" if self.total else None
        r = self.walk(o, (self.post.initial, self.none), ec.positions(rho), summ, lambda v: "s." + v)
        if r[0] == "poison":
            return "the body is undefined" if self.total else None
        if r[0] == "ok" and not (r[1][0] != DEAD and self.post.accepting(r[1][0])):
            return "the post-condition rejects the output"
        return None

    def initial(self):
        return (self.pre.initial, self.body.initial, tuple(None for _ in self.X), ec.EMPTY)

    def _guesses(self, rho, x):
        """(entry state, entry registers, extended ec-order, fresh names) for a piece of ``x``."""
        names = [f"g.{x}.{j}" for j in range(len(self.pv))]
        for p in self.post_states:
            if p == DEAD:
                yield p, self.none, rho, ()
                continue
            partial = [(rho, ())]
            for g in names:
                nxt = []
                for r, E in partial:
                    nxt.append((r, E + (None,)))
                    nxt += [(r2, E + (g,)) for r2 in ec.ec_extend(r, g)]
                partial = nxt
            for r, E in partial:
                yield p, E, r, tuple(g for g in E if g is not None)

    def _assign_string(self, x, expr, rho, summ):
        """Options (summary, name assignment, ec-order, fresh names) for ``x := expr``."""
        k = len(self.pv)
        sym = lambda v: CURR if v == CURR else "s." + v
        items = list(expr)
        while items and not isinstance(items[0], Sym) and summ[self.X.index(items[0])] is None:
            items.pop(0)
        clear = {self.inn(x, j): None for j in range(k)}
        clear.update({self.out(x, j): None for j in range(k)})
        if not items:
            yield None, clear, rho, ()
            return
        starts = []
        if isinstance(items[0], Sym):
            for p, E, r, fresh in self._guesses(rho, x):
                starts.append(((p, E), (p, E), items, r, fresh))
        else:
            y = items[0]
            s = summ[self.X.index(y)]
            if s == "poison":
                yield "poison", clear, rho, ()
                return
            entry = (s[0], tuple(self.inn(y, j) for j in range(k)))
            cur = (s[1], tuple(self.out(y, j) for j in range(k)))
            starts.append((entry, cur, items[1:], rho, ()))
        for entry, cur, rest, r, fresh in starts:
            res = self.walk(rest, cur, ec.positions(r), summ, sym)
            if res[0] == "bad":
                continue
            if res[0] == "poison":
                yield "poison", clear, r, fresh
                continue
            end = res[1]
            names = {self.inn(x, j): entry[1][j] for j in range(k)}
            names.update({self.out(x, j): end[1][j] for j in range(k)})
            yield (entry[0], end[0]), names, r, fresh

    def successors(self, state) -> Iterator[Tuple[_Step, tuple]]:
        qa, qs, summ, rho = state
        for tag in self.body.input_alphabet:
            for pi in ec.ec_extend(rho, CURR):
                ta = _enabled(self.pre, qa, tag, pi, "a.")
                if ta is None:
                    continue
                data = {"a." + v: (CURR if s == CURR else "a." + s) for v, s in ta.dmap.items()}
                tb = None if qs == _BOT else _enabled(self.body, qs, tag, pi, "s.")
                if tb is None:
                    if qs != _BOT and not self.total:
                        continue
                    rho2 = ec.apply(pi, data)
                    rho2 = ec.restrict(rho2, {n for n in ec.defined(rho2) if n.startswith("a.")})
                    yield _Step(tag, pi, (CURR,), data), (ta.dst, _BOT, (), rho2)
                    continue
                data.update({"s." + v: (CURR if s == CURR else "s." + s) for v, s in tb.dmap.items()})
                data["s." + CURR] = CURR
                branches = [(pi, (CURR,), {}, list(summ))]
                for x in self.X:
                    if x not in tb.smap:
                        continue
                    nxt = []
                    for r, fresh, names, sm in branches:
                        for s, nm, r2, f2 in self._assign_string(x, tb.smap[x], r, tuple(summ)):
                            sm2 = list(sm)
                            sm2[self.X.index(x)] = s
                            nxt.append((r2, fresh + f2, {**names, **nm}, sm2))
                    branches = nxt
                for r, fresh, names, sm in branches:
                    assign = {**data, **names}
                    rho2 = ec.drop(ec.apply(r, assign), set(fresh))
                    yield _Step(tag, r, fresh, assign), (ta.dst, tb.dst, tuple(sm), rho2)

    def search(self, limit: int) -> Optional[Tuple[List[_Step], str]]:
        init = self.initial()
        parent = {init: None}
        queue = deque([init])
        while queue:
            st = queue.popleft()
            why = self.flush(st)
            if why:
                path = []
                while parent[st] is not None:
                    step, st = parent[st]
                    path.append(step)
                return path[::-1], why
            for step, nxt in self.successors(st):
                if nxt not in parent:
                    if len(parent) >= limit:
                        raise RuntimeError(f"Hoare search exceeded {limit} abstract states")
                    parent[nxt] = (step, st)
                    queue.append(nxt)
        return None


# -- Hoare triples, bounded mode and entry points ----------------------------------------------

def order_patterns(n: int) -> Iterator[tuple]:
    """Every order type of n values, as words over 1..k using each of 1..k."""
    for w in itertools.product(range(1, n + 1), repeat=n):
        if set(w) == set(range(1, max(w, default=0) + 1)):
            yield w


def abstract_inputs(alphabet, max_len: int) -> Iterator[tuple]:
    """Representatives of every abstract input up to ``max_len``, shortest first."""
    tags = sorted(alphabet)
    for n in range(max_len + 1):
        patterns = list(order_patterns(n))
        for ts in itertools.product(tags, repeat=n):
            for vs in patterns:
                yield tuple(zip(ts, vs))


def _concrete_violation(t: HoareTriple, w, total: bool) -> Optional[str]:
    if not run_acceptor(t.pre, w):
        return None
    out = run_sdst(t.body, w)
    if out is None:
        return "the body is undefined" if total else None
    if not run_acceptor(t.post, tuple(out)):
        return "the post-condition rejects the output"
    return None


def _bounded(t: HoareTriple, total: bool, bound: int):
    for w in abstract_inputs(t.body.input_alphabet, bound):
        why = _concrete_violation(t, w, total)
        if why:
            return Violation(w, why)
    return BoundedHolds(bound)


def _check(t: HoareTriple, total: bool, mode: str, bound: int, limit: int):
    if mode == "bounded":
        return _bounded(t, total, bound)
    if mode != "summary":
        raise ValueError(f"unknown mode {mode!r}; use 'summary' or 'bounded'")
    found = _HoareSearch(t, total).search(limit)
    if found is None:
        return Holds()
    path, why = found
    w = realize(path)
    if _concrete_violation(t, w, total) is None:
        raise ContractViolation(f"abstract violation {w} does not replay")
    return Violation(w, why)


def check_hoare(t: HoareTriple, mode: str = "summary", bound: int = 5, limit: int = 500_000):
    """Partial correctness: Holds, BoundedHolds(bound) or Violation(input)."""
    return _check(t, False, mode, bound, limit)


def check_total(t: HoareTriple, mode: str = "summary", bound: int = 5, limit: int = 500_000):
    """Like check_hoare, but an undefined output on a pre-accepted input is a violation."""
    return _check(t, True, mode, bound, limit)


# -- assertions over heap programs -------------------------------------------------------------

KINDS = ("loc", "alias", "nil", "cycle")


@dataclass
class AssertionQuery:
    kind: str                     # loc, alias, nil or cycle
    program: object               # ImpProgram
    pre: Optional[Sdst] = None    # over the encoded input; None accepts everything
    label: Optional[str] = None   # for loc
    x: Optional[str] = None       # for alias (with y) and nil
    y: Optional[str] = None


def _has_cycle(shape) -> bool:
    succ = dict(shape.succ)
    for start in succ:
        seen, item = set(), start
        while item in succ:
            if item in seen:
                return True
            seen.add(item)
            item = succ[item]
    return False


class _AssertSearch:
    def __init__(self, q: AssertionQuery):
        from .imp.compile import ImpCompiler, _Stuck
        from .machine import make_sdsa, transition
        self._Stuck = _Stuck
        prog = q.program
        self.q = q
        if q.kind not in KINDS:
            raise ValueError(f"unknown assertion kind {q.kind!r}; use one of {', '.join(KINDS)}")
        refs = prog.of("ref")
        if q.kind == "loc" and q.label not in build_labels(prog):
            raise ValueError(f"unknown location {q.label!r}")
        for r in ([q.x, q.y] if q.kind == "alias" else [q.x] if q.kind == "nil" else []):
            if r not in refs:
                raise ValueError(f"{r!r} is not a reference variable")
        if q.pre is not None:
            from .encoding import PARAM, TRUE, FALSE
            alphabet = [a for a in q.pre.input_alphabet if a not in (PARAM, TRUE, FALSE)]
            self.C = ImpCompiler(prog, alphabet)
            if not set(self.C.input_alphabet) <= set(q.pre.input_alphabet):
                raise AlphabetMismatch("the pre-condition must read the program's encoded input")
            self.pre = q.pre
        else:
            self.C = ImpCompiler(prog)
            self.pre = make_sdsa(self.C.input_alphabet, ["p"], "p", [CURR], ["p"],
                                 [transition("p", a, fm.TRUE, "p") for a in self.C.input_alphabet])
        self.keep = {"s." + v for v in self.C.relevant}
        self.cache = {}

    def event(self, st) -> bool:
        q, C = self.q, self.C
        if st.phase != "run":
            return False
        if q.kind == "loc":
            return st.loc == q.label
        if q.kind == "alias":
            refs = st.shape.refs
            a, b = refs[C.ref_names.index(q.x)], refs[C.ref_names.index(q.y)]
            return a == b and isinstance(a, str) and a.startswith("c:")
        if q.kind == "cycle":
            return _has_cycle(st.shape)
        from .imp.cfg import EXIT
        if st.loc == EXIT:
            return False
        try:
            self.C._run_step(st)
        except self._Stuck as exc:
            return str(exc) == f"{q.x} is nil"
        return False

    def successors(self, state):
        st, qa, ended, rho = state
        if st not in self.cache:
            self.cache[st] = self.C.successors(st)
        ts = self.cache[st]
        if st.phase == "run":
            for t in ts:
                assign = {"s." + v: "s." + s for v, s in t.dmap.items()}
                rho2 = self._keep(ec.apply(rho, assign))
                yield _Step(None, rho, (), assign), (t.dst, qa, ended, rho2)
            return
        if ended or st.phase == "drain":
            return
        if st.phase in ("start", "wait") and self.pre.accepting(qa):
            t = self.C.eof_step(st)
            yield _Step(None, rho, (), {}), (t.dst, qa, True, rho)
        for tag in self.C.input_alphabet:
            mine = [t for t in ts if t.tag == tag]
            if not mine:
                continue
            for pi in ec.ec_extend(rho, CURR):
                ta = _enabled(self.pre, qa, tag, pi, "a.")
                if ta is None:
                    continue
                tb = next((t for t in mine if ec.evaluate(pi, t.guard, CURR, lambda v: "s." + v) is True), None)
                if tb is None:
                    continue
                assign = {"a." + v: (CURR if s == CURR else "a." + s) for v, s in ta.dmap.items()}
                assign.update({"s." + v: (CURR if s == CURR else "s." + s) for v, s in tb.dmap.items()})
                assign["s." + CURR] = CURR
                rho2 = ec.drop(self._keep(ec.apply(pi, assign)), {CURR})
                yield _Step(tag, pi, (CURR,), assign), (tb.dst, ta.dst, False, rho2)

    def _keep(self, rho):
        return ec.restrict(rho, {n for n in ec.defined(rho) if n.startswith("a.") or n in self.keep or n == CURR})

    def _finish(self, qa, rho) -> Optional[List[_Step]]:
        """Shortest continuation that makes the pre-condition accept."""
        start = (qa, ec.restrict(rho, {n for n in ec.defined(rho) if n.startswith("a.")}))
        parent = {start: None}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            if self.pre.accepting(cur[0]):
                path = []
                while parent[cur] is not None:
                    step, cur = parent[cur]
                    path.append(step)
                return path[::-1]
            q, r = cur
            for tag in self.pre.input_alphabet:
                for pi in ec.ec_extend(r, CURR):
                    ta = _enabled(self.pre, q, tag, pi, "a.")
                    if ta is None:
                        continue
                    assign = {"a." + v: (CURR if s == CURR else "a." + s) for v, s in ta.dmap.items()}
                    nxt = (ta.dst, ec.drop(ec.apply(pi, assign), {CURR}))
                    if nxt not in parent:
                        parent[nxt] = (_Step(tag, pi, (CURR,), assign), cur)
                        queue.append(nxt)
        return None

    def search(self, limit: int):
        init = (self.C.initial(), self.pre.initial, False, ec.EMPTY)
        parent = {init: None}
        queue = deque([init])
        while queue:
            state = queue.popleft()
            if self.event(state[0]):
                rest = [] if state[2] else self._finish(state[1], state[3])
                if rest is not None:
                    path, cur = [], state
                    while parent[cur] is not None:
                        step, cur = parent[cur]
                        path.append(step)
                    return path[::-1] + rest
            for step, nxt in self.successors(state):
                if nxt not in parent:
                    if len(parent) >= limit:
                        raise RuntimeError(f"assertion search exceeded {limit} abstract states")
                    parent[nxt] = (step, state)
                    queue.append(nxt)
        return None

    def describe(self) -> str:
        q = self.q
        return {"loc": f"location {q.label} is reached", "alias": f"{q.x} and {q.y} alias",
                "nil": f"{q.x} is dereferenced while nil", "cycle": "the heap contains a cycle"}[q.kind]

    def replays(self, w) -> bool:
        from .imp.interp import run_imp
        q = self.q
        if not run_acceptor(self.pre, w):
            return False
        params, lst = decode_input(self.C.inputs, w)
        if q.kind == "nil":
            o = run_imp(q.program, lst, params)
            return o.error == "nilDeref" and o.error_ref == q.x
        seen = []
        if q.kind == "loc":
            probe = lambda m: m.loc == q.label
        elif q.kind == "alias":
            probe = lambda m: m.aliases(q.x, q.y)
        else:
            probe = lambda m: m.has_cycle()
        run_imp(q.program, lst, params, observer=lambda m: seen.append(True) or True if probe(m) else None)
        return bool(seen)


def build_labels(prog) -> List[str]:
    from .imp.cfg import build_cfg
    return build_cfg(prog).locations


def check_assertion(q: AssertionQuery, limit: int = 500_000):
    """Safe(), or Witness(encoded input) on which run_imp exhibits the event."""
    s = _AssertSearch(q)
    path = s.search(limit)
    if path is None:
        return Safe()
    w = realize(path)
    if not s.replays(w):
        raise ContractViolation(f"assertion witness {w} does not replay")
    return Witness(w, s.describe())
