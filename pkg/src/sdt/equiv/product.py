"""The one-counter product of two transducers, searching for an output difference.

Three kinds of difference are searched separately:

* ``domainDiff``: exactly one machine produces an output.
* ``lengthDiff``: one machine guesses a position p in its output and the
  other machine's output has exactly p symbols.
* ``positionDiff``: both machines guess a position p; the counter checks that
  p is the same position and the recorded symbols differ.

For every string variable the product guesses where its content ends up
relative to p: ``L`` (left), ``C`` (contains p), ``R`` (right) or ``N`` (not
in the output).  ``E`` marks a variable known to be empty and ``U`` one whose
content is undefined; in ``domainDiff`` only ``D``/``U`` are tracked.
"""
from __future__ import annotations

from itertools import product as cartesian
from typing import Dict, List, NamedTuple, Optional, Tuple

from .. import ecorder as ec
from ..epsilon import eliminate_epsilon
from ..machine import CURR, Sdst, Sym, live_variables
from .onecounter import OneCounterMachine

MODES = ("domainDiff", "lengthDiff", "positionDiff")
ACCEPT = "⊤accept"
VP = ("vp1", "vp2")


class AlphabetMismatch(ValueError):
    pass


class ProductTooLarge(RuntimeError):
    pass


class ProductState(NamedTuple):
    mode: str
    q1: object          # None once the machine has no enabled transition
    q2: object
    rho: tuple
    cls1: tuple
    cls2: tuple
    psym1: Optional[str] = None
    psym2: Optional[str] = None
    loose: frozenset = frozenset()   # defined variables whose order no longer matters


def _roles(mode: str, orientation: int):
    if mode == "domainDiff":
        return ("dom", "dom")
    if mode == "positionDiff":
        return ("pos", "pos")
    return ("pos", "all") if orientation == 1 else ("all", "pos")


def _target_options(role, e, classes, sym_defined, can_mark, sign):
    """Ways the content assigned by ``e`` may be classified: (class, delta, marked Sym)."""
    var_cls = [classes[i] for i in e if not isinstance(i, Sym)]
    undefined = "U" in var_cls or any(isinstance(i, Sym) and not sym_defined(i) for i in e)
    if role == "dom":
        return [("U" if undefined else "D", 0, None)]
    if undefined:
        return [("U", 0, None)] if all(c in "NEU" for c in var_cls) else []
    nsyms = sum(1 for i in e if isinstance(i, Sym))
    if nsyms == 0 and all(c == "E" for c in var_cls):
        return [("E", 0, None)]
    opts = []
    if all(c in "LE" for c in var_cls):
        opts.append(("L", sign * nsyms, None))
    if all(c in "NE" for c in var_cls):
        opts.append(("N", 0, None))
    if role != "pos":
        return opts
    if all(c in "RE" for c in var_cls):
        opts.append(("R", 0, None))
    c_at = [j for j, i in enumerate(e) if not isinstance(i, Sym) and classes[i] == "C"]
    if len(c_at) == 1:
        j = c_at[0]
        if _split_ok(e, j, classes):
            opts.append(("C", sign * _syms_before(e, j), None))
    elif not c_at and can_mark:
        for j, i in enumerate(e):
            if isinstance(i, Sym) and _split_ok(e, j, classes):
                opts.append(("C", sign * _syms_before(e, j), i))
    return opts


def _split_ok(e, j, classes):
    for k, i in enumerate(e):
        if k == j or isinstance(i, Sym):
            continue
        if classes[i] not in ("LE" if k < j else "RE"):
            return False
    return True


def _syms_before(e, j):
    return sum(1 for i in e[:j] if isinstance(i, Sym))


def _assignment_options(role, svars, smap, classes, sym_defined, marked, sign):
    """Joint classification of one transition's string assignment.

    Yields (new class tuple, counter delta, marked Sym or None).
    """
    used = set()
    for e in smap.values():
        used.update(i for i in e if not isinstance(i, Sym))
    for x in svars:
        if x not in used and classes[x] not in "NEU" and role != "dom":
            return []
    per_target = [_target_options(role, smap[x], classes, sym_defined, not marked, sign) for x in svars]
    out = []
    for combo in cartesian(*per_target):
        marks = [m for _, _, m in combo if m is not None]
        if len(marks) > 1:
            continue
        out.append((tuple(c for c, _, _ in combo), sum(d for _, d, _ in combo), marks[0] if marks else None))
    return out


def _flush_options(role, S: Sdst, q, classes, sym_defined, marked, sign):
    """Classifications of the final output O(q); for ``dom`` a single (defined?) entry."""
    if q is None or q not in S.output:
        return [("U", 0, None)] if role == "dom" else []
    e = S.output[q]
    used = {i for i in e if not isinstance(i, Sym)}
    opts = _target_options(role, e, classes, sym_defined, not marked, sign)
    if role == "dom":
        return opts
    for x in S.string_vars:
        if x not in used and classes[x] not in "NEU":
            return []
    want = "C" if role == "pos" else "LE"
    return [o for o in opts if o[0] in want]


def string_liveness(S: Sdst) -> Dict[object, frozenset]:
    """String variables whose content may still reach an output, per state."""
    live = {q: {i for i in S.output.get(q, ()) if not isinstance(i, Sym)} for q in S.states}
    changed = True
    while changed:
        changed = False
        for t in S.transitions:
            smap = {x: (x,) for x in S.string_vars}
            smap.update(t.smap)
            for y in list(live[t.dst]):
                for i in smap[y]:
                    if not isinstance(i, Sym) and i not in live[t.src]:
                        live[t.src].add(i)
                        changed = True
    return {q: frozenset(v) for q, v in live.items()}


def _settle(role, svars, classes, live):
    """Canonical classes at a state: dead content is irrelevant unless it was placed around p.

    Returns None when a dead variable holds content counted towards the
    output, since such a path can never be completed.
    """
    out = []
    for x, c in zip(svars, classes):
        if x in live:
            out.append(c)
        elif role == "dom":
            out.append("D")
        elif c in "LCR":
            return None
        else:
            out.append("N")
    return tuple(out)


class ProductBuilder:
    """Lazily explores the reachable product for one mode (and orientation)."""

    def __init__(self, S1: Sdst, S2: Sdst, mode: str, orientation: int = 1, limit: int = 400_000):
        if set(S1.input_alphabet) != set(S2.input_alphabet):
            raise AlphabetMismatch("machines must share the input alphabet")
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.S = (eliminate_epsilon(S1), eliminate_epsilon(S2))
        for i, M in enumerate(self.S):
            if any(CURR in t.dmap for t in M.transitions):
                raise ValueError(f"machine {i + 1} assigns to curr, which the product shares")
        self.mode = mode
        self.roles = _roles(mode, orientation)
        self.limit = limit
        self.live = []
        for i, M in enumerate(self.S):
            lv = live_variables(M)
            self.live.append({q: frozenset(self.name(i, v) for v in vs) for q, vs in lv.items()})
        self.glive = []
        for i, M in enumerate(self.S):
            lv = live_variables(M, guards_only=True)
            self.glive.append({q: frozenset(self.name(i, v) for v in vs) for q, vs in lv.items()})
        self.slive = [string_liveness(M) for M in self.S]
        self._memo: Dict[tuple, list] = {}
        self._syms: Dict[int, frozenset] = {}
        self.alphabet = tuple(S1.input_alphabet)

    @staticmethod
    def name(i: int, v: str) -> str:
        return v if v == CURR else f"{i + 1}:{v}"

    def initial(self) -> ProductState:
        cls = tuple(("D" if self.mode == "domainDiff" else "E") for _ in self.S[0].string_vars), \
            tuple(("D" if self.mode == "domainDiff" else "E") for _ in self.S[1].string_vars)
        return ProductState(self.mode, self.S[0].initial, self.S[1].initial, ec.EMPTY, cls[0], cls[1])

    def _keep(self, q1, q2, psyms):
        """Variables whose order is still relevant, and those whose definedness is.

        Guards need order; emitted values need it only while they may still
        become the compared symbol at p, i.e. in positionDiff before this
        machine has marked its symbol.  The order-relevant sets are closed
        backwards under data assignments and only shrink along a path.
        """
        order, seen = set(), set()
        for i, q in enumerate((q1, q2)):
            if q is None:
                continue
            seen |= self.live[i][q]
            order |= self.glive[i][q]
            if self.mode == "positionDiff" and psyms[i] is None:
                order |= self.live[i][q]
        for i, p in enumerate(psyms):
            if p is not None:
                order.add(VP[i])
        return order, seen

    def _settle(self, i, q, classes):
        if q is None:
            return classes
        return _settle(self.roles[i], self.S[i].string_vars, classes, self.slive[i][q])

    def _hopeless(self, rho, psyms) -> bool:
        if self.mode != "positionDiff" or None in psyms or psyms[0] != psyms[1]:
            return False
        a, b = ec.index(rho, VP[0]), ec.index(rho, VP[1])
        return a is not None and a == b

    def successors(self, st: ProductState):
        """Yield (target, delta, label) for every product move out of ``st``."""
        qs = (st.q1, st.q2)
        clss = (st.cls1, st.cls2)
        psyms = (st.psym1, st.psym2)
        yield from self._flush(st, qs, clss, psyms)
        base = ec.drop(st.rho, {CURR})
        for tag in self.alphabet:
            for pi in ec.ec_extend(base, CURR):
                yield from self._input_step(st, tag, pi, qs, clss, psyms)

    def _options(self, i, t, classes, pi, psyms, st_loose):
        """Memoised _assignment_options; the result depends on pi only through definedness."""
        M = self.S[i]
        defined = ec.defined(pi) | st_loose
        syms = self._syms.get(id(t))
        if syms is None:
            syms = self._syms[id(t)] = frozenset(i2.var for e in t.smap.values() for i2 in e if isinstance(i2, Sym))
        key = (i, id(t), classes, psyms[i] is not None, frozenset(v for v in syms if self.name(i, v) in defined))
        opts = self._memo.get(key)
        if opts is None:
            smap = {x: (x,) for x in M.string_vars}
            smap.update(t.smap)
            opts = _assignment_options(self.roles[i], M.string_vars, smap, dict(zip(M.string_vars, classes)),
                                       lambda s: self.name(i, s.var) in defined, psyms[i] is not None,
                                       1 if i == 0 else -1)
            self._memo[key] = opts
        return opts

    def _sym_defined(self, i, rho, loose=frozenset()):
        defined = ec.defined(rho) | loose
        return lambda s: self.name(i, s.var) in defined

    def _input_step(self, st, tag, pi, qs, clss, psyms):
        choices = []
        for i, M in enumerate(self.S):
            q = qs[i]
            if q is None:
                choices.append([(None, None, clss[i], 0, None)])
                continue
            fired = None
            for t in M.by_key.get((q, tag), ()):
                if ec.evaluate(pi, t.guard, rename=lambda v, i=i: self.name(i, v)) is True:
                    fired = t
                    break
            if fired is None:
                if self.mode != "domainDiff":
                    return
                choices.append([(None, None, (), 0, None)])
                continue
            opts = self._options(i, fired, clss[i], pi, psyms, st.loose)
            choices.append([(fired, fired.dst, c, d, m) for c, d, m in opts])
        for (t1, d1, c1, n1, m1), (t2, d2, c2, n2, m2) in cartesian(*choices):
            assign = {}
            for i, t in enumerate((t1, t2)):
                if t is not None:
                    for a, b in t.data_assign:
                        assign[self.name(i, a)] = self.name(i, b)
            new_psyms = list(psyms)
            for i, m in enumerate((m1, m2)):
                if m is not None:
                    assign[VP[i]] = self.name(i, m.var)
                    new_psyms[i] = m.tag
            c1 = self._settle(0, d1, c1)
            c2 = self._settle(1, d2, c2)
            if c1 is None or c2 is None:
                continue
            order, seen = self._keep(d1, d2, new_psyms)
            before = ec.defined(pi) | st.loose
            after = {v for v in before if v not in assign} | {a for a, b in assign.items() if b in before}
            rho = ec.restrict(ec.apply(pi, assign), order)
            if self._hopeless(rho, new_psyms):
                continue
            loose = frozenset(v for v in after if v in seen and v not in order)
            target = ProductState(self.mode, d1, d2, rho, c1, c2, new_psyms[0], new_psyms[1], loose)
            yield target, n1 + n2, ("in", tag, pi, assign)

    def _flush(self, st, qs, clss, psyms):
        per = []
        for i, M in enumerate(self.S):
            cls = dict(zip(M.string_vars, clss[i]))
            sign = 1 if i == 0 else -1
            per.append(_flush_options(self.roles[i], M, qs[i], cls, self._sym_defined(i, st.rho, st.loose),
                                      psyms[i] is not None, sign))
        if self.mode == "domainDiff":
            d1 = per[0][0][0] != "U"
            d2 = per[1][0][0] != "U"
            if d1 != d2:
                yield ACCEPT, 0, ("flush", st)
            return
        for (c1, n1, m1), (c2, n2, m2) in cartesian(*per):
            if self.mode == "positionDiff":
                assign = {}
                new_psyms = list(psyms)
                for i, m in enumerate((m1, m2)):
                    if m is not None:
                        assign[VP[i]] = self.name(i, m.var)
                        new_psyms[i] = m.tag
                rho = ec.apply(st.rho, assign)
                if None in new_psyms or self._hopeless(rho, new_psyms):
                    continue
            yield ACCEPT, n1 + n2, ("flush", st)

    def explore(self):
        """Materialise the reachable product: returns (initial, weighted edge list, node count)."""
        init = self.initial()
        seen = {init}
        stack = [init]
        edges = {}
        while stack:
            st = stack.pop()
            for target, delta, label in self.successors(st):
                # parallel moves with the same effect on the counter are interchangeable
                edges.setdefault((st, target, delta), label)
                if target != ACCEPT and target not in seen:
                    seen.add(target)
                    if len(seen) > self.limit:
                        raise ProductTooLarge(f"product exceeds {self.limit} states")
                    stack.append(target)
        return init, [(u, v, d, lab) for (u, v, d), lab in edges.items()], len(seen)


def build_product(S1: Sdst, S2: Sdst, mode: str, orientation: int = 1, limit: int = 400_000) -> OneCounterMachine:
    """The one-counter machine whose accepting state is 0-reachable iff a difference of ``mode`` exists.

    For ``lengthDiff`` the ``orientation`` says which machine guesses the
    position (1 or 2); both orientations are needed for a complete check.
    """
    builder = ProductBuilder(S1, S2, mode, orientation, limit)
    init, edges, _ = builder.explore()
    return OneCounterMachine.from_weighted(init, {ACCEPT}, edges)
