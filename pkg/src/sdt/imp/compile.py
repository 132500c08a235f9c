"""Compiling single-pass heap programs into streaming transducers.

The transducer's finite state is an abstraction of the program
configuration: control location, boolean and tag variables, the heap shape
(see ``shape``) and the ec-order of the data variables that comparisons
may still read.  Data values themselves live in data variables: every ref
``r`` gets a variable ``d_r`` holding the data field of the node it points
at (for the input ref this is ``curr``).  Detached segments of the heap
live in string variables.

Program steps become ε-transitions with guard true (the ec-order in the
state decides every comparison), and ``curr := curr.next`` is the only step
that consumes input.  Before that step completes the state *waits*: on the
next symbol the new node is materialised, and at end of input the
remaining program is evaluated symbolically, which yields the output
expression of the waiting state.
"""
from __future__ import annotations

from typing import Dict, List, NamedTuple, Optional, Tuple

from .. import ecorder as ec
from .. import formula as fm
from ..encoding import FALSE, PARAM, TRUE, param_tags
from ..epsilon import Subst
from ..machine import CURR, Sdst, Sym, Transition, make_sdst, transition
from .ast import (And, Assign, BoolConst, Cmp, Field, If, ImpProgram, New, NextAssign, NextRead, Nil, Not,
                  Or, TagConst, Var, While)
from .cfg import EXIT, build_cfg, check_imp
from .interp import _OPS, default_alphabet
from .shape import NIL, PENDING, UNREAD, Heap, Shape, chain

CARRIER = "_carrier"


class CompileError(ValueError):
    """The program violates the single-pass restrictions."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


class _Stuck(Exception):
    """Abstract evaluation hit a runtime error."""


class AbsState(NamedTuple):
    phase: str          # "param", "start", "wait", "run" or "drain"
    loc: object         # statement label, parameter index, or drain mode
    bools: Tuple[bool, ...]
    tags: Tuple[Optional[str], ...]
    shape: Optional[Shape]
    rho: tuple


class ImpCompiler:
    def __init__(self, prog: ImpProgram, alphabet=None):
        problems = check_imp(prog)
        if problems:
            raise CompileError(problems)
        self.prog = prog
        self.cfg = build_cfg(prog)
        self.alphabet = tuple(alphabet) if alphabet else default_alphabet(prog)
        self.curr = prog.curr
        self.result = prog.result
        self.ref_names = prog.of("ref")
        self.bool_names = prog.of("bool")
        self.tag_names = prog.of("tag")
        self.nseg = 2 * len(self.ref_names)
        self.string_vars = tuple(f"w{i}" for i in range(self.nseg))
        self.inputs = [(d.name, d.type) for d in prog.input_params]
        self.outputs = [(d.name, d.type) for d in prog.output_params]
        self.carrier = self._choose_carrier()
        dvars = [CURR] + prog.of("data") + [self.dvar(r) for r in self.ref_names if r != self.curr]
        if self.carrier == CARRIER:
            dvars.append(CARRIER)
        self.data_vars = tuple(dvars)
        self.relevant = self._relevant()
        self.input_alphabet = tuple(dict.fromkeys(list(self.alphabet) + param_tags(self.inputs, self.alphabet)))
        out = list(self.alphabet)
        for _, typ in self.outputs:
            out += [PARAM] if typ == "data" else [TRUE, FALSE] if typ == "bool" else []
        self.output_alphabet = tuple(dict.fromkeys(out))

    # -- static information
    def dvar(self, r: str) -> str:
        return CURR if r == self.curr else f"d_{r}"

    def _choose_carrier(self) -> Optional[str]:
        if all(t == "data" for _, t in self.outputs):
            return None
        if self.inputs and self.inputs[0][1] == "data":
            p = self.inputs[0][0]
            if not any(isinstance(s, Assign) and s.target == p for s in self.prog.statements()):
                return p
        return CARRIER

    def _svar(self, e) -> str:
        if isinstance(e, Var):
            return e.name
        return self.dvar(e.ref)

    def _relevant(self) -> frozenset:
        compared, flows = set(), []

        def conds(e):
            if isinstance(e, Cmp) and e.kind == "data":
                compared.update((self._svar(e.left), self._svar(e.right)))
            elif isinstance(e, Not):
                conds(e.arg)
            elif isinstance(e, (And, Or)):
                conds(e.left)
                conds(e.right)

        for d in self.prog.decls:
            if d.mode != "input" and isinstance(d.init, Var):
                if d.type == "data":
                    flows.append((d.name, d.init.name))
                elif d.type == "ref":
                    flows.append((self.dvar(d.name), CURR))
        for s in self.prog.statements():
            if isinstance(s, (If, While)):
                conds(s.cond)
            elif isinstance(s, Assign):
                t = self.prog.types[s.target]
                if t == "bool":
                    conds(s.expr)
                elif t == "data":
                    flows.append((s.target, self._svar(s.expr)))
                elif t == "ref" and isinstance(s.expr, Var):
                    flows.append((self.dvar(s.target), self.dvar(s.expr.name)))
            elif isinstance(s, New):
                flows.append((self.dvar(s.target), self._svar(s.data)))
        rel = set(compared)
        changed = True
        while changed:
            changed = False
            for t, s in flows:
                if t in rel and s not in rel:
                    rel.add(s)
                    changed = True
        return frozenset(rel)

    # -- states
    def initial(self) -> AbsState:
        bools = tuple(isinstance(d.init, BoolConst) and d.init.value
                      for d in map(self.prog.decl, self.bool_names))
        tags = tuple(d.init.tag if isinstance(d.init, TagConst) else None
                     for d in map(self.prog.decl, self.tag_names))
        refs = []
        for r in self.ref_names:
            init = self.prog.decl(r).init
            refs.append(PENDING if r == self.curr or isinstance(init, Var) else NIL)
        shape = Shape(tuple(refs), (), ())
        if self.inputs:
            return AbsState("param", 0, bools, tags, shape, ec.EMPTY)
        return AbsState("start", self.cfg.entry, bools, tags, shape, ec.EMPTY)

    def _with(self, st: AbsState, name: str, value) -> AbsState:
        if name in self.bool_names:
            b = list(st.bools)
            b[self.bool_names.index(name)] = value
            return st._replace(bools=tuple(b))
        t = list(st.tags)
        t[self.tag_names.index(name)] = value
        return st._replace(tags=tuple(t))

    def _reads(self, st: AbsState, tag: str, data: Dict[str, str], after: AbsState, strings=None):
        """Input transitions on ``tag`` that assign ``data`` (sources may be curr)."""
        keep = self.relevant
        base = ec.drop(st.rho, {CURR})
        if not (set(data) | {CURR}) & keep:
            placements = [base]
        else:
            placements = ec.ec_extend(base, CURR)
        groups: Dict[tuple, list] = {}
        for pi in placements:
            rho = ec.restrict(ec.apply(pi, data), keep)
            if after.phase != "run":
                rho = ec.drop(rho, {CURR})
            groups.setdefault(rho, []).append(pi)
        out = []
        for rho, pis in groups.items():
            guard = fm.TRUE if len(pis) == len(placements) else fm.disj(*(ec.sign_guard(p) for p in pis))
            out.append(transition(st, tag, guard, after._replace(rho=rho), data, strings))
        return out

    def successors(self, st: AbsState) -> List[Transition]:
        if st.phase == "param":
            return self._param_step(st)
        if st.phase in ("start", "wait"):
            return self._wait_step(st)
        if st.phase == "drain":
            return self._drain_step(st)
        if st.loc == EXIT:
            t = self._exit_step(st)
            return [t] if t else []
        try:
            return [self._run_step(st)]
        except _Stuck:
            return []

    def _param_step(self, st: AbsState) -> List[Transition]:
        name, typ = self.inputs[st.loc]
        last = st.loc + 1 == len(self.inputs)
        data: Dict[str, str] = {}
        if st.loc == 0 and self.carrier == CARRIER:
            data[CARRIER] = CURR
        if typ == "data":
            data[name] = CURR
        for d in self.prog.decls:
            if d.mode != "input" and isinstance(d.init, Var) and d.init.name == name and typ == "data":
                data[d.name] = CURR
        options = {"data": [(PARAM, None)], "bool": [(TRUE, True), (FALSE, False)],
                   "tag": [(s, s) for s in self.alphabet]}[typ]
        out = []
        for tag, value in options:
            nxt = st._replace(phase="start", loc=self.cfg.entry) if last else st._replace(loc=st.loc + 1)
            if typ != "data":
                nxt = self._with(nxt, name, value)
                for d in self.prog.decls:
                    if d.mode != "input" and isinstance(d.init, Var) and d.init.name == name:
                        nxt = self._with(nxt, d.name, value)
            out += self._reads(st, tag, data, nxt)
        return out

    def _wait_step(self, st: AbsState) -> List[Transition]:
        out = []
        pending = [r for r, item in zip(self.ref_names, st.shape.refs) if item == PENDING]
        data = {self.dvar(r): CURR for r in pending if r != self.curr}
        if self.carrier == CARRIER and st.phase == "start" and not self.inputs:
            data[CARRIER] = CURR
        for tag in self.alphabet:
            h = Heap.of(st.shape, self.ref_names, self.dvar)
            n = h.add_class(tag, UNREAD)
            for r in pending:
                h.set_ref(r, n)
            h.replace_target(PENDING, n)
            h.succ[n] = UNREAD
            shape, strings = h.normalize(self.nseg)
            nxt = st._replace(phase="run", shape=shape)
            out += self._reads(st, tag, data, nxt, strings)
        return out

    def eof_step(self, st: AbsState) -> Transition:
        """The pseudo-transition taken by a waiting state when the input ends."""
        h = Heap.of(st.shape, self.ref_names, self.dvar)
        for r, item in zip(self.ref_names, st.shape.refs):
            if item == PENDING:
                h.set_ref(r, NIL)
        h.replace_target(PENDING, NIL)
        shape, strings = h.normalize(self.nseg)
        return transition(st, None, fm.TRUE, st._replace(phase="run", shape=shape), {}, strings)

    def _drain_step(self, st: AbsState) -> List[Transition]:
        out = []
        for tag in self.alphabet:
            strings = {"w0": ("w0", Sym(tag, CURR))} if st.loc == "append" else {}
            out.append(transition(st, tag, fm.TRUE, st, {}, strings))
        return out

    # -- program steps
    def _index(self, names, name):
        return names.index(name)

    def _item(self, st: AbsState, r: str):
        item = st.shape.refs[self.ref_names.index(r)]
        if item == NIL:
            raise _Stuck(f"{r} is nil")
        return item

    def _data_src(self, st: AbsState, e) -> str:
        if isinstance(e, Field):
            self._item(st, e.ref)
        return self._svar(e)

    def _value(self, st: AbsState, e):
        if isinstance(e, BoolConst):
            return e.value
        if isinstance(e, TagConst):
            return e.tag
        if isinstance(e, Nil):
            return NIL
        if isinstance(e, Var):
            t = self.prog.types[e.name]
            if t == "bool":
                return st.bools[self.bool_names.index(e.name)]
            if t == "tag":
                return st.tags[self.tag_names.index(e.name)]
            return st.shape.refs[self.ref_names.index(e.name)]
        if isinstance(e, Field):
            return dict(st.shape.tags)[self._item(st, e.ref)]
        if isinstance(e, Not):
            return not self._value(st, e.arg)
        if isinstance(e, And):
            return self._value(st, e.left) and self._value(st, e.right)
        if isinstance(e, Or):
            return self._value(st, e.left) or self._value(st, e.right)
        if isinstance(e, Cmp):
            if e.kind == "data":
                pos = ec.positions(st.rho)
                a, b = self._data_src(st, e.left), self._data_src(st, e.right)
                if a not in pos or b not in pos:
                    raise _Stuck("comparison of an undefined data value")
                return _OPS[e.op](pos[a], pos[b])
            a, b = self._value(st, e.left), self._value(st, e.right)
            if e.kind == "tag" and (a is None or b is None):
                raise _Stuck("comparison of an undefined tag")
            return _OPS[e.op](a, b)
        raise TypeError(e)

    def _run_step(self, st: AbsState) -> Transition:
        node = self.cfg.nodes[st.loc]
        s = node.stmt
        nxt = st._replace(loc=node.next)
        data: Dict[str, Optional[str]] = {}
        h = None
        if isinstance(s, (If, While)):
            nxt = st._replace(loc=node.yes if self._value(st, s.cond) else node.no)
        elif isinstance(s, Assign):
            typ = self.prog.types[s.target]
            if typ in ("bool", "tag"):
                nxt = self._with(nxt, s.target, self._value(st, s.expr))
            elif typ == "data":
                data[s.target] = self._data_src(st, s.expr)
            elif not (isinstance(s.expr, Var) and s.expr.name == s.target):
                h = Heap.of(st.shape, self.ref_names, self.dvar)
                if isinstance(s.expr, Nil):
                    h.set_ref(s.target, NIL)
                    data[self.dvar(s.target)] = None
                else:
                    h.set_ref(s.target, h.refs[s.expr.name])
                    if h.refs[s.target] != NIL:
                        data[self.dvar(s.target)] = self.dvar(s.expr.name)
                    else:
                        data[self.dvar(s.target)] = None
        elif isinstance(s, NextAssign):
            item = self._item(st, s.ref)
            if self.curr in item[2:].split(","):
                raise _Stuck(f"{s.ref}.next written while it aliases {self.curr}")
            h = Heap.of(st.shape, self.ref_names, self.dvar)
            h.succ[h.refs[s.ref]] = NIL if isinstance(s.expr, Nil) else h.refs[s.expr.name]
        elif isinstance(s, NextRead):
            self._item(st, self.curr)
            h = Heap.of(st.shape, self.ref_names, self.dvar)
            old = h.refs[self.curr]
            h.set_ref(self.curr, PENDING)
            h.succ[old] = PENDING
            nxt = nxt._replace(phase="wait")
        elif isinstance(s, New):
            tag = self._value(st, s.tag)
            if tag is None:
                raise _Stuck("new node with an undefined tag")
            src = self._data_src(st, s.data)
            h = Heap.of(st.shape, self.ref_names, self.dvar)
            target = NIL if isinstance(s.next, Nil) else h.refs[s.next.name]
            h.set_ref(s.target, h.add_class(tag, target))
            data[self.dvar(s.target)] = src
        strings = None
        if h is not None:
            shape, strings = h.normalize(self.nseg)
            nxt = nxt._replace(shape=shape)
        rho = ec.restrict(ec.apply(st.rho, data), self.relevant)
        if nxt.phase == "wait":
            rho = ec.drop(rho, {CURR})
        nxt = nxt._replace(rho=rho)
        return transition(st, None, fm.TRUE, nxt, {k: v for k, v in data.items() if v}, strings)

    # -- the end of the program
    def _class_var(self, item: str) -> str:
        return self.dvar(item[2:].split(",")[0])

    def _prefix(self, st: AbsState) -> Optional[tuple]:
        out = []
        for name, typ in self.outputs:
            if typ == "data":
                out.append(Sym(PARAM, name))
            elif typ == "bool":
                out.append(Sym(TRUE if st.bools[self.bool_names.index(name)] else FALSE, self.carrier))
            else:
                tag = st.tags[self.tag_names.index(name)]
                if tag is None:
                    return None
                out.append(Sym(tag, self.carrier))
        return tuple(out)

    def _exit_step(self, st: AbsState) -> Optional[Transition]:
        if self._prefix(st) is None:
            return None
        item = st.shape.refs[self.ref_names.index(self.result)]
        expr, unread = ((), False) if item == NIL else chain(st.shape, item, self._class_var)
        if expr is None:
            return None  # cyclic result
        outs = {n for n, _ in self.outputs}
        bools = tuple(v if n in outs else False for n, v in zip(self.bool_names, st.bools))
        tags = tuple(v if n in outs else None for n, v in zip(self.tag_names, st.tags))
        dst = AbsState("drain", "append" if unread else "fixed", bools, tags, None, ())
        strings = {x: () for x in self.string_vars}
        strings["w0"] = expr
        return transition(st, None, fm.TRUE, dst, {}, strings)

    def output(self, st: AbsState) -> Optional[tuple]:
        if st.phase == "drain":
            return self._prefix(st) + ("w0",)
        if st.phase in ("start", "wait"):
            return self.eof_output(st)
        return None

    def eof_output(self, st: AbsState) -> Optional[tuple]:
        """Output when the input ends while ``st`` waits for the next symbol."""
        t = self.eof_step(st)
        sub = Subst({v: v for v in self.data_vars}, {x: (x,) for x in self.string_vars}).then(t)
        cur, seen = t.dst, set()
        while cur.phase == "run":
            if cur in seen:
                return None  # the remaining program loops forever
            seen.add(cur)
            ts = self.successors(cur)
            if not ts:
                return None
            sub = sub.then(ts[0])
            cur = ts[0].dst
        if cur.phase != "drain":
            return None
        return sub.expand(self.output(cur))

    def annotate(self, st: AbsState) -> dict:
        doc = {"phase": st.phase, "loc": st.loc,
               "bools": dict(zip(self.bool_names, st.bools)), "tags": dict(zip(self.tag_names, st.tags)),
               "rho": ec.show(st.rho)}
        if st.shape is not None:
            doc["shape"] = st.shape.describe(self.ref_names)
            doc["segments"] = st.shape.segments
        return doc

    def compile(self) -> Sdst:
        init = self.initial()
        states, trans, output = [init], [], {}
        seen = {init}
        i = 0
        while i < len(states):
            st = states[i]
            i += 1
            o = self.output(st)
            if o is not None:
                output[st] = o
            for t in self.successors(st):
                trans.append(t)
                if t.dst not in seen:
                    seen.add(t.dst)
                    states.append(t.dst)
        notes = {st: self.annotate(st) for st in states}
        return make_sdst(self.input_alphabet, self.output_alphabet, states, init, self.data_vars,
                         self.string_vars, output, trans, annotations={"states": notes})


def compile_imp(prog: ImpProgram, alphabet=None) -> Sdst:
    """An SDST computing the same transduction as ``prog`` on encoded inputs."""
    return ImpCompiler(prog, alphabet).compile()
