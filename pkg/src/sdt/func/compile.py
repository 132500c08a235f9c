"""Compiling single-pass functional programs into streaming transducers.

One recursive call consumes one input symbol.  Boolean and tag arguments
live in the control state, data arguments in data variables and list
arguments in string variables.  Caller contexts wrapped around a recursive
call (``cons (head l) r`` and the like) are accumulated in ``ctxL`` (the
part before the callee's list) and ``ctxR`` (the part after, only
allocated when some context has one).  A boolean result computed from the
callee's boolean is tracked as the composed map from the base-case value
to the final one; a context that drops the callee's list *closes* the
output list.  Data comparisons are decided by the ec-order kept in the
state, exactly as in the imperative compiler.
"""
from __future__ import annotations

from typing import Dict, List, NamedTuple, Optional, Tuple

from .. import ecorder as ec
from .. import formula as fm
from ..encoding import FALSE, PARAM, TRUE, param_tags
from ..machine import CURR, Sdst, Sym, Transition, make_sdst, transition
from .ast import (And, Append, BoolLit, Call, Cmp, Cons, FuncProgram, Head, If, IsNil, Let, NilLit, Not, Or,
                  Proj, Tail, TagLit, Tuple_, Undef, Var)
from .check import Leaf, check_single_pass, subterms, tail_leaves
from .interp import _OPS

CARRIER = "_carrier"
CTX_L, CTX_R = "ctxL", "ctxR"
_LIST = object()
_HOLE = "⋆hole"


class FuncCompileError(ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class _Stuck(Exception):
    pass


class FState(NamedTuple):
    phase: str                  # "param", "start", "rec" or "done"
    loc: int
    bools: Tuple[bool, ...]
    tags: Tuple[Optional[str], ...]
    maps: Tuple[Tuple[bool, bool], ...]   # per boolean result: base value -> final value
    closed: bool
    rho: tuple


def default_alphabet(p: FuncProgram, extra=()) -> tuple:
    return tuple(sorted({"a"} | set(p.tags) | set(extra)))


class FuncCompiler:
    def __init__(self, p: FuncProgram, alphabet=None):
        rep = check_single_pass(p)
        if not rep.ok:
            raise FuncCompileError(rep)
        self.p = p
        self.alphabet = tuple(alphabet) if alphabet else default_alphabet(p)
        self.l = p.list_param
        self.bool_names = p.of("bool")
        self.tag_names = p.of("tag")
        self.data_names = p.of("data")
        self.list_names = [n for n, t in p.params[1:] if t == "list"]
        for n in self.data_names + self.list_names:
            if n in (CURR, CARRIER, CTX_L, CTX_R):
                raise ValueError(f"parameter name {n!r} is reserved")
        self.inputs = list(p.input_params)
        self.outputs = list(p.output_params)
        self.bool_results = [i for i, t in enumerate(p.results) if t == "bool" and i > 0]
        self.carrier = self._choose_carrier()
        dvars = [CURR] + self.data_names + ([CARRIER] if self.carrier == CARRIER else [])
        self.data_vars = tuple(dvars)
        self.string_vars = tuple(self.list_names) + (CTX_L, CTX_R)
        self.relevant = self._relevant()
        self.input_alphabet = tuple(dict.fromkeys(list(self.alphabet) + param_tags(self.inputs, self.alphabet)))
        out = list(self.alphabet)
        for _, typ in self.outputs:
            out += [PARAM] if typ == "data" else [TRUE, FALSE] if typ == "bool" else []
        self.output_alphabet = tuple(dict.fromkeys(out))
        self.leaves = [lf for lf in tail_leaves(p.body, len(p.results))]

    # -- static information
    def _choose_carrier(self) -> Optional[str]:
        if all(t == "data" for _, t in self.outputs):
            return None
        if self.inputs and self.inputs[0][1] == "data":
            src = self.inputs[0][0]
            for i, arg in enumerate(self.p.init):
                q = self.p.params[i][0]
                if isinstance(arg, Var) and arg.name == src and self.p.params[i][1] == "data" \
                        and self._passed_unchanged(i, q):
                    return q
        return CARRIER

    def _passed_unchanged(self, i: int, q: str) -> bool:
        for s in subterms(self.p.body):
            if isinstance(s, Call) and not (isinstance(s.args[i], Var) and s.args[i].name == q):
                return False
        return True

    def _data_src(self, e) -> Optional[str]:
        if isinstance(e, Var) and self.p.param_type(e.name) == "data":
            return e.name
        if isinstance(e, Proj) and e.field == "data":
            return CURR
        return None

    def _relevant(self) -> frozenset:
        rel, flows = set(), []
        for s in subterms(self.p.body):
            if isinstance(s, Cmp) and s.kind == "data":
                rel.update(x for x in (self._data_src(s.left), self._data_src(s.right)) if x)
            if isinstance(s, Call):
                for (name, typ), a in zip(self.p.params, s.args):
                    src = self._data_src(a)
                    if typ == "data" and src:
                        flows.append((name, src))
        changed = True
        while changed:
            changed = False
            for t, s in flows:
                if t in rel and s not in rel:
                    rel.add(s)
                    changed = True
        return frozenset(rel)

    # -- symbolic evaluation
    def _ev(self, e, env, cx):
        """Value of ``e``; ``cx`` is (tag of the current symbol or None at the end, positions)."""
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, TagLit):
            return e.tag
        if isinstance(e, NilLit):
            return ()
        if isinstance(e, Cons):
            tag, var = self._ev(e.head, env, cx)
            if tag is None or var is None:
                raise _Stuck()
            return (Sym(tag, var),) + self._ev(e.tail, env, cx)
        if isinstance(e, Append):
            return self._ev(e.left, env, cx) + self._ev(e.right, env, cx)
        if isinstance(e, IsNil):
            return cx[0] is None
        if isinstance(e, (Head, Tail)):
            if cx[0] is None:
                raise _Stuck()
            return (cx[0], CURR) if isinstance(e, Head) else _LIST
        if isinstance(e, Proj):
            pair = self._ev(e.arg, env, cx)
            return pair[0] if e.field == "tag" else pair[1]
        if isinstance(e, Tuple_):
            return tuple(self._ev(x, env, cx) for x in e.items)
        if isinstance(e, Cmp):
            a, b = self._ev(e.left, env, cx), self._ev(e.right, env, cx)
            if e.kind == "data":
                a, b = cx[1].get(a), cx[1].get(b)
            if a is None or b is None:
                raise _Stuck()
            return _OPS[e.op](a, b)
        if isinstance(e, Not):
            return not self._ev(e.arg, env, cx)
        if isinstance(e, And):
            return self._ev(e.left, env, cx) and self._ev(e.right, env, cx)
        if isinstance(e, Or):
            return self._ev(e.left, env, cx) or self._ev(e.right, env, cx)
        if isinstance(e, If):
            return self._ev(e.then if self._ev(e.cond, env, cx) else e.orelse, env, cx)
        if isinstance(e, Let):
            v = self._ev(e.bound, env, cx)
            inner = dict(env)
            inner.update(zip(e.names, v) if e.pattern else [(e.names[0], v)])
            return self._ev(e.body, inner, cx)
        raise _Stuck()

    def _env(self, st: FState) -> dict:
        env = {self.l: _LIST}
        env.update(zip(self.bool_names, st.bools))
        env.update(zip(self.tag_names, st.tags))
        env.update((d, d) for d in self.data_names)
        env.update((x, (x,)) for x in self.list_names)
        return env

    def _tail(self, st: FState, cx):
        """("value", v, env) or ("call", leaf, env) for the body at the given symbol."""
        env, e = self._env(st), self.p.body
        while True:
            if isinstance(e, If):
                e = e.then if self._ev(e.cond, env, cx) else e.orelse
            elif isinstance(e, Let) and not isinstance(e.bound, Call):
                v = self._ev(e.bound, env, cx)
                env = dict(env)
                env.update(zip(e.names, v) if e.pattern else [(e.names[0], v)])
                e = e.body
            else:
                break
        if isinstance(e, Undef):
            raise _Stuck()
        leaf = next(iter(tail_leaves(e, len(self.p.results))))
        if leaf.call is None:
            return "value", self._ev(e, env, cx), env
        return "call", leaf, env

    # -- building outputs
    def _result(self, st: FState, value, carrier: Optional[str]) -> Optional[tuple]:
        """The encoded output expression for a base-case ``value``."""
        if len(self.p.results) == 1:
            items, scalars = value, ()
        else:
            items, scalars = value[0], value[1:]
        prefix = []
        for (name, typ), v, i in zip(self.outputs, scalars, range(1, len(self.p.results))):
            if typ == "bool":
                v = st.maps[self.bool_results.index(i)][v] if v is not None else None
            if v is None:
                return None
            if typ == "data":
                prefix.append(Sym(PARAM, v))
            elif typ == "bool":
                prefix.append(Sym(TRUE if v else FALSE, carrier))
            else:
                prefix.append(Sym(v, carrier))
        body = (CTX_L, CTX_R) if st.closed else (CTX_L,) + tuple(items) + (CTX_R,)
        return tuple(prefix) + body

    def _carrier_expr(self, st: FState) -> Optional[str]:
        return CURR if st.phase == "start" else self.carrier

    def output(self, st: FState) -> Optional[tuple]:
        if st.phase == "done":
            return (CTX_L,)
        if st.phase == "param":
            return None
        try:
            kind, value, _ = self._tail(st, (None, ec.positions(st.rho)))
        except _Stuck:
            return None
        if kind != "value":
            return None
        return self._result(st, value, self._carrier_expr(st))

    # -- transitions
    def initial(self) -> FState:
        bools, tags = [], []
        for (name, typ), arg in zip(self.p.params, self.p.init):
            if typ == "bool":
                bools.append(arg.value if isinstance(arg, BoolLit) else False)
            elif typ == "tag":
                tags.append(arg.tag if isinstance(arg, TagLit) else None)
        maps = tuple((False, True) for _ in self.bool_results)
        phase = "param" if self.inputs else "start" if self.carrier == CARRIER else "rec"
        return FState(phase, 0, tuple(bools), tuple(tags), maps, False, ec.EMPTY)

    def _set(self, st: FState, name: str, value) -> FState:
        if name in self.bool_names:
            b = list(st.bools)
            b[self.bool_names.index(name)] = value
            return st._replace(bools=tuple(b))
        t = list(st.tags)
        t[self.tag_names.index(name)] = value
        return st._replace(tags=tuple(t))

    def _placements(self, st: FState):
        if CURR in self.relevant:
            return ec.ec_extend(st.rho, CURR)
        return [st.rho]

    def _group(self, st: FState, tag: str, outcomes, total: int) -> List[Transition]:
        """Merge per-placement outcomes (pi, dst, data, strings) into guarded transitions."""
        groups: Dict[tuple, list] = {}
        for pi, dst, data, strings in outcomes:
            rho = ec.drop(ec.restrict(ec.apply(pi, data), self.relevant), {CURR})
            key = (dst._replace(rho=rho), tuple(sorted(data.items())), tuple(sorted(strings.items())))
            groups.setdefault(key, []).append(pi)
        out = []
        for (dst, data, strings), pis in groups.items():
            guard = fm.TRUE if len(pis) == total else fm.disj(*(ec.sign_guard(p) for p in pis))
            out.append(transition(st, tag, guard, dst, dict(data), dict(strings)))
        return out

    def _param_step(self, st: FState) -> List[Transition]:
        name, typ = self.inputs[st.loc]
        nxt = st._replace(phase="param", loc=st.loc + 1) if st.loc + 1 < len(self.inputs) \
            else st._replace(phase="rec", loc=0)
        targets = [q for (q, _), a in zip(self.p.params, self.p.init) if isinstance(a, Var) and a.name == name]
        data = {CARRIER: CURR} if st.loc == 0 and self.carrier == CARRIER else {}
        if typ == "data":
            data.update((q, CURR) for q in targets)
            choices = [(PARAM, nxt)]
        elif typ == "bool":
            choices = [(TRUE, True), (FALSE, False)]
        else:
            choices = [(t, t) for t in self.alphabet]
        out = []
        for tag, v in choices:
            dst = nxt
            if typ != "data":
                for q in targets:
                    dst = self._set(dst, q, v)
            pis = self._placements(st)
            out += self._group(st, tag, [(pi, dst, data, {}) for pi in pis], len(pis))
        return out

    def _rec_step(self, st: FState, tag: str) -> List[Transition]:
        pis = self._placements(st)
        outcomes = []
        for pi in pis:
            try:
                r = self._consume(st, tag, pi)
            except _Stuck:
                continue
            if r is not None:
                outcomes.append((pi,) + r)
        return self._group(st, tag, outcomes, len(pis))

    def _consume(self, st: FState, tag: str, pi):
        """(dst, data, strings) for reading ``tag`` in placement ``pi``; None when undefined."""
        cx = (tag, ec.positions(pi))
        kind, leaf, env = self._tail(st, cx)
        data = {CARRIER: CURR} if st.phase == "start" else {}
        if kind == "value":
            expr = self._result(st, leaf, self._carrier_expr(st))
            if expr is None:
                return None
            strings = {x: () for x in self.list_names}
            strings[CTX_L] = expr
            strings[CTX_R] = ()
            return FState("done", 0, (), (), (), False, ec.EMPTY), {}, strings
        dst = st._replace(phase="rec")
        strings = {}
        for (name, typ), a in zip(self.p.params[1:], leaf.call.args[1:]):
            v = self._ev(a, env, cx)
            if typ in ("bool", "tag"):
                dst = self._set(dst, name, v)
            elif typ == "data":
                if v is None:
                    raise _Stuck()
                if v != name:
                    data[name] = v
            else:
                strings[name] = v
        names = leaf.names
        inner = dict(env)
        inner[names[0]] = (_HOLE,)
        if len(self.p.results) == 1:
            lst = self._ev(leaf.body, inner, cx)
        else:
            lst = self._ev(leaf.body.items[0], inner, cx)
            maps = list(st.maps)
            for k, i in enumerate(self.bool_results):
                g = []
                for b in (False, True):
                    try:
                        v = self._ev(leaf.body.items[i], {**inner, names[i]: b}, cx)
                    except _Stuck:
                        v = None
                    g.append(st.maps[k][v] if v is not None else None)
                maps[k] = tuple(g)
            dst = dst._replace(maps=tuple(maps))
        if not st.closed:
            if _HOLE in lst:
                i = lst.index(_HOLE)
                strings[CTX_L] = (CTX_L,) + lst[:i]
                strings[CTX_R] = lst[i + 1:] + (CTX_R,)
            else:
                strings[CTX_L] = (CTX_L,) + lst
                dst = dst._replace(closed=True)
        return dst, data, strings

    def successors(self, st: FState) -> List[Transition]:
        if st.phase == "param":
            return self._param_step(st)
        if st.phase == "done":
            return [transition(st, t, fm.TRUE, st) for t in self.alphabet]
        out = []
        for tag in self.alphabet:
            out += self._rec_step(st, tag)
        return out

    def annotate(self, st: FState) -> dict:
        return {"phase": st.phase, "loc": st.loc, "bools": dict(zip(self.bool_names, st.bools)),
                "tags": dict(zip(self.tag_names, st.tags)),
                "maps": {f"r{i}": list(m) for i, m in zip(self.bool_results, st.maps)},
                "closed": st.closed, "rho": ec.show(st.rho)}

    def compile(self) -> Sdst:
        init = self.initial()
        states, trans, output, seen = [init], [], {}, {init}
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
        strings = self.string_vars
        if not any(t.smap.get(CTX_R, (CTX_R,)) not in ((), (CTX_R,)) for t in trans):
            strings = tuple(x for x in strings if x != CTX_R)
            trans = [_without_ctx_r(t) for t in trans]
            output = {q: tuple(x for x in o if x != CTX_R) for q, o in output.items()}
        notes = {st: self.annotate(st) for st in states}
        return make_sdst(self.input_alphabet, self.output_alphabet, states, init, self.data_vars,
                         strings, output, trans, annotations={"states": notes})


def _without_ctx_r(t: Transition) -> Transition:
    strings = {x: tuple(i for i in e if i != CTX_R) for x, e in t.smap.items() if x != CTX_R}
    return transition(t.src, t.tag, t.guard, t.dst, t.dmap, strings)


def compile_func(p: FuncProgram, alphabet=None) -> Sdst:
    """An SDST computing the same transduction as ``p`` on encoded inputs."""
    return FuncCompiler(p, alphabet).compile()
