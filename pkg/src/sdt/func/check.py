"""Syntactic check of the single-pass restrictions on functional programs.

Clause names used in reports: ``one-list``, ``type``, ``recursion``,
``recursion (i)`` .. ``recursion (iv)``, ``body shape`` and ``initValues``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, NamedTuple, Tuple

from .ast import (SCALARS, And, Append, BoolLit, Call, Cmp, Cons, FuncProgram, Head, If, IsNil, Let, NilLit,
                  Not, Or, Proj, Tail, TagLit, Tuple_, Undef, Var)


class Violation(NamedTuple):
    clause: str
    message: str
    term: object = None


@dataclass
class RestrictionReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, clause, message, term=None):
        self.violations.append(Violation(clause, message, term))

    def __str__(self):
        return "\n".join(f"[{v.clause}] {v.message}" for v in self.violations) or "ok"


def children(e) -> Iterator[object]:
    if isinstance(e, (Cons,)):
        yield from (e.head, e.tail)
    elif isinstance(e, (Append, And, Or)):
        yield from (e.left, e.right)
    elif isinstance(e, Cmp):
        yield from (e.left, e.right)
    elif isinstance(e, (IsNil, Head, Tail, Proj, Not)):
        yield e.arg
    elif isinstance(e, Tuple_):
        yield from e.items
    elif isinstance(e, If):
        yield from (e.cond, e.then, e.orelse)
    elif isinstance(e, Let):
        yield from (e.bound, e.body)
    elif isinstance(e, Call):
        yield from e.args


def subterms(e) -> Iterator[object]:
    yield e
    for c in children(e):
        yield from subterms(c)


def occurrences(e, name: str) -> int:
    return sum(1 for s in subterms(e) if isinstance(s, Var) and s.name == name)


def has_call(e) -> bool:
    return any(isinstance(s, Call) for s in subterms(e))


class Leaf(NamedTuple):
    """A tail position: ``let names = call in body`` (call may be None for a plain result)."""

    call: object
    names: Tuple[str, ...]
    body: object
    term: object


def tail_leaves(e, nresults: int) -> Iterator[object]:
    """Yields Leaf for every tail position of ``e``, or raw terms that break the shape.

    A bare call stands for ``let r = call in r``, and for a list-only result
    a call inside cons/append stands for ``let r = call in <context with r>``.
    """
    if isinstance(e, If):
        yield from tail_leaves(e.then, nresults)
        yield from tail_leaves(e.orelse, nresults)
    elif isinstance(e, Let) and not isinstance(e.bound, Call):
        yield from tail_leaves(e.body, nresults)
    elif isinstance(e, Let):
        yield Leaf(e.bound, e.names, e.body, e)
    elif isinstance(e, Call):
        names = tuple(f"⋆r{i}" for i in range(nresults))
        body = Var(names[0]) if nresults == 1 else Tuple_(tuple(Var(n) for n in names))
        yield Leaf(e, names, body, e)
    elif has_call(e) and nresults == 1 and isinstance(e, (Cons, Append)):
        calls = [s for s in subterms(e) if isinstance(s, Call)]
        yield Leaf(calls[0], ("⋆r0",), _replace(e, calls[0], Var("⋆r0")), e) if len(calls) == 1 else e
    else:
        yield Leaf(None, (), e, e)


def _replace(e, old, new):
    if e is old:
        return new
    if isinstance(e, Cons):
        return Cons(_replace(e.head, old, new), _replace(e.tail, old, new), e.pos)
    if isinstance(e, Append):
        return Append(_replace(e.left, old, new), _replace(e.right, old, new), e.pos)
    return e


def check_single_pass(p: FuncProgram) -> RestrictionReport:
    rep = RestrictionReport()
    l = p.list_param
    lists = [n for n, t in p.params[1:] if t == "list"]
    # type restrictions
    if not p.inputs or p.inputs[0][1] != "list":
        rep.add("type", "the wrapper's first argument must be a list")
    for n, t in p.inputs[1:]:
        if t not in SCALARS:
            rep.add("type", f"wrapper argument {n!r} must be bool, tag or data, not {t}")
    if p.params[0][1] != "list":
        rep.add("type", f"the first argument of {p.name} must be a list")
    if p.results[0] != "list":
        rep.add("type", f"{p.name} must return a list first")
    for t in p.results[1:]:
        if t not in SCALARS:
            rep.add("type", f"extra results must be bool, tag or data, not {t}")
    # the initial call
    k = len(p.inputs)
    for i, arg in enumerate(p.init):
        if i < k:
            if not (isinstance(arg, Var) and arg.name == p.inputs[i][0]):
                rep.add("type", f"argument {i + 1} of the initial call must be {p.inputs[i][0]!r}", arg)
        elif p.params[i][1] == "list" and not isinstance(arg, NilLit):
            rep.add("initValues", f"initial value of list argument {p.params[i][0]!r} must be nil", arg)
        elif not isinstance(arg, (Var, BoolLit, TagLit, Undef, NilLit)):
            rep.add("initValues", f"initial value of {p.params[i][0]!r} must be a constant or an input", arg)
    # one list
    for s in subterms(p.body):
        if isinstance(s, (IsNil, Head, Tail)) and not (isinstance(s.arg, Var) and s.arg.name == l):
            rep.add("one-list", f"isnil/head/tail may only be applied to {l!r}", s)
    allowed = set()
    for s in subterms(p.body):
        if isinstance(s, (IsNil, Head, Tail)):
            allowed.add(id(s.arg))
    for s in subterms(p.body):
        if isinstance(s, Var) and s.name == l and id(s) not in allowed:
            rep.add("one-list", f"{l!r} may only be used through isnil, head and tail", s)
    for s in subterms(p.body):
        if isinstance(s, Tail):
            ok = any(isinstance(c, Call) and c.args and c.args[0] is s for c in subterms(p.body))
            if not ok:
                rep.add("one-list", f"(tail {l}) may only be the first argument of a recursive call", s)
    # body shape and recursion
    for s in subterms(p.body):
        if isinstance(s, Let) and not isinstance(s.bound, Call) and has_call(s.bound):
            rep.add("recursion", "a recursive call must be the bound term of a let in tail position", s)
    for leaf in tail_leaves(p.body, len(p.results)):
        if not isinstance(leaf, Leaf):
            rep.add("recursion", "at most one recursive call per result", leaf)
            continue
        _check_leaf(p, leaf, lists, rep)
    _check_non_tail(p, rep)
    return rep


def _check_non_tail(p: FuncProgram, rep: RestrictionReport):
    """Calls, undef and list-valued lets are only allowed where tail_leaves puts them."""
    ok_calls, ok_undef = set(), set()
    for leaf in tail_leaves(p.body, len(p.results)):
        if isinstance(leaf, Leaf):
            if leaf.call is not None:
                ok_calls.add(id(leaf.call))
            if isinstance(leaf.body, Undef):
                ok_undef.add(id(leaf.body))
    for s in subterms(p.body):
        if isinstance(s, Call) and id(s) not in ok_calls:
            rep.add("recursion", "a recursive call must be the last expression the caller evaluates", s)
        if isinstance(s, Let) and not isinstance(s.bound, Call) and _list_valued(p, s.bound):
            rep.add("body shape", "let may only bind scalars or the results of a recursive call", s)
        if isinstance(s, Undef) and id(s) not in ok_undef:
            rep.add("body shape", "undef may only be a whole result or an initial value", s)


def _check_leaf(p: FuncProgram, leaf: Leaf, lists, rep: RestrictionReport):
    l = p.list_param
    if leaf.call is None:
        for x in lists:
            if occurrences(leaf.body, x) > 1:
                rep.add("recursion (i)", f"list {x!r} is used more than once in a result", leaf.term)
        return
    call = leaf.call
    if not (call.args and isinstance(call.args[0], Tail) and isinstance(call.args[0].arg, Var)
            and call.args[0].arg.name == l):
        rep.add("recursion", f"the first argument of a recursive call must be (tail {l})", call)
    names = leaf.names
    kinds = dict(zip(names, p.results))
    for s in subterms(leaf.body):
        if isinstance(s, (Cmp, If)):
            used = [n for n in names if occurrences(s.cond if isinstance(s, If) else s, n)]
            for n in used:
                clause = "recursion (ii)" if kinds[n] == "bool" else "recursion (iii)"
                if kinds[n] != "bool" or isinstance(s, If):
                    rep.add(clause, f"the call's result {n!r} is examined by the caller", s)
    for x in lists:
        n = sum(occurrences(a, x) for a in call.args[1:]) + occurrences(leaf.body, x)
        if n > 1:
            rep.add("recursion (i)", f"list {x!r} appears in more than one argument or result", leaf.term)
    if len(p.results) == 1:
        body_items = (leaf.body,)
        if len(names) != 1:
            rep.add("recursion", "the call returns a single list", leaf.term)
            return
    else:
        if not (isinstance(leaf.body, Tuple_) and len(leaf.body.items) == len(p.results)):
            rep.add("recursion", "the caller must return a tuple built from the call's results", leaf.term)
            return
        body_items = leaf.body.items
    for i, (t, typ) in enumerate(zip(body_items, p.results)):
        if i == 0:
            others = [n for n in names[1:] if occurrences(t, n)]
            if others:
                rep.add("recursion (iv)", f"the result list may only use {names[0]!r} from the call", t)
            if occurrences(t, names[0]) > 1:
                rep.add("recursion (iv)", f"{names[0]!r} is used more than once", t)
        elif typ == "bool":
            others = [n for j, n in enumerate(names) if j != i and occurrences(t, n)]
            if others:
                rep.add("recursion (ii)", f"boolean result {i} may only use {names[i]!r} from the call", t)
        elif not (isinstance(t, Var) and t.name == names[i]):
            rep.add("recursion (iii)", f"{typ} result {i} must be passed through unchanged as {names[i]!r}", t)
    for n in names:
        for a in call.args:
            if occurrences(a, n):
                rep.add("recursion", f"{n!r} is not available in the call's own arguments", a)


def _list_valued(p: FuncProgram, e) -> bool:
    if isinstance(e, (Cons, Append, NilLit, Tail)):
        return True
    if isinstance(e, Var):
        return p.param_type(e.name) == "list"
    if isinstance(e, If):
        return _list_valued(p, e.then) or _list_valued(p, e.orelse)
    return False
