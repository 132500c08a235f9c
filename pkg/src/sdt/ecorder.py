"""Ordered partitions of defined data variables (ec-orders).

An ec-order is a tuple of disjoint, nonempty frozensets listed from the
smallest value class to the largest.  Variables not mentioned are undefined.
It records every equality and strict-order fact between defined variables,
so a guard over defined variables is either implied or refuted by it.
"""
from __future__ import annotations

from itertools import product
from typing import Iterable, Iterator, Mapping, Optional, Tuple

from . import formula as fm

EcOrder = Tuple[frozenset, ...]

EMPTY: EcOrder = ()


def make(*classes: Iterable[str]) -> EcOrder:
    return tuple(frozenset(c) for c in classes if c)


def defined(rho: EcOrder) -> frozenset:
    return frozenset().union(*rho) if rho else frozenset()


def index(rho: EcOrder, v: str) -> Optional[int]:
    for i, c in enumerate(rho):
        if v in c:
            return i
    return None


def positions(rho: EcOrder) -> dict:
    return {v: i for i, c in enumerate(rho) for v in c}


def drop(rho: EcOrder, vs) -> EcOrder:
    vs = frozenset(vs)
    out = []
    for c in rho:
        c2 = c - vs
        if c2:
            out.append(c2)
    return tuple(out)


def restrict(rho: EcOrder, keep) -> EcOrder:
    keep = frozenset(keep)
    out = []
    for c in rho:
        c2 = c & keep
        if c2:
            out.append(c2)
    return tuple(out)


def ec_extend(cur: EcOrder, new: str) -> list:
    """All 2k+1 ways of placing an undefined variable ``new`` relative to k classes."""
    if new in defined(cur):
        raise ValueError(f"{new} is already defined")
    k = len(cur)
    out = []
    for i in range(k + 1):
        out.append(cur[:i] + (frozenset((new,)),) + cur[i:])
        if i < k:
            out.append(cur[:i] + (cur[i] | {new},) + cur[i + 1:])
    return out


def evaluate(rho: EcOrder, guard, curr: str = "curr", rename=None) -> Optional[bool]:
    """Truth value of ``guard`` under ``rho``; None when it mentions an undefined variable.

    ``rename`` maps guard variable names to ec-order variable names.
    """
    pos = positions(rho)
    c = pos.get(curr)
    if c is None:
        return None if fm.variables(guard) else fm.evaluate(guard, lambda v: None)

    def cmp(v):
        name = rename(v) if rename else v
        i = pos.get(name)
        if i is None:
            return None
        return (i > c) - (i < c)

    return fm.evaluate(guard, cmp)


def apply(rho: EcOrder, assign: Mapping[str, Optional[str]]) -> EcOrder:
    """Execute a parallel data assignment ``target := source``.

    A target whose source is undefined (or None) becomes undefined.
    """
    pos = positions(rho)
    buckets = [set() for _ in rho]
    for v, i in pos.items():
        if v not in assign:
            buckets[i].add(v)
    for t, s in assign.items():
        i = pos.get(s) if s is not None else None
        if i is not None:
            buckets[i].add(t)
    return tuple(frozenset(b) for b in buckets if b)


def ec_step(cur: EcOrder, guard, assign: Mapping[str, Optional[str]], curr: str = "curr") -> Optional[EcOrder]:
    """Successor ec-order when ``cur`` implies ``guard``; None otherwise."""
    if evaluate(cur, guard, curr) is not True:
        return None
    return apply(cur, assign)


def from_values(values: Mapping[str, object]) -> EcOrder:
    """The ec-order realised by a concrete valuation."""
    groups = {}
    for v, x in values.items():
        groups.setdefault(x, set()).add(v)
    return tuple(frozenset(groups[x]) for x in sorted(groups))


def all_orders(vs) -> Iterator[EcOrder]:
    """Every ec-order in which exactly the variables ``vs`` are defined."""
    vs = sorted(vs)
    if not vs:
        yield EMPTY
        return
    first, rest = vs[0], vs[1:]
    for rho in all_orders(rest):
        yield from ec_extend(rho, first)


def placement_guard(rho: EcOrder, curr: str = "curr"):
    """The guard describing exactly where ``curr`` sits in ``rho``."""
    i = index(rho, curr)
    if i is None:
        raise ValueError("curr is not placed")
    parts = []
    if len(rho[i]) > 1:
        rep = min(rho[i] - {curr})
        parts.append(fm.eq(rep))
    else:
        if i > 0:
            parts.append(fm.lt(min(rho[i - 1])))
        if i + 1 < len(rho):
            parts.append(fm.gt(min(rho[i + 1])))
    return fm.conj(*parts)


def sign_guard(rho: EcOrder, curr: str = "curr"):
    """Like placement_guard, but states curr's relation to every defined variable.

    Guards built this way for distinct placements are exclusive without
    knowing the order among the other variables.
    """
    pos = positions(rho)
    c = pos[curr]
    parts = []
    for v in sorted(pos):
        if v == curr:
            continue
        i = pos[v]
        parts.append(fm.lt(v) if i < c else fm.gt(v) if i > c else fm.eq(v))
    return fm.conj(*parts)


def satisfiable(f, extra_vars=()) -> Optional[EcOrder]:
    """A witnessing ec-order (all variables defined) for a guard, or None.

    Atoms only compare variables against curr, so it suffices to choose for
    each variable whether it lies below, at, or above curr.
    """
    vs = sorted((fm.variables(f) | frozenset(extra_vars)) - {"curr"})
    for signs in product((-1, 0, 1), repeat=len(vs)):
        sign = dict(zip(vs, signs))
        sign["curr"] = 0
        if fm.evaluate(f, sign.__getitem__):
            below = {v for v, s in sign.items() if s < 0}
            at = {v for v, s in sign.items() if s == 0}
            above = {v for v, s in sign.items() if s > 0}
            return make(below, at, above)
    return None


def show(rho: EcOrder) -> str:
    if not rho:
        return "∅"
    return " < ".join("{" + ",".join(sorted(map(str, c))) + "}" for c in rho)
