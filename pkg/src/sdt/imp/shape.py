"""Abstract heap shapes used by the compiler.

A shape records, for every ref variable, which *class* it points into (the
refs that alias one node), plus the successor of every node that is still
reachable from some ref.  Nodes no ref points at are merged into maximal
*segments*; the contents of segment ``i`` live in string variable ``w<i>``.
Targets are item names: ``c:<refs>`` for a class, ``w<i>`` for a segment, or
one of NIL / UNREAD (the unread rest of the input) / PENDING (the node the
next input symbol will create).
"""
from __future__ import annotations

from typing import Dict, List, NamedTuple, Optional, Tuple

from ..machine import Sym

NIL = "nil"
UNREAD = "unread"
PENDING = "pending"
SPECIAL = (NIL, UNREAD, PENDING)


class Shape(NamedTuple):
    refs: Tuple[object, ...]           # per ref: class item, NIL or PENDING
    tags: Tuple[Tuple[str, str], ...]  # (class item, tag)
    succ: Tuple[Tuple[str, str], ...]  # (item, target)

    @property
    def segments(self) -> int:
        return sum(1 for item, _ in self.succ if item.startswith("w"))

    def describe(self, ref_names) -> dict:
        return {"refs": dict(zip(ref_names, self.refs)), "tags": dict(self.tags),
                "next": dict(self.succ)}


class TooManySegments(RuntimeError):
    pass


def class_item(members) -> str:
    return "c:" + ",".join(members)


class Heap:
    """Mutable working copy of a shape during one abstract step.

    Nodes carry stable integer ids.  A node with members is a class; a node
    without members is a segment whose content is the expression ``expr``
    over the string and data variables at the start of the step.
    """

    def __init__(self, ref_names, dvar):
        self.ref_names = list(ref_names)
        self.dvar = dvar
        self.members: Dict[int, List[str]] = {}
        self.tag: Dict[int, str] = {}
        self.expr: Dict[int, tuple] = {}
        self.succ: Dict[int, object] = {}
        self.refs: Dict[str, object] = {}
        self.fresh = 0

    @classmethod
    def of(cls, shape: Shape, ref_names, dvar) -> "Heap":
        h = cls(ref_names, dvar)
        ids: Dict[str, int] = {}

        def node(item):
            if item in SPECIAL:
                return item
            if item not in ids:
                ids[item] = h.new_node()
                if item.startswith("w"):
                    h.expr[ids[item]] = (item,)
            return ids[item]

        for r, item in zip(ref_names, shape.refs):
            n = node(item)
            h.refs[r] = n
            if isinstance(n, int):
                h.members[n].append(r)
        for item, tag in shape.tags:
            h.tag[node(item)] = tag
        for item, target in shape.succ:
            h.succ[node(item)] = node(target)
        return h

    def new_node(self) -> int:
        self.fresh += 1
        self.members[self.fresh] = []
        return self.fresh

    def node_of(self, r):
        return self.refs[r]

    def set_ref(self, r: str, target) -> None:
        """Point ``r`` at node ``target`` (an id, NIL or PENDING)."""
        old = self.refs[r]
        if old == target:
            return
        if isinstance(old, int):
            self.members[old].remove(r)
            if not self.members[old]:
                # the node survives anonymously: its symbol is fixed now
                self.expr[old] = (Sym(self.tag.pop(old), self.dvar(r)),)
        self.refs[r] = target
        if isinstance(target, int):
            self.members[target].append(r)

    def add_class(self, tag: str, succ) -> int:
        n = self.new_node()
        self.tag[n] = tag
        self.succ[n] = succ
        return n

    def replace_target(self, old, new) -> None:
        for n, t in self.succ.items():
            if t == old:
                self.succ[n] = new

    def normalize(self, max_segments: int):
        """Canonical shape plus the string assignment realising it."""
        order = {r: i for i, r in enumerate(self.ref_names)}
        classes = sorted((n for n, m in self.members.items() if m),
                         key=lambda n: min(order[r] for r in self.members[n]))
        reach, stack = set(), list(classes)
        while stack:
            n = stack.pop()
            if n in reach:
                continue
            reach.add(n)
            t = self.succ.get(n, NIL)
            if isinstance(t, int):
                stack.append(t)
        preds: Dict[int, List[int]] = {n: [] for n in reach}
        for n in reach:
            t = self.succ.get(n, NIL)
            if isinstance(t, int):
                preds[t].append(n)
        expr = {n: self.expr[n] for n in reach if not self.members[n]}
        succ = {n: self.succ.get(n, NIL) for n in reach}
        merged = True
        while merged:
            merged = False
            for s in list(expr):
                p = preds[s]
                if len(p) == 1 and p[0] in expr and p[0] != s:
                    p = p[0]
                    expr[p] = expr[p] + expr.pop(s)
                    succ[p] = succ.pop(s)
                    if isinstance(succ[p], int):
                        preds[succ[p]] = [p if x == s else x for x in preds[succ[p]]]
                    del preds[s]
                    merged = True
                    break
        names: Dict[int, str] = {}
        for n in classes:
            names[n] = class_item(sorted(self.members[n], key=order.get))
        strings: Dict[str, tuple] = {}
        for c in classes:
            n = succ[c]
            while isinstance(n, int) and n not in names:
                name = f"w{len(strings)}"
                if len(strings) >= max_segments:
                    raise TooManySegments(f"more than {max_segments} segments")
                names[n] = name
                strings[name] = expr[n]
                n = succ[n]

        def rename(t):
            return names[t] if isinstance(t, int) else t

        refs = tuple(rename(self.refs[r]) for r in self.ref_names)
        tags = tuple(sorted((names[n], self.tag[n]) for n in classes))
        out_succ = tuple(sorted((names[n], rename(t)) for n, t in succ.items()))
        for i in range(len(strings), max_segments):
            strings[f"w{i}"] = ()
        return Shape(refs, tags, out_succ), strings


def chain(shape: Shape, start, dvar_of_class) -> Tuple[Optional[tuple], bool]:
    """Expression for the list from ``start``: (expr or None if cyclic, ends in UNREAD)."""
    succ = dict(shape.succ)
    tags = dict(shape.tags)
    out, seen, item = [], set(), start
    while item not in SPECIAL:
        if item in seen:
            return None, False
        seen.add(item)
        if item.startswith("c:"):
            out.append(Sym(tags[item], dvar_of_class(item)))
        else:
            out.append(item)
        item = succ.get(item, NIL)
    return tuple(out), item == UNREAD
