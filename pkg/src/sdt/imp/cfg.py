"""Control-flow graph over statement labels, and the syntactic restriction check."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional

from .ast import Assign, BoolConst, Decl, If, ImpProgram, New, NextAssign, NextRead, Nil, TagConst, Var, While

EXIT = "exit"


@dataclass
class Node:
    stmt: object
    next: Optional[str] = None    # simple statements
    yes: Optional[str] = None     # branches: condition true
    no: Optional[str] = None


@dataclass
class Cfg:
    entry: str
    nodes: Dict[str, Node]

    @property
    def locations(self) -> List[str]:
        return list(self.nodes) + [EXIT]


def build_cfg(prog: ImpProgram) -> Cfg:
    nodes: Dict[str, Node] = {}

    def build(body, follow):
        for s in reversed(body):
            if isinstance(s, If):
                nodes[s.label] = Node(s, yes=build(s.then, follow), no=build(s.orelse, follow))
            elif isinstance(s, While):
                nodes[s.label] = Node(s, no=follow)
                nodes[s.label].yes = build(s.body, s.label)
            else:
                nodes[s.label] = Node(s, next=follow)
            follow = s.label
        return follow

    entry = build(prog.body, EXIT)
    return Cfg(entry, nodes)


class Restriction(NamedTuple):
    kind: str
    message: str
    where: object = None


def check_imp(prog: ImpProgram) -> List[Restriction]:
    """Violations of the single-pass restrictions (empty when the program is admissible)."""
    out: List[Restriction] = []
    in_refs = prog.of("ref", "input")
    out_refs = prog.of("ref", "output")
    if len(in_refs) != 1:
        out.append(Restriction("input-ref", f"exactly one input ref is required, found {len(in_refs)}"))
    if len(out_refs) != 1:
        out.append(Restriction("output-ref", f"exactly one output ref is required, found {len(out_refs)}"))
    curr = prog.curr
    inputs = {d.name: d.type for d in prog.decls if d.mode == "input"}
    for d in prog.decls:
        out.extend(_check_init(d, inputs, curr))
    for s in prog.statements():
        if isinstance(s, NextRead):
            if not (s.target == curr and s.source == curr):
                out.append(Restriction(
                    "traversal", f"{s.pos}: '{s.target} := {s.source}.next': the only allowed read of a "
                                 f"next field is '{curr} := {curr}.next'", s.label))
        elif isinstance(s, (Assign, New)) and s.target == curr:
            out.append(Restriction("traversal", f"{s.pos}: {curr} may only move by '{curr} := {curr}.next'",
                                   s.label))
    return out


def _check_init(d: Decl, inputs, curr) -> List[Restriction]:
    if d.mode == "input":
        if d.init is not None:
            return [Restriction("initializer", f"{d.pos}: input {d.name!r} cannot have an initializer")]
        return []
    init = d.init
    if init is None:
        return []
    ok = False
    if d.type in ("bool", "tag"):
        ok = isinstance(init, (BoolConst, TagConst)) or (isinstance(init, Var) and inputs.get(init.name) == d.type)
    elif d.type == "data":
        ok = isinstance(init, Var) and inputs.get(init.name) == "data"
    elif d.type == "ref":
        ok = isinstance(init, Nil) or (isinstance(init, Var) and init.name == curr)
    if ok:
        return []
    return [Restriction("initializer", f"{d.pos}: {d.name!r} must be initialised with a constant or an input "
                                       f"variable (refs: curr or nil, data: ⊥ or an input)")]
