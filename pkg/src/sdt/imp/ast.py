"""Abstract syntax of the imperative heap-list language."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

TYPES = ("bool", "tag", "data", "ref")
MODES = ("input", "output", "local")


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


# -- expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Field:
    """``r.data`` or ``r.tag`` (``r.next`` only appears in NextRead)."""

    ref: str
    field: str


@dataclass(frozen=True)
class Nil:
    pass


@dataclass(frozen=True)
class TagConst:
    tag: str


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str          # one of = != < <= > >=
    left: object
    right: object
    kind: str = ""   # bool/tag/data/ref, filled in by the type checker


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


# -- statements ----------------------------------------------------------------

@dataclass
class Assign:
    label: str
    target: str
    expr: object
    pos: Pos = None


@dataclass
class NextAssign:
    """``r.next := re``"""

    label: str
    ref: str
    expr: object
    pos: Pos = None


@dataclass
class NextRead:
    """``x := y.next``; only ``curr := curr.next`` passes the restriction check."""

    label: str
    target: str
    source: str
    pos: Pos = None


@dataclass
class New:
    label: str
    target: str
    tag: object
    data: object
    next: object
    pos: Pos = None


@dataclass
class If:
    label: str
    cond: object
    then: List[object]
    orelse: List[object]
    pos: Pos = None


@dataclass
class While:
    label: str
    cond: object
    body: List[object]
    pos: Pos = None


@dataclass
class Decl:
    name: str
    type: str
    mode: str
    init: object = None   # Var / TagConst / BoolConst / Nil, or None for the default
    pos: Pos = None


@dataclass
class ImpProgram:
    name: str
    decls: List[Decl]
    body: List[object]
    tags: Tuple[str, ...] = ()       # tag constants mentioned in the text
    types: Dict[str, str] = field(default_factory=dict)

    def decl(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    def of(self, type_: str, mode: Optional[str] = None) -> List[str]:
        return [d.name for d in self.decls if d.type == type_ and (mode is None or d.mode == mode)]

    @property
    def curr(self) -> str:
        refs = self.of("ref", "input")
        return refs[0] if refs else "curr"

    @property
    def result(self) -> Optional[str]:
        refs = self.of("ref", "output")
        return refs[0] if refs else None

    @property
    def input_params(self) -> List[Decl]:
        return [d for d in self.decls if d.mode == "input" and d.type != "ref"]

    @property
    def output_params(self) -> List[Decl]:
        return [d for d in self.decls if d.mode == "output" and d.type != "ref"]

    def statements(self):
        """Every statement, in textual order."""
        stack = list(reversed(self.body))
        while stack:
            s = stack.pop()
            yield s
            if isinstance(s, If):
                stack.extend(reversed(s.orelse))
                stack.extend(reversed(s.then))
            elif isinstance(s, While):
                stack.extend(reversed(s.body))


Stmt = Union[Assign, NextAssign, NextRead, New, If, While]
