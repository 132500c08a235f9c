"""Abstract syntax of the functional list language."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..imp.ast import Pos

SCALARS = ("bool", "tag", "data")


def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class TagLit:
    tag: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class NilLit:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Undef:
    """An undefined value; only allowed as an initial value or as a whole result."""

    pos: Pos = _pos()


@dataclass(frozen=True)
class Cons:
    head: object
    tail: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Append:
    left: object
    right: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class IsNil:
    arg: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Head:
    arg: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Tail:
    arg: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Proj:
    """``t.tag`` / ``t.data`` (also written ``t.1`` / ``t.2``) on a (tag × data) pair."""

    arg: object
    field: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Tuple_:
    items: Tuple[object, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object
    kind: str = ""
    pos: Pos = _pos()


@dataclass(frozen=True)
class Not:
    arg: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class And:
    left: object
    right: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Or:
    left: object
    right: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: object
    then: object
    orelse: object
    pos: Pos = _pos()


@dataclass(frozen=True)
class Let:
    names: Tuple[str, ...]      # one name, or a tuple pattern
    bound: object
    body: object
    pattern: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple[object, ...]
    pos: Pos = _pos()


@dataclass
class FuncProgram:
    name: str                               # the recursive function
    inputs: List[Tuple[str, str]]           # wrapper parameters; the first is the list
    params: List[Tuple[str, str]]           # parameters of the recursive function
    results: List[str]                      # result types; the first is list
    body: object
    init: Tuple[object, ...]                # arguments of the initial call
    tags: Tuple[str, ...] = ()
    arg_types: List[str] = field(default_factory=list)   # declared argument types

    @property
    def list_param(self) -> str:
        return self.params[0][0]

    @property
    def input_params(self) -> List[Tuple[str, str]]:
        """Scalar wrapper parameters, in order (the encoded prefix)."""
        return self.inputs[1:]

    @property
    def output_params(self) -> List[Tuple[str, str]]:
        return [(f"r{i}", t) for i, t in enumerate(self.results[1:], 1)]

    def of(self, typ: str) -> List[str]:
        return [n for n, t in self.params if t == typ]

    def param_type(self, name: str) -> Optional[str]:
        return dict(self.params).get(name)

    def counts(self) -> Dict[str, int]:
        """k_b, k_t, k_d, k_l of the recursive function."""
        return {t: len(self.of(t)) for t in ("bool", "tag", "data", "list")}
