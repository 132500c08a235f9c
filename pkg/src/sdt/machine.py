"""The streaming data-string transducer model: structure, validation, JSON format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from . import ecorder as ec
from . import formula as fm
from .datastring import FormatError

CURR = "curr"
EPS = None


class Sym(NamedTuple):
    """An emitted output symbol: a constant tag paired with a data variable."""

    tag: str
    var: str


# A string expression is a tuple of items; an item is a string-variable name
# (plain str) or a Sym.
Expr = Tuple[object, ...]


def expr_vars(e: Iterable) -> List[str]:
    return [i for i in e if not isinstance(i, Sym)]


def expr_syms(e: Iterable) -> List[Sym]:
    return [i for i in e if isinstance(i, Sym)]


@dataclass(frozen=True)
class Transition:
    src: object
    tag: Optional[str]
    guard: tuple
    dst: object
    data_assign: Tuple[Tuple[str, str], ...] = ()
    string_assign: Tuple[Tuple[str, Expr], ...] = ()

    @cached_property
    def dmap(self) -> Dict[str, str]:
        return dict(self.data_assign)

    @cached_property
    def smap(self) -> Dict[str, Expr]:
        return dict(self.string_assign)

    @property
    def is_eps(self) -> bool:
        return self.tag is None


def transition(src, tag, guard, dst, data=None, strings=None) -> Transition:
    """Build a transition, dropping identity entries from the assignments."""
    if isinstance(guard, str):
        guard = fm.parse(guard)
    data = {k: v for k, v in (data or {}).items() if k != v}
    strings = {k: tuple(v) for k, v in (strings or {}).items() if tuple(v) != (k,)}
    return Transition(src, tag, guard, dst, tuple(sorted(data.items())),
                      tuple(sorted(strings.items())))


@dataclass(frozen=True)
class Sdst:
    input_alphabet: Tuple[str, ...]
    output_alphabet: Tuple[str, ...]
    states: Tuple[object, ...]
    initial: object
    data_vars: Tuple[str, ...]
    string_vars: Tuple[str, ...]
    output: Mapping[object, Expr]
    transitions: Tuple[Transition, ...]
    annotations: Optional[dict] = field(default=None, compare=False, hash=False)

    def __hash__(self):
        return id(self)

    @cached_property
    def by_source(self) -> Dict[object, List[Transition]]:
        out: Dict[object, List[Transition]] = {q: [] for q in self.states}
        for t in self.transitions:
            out.setdefault(t.src, []).append(t)
        return out

    @cached_property
    def by_key(self) -> Dict[Tuple[object, Optional[str]], List[Transition]]:
        out: Dict[Tuple[object, Optional[str]], List[Transition]] = {}
        for t in self.transitions:
            out.setdefault((t.src, t.tag), []).append(t)
        return out

    @cached_property
    def eps_states(self) -> frozenset:
        return frozenset(t.src for t in self.transitions if t.tag is None)

    @property
    def has_eps(self) -> bool:
        return bool(self.eps_states)

    @property
    def is_acceptor(self) -> bool:
        return not self.string_vars

    def accepting(self, q) -> bool:
        return q in self.output

    def full_assignments(self, t: Transition):
        """Data and string maps with identity entries filled in."""
        d = {v: v for v in self.data_vars}
        d.update(t.dmap)
        s = {x: (x,) for x in self.string_vars}
        s.update(t.smap)
        return d, s


def make_sdst(input_alphabet, output_alphabet, states, initial, data_vars,
              string_vars, output, transitions, annotations=None) -> Sdst:
    data_vars = tuple(data_vars)
    if CURR not in data_vars:
        data_vars = (CURR,) + data_vars
    return Sdst(tuple(input_alphabet), tuple(output_alphabet), tuple(states), initial,
                data_vars, tuple(string_vars),
                {q: tuple(e) for q, e in output.items()}, tuple(transitions), annotations)


def make_sdsa(input_alphabet, states, initial, data_vars, accepting, transitions) -> Sdst:
    """A streaming acceptor: no string variables; accepting states output ε."""
    return make_sdst(input_alphabet, (), states, initial, data_vars, (),
                     {q: () for q in accepting}, transitions)


# -- validation ----------------------------------------------------------------

class Violation(NamedTuple):
    kind: str
    message: str
    detail: object = None


class ValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


def validate_sdst(S: Sdst) -> List[Violation]:
    out: List[Violation] = []
    states = set(S.states)
    dvars = set(S.data_vars)
    svars = set(S.string_vars)
    if CURR not in dvars:
        out.append(Violation("unknown-variable", "data variables must include curr"))
    if S.initial not in states:
        out.append(Violation("unknown-state", f"initial state {S.initial!r} is not declared"))

    def check_expr(e, where, out_tags=True):
        for item in e:
            if isinstance(item, Sym):
                if item.var not in dvars:
                    out.append(Violation("unknown-variable", f"{where}: data variable {item.var!r} undeclared"))
                if out_tags and item.tag not in S.output_alphabet:
                    out.append(Violation("unknown-tag", f"{where}: output tag {item.tag!r} undeclared"))
            elif item not in svars:
                out.append(Violation("unknown-variable", f"{where}: string variable {item!r} undeclared"))

    for q, e in S.output.items():
        if q not in states:
            out.append(Violation("unknown-state", f"output defined for undeclared state {q!r}"))
        check_expr(e, f"output of {q!r}")
        used = expr_vars(e)
        dup = {x for x in used if used.count(x) > 1}
        if dup:
            out.append(Violation("copyless", f"output of {q!r} uses {sorted(dup)} more than once", q))

    for k, t in enumerate(S.transitions):
        where = f"transition #{k} ({t.src!r} -{t.tag or 'eps'}-> {t.dst!r})"
        if t.src not in states:
            out.append(Violation("unknown-state", f"{where}: source undeclared"))
        if t.dst not in states:
            out.append(Violation("unknown-state", f"{where}: target undeclared"))
        if t.tag is not None and t.tag not in S.input_alphabet:
            out.append(Violation("unknown-tag", f"{where}: input tag {t.tag!r} undeclared"))
        for v in fm.variables(t.guard):
            if v not in dvars:
                out.append(Violation("unknown-variable", f"{where}: guard variable {v!r} undeclared"))
        for a, b in t.data_assign:
            for v in (a, b):
                if v not in dvars:
                    out.append(Violation("unknown-variable", f"{where}: data variable {v!r} undeclared"))
        used = []
        for x, e in t.string_assign:
            if x not in svars:
                out.append(Violation("unknown-variable", f"{where}: string variable {x!r} undeclared"))
            check_expr(e, where)
        smap = {x: (x,) for x in svars}
        smap.update(t.smap)
        for e in smap.values():
            used.extend(expr_vars(e))
        dup = {x for x in used if used.count(x) > 1}
        if dup:
            out.append(Violation("copyless", f"{where}: {sorted(dup)} used more than once", k))

    for q in S.states:
        ts = S.by_source.get(q, [])
        kinds = {t.tag is None for t in ts}
        if len(kinds) > 1:
            out.append(Violation("epsilon-discipline",
                                 f"state {q!r} mixes ε-transitions with input transitions", q))
    for (q, tag), ts in S.by_key.items():
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                both = fm.conj(ts[i].guard, ts[j].guard)
                wit = ec.satisfiable(both)
                if wit is not None:
                    out.append(Violation(
                        "determinism",
                        f"state {q!r}, tag {tag or 'eps'}: guards {fm.render(ts[i].guard)!r} and "
                        f"{fm.render(ts[j].guard)!r} overlap at {ec.show(wit)}",
                        (ts[i], ts[j], wit)))
    return out


def check(S: Sdst) -> Sdst:
    v = validate_sdst(S)
    if v:
        raise ValidationError(v)
    return S


# -- JSON format -----------------------------------------------------------------

def _item_to_json(item):
    if isinstance(item, Sym):
        return {"sym": [item.tag, item.var]}
    return {"var": item}


def _item_from_json(doc):
    if not isinstance(doc, dict):
        raise FormatError(f"bad expression item {doc!r}")
    if "var" in doc:
        return doc["var"]
    if "sym" in doc and len(doc["sym"]) == 2:
        return Sym(doc["sym"][0], doc["sym"][1])
    raise FormatError(f"bad expression item {doc!r}")


def _state_key(q) -> str:
    return q if isinstance(q, str) else json.dumps(q)


def to_json(S: Sdst) -> dict:
    names = {q: (q if isinstance(q, str) else f"q{i}") for i, q in enumerate(S.states)}
    if len(set(names.values())) != len(names):
        names = {q: f"q{i}" for i, q in enumerate(S.states)}
    doc = {
        "inputAlphabet": list(S.input_alphabet),
        "outputAlphabet": list(S.output_alphabet),
        "states": [names[q] for q in S.states],
        "initial": names[S.initial],
        "dataVars": list(S.data_vars),
        "stringVars": list(S.string_vars),
        "output": {names[q]: [_item_to_json(i) for i in e] for q, e in S.output.items()},
        "transitions": [
            {
                "from": names[t.src],
                "tag": t.tag if t.tag is not None else "eps",
                "test": fm.render(t.guard),
                "to": names[t.dst],
                "dataAssign": dict(t.data_assign),
                "stringAssign": {x: [_item_to_json(i) for i in e] for x, e in t.string_assign},
            }
            for t in S.transitions
        ],
    }
    if S.annotations:
        ann = S.annotations.get("states")
        if ann:
            doc["annotations"] = {names[q]: a for q, a in ann.items() if q in names}
    return doc


def from_json(doc: dict) -> Sdst:
    try:
        trans = []
        for t in doc["transitions"]:
            tag = t.get("tag", "eps")
            trans.append(transition(
                t["from"], None if tag == "eps" else tag, fm.parse(t.get("test", "true")), t["to"],
                t.get("dataAssign", {}),
                {x: tuple(_item_from_json(i) for i in e) for x, e in t.get("stringAssign", {}).items()}))
        output = {q: tuple(_item_from_json(i) for i in e) for q, e in doc.get("output", {}).items()}
        dvars = tuple(doc.get("dataVars", [CURR]))
        return Sdst(tuple(doc["inputAlphabet"]), tuple(doc.get("outputAlphabet", [])),
                    tuple(doc["states"]), doc["initial"],
                    dvars if CURR in dvars else (CURR,) + dvars,
                    tuple(doc.get("stringVars", [])), output, tuple(trans),
                    {"states": doc["annotations"]} if "annotations" in doc else None)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed SDST document: {exc!r}") from exc
    except fm.FormulaSyntaxError as exc:
        raise FormatError(str(exc)) from exc


def load(path) -> Sdst:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return from_json(doc)


def dump(S: Sdst, path) -> None:
    Path(path).write_text(json.dumps(to_json(S), indent=1) + "\n", encoding="utf-8")


# -- structural helpers ------------------------------------------------------------

def relabel(S: Sdst) -> Sdst:
    """Rename states to q0, q1, ... in order (initial first)."""
    order = [S.initial] + [q for q in S.states if q != S.initial]
    names = {q: f"q{i}" for i, q in enumerate(order)}
    ts = tuple(Transition(names[t.src], t.tag, t.guard, names[t.dst], t.data_assign, t.string_assign)
               for t in S.transitions)
    return Sdst(S.input_alphabet, S.output_alphabet, tuple(names[q] for q in order), names[S.initial],
                S.data_vars, S.string_vars, {names[q]: e for q, e in S.output.items()}, ts)


def live_variables(S: Sdst, guards_only: bool = False) -> Dict[object, frozenset]:
    """Data variables whose current value may still be read, per state.

    A value is read by a guard, by an emitted symbol, or by an output
    expression (unless ``guards_only``).  Input transitions overwrite curr
    before anything reads it.
    """
    live: Dict[object, frozenset] = {q: frozenset() for q in S.states}
    base: Dict[object, set] = {q: set() for q in S.states}
    if not guards_only:
        for q, e in S.output.items():
            base[q].update(s.var for s in expr_syms(e))
    for t in S.transitions:
        reads = set(fm.variables(t.guard))
        if reads:
            reads.add(CURR)  # atoms compare against curr implicitly
        if not guards_only:
            for _, e in t.string_assign:
                reads.update(s.var for s in expr_syms(e))
        if t.tag is not None:
            reads.discard(CURR)
        base[t.src].update(reads)
    preds: Dict[object, List[Transition]] = {}
    for t in S.transitions:
        preds.setdefault(t.dst, []).append(t)
    for q in S.states:
        live[q] = frozenset(base[q])
    work = list(S.states)
    while work:
        q2 = work.pop()
        for t in preds.get(q2, []):
            add = {t.dmap.get(v, v) for v in live[q2]}
            if t.tag is not None:
                add.discard(CURR)
            new = live[t.src] | add
            if new != live[t.src]:
                live[t.src] = frozenset(new)
                work.append(t.src)
    return live
