"""Turning abstract runs over ec-orders into concrete data strings."""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, NamedTuple, Sequence

from .. import ecorder as ec
from ..machine import CURR


class ContractViolation(ValueError):
    """The abstract path is not consistent with any concrete run."""


class AbstractStep(NamedTuple):
    tag: str
    placed: tuple                 # ec-order including the freshly read curr
    assign: Mapping[str, str]     # parallel data assignment executed after reading


def choose_value(placed, values: Dict[str, Fraction], curr: str) -> Fraction:
    i = ec.index(placed, curr)
    if i is None:
        raise ContractViolation("step does not place curr")
    cls = placed[i] - {curr}
    if cls:
        return values[min(cls)]
    below = [values[v] for c in placed[:i] for v in c]
    above = [values[v] for c in placed[i + 1:] for v in c]
    lo = max(below) if below else None
    hi = min(above) if above else None
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi - 1
    if hi is None:
        return lo + 1
    return (lo + hi) / 2


def realize_witness(path: Sequence[AbstractStep], curr: str = CURR):
    """A concrete data string following ``path`` exactly.

    Each fresh value is a rational placed as the ec-order demands (midpoint
    between neighbouring classes, one past an extreme); the chosen rationals
    are finally rank-mapped to the integers 1, 2, ..., which keeps every
    comparison made along the way.
    """
    values: Dict[str, Fraction] = {}
    chosen = []
    for k, step in enumerate(path):
        known = ec.defined(step.placed) - {curr}
        missing = [v for v in known if v not in values]
        if missing:
            raise ContractViolation(f"step {k}: {sorted(missing)} have no value")
        x = choose_value(step.placed, values, curr)
        values[curr] = x
        observed = ec.from_values({v: values[v] for v in ec.defined(step.placed)})
        if observed != tuple(step.placed):
            raise ContractViolation(f"step {k}: values realise {ec.show(observed)}, "
                                    f"expected {ec.show(step.placed)}")
        chosen.append((step.tag, x))
        new = dict(values)
        for a, b in step.assign.items():
            if b in values:
                new[a] = values[b]
            else:
                new.pop(a, None)
        values = new
    rank = {x: i + 1 for i, x in enumerate(sorted({x for _, x in chosen}))}
    return tuple((tag, rank[x]) for tag, x in chosen)
