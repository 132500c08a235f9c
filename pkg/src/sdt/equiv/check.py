"""Deciding equivalence of two transducers, with concrete counterexamples."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..datastring import DataString
from ..machine import Sdst
from ..run import run_sdst
from .onecounter import (OneCounterMachine, path_counter_span, zero_reachability,
                         zero_reachable_exact)
from .product import ACCEPT, AlphabetMismatch, ProductBuilder
from .witness import AbstractStep, realize_witness


@dataclass(frozen=True)
class DiffWitness:
    kind: str
    input: DataString
    position: Optional[int] = None


@dataclass(frozen=True)
class Equivalent:
    equivalent = True


@dataclass(frozen=True)
class NotEquivalent:
    witness: DiffWitness
    output1: Optional[DataString]
    output2: Optional[DataString]
    equivalent = False


def describe_difference(o1, o2) -> Optional[DiffWitness]:
    """Classify how two outputs differ (input left empty); None when equal."""
    if (o1 is None) != (o2 is None):
        return DiffWitness("domainDiff", ())
    if o1 is None or o1 == o2:
        return None
    for p, (a, b) in enumerate(zip(o1, o2)):
        if a != b:
            return DiffWitness("positionDiff", (), p)
    return DiffWitness("lengthDiff", (), min(len(o1), len(o2)))


def shortest_zero_path(M: OneCounterMachine):
    """A 0-reaching path of minimal length among those within the smallest sufficient counter span."""
    path = zero_reachable_exact(M)
    if path is None:
        return None
    span = path_counter_span(path)
    bound = 1
    while bound <= span:
        found = zero_reachability(M, bound + 1)
        if found is not None:
            return found
        bound *= 2
    return zero_reachability(M, span + 1) or path


def search_mode(S1: Sdst, S2: Sdst, mode: str, orientation: int = 1, limit: int = 400_000):
    """Abstract path (list of AbstractStep) to a difference of ``mode``, or None."""
    builder = ProductBuilder(S1, S2, mode, orientation, limit)
    init, edges, _ = builder.explore()
    M = OneCounterMachine.from_weighted(init, {ACCEPT}, edges)
    path = shortest_zero_path(M)
    if path is None:
        return None
    steps = []
    for _, _, _, label in path:
        if label is not None and label[0] == "in":
            _, tag, pi, assign = label
            steps.append(AbstractStep(tag, pi, assign))
    return steps


def check_equivalence(S1: Sdst, S2: Sdst, limit: int = 400_000):
    """Equivalent() or NotEquivalent(witness) whose input replays to a real difference."""
    if set(S1.input_alphabet) != set(S2.input_alphabet):
        raise AlphabetMismatch("machines must share the input alphabet")
    searches = [("domainDiff", 1), ("lengthDiff", 1), ("lengthDiff", 2), ("positionDiff", 1)]
    for mode, orient in searches:
        steps = search_mode(S1, S2, mode, orient, limit)
        if steps is None:
            continue
        w = realize_witness(steps)
        o1, o2 = run_sdst(S1, w), run_sdst(S2, w)
        diff = describe_difference(o1, o2)
        if diff is None:
            raise AssertionError(f"{mode} witness {w} does not separate the machines")
        return NotEquivalent(DiffWitness(diff.kind, w, diff.position), o1, o2)
    return Equivalent()
