"""Hand-built machines used throughout the examples and tests."""
from __future__ import annotations

from . import formula as fm
from .machine import Sym, make_sdsa, make_sdst, transition

SIGMA = ("a",)


def reverse(alphabet=SIGMA):
    """Reverse the input: x := (σ, curr).x."""
    ts = [transition("q", s, fm.TRUE, "q", strings={"x": (Sym(s, "curr"), "x")}) for s in alphabet]
    return make_sdst(alphabet, alphabet, ["q"], "q", ["curr"], ["x"], {"q": ("x",)}, ts)


def identity(alphabet=SIGMA):
    ts = [transition("q", s, fm.TRUE, "q", strings={"x": ("x", Sym(s, "curr"))}) for s in alphabet]
    return make_sdst(alphabet, alphabet, ["q"], "q", ["curr"], ["x"], {"q": ("x",)}, ts)


def partition(private="private", public="public"):
    """Private entries first, then public entries, each in input order."""
    ab = (private, public)
    ts = [
        transition("q", private, fm.TRUE, "q", strings={"x1": ("x1", Sym(private, "curr"))}),
        transition("q", public, fm.TRUE, "q", strings={"x2": ("x2", Sym(public, "curr"))}),
    ]
    return make_sdst(ab, ab, ["q"], "q", ["curr"], ["x1", "x2"], {"q": ("x1", "x2")}, ts)


def insert(alphabet=SIGMA, strict: bool = False):
    """Insert the head symbol into the sorted tail.

    ``strict`` replaces the sortedness test ``v <= curr`` by ``v < curr``,
    which rejects tails with repeated values.
    """
    sorted_ok = fm.lt("v") if strict else fm.le("v")
    ts = []
    for s in alphabet:
        ts += [
            transition("q0", s, fm.TRUE, "q1", data={"u": "curr"}, strings={"x": (Sym(s, "curr"),)}),
            # second symbol: below the head value, or not
            transition("q1", s, fm.gt("u"), "q2", data={"v": "curr"}, strings={"y": ("y", Sym(s, "curr"))}),
            transition("q1", s, fm.neg(fm.gt("u")), "q3", data={"v": "curr"},
                       strings={"y": ("y", "x", Sym(s, "curr")), "x": ()}),
            transition("q2", s, fm.conj(sorted_ok, fm.gt("u")), "q2", data={"v": "curr"},
                       strings={"y": ("y", Sym(s, "curr"))}),
            transition("q2", s, fm.conj(sorted_ok, fm.neg(fm.gt("u"))), "q3", data={"v": "curr"},
                       strings={"y": ("y", "x", Sym(s, "curr")), "x": ()}),
            transition("q3", s, sorted_ok, "q3", data={"v": "curr"}, strings={"y": ("y", Sym(s, "curr"))}),
        ]
    return make_sdst(alphabet, alphabet, ["q0", "q1", "q2", "q3"], "q0", ["curr", "u", "v"], ["x", "y"],
                     {"q1": ("x",), "q2": ("y", "x"), "q3": ("y",)}, ts)


def sorted_acceptor(alphabet=SIGMA):
    """Non-strictly sorted data strings (one variable remembers the previous value)."""
    ts = []
    for s in alphabet:
        ts.append(transition("p0", s, fm.TRUE, "p1", data={"prev": "curr"}))
        ts.append(transition("p1", s, fm.le("prev"), "p1", data={"prev": "curr"}))
    return make_sdsa(alphabet, ["p0", "p1"], "p0", ["curr", "prev"], ["p0", "p1"], ts)


def accept_all(alphabet=SIGMA):
    ts = [transition("p", s, fm.TRUE, "p") for s in alphabet]
    return make_sdsa(alphabet, ["p"], "p", ["curr"], ["p"], ts)
