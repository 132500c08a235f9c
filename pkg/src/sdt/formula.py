"""Guard formulas over the atoms ``v < curr`` and ``curr < v``.

Formulas are nested tuples:

    ("true",) ("false",) ("lt", v) ("gt", v) ("not", f) ("and", f, g) ("or", f, g)

``("lt", v)`` reads ``v < curr`` and ``("gt", v)`` reads ``curr < v``.
"""
from __future__ import annotations

import re
from typing import Callable, Optional

TRUE = ("true",)
FALSE = ("false",)


def lt(v: str):
    return ("lt", v)


def gt(v: str):
    return ("gt", v)


def neg(f):
    if f == TRUE:
        return FALSE
    if f == FALSE:
        return TRUE
    if f[0] == "not":
        return f[1]
    return ("not", f)


def conj(*fs):
    out = TRUE
    for f in fs:
        if f == FALSE:
            return FALSE
        if f == TRUE:
            continue
        out = f if out == TRUE else ("and", out, f)
    return out


def disj(*fs):
    out = FALSE
    for f in fs:
        if f == TRUE:
            return TRUE
        if f == FALSE:
            continue
        out = f if out == FALSE else ("or", out, f)
    return out


def eq(v: str):
    """``v = curr`` as a combination of the two strict atoms."""
    return conj(neg(lt(v)), neg(gt(v)))


def le(v: str):
    """``v <= curr``."""
    return neg(gt(v))


def variables(f) -> frozenset:
    op = f[0]
    if op in ("lt", "gt"):
        return frozenset((f[1],))
    if op in ("true", "false"):
        return frozenset()
    return frozenset().union(*(variables(g) for g in f[1:]))


def evaluate(f, cmp: Callable[[str], Optional[int]]) -> Optional[bool]:
    """Evaluate ``f`` given ``cmp(v)`` = sign of (v - curr), or None if v is undefined.

    Returns None when any mentioned variable is undefined.
    """
    op = f[0]
    if op == "true":
        return True
    if op == "false":
        return False
    if op == "lt" or op == "gt":
        s = cmp(f[1])
        if s is None:
            return None
        return s < 0 if op == "lt" else s > 0
    if op == "not":
        r = evaluate(f[1], cmp)
        return None if r is None else not r
    a = evaluate(f[1], cmp)
    b = evaluate(f[2], cmp)
    if a is None or b is None:
        return None
    return (a and b) if op == "and" else (a or b)


def evaluate_signs(f, signs) -> bool:
    """Evaluate with every variable defined; ``signs`` maps v to sign(v - curr)."""
    return bool(evaluate(f, signs.__getitem__))


# -- concrete syntax ---------------------------------------------------------

_TOKEN = re.compile(r"\s*(<=|<|=|!|&|\||\(|\)|[A-Za-z_][A-Za-z_0-9']*)")


class FormulaSyntaxError(ValueError):
    pass


def _tokenize(text: str):
    pos, toks = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character at {pos} in {text!r}")
        toks.append(m.group(1))
        pos = m.end()
    return toks


def parse(text: str):
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise FormulaSyntaxError(f"expected {expected or 'token'} in {text!r}")
        pos += 1
        return tok

    def disjunction():
        f = conjunction()
        while peek() == "|":
            take()
            f = ("or", f, conjunction())
        return f

    def conjunction():
        f = unary()
        while peek() == "&":
            take()
            f = ("and", f, unary())
        return f

    def unary():
        tok = peek()
        if tok == "!":
            take()
            return ("not", unary())
        if tok == "(":
            take()
            f = disjunction()
            take(")")
            return f
        if tok == "true":
            take()
            return TRUE
        if tok == "false":
            take()
            return FALSE
        left = take()
        if not re.match(r"[A-Za-z_]", left):
            raise FormulaSyntaxError(f"unexpected {left!r} in {text!r}")
        op = take()
        right = take()
        if left == "curr" and op == "<" and right != "curr":
            return gt(right)
        if right != "curr":
            raise FormulaSyntaxError(f"comparisons must be against curr in {text!r}")
        if op == "<":
            return lt(left)
        if op == "=":
            return eq(left)
        if op == "<=":
            return le(left)
        raise FormulaSyntaxError(f"unknown operator {op!r}")

    f = disjunction()
    if pos != len(toks):
        raise FormulaSyntaxError(f"trailing input in {text!r}")
    return f


def render(f) -> str:
    op = f[0]
    if op in ("true", "false"):
        return op
    if op == "lt":
        return f"{f[1]} < curr"
    if op == "gt":
        return f"curr < {f[1]}"
    if op == "not":
        return "!" + _wrap(f[1])
    sym = " & " if op == "and" else " | "
    return _wrap(f[1]) + sym + _wrap(f[2])


def _wrap(f) -> str:
    return render(f) if f[0] in ("true", "false", "not") else "(" + render(f) + ")"
