"""Single-edit mutants of machines and programs.

Machine edits: flip or mirror a comparison, swap two adjacent items of a
string expression, drop a data or string assignment, drop an expression
item, add an emitted symbol, retarget or delete a transition, toggle a
state's output.

Program edits work on the syntax tree.  Both languages: flip, mirror or
swap a comparison, flip a boolean constant, drop a negation, swap and/or,
swap branches, replace a conditional by one branch.  Imperative only: drop,
duplicate or swap statements, clear or redirect a reference.  Functional
only: negate a condition, drop, reorder or repeat a concatenation, clear a
list, retag an element.

Mutants that fail validation or the single-pass restrictions are
discarded, and so are duplicates.
"""
from dataclasses import fields, is_dataclass, replace

from sdt import formula as fm
from sdt.func import ast as F
from sdt.imp import ast as I
from sdt.machine import Sdst, Sym, validate_sdst

NEGATE = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
MIRROR = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}


# -- machines ----------------------------------------------------------------------------------

def _mirror_guard(f):
    op = f[0]
    if op == "lt":
        return ("gt", f[1])
    if op == "gt":
        return ("lt", f[1])
    if op in ("not",):
        return (op, _mirror_guard(f[1]))
    if op in ("and", "or"):
        return (op, _mirror_guard(f[1]), _mirror_guard(f[2]))
    return f


def _expr_edits(e, alphabet, dvars):
    e = tuple(e)
    for i in range(len(e) - 1):
        yield "swap", e[:i] + (e[i + 1], e[i]) + e[i + 2:]
    for i in range(len(e)):
        yield "drop-item", e[:i] + e[i + 1:]
    sym = Sym(alphabet[0], "curr")
    yield "add-symbol", (sym,) + e
    yield "add-symbol", e + (sym,)


def machine_mutants(S: Sdst):
    """(kind, mutant) pairs, each a valid machine differing from S by one edit."""
    out, seen = [], set()
    ts = list(S.transitions)

    def emit(kind, **changes):
        M = replace(S, **changes)
        key = (M.transitions, tuple(sorted(M.output.items(), key=repr)))
        if key in seen or validate_sdst(M):
            return
        seen.add(key)
        out.append((kind, M))

    def with_t(k, t):
        return tuple(ts[:k] + [t] + ts[k + 1:])

    for k, t in enumerate(ts):
        if t.guard != fm.TRUE:
            emit("flip", transitions=with_t(k, replace(t, guard=fm.neg(t.guard))))
            emit("mirror", transitions=with_t(k, replace(t, guard=_mirror_guard(t.guard))))
        for j in range(len(t.data_assign)):
            emit("drop-assign", transitions=with_t(k, replace(t, data_assign=t.data_assign[:j] + t.data_assign[j + 1:])))
        for j, (x, e) in enumerate(t.string_assign):
            emit("drop-assign",
                 transitions=with_t(k, replace(t, string_assign=t.string_assign[:j] + t.string_assign[j + 1:])))
            for kind, e2 in _expr_edits(e, S.output_alphabet or ("a",), S.data_vars):
                sa = t.string_assign[:j] + ((x, e2),) + t.string_assign[j + 1:]
                emit(kind, transitions=with_t(k, replace(t, string_assign=sa)))
        for q in S.states:
            if q != t.dst:
                emit("retarget", transitions=with_t(k, replace(t, dst=q)))
        emit("delete-transition", transitions=tuple(ts[:k] + ts[k + 1:]))
    for q in S.states:
        if q in S.output:
            emit("drop-output", output={p: e for p, e in S.output.items() if p != q})
            if S.string_vars:
                for kind, e2 in _expr_edits(S.output[q], S.output_alphabet or ("a",), S.data_vars):
                    emit(kind, output={**S.output, q: e2})
        else:
            emit("add-output", output={**S.output, q: ()})
    return out


# -- syntax trees ------------------------------------------------------------------------------

def _tree_edits(node, rewrite):
    """Every tree obtained by applying ``rewrite`` at exactly one position."""
    yield from rewrite(node)
    if isinstance(node, (list, tuple)):
        for i, child in enumerate(node):
            for c in _tree_edits(child, rewrite):
                new = list(node[:i]) + [c] + list(node[i + 1:])
                yield new if isinstance(node, list) else tuple(new)
    elif is_dataclass(node):
        for f in fields(node):
            if f.name in ("pos", "label"):
                continue
            v = getattr(node, f.name)
            if isinstance(v, (list, tuple)) or is_dataclass(v):
                for v2 in _tree_edits(v, rewrite):
                    yield replace(node, **{f.name: v2})


def _common(node, cmp_cls, not_cls, and_cls, or_cls, bool_cls):
    if isinstance(node, cmp_cls):
        yield replace(node, op=NEGATE[node.op])
        yield replace(node, left=node.right, right=node.left)
        if node.op in MIRROR:
            yield replace(node, op=MIRROR[node.op])
    elif isinstance(node, bool_cls):
        yield replace(node, value=not node.value)
    elif isinstance(node, not_cls):
        yield node.arg
    elif isinstance(node, and_cls):
        yield or_cls(node.left, node.right)
    elif isinstance(node, or_cls):
        yield and_cls(node.left, node.right)


def _imp_rewrite(node):
    yield from _common(node, I.Cmp, I.Not, I.And, I.Or, I.BoolConst)
    if isinstance(node, I.If):
        yield replace(node, then=node.orelse, orelse=node.then)
    if isinstance(node, (I.Assign, I.NextAssign)) and isinstance(node.expr, I.Var):
        yield replace(node, expr=I.Nil())
        for r in _REFS:
            if r != node.expr.name:
                yield replace(node, expr=I.Var(r))
    if isinstance(node, list):
        for i, s in enumerate(node):
            if isinstance(s, (I.Assign, I.NextAssign, I.New)):
                yield node[:i] + node[i + 1:]
                yield node[:i + 1] + [s] + node[i + 1:]
            elif isinstance(s, I.If):
                yield node[:i] + list(s.then) + node[i + 1:]
                yield node[:i] + list(s.orelse) + node[i + 1:]
        for i in range(len(node) - 1):
            yield node[:i] + [node[i + 1], node[i]] + node[i + 2:]


def _func_rewrite(node):
    yield from _common(node, F.Cmp, F.Not, F.And, F.Or, F.BoolLit)
    if isinstance(node, F.If):
        yield replace(node, then=node.orelse, orelse=node.then)
        yield replace(node, cond=F.Not(node.cond))
        yield node.then
        yield node.orelse
    elif isinstance(node, F.Cons):
        if isinstance(node.head, F.Head):
            retagged = F.Tuple_((F.TagLit("b"), F.Proj(node.head, "data")))
            yield replace(node, head=retagged)
        yield node.tail
        yield F.Append(node.tail, F.Cons(node.head, F.NilLit()))
        yield F.Cons(node.head, node)
    elif isinstance(node, F.Var) and node.name in _LIST_VARS:
        yield F.NilLit()
    elif isinstance(node, F.Append):
        yield F.Append(node.right, node.left)
        yield node.left
        yield node.right


_REFS = []


def imp_mutants(prog):
    from sdt.imp import check_imp
    _REFS[:] = prog.of("ref")
    out, seen = [], set()
    for body in _tree_edits(prog.body, _imp_rewrite):
        m = replace(prog, body=body)
        key = repr(body)
        if key in seen or check_imp(m):
            continue
        seen.add(key)
        out.append(m)
    return out


_LIST_VARS = set()


def func_mutants(p):
    from sdt.func import check_single_pass
    _LIST_VARS.clear()
    _LIST_VARS.update(n for n, t in p.params[1:] if t == "list")
    out, seen = [], set()
    for body in _tree_edits(p.body, _func_rewrite):
        m = replace(p, body=body)
        key = repr(body)
        if key in seen or repr(body) == repr(p.body) or not check_single_pass(m).ok:
            continue
        seen.add(key)
        out.append(m)
    return out
