"""One-counter machines without counter tests, and 0-reachability."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

Edge = Tuple[Hashable, Hashable, int, object]  # (src, dst, delta in {-1,0,1}, label)


@dataclass
class OneCounterMachine:
    states: List[Hashable]
    initial: Hashable
    finals: frozenset
    transitions: List[Edge] = field(default_factory=list)

    def __post_init__(self):
        for e in self.transitions:
            if e[2] not in (-1, 0, 1):
                raise ValueError(f"counter delta must be -1, 0 or +1, got {e[2]}")

    @classmethod
    def from_weighted(cls, initial, finals, edges) -> "OneCounterMachine":
        """Build from edges with arbitrary integer deltas, splitting |d| > 1 into unit chains."""
        states = {initial: None}
        out: List[Edge] = []
        for k, (u, v, d, label) in enumerate(edges):
            states.setdefault(u, None)
            states.setdefault(v, None)
            if d in (-1, 0, 1):
                out.append((u, v, d, label))
                continue
            step = 1 if d > 0 else -1
            prev = u
            for j in range(abs(d) - 1):
                mid = ("·chain", k, j)
                states[mid] = None
                out.append((prev, mid, step, label if j == 0 else None))
                prev = mid
            out.append((prev, v, step, None))
        return cls(list(states), initial, frozenset(finals), out)

    @property
    def succ(self) -> Dict[Hashable, List[Edge]]:
        s: Dict[Hashable, List[Edge]] = {}
        for e in self.transitions:
            s.setdefault(e[0], []).append(e)
        return s


def zero_reachability(M: OneCounterMachine, bound: Optional[int] = None) -> Optional[List[Edge]]:
    """Shortest path from (initial, 0) to (final, 0) with |counter| < bound.

    The default bound is n² for n states, which suffices for completeness:
    a summary-based argument shows that any 0-reachable pair is reachable with
    counter magnitude below the number of state pairs.
    """
    n = len(M.states)
    if bound is None:
        bound = max(n * n, 1)
    succ = M.succ
    start = (M.initial, 0)
    parent: Dict[Tuple, Optional[Tuple]] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        q, z = node
        if z == 0 and q in M.finals:
            path = []
            while parent[node] is not None:
                prev, edge = parent[node]
                path.append(edge)
                node = prev
            return path[::-1]
        for e in succ.get(q, ()):
            z2 = z + e[2]
            if -bound < z2 < bound:
                nxt = (e[1], z2)
                if nxt not in parent:
                    parent[nxt] = (node, e)
                    queue.append(nxt)
    return None


def zero_reachable_exact(M: OneCounterMachine) -> Optional[List[Edge]]:
    """Some path from (initial, 0) to (final, 0), or None; no counter bound needed.

    Computes the relation Z(u, v): a path u → v with net counter change zero.
    Every such path decomposes as ε, Z·e₀, or Z·(+1 Z −1), Z·(−1 Z +1), so a
    worklist saturation over state pairs is complete.  Runs in O(n³) time on
    the states that are both reachable and co-reachable.
    """
    succ: Dict[Hashable, List[Edge]] = {}
    pred: Dict[Hashable, List[Edge]] = {}
    for e in M.transitions:
        succ.setdefault(e[0], []).append(e)
        pred.setdefault(e[1], []).append(e)
    fwd = _closure(M.initial, succ, 1)
    bwd = set()
    for f in M.finals:
        if f in fwd:
            bwd |= _closure(f, pred, 0)
    live = fwd & bwd
    if not any(f in live for f in M.finals):
        return None
    zero_out: Dict[Hashable, List[Edge]] = {}
    plus_in: Dict[Hashable, List[Edge]] = {}
    minus_in: Dict[Hashable, List[Edge]] = {}
    plus_out: Dict[Hashable, List[Edge]] = {}
    minus_out: Dict[Hashable, List[Edge]] = {}
    for e in M.transitions:
        u, v, d, _ = e
        if u not in live or v not in live:
            continue
        if d == 0:
            zero_out.setdefault(u, []).append(e)
        elif d > 0:
            plus_in.setdefault(v, []).append(e)
            plus_out.setdefault(u, []).append(e)
        else:
            minus_in.setdefault(v, []).append(e)
            minus_out.setdefault(u, []).append(e)

    # why[(u, v)] explains how Z(u, v) was derived, for path reconstruction
    why: Dict[Tuple, tuple] = {}
    z_out: Dict[Hashable, set] = {}
    z_in: Dict[Hashable, set] = {}
    b_out: Dict[Hashable, Dict[Hashable, tuple]] = {}
    work: List[Tuple] = []

    def add_z(u, v, reason):
        if (u, v) in why:
            return
        why[(u, v)] = reason
        z_out.setdefault(u, set()).add(v)
        z_in.setdefault(v, set()).add(u)
        work.append((u, v))

    def add_b(w, x, reason):
        row = b_out.setdefault(w, {})
        if x in row:
            return
        row[x] = reason
        for u in list(z_in.get(w, ())):
            add_z(u, x, ("zb", w, x))

    for u in live:
        add_z(u, u, ("eps",))
    while work:
        u, v = work.pop()
        for e in zero_out.get(v, ()):
            add_z(u, e[1], ("ze", v, e))
        for x, _ in list(b_out.get(v, {}).items()):
            add_z(u, x, ("zb", v, x))
        # u..v balanced; wrap it in a +1/-1 or -1/+1 pair
        for opening, closing in ((plus_in, minus_out), (minus_in, plus_out)):
            for e1 in opening.get(u, ()):
                for e2 in closing.get(v, ()):
                    add_b(e1[0], e2[1], (e1, (u, v), e2))
    for f in M.finals:
        if (M.initial, f) in why:
            return _expand(M.initial, f, why, b_out)
    return None


def _closure(start, adj, idx) -> set:
    seen = {start}
    stack = [start]
    while stack:
        q = stack.pop()
        for e in adj.get(q, ()):
            n = e[idx]
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return seen


def _expand(u, v, why, b_out) -> List[Edge]:
    out: List[Edge] = []
    stack: List[object] = [("Z", u, v)]
    while stack:
        item = stack.pop()
        if item[0] == "E":
            out.append(item[1])
            continue
        _, a, b = item
        reason = why[(a, b)]
        if reason[0] == "eps":
            continue
        if reason[0] == "ze":
            mid, e = reason[1], reason[2]
            stack.append(("E", e))
            stack.append(("Z", a, mid))
        else:
            mid, x = reason[1], reason[2]
            e1, (iu, iv), e2 = b_out[mid][x]
            stack.append(("E", e2))
            stack.append(("Z", iu, iv))
            stack.append(("E", e1))
            stack.append(("Z", a, mid))
    return out


def path_counter_span(path: Sequence[Edge]) -> int:
    """Largest |counter| along a path started at 0."""
    z = best = 0
    for e in path:
        z += e[2]
        best = max(best, abs(z))
    return best
