"""Random small machines and exhaustive input enumeration for oracle tests."""
import itertools
import random

from sdt import formula as fm
from sdt.machine import Sym, make_sdst, transition


def all_inputs(alphabet, max_len):
    """Every input up to order-isomorphism: values 1..n realise every ec-pattern."""
    for n in range(max_len + 1):
        for tags in itertools.product(alphabet, repeat=n):
            for vals in itertools.product(range(1, n + 1), repeat=n):
                yield tuple(zip(tags, vals))


def _guards(rng, dvars):
    """A random mutually exclusive (not necessarily exhaustive) family of tests."""
    others = [v for v in dvars if v != "curr"]
    if not others or rng.random() < 0.3:
        return [fm.TRUE]
    v = rng.choice(others)
    kinds = rng.choice([
        [fm.lt(v), fm.neg(fm.lt(v))],
        [fm.gt(v), fm.eq(v), fm.lt(v)],
        [fm.le(v)],
        [fm.gt(v), fm.neg(fm.gt(v))],
    ])
    return kinds


def _expr(rng, pool, alphabet, dvars):
    items = []
    for x in pool:
        items.append(x)
    for _ in range(rng.randint(0, 2)):
        items.append(Sym(rng.choice(alphabet), rng.choice(dvars)))
    rng.shuffle(items)
    return tuple(items)


def random_sdst(rng: random.Random, alphabet=("a", "b"), n_states=3, n_data=2, n_strings=2, eps=False):
    states = [f"q{i}" for i in range(rng.randint(1, n_states))]
    dvars = ["curr"] + [f"d{i}" for i in range(rng.randint(0, n_data))]
    svars = [f"x{i}" for i in range(rng.randint(1, n_strings))]
    ts = []
    eps_states = set()
    if eps and len(states) > 1:
        eps_states = set(rng.sample(states[1:], rng.randint(1, len(states) - 1)))
    for q in states:
        labels = [None] if q in eps_states else list(alphabet)
        for tag in labels:
            if tag is not None and rng.random() < 0.15:
                continue
            for g in _guards(rng, dvars):
                dst = rng.choice(states)
                data = {}
                for v in dvars[1:]:
                    if rng.random() < 0.4:
                        data[v] = rng.choice(dvars if tag is not None else dvars[1:])
                order = svars[:]
                rng.shuffle(order)
                strings = {}
                for x in svars:
                    k = rng.randint(0, 2)
                    pool, order = order[:k], order[k:]
                    strings[x] = _expr(rng, pool, alphabet, dvars)
                ts.append(transition(q, tag, g, dst, data, strings))
    output = {}
    for q in states:
        if rng.random() < 0.8:
            pool = rng.sample(svars, rng.randint(0, len(svars)))
            output[q] = _expr(rng, pool, alphabet, dvars) if rng.random() < 0.3 else tuple(pool)
    return make_sdst(alphabet, alphabet, states, states[0], dvars, svars, output, ts)
