import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import all_inputs, random_sdst
from oracles import read_program
from sdt import corpus, formula as fm
from sdt.encoding import decode_input
from sdt.imp import ImpCompiler, parse_imp, run_imp
from sdt.machine import make_sdsa, transition
from sdt.run import run_acceptor, run_sdst
from sdt.verify import (AssertionQuery, BoundedHolds, Holds, HoareTriple, Safe, Violation, Witness, build_labels,
                        check_assertion, check_hoare, check_total)

S1, S4, ID = corpus.reverse(), corpus.insert(), corpus.identity()
ALL, L1 = corpus.accept_all(), corpus.sorted_acceptor()


def holds(v):
    return isinstance(v, (Holds, BoundedHolds))


# -- Hoare triples -----------------------------------------------------------------------------

def test_reverse_into_accept_all_holds():
    assert isinstance(check_hoare(HoareTriple(ALL, S1, ALL)), Holds)


def test_insert_output_is_sorted():
    t = HoareTriple(ALL, S4, L1)
    assert isinstance(check_hoare(t), Holds)
    assert check_hoare(t, mode="bounded", bound=5) == BoundedHolds(5)


def test_reverse_output_not_sorted_minimal_witness():
    for mode in ("summary", "bounded"):
        v = check_hoare(HoareTriple(ALL, S1, L1), mode=mode)
        assert isinstance(v, Violation)
        assert len(v.input) == 2 and v.input[0][1] < v.input[1][1]
        assert not run_acceptor(L1, run_sdst(S1, v.input))


def test_total_correctness():
    assert isinstance(check_total(HoareTriple(ALL, S1, ALL)), Holds)
    assert check_total(HoareTriple(ALL, S1, ALL), mode="bounded").bound == 5
    for mode in ("summary", "bounded"):
        v = check_total(HoareTriple(ALL, S4, ALL), mode=mode)
        assert isinstance(v, Violation) and v.input == ()
    assert isinstance(check_total(HoareTriple(L1, ID, L1)), Holds)


def test_bounded_mode_is_monotone():
    t = HoareTriple(ALL, S1, L1)
    assert all(isinstance(check_hoare(t, mode="bounded", bound=b), Violation) for b in range(2, 6))
    assert isinstance(check_hoare(t, mode="bounded", bound=1), BoundedHolds)


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        check_hoare(HoareTriple(ALL, S1, ALL), mode="guess")


CORPUS_TRIPLES = [
    (ALL, S1, ALL), (ALL, S4, L1), (ALL, S1, L1), (L1, ID, L1), (L1, S1, L1), (L1, S4, L1),
    (ALL, corpus.insert(strict=True), L1), (L1, S4, ALL), (ALL, ID, L1),
]


@pytest.mark.parametrize("total", [False, True])
@pytest.mark.parametrize("k", range(len(CORPUS_TRIPLES)))
def test_summary_and_bounded_agree(k, total):
    t = HoareTriple(*CORPUS_TRIPLES[k])
    check = check_total if total else check_hoare
    summary, bounded = check(t), check(t, mode="bounded", bound=5)
    if isinstance(bounded, Violation):
        assert isinstance(summary, Violation)
    if isinstance(summary, Holds):
        assert holds(bounded)
    if isinstance(summary, Violation):
        _assert_violates(t, summary.input, total)


def _assert_violates(t, w, total):
    assert run_acceptor(t.pre, w)
    out = run_sdst(t.body, w)
    if out is None:
        assert total
    else:
        assert not run_acceptor(t.post, out)


def _random_acceptor(rng, alphabet):
    """Sorted-ish acceptors: each state may demand ascending, descending or anything."""
    states = ["p0", "p1"]
    ts = []
    for q in states:
        for a in alphabet:
            g = rng.choice([fm.TRUE, fm.le("prev"), fm.neg(fm.le("prev"))])
            ts.append(transition(q, a, g if q == "p1" else fm.TRUE, rng.choice(states[1:]), data={"prev": "curr"}))
    acc = rng.sample(states, rng.randint(1, 2))
    return make_sdsa(alphabet, states, "p0", ["curr", "prev"], acc, ts)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_modes_agree_on_random_triples(seed, total):
    rng = random.Random(seed)
    body = random_sdst(rng, alphabet=("a",), n_states=2, n_data=1, n_strings=2)
    t = HoareTriple(_random_acceptor(rng, ("a",)), body, _random_acceptor(rng, ("a",)))
    check = check_total if total else check_hoare
    summary, bounded = check(t), check(t, mode="bounded", bound=4)
    if isinstance(bounded, Violation):
        assert isinstance(summary, Violation)
    if isinstance(summary, Violation):
        _assert_violates(t, summary.input, total)


# -- assertions --------------------------------------------------------------------------------

def load(name):
    return parse_imp(read_program(name))


def test_reverse_has_no_cycle():
    assert isinstance(check_assertion(AssertionQuery("cycle", load("reverse.imp"), ALL)), Safe)


def test_self_loop_has_a_cycle():
    res = check_assertion(AssertionQuery("cycle", load("selfloop.imp")))
    assert isinstance(res, Witness) and len(res.input) >= 1


def test_unguarded_dereference_flagged():
    res = check_assertion(AssertionQuery("nil", load("nilderef.imp"), x="prev"))
    assert isinstance(res, Witness)
    o = run_imp(load("nilderef.imp"), res.input)
    assert o.error == "nilDeref" and o.error_ref == "prev"
    assert isinstance(check_assertion(AssertionQuery("nil", load("reverse.imp"), x="prev")), Safe)


def test_reverse_aliasing():
    res = check_assertion(AssertionQuery("alias", load("reverse.imp"), ALL, x="result", y="prev"))
    assert isinstance(res, Witness)


def test_unknown_label_rejected():
    with pytest.raises(ValueError):
        check_assertion(AssertionQuery("loc", load("reverse.imp"), label="nowhere"))


def _brute_event(q, max_len):
    """The first encoded input of length <= max_len on which run_imp shows the event."""
    C = ImpCompiler(q.program)
    pre = q.pre or make_sdsa(C.input_alphabet, ["p"], "p", ["curr"], ["p"],
                             [transition("p", a, fm.TRUE, "p") for a in C.input_alphabet])
    for w in all_inputs(C.input_alphabet, max_len):
        if not run_acceptor(pre, w):
            continue
        try:
            params, lst = decode_input(C.inputs, w)
        except ValueError:
            continue
        if q.kind == "nil":
            o = run_imp(q.program, lst, params)
            if o.error == "nilDeref" and o.error_ref == q.x:
                return w
            continue
        probe = {"loc": lambda m: m.loc == q.label, "alias": lambda m: m.aliases(q.x, q.y),
                 "cycle": lambda m: m.has_cycle()}[q.kind]
        hit = []
        run_imp(q.program, lst, params, observer=lambda m: (hit.append(1) or True) if probe(m) else None)
        if hit:
            return w
    return None


def _queries():
    out = []
    for name in ("reverse.imp", "delete_list.imp", "selfloop.imp", "nilderef.imp"):
        p = load(name)
        refs = p.of("ref")
        out.append(AssertionQuery("cycle", p))
        out += [AssertionQuery("nil", p, x=r) for r in refs]
        out += [AssertionQuery("alias", p, x=a, y=b) for i, a in enumerate(refs) for b in refs[i + 1:]]
        out += [AssertionQuery("loc", p, label=lab) for lab in build_labels(p)]
    out.append(AssertionQuery("cycle", load("reverse.imp"), L1))
    return out


@pytest.mark.parametrize("q", _queries(), ids=lambda q: f"{q.program.name}-{q.kind}-{q.label or q.x or ''}-{q.y or ''}")
def test_assertions_agree_with_brute_force(q):
    res = check_assertion(q)
    brute = _brute_event(q, 4)
    if brute is not None:
        assert isinstance(res, Witness)
    if isinstance(res, Witness):
        assert len(res.input) > 4 or brute is not None
    else:
        assert brute is None
