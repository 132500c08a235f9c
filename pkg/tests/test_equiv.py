import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import all_inputs, random_sdst
from oracles import brute_equivalent, first_difference, read_program
from sdt import corpus, ecorder as ec, formula as fm
from sdt.epsilon import eliminate_epsilon
from sdt.equiv import (AbstractStep, ContractViolation, MODES, OneCounterMachine, build_product,
                       check_equivalence, ec_extend, ec_step, realize_witness, zero_reachability,
                       zero_reachable_exact)
from sdt.func import compile_func, parse_func
from sdt.imp import compile_imp, parse_imp
from sdt.machine import CURR, validate_sdst
from sdt.run import run_sdst


# -- ec-orders ---------------------------------------------------------------------------------

def test_ec_extend_counts():
    assert ec_extend(ec.EMPTY, "curr") == [ec.make({"curr"})]
    got = set(ec_extend(ec.make({"v"}), "curr"))
    assert got == {ec.make({"curr"}, {"v"}), ec.make({"curr", "v"}), ec.make({"v"}, {"curr"})}
    assert len(ec_extend(ec.make({"u"}, {"v"}), "curr")) == 5


@pytest.mark.parametrize("k", range(5))
def test_ec_extend_is_two_k_plus_one(k):
    rho = ec.make(*({f"v{i}"} for i in range(k)))
    out = ec_extend(rho, "curr")
    assert len(out) == len(set(out)) == 2 * k + 1


def test_ec_step_examples():
    cur = ec.make({"curr"}, {"v"})
    assert ec_step(cur, fm.gt("v"), {"v": "curr"}) == ec.make({"curr", "v"})
    assert ec_step(cur, fm.lt("v"), {}) is None
    assert ec_step(ec.make({"v"}), fm.TRUE, {}) == ec.make({"v"})


def test_from_values_agrees_with_comparisons():
    rng = random.Random(3)
    for _ in range(200):
        vals = {f"v{i}": rng.randint(1, 3) for i in range(4)}
        rho = ec.from_values(vals)
        pos = ec.positions(rho)
        for a, b in itertools.combinations(vals, 2):
            assert (vals[a] < vals[b]) == (pos[a] < pos[b])
            assert (vals[a] == vals[b]) == (pos[a] == pos[b])


# -- one-counter reachability ------------------------------------------------------------------

def test_zero_reachability_examples():
    assert zero_reachability(OneCounterMachine(["q0"], "q0", frozenset({"q0"}))) == []
    M = OneCounterMachine(["q0", "q1", "q2"], "q0", frozenset({"q2"}),
                          [("q0", "q1", 1, None), ("q1", "q2", -1, None)])
    assert len(zero_reachability(M)) == 2
    N = OneCounterMachine(["q0", "q1"], "q0", frozenset({"q1"}), [("q0", "q1", 1, None)])
    assert zero_reachability(N) is None
    assert zero_reachable_exact(N) is None


def random_counter_machine(rng, n_states=6):
    n = rng.randint(1, n_states)
    states = list(range(n))
    edges = [(rng.randrange(n), rng.randrange(n), rng.choice((-1, 0, 1)), None)
             for _ in range(rng.randint(0, 2 * n))]
    finals = frozenset(rng.sample(states, rng.randint(1, n)))
    return OneCounterMachine(states, 0, finals, edges)


def test_exact_reachability_matches_bounded_search():
    rng = random.Random(11)
    for _ in range(300):
        M = random_counter_machine(rng)
        n = len(M.states)
        assert (zero_reachable_exact(M) is None) == (zero_reachability(M, 4 * n * n) is None)


def _check_path(M, path):
    q, z = M.initial, 0
    for src, dst, d, _ in path:
        assert src == q
        q, z = dst, z + d
    assert z == 0 and q in M.finals


def test_paths_are_valid():
    rng = random.Random(5)
    for _ in range(200):
        M = random_counter_machine(rng)
        for path in (zero_reachability(M), zero_reachable_exact(M)):
            if path is not None:
                _check_path(M, path)


# -- witnesses ---------------------------------------------------------------------------------

def test_realize_ascending_chain():
    steps, rho = [], ec.EMPTY
    for _ in range(3):
        placed = ec_extend(ec.drop(rho, {CURR}), CURR)[-1]   # curr above everything
        steps.append(AbstractStep("a", placed, {"m": CURR} if "m" not in ec.defined(rho) else {"n": "m", "m": CURR}))
        rho = ec.apply(placed, steps[-1].assign)
    w = realize_witness(steps)
    assert w[0][1] < w[1][1] < w[2][1]


def test_realize_equal_then_below():
    s1 = AbstractStep("a", ec.make({CURR}), {"f": CURR})
    s2 = AbstractStep("a", ec.make({CURR, "f"}), {})
    s3 = AbstractStep("a", ec.make({CURR}, {"f"}), {})
    w = realize_witness([s1, s2, s3])
    assert w[1][1] == w[0][1] and w[2][1] < w[0][1]


def test_realize_empty_path():
    assert realize_witness([]) == ()


def test_realize_rejects_inconsistent_path():
    with pytest.raises(ContractViolation):
        realize_witness([AbstractStep("a", ec.make({CURR}, {"ghost"}), {})])


def _abstract_runs(S, max_len):
    """Every abstract run of S: lists of (step, state, ec-order after the step)."""
    def extend(q, rho, path):
        yield path
        if len(path) == max_len:
            return
        for tag in S.input_alphabet:
            for placed in ec_extend(ec.drop(rho, {CURR}), CURR):
                for t in S.by_key.get((q, tag), ()):
                    if ec.evaluate(placed, t.guard) is True:
                        after = ec.apply(placed, t.dmap)
                        yield from extend(t.dst, after, path + [(AbstractStep(tag, placed, t.dmap), t.dst, after)])
    yield from extend(S.initial, ec.EMPTY, [])


def _concrete_trace(S, w):
    q, data, out = S.initial, {}, []
    for tag, value in w:
        data[CURR] = value
        [t] = [t for t in S.by_key.get((q, tag), ())
               if fm.evaluate(t.guard, lambda v: None if v not in data else (data[v] > value) - (data[v] < value))]
        data = {**{a: data[b] for a, b in t.data_assign if b in data},
                **{v: x for v, x in data.items() if v not in t.dmap}}
        q = t.dst
        out.append((q, ec.from_values(data)))
    return out


@pytest.mark.parametrize("S", [corpus.insert(), corpus.sorted_acceptor(), corpus.reverse(), corpus.partition()],
                         ids=["insert", "sorted", "reverse", "partition"])
def test_abstract_runs_are_realised_exactly(S):
    for run in _abstract_runs(S, 5):
        w = realize_witness([s for s, _, _ in run])
        assert _concrete_trace(S, w) == [(q, rho) for _, q, rho in run]


# -- products and equivalence ------------------------------------------------------------------

def test_product_reflexive_reverse():
    S = corpus.reverse()
    for mode in MODES:
        assert zero_reachable_exact(build_product(S, S, mode)) is None


def test_product_reverse_vs_partition():
    S1 = corpus.reverse(("private", "public"))
    S2 = corpus.partition()
    assert not brute_equivalent(S1, S2, 2)
    assert any(zero_reachable_exact(build_product(S1, S2, m)) is not None for m in MODES)


def test_product_insert_vs_strict_insert():
    S, T = corpus.insert(), corpus.insert(strict=True)
    assert first_difference(lambda w: run_sdst(S, w), lambda w: run_sdst(T, w), ("a",), 4) is not None
    assert zero_reachable_exact(build_product(S, T, "domainDiff")) is not None


def test_equivalence_reflexive():
    assert check_equivalence(corpus.reverse(), corpus.reverse()).equivalent


def test_equivalence_insert_mutant_witness_replays():
    S, T = corpus.insert(), corpus.insert(strict=True)
    res = check_equivalence(S, T)
    assert not res.equivalent
    w = res.witness.input
    assert run_sdst(S, w) != run_sdst(T, w)
    assert (res.output1, res.output2) == (run_sdst(S, w), run_sdst(T, w))


def test_compiled_reverse_programs_equivalent():
    imp = eliminate_epsilon(compile_imp(parse_imp(read_program("reverse.imp"))))
    fun = compile_func(parse_func(read_program("reverse.fun")))
    assert check_equivalence(imp, fun).equivalent
    assert check_equivalence(fun, corpus.reverse()).equivalent


def _kind_holds(kind, o1, o2, pos):
    if kind == "domainDiff":
        return (o1 is None) != (o2 is None)
    if o1 is None or o2 is None:
        return False
    if kind == "lengthDiff":
        return len(o1) != len(o2)
    return pos < min(len(o1), len(o2)) and o1[pos] != o2[pos]


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6))
def test_equivalence_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    S = random_sdst(rng, n_states=2, n_data=1, n_strings=2)
    T = random_sdst(rng, n_states=2, n_data=1, n_strings=2)
    if validate_sdst(S) or validate_sdst(T):
        return
    res = check_equivalence(S, T)
    assert res.equivalent == check_equivalence(T, S).equivalent
    if res.equivalent:
        assert brute_equivalent(S, T, 4)
    else:
        w = res.witness.input
        o1, o2 = run_sdst(S, w), run_sdst(T, w)
        assert _kind_holds(res.witness.kind, o1, o2, res.witness.position)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_machine_equivalent_to_its_epsilon_free_form(seed):
    rng = random.Random(seed)
    S = random_sdst(rng, n_states=3, n_data=1, eps=True)
    assert check_equivalence(S, eliminate_epsilon(S)).equivalent


def test_corpus_pairs_agree_with_oracle():
    ab = ("a",)
    machines = {
        "reverse": corpus.reverse(ab), "identity": corpus.identity(ab), "insert": corpus.insert(ab),
        "strict": corpus.insert(ab, strict=True),
        "imp-reverse": compile_imp(parse_imp(read_program("reverse.imp"))),
        "fun-reverse": compile_func(parse_func(read_program("reverse.fun"))),
    }
    for (n1, S1), (n2, S2) in itertools.combinations_with_replacement(machines.items(), 2):
        res = check_equivalence(eliminate_epsilon(S1), eliminate_epsilon(S2))
        assert res.equivalent == brute_equivalent(S1, S2, 4), (n1, n2)
