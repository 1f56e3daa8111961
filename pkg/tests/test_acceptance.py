"""Acceptance suite: one test per criterion.

The conftest hook prints a PASS/FAIL line per criterion after the run.
"""
import random
import time

from helpers import (binary_inputs, brute_eval, circuit_text, one_vertex_graph,
                     random_circuit_spec, transition_cases)
from t2m import corpus
from t2m.circuits import compile_to_machine, count_test_gates, eval_circuit, parse_circuit
from t2m.dsl import parse_machine, print_machine
from t2m.errors import CertificateUnverifiable
from t2m.machine import (Accept, Branch, Configuration, Halted, MachineGraph, MoveLeft, Query,
                         QueryAt, Reject, Start, Stuck, step)
from t2m.models import (MARK, Halts, Loops, RevisingStream, halting_demo, halting_query,
                        max_by_lpo_loop, revising_decode, revising_to_max, simulate_lpo_by_revising)
from t2m.oracle import (Observation, computable_oracle, lpo, max_value, observe, run_with_oracle,
                        stabilization_check)
from t2m.seq import (ZERO, EvSeq, cantor_pair, cantor_unpair, interleave_pair, lambda_pack,
                     lambda_unpack, seq, split_pair)
from t2m.transform import (compose_machines, inline_computable_oracle, join_witness,
                           layer_violations, separate_layers, split_single_call)
from t2m.weihrauch import algebra_identity_suite, lpo_problem

# corpus machines by query nesting depth
DEPTH = {"copy": 0, "bitflip": 0, "window3": 0, "tape2_echo": 0, "lpo_copy": 1,
         "query_writer": 1, "lpo_twice": 1, "lpo_branchy": 1, "late_one": 1, "nested2": 2,
         "nested3": 3, "depth_chain": 3}


def _obs(m, o, x, depth, prefix=64, fuel=200_000):
    r = run_with_oracle(m, o, x, depth, fuel, detect_cycles=True, prefix_goal=prefix)
    return observe(r.base, prefix)


def _without_queries(m):
    labels = {v: Reject() if isinstance(lab, Query) else lab for v, lab in m.labels.items()}
    succ = {v: () if isinstance(m.labels[v], Query) else s for v, s in m.successors.items()}
    return MachineGraph(m.name + "_rej", labels, succ, m.start)


def test_criterion_01_transition_fidelity():
    t0 = time.perf_counter()
    cases = transition_cases()
    for rule, label, before, expected in cases:
        # the start rule is taken from s0, whatever the label of v
        g = one_vertex_graph(Branch(0) if isinstance(label, Start) else label)
        assert step(g, before) == expected, rule
    assert {c[0].split(":")[0] for c in cases} == {str(k) for k in range(1, 9)}
    c = Configuration("v", (ZERO,) * 4)
    assert step(one_vertex_graph(Accept()), c) == Halted(True, c)
    assert step(one_vertex_graph(Reject()), c) == Halted(False, c)
    assert step(one_vertex_graph(MoveLeft(2)), c) == Stuck(c)
    assert step(one_vertex_graph(Query()), c) == QueryAt("v", c)
    assert time.perf_counter() - t0 < 1.0


def test_criterion_02_layer_separation():
    t0 = time.perf_counter()
    names = list(DEPTH)
    assert len(names) >= 10 and set(DEPTH.values()) == {0, 1, 2, 3}
    oracles = [lpo(), computable_oracle(corpus.load("copy"), 50_000)]
    counts = []
    for name in names:
        m = corpus.load(name)
        n = max(DEPTH[name], 1)
        lm = separate_layers(m, n)
        assert layer_violations(lm.graph, n) == [], name
        for o in oracles:
            for x in binary_inputs(20, seed=31):
                assert _obs(lm, o, x, n) == _obs(m, o, x, n), (name, o.name, x)
        counts.append((name, len(lm.graph), 1 + n * (len(m) - 1)))
    assert time.perf_counter() - t0 < 30
    wrong = [c for c in counts if c[1] != c[2]]
    assert not wrong, f"vertex counts (machine, got, 1+n(|V|-1)): {wrong[:3]}"


def test_criterion_03_depth_monotonicity():
    t0 = time.perf_counter()
    for name in corpus.names():
        m = corpus.load(name)
        rej = _without_queries(m)
        for x in binary_inputs(12, seed=32):
            prev = _obs(m, lpo(), x, 0, 32)
            assert prev == _obs(rej, lpo(), x, 0, 32), (name, x)
            for d in (1, 2, 3):
                cur = _obs(m, lpo(), x, d, 32)
                if prev.kind == "output":
                    assert cur == prev, (name, x, d)
                prev = cur
    assert time.perf_counter() - t0 < 30


def test_criterion_04_computable_oracle_conservativity():
    t0 = time.perf_counter()
    calling = [n for n, d in DEPTH.items() if d > 0] + ["lpo_window", "lpo_flipped"]
    for g in ("copy", "bitflip", "zero_const"):
        for name in calling:
            rep = inline_computable_oracle(corpus.load(name), corpus.load(g),
                                           max(DEPTH.get(name, 1), 1),
                                           binary_inputs(12, seed=33), fuel=50_000)
            assert rep.passed, (name, g)
    assert time.perf_counter() - t0 < 60


PAIRS = [("copy", "bitflip"), ("bitflip", "lpo_copy"), ("lpo_copy", "bitflip"),
         ("lpo_copy", "lpo_flipped"), ("shift", "nested2"), ("lpo_then_copy", "window3")]


def _pipeline(m0, m1, x, depth, prefix=32):
    first = run_with_oracle(m0, lpo(), x, depth, 200_000, detect_cycles=True)
    if not first.status.has_output:
        return Observation("none")
    return _obs(m1, lpo(), first.output, depth, prefix)


def test_criterion_05_composition():
    for a, b in PAIRS:
        m0, m1 = corpus.load(a), corpus.load(b)
        c = compose_machines(m0, m1)
        depth = max(DEPTH.get(a, 1), DEPTH.get(b, 1), 1)
        xs = binary_inputs(20, seed=34)
        for x in xs:
            assert _obs(c, lpo(), x, depth, 32) == _pipeline(m0, m1, x, depth), (a, b, x)
        n0 = stabilization_check(m0, lpo(), xs[:8], 4, 100_000, 16)
        n1 = stabilization_check(m1, lpo(), xs[:8], 4, 100_000, 16)
        nc = stabilization_check(c, lpo(), xs[:8], 4, 100_000, 16)
        assert nc is not None and nc <= n0 + n1, (a, b, n0, n1, nc)


def test_criterion_06_weihrauch_algebra():
    for n, m in ((1, 1), (2, 2), (2, 3)):
        rep = algebra_identity_suite(lpo_problem(), n, m, prefix_len=64)
        for law, r in rep.laws:
            assert r.passed and len(r.per_sample) >= 20, (n, m, law)


def test_criterion_07_split_join():
    for name in ("lpo_copy", "lpo_window", "lpo_then_copy", "copy_then_lpo", "lpo_flipped"):
        m = corpus.load(name)
        xs = binary_inputs(20, seed=35)
        G, F = split_single_call(m, xs)
        joined = join_witness(F, G)
        for x in xs:
            assert _obs(joined, lpo(), x, 1) == _obs(m, lpo(), x, 1), (name, x)


def _nat_suite():
    out = [EvSeq((), 0), EvSeq((), 12), EvSeq((12,) * 16, 0), EvSeq((0,) * 16, 12),
           EvSeq(tuple(range(13)), 0), EvSeq((5,), 3)]
    rng = random.Random(36)
    while len(out) < 500:
        out.append(EvSeq(tuple(rng.randint(0, 12) for _ in range(rng.randint(0, 16))),
                         rng.randint(0, 12)))
    return out


def test_criterion_08_max_loop_law():
    for w in _nat_suite():
        value, calls, _ = max_by_lpo_loop(w)
        assert value == max_value(w) and calls == value + 1, w


def _revising_suite():
    rng = random.Random(37)
    out = [RevisingStream(EvSeq((), 0)), RevisingStream(EvSeq((MARK,) * 5, 1)),
           RevisingStream(EvSeq((1,) * 32, 0))]
    while len(out) < 500:
        p = [rng.choice((0, 1, MARK)) for _ in range(rng.randint(0, 32))]
        if p.count(MARK) <= 5:
            out.append(RevisingStream(EvSeq(tuple(p), rng.randint(0, 1))))
    return out


def test_criterion_09_revising_round_trip():
    names = ["lpo_copy", "lpo_window", "lpo_then_copy", "copy_then_lpo", "lpo_flipped",
             "query_writer", "late_one", "lpo_twice"]
    for name in names:
        m = corpus.load(name)
        for x in binary_inputs(12, seed=38):
            s = simulate_lpo_by_revising(m, x, 200_000)
            want = _obs(m, lpo(), x, 1)
            assert want.kind == "output" and revising_decode(s).take(64) == want.prefix, (name, x)
    for s in _revising_suite():
        q, out = revising_to_max(s)
        assert out(max_value(q)) == revising_decode(s)


def test_criterion_10_halting_demo():
    acc = parse_machine("machine a { start s0; s0: s -> h; h: accept; }")
    halting = [(acc, ZERO), (corpus.load("halt_after3"), ZERO),
               (corpus.load("halt_on_one"), seq("001:0")), (corpus.load("rejector"), ZERO),
               (corpus.load("window3"), seq("1:0"))]
    for subject, x in halting:
        k = next(k for k in range(1, 100) if _halts_within(subject, x, k))
        v = halting_demo(subject, Halts(k), fuel=1000, input=x)
        assert v.verdict == "halts", subject.name
    looping = [(corpus.load(n), x) for n, x in (("spin", ZERO), ("copy", seq("1:0")),
                                                 ("bitflip", ZERO), ("pingpong", ZERO),
                                                 ("halt_on_one", ZERO))]
    for subject, x in looping:
        assert halting_demo(subject, Loops(), fuel=2000, input=x).verdict == "loops", subject.name
    try:
        halting_demo(acc, Halts(10**9), fuel=10**6)
    except CertificateUnverifiable:
        pass
    else:
        raise AssertionError("a halting step beyond fuel must be unverifiable")


def _halts_within(subject, x, k):
    return halting_query(subject, k, x)[1]


def test_criterion_11_circuits():
    t0 = time.perf_counter()
    rng = random.Random(39)
    for i in range(200):
        rows, outs = random_circuit_spec(rng, max_gates=6, bound=64)
        c = parse_circuit(circuit_text(rows, outs))
        assert {k: list(v) for k, v in eval_circuit(c).items()} == brute_eval(rows, outs)
        if i % 5 == 0:
            plan = compile_to_machine(c)
            out, r = plan.evaluate()
            assert out == eval_circuit(c)
            assert r.total_calls == count_test_gates(c)
            assert plan.level_bound == 2 ** count_test_gates(c)
    assert time.perf_counter() - t0 < 30


def test_criterion_12_sequences_and_pairings():
    for i in range(200):
        for j in range(200):
            assert cantor_unpair(cantor_pair(i, j)) == (i, j)
    for k in range(20000):
        assert cantor_pair(*cantor_unpair(k)) == k
    rng = random.Random(40)
    for _ in range(300):
        t = [EvSeq(tuple(rng.randint(0, 1) for _ in range(rng.randint(0, 16))), 0)
             for _ in range(rng.randint(1, 8))]
        assert list(lambda_unpack(lambda_pack(t), len(t)).components) == t
    for _ in range(50):
        tail = rng.randint(0, 1)
        a, b = (EvSeq(tuple(rng.randint(0, 1) for _ in range(rng.randint(0, 12))), tail)
                for _ in range(2))
        assert split_pair(interleave_pair(a, b)) == (a, b)
    for name in corpus.names():
        m = corpus.load(name)
        assert parse_machine(print_machine(m)) == m
