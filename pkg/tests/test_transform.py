import pytest

from helpers import binary_inputs
from t2m import corpus
from t2m.dsl import parse_machine
from t2m.errors import MultipleCalls
from t2m.machine import MachineGraph, Query, Reject, run
from t2m.oracle import computable_oracle, lpo, observe, run_with_oracle, stabilization_check
from t2m.seq import ONE_ZEROS, ZERO, seq
from t2m.transform import (NO_CALL, ComposedMachine, JoinedMachine, compose_machines,
                           count_queries, inline_computable_oracle, join_witness, layer_name,
                           layer_violations, separate_layers, split_single_call)


def _obs(m, o, x, depth, prefix=64, fuel=200_000):
    return observe(run_with_oracle(m, o, x, depth, fuel, detect_cycles=True,
                                   prefix_goal=prefix).base, prefix)


# -- layer separation ---------------------------------------------------------------

def test_layer_counts():
    # one start vertex plus n+1 copies of the other four vertices
    five = parse_machine("""machine five { start s0; s0: s -> q; q: ? cont=k query=w;
      w: w3=1 -> h; h: accept; k: accept; }""")
    assert len(five) == 5
    assert len(separate_layers(five, 2).graph) == 1 + 3 * 4
    assert len(separate_layers(five, 1).graph) == 1 + 2 * 4


def test_layer_structure():
    g = separate_layers(corpus.load("nested2"), 2).graph
    assert layer_violations(g, 2) == []
    assert g.layer_tags[g.start] == 0
    q_top = layer_name("q", 0)
    assert g.successors[q_top][1].endswith("__L1")
    top_layer_queries = [v for v, lab in g.labels.items()
                         if isinstance(lab, Query) and g.layer_tags[v] == 2]
    assert top_layer_queries == []
    rejected = [v for v in g.labels if v.endswith("__L2") and isinstance(g.labels[v], Reject)]
    assert layer_name("q", 2) in rejected and g.successors[layer_name("q", 2)] == ()


def test_layer_violations_detects_broken_tags():
    g = separate_layers(corpus.load("lpo_copy"), 1).graph
    tags = dict(g.layer_tags)
    tags[layer_name("c", 1)] = 0
    bad = MachineGraph(g.name, g.labels, g.successors, g.start, tags)
    assert layer_violations(bad, 1)


@pytest.mark.parametrize("name", ["copy", "bitflip", "window3", "tape2_echo"])
def test_query_free_layers_behave_identically(name):
    m = corpus.load(name)
    lm = separate_layers(m, 3)
    for x in binary_inputs(20, seed=11):
        for d in (0, 3):
            assert _obs(lm, lpo(), x, d) == _obs(m, lpo(), x, d)


@pytest.mark.parametrize("name,n", [("lpo_copy", 1), ("query_writer", 1), ("nested2", 2),
                                    ("lpo_twice", 1), ("nested3", 3), ("depth_chain", 2)])
def test_layers_preserve_behaviour_at_depth_n(name, n):
    m = corpus.load(name)
    lm = separate_layers(m, n)
    for x in binary_inputs(12, seed=12) + [seq("111:0"), seq("11:0")]:
        assert _obs(lm, lpo(), x, n) == _obs(m, lpo(), x, n)


# -- composition --------------------------------------------------------------------

def test_compose_identity_and_involution():
    copy, flip = corpus.load("copy"), corpus.load("bitflip")
    cc = compose_machines(copy, copy)
    ff = compose_machines(flip, flip)
    assert isinstance(cc, ComposedMachine)
    for x in binary_inputs(20, seed=7):
        want = _obs(copy, lpo(), x, 0, 32)
        assert _obs(cc, lpo(), x, 0, 32) == want
        assert _obs(ff, lpo(), x, 0, 32) == want


def test_compose_associative():
    a, b, c = corpus.load("bitflip"), corpus.load("shift"), corpus.load("lpo_copy")
    left = compose_machines(a, compose_machines(b, c))
    right = compose_machines(compose_machines(a, b), c)
    for x in binary_inputs(15, seed=8):
        assert _obs(left, lpo(), x, 1, 32) == _obs(right, lpo(), x, 1, 32)


def test_compose_stabilization_depth():
    m = compose_machines(corpus.load("bitflip"), corpus.load("nested2"))
    xs = binary_inputs(8, seed=9)
    assert stabilization_check(m, lpo(), xs, 3, 100_000, 16) == 2


def test_compose_upstream_failure_propagates():
    m = compose_machines(corpus.load("rejector"), corpus.load("copy"))
    r = run_with_oracle(m, lpo(), seq("1:0"), 1, 10_000, detect_cycles=True, prefix_goal=8)
    assert not r.status.has_output and len(r.output) < 8


# -- query counting --------------------------------------------------------------

def test_count_queries():
    three = parse_machine("""machine three { start s0; s0: s -> q1;
      q1: ? cont=q2 query=a; q2: ? cont=q3 query=a; q3: ? cont=h query=a;
      a: accept; h: accept; }""")
    assert count_queries(run_with_oracle(three, lpo(), ZERO, 1, 1000)) == (3, 3)
    two_inside = parse_machine("""machine nest { start s0; s0: s -> q;
      q: ? cont=h query=i1; i1: ? cont=i2 query=a; i2: ? cont=a query=a;
      a: accept; h: accept; }""")
    assert count_queries(run_with_oracle(two_inside, lpo(), ZERO, 2, 1000)) == (3, 1)
    assert count_queries(run_with_oracle(corpus.load("copy"), lpo(), ZERO, 1, 100)) == (0, 0)


# -- split and join ----------------------------------------------------------------

SINGLE = ["lpo_copy", "lpo_window", "lpo_then_copy", "copy_then_lpo", "lpo_flipped",
          "query_writer", "late_one"]


@pytest.mark.parametrize("name", SINGLE)
def test_split_reconstructs_machine(name):
    m = corpus.load(name)
    xs = binary_inputs(12, seed=13)
    G, F = split_single_call(m, xs)
    o = lpo()
    for x in xs:
        q = G(x)
        r = F(x, o(q) if q is not NO_CALL else NO_CALL, prefix_goal=64)
        assert observe(r, 64) == _obs(m, o, x, 1)


def test_split_query_free_and_two_calls():
    copy = corpus.load("copy")
    G, F = split_single_call(copy, binary_inputs(4))
    assert G(seq("1:0")) is NO_CALL
    assert observe(F(seq("1:0"), NO_CALL, prefix_goal=8), 8).prefix == (1,) + (0,) * 7
    with pytest.raises(MultipleCalls) as e:
        split_single_call(corpus.load("lpo_twice"), [seq("11:0")])
    assert e.value.sample == seq("11:0")


def test_join_graph_computes_lpo():
    m = join_witness(corpus.load("odd_proj"), corpus.load("copy"))
    assert isinstance(m, MachineGraph)
    assert len(m.query_vertices()) == 1
    for x in binary_inputs(20, seed=14):
        assert _obs(m, lpo(), x, 1) == observe(
            run(corpus.load("copy"), lpo()(x), 1000, detect_cycles=True), 64)


def test_join_ignoring_answer_is_plain_machine():
    F = corpus.load("even_proj")
    m = join_witness(F, corpus.load("copy"))
    copy = corpus.load("copy")
    for x in binary_inputs(10, seed=15, tails=(0,)):
        assert _obs(m, lpo(), x, 1, 32) == _obs(copy, lpo(), x, 0, 32)


def test_join_with_tape_two_falls_back():
    m = join_witness(corpus.load("tape2_echo"), corpus.load("copy"))
    assert isinstance(m, JoinedMachine)


@pytest.mark.parametrize("name", SINGLE[:5])
def test_join_of_split_is_machine(name):
    m = corpus.load(name)
    xs = binary_inputs(20, seed=16)
    G, F = split_single_call(m, xs)
    joined = join_witness(F, G)
    for x in xs:
        assert _obs(joined, lpo(), x, 1) == _obs(m, lpo(), x, 1)


# -- computable oracles -------------------------------------------------------------

@pytest.mark.parametrize("name,depth", [("lpo_copy", 1), ("lpo_twice", 1), ("copy", 1),
                                        ("nested2", 2), ("lpo_branchy", 1)])
def test_inlining_agrees(name, depth):
    rep = inline_computable_oracle(corpus.load(name), corpus.load("copy"), depth,
                                   binary_inputs(20, seed=17), fuel=50_000)
    assert rep.passed and len(rep.per_sample) == 20


def test_inlining_divergent_query_both_sides():
    per = parse_machine("""machine per { start s0; s0: s -> q; q: ? cont=k query=p;
      p: w3=0 -> p1; p1: w3=1 -> p; k: accept; }""")
    rep = inline_computable_oracle(per, corpus.load("copy"), 1, [ZERO, ONE_ZEROS])
    assert rep.passed
    assert all(row[1].kind == "none" for row in rep.per_sample)


def test_computable_copy_oracle_through_layers():
    o = computable_oracle(corpus.load("copy"), 50_000)
    for name, n in (("lpo_copy", 1), ("nested2", 2)):
        m = corpus.load(name)
        lm = separate_layers(m, n)
        for x in binary_inputs(8, seed=18):
            assert _obs(lm, o, x, n) == _obs(m, o, x, n)
