import pytest
from hypothesis import given, strategies as st

from helpers import binary_inputs
from t2m import corpus
from t2m.dsl import parse_machine
from t2m.errors import (BudgetExceeded, CertificateRefuted, CertificateUnverifiable,
                        DecodeError)
from t2m.machine import run
from t2m.models import (MARK, Halts, Loops, RevisingStream, halting_demo, max_by_lpo_loop,
                        parse_certificate, revising_decode, revising_from_bits,
                        revising_to_bits, revising_to_max, simulate_lpo_by_revising, threshold)
from t2m.oracle import lpo, max_value, observe, run_with_oracle
from t2m.seq import ONE_ZEROS, ZERO, EvSeq, seq

nat_seqs = st.builds(lambda p, t: EvSeq(tuple(p), t),
                     st.lists(st.integers(0, 12), max_size=16), st.integers(0, 12))


def _rs(*symbols, tail=0):
    return RevisingStream(EvSeq(tuple(symbols), tail))


# -- revising streams ------------------------------------------------------------------

def test_revising_decode():
    assert revising_decode(_rs(1, 0, MARK, 1, 1)) == seq("11:0")
    assert revising_decode(_rs(1, 0, 1)) == seq("101:0")
    assert revising_decode(_rs(MARK, MARK, 0, 1)) == seq("01:0")
    assert _rs(MARK, 1, MARK).mark_count == 2
    with pytest.raises(ValueError):
        _rs(1, tail=MARK)


def test_block_encoding():
    s = _rs(1, 0, MARK, 1)
    assert revising_to_bits(s) == seq("01001001:0")
    assert revising_from_bits(revising_to_bits(s)) == s
    with pytest.raises(DecodeError):
        revising_from_bits(seq("11:0"))
    with pytest.raises(ValueError):
        revising_to_bits(_rs(1, tail=1))


def test_revising_to_max_examples():
    q, out = revising_to_max(_rs(1, 0, MARK, 1, 1))
    assert q == seq("0,0,3,3,3:3") and max_value(q) == 3
    assert out(3) == seq("11:0")
    q, out = revising_to_max(_rs(1, 0, 1, tail=1))
    assert max_value(q) == 0 and out(0) == seq("101:1")
    q, out = revising_to_max(_rs(MARK, 1, 1, MARK, 0))
    assert max_value(q) == 4 and out(4) == seq("0:0")


@given(st.lists(st.sampled_from([0, 1, MARK]), max_size=32)
       .filter(lambda p: p.count(MARK) <= 5), st.integers(0, 1))
def test_revising_max_round_trip(prefix, tail):
    s = RevisingStream(EvSeq(tuple(prefix), tail))
    q, out = revising_to_max(s)
    assert out(max_value(q)) == revising_decode(s)


# -- MAX by LPO ---------------------------------------------------------------------------

def test_threshold():
    assert threshold(seq("2,0,1:0"), 0) == seq("1,0,1:0")
    assert threshold(seq("2,0,1:0"), 1) == seq("1,0,0:0")
    assert threshold(seq(":4"), 3) == seq(":1")


@pytest.mark.parametrize("w,value,calls", [("2,0,1:0", 2, 3), (":0", 0, 1), (":4", 4, 5)])
def test_max_by_lpo_examples(w, value, calls):
    v, c, trace = max_by_lpo_loop(seq(w))
    assert (v, c) == (value, calls)
    assert [a for _, _, a in trace] == [ONE_ZEROS] * value + [ZERO]


def test_max_budget():
    with pytest.raises(BudgetExceeded):
        max_by_lpo_loop(seq("5:0"), oracle_budget=5)
    assert max_by_lpo_loop(seq("5:0"), oracle_budget=6)[0] == 5


@given(nat_seqs)
def test_loop_law(w):
    v, c, _ = max_by_lpo_loop(w)
    assert v == max_value(w) and c == v + 1


# -- simulating LPO calls by revising -----------------------------------------------------

ZERO_QUERY = parse_machine("""machine zq { start s0; s0: s -> q; q: ? cont=k query=z;
  z: w3=0 -> d; d: accept; k: t2 -> a0, a1; a0: w3=0 -> h; a1: w3=1 -> h; h: accept; }""")


def _depth_one(m, x, k=64):
    return observe(run_with_oracle(m, lpo(), x, 1, 200_000, detect_cycles=True,
                                   prefix_goal=k), k)


def test_query_without_ones_emits_no_mark():
    s = simulate_lpo_by_revising(ZERO_QUERY, ZERO, 10_000)
    assert s.mark_count == 0
    assert revising_decode(s).take(8) == (0,) * 8
    assert _depth_one(ZERO_QUERY, ZERO, 8).prefix == (0,) * 8


def test_late_one_emits_exactly_one_mark():
    m = corpus.load("late_one")
    s = simulate_lpo_by_revising(m, ZERO, 200_000)
    assert s.mark_count == 1
    assert revising_decode(s).take(64) == _depth_one(m, ZERO).prefix


def test_query_free_machine_has_no_marks():
    m = corpus.load("bitflip")
    for x in binary_inputs(8, seed=21):
        s = simulate_lpo_by_revising(m, x, 200_000)
        assert s.mark_count == 0
        assert revising_decode(s).take(64) == observe(run(m, x, 200_000, detect_cycles=True),
                                                      64).prefix


@pytest.mark.parametrize("name", ["lpo_copy", "lpo_window", "lpo_then_copy", "copy_then_lpo",
                                  "lpo_flipped", "query_writer", "late_one", "lpo_twice"])
def test_revising_matches_depth_one(name):
    m = corpus.load(name)
    for x in binary_inputs(12, seed=22):
        s = simulate_lpo_by_revising(m, x, 200_000)
        r = run_with_oracle(m, lpo(), x, 1, 200_000, detect_cycles=True, prefix_goal=64)
        obs = observe(r, 64)
        assert obs.kind == "output"
        assert revising_decode(s).take(64) == obs.prefix
        ones = sum(1 for c in r.calls if c.answer == ONE_ZEROS)
        assert s.mark_count == ones


# -- halting ---------------------------------------------------------------------------

def test_parse_certificate():
    assert parse_certificate("halts:5") == Halts(5)
    assert parse_certificate(" Loops ") == Loops()
    with pytest.raises(ValueError):
        parse_certificate("maybe")


def test_halting_examples():
    acc = parse_machine("machine a { start s0; s0: s -> h; h: accept; }")
    v = halting_demo(acc, Halts(1), fuel=100)
    assert v.verdict == "halts" and v.answer == ONE_ZEROS
    v = halting_demo(corpus.load("spin"), Loops(), fuel=1000)
    assert v.verdict == "loops" and v.query == ZERO and v.checked_steps == 1000
    with pytest.raises(CertificateUnverifiable):
        halting_demo(acc, Halts(10**9), fuel=10**6)


def test_halting_refuted_certificates():
    with pytest.raises(CertificateRefuted):
        halting_demo(corpus.load("spin"), Halts(50), fuel=100)
    with pytest.raises(CertificateRefuted):
        halting_demo(corpus.load("halt_after3"), Loops(), fuel=100)


def test_halting_query_shape():
    v = halting_demo(corpus.load("halt_after3"), Halts(10), fuel=100)
    assert v.query.prefix[-1] == 1 and set(v.query.prefix[:-1]) <= {0}
    assert v.query.tail == 0 and v.checked_steps == len(v.query.prefix) - 1
