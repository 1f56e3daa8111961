"""Shared sample generators for the test suite."""
import random

from t2m.seq import EvSeq


def binary_inputs(count, seed=0, max_len=10, tails=(0, 1)):
    """Deterministic binary samples; the first few are boundary cases."""
    rng = random.Random(seed)
    fixed = [EvSeq((), 0), EvSeq((), 1), EvSeq((1,), 0), EvSeq((0, 0, 0, 1), 0)]
    out = [x for x in fixed if x.tail in tails]
    while len(out) < count:
        n = rng.randint(0, max_len)
        x = EvSeq(tuple(rng.randint(0, 1) for _ in range(n)), rng.choice(tails))
        if x not in out:
            out.append(x)
    return out[:count]


def brute_cantor_table(limit):
    """Walk the diagonals i+j = 0, 1, 2, ... counting upward in j."""
    table, k = {}, 0
    for d in range(limit + 1):
        for j in range(d + 1):
            table[(d - j, j)] = k
            k += 1
    return table


# -- single-vertex graphs for the transition table ---------------------------

def one_vertex_graph(label):
    """``s0 -> v`` where ``v`` carries ``label``; successors are accepting sinks."""
    from t2m.machine import Accept, MachineGraph, Start
    labels = {"s0": Start(), "v": label, "a": Accept(), "b": Accept()}
    succ = {"s0": ("v",), "v": ("a", "b")[:label.out_degree]}
    return MachineGraph("one", labels, succ, "s0")


def transition_cases():
    """(rule, label, before, expected) with before/expected as Configurations.

    The expected successors are written out by hand from the rule list:
    nothing changes except the vertex and the one head or cell the rule names.
    """
    from t2m.machine import (Branch, Configuration, MoveLeft, MoveRight, Start, Write)
    from t2m.seq import EvSeq
    w0, w1, w2, w3 = EvSeq((1, 0, 1), 0), EvSeq((0, 1), 1), EvSeq((1, 1, 0), 0), EvSeq((1,), 0)
    tapes = (w0, w1, w2, w3)
    heads = (1, 4, 2, 1)

    def at(v, ts=tapes, hs=heads):
        return Configuration(v, ts, hs)

    def bump(i, d):
        hs = list(heads)
        hs[i] += d
        return tuple(hs)

    cases = [("1:s", Start(), Configuration("s0", tapes, heads), at("v"))]
    # branch on each readable tape: w0[1]=0, w1[4]=1 (tail), w2[2]=0
    for i, sym in ((0, 0), (1, 1), (2, 0)):
        cases.append((f"2:t{i}", Branch(i), at("v"), at("a" if sym == 0 else "b")))
    cases.append(("2:t0=1", Branch(0), at("v", hs=(0, 4, 2, 1)), at("b", hs=(0, 4, 2, 1))))
    for i in (0, 1, 2):
        rule = 3 + i
        cases.append((f"{rule}:r{i}", MoveRight(i), at("v"), at("a", hs=bump(i, 1))))
        cases.append((f"{rule}:l{i}", MoveLeft(i), at("v"), at("a", hs=bump(i, -1))))
    for i, rule in ((1, 6), (2, 7), (3, 8)):
        for b in (0, 1):
            ts = list(tapes)
            ts[i] = tapes[i].with_symbol(heads[i], b)
            cases.append((f"{rule}:w{i}={b}", Write(i, b), at("v"),
                          at("a", ts=tuple(ts), hs=bump(i, 1))))
    return cases


# -- circuits -----------------------------------------------------------------------

CIRCUIT_OPS = ("const", "union", "intersect", "plus", "times", "test")


def random_circuit_spec(rng, max_gates=6, bound=64):
    """A random circuit as plain tuples ``(name, op, args)`` plus its outputs."""
    n = rng.randint(1, max_gates)
    rows = []
    for k in range(n):
        name = f"g{k}"
        op = "const" if k == 0 else rng.choice(CIRCUIT_OPS)
        if op == "const":
            args = sorted(rng.sample(range(bound), rng.randint(0, 4)))
        elif op == "test":
            args = [f"g{rng.randrange(k)}"]
        else:
            args = [f"g{rng.randrange(k)}", f"g{rng.randrange(k)}"]
        rows.append((name, op, args))
    outputs = sorted({rows[-1][0], f"g{rng.randrange(n)}"})
    return rows, outputs


def circuit_text(rows, outputs):
    lines = []
    for name, op, args in rows:
        if op == "const":
            lines.append(f"{name} = const {{{','.join(map(str, args))}}}")
        else:
            lines.append(f"{name} = {op} {' '.join(args)}")
    lines.append("output " + " ".join(outputs))
    return "\n".join(lines) + "\n"


def brute_eval(rows, outputs):
    """Straightforward evaluation with Python sets."""
    v = {}
    for name, op, args in rows:
        if op == "const":
            v[name] = set(args)
            continue
        a = v[args[0]]
        b = v[args[-1]]
        if op == "union":
            v[name] = a | b
        elif op == "intersect":
            v[name] = a & b
        elif op == "plus":
            v[name] = {x + y for x in a for y in b}
        elif op == "times":
            v[name] = {x * y for x in a for y in b} | {0}
        else:
            v[name] = {0} if a else set()
    return {o: sorted(v[o]) for o in outputs}
