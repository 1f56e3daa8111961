"""Problems, reduction witnesses and sample-level reducibility checks.

A :class:`Problem` is a multi-valued map given by an evaluator returning a
finite answer set, together with a list of sample inputs.  A check runs the
witness on every sample and every answer of the target problem; it can
confirm a witness or refute it, never prove that no witness exists.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import (DecodeError, IndexOutOfRange, MixedTails, T2MError, TailNotZero,
                     WitnessDiverged)
from .machine import MachineGraph, RunResult, run
from .models import threshold
from .oracle import lpo_value, max_value
from .seq import (ZERO, EvSeq, decode_index, decode_naturals, decode_symbol_index,
                  encode_index, encode_natural, encode_naturals, encode_symbol_index,
                  interleave_pair, lambda_pack, lambda_unpack, power_join, power_split,
                  power_view, split_pair, split_view)


def _key(s):
    return s.sort_key() if isinstance(s, EvSeq) else (1 << 30, str(s))


@dataclass
class Problem:
    name: str
    domain_samples: list
    eval: Callable  # EvSeq -> non-empty finite set of EvSeq
    single_valued: bool = True
    range_finite: bool = False
    domain_check: Callable = lambda x: True

    def answers(self, x) -> list:
        out = sorted(self.eval(x), key=_key)
        if not out:
            raise T2MError(f"{self.name} has no answer for {x}")
        return out

    def renamed(self, name):
        return Problem(name, self.domain_samples, self.eval, self.single_valued,
                       self.range_finite, self.domain_check)


# -- samples ------------------------------------------------------------------

def binary_samples(count: int = 24, seed: int = 0, tails=(0, 1), max_len: int = 12) -> list:
    """Deterministic binary samples: the boundary cases first, then random ones."""
    base = [EvSeq((), 0), EvSeq((1,), 0), EvSeq((0, 0, 0, 1), 0), EvSeq((), 1),
            EvSeq((0,) * 9 + (1,), 0), EvSeq((1, 0, 1), 0)]
    out = [s for s in base if s.tail in tails]
    rng = random.Random(seed)
    seen = set(out)
    while len(out) < count:
        n = rng.randint(0, max_len)
        s = EvSeq(tuple(rng.randint(0, 1) for _ in range(n)), rng.choice(tails))
        if rng.random() < 0.25:
            s = EvSeq((0,) * n, s.tail)
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out[:count]


def natural_samples(count: int = 24, seed: int = 0, bound: int = 6, max_len: int = 10,
                    tail_zero: bool = True) -> list:
    rng = random.Random(seed)
    out = [EvSeq((), 0), EvSeq((bound,), 0), EvSeq((0, 1, 0, bound - 1), 0)]
    seen = set(out)
    while len(out) < count:
        n = rng.randint(0, max_len)
        s = EvSeq(tuple(rng.randint(0, bound) for _ in range(n)),
                  0 if tail_zero else rng.randint(0, bound))
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out[:count]


def _pairs(xs, ys, limit):
    """Up to ``limit`` deterministic pairs with equal tails."""
    out = []
    for k in range(len(xs) * len(ys)):
        a = xs[k % len(xs)]
        b = ys[(k * 7 + 3) % len(ys)]
        if a.tail == b.tail:
            out.append((a, b))
        if len(out) >= limit:
            break
    return out


# -- catalog ------------------------------------------------------------------

def lpo_problem(samples: Optional[list] = None) -> Problem:
    return Problem("lpo", samples or binary_samples(), lambda x: {lpo_value(x)},
                   range_finite=True, domain_check=EvSeq.is_binary)


def max_problem(encoded: bool = True, samples: Optional[list] = None, bound: int = 6) -> Problem:
    """MAX; ``encoded`` works on unary-delimited binary streams with answer ``1^n 0^N``."""
    if encoded:
        samples = samples or [encode_naturals(s) for s in natural_samples(bound=bound)]
        return Problem("max", samples,
                       lambda x: {encode_natural(max_value(decode_naturals(x)))},
                       domain_check=lambda x: x.is_binary() and x.tail == 0)
    samples = samples or natural_samples(bound=bound, tail_zero=False)
    return Problem("max_n", samples, lambda w: {EvSeq((max_value(w),), 0)})


def bounded_max_problem(bound: int, samples: Optional[list] = None) -> Problem:
    """MAX on tail-0 streams of naturals at most ``bound``; answer ``n:0``."""
    samples = samples or natural_samples(bound=bound)

    def ev(w):
        if max_value(w) > bound:
            raise T2MError(f"{w} exceeds the bound {bound}")
        return {EvSeq((max_value(w),), 0)}
    return Problem(f"max<={bound}", samples, ev, range_finite=True,
                   domain_check=lambda w: w.tail == 0 and max_value(w) <= bound)


def identity_problem(samples: Optional[list] = None) -> Problem:
    return Problem("id", samples or binary_samples(), lambda x: {x})


def machine_problem(m: MachineGraph, samples: Optional[list] = None,
                    fuel: int = 1_000_000) -> Problem:
    """The function computed by a query-free machine (exact outputs only)."""
    def ev(x):
        r = run(m, x, fuel, detect_cycles=True)
        if not r.status.has_output:
            raise WitnessDiverged(x, f"{m.name}: {r.status.value}")
        return {r.output}
    return Problem(f"machine:{m.name}", samples or binary_samples(), ev)


def unit_problem() -> Problem:
    return Problem("unit", [ZERO], lambda x: {ZERO}, range_finite=True)


# -- operators ----------------------------------------------------------------

def product(f: Problem, g: Problem, limit: int = 24) -> Problem:
    def ev(s):
        x1, x2 = split_view(s)
        return {power_view([a, b]) for a in f.answers(x1) for b in g.answers(x2)}
    samples = [interleave_pair(a, b) for a, b in _pairs(f.domain_samples, g.domain_samples, limit)]
    return Problem(f"<{f.name},{g.name}>", samples, ev,
                   f.single_valued and g.single_valued, f.range_finite and g.range_finite)


def power(f: Problem, n: int, limit: int = 24) -> Problem:
    """``<f>^n`` on the layout ``<<x0, x1>, x2>...``; ``n = 0`` is the unit problem."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return unit_problem()
    acc = f
    for _ in range(n - 1):
        acc = product(acc, f, limit)
    return acc.renamed(f"<{f.name}>^{n}")


def coproduct(fs: Sequence[Problem], encoding: str = "unary", limit: int = 24) -> Problem:
    """Indexed union: input ``i x`` is answered by ``i f_i(x)``."""
    fs = list(fs)
    if not fs:
        raise ValueError("coproduct needs at least one problem")
    enc, dec = {"unary": (encode_index, decode_index),
                "symbol": (encode_symbol_index, decode_symbol_index)}[encoding]

    def ev(s):
        i, x = dec(s)
        if i >= len(fs):
            raise IndexOutOfRange(f"index {i} with {len(fs)} components")
        return {enc(i, y) for y in fs[i].answers(x)}

    samples = []
    for k in range(max(len(f.domain_samples) for f in fs)):
        for i, f in enumerate(fs):
            if k < len(f.domain_samples) and len(samples) < limit:
                samples.append(enc(i, f.domain_samples[k]))
    return Problem("[" + ";".join(f.name for f in fs) + "]", samples, ev,
                   all(f.single_valued for f in fs), all(f.range_finite for f in fs))


def parallelize_finite(f: Problem, count: int, limit: int = 24) -> Problem:
    """``count`` independent instances packed with the lambda pairing."""
    if count < 1:
        raise ValueError("count must be positive")

    def ev(s):
        comps = lambda_unpack(s, count).components
        return {lambda_pack(list(ys)) for ys in itertools.product(*(f.answers(c) for c in comps))}

    base = [x for x in f.domain_samples if x.tail == 0] or [ZERO]
    samples = []
    for k in range(limit):
        samples.append(lambda_pack([base[(k + 5 * i) % len(base)] for i in range(count)]))
    return Problem(f"{f.name}*{count}", samples, ev, f.single_valued, f.range_finite)


def parallelize_truncated(f: Problem, count: int, limit: int = 24) -> Problem:
    """Full parallelization cut down to ``count`` components (all others read as 0^N)."""
    p = parallelize_finite(f, count, limit)
    return p.renamed(f"hat({f.name})|{count}")


# -- witnesses and checks -----------------------------------------------------

@dataclass
class ReductionWitness:
    """Pre-processor ``G`` and post-processor ``F``.

    Each is a query-free :class:`MachineGraph` or a callable.  A graph ``F``
    reads the pair ``<x, y>``; a callable ``F`` is called as ``F(x, y)`` and
    may return a sequence or a :class:`RunResult`.
    """

    G: object
    F: object
    name: str = ""


@dataclass
class CheckReport:
    relation: str
    per_sample: list = field(default_factory=list)  # (input, expected, produced, pass)
    truncation: Optional[int] = None

    @property
    def passed(self) -> bool:
        return bool(self.per_sample) and all(row[3] for row in self.per_sample)

    def to_json(self):
        return {
            "relation": self.relation,
            "passed": self.passed,
            "truncation": self.truncation,
            "per_sample": [
                {"input": str(x), "expected": [_fmt(e) for e in exp],
                 "produced": [_fmt(p) for p in prod], "pass": ok}
                for x, exp, prod, ok in self.per_sample
            ],
        }


def _fmt(s):
    if isinstance(s, str):
        return s
    if isinstance(s, tuple):
        return "".join(map(str, s)) if all(v < 10 for v in s) else ",".join(map(str, s))
    return str(s)


class _Prefix:
    """A sequence known only up to a finite prefix."""

    def __init__(self, cells):
        self.cells = tuple(cells)

    def at(self, i):
        if i >= len(self.cells):
            raise WitnessDiverged(self.cells, f"needed symbol {i}")
        return self.cells[i]

    def take(self, k):
        return tuple(self.at(i) for i in range(k))


def apply_pre(G, x, fuel: int = 1_000_000) -> EvSeq:
    if isinstance(G, MachineGraph):
        r = run(G, x, fuel, detect_cycles=True)
        if not r.status.has_output:
            raise WitnessDiverged(x, f"{G.name}: {r.status.value}")
        return r.output
    y = G(x)
    if isinstance(y, RunResult):
        if not y.status.has_output:
            raise WitnessDiverged(x, y.status.value)
        y = y.output
    return y


def apply_post(F, x, y, prefix_len: int, fuel: int = 1_000_000):
    """F on (x, y): an exact sequence or a prefix of at least ``prefix_len`` symbols."""
    if isinstance(F, MachineGraph):
        r = run(F, power_view([x, y]), fuel, detect_cycles=True, prefix_goal=prefix_len)
    else:
        r = F(x, y)
    if not isinstance(r, RunResult):
        return r
    if isinstance(r.output, EvSeq):
        return r.output
    if len(r.output) >= prefix_len:
        return _Prefix(r.output)
    raise WitnessDiverged(x, f"post-processor: {r.status.value} after {len(r.output)} symbols")


def check_weihrauch(f: Problem, g: Problem, w: ReductionWitness, prefix_len: int = 64,
                    fuel: int = 1_000_000, samples: Optional[Sequence] = None,
                    relation: str = "W", truncation: Optional[int] = None) -> CheckReport:
    """Check ``F(x, y)`` against ``f(x)`` for every sample ``x`` and every ``y`` in ``g(G(x))``."""
    report = CheckReport(relation, truncation=truncation)
    for x in (f.domain_samples if samples is None else samples):
        expected = [e.take(prefix_len) for e in f.answers(x)]
        try:
            q = apply_pre(w.G, x, fuel)
        except (TailNotZero, MixedTails, DecodeError) as e:
            # the query has no eventually constant representation
            report.per_sample.append((x, expected, [str(e)], False))
            continue
        if not g.domain_check(q):
            report.per_sample.append((x, expected, [], False))
            continue
        produced, ok = [], True
        for y in g.answers(q):
            out = apply_post(w.F, x, y, prefix_len, fuel).take(prefix_len)
            produced.append(out)
            ok = ok and out in expected
        report.per_sample.append((x, expected, produced, ok))
    return report


def check_bc(f, g, n, witness, **kw) -> CheckReport:
    return check_weihrauch(f, power(g, n), witness, relation=f"W_bc({n})", **kw)


def check_bf(f, g, witness, bound: int = 4, **kw) -> CheckReport:
    """Against ``[<g>^0; <g>^1; ...; <g>^bound]`` (the coproduct cut at ``bound``)."""
    target = coproduct([power(g, k) for k in range(bound + 1)])
    return check_weihrauch(f, target, witness, relation="W_bf", truncation=bound, **kw)


def check_f(f, g, count, witness, **kw) -> CheckReport:
    return check_weihrauch(f, parallelize_finite(g, count), witness, relation=f"W_f({count})", **kw)


def check_hat(f, g, count, witness, **kw) -> CheckReport:
    return check_weihrauch(f, parallelize_truncated(g, count), witness, relation="W_hat",
                           truncation=count, **kw)


# -- standard witnesses -------------------------------------------------------

def reflexivity_witness() -> ReductionWitness:
    """``G`` copies, ``F`` reads the answer off the odd positions."""
    from .corpus import load
    return ReductionWitness(load("copy"), load("odd_proj"), "reflexivity")


def lpo_to_max_witness() -> ReductionWitness:
    """LPO from encoded MAX: ``G`` writes bit b as ``1^b 0``; ``F`` outputs the answer's first bit."""
    from .corpus import load
    return ReductionWitness(load("unary_bits"), load("answer_bit"), "threshold")


def bounded_max_witness(bound: int) -> ReductionWitness:
    """MAX on symbols at most ``bound`` from ``bound`` parallel LPO instances."""
    def G(w):
        return power_join([threshold(w, k) for k in range(bound)])

    def F(w, y):
        comps = power_split(y, bound) if bound > 1 else [y]
        return EvSeq((sum(c.at(0) for c in comps),), 0)
    return ReductionWitness(G, F, f"thresholds<{bound}")


def embedding_witness(count: int = 1) -> ReductionWitness:
    """``f`` into its finite parallelization: use component 0."""
    def G(x):
        return lambda_pack([x])

    def F(x, y):
        return lambda_unpack(y, 1).component(0)
    return ReductionWitness(G, F, "embedding")


def lift_witness(w: ReductionWitness, n: int, prefix_len: int = 64,
                 fuel: int = 1_000_000) -> ReductionWitness:
    """``(<F>^n, <G>^n)``: apply the witness componentwise on the n-fold layout."""
    def G(s):
        return power_join([apply_pre(w.G, x, fuel) for x in power_split(s, n)])

    def F(s, y):
        xs = power_split(s, n)
        ys = power_split(y, n)
        return power_view([apply_post(w.F, x, b, prefix_len, fuel) for x, b in zip(xs, ys)])
    return ReductionWitness(G, F, f"<{w.name}>^{n}")


# -- algebraic laws -----------------------------------------------------------

def _nested_split(s, n, m):
    return [c for outer in power_split(s, n) for c in power_split(outer, m)]


def _nested_join(items, n, m):
    return power_join([power_join(items[i * m:(i + 1) * m]) for i in range(n)])


def _nested_view(items, n, m):
    return power_view([power_view(items[i * m:(i + 1) * m]) for i in range(n)])


@dataclass
class AlgebraReport:
    h: str
    n: int
    m: int
    laws: list = field(default_factory=list)  # (law, CheckReport)

    @property
    def passed(self) -> bool:
        return all(r.passed for _, r in self.laws)


def algebra_identity_suite(h: Problem, n: int, m: int, samples: Optional[list] = None,
                           prefix_len: int = 64, min_samples: int = 20) -> AlgebraReport:
    """Check the re-indexing laws on samples.

    * ``<<h>^m>^n`` and ``<h>^(nm)`` reduce to each other,
    * ``<h, [<h>^1; ...; <h>^m]>`` and ``[<h, <h>^1>; ...]`` reduce to each other,
    * ``h`` embeds into its finite parallelization,
    * the finite parallelization at count 2 of the one at count 2 reduces to
      the one at count 4 and back.
    """
    base = list(samples or [x for x in h.domain_samples if x.tail == 0])
    for x in binary_samples(4 * min_samples, seed=1, tails=(0,)):
        if len(base) >= min_samples:
            break
        if x not in base and h.domain_check(x):
            base.append(x)
    h = Problem(h.name, base, h.eval, h.single_valued, h.range_finite, h.domain_check)
    report = AlgebraReport(h.name, n, m)
    limit = max(min_samples, 24)

    nested = power(power(h, m, limit), n, limit)
    flat = power(h, n * m, limit)
    to_flat = ReductionWitness(lambda s: power_join(_nested_split(s, n, m)),
                               lambda s, y: _nested_view(power_split(y, n * m), n, m),
                               "regroup")
    to_nested = ReductionWitness(lambda s: _nested_join(power_split(s, n * m), n, m),
                                 lambda s, y: power_view(_nested_split(y, n, m)),
                                 "flatten")
    report.laws.append(("power nesting: nested <= flat",
                        check_weihrauch(nested, flat, to_flat, prefix_len)))
    report.laws.append(("power nesting: flat <= nested",
                        check_weihrauch(flat, nested, to_nested, prefix_len)))

    gs = [power(h, i + 1, limit) for i in range(m)]
    left = product(h, coproduct(gs), limit)
    right = coproduct([product(h, g, limit) for g in gs])
    report.laws.append(("distributivity: left <= right",
                        check_weihrauch(left, right, _distribute(), prefix_len)))
    report.laws.append(("distributivity: right <= left",
                        check_weihrauch(right, left, _collect(), prefix_len)))

    report.laws.append(("parallel embedding",
                        check_weihrauch(h, parallelize_finite(h, max(n, m), limit),
                                        embedding_witness(), prefix_len)))

    twice = parallelize_finite(parallelize_finite(h, 2, limit), 2, limit)
    four = parallelize_finite(h, 4, limit)
    report.laws.append(("parallel idempotence: twice <= once",
                        check_weihrauch(twice, four, _unnest_parallel(), prefix_len)))
    report.laws.append(("parallel idempotence: once <= twice",
                        check_weihrauch(four, twice, _nest_parallel(), prefix_len)))
    return report


def _distribute():
    def G(s):
        x, t = split_pair(s)
        i, z = decode_index(t)
        return encode_index(i, interleave_pair(x, z))

    def F(s, y):
        i, ab = decode_index(y)
        a, b = split_view(ab)
        return power_view([a, encode_index(i, b)])
    return ReductionWitness(G, F, "distribute")


def _collect():
    def G(s):
        i, xz = decode_index(s)
        x, z = split_pair(xz)
        return interleave_pair(x, encode_index(i, z))

    def F(s, y):
        a, t = split_view(y)
        i, b = decode_index(t)
        return encode_index(i, power_view([a, b]))
    return ReductionWitness(G, F, "collect")


def _unnest_parallel():
    def G(s):
        outer = lambda_unpack(s, 2).components
        return lambda_pack([c for o in outer for c in lambda_unpack(o, 2).components])

    def F(s, y):
        c = lambda_unpack(y, 4).components
        return lambda_pack([lambda_pack(c[0:2]), lambda_pack(c[2:4])])
    return ReductionWitness(G, F, "unnest")


def _nest_parallel():
    def G(s):
        c = lambda_unpack(s, 4).components
        return lambda_pack([lambda_pack(c[0:2]), lambda_pack(c[2:4])])

    def F(s, y):
        outer = lambda_unpack(y, 2).components
        return lambda_pack([c for o in outer for c in lambda_unpack(o, 2).components])
    return ReductionWitness(G, F, "nest")


# -- names used on the command line -------------------------------------------

def resolve_problem(spec: str, fuel: int = 1_000_000) -> Problem:
    """``lpo``, ``max``, ``max_n``, ``maxle:<k>``, ``id``, ``<file>.t2m`` or
    ``power:<p>^<n>``."""
    spec = spec.strip()
    if spec == "lpo":
        return lpo_problem()
    if spec == "max":
        return max_problem(True)
    if spec == "max_n":
        return max_problem(False)
    if spec == "id":
        return identity_problem()
    if spec.startswith("maxle:"):
        return bounded_max_problem(int(spec[6:]))
    if spec.startswith("power:") and "^" in spec:
        a, k = spec[6:].rsplit("^", 1)
        return power(resolve_problem(a, fuel), int(k))
    if spec.endswith(".t2m"):
        from .dsl import load_machine
        return machine_problem(load_machine(spec), fuel=fuel)
    raise T2MError(f"unknown problem {spec!r}")
