"""Oracles and depth-budgeted oracle computation.

A query vertex met with remaining depth ``d > 0`` spawns a copy of the
current configuration at its second successor with an erased output tape,
runs it with depth ``d - 1``, hands its output to the oracle, writes the
answer on work tape 2 (head 0) and continues at the first successor.  With
``d = 0`` a query vertex acts like a reject vertex (status
``QUERY_ENCOUNTERED``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .errors import IndexOutOfRange, OracleDivergence, OracleDomainError, T2MError
from .machine import (Execution, Fuel, InputUnavailable, MachineGraph, RunResult, Status, Tape,
                      run, start_execution)
from .seq import (ONE_ZEROS, ZERO, EvSeq, decode_index, decode_naturals, encode_index,
                  encode_natural, interleave_pair, lambda_pack, lambda_unpack, split_pair)


def _least(answers):
    return min(answers, key=EvSeq.sort_key)


@dataclass(frozen=True)
class Oracle:
    """A named multi-valued map on sequences.

    ``answer`` returns a non-empty finite set.  ``select`` is the policy used
    when a single answer must be chosen (least in length-lexicographic order
    by default).
    """

    name: str
    answer: Callable[[EvSeq], frozenset]
    domain_check: Callable[[EvSeq], bool] = lambda x: True
    range_finite: bool = False
    single_valued: bool = True
    select: Callable = _least

    def answers(self, x: EvSeq) -> list:
        if not isinstance(x, EvSeq) or not self.domain_check(x):
            raise OracleDomainError(f"{x} is outside the domain of {self.name}")
        result = sorted(self.answer(x), key=EvSeq.sort_key)
        if not result:
            raise OracleDomainError(f"{self.name} has no answer for {x}")
        return result

    def __call__(self, x: EvSeq) -> EvSeq:
        return self.select(self.answers(x))


# -- built-in oracles ---------------------------------------------------------

def lpo_value(x: EvSeq) -> EvSeq:
    return ZERO if x.is_zero() else ONE_ZEROS


def lpo() -> Oracle:
    return Oracle("lpo", lambda x: frozenset({lpo_value(x)}), EvSeq.is_binary,
                  range_finite=True)


def max_value(w: EvSeq) -> int:
    return max(w.symbols())


def max_oracle(encoded: bool = True) -> Oracle:
    """MAX on sequences of naturals.

    With ``encoded`` the query is the unary-delimited binary encoding of the
    stream and the answer is ``1^n 0^N``; otherwise both sides use natural
    symbols directly and the answer is the one-symbol sequence ``n:0``.
    """
    if encoded:
        def answer(x):
            return frozenset({encode_natural(max_value(decode_naturals(x)))})
        return Oracle("max", answer, lambda x: x.is_binary() and x.tail == 0)
    return Oracle("max", lambda w: frozenset({EvSeq((max_value(w),), 0)}))


def computable_oracle(g: MachineGraph, fuel: int = 100_000) -> Oracle:
    """The oracle computed by a query-free machine.

    Runs that provably loop while writing a constant tail count as producing
    their limit output; anything else within ``fuel`` raises
    :class:`OracleDivergence`.
    """
    if not g.is_query_free():
        raise ValueError("a computable oracle must be given by a query-free machine")

    def answer(x):
        r = run(g, x, fuel, detect_cycles=True)
        if not r.status.has_output:
            raise OracleDivergence(f"{g.name} on {x}: {r.status.value} after {r.steps_used} steps")
        return frozenset({r.output})

    return Oracle(f"machine:{g.name}", answer)


def constant_oracle(y: EvSeq) -> Oracle:
    return Oracle(f"const:{y}", lambda x: frozenset({y}))


def product_oracle(o1: Oracle, o2: Oracle) -> Oracle:
    def answer(s):
        x1, x2 = split_pair(s)
        return frozenset(interleave_pair(a, b)
                         for a in o1.answers(x1) for b in o2.answers(x2))
    return Oracle(f"<{o1.name},{o2.name}>", answer,
                  range_finite=o1.range_finite and o2.range_finite,
                  single_valued=o1.single_valued and o2.single_valued)


def power_oracle(o: Oracle, n: int) -> Oracle:
    if n < 1:
        raise ValueError("power needs n >= 1")
    acc = o
    for _ in range(n - 1):
        acc = product_oracle(acc, o)
    return Oracle(f"<{o.name}>^{n}", acc.answer, acc.domain_check, acc.range_finite,
                  acc.single_valued)


def coproduct_oracle(oracles: Sequence[Oracle]) -> Oracle:
    oracles = list(oracles)

    def answer(s):
        i, x = decode_index(s)
        if i >= len(oracles):
            raise IndexOutOfRange(f"index {i} with {len(oracles)} components")
        return frozenset(encode_index(i, y) for y in oracles[i].answers(x))

    return Oracle("[" + ";".join(o.name for o in oracles) + "]", answer,
                  range_finite=all(o.range_finite for o in oracles),
                  single_valued=all(o.single_valued for o in oracles))


def parallel_finite_oracle(o: Oracle, count: int) -> Oracle:
    def answer(s):
        comps = lambda_unpack(s, count).components
        choices = [o.answers(c) for c in comps]
        return frozenset(lambda_pack(list(ys)) for ys in itertools.product(*choices))
    return Oracle(f"{o.name}*{count}", answer, range_finite=o.range_finite,
                  single_valued=o.single_valued)


# -- oracle computation -------------------------------------------------------

@dataclass
class CallRecord:
    depth_at_call: int
    query: EvSeq
    answer: EvSeq
    query_steps: int
    nested: list = field(default_factory=list)

    def count(self) -> int:
        return 1 + sum(c.count() for c in self.nested)

    def nesting(self) -> int:
        return 1 + max((c.nesting() for c in self.nested), default=0)


@dataclass
class OracleRunResult:
    base: RunResult
    calls: list
    depth: int
    approximate: bool = False
    inlined_calls: int = 0
    branching: list = field(default_factory=list)
    diverged_query: Optional[str] = None

    @property
    def status(self) -> Status:
        return self.base.status

    @property
    def output(self):
        return self.base.output

    @property
    def total_calls(self) -> int:
        return sum(c.count() for c in self.calls)

    @property
    def max_nesting(self) -> int:
        return max((c.nesting() for c in self.calls), default=0)


class _Context:
    def __init__(self, oracle, fuel, call_limit, choices, mode, query_fuel, inline):
        self.oracle = oracle
        self.fuel = fuel
        self.call_limit = call_limit
        self.choices = None if choices is None else list(choices)
        self.mode = mode
        self.query_fuel = query_fuel
        self.inline = inline
        self.calls_made = 0
        self.branching = []
        self.approximate = False
        self.inlined = 0
        self.diverged = None

    def pick(self, answers):
        k = len(self.branching)
        self.branching.append(len(answers))
        if self.choices is None:
            return self.oracle.select(answers)
        return answers[self.choices[k]] if k < len(self.choices) else answers[0]


class OracleHandler:
    """Resolves query vertices for one nesting level."""

    def __init__(self, ctx: _Context, depth: int, calls: list):
        self.ctx = ctx
        self.depth = depth
        self.calls = calls

    def __call__(self, ex: Execution) -> Optional[Status]:
        ctx = self.ctx
        if self.depth == 0:
            if ctx.inline is not None:
                return self._inline(ex)
            return Status.QUERY_ENCOUNTERED
        if ctx.call_limit is not None and ctx.calls_made >= ctx.call_limit:
            return Status.CALL_LIMIT_EXCEEDED
        ctx.calls_made += 1
        nested = []
        sub = ex.spawn(OracleHandler(ctx, self.depth - 1, nested))
        x = self._query_value(sub)
        if x is None:
            return Status.QUERY_DIVERGED
        self.resume(ex, self.deliver(x, sub.steps, nested))
        return None

    def _query_value(self, sub) -> Optional[EvSeq]:
        ctx = self.ctx
        if ctx.mode == "approximate" and ctx.query_fuel is not None:
            try:
                while sub.status is None and sub.steps < ctx.query_fuel:
                    sub.advance()
            except InputUnavailable as stop:
                sub.status = stop.status
            if sub.status is None:
                ctx.approximate = True
                return EvSeq(sub.written_prefix(), 0)
        else:
            sub.run_to_end()
        if sub.status is Status.ACCEPTED:
            return sub.tapes[3].freeze()
        if sub.status is Status.LOOPING:
            return sub.limit
        if sub.status in (Status.FUEL_EXHAUSTED, Status.PERIODIC) and ctx.mode == "approximate":
            ctx.approximate = True
            return EvSeq(sub.written_prefix(), 0)
        if ctx.diverged is None:
            ctx.diverged = sub.status.value
        return None

    def deliver(self, x: EvSeq, steps: int, nested: list) -> EvSeq:
        """Ask the oracle about ``x`` and record the call."""
        y = self.ctx.pick(self.ctx.oracle.answers(x))
        self.calls.append(CallRecord(self.depth, x, y, steps, nested))
        return y

    def external(self, x: EvSeq, steps: int = 0):
        """One call made by an interpreter-backed machine: the answer, or a terminal status."""
        ctx = self.ctx
        if self.depth == 0:
            return Status.QUERY_ENCOUNTERED
        if ctx.call_limit is not None and ctx.calls_made >= ctx.call_limit:
            return Status.CALL_LIMIT_EXCEEDED
        ctx.calls_made += 1
        return self.deliver(x, steps, [])

    @staticmethod
    def resume(ex: Execution, y: EvSeq):
        ex.tapes[2] = Tape(y)
        ex.heads[2] = 0
        ex.v = ex.prog.s0[ex.v]

    def _inline(self, ex):
        # Depth-0 query answered by direct simulation of the query computation
        # followed by the oracle machine; no oracle call is made.
        ctx = self.ctx
        sub = ex.spawn(None)
        sub.run_to_end()
        if not sub.status.has_output:
            ctx.diverged = ctx.diverged or sub.status.value
            return Status.QUERY_DIVERGED
        x = sub.tapes[3].freeze() if sub.status is Status.ACCEPTED else sub.limit
        g = start_execution(ctx.inline, x, ctx.fuel, detect_cycles=True)
        g.run_to_end()
        if not g.status.has_output:
            ctx.diverged = ctx.diverged or g.status.value
            return Status.QUERY_DIVERGED
        ctx.inlined += 1
        self.resume(ex, g.result().output)
        return None


def run_with_oracle(m, o: Oracle, input, depth: int, fuel: int,
                    call_limit: Optional[int] = None, *, choices: Optional[Sequence[int]] = None,
                    mode: str = "exact", query_fuel: Optional[int] = None,
                    inline: Optional[MachineGraph] = None, detect_cycles: bool = False,
                    prefix_goal: Optional[int] = None, trace=None) -> OracleRunResult:
    """Run ``m`` with oracle ``o`` and query depth ``depth``.

    ``fuel`` is one budget shared by the main computation and every query
    computation.  ``choices``, when given, fixes answer indices (in sorted
    order) for the first calls and takes index 0 afterwards; without it the
    oracle's select policy decides.  In
    ``"approximate"`` mode a query that does not finish within ``query_fuel``
    steps is replaced by its written prefix followed by zeros and the result
    is flagged approximate.  ``inline`` answers depth-0 queries by simulating
    the given query-free machine.
    """
    if mode not in ("exact", "approximate"):
        raise ValueError(f"unknown mode {mode!r}")
    ctx = _Context(o, Fuel(fuel), call_limit, choices, mode, query_fuel, inline)
    calls = []
    ex = start_execution(m, input, ctx.fuel, OracleHandler(ctx, depth, calls),
                         detect_cycles=detect_cycles, prefix_goal=prefix_goal, trace=trace)
    ex.run_to_end()
    return OracleRunResult(ex.result(), calls, depth, ctx.approximate, ctx.inlined,
                           ctx.branching, ctx.diverged)


# -- the functions F_n --------------------------------------------------------

@dataclass(frozen=True)
class Observation:
    """What a run tells about F_n(x) at a finite horizon.

    ``kind`` is ``"output"`` when at least ``prefix_len`` output symbols are
    certain, ``"partial"`` when fuel ran out first, and ``"none"`` when the
    run provably has no output.
    """

    kind: str
    prefix: tuple = ()

    def __str__(self):
        return f"{self.kind}:{''.join(map(str, self.prefix))}"


_NO_OUTPUT = {Status.REJECTED, Status.STUCK, Status.QUERY_ENCOUNTERED, Status.QUERY_DIVERGED,
              Status.CALL_LIMIT_EXCEEDED, Status.SILENT}


def observe(r: RunResult, prefix_len: int) -> Observation:
    if isinstance(r.output, EvSeq):
        return Observation("output", r.output.take(prefix_len))
    if r.status in _NO_OUTPUT:
        return Observation("none")
    if len(r.output) >= prefix_len:
        return Observation("output", tuple(r.output[:prefix_len]))
    return Observation("partial", tuple(r.output))


def outcomes(m, o: Oracle, x, depth: int, fuel: int, prefix_len: int,
             exhaustive: bool = False, call_limit: Optional[int] = None) -> frozenset:
    """Observations of F_depth(x); with ``exhaustive`` over every answer choice."""
    kw = dict(detect_cycles=True, prefix_goal=prefix_len, call_limit=call_limit)
    if not exhaustive:
        return frozenset({observe(run_with_oracle(m, o, x, depth, fuel, **kw).base, prefix_len)})
    seen = set()
    stack = [()]
    while stack:
        script = stack.pop()
        r = run_with_oracle(m, o, x, depth, fuel, choices=script, **kw)
        seen.add(observe(r.base, prefix_len))
        for j in range(len(script), len(r.branching)):
            for alt in range(1, r.branching[j]):
                stack.append(tuple(script) + (0,) * (j - len(script)) + (alt,))
    return frozenset(seen)


def f_n_eval(m, o: Oracle, inputs: Iterable, depth: int, fuel: int, prefix_len: int,
             exhaustive: bool = False) -> dict:
    return {x: outcomes(m, o, x, depth, fuel, prefix_len, exhaustive) for x in inputs}


def stabilization_check(m, o: Oracle, inputs: Sequence, n_max: int, fuel: int,
                        prefix_len: int, exhaustive: bool = False) -> Optional[int]:
    """Least n0 <= n_max with F_n0 = F_n for every n0 <= n <= n_max + 1, on the samples.

    One equal step is not enough: a machine whose query computations query
    again can have F_0 = F_1 != F_2, because queries start from configurations
    other than the initial one.  The result only looks at the samples and up to
    depth ``n_max + 1``; it approximates stabilization, it does not establish it.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    inputs = list(inputs)
    table = [f_n_eval(m, o, inputs, n, fuel, prefix_len, exhaustive) for n in range(n_max + 2)]
    for n0 in range(n_max + 1):
        if all(table[n] == table[n0] for n in range(n0 + 1, n_max + 2)):
            return n0
    return None


# -- oracle names used on the command line ------------------------------------

def resolve_oracle(spec: str, load_machine=None, fuel: int = 100_000) -> Oracle:
    """Build an oracle from ``lpo``, ``max``, ``machine:<file>``, ``product:<a>,<b>``,
    ``power:<a>^<n>``, ``coproduct:<a>;<b>;...`` or ``parfin:<a>*<n>``."""
    spec = spec.strip()
    if spec == "lpo":
        return lpo()
    if spec == "max":
        return max_oracle()
    kind, _, rest = spec.partition(":")
    if kind == "machine" and rest:
        if load_machine is None:
            from .dsl import load_machine
        return computable_oracle(load_machine(rest), fuel)
    if kind == "product" and "," in rest:
        a, b = rest.split(",", 1)
        return product_oracle(resolve_oracle(a, load_machine, fuel),
                              resolve_oracle(b, load_machine, fuel))
    if kind == "power" and "^" in rest:
        a, n = rest.rsplit("^", 1)
        return power_oracle(resolve_oracle(a, load_machine, fuel), int(n))
    if kind == "coproduct" and rest:
        return coproduct_oracle([resolve_oracle(a, load_machine, fuel) for a in rest.split(";")])
    if kind == "parfin" and "*" in rest:
        a, n = rest.rsplit("*", 1)
        return parallel_finite_oracle(resolve_oracle(a, load_machine, fuel), int(n))
    raise T2MError(f"unknown oracle {spec!r}")
