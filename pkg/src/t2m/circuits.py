"""Arithmetic circuits over finite sets of naturals.

Gates: constants, union, intersection, elementwise sum, the continuous
product ``A x B = {a*b} | {0}`` and the test gate (empty stays empty, any
non-empty set becomes ``{0}``).  Each test gate costs one LPO call when the
circuit is run as an oracle machine.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import CircuitError
from .machine import RunResult, Status
from .dsl import parse_machine
from .oracle import Oracle, lpo, run_with_oracle
from .seq import ONE_ZEROS, ZERO, EvSeq


@dataclass(frozen=True)
class NatSet:
    elements: tuple = ()

    def __post_init__(self):
        els = tuple(sorted(set(int(e) for e in self.elements)))
        if any(e < 0 for e in els):
            raise ValueError("sets hold natural numbers")
        object.__setattr__(self, "elements", els)

    @classmethod
    def of(cls, *els):
        return cls(els)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __str__(self):
        return "{" + ",".join(map(str, self.elements)) + "}"


@dataclass(frozen=True)
class Const:
    value: NatSet


@dataclass(frozen=True)
class Union:
    a: str
    b: str


@dataclass(frozen=True)
class Intersect:
    a: str
    b: str


@dataclass(frozen=True)
class Plus:
    a: str
    b: str


@dataclass(frozen=True)
class TimesC:
    a: str
    b: str


@dataclass(frozen=True)
class Test:
    a: str
    __test__ = False  # keeps pytest from collecting the gate class


_BINARY = {"union": Union, "intersect": Intersect, "plus": Plus, "times": TimesC}
_WORD = {v: k for k, v in _BINARY.items()}


@dataclass
class Circuit:
    gates: list  # (name, gate) in topological order
    outputs: list

    def __post_init__(self):
        seen = set()
        for name, g in self.gates:
            if name in seen:
                raise CircuitError(f"gate {name} defined twice")
            for arg in _operands(g):
                if arg not in seen:
                    raise CircuitError(f"gate {name} uses {arg} before its definition")
            seen.add(name)
        for o in self.outputs:
            if o not in seen:
                raise CircuitError(f"unknown output gate {o}")

    def to_text(self) -> str:
        lines = []
        for name, g in self.gates:
            if isinstance(g, Const):
                lines.append(f"{name} = const {g.value}")
            elif isinstance(g, Test):
                lines.append(f"{name} = test {g.a}")
            else:
                lines.append(f"{name} = {_WORD[type(g)]} {g.a} {g.b}")
        lines.extend(f"output {o}" for o in self.outputs)
        return "\n".join(lines) + "\n"


def _operands(g):
    if isinstance(g, Const):
        return ()
    if isinstance(g, Test):
        return (g.a,)
    return (g.a, g.b)


_LINE = re.compile(r"^(\w+)\s*=\s*(\w+)\s*(.*)$")


def parse_circuit(text: str) -> Circuit:
    gates, outputs = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("output"):
            outputs.extend(line.split()[1:])
            continue
        m = _LINE.match(line)
        if not m:
            raise CircuitError(f"line {lineno}: cannot parse {raw!r}")
        name, op, rest = m.groups()
        args = rest.split()
        if op == "const":
            body = rest.strip()
            if not (body.startswith("{") and body.endswith("}")):
                raise CircuitError(f"line {lineno}: constant must be written {{a,b,...}}")
            inner = body[1:-1].strip()
            try:
                els = [int(t) for t in inner.split(",")] if inner else []
            except ValueError:
                raise CircuitError(f"line {lineno}: bad constant {body}") from None
            gates.append((name, Const(NatSet(els))))
        elif op == "test" and len(args) == 1:
            gates.append((name, Test(args[0])))
        elif op in _BINARY and len(args) == 2:
            gates.append((name, _BINARY[op](*args)))
        else:
            raise CircuitError(f"line {lineno}: unknown gate {op!r} or wrong arity")
    if not outputs:
        raise CircuitError("no output line")
    return Circuit(gates, outputs)


def apply_gate(g, vals: Mapping[str, NatSet]) -> NatSet:
    if isinstance(g, Const):
        return g.value
    if isinstance(g, Test):
        return NatSet((0,)) if len(vals[g.a]) else NatSet()
    a, b = vals[g.a].elements, vals[g.b].elements
    if isinstance(g, Union):
        return NatSet(a + b)
    if isinstance(g, Intersect):
        return NatSet(set(a) & set(b))
    if isinstance(g, Plus):
        return NatSet(x + y for x in a for y in b)
    return NatSet([x * y for x in a for y in b] + [0])


def eval_circuit(c: Circuit, inputs: Optional[Mapping[str, NatSet]] = None) -> dict:
    """Output values by gate name; ``inputs`` replaces constant gates by name."""
    inputs = inputs or {}
    vals = {}
    for name, g in c.gates:
        if isinstance(g, Const) and name in inputs:
            vals[name] = inputs[name]
        else:
            vals[name] = apply_gate(g, vals)
    return {o: vals[o] for o in c.outputs}


def count_test_gates(c: Circuit) -> int:
    return sum(isinstance(g, Test) for _, g in c.gates)


# -- tape encoding ---------------------------------------------------------------

def encode_set(s: NatSet) -> tuple:
    """Element k becomes ``1^(k+1) 0``; an extra 0 closes the list."""
    cells = []
    for k in s:
        cells.extend([1] * (k + 1))
        cells.append(0)
    cells.append(0)
    return tuple(cells)


def encode_sets(sets) -> EvSeq:
    cells = []
    for s in sets:
        cells.extend(encode_set(s))
    return EvSeq(tuple(cells), 0)


def decode_sets(x: EvSeq, count: int) -> list:
    out, i = [], 0
    for _ in range(count):
        els = []
        while x.at(i) == 1:
            run_len = 0
            while x.at(i) == 1:
                run_len += 1
                i += 1
            els.append(run_len - 1)
            i += 1
        i += 1
        out.append(NatSet(els))
    return out


# Query computation of a test gate: reads the encoded operand and prints a 1
# as soon as it meets an element.
NONEMPTY_QUERY = parse_machine("""
machine nonempty {
  start s0;
  s0: s -> q;
  q: ? cont=k query=scan;
  scan: t0 -> done, hit;
  hit: w3=1 -> done;
  done: accept;
  k: t2 -> a0, a1;
  a1: w3=1 -> a0;
  a0: accept;
}
""")


class _PlanExecution:
    def __init__(self, plan, inputs, fuel, handler):
        self.plan = plan
        self.inputs = inputs
        self.fuel = fuel
        self.handler = handler
        self.status = None
        self.steps = 0
        self._result = None

    def _test(self, operand: NatSet):
        # the query stream comes from actually running the scan machine
        sub = run_with_oracle(NONEMPTY_QUERY, _RECORD, EvSeq(encode_set(operand), 0), 1,
                              max(self.fuel.left, 1))
        x = sub.calls[0].query
        self.fuel.left -= sub.base.steps_used
        self.steps += sub.base.steps_used
        if self.handler is None:
            return Status.QUERY_ENCOUNTERED
        return self.handler.external(x, sub.calls[0].query_steps)

    def run_to_end(self):
        if self.status is not None:
            return self.status
        c = self.plan.circuit
        vals = {}
        for name, g in c.gates:
            if isinstance(g, Const) and name in self.inputs:
                vals[name] = self.inputs[name]
            elif isinstance(g, Test):
                y = self._test(vals[g.a])
                if isinstance(y, Status):
                    self.status = y
                    self._result = RunResult(y, (), self.steps, None)
                    return y
                vals[name] = NatSet((0,)) if y == ONE_ZEROS else NatSet()
            else:
                vals[name] = apply_gate(g, vals)
        self.status = Status.ACCEPTED
        out = encode_sets([vals[o] for o in c.outputs])
        self._result = RunResult(Status.ACCEPTED, out, self.steps, None)
        return self.status

    def result(self):
        return self._result


# records the query without an oracle of its own: answers 0^N
_RECORD = Oracle("record", lambda x: frozenset({ZERO}))


@dataclass
class CircuitPlan:
    """Interpreter-backed oracle machine evaluating ``circuit``.

    Non-test gates are computed directly; every test gate makes one LPO
    call whose query is produced by running :data:`NONEMPTY_QUERY` on the
    encoded operand.
    """

    circuit: Circuit
    lpo_calls: int
    level_bound: int
    inputs: dict = field(default_factory=dict)
    name: str = "circuit"

    def is_query_free(self):
        return self.lpo_calls == 0

    def bind(self, inputs: Mapping[str, NatSet]) -> "CircuitPlan":
        return CircuitPlan(self.circuit, self.lpo_calls, self.level_bound, dict(inputs), self.name)

    def start_execution(self, input, fuel, handler=None, **options):
        return _PlanExecution(self, self.inputs, fuel, handler)

    def evaluate(self, inputs: Optional[Mapping[str, NatSet]] = None, fuel: int = 1_000_000):
        """``(outputs by name, OracleRunResult)`` under LPO at depth 1."""
        plan = self.bind(inputs) if inputs is not None else self
        r = run_with_oracle(plan, lpo(), ZERO, 1, fuel)
        if r.status is not Status.ACCEPTED:
            raise CircuitError(f"compiled circuit stopped with {r.status.value}")
        sets = decode_sets(r.output, len(self.circuit.outputs))
        return dict(zip(self.circuit.outputs, sets)), r


def compile_to_machine(c: Circuit) -> CircuitPlan:
    n = count_test_gates(c)
    return CircuitPlan(c, n, 2 ** n)
